//! JSON job runner behind the `lti-laplace` binary.
//!
//! A job is `{"command": NAME, "payload": {...}}`. Results are written as
//! compact JSON with every float in `{:.16e}` form, or as CSV for `stepresp`.
//! Exit codes: 0 success, 1 domain error, 2 malformed input.

use std::io;
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::algebra::{Polynomial, RationalFunction};
use crate::crosstalk::{
    aggressor_coefficients, aggressor_lists, victim_coefficients, victim_lists, AggressorParams,
    VictimParams,
};
use crate::error::Error;
use crate::laplace::{inverse, transform, LaplaceExpr, LaplaceTerm};
use crate::lerch::{
    lerch_sample_check_with_tol, log_substitution_check, moment_zero_test, transform_equal,
    SampledFunction,
};
use crate::systems::{cascade, forced_response, ode_to_tf, tf_to_ode, SystemSpec, TransferFunction};
use crate::timefun::{Mode, TimeExpr};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transform,
    Invert,
    Ode2Tf,
    Tf2Ode,
    Equiv,
    LerchSample,
    Moments,
    Crosstalk,
    StepResp,
    LogSubst,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Transform,
        Command::Invert,
        Command::Ode2Tf,
        Command::Tf2Ode,
        Command::Equiv,
        Command::LerchSample,
        Command::Moments,
        Command::Crosstalk,
        Command::StepResp,
        Command::LogSubst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Invert => "invert",
            Command::Ode2Tf => "ode2tf",
            Command::Tf2Ode => "tf2ode",
            Command::Equiv => "equiv",
            Command::LerchSample => "lerch-sample",
            Command::Moments => "moments",
            Command::Crosstalk => "crosstalk",
            Command::StepResp => "stepresp",
            Command::LogSubst => "logsubst",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

/// Job document. The payload is validated once the command is known.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: String,
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub time_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { tol: 1e-6, time_scale: 1.0 }
    }
}

/// Exit code plus the bytes to write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
}

// ---------------------------------------------------------------------------
// Documents

/// Complex number. Written as `[re, im]`; a bare real is accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cx(pub Complex64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair(f64, f64),
        }
        Ok(match Repr::deserialize(d).map_err(|_| {
            serde::de::Error::custom("expected a number or a [re, im] pair")
        })? {
            Repr::Real(re) => Cx(Complex64::new(re, 0.0)),
            Repr::Pair(re, im) => Cx(Complex64::new(re, im)),
        })
    }
}

fn poly_doc(p: &Polynomial) -> Vec<Cx> {
    p.coeffs().iter().map(|&z| Cx(z)).collect()
}

fn poly_from(doc: &[Cx]) -> Polynomial {
    Polynomial::new(doc.iter().map(|z| z.0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDoc {
    pub amplitude: Cx,
    #[serde(default)]
    pub power: u32,
    #[serde(default)]
    pub exponent: Cx,
    #[serde(default)]
    pub shift: f64,
}

/// `Σ amplitude·(t−shift)^power·e^(exponent·(t−shift))·u(t−shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalDoc {
    pub modes: Vec<ModeDoc>,
}

impl SignalDoc {
    pub fn from_time(f: &TimeExpr) -> Self {
        let modes = f
            .modes()
            .iter()
            .map(|m| ModeDoc {
                amplitude: Cx(m.amplitude),
                power: m.power,
                exponent: Cx(m.exponent),
                shift: m.shift,
            })
            .collect();
        Self { modes }
    }

    pub fn to_time(&self) -> crate::Result<TimeExpr> {
        TimeExpr::new(
            self.modes
                .iter()
                .map(|m| Mode::new(m.amplitude.0, m.power, m.exponent.0, m.shift))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    #[serde(default)]
    pub delay: f64,
    pub num: Vec<Cx>,
    pub den: Vec<Cx>,
}

/// `Σ e^(−delay·s)·num(s)/den(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceDoc {
    pub terms: Vec<TermDoc>,
    #[serde(default)]
    pub abscissa: Option<f64>,
}

impl LaplaceDoc {
    pub fn from_expr(e: &LaplaceExpr) -> Self {
        let terms = e
            .terms()
            .iter()
            .map(|t| TermDoc { delay: t.delay, num: poly_doc(t.rf.num()), den: poly_doc(t.rf.den()) })
            .collect();
        Self { terms, abscissa: Some(e.abscissa()) }
    }

    pub fn to_expr(&self) -> crate::Result<LaplaceExpr> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(LaplaceTerm {
                    delay: t.delay,
                    rf: RationalFunction::new(poly_from(&t.num), poly_from(&t.den))?,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        LaplaceExpr::new(terms)
    }
}

/// Transfer function document; `abscissa` is informational on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfDoc {
    pub num: Vec<Cx>,
    pub den: Vec<Cx>,
    #[serde(default)]
    pub abscissa: Option<f64>,
}

impl TfDoc {
    pub fn from_tf(h: &TransferFunction) -> Self {
        Self { num: poly_doc(h.rf.num()), den: poly_doc(h.rf.den()), abscissa: Some(h.abscissa) }
    }

    pub fn to_tf(&self) -> crate::Result<TransferFunction> {
        TransferFunction::new(RationalFunction::new(poly_from(&self.num), poly_from(&self.den))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EquivPayload {
    f: LaplaceDoc,
    g: LaplaceDoc,
}

fn default_count() -> usize {
    5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LerchPayload {
    f: SignalDoc,
    g: SignalDoc,
    #[serde(default = "default_count")]
    count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentsPayload {
    a: f64,
    b: f64,
    k: usize,
    #[serde(default)]
    samples: Option<Vec<f64>>,
    #[serde(default)]
    poly: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrosstalkPayload {
    aggressor: AggressorParams,
    victim: VictimParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepPayload {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    t_max: f64,
    dt: f64,
    #[serde(default)]
    input: Option<SignalDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogSubstPayload {
    signal: SignalDoc,
    n: u32,
}

// ---------------------------------------------------------------------------
// Output formatting

/// Formats a float with 17 significant digits; `-0` prints as `0`.
pub fn format_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

struct FixedFloat;

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Compact JSON with fixed float formatting and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat);
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

// ---------------------------------------------------------------------------
// Dispatch

enum Failure {
    Malformed { kind: &'static str, path: String, message: String },
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn malformed(path: &str, message: impl Into<String>) -> Failure {
    Failure::Malformed { kind: "malformed_input", path: path.into(), message: message.into() }
}

fn parse_payload<T: DeserializeOwned>(payload: Value) -> Result<T, Failure> {
    serde_path_to_error::deserialize(payload).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "payload".to_string() } else { format!("payload.{inner}") };
        malformed(&path, e.into_inner().to_string())
    })
}

fn complex_doc(z: Complex64) -> Value {
    serde_json::to_value(Cx(z)).expect("complex to value")
}

fn system(alpha: Vec<f64>, beta: Vec<f64>, opts: &Options) -> crate::Result<SystemSpec> {
    let sys = SystemSpec::new(alpha, beta)?;
    if opts.time_scale == 1.0 {
        Ok(sys)
    } else {
        sys.rescale_time(opts.time_scale)
    }
}

fn scaled_poly(doc: &[Cx], tau: f64) -> Vec<Cx> {
    doc.iter()
        .enumerate()
        .map(|(k, z)| Cx(z.0 / tau.powi(k as i32)))
        .collect()
}

fn system_value(sys: &SystemSpec) -> Value {
    json!({"alpha": sys.alpha(), "beta": sys.beta()})
}

enum Body {
    Json(Value),
    Csv(String),
}

fn dispatch(cmd: Command, payload: Value, opts: &Options) -> Result<Body, Failure> {
    let body = match cmd {
        Command::Transform => {
            let f = parse_payload::<SignalDoc>(payload)?.to_time()?;
            Body::Json(json!(LaplaceDoc::from_expr(&transform(&f))))
        }
        Command::Invert => {
            let e = parse_payload::<LaplaceDoc>(payload)?.to_expr()?;
            Body::Json(json!(SignalDoc::from_time(&inverse(&e)?)))
        }
        Command::Ode2Tf => {
            let doc: SystemDoc = parse_payload(payload)?;
            let sys = system(doc.alpha, doc.beta, opts)?;
            let h = ode_to_tf(&sys)?;
            Body::Json(json!({
                "num": sys.beta(),
                "den": sys.alpha(),
                "abscissa": h.abscissa,
            }))
        }
        Command::Tf2Ode => {
            let mut doc: TfDoc = parse_payload(payload)?;
            if opts.time_scale != 1.0 {
                doc.num = scaled_poly(&doc.num, opts.time_scale);
                doc.den = scaled_poly(&doc.den, opts.time_scale);
            }
            Body::Json(system_value(&tf_to_ode(&doc.to_tf()?)?))
        }
        Command::Equiv => {
            let p: EquivPayload = parse_payload(payload)?;
            let (f, g) = (p.f.to_expr()?, p.g.to_expr()?);
            Body::Json(json!({"equal": transform_equal(&f, &g)}))
        }
        Command::LerchSample => {
            let p: LerchPayload = parse_payload(payload)?;
            let v = lerch_sample_check_with_tol(&p.f.to_time()?, &p.g.to_time()?, p.count, opts.tol)?;
            let points: Vec<Value> = v.sample_points.iter().map(|&z| complex_doc(z)).collect();
            Body::Json(json!({
                "exact_equal": v.exact_equal,
                "sampled_equal": v.sampled_equal,
                "sample_points": points,
                "max_sample_gap": v.max_sample_gap,
                "threshold_n": v.threshold_n,
            }))
        }
        Command::Moments => {
            let p: MomentsPayload = parse_payload(payload)?;
            let report = match (p.samples, p.poly) {
                (Some(values), None) => {
                    let phi = SampledFunction::new(p.a, p.b, values)?;
                    moment_zero_test(|x| phi.eval(x), p.a, p.b, p.k)?
                }
                (None, Some(coeffs)) => moment_zero_test(
                    |x| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
                    p.a,
                    p.b,
                    p.k,
                )?,
                _ => return Err(malformed("payload", "exactly one of `samples` or `poly` is required")),
            };
            let bound = match report.certified_l2_bound {
                Some(b) => json!(b),
                None => json!("inconclusive"),
            };
            Body::Json(json!({
                "interval": [report.interval.0, report.interval.1],
                "max_degree": report.max_degree,
                "moments": report.moments,
                "residual_l2": report.residual_l2,
                "certified_l2_bound": bound,
            }))
        }
        Command::Crosstalk => {
            let p: CrosstalkPayload = parse_payload(payload)?;
            let tau = opts.time_scale;
            let agg = aggressor_lists(&p.aggressor)?.rescale_time(tau)?;
            let vic = victim_lists(&p.victim)?.rescale_time(tau)?;
            let (h_agg, h_vic) = (ode_to_tf(&agg)?, ode_to_tf(&vic)?);
            let total = cascade(&h_vic, &h_agg)?;
            Body::Json(json!({
                "aggressor": {
                    "coefficients": aggressor_coefficients(&p.aggressor)?,
                    "beta": agg.beta(),
                    "alpha": agg.alpha(),
                    "tf": TfDoc::from_tf(&h_agg),
                },
                "victim": {
                    "coefficients": victim_coefficients(&p.victim)?,
                    "beta": vic.beta(),
                    "alpha": vic.alpha(),
                    "tf": TfDoc::from_tf(&h_vic),
                },
                "total": TfDoc::from_tf(&total),
            }))
        }
        Command::StepResp => {
            let p: StepPayload = parse_payload(payload)?;
            if !(p.dt > 0.0 && p.t_max > 0.0 && p.dt.is_finite() && p.t_max.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "need 0 < dt and 0 < t_max, got dt = {}, t_max = {}",
                    p.dt, p.t_max
                ))
                .into());
            }
            let steps = (p.t_max / p.dt).round();
            if steps > 1e7 {
                return Err(Error::InvalidArgument(format!("{steps} samples requested")).into());
            }
            let sys = system(p.alpha, p.beta, opts)?;
            let x = match p.input {
                Some(doc) => doc.to_time()?,
                None => TimeExpr::step(0.0),
            };
            let y = forced_response(&sys, &x)?;
            let mut csv = String::from("t,value_re,value_im\n");
            for k in 0..=steps as usize {
                let t = k as f64 * p.dt;
                let v = y.eval(t)?;
                csv.push_str(&format!("{},{},{}\n", format_f64(t), format_f64(v.re), format_f64(v.im)));
            }
            Body::Csv(csv)
        }
        Command::LogSubst => {
            let p: LogSubstPayload = parse_payload(payload)?;
            let r = log_substitution_check(&p.signal.to_time()?, p.n)?;
            Body::Json(json!({
                "lhs": complex_doc(r.lhs),
                "rhs": complex_doc(r.rhs),
                "gap": r.gap,
                "within_tol": r.gap <= opts.tol,
            }))
        }
    };
    Ok(body)
}

/// Runs one job given as JSON text.
pub fn run(input: &str, opts: &Options) -> Outcome {
    let result = serde_path_to_error::deserialize::<_, JobSpec>(&mut serde_json::Deserializer::from_str(input))
        .map_err(|e| {
            let inner = e.path().to_string();
            let path = if inner == "." || inner == "?" { "job".to_string() } else { inner };
            malformed(&path, e.into_inner().to_string())
        })
        .and_then(|job| {
            let cmd = job.command.parse::<Command>().map_err(|message| Failure::Malformed {
                kind: "unknown_command",
                path: "command".into(),
                message,
            })?;
            dispatch(cmd, job.payload, opts)
        });
    match result {
        Ok(Body::Json(v)) => Outcome { code: EXIT_OK, body: to_json(&v) },
        Ok(Body::Csv(s)) => Outcome { code: EXIT_OK, body: s },
        Err(Failure::Domain(e)) => Outcome {
            code: EXIT_DOMAIN,
            body: to_json(&json!({"error": {"kind": e.kind(), "message": e.to_string()}})),
        },
        Err(Failure::Malformed { kind, path, message }) => Outcome {
            code: EXIT_MALFORMED,
            body: to_json(&json!({"error": {"kind": kind, "path": path, "message": message}})),
        },
    }
}
