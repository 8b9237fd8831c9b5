//! Coupled 2-π RC interconnect model of single-event crosstalk.
//!
//! The aggressor net is driven through `Rth` and produces `V2`; the victim net,
//! held by its driver `Rd`, picks up `V2` through the coupling capacitor `Cc`.
//! Both nets are given by their ODE coefficient lists; the overall noise
//! transfer function is the cascade `victim·aggressor`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{cascade, ode_to_tf, response_through, SystemSpec, TransferFunction};
use crate::timefun::TimeExpr;

/// Aggressor net parameters in ohms and farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggressorParams {
    pub r1a: f64,
    pub r2a: f64,
    pub rth: f64,
    pub c1a: f64,
    pub c2a: f64,
    pub c3a: f64,
}

/// Victim net parameters in ohms and farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VictimParams {
    pub r1v: f64,
    pub r2v: f64,
    pub rd: f64,
    pub cc: f64,
    pub c1v: f64,
    pub c2v: f64,
    pub c3v: f64,
}

fn check_positive(values: &[(&'static str, f64)]) -> Result<()> {
    match values.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        Some((name, _)) => Err(Error::NonPositiveComponent(name)),
        None => Ok(()),
    }
}

impl AggressorParams {
    pub fn uniform(r: f64, c: f64) -> Self {
        Self {
            r1a: r,
            r2a: r,
            rth: r,
            c1a: c,
            c2a: c,
            c3a: c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive(&[
            ("r1a", self.r1a),
            ("r2a", self.r2a),
            ("rth", self.rth),
            ("c1a", self.c1a),
            ("c2a", self.c2a),
            ("c3a", self.c3a),
        ])
    }
}

impl VictimParams {
    pub fn uniform(r: f64, c: f64) -> Self {
        Self {
            r1v: r,
            r2v: r,
            rd: r,
            cc: c,
            c1v: c,
            c2v: c,
            c3v: c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive(&[
            ("r1v", self.r1v),
            ("r2v", self.r2v),
            ("rd", self.rd),
            ("cc", self.cc),
            ("c1v", self.c1v),
            ("c2v", self.c2v),
            ("c3v", self.c3v),
        ])
    }
}

/// Input coefficients `[A, B, C]` and output coefficients `[D, E, F, G, H]`
/// of the aggressor, without the leading ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggressorCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

/// `[A′, B′, C′]` and `[D′, E′, F′, G′]` of the victim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VictimCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

// The long E and F sums are kept addend by addend.

fn aggressor_e_terms(p: &AggressorParams) -> [f64; 5] {
    let AggressorParams { r1a, r2a, rth, c1a, c2a, c3a } = *p;
    [
        2.0 * r1a * c2a * (2.0 * r2a * c3a + rth * c1a + rth * c3a),
        2.0 * rth * c3a * (r1a * c1a + r2a * c1a + r2a * c2a),
        (r1a * r1a + r1a * rth) * (c2a * c2a + c3a * c3a),
        r2a * c3a * c3a * (r2a + rth),
        2.0 * r1a * c3a * (r1a * c2a + r2a * c3a),
    ]
}

fn aggressor_f_terms(p: &AggressorParams) -> [f64; 4] {
    let AggressorParams { r1a, r2a, rth, c1a, c2a, c3a } = *p;
    [
        2.0 * r1a * r2a * c2a * c3a * (r1a * c2a + r1a * c3a + r2a * c3a + 2.0 * rth * c1a),
        2.0 * r1a * rth * c3a * (r2a * c2a * c2a + r2a * c2a * c3a + r1a * c1a * c2a + r2a * c1a * c3a),
        r1a * r1a * rth * c1a * (c2a * c2a + c3a * c3a),
        r2a * r2a * rth * c3a * c3a * (c1a + c2a),
    ]
}

fn victim_e_terms(p: &VictimParams) -> [f64; 4] {
    let VictimParams { r1v, r2v, rd, cc, c1v, c2v, c3v } = *p;
    [
        rd * r2v * c3v * (2.0 * cc + 2.0 * c1v + 2.0 * c2v + c3v),
        r1v * r2v * c3v * (2.0 * c2v + 2.0 * cc + c3v),
        rd * r1v * c1v * (cc + c2v + c3v),
        r2v * r2v * c3v * c3v,
    ]
}

fn victim_f_terms(p: &VictimParams) -> [f64; 2] {
    let VictimParams { r1v, r2v, rd, cc, c1v, c2v, c3v } = *p;
    [
        rd * r1v * r2v * c1v * c3v * (2.0 * cc + 2.0 * c2v + c3v),
        r2v * r2v * c3v * c3v * (rd * (cc + c1v + c2v) + r1v * (cc + c2v)),
    ]
}

pub fn aggressor_coefficients(p: &AggressorParams) -> Result<AggressorCoefficients> {
    p.validate()?;
    let AggressorParams { r1a, r2a, rth, c1a, c2a, c3a } = *p;
    Ok(AggressorCoefficients {
        a: r1a * (c2a + c3a) + 2.0 * r2a * c3a,
        b: r2a * c3a * (2.0 * r1a * c2a + r1a * c3a + r2a * c3a),
        c: r1a * r2a * r2a * c2a * c3a * c3a,
        d: 2.0 * r1a * (c2a + c3a) + 2.0 * r2a * c3a + rth * (c1a + c2a + c3a),
        e: aggressor_e_terms(p).iter().sum(),
        f: aggressor_f_terms(p).iter().sum(),
        g: r1a * r2a * r2a * c2a * c2a * c3a * c3a * (r1a + rth)
            + 2.0 * r1a * r2a * rth * c1a * c2a * c3a * (r1a * c2a + r1a * c3a + r2a * c3a),
        h: r1a * r1a * r2a * r2a * rth * c1a * c2a * c2a * c3a * c3a,
    })
}

pub fn victim_coefficients(p: &VictimParams) -> Result<VictimCoefficients> {
    p.validate()?;
    let VictimParams { r1v, r2v, rd, cc, c1v, c2v, c3v } = *p;
    Ok(VictimCoefficients {
        a: (rd + r1v) * cc,
        b: r2v * cc * c3v * (rd + r1v) + rd * r1v * cc * c1v,
        c: rd * r1v * r2v * cc * c1v * c3v,
        d: rd * (cc + c1v + c2v + c3v) + r1v * (cc + c2v + c3v) + 2.0 * r2v * c3v,
        e: victim_e_terms(p).iter().sum(),
        f: victim_f_terms(p).iter().sum(),
        g: rd * r1v * r2v * r2v * c1v * c3v * c3v * (cc + c2v),
    })
}

/// `beta = [1, A, B, C]`, `alpha = [1, D, E, F, G, H]`.
pub fn aggressor_lists(p: &AggressorParams) -> Result<SystemSpec> {
    let k = aggressor_coefficients(p)?;
    SystemSpec::new(vec![1.0, k.d, k.e, k.f, k.g, k.h], vec![1.0, k.a, k.b, k.c])
}

/// `beta = [0, A′, B′, C′]`, `alpha = [1, D′, E′, F′, G′]`.
pub fn victim_lists(p: &VictimParams) -> Result<SystemSpec> {
    let k = victim_coefficients(p)?;
    SystemSpec::new(vec![1.0, k.d, k.e, k.f, k.g], vec![0.0, k.a, k.b, k.c])
}

/// `V2(s)/Vin(s)`
pub fn aggressor_tf(p: &AggressorParams) -> Result<TransferFunction> {
    ode_to_tf(&aggressor_lists(p)?)
}

/// `Vout(s)/V2(s)`
pub fn victim_tf(p: &VictimParams) -> Result<TransferFunction> {
    ode_to_tf(&victim_lists(p)?)
}

/// `Vout(s)/Vin(s) = Vout/V2 × V2/Vin`
pub fn total_tf(pa: &AggressorParams, pv: &VictimParams) -> Result<TransferFunction> {
    cascade(&victim_tf(pv)?, &aggressor_tf(pa)?)
}

/// Noise induced on the victim output by `vin` on the aggressor input.
pub fn victim_noise_response(
    pa: &AggressorParams,
    pv: &VictimParams,
    vin: &TimeExpr,
) -> Result<TimeExpr> {
    response_through(&total_tf(pa, pv)?, vin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::c;

    fn ones() -> (AggressorParams, VictimParams) {
        (AggressorParams::uniform(1.0, 1.0), VictimParams::uniform(1.0, 1.0))
    }

    #[test]
    fn aggressor_all_ones() {
        let k = aggressor_coefficients(&ones().0).unwrap();
        assert_eq!((k.a, k.b, k.c, k.d), (4.0, 4.0, 1.0, 9.0));
        assert_eq!(k.h, 1.0);
        // E: 8 + 6 + 4 + 2 + 4
        assert_eq!(aggressor_e_terms(&ones().0), [8.0, 6.0, 4.0, 2.0, 4.0]);
        assert_eq!(k.e, 24.0);
        // F: 10 + 8 + 2 + 2
        assert_eq!(aggressor_f_terms(&ones().0), [10.0, 8.0, 2.0, 2.0]);
        assert_eq!(k.f, 22.0);
        // G: 1·2 + 2·3
        assert_eq!(k.g, 8.0);
    }

    #[test]
    fn victim_all_ones() {
        let k = victim_coefficients(&ones().1).unwrap();
        assert_eq!((k.a, k.b, k.c, k.d), (2.0, 3.0, 1.0, 9.0));
        assert_eq!(victim_e_terms(&ones().1), [7.0, 5.0, 3.0, 1.0]);
        assert_eq!(k.e, 16.0);
        assert_eq!(victim_f_terms(&ones().1), [5.0, 5.0]);
        assert_eq!(k.f, 10.0);
        assert_eq!(k.g, 2.0);
    }

    #[test]
    fn victim_a_prime_mixed() {
        let p = VictimParams {
            rd: 2.0,
            r1v: 3.0,
            cc: 0.5,
            ..VictimParams::uniform(1.0, 1.0)
        };
        assert_eq!(victim_coefficients(&p).unwrap().a, 2.5);
    }

    #[test]
    fn lists_layout() {
        let (pa, pv) = ones();
        let agg = aggressor_lists(&pa).unwrap();
        assert_eq!(agg.beta(), &[1.0, 4.0, 4.0, 1.0]);
        assert_eq!(agg.alpha(), &[1.0, 9.0, 24.0, 22.0, 8.0, 1.0]);
        let vic = victim_lists(&pv).unwrap();
        assert_eq!(vic.beta(), &[0.0, 2.0, 3.0, 1.0]);
        assert_eq!(vic.alpha(), &[1.0, 9.0, 16.0, 10.0, 2.0]);
    }

    #[test]
    fn dc_gains() {
        let (pa, pv) = ones();
        assert_eq!(aggressor_tf(&pa).unwrap().eval(c(0.0)), c(1.0));
        assert_eq!(victim_tf(&pv).unwrap().eval(c(0.0)), c(0.0));
        assert_eq!(total_tf(&pa, &pv).unwrap().eval(c(0.0)).norm(), 0.0);
    }

    #[test]
    fn aggressor_at_one() {
        let h = aggressor_tf(&ones().0).unwrap();
        let expected = (1.0 + 4.0 + 4.0 + 1.0) / (1.0 + 9.0 + 24.0 + 22.0 + 8.0 + 1.0);
        assert!((h.eval(c(1.0)) - c(expected)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_values_cancel_a_quadratic() {
        // all-ones lists share the factor s² + 3s + 1
        let h = aggressor_tf(&ones().0).unwrap();
        assert_eq!(h.rf.num().degree(), 1);
        assert_eq!(h.rf.den().degree(), 3);
        for (got, want) in h.rf.den().coeffs().iter().zip([1.0, 6.0, 5.0, 1.0]) {
            assert!((got - c(want)).norm() < 1e-12);
        }
        let v = victim_tf(&ones().1).unwrap();
        assert_eq!((v.rf.num().degree(), v.rf.den().degree()), (2, 3));
    }

    #[test]
    fn rejects_nonpositive() {
        let mut pa = ones().0;
        pa.rth = 0.0;
        assert_eq!(aggressor_lists(&pa), Err(Error::NonPositiveComponent("rth")));
        let mut pv = ones().1;
        pv.cc = -1.0;
        assert_eq!(victim_lists(&pv), Err(Error::NonPositiveComponent("cc")));
    }

    #[test]
    fn zero_input_gives_zero_noise() {
        let (pa, pv) = ones();
        assert!(victim_noise_response(&pa, &pv, &TimeExpr::zero()).unwrap().is_zero());
    }
}
