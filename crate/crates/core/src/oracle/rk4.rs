use crate::error::{Error, Result};
use crate::systems::SystemSpec;
use crate::timefun::TimeExpr;

const BLOWUP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSample {
    pub t: f64,
    /// Concatenated states of every stage in the chain.
    pub state: Vec<f64>,
    /// Output of the last stage.
    pub output: f64,
}

/// Uniform RK4 trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeGrid {
    pub t_max: f64,
    pub dt: f64,
    pub samples: Vec<OdeSample>,
}

impl OdeGrid {
    pub fn outputs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.t, s.output))
    }

    /// Output at the sample nearest to `t`.
    pub fn output_at(&self, t: f64) -> f64 {
        let k = ((t / self.dt).round() as usize).min(self.samples.len() - 1);
        self.samples[k].output
    }
}

/// Controllable canonical realization of `Σαₖy⁽ᵏ⁾ = Σβₖx⁽ᵏ⁾`:
/// `z' = A z + e_n u`, `y = c·z + d·u`.
#[derive(Debug, Clone)]
struct Companion {
    /// `αₖ/αₙ` for `k < n`
    a: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

impl Companion {
    fn new(sys: &SystemSpec) -> Self {
        let alpha = sys.alpha();
        let n = alpha.len() - 1;
        let lead = alpha[n];
        let a: Vec<f64> = alpha[..n].iter().map(|x| x / lead).collect();
        let b: Vec<f64> = (0..=n)
            .map(|k| sys.beta().get(k).copied().unwrap_or(0.0) / lead)
            .collect();
        let d = b[n];
        let c = (0..n).map(|k| b[k] - d * a[k]).collect();
        Self { a, c, d }
    }

    fn order(&self) -> usize {
        self.a.len()
    }

    /// Writes `z'` into `dz` and returns the output.
    fn step(&self, z: &[f64], u: f64, dz: &mut [f64]) -> f64 {
        let n = self.order();
        if n > 0 {
            dz[..n - 1].copy_from_slice(&z[1..n]);
            dz[n - 1] = u - self.a.iter().zip(z).map(|(a, z)| a * z).sum::<f64>();
        }
        self.c.iter().zip(z).map(|(c, z)| c * z).sum::<f64>() + self.d * u
    }
}

fn chain_rhs(stages: &[Companion], z: &[f64], u: f64, dz: &mut [f64]) -> f64 {
    let mut offset = 0;
    let mut signal = u;
    for st in stages {
        let n = st.order();
        signal = st.step(&z[offset..offset + n], signal, &mut dz[offset..offset + n]);
        offset += n;
    }
    signal
}

/// RK4 with zero initial state for a single system.
pub fn rk4_solve(sys: &SystemSpec, x: &TimeExpr, t_max: f64, dt: f64) -> Result<OdeGrid> {
    rk4_solve_chain(std::slice::from_ref(sys), x, t_max, dt)
}

/// RK4 with zero initial state for a series connection: each system's
/// output drives the next one.
///
/// Steps that straddle a gate onset of `x` are split there, so the input is
/// smooth inside every RK4 step.
pub fn rk4_solve_chain(
    systems: &[SystemSpec],
    x: &TimeExpr,
    t_max: f64,
    dt: f64,
) -> Result<OdeGrid> {
    if !(t_max > 0.0) || !(dt > 0.0) || dt > t_max / 100.0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt <= t_max/100, got dt = {dt}, t_max = {t_max}"
        )));
    }
    let stages: Vec<Companion> = systems.iter().map(Companion::new).collect();
    let dim: usize = stages.iter().map(Companion::order).sum();
    let onsets = x.onsets();
    let input = |t: f64, left: bool| -> f64 {
        if left {
            x.eval_left(t).re
        } else {
            x.eval(t).map(|v| v.re).unwrap_or(0.0)
        }
    };

    let steps = (t_max / dt).round() as usize;
    let mut z = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut samples = Vec::with_capacity(steps + 1);
    let y0 = chain_rhs(&stages, &z, input(0.0, false), &mut scratch);
    samples.push(OdeSample {
        t: 0.0,
        state: z.clone(),
        output: y0,
    });

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        let mut cuts: Vec<f64> = onsets.iter().copied().filter(|&a| a > t0 && a < t1).collect();
        cuts.push(t1);
        let mut lo = t0;
        for &hi in &cuts {
            let ends_at_onset = onsets.contains(&hi);
            rk4_substep(&stages, &mut z, lo, hi, |t, at_end| input(t, at_end && ends_at_onset));
            lo = hi;
        }
        if z.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(Error::Divergence);
        }
        let y = chain_rhs(&stages, &z, input(t1, false), &mut scratch);
        samples.push(OdeSample {
            t: t1,
            state: z.clone(),
            output: y,
        });
    }
    Ok(OdeGrid {
        t_max,
        dt,
        samples,
    })
}

fn rk4_substep(
    stages: &[Companion],
    z: &mut [f64],
    t0: f64,
    t1: f64,
    input: impl Fn(f64, bool) -> f64,
) {
    let h = t1 - t0;
    let n = z.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    chain_rhs(stages, z, input(t0, false), &mut k1);
    for i in 0..n {
        tmp[i] = z[i] + 0.5 * h * k1[i];
    }
    let mid = input(t0 + 0.5 * h, false);
    chain_rhs(stages, &tmp, mid, &mut k2);
    for i in 0..n {
        tmp[i] = z[i] + 0.5 * h * k2[i];
    }
    chain_rhs(stages, &tmp, mid, &mut k3);
    for i in 0..n {
        tmp[i] = z[i] + h * k3[i];
    }
    chain_rhs(stages, &tmp, input(t1, true), &mut k4);
    for i in 0..n {
        z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_order() -> SystemSpec {
        SystemSpec::new(vec![1.0, 1.0], vec![1.0]).unwrap()
    }

    #[test]
    fn zero_input_stays_zero() {
        let grid = rk4_solve(&first_order(), &TimeExpr::zero(), 5.0, 0.01).unwrap();
        assert!(grid.outputs().all(|(_, y)| y == 0.0));
    }

    #[test]
    fn first_order_step() {
        let grid = rk4_solve(&first_order(), &TimeExpr::step(0.0), 2.0, 1e-3).unwrap();
        let y1 = grid.output_at(1.0);
        assert!((y1 - (1.0 - (-1.0f64).exp())).abs() < 1e-7);
    }

    #[test]
    fn delayed_step_splits_steps() {
        // onset at 0.5005 falls strictly inside a step
        let grid = rk4_solve(&first_order(), &TimeExpr::step(0.5005), 3.0, 1e-3).unwrap();
        let exact = 1.0 - (-(2.0f64 - 0.5005)).exp();
        assert!((grid.output_at(2.0) - exact).abs() < 1e-9);
    }

    #[test]
    fn rejects_coarse_dt_and_detects_blowup() {
        assert!(rk4_solve(&first_order(), &TimeExpr::step(0.0), 1.0, 0.1).is_err());
        let unstable = SystemSpec::new(vec![-5.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(
            rk4_solve(&unstable, &TimeExpr::step(0.0), 10.0, 0.01),
            Err(Error::Divergence)
        );
    }

    #[test]
    fn feedthrough_is_handled() {
        // y' + y = x' with x = step: y = e^(−t) for t > 0
        let sys = SystemSpec::new(vec![1.0, 1.0], vec![0.0, 1.0]).unwrap();
        let grid = rk4_solve(&sys, &TimeExpr::step(0.0), 3.0, 1e-3).unwrap();
        assert!((grid.output_at(1.0) - (-1.0f64).exp()).abs() < 1e-9);
    }
}
