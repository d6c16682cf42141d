//! Lyapunov spectrum by co-integrating a tangent frame with the base orbit
//! and reorthonormalizing it at fixed intervals (Benettin et al.).

use serde::Serialize;

use super::{Dopri5, IntegratorConfig, VectorField3};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovConfig {
    pub integrator: IntegratorConfig,
    /// Time between reorthonormalizations.
    pub renorm_dt: f64,
    /// No convergence is declared before this time.
    pub t_min: f64,
    /// Hard cap on the run length.
    pub t_max: f64,
    /// Allowed componentwise drift of the estimate between three quarters
    /// of the run and its end.
    pub tol: f64,
    /// Fraction of the run discarded as transient. 0 gives the classical
    /// estimate (total log stretch over elapsed time); 0.5 averages over
    /// the trailing half only.
    pub transient_fraction: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_step: 0.1,
                min_step: 1e-14,
                t_end: 500.0,
            },
            renorm_dt: 0.1,
            t_min: 20.0,
            t_max: 500.0,
            tol: 1e-3,
            transient_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSpectrum {
    /// Sorted descending.
    pub exponents: Vec3,
    pub t_used: f64,
    pub converged: bool,
    /// Estimates `(t, exponents)` after every reorthonormalization: the log
    /// stretches averaged over `[f t, t]` with `f = transient_fraction`.
    pub history: Vec<(f64, Vec3)>,
    /// Largest `|<v_i, v_j> - delta_ij|` seen right after reorthonormalizing.
    pub max_gram_deviation: f64,
}

pub fn lyapunov_spectrum(field: &dyn VectorField3, x0: &Vec3, cfg: &LyapunovConfig) -> Result<LyapunovSpectrum> {
    lyapunov_spectrum_constrained(field, x0, cfg, &|_| {})
}

/// As [`lyapunov_spectrum`], with `constrain` applied to the base point
/// after every renormalization interval. Used to hold the base orbit on a
/// known invariant set that rounding errors would otherwise leave.
pub fn lyapunov_spectrum_constrained(
    field: &dyn VectorField3,
    x0: &Vec3,
    cfg: &LyapunovConfig,
    constrain: &dyn Fn(&mut Vec3),
) -> Result<LyapunovSpectrum> {
    cfg.integrator.validate()?;
    if !(cfg.renorm_dt > 0.0 && cfg.t_max >= cfg.renorm_dt && cfg.tol > 0.0 && cfg.t_min >= 0.0)
        || !(0.0..0.9).contains(&cfg.transient_fraction)
    {
        return Err(Error::Config("invalid Lyapunov renormalization settings".into()));
    }

    let rhs = |s: &[f64; 12]| {
        let x = [s[0], s[1], s[2]];
        let f = field.eval(&x);
        let j = field.jacobian(&x);
        let mut out = [0.0; 12];
        out[..3].copy_from_slice(&f);
        for k in 0..3 {
            let v = &s[3 + 3 * k..6 + 3 * k];
            for r in 0..3 {
                out[3 + 3 * k + r] = j[r][0] * v[0] + j[r][1] * v[1] + j[r][2] * v[2];
            }
        }
        out
    };

    let mut state = [0.0; 12];
    state[..3].copy_from_slice(x0);
    constrain_base(&mut state, constrain);
    for k in 0..3 {
        state[3 + 4 * k] = 1.0;
    }
    let tol = cfg.integrator.tolerances();
    let mut sums = [0.0; 3];
    // Cumulative log stretches after each renormalization.
    let mut cumulative: Vec<(f64, Vec3)> = vec![(0.0, [0.0; 3])];
    let mut t = 0.0;
    let mut h = None;
    let mut history: Vec<(f64, Vec3)> = Vec::new();
    let mut max_gram_deviation: f64 = 0.0;
    let mut converged = false;

    while t + 0.5 * cfg.renorm_dt <= cfg.t_max {
        let target = t + cfg.renorm_dt;
        let mut stepper = Dopri5::new(&rhs, t, state, tol, h);
        let mut failed = false;
        while stepper.t < target {
            if stepper.step(target).is_err() {
                failed = true;
                break;
            }
        }
        if failed || stepper.y.iter().any(|v| !v.is_finite()) {
            break;
        }
        h = Some(stepper.h);
        state = stepper.y;
        t = target;
        constrain_base(&mut state, constrain);

        let logs = reorthonormalize(&mut state);
        for k in 0..3 {
            sums[k] += logs[k];
        }
        max_gram_deviation = max_gram_deviation.max(gram_deviation(&state));
        cumulative.push((t, sums));
        let skip = (cfg.transient_fraction * (cumulative.len() - 1) as f64) as usize;
        let (t0, s0) = cumulative[skip];
        history.push((t, std::array::from_fn(|k| (sums[k] - s0[k]) / (t - t0))));

        if t >= cfg.t_min {
            let n = history.len();
            let earlier = history[(3 * n) / 4 - 1].1;
            let now = history[n - 1].1;
            if (0..3).all(|k| (now[k] - earlier[k]).abs() < cfg.tol) {
                converged = true;
                break;
            }
        }
    }

    let mut exponents = history.last().map(|h| h.1).unwrap_or([f64::NAN; 3]);
    exponents.sort_by(|a, b| b.total_cmp(a));
    for entry in &mut history {
        entry.1.sort_by(|a, b| b.total_cmp(a));
    }
    Ok(LyapunovSpectrum {
        exponents,
        t_used: t,
        converged,
        history,
        max_gram_deviation,
    })
}

fn constrain_base(state: &mut [f64; 12], constrain: &dyn Fn(&mut Vec3)) {
    let mut x = [state[0], state[1], state[2]];
    constrain(&mut x);
    state[..3].copy_from_slice(&x);
}

fn vec_at(state: &[f64; 12], k: usize) -> Vec3 {
    [state[3 + 3 * k], state[4 + 3 * k], state[5 + 3 * k]]
}

fn set_vec(state: &mut [f64; 12], k: usize, v: Vec3) {
    state[3 + 3 * k..6 + 3 * k].copy_from_slice(&v);
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Returns the log
/// stretch factors of the three tangent vectors.
fn reorthonormalize(state: &mut [f64; 12]) -> Vec3 {
    let mut logs = [0.0; 3];
    for (k, log) in logs.iter_mut().enumerate() {
        let mut v = vec_at(state, k);
        for _pass in 0..2 {
            for j in 0..k {
                let u = vec_at(state, j);
                let c = crate::dot(&u, &v);
                v = crate::sub(&v, &crate::scale(c, &u));
            }
        }
        let n = crate::norm(&v);
        *log = n.ln();
        set_vec(state, k, crate::scale(1.0 / n, &v));
    }
    logs
}

fn gram_deviation(state: &[f64; 12]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let g = crate::dot(&vec_at(state, i), &vec_at(state, j));
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}
