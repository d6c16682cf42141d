//! Dormand-Prince 5(4) for autonomous systems, with elementary step-size
//! control and cubic Hermite dense output.

// Butcher tableau. The nodes are not needed for autonomous fields.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th and 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

/// One accepted step with the data needed for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        std::array::from_fn(|i| h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i])
    }
}

/// The controller drove the step below the minimum step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Collapse {
    pub t: f64,
    pub h: f64,
}

pub(crate) struct Dopri5<'f, const N: usize> {
    rhs: &'f dyn Fn(&[f64; N]) -> [f64; N],
    tol: Tolerances,
    pub t: f64,
    pub y: [f64; N],
    f: [f64; N],
    pub h: f64,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl<'f, const N: usize> Dopri5<'f, N> {
    /// `h0 = None` picks the initial step from the local scale of the field.
    pub fn new(
        rhs: &'f dyn Fn(&[f64; N]) -> [f64; N],
        t0: f64,
        y0: [f64; N],
        tol: Tolerances,
        h0: Option<f64>,
    ) -> Self {
        let f = rhs(&y0);
        let h = h0.unwrap_or_else(|| {
            let sc: [f64; N] = std::array::from_fn(|i| tol.abs_tol + tol.rel_tol * y0[i].abs());
            let d0 = rms::<N>(&std::array::from_fn(|i| y0[i] / sc[i]));
            let d1 = rms::<N>(&std::array::from_fn(|i| f[i] / sc[i]));
            if d0 < 1e-5 || d1 < 1e-5 || !d1.is_finite() {
                1e-6
            } else {
                0.01 * d0 / d1
            }
        });
        Self {
            rhs,
            tol,
            t: t0,
            y: y0,
            f,
            h: h.min(tol.max_step),
        }
    }

    /// Advances by one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<Step<N>, Collapse> {
        loop {
            if self.h < self.tol.min_step {
                return Err(Collapse { t: self.t, h: self.h });
            }
            let remaining = t_limit - self.t;
            let clamped = remaining < self.h;
            let h = if clamped { remaining } else { self.h };
            let (y1, f1, err) = self.attempt(h);
            if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
                self.h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                let step = Step {
                    t0: self.t,
                    y0: self.y,
                    f0: self.f,
                    t1: if clamped { t_limit } else { self.t + h },
                    y1,
                    f1,
                };
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if !clamped {
                    self.h = (h * factor).min(self.tol.max_step);
                }
                self.t = step.t1;
                self.y = y1;
                self.f = f1;
                return Ok(step);
            }
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            self.h = h * factor;
        }
    }

    fn attempt(&self, h: f64) -> ([f64; N], [f64; N], f64) {
        let rhs = self.rhs;
        let y = &self.y;
        let k1 = self.f;
        let k2 = rhs(&axpy(y, &[(h * A21, &k1)]));
        let k3 = rhs(&axpy(y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = rhs(&axpy(y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = rhs(&axpy(
            y,
            &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        ));
        let k6 = rhs(&axpy(
            y,
            &[
                (h * A61, &k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ));
        let y1 = axpy(
            y,
            &[
                (h * A71, &k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        let k7 = rhs(&y1);
        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.tol.abs_tol + self.tol.rel_tol * y[i].abs().max(y1[i].abs());
            acc += (e / sc).powi(2);
        }
        (y1, k7, (acc / N as f64).sqrt())
    }
}

fn rms<const N: usize>(v: &[f64; N]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / N as f64).sqrt()
}
