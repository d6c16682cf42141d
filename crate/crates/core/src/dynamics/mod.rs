//! Flows of three-dimensional vector fields: adaptive integration with
//! events, integration of the compactified field across charts, and
//! Lyapunov spectra.

mod integrator;
mod lyapunov;

use serde::Serialize;

use crate::compactify::{
    best_chart, chart_coords, chart_point_to_sphere, Chart, ChartPoint, Compactification, SpherePoint,
};
use crate::model::{poly_jacobian, poly_rhs, LineId};
use crate::poly::PolyField3;
use crate::{norm, Error, Matrix3, Result, Vec3};

pub(crate) use integrator::{Dopri5, Step, Tolerances};
pub use lyapunov::{lyapunov_spectrum, lyapunov_spectrum_constrained, LyapunovConfig, LyapunovSpectrum};

/// An autonomous vector field on R^3.
pub trait VectorField3: Sync {
    fn eval(&self, x: &Vec3) -> Vec3;

    /// Defaults to central differences.
    fn jacobian(&self, x: &Vec3) -> Matrix3 {
        let mut j = [[0.0; 3]; 3];
        for col in 0..3 {
            let h = 1e-6 * (1.0 + x[col].abs());
            let mut xp = *x;
            let mut xm = *x;
            xp[col] += h;
            xm[col] -= h;
            let (fp, fm) = (self.eval(&xp), self.eval(&xm));
            for row in 0..3 {
                j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }
}

impl VectorField3 for PolyField3 {
    fn eval(&self, x: &Vec3) -> Vec3 {
        PolyField3::eval(self, x)
    }

    fn jacobian(&self, x: &Vec3) -> Matrix3 {
        PolyField3::jacobian(self, x)
    }
}

/// The Ricci flow `d/dt l_ij = -2 r_ij`. Evaluates to NaN off the open first
/// octant so the integrator refuses to step there.
#[derive(Debug, Clone, Copy, Default)]
pub struct RicciFlow;

impl VectorField3 for RicciFlow {
    fn eval(&self, x: &Vec3) -> Vec3 {
        match crate::model::MetricParams::from_array(*x) {
            Ok(m) => crate::model::flow_rhs(&m),
            Err(_) => [f64::NAN; 3],
        }
    }
}

/// The homogeneous quadratic system, with its analytic Jacobian.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticFlow;

impl VectorField3 for QuadraticFlow {
    fn eval(&self, x: &Vec3) -> Vec3 {
        poly_rhs(x)
    }

    fn jacobian(&self, x: &Vec3) -> Matrix3 {
        poly_jacobian(x)
    }
}

/// `x' = A x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearField(pub Matrix3);

impl VectorField3 for LinearField {
    fn eval(&self, x: &Vec3) -> Vec3 {
        let a = &self.0;
        std::array::from_fn(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
    }

    fn jacobian(&self, _x: &Vec3) -> Matrix3 {
        self.0
    }
}

/// Wraps a closure as a field with finite-difference Jacobian.
pub struct FnField<F>(pub F);

impl<F: Fn(&Vec3) -> Vec3 + Sync> VectorField3 for FnField<F> {
    fn eval(&self, x: &Vec3) -> Vec3 {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub t_end: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 1.0,
            min_step: 1e-14,
            t_end: 10.0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_end(self, t_end: f64) -> Self {
        Self { t_end, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.rel_tol, self.abs_tol, self.max_step, self.min_step, self.t_end]
            .iter()
            .all(|&v| v > 0.0);
        if !positive {
            return Err(Error::Config(
                "integrator tolerances, steps and t_end must be positive".into(),
            ));
        }
        if self.min_step >= self.max_step {
            return Err(Error::Config("min_step must be smaller than max_step".into()));
        }
        Ok(())
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            min_step: self.min_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    BlowUpEvent,
    ConvergedToPoint,
    StepSizeCollapse,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::ReachedTEnd => "reached_t_end",
            Termination::BlowUpEvent => "blow_up_event",
            Termination::ConvergedToPoint => "converged_to_point",
            Termination::StepSizeCollapse => "step_size_collapse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Ambient state, or the ball point for compactified runs.
    pub x: Vec3,
    /// Chart coordinates for compactified runs.
    pub chart: Option<ChartPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartSwitch {
    pub t: f64,
    pub from: Chart,
    pub to: Chart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub chart_log: Vec<ChartSwitch>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn final_state(&self) -> Vec3 {
        self.last().x
    }
}

/// Stopping events for ambient runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Events {
    /// Stop when `max_i |x_i| >= R`.
    pub blow_up_radius: Option<f64>,
    /// Stop when a whole step stays within `radius` of `point`.
    pub convergence: Option<(Vec3, f64)>,
}

impl Events {
    /// Blow-up trap used by default for ambient runs of the quadratic system.
    pub fn blow_up(radius: f64) -> Self {
        Self {
            blow_up_radius: Some(radius),
            convergence: None,
        }
    }
}

pub const DEFAULT_BLOW_UP_RADIUS: f64 = 1e6;

pub fn integrate(field: &dyn VectorField3, x0: &Vec3, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_with_events(field, x0, cfg, &Events::default())
}

pub fn integrate_with_events(
    field: &dyn VectorField3,
    x0: &Vec3,
    cfg: &IntegratorConfig,
    events: &Events,
) -> Result<Trajectory> {
    cfg.validate()?;
    let rhs = |x: &Vec3| field.eval(x);
    let mut stepper = Dopri5::new(&rhs, 0.0, *x0, cfg.tolerances(), None);
    let mut samples = vec![Sample {
        t: 0.0,
        x: *x0,
        chart: None,
    }];
    let finish = |samples, termination| Trajectory {
        samples,
        termination,
        chart_log: Vec::new(),
    };
    while stepper.t < cfg.t_end {
        let step = match stepper.step(cfg.t_end) {
            Ok(s) => s,
            Err(_) => return Ok(finish(samples, Termination::StepSizeCollapse)),
        };
        if let Some(r) = events.blow_up_radius {
            if max_norm(&step.y1) >= r {
                let t = locate_crossing(&step, r);
                samples.push(Sample {
                    t,
                    x: step.interpolate(t),
                    chart: None,
                });
                return Ok(finish(samples, Termination::BlowUpEvent));
            }
        }
        samples.push(Sample {
            t: step.t1,
            x: step.y1,
            chart: None,
        });
        if let Some((q, eps)) = events.convergence {
            if norm(&crate::sub(&step.y0, &q)) <= eps && norm(&crate::sub(&step.y1, &q)) <= eps {
                return Ok(finish(samples, Termination::ConvergedToPoint));
            }
        }
    }
    Ok(finish(samples, Termination::ReachedTEnd))
}

fn max_norm(x: &Vec3) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Bisection on the dense output for `max_i |x_i(t)| = r`.
fn locate_crossing(step: &Step<3>, r: f64) -> f64 {
    let (mut lo, mut hi) = (step.t0, step.t1);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if max_norm(&step.interpolate(mid)) >= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompactifiedConfig {
    pub integrator: IntegratorConfig,
    /// Leave a chart when its dividing coordinate drops below this.
    pub switch_threshold: f64,
    /// The next chart must exceed `switch_threshold + hysteresis`.
    pub hysteresis: f64,
    /// Converged only when `1 - |ball point| < equator_tol`.
    pub equator_tol: f64,
    /// ... and the chart velocity tangent to the equator is below this.
    pub speed_tol: f64,
}

impl Default for CompactifiedConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_step: 0.05,
                min_step: 1e-14,
                t_end: 100.0,
            },
            switch_threshold: 0.3,
            hysteresis: 0.05,
            equator_tol: 1e-6,
            speed_tol: 1e-6,
        }
    }
}

impl CompactifiedConfig {
    fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.switch_threshold > 0.0 && self.switch_threshold + self.hysteresis < 0.5) {
            return Err(Error::Config(
                "switch threshold plus hysteresis must lie in (0, 0.5)".into(),
            ));
        }
        if !(self.hysteresis >= 0.0 && self.equator_tol > 0.0 && self.speed_tol > 0.0) {
            return Err(Error::Config("compactified tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Integrates the compactified field of `f` from the ball image of `x0`,
/// switching charts as the trajectory moves over the sphere. Samples report
/// ball coordinates, with the chart coordinates alongside.
pub fn integrate_compactified(f: &PolyField3, x0: &Vec3, cfg: &CompactifiedConfig) -> Result<Trajectory> {
    let comp = Compactification::new(f);
    integrate_compactified_with(&comp, &SpherePoint::from_ambient(x0), cfg)
}

pub fn integrate_compactified_with(
    comp: &Compactification,
    start: &SpherePoint,
    cfg: &CompactifiedConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let t_end = cfg.integrator.t_end;
    let mut chart = best_chart(start);
    let mut point = chart_coords(start, chart)?;
    let mut samples = vec![Sample {
        t: 0.0,
        x: start.ball(),
        chart: Some(point),
    }];
    let mut chart_log = Vec::new();
    let mut t = 0.0;
    let mut h = None;
    loop {
        let field = comp.chart_field(chart);
        let rhs = |z: &Vec3| field.eval(z);
        let mut stepper = Dopri5::new(&rhs, t, point.z, cfg.integrator.tolerances(), h);
        loop {
            if stepper.t >= t_end {
                return Ok(Trajectory {
                    samples,
                    termination: Termination::ReachedTEnd,
                    chart_log,
                });
            }
            let step = match stepper.step(t_end) {
                Ok(s) => s,
                Err(_) => {
                    return Ok(Trajectory {
                        samples,
                        termination: Termination::StepSizeCollapse,
                        chart_log,
                    });
                }
            };
            let here = ChartPoint { chart, z: step.y1 };
            let sphere = chart_point_to_sphere(&here);
            samples.push(Sample {
                t: step.t1,
                x: sphere.ball(),
                chart: Some(here),
            });
            if is_converged(chart, &step, &sphere, cfg) {
                return Ok(Trajectory {
                    samples,
                    termination: Termination::ConvergedToPoint,
                    chart_log,
                });
            }
            if sphere.y[chart.axis()].abs() < cfg.switch_threshold {
                let next = best_chart(&sphere);
                if next != chart && sphere.y[next.axis()].abs() >= cfg.switch_threshold + cfg.hysteresis {
                    chart_log.push(ChartSwitch {
                        t: step.t1,
                        from: chart,
                        to: next,
                    });
                    chart = next;
                    point = chart_coords(&sphere, next)?;
                    t = step.t1;
                    h = Some(stepper.h);
                    break;
                }
            }
        }
    }
}

fn is_converged(chart: Chart, step: &Step<3>, sphere: &SpherePoint, cfg: &CompactifiedConfig) -> bool {
    if chart.is_ambient() {
        return norm(&step.f0) < cfg.speed_tol && norm(&step.f1) < cfg.speed_tol;
    }
    let planar = |f: &Vec3| f[0].hypot(f[1]);
    let radius = norm(&sphere.ball());
    1.0 - radius < cfg.equator_tol && planar(&step.f0) < cfg.speed_tol && planar(&step.f1) < cfg.speed_tol
}

/// Distance from a ball point to the ray `{ s p_j : s >= 0 }`. For points
/// of the open ball this is the distance to the segment from the origin to
/// the equilibrium at infinity.
pub fn distance_to_line_ball(b: &Vec3, line: LineId) -> f64 {
    let d = line.direction();
    let s = crate::dot(b, &d).max(0.0);
    norm(&crate::sub(b, &crate::scale(s, &d)))
}

/// Distance from `x` to the invariant line `line`, measured in ball
/// coordinates.
pub fn distance_to_line(x: &Vec3, line: LineId) -> f64 {
    distance_to_line_ball(&crate::compactify::ball_projection(x), line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{invariant_directions, poly_field};

    fn line(j: usize) -> LineId {
        LineId::new(j).unwrap()
    }

    #[test]
    fn linear_decay() {
        let field = LinearField([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        let cfg = IntegratorConfig::default().with_t_end(1.0);
        let tr = integrate(&field, &[1.0, 0.0, 0.0], &cfg).unwrap();
        assert_eq!(tr.termination, Termination::ReachedTEnd);
        assert_eq!(tr.last().t, 1.0);
        assert!((tr.final_state()[0] - (-1f64).exp()).abs() < 1e-8);
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn convergence_event() {
        let field = FnField(|x: &Vec3| [-x[0], -x[1], -x[2]]);
        let ev = Events {
            blow_up_radius: None,
            convergence: Some(([0.0; 3], 1e-6)),
        };
        let cfg = IntegratorConfig::default().with_t_end(100.0);
        let tr = integrate_with_events(&field, &[1.0, 0.5, 0.0], &cfg, &ev).unwrap();
        assert_eq!(tr.termination, Termination::ConvergedToPoint);
        assert!(norm(&tr.final_state()) <= 1e-6);
    }

    #[test]
    fn blow_up_event_on_diagonal() {
        let cfg = IntegratorConfig::default().with_t_end(1.0);
        let tr = integrate_with_events(&QuadraticFlow, &[1.0; 3], &cfg, &Events::blow_up(100.0)).unwrap();
        assert_eq!(tr.termination, Termination::BlowUpEvent);
        // c(t) = 1 / (1 - 5t) reaches 100 at t = 0.198.
        assert!((tr.last().t - 0.198).abs() < 1e-6);
    }

    #[test]
    fn blow_up_without_trap_collapses() {
        let cfg = IntegratorConfig::default().with_t_end(1.0);
        let tr = integrate(&QuadraticFlow, &[1.0; 3], &cfg).unwrap();
        assert_eq!(tr.termination, Termination::StepSizeCollapse);
        assert!((tr.last().t - 0.2).abs() < 1e-6);
    }

    #[test]
    fn ricci_flow_refuses_to_leave_octant() {
        // The diagonal collapses at t = 3/5 for c0 = 1.
        let cfg = IntegratorConfig::default().with_t_end(1.0);
        let tr = integrate(&RicciFlow, &[1.0; 3], &cfg).unwrap();
        assert_eq!(tr.termination, Termination::StepSizeCollapse);
        assert!((tr.last().t - 0.6).abs() < 1e-3);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = IntegratorConfig {
            min_step: 2.0,
            ..Default::default()
        };
        assert!(integrate(&QuadraticFlow, &[1.0; 3], &cfg).is_err());
        let cfg = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate(&QuadraticFlow, &[1.0; 3], &cfg).is_err());
    }

    #[test]
    fn distance_examples() {
        let p2 = invariant_directions()[1];
        assert!(distance_to_line(&[3.0, 3.0, 3.0], line(2)) < 1e-15);
        assert_eq!(distance_to_line(&[0.0; 3], line(2)), 0.0);
        let d = distance_to_line_ball(&[0.6, 0.6, 0.7], line(2));
        assert!((d - (1.0f64 / 150.0).sqrt()).abs() < 1e-12);
        assert!((d - 0.08165).abs() < 1e-5);
        assert!(distance_to_line_ball(&crate::scale(0.3, &p2), line(2)) < 1e-16);
    }

    #[test]
    fn compactified_diagonal_reaches_p2() {
        let tr = integrate_compactified(&poly_field(), &[1.2; 3], &CompactifiedConfig::default()).unwrap();
        assert_eq!(tr.termination, Termination::ConvergedToPoint);
        let end = tr.final_state();
        let p2 = invariant_directions()[1];
        assert!(norm(&crate::sub(&end, &p2)) < 1e-4);
    }

    #[test]
    fn compactified_config_guards() {
        let cfg = CompactifiedConfig {
            switch_threshold: 0.48,
            ..Default::default()
        };
        assert!(integrate_compactified(&poly_field(), &[1.0; 3], &cfg).is_err());
    }
}
