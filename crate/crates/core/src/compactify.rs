//! Poincare compactification of polynomial vector fields on R^3.
//!
//! R^3 is identified with the northern hemisphere of S^3 through the central
//! projection `x -> (x, 1) / sqrt(1 + |x|^2)`, and the equator `y4 = 0` plays
//! the role of the points at infinity. The compactified field is written in
//! the affine charts of S^3:
//!
//! * `U_i` / `V_i` (`i = 1, 2, 3`) cover `y_i > 0` / `y_i < 0` and use
//!   `z = (y_j / y_i, y_k / y_i, y4 / y_i)` with `j < k` the remaining
//!   indices. The equator is `z3 = 0`.
//! * `U4` covers the open northern hemisphere and is just R^3 itself.
//!
//! The positive factor `1 / Delta(z)^(d-1)` is dropped, so every chart field is
//! a polynomial. On the `V_i` charts the field is multiplied by `(-1)^(d-1)`
//! to keep the orientation of time.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3 as NaMatrix3;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::poly::{Poly3, PolyField3};
use crate::{norm, Error, Matrix3, Result, Vec3};

/// One of the seven affine charts of S^3 used here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chart {
    /// Dividing coordinate, `0..=3` for `y1..y4`.
    axis: u8,
    positive: bool,
}

impl Chart {
    pub const U1: Chart = Chart {
        axis: 0,
        positive: true,
    };
    pub const U2: Chart = Chart {
        axis: 1,
        positive: true,
    };
    pub const U3: Chart = Chart {
        axis: 2,
        positive: true,
    };
    pub const V1: Chart = Chart {
        axis: 0,
        positive: false,
    };
    pub const V2: Chart = Chart {
        axis: 1,
        positive: false,
    };
    pub const V3: Chart = Chart {
        axis: 2,
        positive: false,
    };
    /// The northern hemisphere chart, i.e. R^3 itself.
    pub const AMBIENT: Chart = Chart {
        axis: 3,
        positive: true,
    };

    pub const ALL: [Chart; 7] = [
        Chart::U1,
        Chart::U2,
        Chart::U3,
        Chart::V1,
        Chart::V2,
        Chart::V3,
        Chart::AMBIENT,
    ];

    /// The charts `U1, U2, U3` in which the equator singularities are counted.
    pub const POSITIVE: [Chart; 3] = [Chart::U1, Chart::U2, Chart::U3];

    pub fn axis(self) -> usize {
        self.axis as usize
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn is_ambient(self) -> bool {
        self.axis == 3
    }

    fn slot(self) -> usize {
        match (self.axis, self.positive) {
            (3, _) => 6,
            (a, true) => a as usize,
            (a, false) => 3 + a as usize,
        }
    }

    /// Ambient indices `(j, k)` that become `z1, z2`.
    fn others(self) -> (usize, usize) {
        match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = if self.positive { 'U' } else { 'V' };
        write!(f, "{}{}", letter, self.axis + 1)
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Chart::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown chart '{s}'")))
    }
}

impl Serialize for Chart {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Point of the unit sphere S^3 in R^4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub y: [f64; 4],
}

impl SpherePoint {
    /// Normalizes an arbitrary nonzero vector of R^4.
    pub fn from_unnormalized(v: [f64; 4]) -> Self {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { y: v.map(|c| c / n) }
    }

    /// Image of `x` under the central projection onto the northern hemisphere.
    pub fn from_ambient(x: &Vec3) -> Self {
        let delta = (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        Self {
            y: [x[0] / delta, x[1] / delta, x[2] / delta, 1.0 / delta],
        }
    }

    /// The corresponding point of the closed unit ball.
    pub fn ball(&self) -> Vec3 {
        let s = if self.y[3] < 0.0 { -1.0 } else { 1.0 };
        [s * self.y[0], s * self.y[1], s * self.y[2]]
    }

    pub fn is_equator(&self) -> bool {
        self.y[3] == 0.0
    }

    fn distance(&self, other: &SpherePoint) -> f64 {
        (0..4).map(|i| (self.y[i] - other.y[i]).powi(2)).sum::<f64>().sqrt()
    }
}

/// Coordinates in one chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub z: Vec3,
}

/// Shrinks R^3 onto the open unit ball, `x / sqrt(1 + |x|^2)`.
pub fn ball_projection(x: &Vec3) -> Vec3 {
    let delta = (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    x.map(|c| c / delta)
}

/// Inverse of [`ball_projection`].
pub fn ball_unprojection(u: &Vec3) -> Result<Vec3> {
    let r = norm(u);
    if r.is_nan() || r >= 1.0 - 1e-12 {
        return Err(Error::OutsideBall(r));
    }
    let k = 1.0 / (1.0 - r * r).sqrt();
    Ok(u.map(|c| c * k))
}

pub fn chart_coords(p: &SpherePoint, chart: Chart) -> Result<ChartPoint> {
    let i = chart.axis();
    let d = p.y[i];
    let in_domain = if chart.positive { d > 1e-12 } else { d < -1e-12 };
    if !in_domain {
        return Err(Error::OutsideChart(chart.to_string()));
    }
    let z = if chart.is_ambient() {
        [p.y[0] / d, p.y[1] / d, p.y[2] / d]
    } else {
        let (j, k) = chart.others();
        [p.y[j] / d, p.y[k] / d, p.y[3] / d]
    };
    Ok(ChartPoint { chart, z })
}

pub fn chart_point_to_sphere(p: &ChartPoint) -> SpherePoint {
    let z = p.z;
    if p.chart.is_ambient() {
        return SpherePoint::from_unnormalized([z[0], z[1], z[2], 1.0]);
    }
    let s = if p.chart.positive { 1.0 } else { -1.0 };
    let (j, k) = p.chart.others();
    let mut v = [0.0; 4];
    v[p.chart.axis()] = s;
    v[j] = s * z[0];
    v[k] = s * z[1];
    v[3] = s * z[2];
    SpherePoint::from_unnormalized(v)
}

/// Chart with the largest dividing coordinate at `p`.
pub fn best_chart(p: &SpherePoint) -> Chart {
    let mut best = Chart::AMBIENT;
    let mut best_val = p.y[3];
    for axis in 0..3u8 {
        let v = p.y[axis as usize];
        if v.abs() > best_val {
            best_val = v.abs();
            best = Chart {
                axis,
                positive: v > 0.0,
            };
        }
    }
    best
}

/// The compactified field of a polynomial field, in all seven charts.
#[derive(Debug, Clone)]
pub struct Compactification {
    degree: u32,
    charts: Vec<PolyField3>,
}

impl Compactification {
    pub fn new(f: &PolyField3) -> Self {
        let d = f.degree();
        let charts = Chart::ALL
            .iter()
            .map(|&c| {
                if c.is_ambient() {
                    f.clone()
                } else {
                    chart_polynomials(f, c)
                }
            })
            .collect();
        Self { degree: d, charts }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn chart_field(&self, chart: Chart) -> &PolyField3 {
        &self.charts[chart.slot()]
    }

    pub fn eval(&self, p: &ChartPoint) -> Vec3 {
        self.chart_field(p.chart).eval(&p.z)
    }

    pub fn jacobian(&self, p: &ChartPoint) -> Matrix3 {
        self.chart_field(p.chart).jacobian(&p.z)
    }
}

/// `(Q_j - z1 Q_i, Q_k - z2 Q_i, -z3 Q_i)` where `Q = z3^d P(x)` with
/// `x_i = 1/z3`, `x_j = z1/z3`, `x_k = z2/z3`.
fn chart_polynomials(f: &PolyField3, chart: Chart) -> PolyField3 {
    let d = f.degree();
    let i = chart.axis();
    let (j, k) = chart.others();
    let q: Vec<Poly3> = f
        .components()
        .iter()
        .map(|p| {
            let mut out = Poly3::zero();
            for &(c, e) in p.terms() {
                let total: u32 = e.iter().sum();
                out.add_term(c, [e[j], e[k], d - total]);
            }
            out
        })
        .collect();
    let sign = if !chart.positive && d.is_multiple_of(2) {
        -1.0
    } else {
        1.0
    };
    let g1 = q[j].add(&q[i].times_var(0).scaled(-1.0));
    let g2 = q[k].add(&q[i].times_var(1).scaled(-1.0));
    let g3 = q[i].times_var(2).scaled(-1.0);
    PolyField3::new([g1.scaled(sign), g2.scaled(sign), g3.scaled(sign)])
}

/// Evaluates the compactified field of `f` at a chart point.
pub fn compactified_field(f: &PolyField3, p: &ChartPoint) -> Vec3 {
    Compactification::new(f).eval(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attractor,
    Repeller,
    Saddle,
    Nonhyperbolic,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stability::Attractor => "attractor",
            Stability::Repeller => "repeller",
            Stability::Saddle => "saddle",
            Stability::Nonhyperbolic => "nonhyperbolic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// A singularity of the compactified field on the equator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfinityEquilibrium {
    pub chart: Chart,
    pub z: Vec3,
    pub direction: Vec3,
    pub eigenvalues: [Eigenvalue; 3],
    pub stability: Stability,
    pub first_octant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Seeds per axis of the square seed grid.
    pub grid: usize,
    /// Seeds cover `[-half_width, half_width]^2`.
    pub half_width: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedupe_radius: f64,
    pub hyperbolic_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            half_width: 8.0,
            newton_tol: 1e-12,
            max_iter: 60,
            dedupe_radius: 1e-6,
            hyperbolic_tol: 1e-9,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.grid < 32 {
            return Err(Error::Config(format!("seed grid must be >= 32, got {}", self.grid)));
        }
        if !(self.half_width > 0.0 && self.newton_tol > 0.0 && self.dedupe_radius > 0.0) {
            return Err(Error::Config("search box and tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn equator_residual(field: &PolyField3, z: [f64; 2]) -> [f64; 2] {
    let v = field.eval(&[z[0], z[1], 0.0]);
    [v[0], v[1]]
}

/// Newton iteration on the equator system of one chart.
pub fn polish_equator_root(c: &Compactification, chart: Chart, seed: [f64; 2], cfg: &SearchConfig) -> Option<[f64; 2]> {
    let field = c.chart_field(chart);
    let mut z = seed;
    let mut r = equator_residual(field, z);
    let mut rn = r[0].abs().max(r[1].abs());
    for _ in 0..cfg.max_iter {
        let j = field.jacobian(&[z[0], z[1], 0.0]);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dz = [
            (r[0] * j[1][1] - r[1] * j[0][1]) / det,
            (r[1] * j[0][0] - r[0] * j[1][0]) / det,
        ];
        // Halve the step until the residual does not grow.
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let trial = [z[0] - lambda * dz[0], z[1] - lambda * dz[1]];
            let tr = equator_residual(field, trial);
            let tn = tr[0].abs().max(tr[1].abs());
            if tn.is_finite() && tn <= rn {
                accepted = Some((trial, tr, tn));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, tr, tn)) = accepted else { break };
        let step = lambda * dz[0].abs().max(dz[1].abs());
        z = trial;
        r = tr;
        rn = tn;
        if z[0].abs().max(z[1].abs()) > 1e8 {
            return None;
        }
        if step <= 1e-15 * (1.0 + z[0].abs().max(z[1].abs())) || rn == 0.0 {
            break;
        }
    }
    (rn < cfg.newton_tol).then_some(z)
}

/// Distinct equator roots of one chart, sorted lexicographically.
pub fn chart_equator_roots(c: &Compactification, chart: Chart, cfg: &SearchConfig) -> Result<Vec<[f64; 2]>> {
    cfg.validate()?;
    if chart.is_ambient() {
        return Ok(Vec::new());
    }
    let n = cfg.grid;
    let lo = -cfg.half_width;
    let h = 2.0 * cfg.half_width / (n - 1) as f64;
    let found: Vec<Option<[f64; 2]>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let seed = [lo + (idx / n) as f64 * h, lo + (idx % n) as f64 * h];
            polish_equator_root(c, chart, seed, cfg)
        })
        .collect();
    let mut roots: Vec<([f64; 2], SpherePoint)> = Vec::new();
    for z in found.into_iter().flatten() {
        let s = chart_point_to_sphere(&ChartPoint {
            chart,
            z: [z[0], z[1], 0.0],
        });
        if roots.iter().all(|(_, q)| q.distance(&s) >= cfg.dedupe_radius) {
            roots.push((z, s));
        }
    }
    let mut roots: Vec<[f64; 2]> = roots.into_iter().map(|r| r.0).collect();
    roots.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    Ok(roots)
}

/// Stability type from eigenvalue real parts.
pub fn classify_eigenvalues(eigs: &[Eigenvalue; 3], tol: f64) -> Stability {
    if eigs.iter().any(|e| e.re.abs() <= tol) {
        Stability::Nonhyperbolic
    } else if eigs.iter().all(|e| e.re < 0.0) {
        Stability::Attractor
    } else if eigs.iter().all(|e| e.re > 0.0) {
        Stability::Repeller
    } else {
        Stability::Saddle
    }
}

/// Eigenvalues of a 3x3 matrix, sorted by decreasing real part.
pub fn eigenvalues(m: &Matrix3) -> [Eigenvalue; 3] {
    let a = NaMatrix3::from_fn(|i, j| m[i][j]);
    let ev = a.complex_eigenvalues();
    let mut out = [0, 1, 2].map(|i| Eigenvalue {
        re: ev[i].re,
        im: ev[i].im,
    });
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out
}

/// Jacobian spectrum and stability of the equator root `(z1, z2, 0)`.
pub fn classify_equilibrium(
    c: &Compactification,
    chart: Chart,
    z: [f64; 2],
    hyperbolic_tol: f64,
) -> InfinityEquilibrium {
    let p = ChartPoint {
        chart,
        z: [z[0], z[1], 0.0],
    };
    let eigs = eigenvalues(&c.jacobian(&p));
    let s = chart_point_to_sphere(&p);
    let direction = [s.y[0], s.y[1], s.y[2]];
    InfinityEquilibrium {
        chart,
        z: p.z,
        direction,
        eigenvalues: eigs,
        stability: classify_eigenvalues(&eigs, hyperbolic_tol),
        first_octant: direction.iter().all(|&v| v > 0.0),
    }
}

/// All singularities at infinity visible in the charts `U1, U2, U3`, as
/// distinct points of the equator sphere. A point seen by several charts is
/// reported once, in the first chart that sees it.
pub fn find_infinity_equilibria(f: &PolyField3, cfg: &SearchConfig) -> Result<Vec<InfinityEquilibrium>> {
    let c = Compactification::new(f);
    let mut out: Vec<InfinityEquilibrium> = Vec::new();
    for chart in Chart::POSITIVE {
        for z in chart_equator_roots(&c, chart, cfg)? {
            let e = classify_equilibrium(&c, chart, z, cfg.hyperbolic_tol);
            let dup = out
                .iter()
                .any(|o| norm(&crate::sub(&o.direction, &e.direction)) < cfg.dedupe_radius);
            if !dup {
                out.push(e);
            }
        }
    }
    Ok(out)
}
