//! Numerical experiments around the four invariant lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compactify::{
    ball_unprojection, chart_coords, chart_point_to_sphere, polish_equator_root, Chart, ChartPoint, Compactification,
    SearchConfig, SpherePoint,
};
use crate::dynamics::{
    distance_to_line_ball, integrate_compactified_with, lyapunov_spectrum_constrained, CompactifiedConfig,
    LyapunovConfig, Termination,
};
use crate::model::{einstein_residual, poly_field, poly_jacobian, poly_rhs, LineId, MetricParams};
use crate::{dot, norm, scale, sub, Error, Result, Vec3};

/// Unit vector of the closed first-octant sphere for lattice point `(i, j, k)`.
fn lattice_direction(i: usize, j: usize, k: usize) -> Vec3 {
    let v = [i as f64, j as f64, k as f64];
    scale(1.0 / norm(&v), &v)
}

/// `|P(d)|` for the quadratic field at the unit vector along `v`.
pub fn octant_speed(v: &Vec3) -> f64 {
    let d = scale(1.0 / norm(v), v);
    norm(&poly_rhs(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OctantScan {
    pub resolution: usize,
    /// Minimum over the lattice before polishing.
    pub grid_min: f64,
    pub min_norm: f64,
    pub argmin: Vec3,
}

/// Minimum of `|P|` over the closed first-octant unit sphere. The sphere is
/// sampled on the lattice `(i, j, k) / r`, `i + j + k = r`, projected
/// radially; lattice local minima are then polished by projected gradient
/// descent. A positive minimum means the quadratic field has no zero in the
/// closed octant cone other than the origin.
pub fn no_interior_equilibria_scan(resolution: usize) -> Result<OctantScan> {
    if resolution < 50 {
        return Err(Error::Config(format!(
            "scan resolution must be >= 50, got {resolution}"
        )));
    }
    let r = resolution;
    let value = |i: usize, j: usize| octant_speed(&[i as f64, j as f64, (r - i - j) as f64]);

    let candidates: Vec<(f64, Vec3)> = (0..=r)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..=r - i).filter_map(move |j| {
                let v = value(i, j);
                let neighbours = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
                let is_min = neighbours.iter().all(|&(di, dj)| {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni + nj > r as i64 {
                        true
                    } else {
                        value(ni as usize, nj as usize) >= v
                    }
                });
                is_min.then(|| (v, lattice_direction(i, j, r - i - j)))
            })
        })
        .collect();

    let grid_min = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let mut best = (f64::INFINITY, [0.0; 3]);
    for (v, d) in candidates {
        let (pv, pd) = polish_octant_min(d);
        let (v, d) = if pv < v { (pv, pd) } else { (v, d) };
        if v < best.0 {
            best = (v, d);
        }
    }
    Ok(OctantScan {
        resolution,
        grid_min,
        min_norm: best.0,
        argmin: best.1,
    })
}

/// Projected gradient descent of `|P|^2` on the octant part of the sphere.
fn polish_octant_min(start: Vec3) -> (f64, Vec3) {
    let objective = |d: &Vec3| dot(&poly_rhs(d), &poly_rhs(d));
    let project = |v: Vec3| {
        let c = v.map(|x| x.max(0.0));
        scale(1.0 / norm(&c), &c)
    };
    let mut d = start;
    let mut f = objective(&d);
    let mut step = 1e-2;
    for _ in 0..500 {
        let p = poly_rhs(&d);
        let j = poly_jacobian(&d);
        let g: Vec3 = std::array::from_fn(|c| 2.0 * (0..3).map(|r| j[r][c] * p[r]).sum::<f64>());
        let tangent = sub(&g, &scale(dot(&g, &d), &d));
        if norm(&tangent) < 1e-14 {
            break;
        }
        let mut improved = false;
        while step > 1e-16 {
            let trial = project(sub(&d, &scale(step, &tangent)));
            let ft = objective(&trial);
            if ft < f {
                d = trial;
                f = ft;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (f.sqrt(), d)
}

/// Orthonormal frame `(e1, e2)` normal to the line. Built so that the frames
/// of the three lines of type `(1, b, 1)` are coordinate permutations of one
/// another.
fn cylinder_frame(line: LineId) -> (Vec3, Vec3) {
    let d = line.direction();
    // Index of the distinguished component and the two equal ones.
    let (odd, a, b) = match line.index() {
        1 => (1, 0, 2),
        3 => (2, 0, 1),
        4 => (0, 1, 2),
        _ => (2, 0, 1),
    };
    let mut e2 = [0.0; 3];
    e2[a] = std::f64::consts::FRAC_1_SQRT_2;
    e2[b] = -std::f64::consts::FRAC_1_SQRT_2;
    let mut u = [0.0; 3];
    u[odd] = 1.0;
    let e1 = sub(&u, &scale(dot(&u, &d), &d));
    (scale(1.0 / norm(&e1), &e1), e2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinSample {
    pub seed_index: usize,
    /// Ambient starting point.
    pub start: Vec3,
    pub end_ball_point: Vec3,
    pub termination: Termination,
    pub converged: bool,
    pub max_line_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinReport {
    pub line: LineId,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub converged_fraction: f64,
    pub max_line_deviation: f64,
    pub records: Vec<BasinSample>,
}

/// Ball distance within which a terminal point counts as the line's
/// equilibrium at infinity.
pub const BASIN_CONVERGENCE_RADIUS: f64 = 1e-3;
/// Upper ball radius of the sampled cylinder.
pub const CYLINDER_TOP: f64 = 0.98;

/// Starting points drawn uniformly from the solid cylinder of radius
/// `epsilon` around the line, in ball coordinates, between the ball radii of
/// `|x| = delta` and [`CYLINDER_TOP`]. Each sample has its own random stream
/// derived from `(seed, index)`.
pub fn cylinder_points(line: LineId, epsilon: f64, delta: f64, n: usize, seed: u64) -> Vec<Vec3> {
    let d = line.direction();
    let (e1, e2) = cylinder_frame(line);
    let low = delta / (1.0 + delta * delta).sqrt();
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let height = rng.gen_range(low..CYLINDER_TOP);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let radius = epsilon * rng.gen::<f64>().sqrt();
            let offset = [0, 1, 2].map(|c| radius * (angle.cos() * e1[c] + angle.sin() * e2[c]));
            let b = [0, 1, 2].map(|c| height * d[c] + offset[c]);
            ball_unprojection(&b).expect("cylinder stays inside the ball")
        })
        .collect()
}

pub fn cylinder_basin(
    line: LineId,
    epsilon: f64,
    delta: f64,
    n: usize,
    seed: u64,
    cfg: &CompactifiedConfig,
) -> Result<BasinReport> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::Config(format!("epsilon must lie in (0, 0.1], got {epsilon}")));
    }
    if delta.is_nan() || delta < 0.5 || delta.is_infinite() {
        return Err(Error::Config(format!("delta must be >= 0.5, got {delta}")));
    }
    if n == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    let comp = Compactification::new(&poly_field());
    let target = line.direction();
    let starts = cylinder_points(line, epsilon, delta, n, seed);
    let records: Vec<BasinSample> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| -> Result<BasinSample> {
            let tr = integrate_compactified_with(&comp, &SpherePoint::from_ambient(x0), cfg)?;
            let end = tr.final_state();
            let deviation = tr
                .samples
                .iter()
                .map(|s| distance_to_line_ball(&s.x, line))
                .fold(0.0, f64::max);
            let converged = tr.termination == Termination::ConvergedToPoint
                && norm(&sub(&end, &target)) <= BASIN_CONVERGENCE_RADIUS;
            Ok(BasinSample {
                seed_index: i,
                start: *x0,
                end_ball_point: end,
                termination: tr.termination,
                converged,
                max_line_deviation: deviation,
            })
        })
        .collect::<Result<_>>()?;
    let hits = records.iter().filter(|r| r.converged).count();
    Ok(BasinReport {
        line,
        epsilon,
        delta,
        samples: n,
        seed,
        converged_fraction: hits as f64 / n as f64,
        max_line_deviation: records.iter().map(|r| r.max_line_deviation).fold(0.0, f64::max),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Config {
    pub chart: Chart,
    /// Ambient radius of the base point on each line.
    pub base_radius: f64,
    pub lyapunov: LyapunovConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            chart: Chart::U1,
            base_radius: 2.0,
            lyapunov: LyapunovConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub line: LineId,
    pub chart: Chart,
    pub exponents: Vec3,
    pub t_used: f64,
    pub converged: bool,
}

/// Equator root of the chart through the line's direction.
fn line_root(line: LineId, chart: Chart) -> Result<[f64; 2]> {
    let s = SpherePoint::from_unnormalized({
        let d = line.direction();
        [d[0], d[1], d[2], 0.0]
    });
    let p = chart_coords(&s, chart)?;
    Ok([p.z[0], p.z[1]])
}

/// Lyapunov spectrum of the compactified flow along `line`, in `chart`.
/// The base orbit starts at the chart image of `base_radius * p_j` and is
/// held on the invariant line (the equator coordinates are reset to the
/// polished root after every renormalization).
pub fn line_lyapunov(line: LineId, cfg: &Table1Config) -> Result<Table1Row> {
    let comp = Compactification::new(&poly_field());
    let root = line_root(line, cfg.chart)?;
    let root = polish_equator_root(&comp, cfg.chart, root, &SearchConfig::default()).unwrap_or(root);
    let x0 = scale(cfg.base_radius, &line.direction());
    let start = chart_coords(&SpherePoint::from_ambient(&x0), cfg.chart)?;
    let field = comp.chart_field(cfg.chart);
    let hold = |z: &mut Vec3| {
        z[0] = root[0];
        z[1] = root[1];
    };
    let spec = lyapunov_spectrum_constrained(field, &start.z, &cfg.lyapunov, &hold)?;
    Ok(Table1Row {
        line,
        chart: cfg.chart,
        exponents: spec.exponents,
        t_used: spec.t_used,
        converged: spec.converged,
    })
}

/// Lyapunov exponents along the four lines in one chart.
pub fn reproduce_table1(cfg: &Table1Config) -> Result<Vec<Table1Row>> {
    LineId::all().par_iter().map(|&l| line_lyapunov(l, cfg)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    NormalEinstein,
    Einstein,
    NonEinstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitClassification {
    pub limit_direction: Vec3,
    /// `None` when the limit direction is not a metric (some component <= 0).
    pub einstein_residual_at_limit: Option<f64>,
    pub kind: LimitKind,
    pub termination: Termination,
}

/// Within this distance of the diagonal a limit is the normal metric.
pub const NORMAL_TOLERANCE: f64 = 1e-6;
pub const EINSTEIN_TOLERANCE: f64 = 1e-8;

/// Follows the compactified flow from `x0` and classifies the direction at
/// infinity it reaches, read as a metric. The terminal chart point is
/// polished onto the exact equator root before classification.
pub fn classify_limit(x0: &MetricParams, cfg: &CompactifiedConfig) -> Result<LimitClassification> {
    let comp = Compactification::new(&poly_field());
    let tr = integrate_compactified_with(&comp, &SpherePoint::from_ambient(&x0.to_array()), cfg)?;
    let last = tr.last();
    let mut direction = scale(1.0 / norm(&last.x), &last.x);
    if tr.termination == Termination::ConvergedToPoint {
        if let Some(p) = last.chart.filter(|p| !p.chart.is_ambient()) {
            if let Some(root) = polish_equator_root(&comp, p.chart, [p.z[0], p.z[1]], &SearchConfig::default()) {
                let s = chart_point_to_sphere(&ChartPoint {
                    chart: p.chart,
                    z: [root[0], root[1], 0.0],
                });
                let polished = [s.y[0], s.y[1], s.y[2]];
                if norm(&sub(&polished, &direction)) < 1e-4 {
                    direction = polished;
                }
            }
        }
    }
    let residual = MetricParams::from_array(direction)
        .ok()
        .map(|m| einstein_residual(&m).residual);
    let diagonal = [1.0 / 3f64.sqrt(); 3];
    let kind = if tr.termination != Termination::ConvergedToPoint {
        LimitKind::NonEinstein
    } else if norm(&sub(&direction, &diagonal)) <= NORMAL_TOLERANCE {
        LimitKind::NormalEinstein
    } else if residual.is_some_and(|r| r < EINSTEIN_TOLERANCE) {
        LimitKind::Einstein
    } else {
        LimitKind::NonEinstein
    };
    Ok(LimitClassification {
        limit_direction: direction,
        einstein_residual_at_limit: residual,
        kind,
        termination: tr.termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactify::ball_projection;

    #[test]
    fn scan_spot_values() {
        let s3 = 3f64.sqrt();
        assert!((octant_speed(&[1.0, 1.0, 1.0]) - 5.0 / s3).abs() < 1e-12);
        assert!((octant_speed(&[1.0, 0.0, 0.0]) - s3).abs() < 1e-12);
    }

    #[test]
    fn scan_rejects_coarse_grid() {
        assert!(no_interior_equilibria_scan(10).is_err());
    }

    #[test]
    fn frames_are_orthonormal_and_permuted() {
        for line in LineId::all() {
            let d = line.direction();
            let (e1, e2) = cylinder_frame(line);
            assert!(dot(&e1, &d).abs() < 1e-15 && dot(&e2, &d).abs() < 1e-15);
            assert!(dot(&e1, &e2).abs() < 1e-15);
            assert!((norm(&e1) - 1.0).abs() < 1e-15 && (norm(&e2) - 1.0).abs() < 1e-15);
        }
        // gamma3 = gamma1 with coordinates (x, y, z) -> (x, z, y).
        let (a1, b1) = cylinder_frame(LineId::new(1).unwrap());
        let (a3, b3) = cylinder_frame(LineId::new(3).unwrap());
        assert!(norm(&sub(&[a1[0], a1[2], a1[1]], &a3)) < 1e-15);
        assert!(norm(&sub(&[b1[0], b1[2], b1[1]], &b3)) < 1e-15);
    }

    #[test]
    fn cylinder_points_stay_in_cylinder() {
        let line = LineId::new(1).unwrap();
        let pts = cylinder_points(line, 0.05, 0.6, 300, 11);
        let low = 0.6 / (1.0f64 + 0.36).sqrt();
        for x in &pts {
            let b = ball_projection(x);
            assert!(distance_to_line_ball(&b, line) < 0.05);
            let h = dot(&b, &line.direction());
            assert!(h >= low - 1e-12 && h < CYLINDER_TOP);
            assert!(x.iter().all(|&c| c > 0.0));
        }
        assert_eq!(pts, cylinder_points(line, 0.05, 0.6, 300, 11));
        assert_ne!(pts, cylinder_points(line, 0.05, 0.6, 300, 12));
        // Stream per index: a prefix does not depend on n.
        assert_eq!(pts[..10], cylinder_points(line, 0.05, 0.6, 10, 11)[..]);
    }

    #[test]
    fn basin_parameter_guards() {
        let l = LineId::new(2).unwrap();
        let cfg = CompactifiedConfig::default();
        assert!(cylinder_basin(l, 0.2, 0.6, 10, 1, &cfg).is_err());
        assert!(cylinder_basin(l, 0.05, 0.4, 10, 1, &cfg).is_err());
        assert!(cylinder_basin(l, 0.05, 0.6, 0, 1, &cfg).is_err());
    }

    #[test]
    fn diagonal_limit_is_normal() {
        let m = MetricParams::new(0.9, 0.9, 0.9).unwrap();
        let c = classify_limit(&m, &CompactifiedConfig::default()).unwrap();
        assert_eq!(c.kind, LimitKind::NormalEinstein);
        let diag = [1.0 / 3f64.sqrt(); 3];
        assert!(norm(&sub(&c.limit_direction, &diag)) < 1e-9);
    }
}
