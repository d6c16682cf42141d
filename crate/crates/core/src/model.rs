//! The three-parameter model of invariant metrics on SU(3)/T.
//!
//! An invariant metric is a triple `(l12, l13, l23)` of positive scales on the
//! three isotropy summands. Its Ricci tensor is diagonal in the same basis
//! with components `(r12, r13, r23)`, and the Ricci flow reduces to the ODE
//! `d/dt l_ij = -2 r_ij`. Multiplying the Ricci components by
//! `12 * l12 * l13 * l23` clears denominators and gives a homogeneous
//! quadratic field on all of R^3, which is the system studied at infinity.

use serde::Serialize;

use crate::poly::{Poly3, PolyField3};
use crate::{dot, norm, Error, Matrix3, Result, Vec3};

/// Positive scales of an invariant metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricParams {
    pub l12: f64,
    pub l13: f64,
    pub l23: f64,
}

impl MetricParams {
    pub fn new(l12: f64, l13: f64, l23: f64) -> Result<Self> {
        // `!(x > 0)` also rejects NaN.
        if !(l12 > 0.0 && l13 > 0.0 && l23 > 0.0) {
            return Err(Error::NonPositiveMetric(l12, l13, l23));
        }
        Ok(Self { l12, l13, l23 })
    }

    pub fn from_array(v: Vec3) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> Vec3 {
        [self.l12, self.l13, self.l23]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciComponents {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
}

impl RicciComponents {
    pub fn to_array(self) -> Vec3 {
        [self.r12, self.r13, self.r23]
    }
}

/// Index of one of the four invariant lines through the Einstein directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LineId(u8);

impl LineId {
    pub fn new(index: usize) -> Result<Self> {
        if (1..=4).contains(&index) {
            Ok(Self(index as u8))
        } else {
            Err(Error::InvalidLine(index))
        }
    }

    pub fn all() -> [LineId; 4] {
        [LineId(1), LineId(2), LineId(3), LineId(4)]
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Unit direction of the line in the first octant.
    pub fn direction(self) -> Vec3 {
        invariant_directions()[self.index() - 1]
    }
}

impl std::fmt::Display for LineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "gamma{}", self.0)
    }
}

/// Ricci components of an invariant metric.
pub fn ricci_components(m: &MetricParams) -> RicciComponents {
    let MetricParams { l12, l13, l23 } = *m;
    let r12 = 1.0 / (2.0 * l12) + (l12 / (l13 * l23) - l13 / (l12 * l23) - l23 / (l12 * l13)) / 12.0;
    let r13 = 1.0 / (2.0 * l13) + (l13 / (l12 * l23) - l12 / (l13 * l23) - l23 / (l12 * l13)) / 12.0;
    let r23 = 1.0 / (2.0 * l23) + (l23 / (l12 * l13) - l13 / (l23 * l12) - l12 / (l23 * l13)) / 12.0;
    RicciComponents { r12, r13, r23 }
}

/// Checked variant of [`ricci_components`] for raw triples.
pub fn ricci_components_of(v: Vec3) -> Result<RicciComponents> {
    MetricParams::from_array(v).map(|m| ricci_components(&m))
}

/// Right-hand side of the Ricci flow, `-2 r_ij`.
pub fn flow_rhs(m: &MetricParams) -> Vec3 {
    let r = ricci_components(m);
    [-2.0 * r.r12, -2.0 * r.r13, -2.0 * r.r23]
}

/// The homogeneous quadratic field obtained by clearing denominators.
/// Defined on all of R^3.
pub fn poly_rhs(x: &Vec3) -> Vec3 {
    let [a, b, c] = *x;
    [
        6.0 * b * c + a * a - b * b - c * c,
        6.0 * a * c + b * b - a * a - c * c,
        6.0 * a * b + c * c - b * b - a * a,
    ]
}

pub fn poly_jacobian(x: &Vec3) -> Matrix3 {
    let [a, b, c] = *x;
    [
        [2.0 * a, 6.0 * c - 2.0 * b, 6.0 * b - 2.0 * c],
        [6.0 * c - 2.0 * a, 2.0 * b, 6.0 * a - 2.0 * c],
        [6.0 * b - 2.0 * a, 6.0 * a - 2.0 * b, 2.0 * c],
    ]
}

/// The same quadratic field as a [`PolyField3`], for the compactification.
pub fn poly_field() -> PolyField3 {
    let p1 = Poly3::from_terms(&[(6.0, [0, 1, 1]), (1.0, [2, 0, 0]), (-1.0, [0, 2, 0]), (-1.0, [0, 0, 2])]);
    let p2 = Poly3::from_terms(&[(6.0, [1, 0, 1]), (1.0, [0, 2, 0]), (-1.0, [2, 0, 0]), (-1.0, [0, 0, 2])]);
    let p3 = Poly3::from_terms(&[(6.0, [1, 1, 0]), (1.0, [0, 0, 2]), (-1.0, [0, 2, 0]), (-1.0, [2, 0, 0])]);
    PolyField3::new([p1, p2, p3])
}

/// Largest componentwise gap between the quadratic field and
/// `12 * l12 * l13 * l23` times the Ricci components.
pub fn reparam_check(m: &MetricParams) -> f64 {
    let p = poly_rhs(&m.to_array());
    let k = 12.0 * m.l12 * m.l13 * m.l23;
    let r = ricci_components(m).to_array();
    (0..3).map(|i| (p[i] - k * r[i]).abs()).fold(0.0, f64::max)
}

/// `2 + 2 sqrt(2)`: ratio of the long to the short component of the three
/// non-normal Einstein directions.
pub fn einstein_ratio() -> f64 {
    2.0 + 2.0 * std::f64::consts::SQRT_2
}

fn normalized(v: Vec3) -> Vec3 {
    let n = norm(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Unit directions of the four invariant lines, in the order
/// `(1, b, 1)`, `(1, 1, 1)`, `(1, 1, b)`, `(b, 1, 1)` with `b = 2 + 2 sqrt(2)`.
pub fn invariant_directions() -> [Vec3; 4] {
    let b = einstein_ratio();
    [
        normalized([1.0, b, 1.0]),
        normalized([1.0, 1.0, 1.0]),
        normalized([1.0, 1.0, b]),
        normalized([b, 1.0, 1.0]),
    ]
}

/// Length of the component of the quadratic field at `d` orthogonal to `d`.
/// Zero exactly when the ray through `d` is invariant.
pub fn tangency_defect(d: &Vec3) -> Result<f64> {
    let n = norm(d);
    if n.is_nan() || (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(n));
    }
    let x = poly_rhs(d);
    let radial = dot(&x, d);
    Ok(norm(&[
        x[0] - radial * d[0],
        x[1] - radial * d[1],
        x[2] - radial * d[2],
    ]))
}

/// Least-squares Einstein constant and the residual of `Ric = c g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinFit {
    pub constant: f64,
    pub residual: f64,
}

pub fn einstein_residual(m: &MetricParams) -> EinsteinFit {
    let r = ricci_components(m).to_array();
    let g = m.to_array();
    let constant = dot(&r, &g) / dot(&g, &g);
    let residual = (0..3).map(|i| (r[i] - constant * g[i]).abs()).fold(0.0, f64::max);
    EinsteinFit { constant, residual }
}
