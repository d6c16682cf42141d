//! Static SVG phase portrait of the Poincare ball, viewed along (1, 1, 1).

use std::fmt::Write;

use crate::compactify::{InfinityEquilibrium, Stability};
use crate::{dot, Vec3};

const SIZE: f64 = 640.0;
const RADIUS: f64 = 280.0;

/// Orthographic projection onto the plane normal to (1, 1, 1). Returns the
/// screen point and the depth along the view axis (positive = front).
fn project(x: &Vec3) -> (f64, f64, f64) {
    let s2 = std::f64::consts::SQRT_2;
    let s6 = 6f64.sqrt();
    let u = (x[0] - x[1]) / s2;
    let v = (2.0 * x[2] - x[0] - x[1]) / s6;
    let depth = dot(x, &[1.0 / 3f64.sqrt(); 3]);
    (SIZE / 2.0 + RADIUS * u, SIZE / 2.0 - RADIUS * v, depth)
}

fn colour(s: Stability) -> &'static str {
    match s {
        Stability::Attractor => "#1f77b4",
        Stability::Repeller => "#d62728",
        Stability::Saddle => "#2ca02c",
        Stability::Nonhyperbolic => "#7f7f7f",
    }
}

/// A named polyline of ball points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub label: String,
    pub points: Vec<Vec3>,
}

/// Renders the unit circle (the equator seen edge-on is the silhouette),
/// the coordinate axes, equilibria at infinity and trajectories. Points on
/// the far hemisphere are drawn hollow. Output is deterministic.
pub fn render_svg(equilibria: &[InfinityEquilibrium], trajectories: &[Polyline]) -> String {
    let mut s = String::new();
    let c = SIZE / 2.0;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="black" stroke-width="1.5"/>"#
    );
    for (i, name) in ["x1", "x2", "x3"].iter().enumerate() {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let (x, y, _) = project(&e);
        let _ = writeln!(
            s,
            r##"<line x1="{c}" y1="{c}" x2="{x:.3}" y2="{y:.3}" stroke="#bbbbbb" stroke-dasharray="4 3"/><text x="{x:.3}" y="{y:.3}" font-size="12" fill="#555555">{name}</text>"##
        );
    }
    for t in trajectories {
        if t.points.len() < 2 {
            continue;
        }
        let pts: Vec<String> = t
            .points
            .iter()
            .map(|p| {
                let (x, y, _) = project(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#ff7f0e" stroke-width="1" points="{}"><title>{}</title></polyline>"##,
            pts.join(" "),
            t.label
        );
    }
    for e in equilibria {
        // Each equilibrium stands for an antipodal pair; draw both.
        for sign in [1.0, -1.0] {
            let d = e.direction.map(|v| sign * v);
            let (x, y, depth) = project(&d);
            let col = colour(e.stability);
            let fill = if depth >= 0.0 { col } else { "white" };
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="5" fill="{fill}" stroke="{col}" stroke-width="1.5"><title>{} {}</title></circle>"#,
                e.stability, e.chart
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
