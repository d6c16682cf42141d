//! Writes an SVG phase portrait of the Poincare ball and a CSV of one
//! compactified trajectory.
//!
//!     cargo run --release --example phase_portrait -- out_dir

use std::path::PathBuf;

use flagflow::compactify::{find_infinity_equilibria, SearchConfig};
use flagflow::dynamics::{integrate_compactified, CompactifiedConfig};
use flagflow::model::poly_field;
use flagflow::plot::{render_svg, Polyline};
use flagflow::report::trajectory_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let field = poly_field();
    let eqs = find_infinity_equilibria(&field, &SearchConfig::default())?;
    let cfg = CompactifiedConfig::default();
    let mut lines = Vec::new();
    for (i, x0) in [[1.0, 2.0, 3.0], [0.3, 2.5, 0.3], [2.0, 0.1, 0.1], [0.4, 0.4, 2.4]]
        .iter()
        .enumerate()
    {
        let tr = integrate_compactified(&field, x0, &cfg)?;
        if i == 0 {
            std::fs::write(dir.join("trajectory.csv"), trajectory_csv(&tr))?;
        }
        lines.push(Polyline {
            label: format!("start {x0:?}"),
            points: tr.samples.iter().map(|s| s.x).collect(),
        });
    }
    std::fs::write(dir.join("portrait.svg"), render_svg(&eqs, &lines))?;
    println!("wrote {}/portrait.svg and trajectory.csv", dir.display());
    Ok(())
}
