//! Fraction of starts in a thin cylinder around each line that reach the
//! line's equilibrium at infinity.
//!
//!     cargo run --release --example cylinder_basin -- 200

use flagflow::dynamics::CompactifiedConfig;
use flagflow::experiments::cylinder_basin;
use flagflow::model::LineId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(50);
    let cfg = CompactifiedConfig::default();
    for line in LineId::all() {
        let rep = cylinder_basin(line, 0.05, 0.6, n, 7, &cfg)?;
        let mut ends: Vec<String> = rep
            .records
            .iter()
            .filter(|r| !r.converged)
            .map(|r| {
                format!(
                    "({:.3}, {:.3}, {:.3})",
                    r.end_ball_point[0], r.end_ball_point[1], r.end_ball_point[2]
                )
            })
            .collect();
        ends.sort();
        ends.dedup();
        println!(
            "{line}: converged {:.3}, max deviation {:.4}",
            rep.converged_fraction, rep.max_line_deviation
        );
        for e in ends.iter().take(4) {
            println!("    escaped to {e}");
        }
    }
    Ok(())
}
