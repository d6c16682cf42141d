//! Lyapunov exponents along the four invariant lines in each chart.

use flagflow::compactify::Chart;
use flagflow::experiments::{reproduce_table1, Table1Config};

fn main() -> flagflow::Result<()> {
    for chart in Chart::POSITIVE {
        let rows = reproduce_table1(&Table1Config {
            chart,
            ..Default::default()
        })?;
        println!("chart {chart}");
        for r in rows {
            println!(
                "  {}  lambda = ({:9.4}, {:9.4}, {:9.4})  t = {:6.1}  converged = {}",
                r.line, r.exponents[0], r.exponents[1], r.exponents[2], r.t_used, r.converged
            );
        }
    }
    Ok(())
}
