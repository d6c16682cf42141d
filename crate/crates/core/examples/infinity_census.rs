//! Singularities at infinity of the compactified quadratic system.

use flagflow::compactify::{find_infinity_equilibria, SearchConfig};
use flagflow::model::poly_field;

fn main() -> flagflow::Result<()> {
    let eqs = find_infinity_equilibria(&poly_field(), &SearchConfig::default())?;
    println!("{} equilibria at infinity", eqs.len());
    for e in &eqs {
        let eig: Vec<String> = e
            .eigenvalues
            .iter()
            .map(|l| {
                if l.im == 0.0 {
                    format!("{:9.4}", l.re)
                } else {
                    format!("{:.4}{:+.4}i", l.re, l.im)
                }
            })
            .collect();
        println!(
            "{}  z = ({:8.4}, {:8.4})  d = ({:7.4}, {:7.4}, {:7.4})  {:13} [{}]{}",
            e.chart,
            e.z[0],
            e.z[1],
            e.direction[0],
            e.direction[1],
            e.direction[2],
            e.stability.to_string(),
            eig.join(", "),
            if e.first_octant { "  first octant" } else { "" }
        );
    }
    Ok(())
}
