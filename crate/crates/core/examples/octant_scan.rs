//! Lower bound on |P| over the first-octant sphere: the quadratic system has
//! no equilibria with positive entries.

use flagflow::experiments::no_interior_equilibria_scan;

fn main() -> flagflow::Result<()> {
    for r in [100, 200, 400, 800] {
        let s = no_interior_equilibria_scan(r)?;
        println!(
            "resolution {r:4}: grid min {:.8}, polished min {:.8} at ({:.5}, {:.5}, {:.5})",
            s.grid_min, s.min_norm, s.argmin[0], s.argmin[1], s.argmin[2]
        );
    }
    Ok(())
}
