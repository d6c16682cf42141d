//! Where metrics go at infinity under the flow: a few starting metrics and
//! the class of their limit direction.

use flagflow::dynamics::CompactifiedConfig;
use flagflow::experiments::classify_limit;
use flagflow::model::MetricParams;

fn main() -> flagflow::Result<()> {
    // 2 p'_1 nudged off the line.
    let near_p1 = [2.0 * 0.198756 + 0.01, 2.0 * 0.959682, 2.0 * 0.198756];
    let starts = [
        [1.0, 1.0, 1.0],
        [1.2, 1.25, 1.2],
        near_p1,
        [1.0, 2.0, 3.0],
        [0.5, 4.0, 0.7],
        [1.0, 1.0, 1.0e-2],
        [0.2, 1.0, 0.2],
    ];
    let cfg = CompactifiedConfig::default();
    for v in starts {
        let c = classify_limit(&MetricParams::from_array(v)?, &cfg)?;
        let d = c.limit_direction;
        println!(
            "{v:?} -> ({:.6}, {:.6}, {:.6})  {:?}  [{}]",
            d[0], d[1], d[2], c.kind, c.termination
        );
    }
    Ok(())
}
