//! Ricci components and flow vector for a metric given on the command line.
//!
//!     cargo run --example ricci_components -- 1 2 3

use flagflow::model::{einstein_residual, flow_rhs, poly_rhs, ricci_components, MetricParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let v = match args.as_slice() {
        [] => [1.0, 2.0, 3.0],
        [a, b, c] => [*a, *b, *c],
        _ => return Err("expected three metric parameters l12 l13 l23".into()),
    };
    let m = MetricParams::from_array(v)?;
    let r = ricci_components(&m);
    let fit = einstein_residual(&m);
    println!("metric      (l12, l13, l23) = {v:?}");
    println!("ricci       (r12, r13, r23) = {:?}", r.to_array());
    println!("flow        -2 r            = {:?}", flow_rhs(&m));
    println!("quadratic   P(l)            = {:?}", poly_rhs(&v));
    println!("einstein    c = {:.12}, residual = {:.3e}", fit.constant, fit.residual);
    Ok(())
}
