//! Classify the conformal ladder `φ = x3^p / p!` and a flat metric.

use shellscale::classifier::{classify_metric, Tolerances};
use shellscale::expr::parse_expression;
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::metric::MetricField;

fn main() {
    let grid = MidplateGrid::unit(9);
    for (label, phi) in [("x3", "x3"), ("x3^2/2", "x3^2/2"), ("x3^3/6", "x3^3/6"), ("x3^4/24", "x3^4/24")] {
        let m = MetricField::conformal(parse_expression(phi).unwrap(), Rect::UNIT).unwrap();
        let c = classify_metric(&m, &grid, 8, Tolerances::default()).unwrap();
        match (c.exponent(), c.n()) {
            (Some(e), Some(n)) => println!("phi = {label:8} -> inf E ~ h^{e} (n = {n})"),
            (Some(e), None) => println!("phi = {label:8} -> inf E ~ h^{e} (midplate curvature nonzero)"),
            _ => println!("phi = {label:8} -> {:?}", c.kind),
        }
    }
    let flat = classify_metric(&MetricField::identity(Rect::UNIT), &grid, 8, Tolerances::default()).unwrap();
    println!("identity        -> {:?}", flat.kind);
}
