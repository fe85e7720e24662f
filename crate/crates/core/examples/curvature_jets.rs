//! Riemann components of a conformal metric and their normal jets on the midplate.

use shellscale::expr::parse_expression;
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::metric::MetricField;
use shellscale::tensor::{curvature_midplate_jets, riemann};

fn main() {
    let m = MetricField::conformal(parse_expression("sin(x3) + x3^2/2").unwrap(), Rect::UNIT).unwrap();
    let r = riemann(&m, [0.5, 0.5, 0.2]).unwrap();
    let l = &r.lowered;
    println!("at x3 = 0.2: R_1212 = {:.6}, R_1313 = {:.6}, R_2323 = {:.6}", l[0][1][0][1], l[0][2][0][2], l[1][2][1][2]);
    println!("symmetry defect {:.1e}", r.symmetry_defect());

    let jets = curvature_midplate_jets(&m, &MidplateGrid::unit(5), 3).unwrap();
    for (k, blocks) in jets.normal.iter().enumerate() {
        let b = blocks[12];
        println!("d3^{k} R_i3j3 at centre: [[{:.4}, {:.4}], [{:.4}, {:.4}]]", b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
    }
}
