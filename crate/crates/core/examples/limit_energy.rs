//! Evaluate and minimise the limit energy for `φ = x3^3/6`.

use shellscale::expr::parse_expression;
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::immersion::{expansion_fields, frame_transport, FrameOptions};
use shellscale::limit_energy::{LimitProblem, MinimizeOptions};
use shellscale::linalg::Vec3;
use shellscale::metric::MetricField;
use shellscale::quad_forms::EnergyDensity;
use shellscale::tensor::curvature_midplate_jets;

fn main() {
    let m = MetricField::conformal(parse_expression("x3^3/6").unwrap(), Rect::UNIT).unwrap();
    let grid = MidplateGrid::unit(17);
    let frames = frame_transport(&m, &grid, &FrameOptions::default()).unwrap();
    let fields = expansion_fields(&m, &frames, 2).unwrap();
    let jets = curvature_midplate_jets(&m, &grid, 2).unwrap();
    let problem = LimitProblem::new(&fields, &jets, &EnergyDensity::new(1.0, 0.0), 2).unwrap();

    let zero = vec![Vec3::zeros(); grid.len()];
    let at_zero = problem.eval(&zero).unwrap();
    println!("I(0)   = {:.8e}  (1/8064 = {:.8e})", at_zero.total, 1.0 / 8064.0);
    println!("direct = {:.8e}", problem.direct_integral(&zero).unwrap());

    let min = problem.minimize(&MinimizeOptions::default()).unwrap();
    println!("min I  = {:.8e}  (1/50400 = {:.8e})", min.value.total, 1.0 / 50400.0);
    println!("constraint defect {:.1e}, bending {:.1e}", min.value.constraint_defect, min.value.bending);
}
