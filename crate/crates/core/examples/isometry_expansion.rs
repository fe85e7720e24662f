//! Build the expansion `y0 + Σ x3^k/k! b_k` and check its residuals and the curvature identity.

use shellscale::expr::parse_expression;
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::immersion::{expansion_fields, frame_transport, residual_norms, riem_identity_check, FrameOptions};
use shellscale::metric::MetricField;
use shellscale::tensor::curvature_midplate_jets;

fn main() {
    let m = MetricField::conformal(parse_expression("x3^3/6").unwrap(), Rect::UNIT).unwrap();
    let grid = MidplateGrid::unit(17);
    let frames = frame_transport(&m, &grid, &FrameOptions::default()).unwrap();
    let n = 2;
    let fields = expansion_fields(&m, &frames, n).unwrap();
    for (m, r) in residual_norms(&fields).unwrap().iter().enumerate() {
        println!("order {} residual {r:.3e}", m + 1);
    }
    let jets = curvature_midplate_jets(&m, &grid, n).unwrap();
    println!("curvature identity defect {:.1e}", riem_identity_check(&fields, &jets).unwrap());
    let c = grid.index(8, 8);
    println!("b1 = {:?}\nb3 = {:?}", fields.b(1)[c].as_slice(), fields.b(3)[c].as_slice());
}
