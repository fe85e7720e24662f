//! 3D energy of the expansion ansatz and of the recovery sequence across thicknesses.

use shellscale::elastic3d::{scaling_sweep, SweepMode, SweepOptions};
use shellscale::expr::parse_expression;
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::immersion::{expansion_fields, frame_transport, FrameOptions};
use shellscale::lbfgs::LbfgsOptions;
use shellscale::limit_energy::LimitProblem;
use shellscale::linalg::Vec3;
use shellscale::metric::MetricField;
use shellscale::quad_forms::EnergyDensity;
use shellscale::tensor::curvature_midplate_jets;

fn main() {
    let m = MetricField::conformal(parse_expression("x3^3/6").unwrap(), Rect::UNIT).unwrap();
    let d = EnergyDensity::new(1.0, 0.0);
    let grid = MidplateGrid::unit(17);
    let frames = frame_transport(&m, &grid, &FrameOptions::default()).unwrap();
    let fields = expansion_fields(&m, &frames, 2).unwrap();
    let jets = curvature_midplate_jets(&m, &grid, 2).unwrap();
    let problem = LimitProblem::new(&fields, &jets, &d, 2).unwrap();
    let zero = vec![Vec3::zeros(); grid.len()];
    let hs = [0.2, 0.14, 0.1, 0.07, 0.05];

    for (mode, nz) in [(SweepMode::Ansatz, 5), (SweepMode::Recovery, 9)] {
        let opts = SweepOptions { n: 2, nz, mode, lbfgs: LbfgsOptions::default() };
        let r = scaling_sweep(&m, &d, &fields, Some((&problem, &zero)), &hs, &opts).unwrap();
        println!("{} (nz = {nz})", mode.name());
        for p in &r.points {
            println!("  h = {:.2}  E = {:.4e}  E/h^6 = {:.5e}", p.h, p.energy, p.scaled_energy);
        }
        if let Some(fit) = r.fit {
            println!("  slope {:.3}", fit.slope);
        }
    }
    println!("limit energy I(0) = {:.5e}", problem.eval(&zero).unwrap().total);
}
