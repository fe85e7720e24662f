//! Integrate midplate frames for a bent pullback metric and watch the defect shrink.

use shellscale::expr::{parse_expression, Expr};
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::immersion::{frame_transport, FrameOptions};
use shellscale::metric::MetricField;

fn e(s: &str) -> Expr {
    parse_expression(s).unwrap()
}

fn main() {
    let jac = [
        [e("1 + 0.4*x1*x2"), e("0.3*cos(x2) + 0.2*x1^2"), e("0")],
        [e("0.4*x1"), e("1 + 0.3*x2"), e("0")],
        [e("0.1*x3"), e("0.5*x2^2"), e("1 + 0.1*x1")],
    ];
    let m = MetricField::pullback(&jac, Rect::UNIT);
    let mut last = None;
    for nx in [17, 33, 65, 129] {
        let f = frame_transport(&m, &MidplateGrid::unit(nx), &FrameOptions::default()).unwrap();
        let d = f.metric_defect(&m).unwrap();
        let ratio = last.map(|l: f64| format!("  ratio {:.1}", l / d)).unwrap_or_default();
        println!("{nx:3}x{nx:<3} |B0^T B0 - G| = {d:.3e}  holonomy {:.1e}{ratio}", f.holonomy);
        last = Some(d);
    }
}
