use proptest::prelude::*;

use shellscale::classifier::{classify_metric, Tolerances};
use shellscale::elastic3d::fit_slope;
use shellscale::expr::{parse_expression, BinaryOp, Expr, UnaryOp, Var};
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::linalg::{rotation, Mat3, Vec3};
use shellscale::metric::MetricField;
use shellscale::quad_forms::{coefficients, dist2_so3, EnergyDensity};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0..1e4f64).prop_map(Expr::constant),
        (0u32..1000).prop_map(|k| Expr::constant(k as f64)),
        prop_oneof![Just(Var::X1), Just(Var::X2), Just(Var::X3)].prop_map(Expr::var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Log),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Sqrt)
        ];
        let binary = prop_oneof![Just(BinaryOp::Add), Just(BinaryOp::Sub), Just(BinaryOp::Mul), Just(BinaryOp::Div)];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, a)| Expr::unary(op, a)),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            (inner, -4i32..5).prop_map(|(a, k)| Expr::powi(a, k)),
        ]
    })
}

fn matrix() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-1.5..1.5f64).prop_map(|a| Mat3::from_row_slice(&a))
}

fn axis() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("nonzero axis", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|a| Vec3::new(a[0], a[1], a[2]))
}

proptest! {
    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        let back = parse_expression(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn reparsed_expressions_evaluate_alike(e in expr(), x in prop::array::uniform3(-2.0..2.0f64)) {
        let back = parse_expression(&e.to_string()).unwrap();
        match (e.eval(x), back.eval(x)) {
            (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn density_is_frame_indifferent(f in matrix(), ax in axis(), angle in -3.1..3.1f64, lambda in 0.0..3.0f64) {
        prop_assume!(f.determinant() > 0.05);
        let d = EnergyDensity::new(1.0, lambda);
        let r = rotation(ax, angle);
        let (w, rw) = (d.eval(&f).unwrap(), d.eval(&(r * f)).unwrap());
        prop_assert!((w - rw).abs() <= 1e-12 * w.max(1e-12), "{w} vs {rw}");
        prop_assert!(dist2_so3(&r) < 1e-20);
    }

    #[test]
    fn density_gradient_matches_differences(f in matrix(), lambda in 0.0..3.0f64) {
        prop_assume!(f.determinant() > 0.05);
        let d = EnergyDensity::new(1.0, lambda);
        let g = d.gradient(&f).unwrap();
        let eps = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut a = f;
                a[(i, j)] += eps;
                let mut b = f;
                b[(i, j)] -= eps;
                let fd = (d.eval(&a).unwrap() - d.eval(&b).unwrap()) / (2.0 * eps);
                prop_assert!((fd - g[(i, j)]).abs() <= 1e-6 * g.amax().max(1.0), "{fd} vs {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn power_laws_fit_exactly(slope in 0.5..9.0f64, c in 1e-6..1e3f64) {
        let h = [0.3f64, 0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|h| c * h.powf(slope)).collect();
        let fit = fit_slope(&h, &e).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!(fit.residual < 1e-10);
    }

    #[test]
    fn coefficient_identity_holds(n in 1usize..30) {
        let c = coefficients(n);
        prop_assert!(c.identity_defect() <= 1e-14);
        prop_assert!(c.beta > 0.0 && c.gamma > 0.0 && c.alpha >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_ignores_metric_scale(p in 1u32..5, c in 0.1..10.0f64) {
        let fact: u32 = (1..=p).product();
        let m = MetricField::conformal(parse_expression(&format!("x3^{p}/{fact}")).unwrap(), Rect::UNIT).unwrap();
        let grid = MidplateGrid::unit(5);
        let a = classify_metric(&m, &grid, 6, Tolerances::default()).unwrap();
        let b = classify_metric(&m.scaled(c), &grid, 6, Tolerances::default()).unwrap();
        prop_assert_eq!(a.kind, b.kind);
    }
}
