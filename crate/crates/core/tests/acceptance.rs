//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints exactly one `pass`/`FAIL` line, then exits nonzero on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shellscale::classifier::{classify_metric, ScalingKind, Tolerances};
use shellscale::elastic3d::{
    ansatz_deformation, energy3d, scaling_sweep, DeformationGrid, ElasticProblem, Mesh3, SweepMode, SweepOptions,
};
use shellscale::expr::{parse_expression, Expr};
use shellscale::grid::{MidplateGrid, Rect};
use shellscale::immersion::{curvature_excess, expansion_fields, frame_transport, riem_identity_check, ExpansionFields, FrameOptions};
use shellscale::lbfgs::LbfgsOptions;
use shellscale::limit_energy::{bending_tensor, induced_p, LimitProblem, MinimizeOptions, PlateData, StrainSpace};
use shellscale::linalg::{rotation, skew, Mat2, Mat3, Vec3};
use shellscale::metric::MetricField;
use shellscale::quad_forms::{coefficients, coefficients_via_moments, EnergyDensity};
use shellscale::tensor::{curvature_midplate_jets, normal_metric_identity_residual, riemann};

type Outcome = Result<String, String>;

const HS: [f64; 5] = [0.2, 0.14, 0.1, 0.07, 0.05];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(src: &str) -> Expr {
    parse_expression(src).unwrap_or_else(|err| panic!("{src}: {err}"))
}

fn conformal(src: &str) -> MetricField {
    MetricField::conformal(e(src), Rect::UNIT).unwrap()
}

fn density() -> EnergyDensity {
    EnergyDensity::new(1.0, 0.0)
}

fn fields(m: &MetricField, nx: usize, n: usize) -> ExpansionFields {
    let grid = MidplateGrid::unit(nx);
    let frames = frame_transport(m, &grid, &FrameOptions::default()).unwrap();
    expansion_fields(m, &frames, n).unwrap()
}

fn limit_problem(m: &MetricField, nx: usize, n: usize) -> LimitProblem {
    let f = fields(m, nx, n);
    let jets = curvature_midplate_jets(m, &f.grid, n).unwrap();
    LimitProblem::new(&f, &jets, &density(), n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Random coefficient with three decimals, so the printed literal is exact.
fn coef(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let k = rng.gen_range((lo * 1000.0) as i64..=(hi * 1000.0) as i64);
    k as f64 / 1000.0
}

fn classifier_ladder() -> Outcome {
    let grid = MidplateGrid::unit(9);
    let mut seen = Vec::new();
    for p in 1..=4usize {
        let fact: usize = (1..=p).product();
        let m = conformal(&format!("x3^{p}/{fact}"));
        let class = classify_metric(&m, &grid, 8, Tolerances { tol_abs: 1e-10, tol_rel: 1e-8 }).map_err(|e| e.to_string())?;
        match (p, class.kind) {
            (1, ScalingKind::BaseRegime) => seen.push("base".to_string()),
            (p, ScalingKind::Exponent { n }) if n == p - 1 && class.exponent() == Some(2 * p) => {
                seen.push(format!("h^{}", 2 * p))
            }
            (p, k) => return Err(format!("p={p}: got {k:?}")),
        }
    }
    Ok(seen.join(", "))
}

fn curvature_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut worst_other: f64 = 0.0;
    for _ in 0..10 {
        let (a, b, c, k, d, m) = (
            coef(&mut rng, -1.0, 1.0),
            coef(&mut rng, -1.0, 1.0),
            coef(&mut rng, -0.5, 0.5),
            coef(&mut rng, 0.5, 3.0),
            coef(&mut rng, -0.3, 0.3),
            coef(&mut rng, -1.5, 1.5),
        );
        let src = format!("({a})*x3 + ({b})*x3^2 + ({c})*sin(({k})*x3) + ({d})*exp(({m})*x3)");
        let metric = conformal(&src);
        let phi = |t: f64| a * t + b * t * t + c * (k * t).sin() + d * (m * t).exp();
        let dphi = |t: f64| a + 2.0 * b * t + c * k * (k * t).cos() + d * m * (m * t).exp();
        let ddphi = |t: f64| 2.0 * b - c * k * k * (k * t).sin() + d * m * m * (m * t).exp();
        for _ in 0..20 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5)];
            let r = riemann(&metric, x).map_err(|e| e.to_string())?;
            let s = r.scale();
            let conf = (2.0 * phi(x[2])).exp();
            let expect = [
                ((0, 1), -dphi(x[2]).powi(2) * conf),
                ((0, 2), -ddphi(x[2]) * conf),
                ((1, 2), -ddphi(x[2]) * conf),
            ];
            for ((i, j), want) in expect {
                let got = r.lowered[i][j][i][j];
                worst = worst.max((got - want).abs() / want.abs().max(s));
            }
            for (p, q) in [((0, 1), (0, 2)), ((0, 1), (1, 2)), ((0, 2), (1, 2))] {
                worst_other = worst_other.max(r.lowered[p.0][p.1][q.0][q.1].abs() / s.max(f64::MIN_POSITIVE));
            }
        }
    }
    ensure(worst <= 1e-9 && worst_other <= 1e-9, || format!("rel {worst:e}, off-diagonal {worst_other:e}"))?;
    Ok(format!("max rel {worst:.1e}, off-diagonal {worst_other:.1e}"))
}

fn random_pullback(rng: &mut ChaCha8Rng) -> MetricField {
    let mut rows: Vec<[Expr; 3]> = Vec::new();
    for c in 0..3 {
        let mut row = Vec::new();
        for a in 0..3 {
            let base = if a == c { "1" } else { "0" };
            let (p, q, r, s, t) = (
                coef(rng, -0.1, 0.1),
                coef(rng, -2.0, 2.0),
                coef(rng, -2.0, 2.0),
                coef(rng, -0.1, 0.1),
                coef(rng, -1.0, 1.0),
            );
            row.push(e(&format!(
                "{base} + ({p})*sin(({q})*x1 + ({r})*x3 + ({t})*x2) + ({s})*x3^2*exp(({t})*x1)"
            )));
        }
        rows.push(row.try_into().unwrap());
    }
    let jac: [[Expr; 3]; 3] = rows.try_into().unwrap();
    MetricField::pullback(&jac, Rect::UNIT)
}

fn normal_metric_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let m = random_pullback(&mut rng);
        for _ in 0..4 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.0];
            for n in 0..=4 {
                let (res, scale) = normal_metric_identity_residual(&m, x, n).map_err(|e| e.to_string())?;
                worst = worst.max(res / scale);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("residual/scale {worst:e}"))?;
    Ok(format!("max residual/scale {worst:.1e}"))
}

fn coefficient_tables() -> Outcome {
    let mut route: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for n in 1..=10 {
        let (a, b) = (coefficients(n), coefficients_via_moments(n));
        for (x, y) in [(a.alpha, b.alpha), (a.beta, b.beta), (a.gamma, b.gamma), (a.delta, b.delta)] {
            route = route.max(rel(x, y));
        }
        identity = identity.max(a.identity_defect()).max(b.identity_defect());
    }
    let spots = [
        ("alpha_2", coefficients(2).alpha, 1.0 / 40.0),
        ("delta_4", coefficients(3).delta, 1.0 / 1920.0),
        ("beta_2", coefficients(2).beta, 1.0 / 201600.0),
    ];
    for (name, got, want) in spots {
        ensure(rel(got, want) <= 1e-14, || format!("{name} = {got:e}, expected {want:e}"))?;
    }
    ensure(route <= 1e-14, || format!("routes differ by {route:e}"))?;
    ensure(identity <= 1e-15, || format!("identity defect {identity:e}"))?;
    Ok(format!("routes {route:.1e}, identity {identity:.1e}, spot values exact"))
}

fn curvature_identity() -> Outcome {
    let mut report = Vec::new();
    for (src, n) in [("x3^3/6", 2usize), ("x3^4/24", 3)] {
        let m = conformal(src);
        let f = fields(&m, 33, n);
        let jets = curvature_midplate_jets(&m, &f.grid, n).map_err(|e| e.to_string())?;
        let defect = riem_identity_check(&f, &jets).map_err(|e| e.to_string())?;
        let target = -2.0 * Mat2::identity();
        let lhs = jets.normal[n - 1].iter().map(|r| (2.0 * r - target).amax()).fold(0.0, f64::max);
        let rhs = curvature_excess(&f)
            .iter()
            .enumerate()
            .filter(|(node, _)| f.grid.is_interior(*node))
            .map(|(_, r)| (r - target).amax())
            .fold(0.0, f64::max);
        ensure(defect <= 1e-6 && lhs <= 1e-9 && rhs <= 1e-6, || {
            format!("{src}: defect {defect:e}, curvature side {lhs:e}, frame side {rhs:e}")
        })?;
        report.push(format!("n={n} defect {defect:.1e}"));
    }
    Ok(report.join(", "))
}

/// Pullback of `u = (x1 + 0.2 x1² x2 + 0.3 sin x2, x2 + 0.2 x1² + 0.15 x2², x3 + 0.1 x1 x3 + x2³/6)`.
fn bent_pullback() -> MetricField {
    let jac = [
        [e("1 + 0.4*x1*x2"), e("0.3*cos(x2) + 0.2*x1^2"), e("0")],
        [e("0.4*x1"), e("1 + 0.3*x2"), e("0")],
        [e("0.1*x3"), e("0.5*x2^2"), e("1 + 0.1*x1")],
    ];
    MetricField::pullback(&jac, Rect::UNIT)
}

fn frame_fidelity() -> Outcome {
    let m = bent_pullback();
    let mut defects = Vec::new();
    for nx in [33, 65] {
        let frames = frame_transport(&m, &MidplateGrid::unit(nx), &FrameOptions::default()).map_err(|e| e.to_string())?;
        defects.push(frames.metric_defect(&m).map_err(|e| e.to_string())?);
    }
    let ratio = defects[0] / defects[1];
    ensure(defects[0] <= 1e-8 && ratio >= 8.0, || format!("defects {defects:?}, ratio {ratio:.2}"))?;
    Ok(format!("33: {:.2e}, 65: {:.2e}, ratio {ratio:.1}", defects[0], defects[1]))
}

fn ansatz_slopes() -> Outcome {
    let mut report = Vec::new();
    for (src, n) in [("x3^2/2", 1usize), ("x3^3/6", 2)] {
        let m = conformal(src);
        let f = fields(&m, 17, n);
        let opts = SweepOptions { n, nz: 5, mode: SweepMode::Ansatz, lbfgs: LbfgsOptions::default() };
        let r = scaling_sweep(&m, &density(), &f, None, &HS, &opts).map_err(|e| e.to_string())?;
        let fit = r.fit.ok_or_else(|| format!("{src}: no slope ({:?})", r.flag))?;
        let target = 2.0 * (n as f64 + 1.0);
        ensure(fit.slope >= target - 0.2 && fit.slope <= target + 0.6, || format!("{src}: slope {}", fit.slope))?;
        report.push(format!("n={n} slope {:.3}", fit.slope));
    }
    Ok(report.join(", "))
}

fn minimized_scaling() -> Outcome {
    let m = conformal("x3^3/6");
    let problem = limit_problem(&m, 33, 2);
    let v = problem.minimize(&MinimizeOptions::default()).map_err(|e| e.to_string())?.v;
    let opts = SweepOptions {
        n: 2,
        nz: 5,
        mode: SweepMode::Minimize,
        lbfgs: LbfgsOptions { max_iter: 1000, ..Default::default() },
    };
    let r = scaling_sweep(&m, &density(), &problem.fields, Some((&problem, &v)), &HS, &opts).map_err(|e| e.to_string())?;
    let scaled: Vec<f64> = r.points.iter().map(|p| p.scaled_energy).collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    let slope = r.fit.as_ref().map(|f| f.slope).ok_or_else(|| format!("no slope ({:?})", r.flag))?;
    ensure(lo > 0.0 && hi / lo <= 5.0 && slope >= 5.6, || {
        format!("scaled {scaled:?}, max/min {:.2}, slope {slope:.3}", hi / lo)
    })?;
    Ok(format!("slope {slope:.3}, scaled max/min {:.2}", hi / lo))
}

/// Value at `h = 0` of the quadratic through three points.
fn extrapolate(h: &[f64], s: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= h[j] / (h[j] - h[i]);
            }
        }
        total += w * s[i];
    }
    total
}

fn recovery_consistency() -> Outcome {
    let m = conformal("x3^3/6");
    let problem = limit_problem(&m, 17, 2);
    let zero = vec![Vec3::zeros(); problem.fields.grid.len()];
    let limit = problem.eval(&zero).map_err(|e| e.to_string())?.total;
    let opts = SweepOptions { n: 2, nz: 9, mode: SweepMode::Recovery, lbfgs: LbfgsOptions::default() };
    let r = scaling_sweep(&m, &density(), &problem.fields, Some((&problem, &zero)), &HS, &opts)
        .map_err(|e| e.to_string())?;
    let h: Vec<f64> = r.points[2..].iter().map(|p| p.h).collect();
    let s: Vec<f64> = r.points[2..].iter().map(|p| p.scaled_energy).collect();
    let extrapolated = extrapolate(&h, &s);
    let err = rel(extrapolated, limit);
    ensure(err <= 0.1, || format!("extrapolated {extrapolated:e} vs limit {limit:e}"))?;
    Ok(format!("extrapolated {extrapolated:.4e} vs limit {limit:.4e} ({:.1}%)", 100.0 * err))
}

fn flat_reduction() -> Outcome {
    let problem = limit_problem(&MetricField::identity(Rect::UNIT), 65, 1);
    let v: Vec<Vec3> = problem.fields.grid.coords().iter().map(|x| Vec3::new(0.0, 0.0, x[0] * x[0])).collect();
    let total = problem.eval(&v).map_err(|e| e.to_string())?.total;
    let err = rel(total, 1.0 / 3.0);
    ensure(err <= 0.01, || format!("energy {total}"))?;
    Ok(format!("energy {total:.10} vs 1/3"))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    rotation(axis, rng.gen_range(-3.0..3.0))
}

fn random_expression(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => "x1".into(),
            1 => "x2".into(),
            2 => "x3".into(),
            _ => format!("{}", coef(rng, 0.0, 5.0)),
        };
    }
    let a = random_expression(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("{a} + {}", random_expression(rng, depth - 1)),
        1 => format!("{a} - ({})", random_expression(rng, depth - 1)),
        2 => format!("({a}) * ({})", random_expression(rng, depth - 1)),
        3 => format!("({a}) / (2 + ({})^2)", random_expression(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("exp(0.1*({a}))"),
        6 => format!("-({a})"),
        _ => format!("({a})^{}", rng.gen_range(1..4)),
    }
}

fn property_battery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let d = EnergyDensity::new(1.0, 0.7);
    let m = conformal("x3^2/2");
    let f = fields(&m, 5, 1);
    let mesh = Mesh3::new(f.grid, 3, 0.2).unwrap();
    let base = ansatz_deformation(&f, mesh, 2).map_err(|e| e.to_string())?;

    // Frame indifference of the density and of the discrete energy.
    let mut indiff: f64 = 0.0;
    for _ in 0..50 {
        let mut fm = Mat3::identity();
        for v in fm.iter_mut() {
            *v += rng.gen_range(-0.4..0.4);
        }
        let r = random_rotation(&mut rng);
        let w = d.eval(&fm).map_err(|e| e.to_string())?;
        indiff = indiff.max(rel(w, d.eval(&(r * fm)).map_err(|e| e.to_string())?));
    }
    let e0 = energy3d(&base, &m, &d).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        let r = random_rotation(&mut rng);
        let t = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let moved = base.map(|x| r * x + t);
        indiff = indiff.max(rel(e0, energy3d(&moved, &m, &d).map_err(|e| e.to_string())?));
    }
    ensure(indiff <= 1e-12, || format!("frame indifference {indiff:e}"))?;

    // Directional derivatives against central differences.
    let problem = ElasticProblem::new(mesh, &m, &d).map_err(|e| e.to_string())?;
    let mut grad_err: f64 = 0.0;
    for _ in 0..3 {
        let u = DeformationGrid {
            mesh,
            u: base.u.iter().map(|x| x + 0.02 * Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        };
        let (_, g) = problem.energy_and_gradient(&u).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let dir: Vec<Vec3> = (0..mesh.len())
                .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let eps = 1e-6;
            let shifted = |s: f64| DeformationGrid { mesh, u: u.u.iter().zip(&dir).map(|(x, dx)| x + s * dx).collect() };
            let fd = (problem.energy(&shifted(eps)).unwrap() - problem.energy(&shifted(-eps)).unwrap()) / (2.0 * eps);
            let an: f64 = g.iter().zip(&dir).map(|(a, b)| a.dot(b)).sum();
            grad_err = grad_err.max(rel(fd, an));
        }
    }
    ensure(grad_err <= 1e-6, || format!("gradient vs differences {grad_err:e}"))?;

    // Bending tensor: symmetric at an admissible field, zero on the rigid kernel.
    let cubic = limit_problem(&conformal("x3^3/6"), 17, 2);
    let vmin = cubic.minimize(&MinimizeOptions::default()).map_err(|e| e.to_string())?.v;
    let sym = cubic.eval(&vmin).map_err(|e| e.to_string())?.symmetry_defect;
    ensure(sym <= 1e-6, || format!("bending symmetry defect {sym:e}"))?;
    let s = skew(Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let c = Vec3::new(1.0, -2.0, 0.5);
    let rigid: Vec<Vec3> = cubic.fields.y0.iter().map(|y| s * y + c).collect();
    let p = induced_p(&cubic.fields, &rigid).map_err(|e| e.to_string())?;
    let kernel = bending_tensor(&cubic.fields, &rigid, &p).tensor.iter().map(|t| t.amax()).fold(0.0, f64::max);
    ensure(kernel <= 1e-8, || format!("rigid bending {kernel:e}"))?;

    // Projection onto symmetric gradients: orthogonal and idempotent.
    let plate = PlateData::new(&density(), &cubic.fields).map_err(|e| e.to_string())?;
    let space = StrainSpace::new(&cubic.fields, plate.clone());
    let field: Vec<Mat2> = (0..space.grid().len())
        .map(|_| {
            let o = rng.gen_range(-1.0..1.0);
            Mat2::new(rng.gen_range(-1.0..1.0), o, o, rng.gen_range(-1.0..1.0))
        })
        .collect();
    let proj = space.project(&field).map_err(|e| e.to_string())?;
    let ortho = plate.inner(&proj.space, &proj.complement).abs() / plate.norm2(&field);
    let again = space.project(&proj.space).map_err(|e| e.to_string())?;
    let diff: Vec<Mat2> = again.space.iter().zip(&proj.space).map(|(a, b)| a - b).collect();
    let idem = (plate.norm2(&diff) / plate.norm2(&proj.space)).sqrt();
    ensure(ortho <= 1e-8 && idem <= 1e-6, || format!("orthogonality {ortho:e}, idempotence {idem:e}"))?;

    // Printing then parsing gives back the same tree.
    for _ in 0..200 {
        let src = random_expression(&mut rng, 4);
        let tree = e(&src);
        let again = parse_expression(&tree.to_string()).map_err(|err| format!("{src}: {err}"))?;
        ensure(again == tree, || format!("round trip changed `{src}`"))?;
    }
    Ok(format!(
        "indifference {indiff:.0e}, gradient {grad_err:.0e}, symmetry {sym:.0e}, kernel {kernel:.0e}, projection {ortho:.0e}/{idem:.0e}"
    ))
}

struct Check {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let seconds = Duration::from_secs;
    let checks = [
        Check { id: 1, name: "classifier ladder", budget: seconds(5), run: classifier_ladder },
        Check { id: 2, name: "conformal curvature closed forms", budget: seconds(5), run: curvature_closed_forms },
        Check { id: 3, name: "normal metric identity", budget: seconds(10), run: normal_metric_identity },
        Check { id: 4, name: "coefficient tables", budget: seconds(1), run: coefficient_tables },
        Check { id: 5, name: "curvature identity on the frames", budget: seconds(10), run: curvature_identity },
        Check { id: 6, name: "frame transport fidelity", budget: seconds(10), run: frame_fidelity },
        Check { id: 7, name: "ansatz upper-bound slopes", budget: minutes(2), run: ansatz_slopes },
        Check { id: 8, name: "minimised energy scaling", budget: minutes(20), run: minimized_scaling },
        Check { id: 9, name: "recovery energy vs limit energy", budget: minutes(5), run: recovery_consistency },
        Check { id: 10, name: "identity metric reduction", budget: seconds(10), run: flat_reduction },
        Check { id: 11, name: "property battery", budget: minutes(2), run: property_battery },
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in checks.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let out = match out {
            Ok(msg) if took > c.budget => Err(format!("{msg}; took {took:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        match out {
            Ok(msg) => println!("acceptance {:>2} {:<34} pass  [{took:.1?}] {msg}", c.id, c.name),
            Err(msg) => {
                failed += 1;
                println!("acceptance {:>2} {:<34} FAIL  [{took:.1?}] {msg}", c.id, c.name);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
