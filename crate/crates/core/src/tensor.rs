//! Christoffel matrices, covariant derivatives and Riemann curvature, all
//! carried as exact jets.

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Jet, JetShape};
use crate::grid::MidplateGrid;
use crate::linalg::{binomial, Mat2, Mat3};
use crate::metric::{MetricError, MetricField};

/// Entrywise jets of a 3×3 matrix field.
pub type MatJet = [[Jet; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("insufficient jet order: {0}")]
    InsufficientJetOrder(String),
}

pub fn mat_value(m: &MatJet) -> Mat3 {
    Mat3::from_fn(|a, b| m[a][b].value())
}

/// Raw derivative `∂^k` of every entry.
pub fn mat_derivative(m: &MatJet, k: [u32; 3]) -> Mat3 {
    Mat3::from_fn(|a, b| m[a][b].derivative(k))
}

pub fn mat_mul(x: &MatJet, y: &MatJet) -> MatJet {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let t0 = &x[a][0] * &y[0][b];
            let t1 = &x[a][1] * &y[1][b];
            let t2 = &x[a][2] * &y[2][b];
            &(&t0 + &t1) + &t2
        })
    })
}

pub fn mat_add(x: &MatJet, y: &MatJet) -> MatJet {
    std::array::from_fn(|a| std::array::from_fn(|b| &x[a][b] + &y[a][b]))
}

pub fn mat_sub(x: &MatJet, y: &MatJet) -> MatJet {
    std::array::from_fn(|a| std::array::from_fn(|b| &x[a][b] - &y[a][b]))
}

pub fn mat_transpose(x: &MatJet) -> MatJet {
    std::array::from_fn(|a| std::array::from_fn(|b| x[b][a].clone()))
}

pub fn mat_shape(x: &MatJet) -> JetShape {
    x[0][0].shape()
}

pub fn mat_restrict(x: &MatJet, shape: JetShape) -> MatJet {
    std::array::from_fn(|a| std::array::from_fn(|b| x[a][b].restrict(shape)))
}

/// Entrywise `∂_axis`.
pub fn mat_partial(x: &MatJet, axis: usize) -> Result<MatJet, TensorError> {
    let shape = mat_shape(x);
    if shape.after_partial(axis).is_none() {
        return Err(TensorError::InsufficientJetOrder(format!(
            "cannot differentiate along x{} a jet of shape {:?}",
            axis + 1,
            shape
        )));
    }
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| x[a][b].partial(axis).expect("shape checked"))
    }))
}

/// Inverse of a symmetric matrix of jets via the adjugate.
pub fn mat_inverse(g: &MatJet) -> Result<MatJet, TensorError> {
    let cof = |a: usize, b: usize| {
        let (r0, r1) = ((a + 1) % 3, (a + 2) % 3);
        let (c0, c1) = ((b + 1) % 3, (b + 2) % 3);
        &(&g[r0][c0] * &g[r1][c1]) - &(&g[r0][c1] * &g[r1][c0])
    };
    let c: [[Jet; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| cof(a, b)));
    let det = &(&(&g[0][0] * &c[0][0]) + &(&g[0][1] * &c[0][1])) + &(&g[0][2] * &c[0][2]);
    let inv_det = det.recip().map_err(|_| {
        TensorError::Metric(MetricError::NotPositiveDefinite { point: det.point(), min_eigenvalue: 0.0 })
    })?;
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| &c[b][a] * &inv_det)))
}

/// Christoffel matrices `(Γ_a)_{bc} = Γ^b_{ac}` from metric jets.
///
/// The result loses one order in every direction: a metric jet of shape
/// `(T, P)` yields Christoffel jets of shape `(T-1, P-1)`.
pub fn christoffel_from_jets(g: &MatJet) -> Result<[MatJet; 3], TensorError> {
    let ginv = mat_inverse(g)?;
    let dg = [mat_partial(g, 0)?, mat_partial(g, 1)?, mat_partial(g, 2)?];
    let shape = mat_shape(&dg[0]);
    let ginv = mat_restrict(&ginv, shape);
    let point = g[0][0].point();
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                let mut acc = Jet::zero(point, shape);
                for m in 0..3 {
                    let bracket = &(&dg[a][m][c] + &dg[c][m][a]) - &dg[m][a][c];
                    acc = &acc + &(&ginv[b][m] * &bracket);
                }
                acc.scale(0.5)
            })
        })
    }))
}

/// `∇_a F = ∂_a F + Γ_a F`, on the common jet shape.
pub fn covariant_derivative(gamma_a: &MatJet, f: &MatJet, axis: usize) -> Result<MatJet, TensorError> {
    let df = mat_partial(f, axis)?;
    let prod = mat_mul(gamma_a, f);
    Ok(mat_add(&df, &prod))
}

/// Christoffel matrices at a point with jets of total order `order`.
#[derive(Debug, Clone)]
pub struct ChristoffelTriple {
    pub gamma: [MatJet; 3],
}

impl ChristoffelTriple {
    pub fn values(&self) -> [Mat3; 3] {
        [mat_value(&self.gamma[0]), mat_value(&self.gamma[1]), mat_value(&self.gamma[2])]
    }

    /// Largest `|Γ_a e_b − Γ_b e_a|` over all pairs.
    pub fn torsion_defect(&self) -> f64 {
        let v = self.values();
        let mut d: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for r in 0..3 {
                    d = d.max((v[a][(r, b)] - v[b][(r, a)]).abs());
                }
            }
        }
        d
    }
}

pub fn christoffel(m: &MetricField, point: [f64; 3], order: u32) -> Result<ChristoffelTriple, TensorError> {
    let g = m.jet(point, order + 1)?;
    Ok(ChristoffelTriple { gamma: christoffel_from_jets(&g)? })
}

/// Curvature matrices `R_{cd} = [R^a_{b,cd}]_{ab}` for `(c, d) = (0,1), (0,2), (1,2)`.
pub fn curvature_matrices(gamma: &[MatJet; 3]) -> Result<[MatJet; 3], TensorError> {
    let dgamma: Vec<[MatJet; 3]> = gamma
        .iter()
        .map(|gm| Ok([mat_partial(gm, 0)?, mat_partial(gm, 1)?, mat_partial(gm, 2)?]))
        .collect::<Result<_, TensorError>>()?;
    let pair = |c: usize, d: usize| {
        let lin = mat_sub(&dgamma[d][c], &dgamma[c][d]);
        let quad = mat_sub(&mat_mul(&gamma[c], &gamma[d]), &mat_mul(&gamma[d], &gamma[c]));
        mat_add(&lin, &quad)
    };
    Ok([pair(0, 1), pair(0, 2), pair(1, 2)])
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn pair_slot(c: usize, d: usize) -> Option<(usize, f64)> {
    if c == d {
        return None;
    }
    let (lo, hi, sign) = if c < d { (c, d, 1.0) } else { (d, c, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|i| (i, sign))
}

/// Full Riemann tensor at one point in both index positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannAtPoint {
    /// `mixed[a][b][c][d] = R^a_{b,cd}`
    pub mixed: [[[[f64; 3]; 3]; 3]; 3],
    /// `lowered[a][b][c][d] = R_{ab,cd}`
    pub lowered: [[[[f64; 3]; 3]; 3]; 3],
}

impl RiemannAtPoint {
    pub fn scale(&self) -> f64 {
        self.lowered.iter().flatten().flatten().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Largest violation of the three algebraic symmetries of `R_{ab,cd}`.
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.lowered;
        let mut d: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for e in 0..3 {
                        d = d.max((r[a][b][c][e] + r[a][b][e][c]).abs());
                        d = d.max((r[a][b][c][e] + r[b][a][c][e]).abs());
                        d = d.max((r[a][b][c][e] - r[c][e][a][b]).abs());
                    }
                }
            }
        }
        d
    }
}

fn lowered_matrices(g: &MatJet, mixed: &[MatJet; 3]) -> [MatJet; 3] {
    let shape = mat_shape(&mixed[0]);
    let g = mat_restrict(g, shape);
    [mat_mul(&g, &mixed[0]), mat_mul(&g, &mixed[1]), mat_mul(&g, &mixed[2])]
}

pub fn riemann(m: &MetricField, point: [f64; 3]) -> Result<RiemannAtPoint, TensorError> {
    let g = m.jet(point, 2)?;
    let gamma = christoffel_from_jets(&g)?;
    let mixed = curvature_matrices(&gamma)?;
    let lowered = lowered_matrices(&g, &mixed);
    let unpack = |mats: &[MatJet; 3]| {
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for (a, plane) in out.iter_mut().enumerate() {
            for (b, row) in plane.iter_mut().enumerate() {
                for (c, col) in row.iter_mut().enumerate() {
                    for (d, v) in col.iter_mut().enumerate() {
                        if let Some((i, sign)) = pair_slot(c, d) {
                            *v = sign * mats[i][a][b].value();
                        }
                    }
                }
            }
        }
        out
    };
    Ok(RiemannAtPoint { mixed: unpack(&mixed), lowered: unpack(&lowered) })
}

/// Normal jets of the curvature on the midplate.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMidplateJets {
    pub grid: MidplateGrid,
    pub order: usize,
    /// `normal[k][node]` is the 2×2 block `[∂3^k R_{i3,j3}(x', 0)]`.
    pub normal: Vec<Vec<Mat2>>,
    /// `(R_{12,12}, R_{12,13}, R_{12,23})(x', 0)` per node.
    pub base: Vec<[f64; 3]>,
    /// Per order `k`, the natural size of curvature values built from the
    /// metric data they depend on: `M (1 + M |G⁻¹|)²` with `M` the largest
    /// metric derivative of total order `≤ k + 2`, maximised over the grid.
    /// Scales like the curvature under `G → cG`.
    pub scale: Vec<f64>,
}

impl CurvatureMidplateJets {
    /// Largest entry of `∂3^k R_{i3,j3}` over the grid.
    pub fn normal_scale(&self, k: usize) -> f64 {
        self.normal[k].iter().flat_map(|m| m.iter()).fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn base_scale(&self) -> f64 {
        self.base.iter().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Curvature data at one midplate point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCurvature {
    pub base: [f64; 3],
    pub normal: Vec<Mat2>,
    pub scale: Vec<f64>,
}

fn reference_scales(g: &MatJet, order: usize) -> Vec<f64> {
    let ginv = mat_value(g).try_inverse().map_or(f64::INFINITY, |m| crate::linalg::max_abs(&m));
    (0..=order)
        .map(|k| {
            let mut big: f64 = 0.0;
            for row in g {
                for e in row {
                    for idx in e.indices() {
                        if (idx[0] + idx[1] + idx[2]) as usize <= k + 2 {
                            big = big.max(e.derivative(*idx).abs());
                        }
                    }
                }
            }
            big * (1.0 + big * ginv).powi(2)
        })
        .collect()
}

/// Base triple, normal blocks `k = 0..=order` and reference scales at one midplate point.
pub fn curvature_normal_jets(m: &MetricField, x: [f64; 2], order: usize) -> Result<PointCurvature, TensorError> {
    let point = [x[0], x[1], 0.0];
    let g = m.jet_shaped(point, JetShape::new(order as u32 + 2, 2))?;
    let scale = reference_scales(&g, order);
    let gamma = christoffel_from_jets(&g)?;
    let mixed = curvature_matrices(&gamma)?;
    let low = lowered_matrices(&g, &mixed);
    // R_{ab,cd} = low[pair(c,d)][a][b]
    let base = [low[0][0][1].value(), low[1][0][1].value(), low[2][0][1].value()];
    let comp = |i: usize, j: usize, k: u32| {
        // R_{i3,j3} = lowered[i][2][j][2], stored under pair (j, 2).
        low[j + 1][i][2].derivative([0, 0, k])
    };
    let normal = (0..=order as u32)
        .map(|k| Mat2::from_fn(|i, j| comp(i, j, k)))
        .collect();
    Ok(PointCurvature { base, normal, scale })
}

pub fn curvature_midplate_jets(m: &MetricField, grid: &MidplateGrid, order: usize) -> Result<CurvatureMidplateJets, TensorError> {
    let per_node: Vec<PointCurvature> = grid
        .coords()
        .into_par_iter()
        .map(|x| curvature_normal_jets(m, x, order))
        .collect::<Result<_, _>>()?;
    let mut normal = vec![Vec::with_capacity(grid.len()); order + 1];
    let mut base = Vec::with_capacity(grid.len());
    let mut scale = vec![0.0f64; order + 1];
    for pc in per_node {
        base.push(pc.base);
        for (k, blk) in pc.normal.into_iter().enumerate() {
            normal[k].push(blk);
        }
        for (s, v) in scale.iter_mut().zip(pc.scale) {
            *s = s.max(v);
        }
    }
    Ok(CurvatureMidplateJets { grid: *grid, order, normal, base, scale })
}

/// Values at `(x', 0)` of `∂3^m G` for `m = 0..=count` and of the iterated
/// covariant derivatives `∇3^{(k)} Γ3` for `k = 0..count`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSeries {
    pub metric: Vec<Mat3>,
    pub gamma3: Vec<Mat3>,
}

pub fn normal_series(m: &MetricField, point: [f64; 3], count: usize) -> Result<NormalSeries, TensorError> {
    let g = m.jet_shaped(point, JetShape::new(count as u32 + 1, 1))?;
    let metric = (0..=count as u32).map(|k| mat_derivative(&g, [0, 0, k])).collect();
    let gamma = christoffel_from_jets(&g)?;
    let mut cur = gamma[2].clone();
    let mut gamma3 = Vec::with_capacity(count);
    for k in 0..count {
        gamma3.push(mat_value(&cur));
        if k + 1 < count {
            let shape = mat_shape(&cur);
            let g3 = mat_restrict(&gamma[2], shape);
            cur = covariant_derivative(&g3, &cur, 2)?;
        }
    }
    Ok(NormalSeries { metric, gamma3 })
}

/// Max-norm of `∂3^{n+1}G − 2(G ∇3^{(n)}Γ3)_sym − Σ_{k=1}^n C(n+1,k) (∇3^{(k−1)}Γ3)ᵀ G ∇3^{(n−k)}Γ3`
/// together with the magnitude of the largest term, for scale-aware comparison.
pub fn normal_metric_identity_residual(m: &MetricField, point: [f64; 3], n: usize) -> Result<(f64, f64), TensorError> {
    let s = normal_series(m, point, n + 1)?;
    let g = s.metric[0];
    let a = &s.gamma3;
    let lead = g * a[n];
    let mut rhs = lead + lead.transpose();
    for k in 1..=n {
        rhs += binomial(n + 1, k) * a[k - 1].transpose() * g * a[n - k];
    }
    let lhs = s.metric[n + 1];
    let scale = crate::linalg::max_abs(&lhs).max(crate::linalg::max_abs(&rhs)).max(1.0);
    Ok((crate::linalg::max_abs(&(lhs - rhs)), scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::grid::Rect;

    fn conformal(src: &str) -> MetricField {
        MetricField::conformal(parse_expression(src).unwrap(), Rect::UNIT).unwrap()
    }

    #[test]
    fn flat_identity() {
        let m = MetricField::identity(Rect::UNIT);
        let c = christoffel(&m, [0.1, 0.2, 0.0], 2).unwrap();
        assert!(c.values().iter().all(|g| g.norm() == 0.0));
        assert_eq!(riemann(&m, [0.0; 3]).unwrap().scale(), 0.0);
    }

    #[test]
    fn conformal_gamma3() {
        // φ = sin(x3) + x3^2: φ' = cos x3 + 2 x3
        let m = conformal("sin(x3) + x3^2");
        let x3: f64 = 0.3;
        let c = christoffel(&m, [0.4, 0.5, x3], 1).unwrap();
        let v = c.values();
        let dphi = x3.cos() + 2.0 * x3;
        assert!((v[2] - dphi * Mat3::identity()).norm() < 1e-13);
        assert!(c.torsion_defect() < 1e-13);
    }

    #[test]
    fn warped_product() {
        let z = crate::expr::Expr::Const(0.0);
        let one = crate::expr::Expr::Const(1.0);
        let m = MetricField::general(
            [one.clone(), z.clone(), z.clone(), one, z, parse_expression("(1 + x3)^2").unwrap()],
            Rect::UNIT,
        );
        let v = christoffel(&m, [0.0; 3], 1).unwrap().values();
        let mut expected = Mat3::zeros();
        expected[(2, 2)] = 1.0;
        assert!((v[2] - expected).norm() < 1e-14);
    }

    #[test]
    fn conformal_curvature_components() {
        let m = conformal("x3^2/2");
        let r = riemann(&m, [0.0; 3]).unwrap();
        assert!((r.lowered[0][2][0][2] + 1.0).abs() < 1e-13);
        assert!((r.lowered[1][2][1][2] + 1.0).abs() < 1e-13);
        assert!(r.lowered[0][1][0][1].abs() < 1e-13);
        assert!(r.symmetry_defect() < 1e-13);
    }

    #[test]
    fn midplate_jets_for_cubic_profile() {
        let m = conformal("x3^3/6");
        let grid = MidplateGrid::unit(3);
        let j = curvature_midplate_jets(&m, &grid, 3).unwrap();
        for node in 0..grid.len() {
            assert!(j.normal[0][node].norm() < 1e-14);
            assert!((j.normal[1][node] + Mat2::identity()).norm() < 1e-13);
            assert!(j.base[node].iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn iterated_normal_derivative_of_gamma3() {
        let m = conformal("x3^3/6");
        let s = normal_series(&m, [0.2, 0.3, 0.0], 3).unwrap();
        assert!(s.gamma3[0].norm() < 1e-14);
        assert!(s.gamma3[1].norm() < 1e-14);
        assert!((s.gamma3[2] - Mat3::identity()).norm() < 1e-13);
    }

    #[test]
    fn normal_identity_on_conformal() {
        let m = conformal("x3 + x3^2/3 - x3^3");
        for n in 0..5 {
            let (res, scale) = normal_metric_identity_residual(&m, [0.0, 0.0, 0.0], n).unwrap();
            assert!(res <= 1e-11 * scale, "n={n}: {res}");
        }
    }

    #[test]
    fn shallow_jets_are_reported() {
        let m = conformal("x3^2");
        let g = m.jet_shaped([0.0; 3], JetShape::new(2, 0)).unwrap();
        assert!(matches!(christoffel_from_jets(&g), Err(TensorError::InsufficientJetOrder(_))));
    }
}
