//! The limit functional on first-order isometries `V` of the midplate.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{diff_transpose, MidplateGrid};
use crate::immersion::{fd_tangent, ExpansionFields};
use crate::linalg::{block2, factorial, gauss_legendre, sym2, Mat2, Mat3, Vec3};
use crate::quad_forms::{coefficients, from_sym_coords, moment, plate_form, sym_coords, CoefficientSet, DensityError, EnergyDensity, PlateForm};
use crate::tensor::CurvatureMidplateJets;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("singular frame at node {node}: det B0 = {det:e}")]
    SingularFrame { node: usize, det: f64 },
    #[error("solver diverged after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Quadrature weights and per-node plate forms.
#[derive(Debug, Clone)]
pub struct PlateData {
    pub grid: MidplateGrid,
    pub weights: Vec<f64>,
    pub forms: Vec<PlateForm>,
}

impl PlateData {
    pub fn new(d: &EnergyDensity, fields: &ExpansionFields) -> Result<PlateData, LimitError> {
        let forms = fields.metric_normal[0]
            .par_iter()
            .map(|g0| plate_form(d, g0))
            .collect::<Result<_, _>>()?;
        Ok(PlateData { grid: fields.grid, weights: fields.grid.trapezoid_weights(), forms })
    }

    /// `Σ w Q2(F, H)` over the grid.
    pub fn inner(&self, f: &[Mat2], h: &[Mat2]) -> f64 {
        (0..self.weights.len()).map(|n| self.weights[n] * self.forms[n].inner(&f[n], &h[n])).sum()
    }

    pub fn norm2(&self, f: &[Mat2]) -> f64 {
        self.inner(f, f)
    }
}

fn tangent_frame(b0: &Mat3) -> (Vec3, Vec3) {
    (b0.column(0).into_owned(), b0.column(1).into_owned())
}

/// The finite strain space `{ sym((∇y0)ᵀ∇w) }` with `w` nodal and `∇` the grid stencil.
#[derive(Debug, Clone)]
pub struct StrainSpace {
    pub plate: PlateData,
    tangents: Vec<(Vec3, Vec3)>,
    pub rel_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub w: Vec<Vec3>,
    pub space: Vec<Mat2>,
    pub complement: Vec<Mat2>,
    pub iterations: usize,
    pub residual: f64,
}

impl StrainSpace {
    pub fn new(fields: &ExpansionFields, plate: PlateData) -> StrainSpace {
        StrainSpace {
            plate,
            tangents: fields.frames[0].iter().map(tangent_frame).collect(),
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }

    pub fn grid(&self) -> &MidplateGrid {
        &self.plate.grid
    }

    /// `sym((∇y0)ᵀ∇w)` as coordinates `(S11, S22, S12)`.
    fn apply_coords(&self, w: &[Vec3]) -> Vec<Vec3> {
        fd_tangent(self.grid(), w)
            .iter()
            .zip(&self.tangents)
            .map(|(g, (y1, y2))| {
                let (d1, d2) = (g.column(0), g.column(1));
                Vec3::new(y1.dot(&d1), y2.dot(&d2), 0.5 * (y1.dot(&d2) + y2.dot(&d1)))
            })
            .collect()
    }

    pub fn apply(&self, w: &[Vec3]) -> Vec<Mat2> {
        self.apply_coords(w).iter().map(from_sym_coords).collect()
    }

    /// Euclidean adjoint of [`Self::apply_coords`].
    fn adjoint_coords(&self, u: &[Vec3]) -> Vec<Vec3> {
        let grid = self.grid();
        let mut out = vec![Vec3::zeros(); grid.len()];
        for c in 0..3 {
            let mut g1 = vec![0.0; grid.len()];
            let mut g2 = vec![0.0; grid.len()];
            for (n, (y1, y2)) in self.tangents.iter().enumerate() {
                g1[n] = u[n][0] * y1[c] + 0.5 * u[n][2] * y2[c];
                g2[n] = u[n][1] * y2[c] + 0.5 * u[n][2] * y1[c];
            }
            let a = diff_transpose(grid, &g1, 0);
            let b = diff_transpose(grid, &g2, 1);
            for n in 0..grid.len() {
                out[n][c] = a[n] + b[n];
            }
        }
        out
    }

    fn weighted(&self, v: &[Vec3]) -> Vec<Vec3> {
        v.iter()
            .enumerate()
            .map(|(n, x)| self.plate.weights[n] * (self.plate.forms[n].k * x))
            .collect()
    }

    fn normal_op(&self, w: &[Vec3]) -> Vec<Vec3> {
        self.adjoint_coords(&self.weighted(&self.apply_coords(w)))
    }

    /// Q2-orthogonal projection onto the strain space and its complement.
    pub fn project(&self, f: &[Mat2]) -> Result<Projection, LimitError> {
        let grid = *self.grid();
        if f.len() != grid.len() {
            return Err(LimitError::Invalid(format!("field has {} nodes, grid has {}", f.len(), grid.len())));
        }
        let coords: Vec<Vec3> = f.iter().map(sym_coords).collect();
        let b = self.adjoint_coords(&self.weighted(&coords));
        let dot = |a: &[Vec3], c: &[Vec3]| a.iter().zip(c).map(|(x, y)| x.dot(y)).sum::<f64>();
        let bnorm = dot(&b, &b).sqrt();
        let mut w = vec![Vec3::zeros(); grid.len()];
        let mut iterations = 0;
        let mut residual = 0.0;
        if bnorm > 0.0 {
            let mut r = b.clone();
            let mut p = r.clone();
            let mut rr = dot(&r, &r);
            loop {
                residual = rr.sqrt() / bnorm;
                if residual <= self.rel_tol {
                    break;
                }
                if iterations >= self.max_iter {
                    return Err(LimitError::SolverDiverged { iterations, residual });
                }
                let ap = self.normal_op(&p);
                let pap = dot(&p, &ap);
                if pap <= 0.0 || !pap.is_finite() {
                    return Err(LimitError::SolverDiverged { iterations, residual });
                }
                let a = rr / pap;
                for n in 0..w.len() {
                    w[n] += a * p[n];
                    r[n] -= a * ap[n];
                }
                let rr_new = dot(&r, &r);
                let beta = rr_new / rr;
                rr = rr_new;
                for n in 0..p.len() {
                    p[n] = r[n] + beta * p[n];
                }
                iterations += 1;
            }
        }
        let space = self.apply(&w);
        let complement = f.iter().zip(&space).map(|(a, s)| sym2(a) - s).collect();
        Ok(Projection { w, space, complement, iterations, residual })
    }
}

/// `strain_project` in free-function form: `(P_S F, P_S⊥ F)`.
pub fn strain_project(space: &StrainSpace, f: &[Mat2]) -> Result<(Vec<Mat2>, Vec<Mat2>), LimitError> {
    let p = space.project(f)?;
    Ok((p.space, p.complement))
}

/// Solve `B0ᵀ p = (−∂1V·b1, −∂2V·b1, 0)` at every node.
pub fn induced_p(fields: &ExpansionFields, v: &[Vec3]) -> Result<Vec<Vec3>, LimitError> {
    check_len(&fields.grid, v)?;
    let grad = fd_tangent(&fields.grid, v);
    let b1 = fields.b(1);
    fields.frames[0]
        .iter()
        .enumerate()
        .map(|(node, b0)| {
            let det = b0.determinant();
            if det <= 0.0 || !det.is_finite() {
                return Err(LimitError::SingularFrame { node, det });
            }
            let rhs = Vec3::new(-grad[node].column(0).dot(&b1[node]), -grad[node].column(1).dot(&b1[node]), 0.0);
            b0.transpose().lu().solve(&rhs).ok_or(LimitError::SingularFrame { node, det })
        })
        .collect()
}

fn check_len(grid: &MidplateGrid, v: &[Vec3]) -> Result<(), LimitError> {
    if v.len() != grid.len() {
        return Err(LimitError::Invalid(format!("displacement has {} nodes, grid has {}", v.len(), grid.len())));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BendingField {
    /// `(∇y0)ᵀ∇p + (∇V)ᵀ∇b1`, not symmetrised.
    pub tensor: Vec<Mat2>,
    /// Max `|T12 − T21|` over interior nodes.
    pub symmetry_defect: f64,
}

/// `(∇y0)ᵀ∇p + (∇V)ᵀ∇b1` with `∇b1` read off `B1`.
pub fn bending_tensor(fields: &ExpansionFields, v: &[Vec3], p: &[Vec3]) -> BendingField {
    let grid = &fields.grid;
    let gp = fd_tangent(grid, p);
    let gv = fd_tangent(grid, v);
    let tensor: Vec<Mat2> = (0..grid.len())
        .map(|n| {
            let mut y = fields.frames[0][n];
            y.set_column(2, &Vec3::zeros());
            let mut db1 = fields.frames[1][n];
            db1.set_column(2, &Vec3::zeros());
            block2(&(y.transpose() * gp[n] + gv[n].transpose() * db1))
        })
        .collect();
    let use_all = grid.nx < 5 || grid.ny < 5;
    let symmetry_defect = tensor
        .iter()
        .enumerate()
        .filter(|(n, _)| use_all || grid.is_interior(*n))
        .map(|(_, t)| (t[(0, 1)] - t[(1, 0)]).abs())
        .fold(0.0, f64::max);
    BendingField { tensor, symmetry_defect }
}

/// `max |sym((∇y0)ᵀ∇V)|` over all nodes.
pub fn constraint_defect(fields: &ExpansionFields, v: &[Vec3]) -> f64 {
    constraint_field(fields, v).iter().map(|c| c.amax()).fold(0.0, f64::max)
}

fn constraint_field(fields: &ExpansionFields, v: &[Vec3]) -> Vec<Vec3> {
    let g = fd_tangent(&fields.grid, v);
    g.iter()
        .zip(&fields.frames[0])
        .map(|(g, b0)| {
            let (y1, y2) = tangent_frame(b0);
            let (d1, d2) = (g.column(0), g.column(1));
            Vec3::new(y1.dot(&d1), y2.dot(&d2), 0.5 * (y1.dot(&d2) + y2.dot(&d1)))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LimitEnergyResult {
    pub total: f64,
    /// `(1/24)‖sym bend + α R‖²`
    pub bending: f64,
    /// `β‖P_S⊥ R‖²`
    pub complement: f64,
    /// `γ‖P_S R‖²`
    pub space: f64,
    pub curvature: Vec<Mat2>,
    pub coefficients: CoefficientSet,
    pub constraint_defect: f64,
    pub symmetry_defect: f64,
}

/// Relative size below which a curvature field is treated as exact zero.
pub const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Everything about the functional that does not depend on `V`.
#[derive(Debug, Clone)]
pub struct LimitProblem {
    pub fields: ExpansionFields,
    pub space: StrainSpace,
    pub n: usize,
    pub coefficients: CoefficientSet,
    /// `[∂3^{(n−1)} R_{i3,j3}(·, 0)]`
    pub curvature: Vec<Mat2>,
    pub projection: Projection,
}

impl LimitProblem {
    pub fn new(
        fields: &ExpansionFields,
        jets: &CurvatureMidplateJets,
        d: &EnergyDensity,
        n: usize,
    ) -> Result<LimitProblem, LimitError> {
        if n == 0 {
            return Err(LimitError::Invalid("the limit functional needs n ≥ 1".into()));
        }
        if fields.order < n {
            return Err(LimitError::Invalid(format!("expansion fields of order {} do not reach n = {n}", fields.order)));
        }
        if jets.order + 1 < n {
            return Err(LimitError::Invalid(format!("curvature jets of order {} do not reach n = {n}", jets.order)));
        }
        if jets.grid != fields.grid {
            return Err(LimitError::Invalid("curvature jets and expansion fields live on different grids".into()));
        }
        let plate = PlateData::new(d, fields)?;
        let space = StrainSpace::new(fields, plate);
        let mut curvature: Vec<Mat2> = jets.normal[n - 1].iter().map(sym2).collect();
        // Jets are exact up to roundoff; a field entirely at that level is zero.
        let floor = ROUNDOFF_FLOOR * jets.scale[n - 1];
        if curvature.iter().all(|r| r.amax() <= floor) {
            curvature.iter_mut().for_each(|r| *r = Mat2::zeros());
        }
        let projection = space.project(&curvature)?;
        Ok(LimitProblem {
            fields: fields.clone(),
            space,
            n,
            coefficients: coefficients(n),
            curvature,
            projection,
        })
    }

    pub fn plate(&self) -> &PlateData {
        &self.space.plate
    }

    fn bend_sym(&self, v: &[Vec3]) -> Result<BendingField, LimitError> {
        let p = induced_p(&self.fields, v)?;
        Ok(bending_tensor(&self.fields, v, &p))
    }

    pub fn eval(&self, v: &[Vec3]) -> Result<LimitEnergyResult, LimitError> {
        let bend = self.bend_sym(v)?;
        let c = self.coefficients;
        let shifted: Vec<Mat2> = bend
            .tensor
            .iter()
            .zip(&self.curvature)
            .map(|(b, r)| sym2(b) + c.alpha * r)
            .collect();
        let plate = self.plate();
        let bending = plate.norm2(&shifted) / 24.0;
        let complement = c.beta * plate.norm2(&self.projection.complement);
        let space = c.gamma * plate.norm2(&self.projection.space);
        Ok(LimitEnergyResult {
            total: bending + complement + space,
            bending,
            complement,
            space,
            curvature: self.curvature.clone(),
            coefficients: c,
            constraint_defect: constraint_defect(&self.fields, v),
            symmetry_defect: bend.symmetry_defect,
        })
    }

    /// The pre-decomposition integrand integrated through the thickness:
    /// `(1/2)∫∫ Q2(−δ P_S R + t sym bend + t^{n+1}/(n+1)! R) dt dx'`.
    pub fn direct_integral(&self, v: &[Vec3]) -> Result<f64, LimitError> {
        let n = self.n;
        let bend = self.bend_sym(v)?;
        let delta = moment(n + 1) / factorial(n + 1);
        let (nodes, weights) = gauss_legendre(n + 3);
        let plate = self.plate();
        let mut total = 0.0;
        for node in 0..plate.weights.len() {
            let a = -delta * self.projection.space[node];
            let b = sym2(&bend.tensor[node]);
            let r = self.curvature[node];
            let form = &plate.forms[node];
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let t = 0.5 * x;
                acc += 0.5 * w * form.q2(&(a + t * b + t.powi(n as i32 + 1) / factorial(n + 1) * r));
            }
            total += plate.weights[node] * 0.5 * acc;
        }
        Ok(total)
    }

    /// Minimise over `V` with the isometry constraint imposed by penalty.
    pub fn minimize(&self, opts: &MinimizeOptions) -> Result<LimitMinimum, LimitError> {
        let grid = self.fields.grid;
        let nn = grid.len();
        let dim = 3 * nn;
        let weights = &self.plate().weights;
        let forms = &self.plate().forms;
        let zero = vec![Vec3::zeros(); nn];

        // Column probes of the linear maps V -> bend coords and V -> constraint coords.
        let columns: Vec<(Vec<(usize, Vec3)>, Vec<(usize, Vec3)>)> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut e = zero.clone();
                e[j / 3][j % 3] = 1.0;
                let bend = self.bend_sym(&e)?;
                let bend: Vec<(usize, Vec3)> = bend
                    .tensor
                    .iter()
                    .enumerate()
                    .map(|(n, t)| (n, sym_coords(t)))
                    .filter(|(_, c)| c.amax() != 0.0)
                    .collect();
                let cons: Vec<(usize, Vec3)> = constraint_field(&self.fields, &e)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| c.amax() != 0.0)
                    .collect();
                Ok((bend, cons))
            })
            .collect::<Result<_, LimitError>>()?;
        let mut bend_rows: Vec<Vec<(usize, Vec3)>> = vec![Vec::new(); nn];
        let mut cons_rows: Vec<Vec<(usize, Vec3)>> = vec![Vec::new(); nn];
        for (j, (bend, cons)) in columns.into_iter().enumerate() {
            for (n, c) in bend {
                bend_rows[n].push((j, c));
            }
            for (n, c) in cons {
                cons_rows[n].push((j, c));
            }
        }

        let penalty = 1.0 / opts.epsilon;
        let frob = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 2.0));
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let mut g = DVector::<f64>::zeros(dim);
        let alpha = self.coefficients.alpha;
        for n in 0..nn {
            let kb = forms[n].k * (weights[n] / 12.0);
            let rc = sym_coords(&self.curvature[n]) * alpha;
            for (c1, v1) in &bend_rows[n] {
                let kv = kb * v1;
                g[*c1] += kv.dot(&rc);
                for (c2, v2) in &bend_rows[n] {
                    h[(*c1, *c2)] += kv.dot(v2);
                }
            }
            let kc = frob * (2.0 * penalty * weights[n]);
            for (c1, v1) in &cons_rows[n] {
                let kv = kc * v1;
                for (c2, v2) in &cons_rows[n] {
                    h[(*c1, *c2)] += kv.dot(v2);
                }
            }
        }
        // Rigid gauge: mean displacement and mean rotation vanish.
        let area: f64 = weights.iter().sum();
        let centroid = self.fields.y0.iter().zip(weights).map(|(y, w)| *w * y).sum::<Vec3>() / area;
        let scale = (0..dim).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1.0);
        let gauge_weight = scale / area;
        for axis in 0..6 {
            let mut a = DVector::<f64>::zeros(dim);
            for n in 0..nn {
                let row: Vec3 = if axis < 3 {
                    Vec3::from_fn(|c, _| if c == axis { 1.0 } else { 0.0 })
                } else {
                    // component of (y0 - centroid) × V along e_{axis-3}, as a linear form in V
                    let d = self.fields.y0[n] - centroid;
                    let e = Vec3::from_fn(|c, _| if c == axis - 3 { 1.0 } else { 0.0 });
                    e.cross(&d)
                };
                for c in 0..3 {
                    a[3 * n + c] = weights[n] * row[c];
                }
            }
            h.ger(gauge_weight, &a, &a, 1.0);
        }
        for i in 0..dim {
            h[(i, i)] += opts.tikhonov * scale;
        }
        let chol = h.clone().cholesky().ok_or(LimitError::SolverDiverged { iterations: 0, residual: f64::INFINITY })?;
        let rhs = -&g;
        let mut x = chol.solve(&rhs);
        let rnorm = rhs.norm().max(f64::MIN_POSITIVE);
        let mut residual = (&rhs - &h * &x).norm() / rnorm;
        for _ in 0..opts.refinement_steps {
            let r = &rhs - &h * &x;
            x += chol.solve(&r);
            residual = (&rhs - &h * &x).norm() / rnorm;
        }
        if !residual.is_finite() || residual > 1e-6 {
            return Err(LimitError::SolverDiverged { iterations: opts.refinement_steps, residual });
        }
        let v: Vec<Vec3> = (0..nn).map(|n| Vec3::new(x[3 * n], x[3 * n + 1], x[3 * n + 2])).collect();
        let value = self.eval(&v)?;
        Ok(LimitMinimum { value, v, residual })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub epsilon: f64,
    pub tikhonov: f64,
    pub refinement_steps: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { epsilon: 1e-8, tikhonov: 1e-14, refinement_steps: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct LimitMinimum {
    pub value: LimitEnergyResult,
    pub v: Vec<Vec3>,
    pub residual: f64,
}

pub fn limit_energy_eval(
    fields: &ExpansionFields,
    jets: &CurvatureMidplateJets,
    d: &EnergyDensity,
    n: usize,
    v: &[Vec3],
) -> Result<LimitEnergyResult, LimitError> {
    LimitProblem::new(fields, jets, d, n)?.eval(v)
}

pub fn minimize_limit_energy(
    fields: &ExpansionFields,
    jets: &CurvatureMidplateJets,
    d: &EnergyDensity,
    n: usize,
) -> Result<LimitMinimum, LimitError> {
    LimitProblem::new(fields, jets, d, n)?.minimize(&MinimizeOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::grid::Rect;
    use crate::immersion::{expansion_fields, frame_transport, FrameOptions};
    use crate::linalg::skew;
    use crate::metric::MetricField;
    use crate::tensor::curvature_midplate_jets;

    fn setup(m: &MetricField, nx: usize, n: usize) -> (ExpansionFields, CurvatureMidplateJets) {
        let grid = MidplateGrid::unit(nx);
        let frames = frame_transport(m, &grid, &FrameOptions::default()).unwrap();
        let fields = expansion_fields(m, &frames, n).unwrap();
        let jets = curvature_midplate_jets(m, &grid, n).unwrap();
        (fields, jets)
    }

    fn conformal(src: &str) -> MetricField {
        MetricField::conformal(parse_expression(src).unwrap(), Rect::UNIT).unwrap()
    }

    fn d() -> EnergyDensity {
        EnergyDensity::new(1.0, 0.0)
    }

    #[test]
    fn flat_plate_reduces_to_hessian_energy() {
        let (fields, jets) = setup(&MetricField::identity(Rect::UNIT), 33, 1);
        let v: Vec<Vec3> = fields.grid.coords().iter().map(|x| Vec3::new(0.0, 0.0, x[0] * x[0])).collect();
        let p = induced_p(&fields, &v).unwrap();
        let mid = fields.grid.index(16, 16);
        assert!((p[mid] - Vec3::new(-2.0 * 0.5, 0.0, 0.0)).norm() < 1e-10);
        let r = limit_energy_eval(&fields, &jets, &d(), 1, &v).unwrap();
        assert!((r.total - 1.0 / 3.0).abs() < 1e-8, "{}", r.total);
        assert_eq!(r.complement, 0.0);
    }

    #[test]
    fn rigid_fields_have_no_bending() {
        let (fields, jets) = setup(&conformal("x3^3/6"), 17, 2);
        let prob = LimitProblem::new(&fields, &jets, &d(), 2).unwrap();
        let s = skew(Vec3::new(0.3, -0.2, 0.7));
        let v: Vec<Vec3> = fields.y0.iter().map(|y| s * y + Vec3::new(1.0, 2.0, 3.0)).collect();
        let p = induced_p(&fields, &v).unwrap();
        for (pn, b1) in p.iter().zip(fields.b(1)) {
            assert!((pn - s * b1).norm() < 1e-9);
        }
        let bend = bending_tensor(&fields, &v, &p);
        assert!(bend.tensor.iter().all(|t| t.amax() < 1e-8));
        let at_zero = prob.eval(&vec![Vec3::zeros(); fields.grid.len()]).unwrap();
        let rigid = prob.eval(&v).unwrap();
        assert!((at_zero.total - rigid.total).abs() < 1e-12);
    }

    #[test]
    fn conformal_cubic_values_and_second_route() {
        let (fields, jets) = setup(&conformal("x3^3/6"), 17, 2);
        let prob = LimitProblem::new(&fields, &jets, &d(), 2).unwrap();
        let zero = vec![Vec3::zeros(); fields.grid.len()];
        let r = prob.eval(&zero).unwrap();
        assert!((r.total - 1.0 / 8064.0).abs() < 1e-9 * 8064.0 / 8064.0, "{}", r.total);
        // −Id is a symmetric gradient, so nothing lands in the complement.
        assert!(r.complement.abs() < 1e-12);
        let direct = prob.direct_integral(&zero).unwrap();
        assert!((direct - r.total).abs() < 1e-12, "{direct} vs {}", r.total);
    }

    #[test]
    fn projection_is_orthogonal_and_idempotent() {
        let e = |s: &str| parse_expression(s).unwrap();
        let jac = [
            [e("1"), e("0.4*x2"), e("0")],
            [e("0.2*x1"), e("1"), e("0")],
            [e("0"), e("0"), e("1")],
        ];
        let (fields, jets) = setup(&MetricField::pullback(&jac, Rect::UNIT), 17, 1);
        let prob = LimitProblem::new(&fields, &jets, &d(), 1).unwrap();
        let f: Vec<Mat2> = fields
            .grid
            .coords()
            .iter()
            .map(|x| Mat2::new(x[0] * x[1], x[1].sin(), x[1].sin(), 1.0 + x[0].powi(3)))
            .collect();
        let pr = prob.space.project(&f).unwrap();
        let plate = prob.plate();
        let cross = plate.inner(&pr.space, &pr.complement);
        let total = plate.norm2(&f);
        assert!(cross.abs() < 1e-8 * total);
        let again = prob.space.project(&pr.space).unwrap();
        let diff: Vec<Mat2> = again.space.iter().zip(&pr.space).map(|(a, b)| a - b).collect();
        assert!(plate.norm2(&diff) < 1e-12 * total);
    }

    #[test]
    fn minimiser_recovers_radial_profile() {
        let (fields, jets) = setup(&conformal("x3^3/6"), 17, 2);
        let m = minimize_limit_energy(&fields, &jets, &d(), 2).unwrap();
        assert!((m.value.total - 1.0 / 50400.0).abs() < 0.02 / 50400.0, "{}", m.value.total);
        assert!(m.value.constraint_defect < 1e-4);
    }

    #[test]
    fn projection_settles_under_refinement() {
        let e = |s: &str| parse_expression(s).unwrap();
        let jac = [
            [e("1"), e("0.4*x2"), e("0")],
            [e("0.2*x1"), e("1"), e("0")],
            [e("0"), e("0"), e("1")],
        ];
        let m = MetricField::pullback(&jac, Rect::UNIT);
        let c: Vec<f64> = [9, 17, 33, 65]
            .iter()
            .map(|&nx| {
                let (fields, jets) = setup(&m, nx, 1);
                let prob = LimitProblem::new(&fields, &jets, &d(), 1).unwrap();
                let f: Vec<Mat2> = fields
                    .grid
                    .coords()
                    .iter()
                    .map(|x| Mat2::new(x[0] * x[1], x[1].sin(), x[1].sin(), 1.0 + x[0].powi(3)))
                    .collect();
                prob.plate().norm2(&prob.space.project(&f).unwrap().complement)
            })
            .collect();
        let steps: Vec<f64> = c.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(steps[1] < steps[0] && steps[2] < steps[1], "{c:?}");
    }
}
