//! The 3D prestrained energy on hexahedral meshes of the thin film, its
//! minimisation, and thickness sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::MidplateGrid;
use crate::immersion::{expansion_fields, fd_tangent, frame_transport, ExpansionFields, FrameOptions, ImmersionError};
use crate::lbfgs::{self, LbfgsOptions, Termination};
use crate::limit_energy::{induced_p, bending_tensor, LimitError, LimitProblem};
use crate::linalg::{binomial, block2, factorial, gauss_legendre, sym, sym2, Mat3, Vec3};
use crate::metric::{MetricError, MetricField};
use crate::quad_forms::{DensityError, EnergyDensity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElasticError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error("line search failed after {iterations} iterations (energy {energy:e})")]
    LineSearchFailed { iterations: usize, energy: f64, last: Box<DeformationGrid> },
    #[error("no convergence within {iterations} iterations (energy {energy:e})")]
    MaxIterations { iterations: usize, energy: f64, last: Box<DeformationGrid> },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Tensor-product mesh of `ω × [−h/2, h/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh3 {
    pub grid: MidplateGrid,
    pub nz: usize,
    pub h: f64,
}

impl Mesh3 {
    pub fn new(grid: MidplateGrid, nz: usize, h: f64) -> Result<Mesh3, ElasticError> {
        if nz < 2 || grid.nx < 2 || grid.ny < 2 {
            return Err(ElasticError::Invalid(format!("mesh {}x{}x{nz} needs at least 2 nodes per axis", grid.nx, grid.ny)));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(ElasticError::Invalid(format!("thickness must be positive, got {h}")));
        }
        Ok(Mesh3 { grid, nz, h })
    }

    pub fn len(&self) -> usize {
        self.grid.len() * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.grid.ny + j) * self.grid.nx + i
    }

    pub fn x3(&self, k: usize) -> f64 {
        -0.5 * self.h + self.h * k as f64 / (self.nz - 1) as f64
    }

    pub fn spacing(&self) -> [f64; 3] {
        let [dx, dy] = self.grid.spacing();
        [dx, dy, self.h / (self.nz - 1) as f64]
    }

    pub fn num_elements(&self) -> usize {
        (self.grid.nx - 1) * (self.grid.ny - 1) * (self.nz - 1)
    }

    fn element(&self, e: usize) -> [usize; 3] {
        let ex = self.grid.nx - 1;
        let ey = self.grid.ny - 1;
        [e % ex, (e / ex) % ey, e / (ex * ey)]
    }

    fn element_nodes(&self, e: usize) -> [usize; 8] {
        let [i, j, k] = self.element(e);
        std::array::from_fn(|a| self.index(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1)))
    }

    /// Refine through the thickness only.
    pub fn refined_z(&self) -> Mesh3 {
        Mesh3 { nz: 2 * self.nz - 1, ..*self }
    }
}

/// Nodal deformation on a [`Mesh3`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationGrid {
    pub mesh: Mesh3,
    pub u: Vec<Vec3>,
}

impl DeformationGrid {
    /// Sample `f(x1, x2, x3)` at every node.
    pub fn from_fn(mesh: Mesh3, f: impl Fn(usize, f64) -> Vec3) -> DeformationGrid {
        let mut u = Vec::with_capacity(mesh.len());
        for k in 0..mesh.nz {
            let x3 = mesh.x3(k);
            for node in 0..mesh.grid.len() {
                u.push(f(node, x3));
            }
        }
        DeformationGrid { mesh, u }
    }

    pub fn identity(mesh: Mesh3) -> DeformationGrid {
        let coords = mesh.grid.coords();
        DeformationGrid::from_fn(mesh, |n, x3| Vec3::new(coords[n][0], coords[n][1], x3))
    }

    pub fn map(&self, f: impl Fn(&Vec3) -> Vec3) -> DeformationGrid {
        DeformationGrid { mesh: self.mesh, u: self.u.iter().map(f).collect() }
    }
}

/// Tensor-product Gauss rule on the reference cube `[-1, 1]³`.
fn gauss_rule(order: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order.pow(3));
    for k in 0..order {
        for j in 0..order {
            for i in 0..order {
                out.push(([x[i], x[j], x[k]], w[i] * w[j] * w[k]));
            }
        }
    }
    out
}

/// Trilinear shape-function gradients at a reference point, physical units.
fn shape_gradients(xi: [f64; 3], spacing: [f64; 3]) -> [Vec3; 8] {
    std::array::from_fn(|a| {
        let s: [f64; 3] = std::array::from_fn(|ax| if (a >> ax) & 1 == 1 { 1.0 } else { -1.0 });
        Vec3::from_fn(|ax, _| {
            let mut v = s[ax] / spacing[ax];
            for other in 0..3 {
                if other != ax {
                    v *= 0.5 * (1.0 + s[other] * xi[other]);
                }
            }
            v
        })
    })
}

pub const DEFAULT_GAUSS_ORDER: usize = 2;

/// Mesh, density and `G^{-1/2}` at every Gauss point, reusable across evaluations.
#[derive(Debug, Clone)]
pub struct ElasticProblem {
    pub mesh: Mesh3,
    pub density: EnergyDensity,
    pub gauss_order: usize,
    /// `G^{-1/2}` per element, per Gauss point.
    inv_sqrt: Vec<Vec<Mat3>>,
    grads: Vec<[Vec3; 8]>,
    /// Quadrature weight including the element volume and the `1/h` factor.
    weights: Vec<f64>,
}

impl ElasticProblem {
    pub fn new(mesh: Mesh3, m: &MetricField, d: &EnergyDensity) -> Result<ElasticProblem, ElasticError> {
        ElasticProblem::with_gauss_order(mesh, m, d, DEFAULT_GAUSS_ORDER)
    }

    pub fn with_gauss_order(
        mesh: Mesh3,
        m: &MetricField,
        d: &EnergyDensity,
        order: usize,
    ) -> Result<ElasticProblem, ElasticError> {
        if order == 0 {
            return Err(ElasticError::Invalid("Gauss order must be positive".into()));
        }
        let sp = mesh.spacing();
        let rule = gauss_rule(order);
        let [x0, y0] = [mesh.grid.bounds.x1[0], mesh.grid.bounds.x2[0]];
        let inv_sqrt = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let [i, j, k] = mesh.element(e);
                let c = [x0 + (i as f64 + 0.5) * sp[0], y0 + (j as f64 + 0.5) * sp[1], mesh.x3(k) + 0.5 * sp[2]];
                rule.iter()
                    .map(|(xi, _)| m.inverse_sqrt(std::array::from_fn(|ax| c[ax] + 0.5 * xi[ax] * sp[ax])))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, MetricError>>()?;
        let volume = sp[0] * sp[1] * sp[2] / 8.0 / mesh.h;
        Ok(ElasticProblem {
            mesh,
            density: *d,
            gauss_order: order,
            inv_sqrt,
            grads: rule.iter().map(|(xi, _)| shape_gradients(*xi, sp)).collect(),
            weights: rule.iter().map(|(_, w)| w * volume).collect(),
        })
    }

    fn check(&self, u: &DeformationGrid) -> Result<(), ElasticError> {
        if u.mesh != self.mesh || u.u.len() != self.mesh.len() {
            return Err(ElasticError::Invalid("deformation lives on a different mesh".into()));
        }
        Ok(())
    }

    fn deformation_gradient(&self, u: &[Vec3], nodes: &[usize; 8], g: usize) -> Mat3 {
        let mut du = Mat3::zeros();
        for (a, &n) in nodes.iter().enumerate() {
            du += u[n] * self.grads[g][a].transpose();
        }
        du
    }

    /// `(1/h) ∫ W(∇u G^{-1/2})`.
    pub fn energy(&self, u: &DeformationGrid) -> Result<f64, ElasticError> {
        self.check(u)?;
        let per: Vec<f64> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let nodes = self.mesh.element_nodes(e);
                let mut acc = 0.0;
                for (g, w) in self.weights.iter().enumerate() {
                    let f = self.deformation_gradient(&u.u, &nodes, g) * self.inv_sqrt[e][g];
                    acc += w * self.density.eval(&f)?;
                }
                Ok(acc)
            })
            .collect::<Result<_, DensityError>>()?;
        Ok(per.iter().sum())
    }

    /// Energy and its gradient with respect to the nodal values.
    pub fn energy_and_gradient(&self, u: &DeformationGrid) -> Result<(f64, Vec<Vec3>), ElasticError> {
        self.check(u)?;
        let per: Vec<(f64, [Vec3; 8])> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let nodes = self.mesh.element_nodes(e);
                let mut acc = 0.0;
                let mut local = [Vec3::zeros(); 8];
                for (g, wg) in self.weights.iter().enumerate() {
                    let s = self.inv_sqrt[e][g];
                    let f = self.deformation_gradient(&u.u, &nodes, g) * s;
                    let (w, dw) = self.density.eval_with_gradient(&f)?;
                    acc += wg * w;
                    let ps = *wg * dw * s;
                    for (a, l) in local.iter_mut().enumerate() {
                        *l += ps * self.grads[g][a];
                    }
                }
                Ok((acc, local))
            })
            .collect::<Result<_, DensityError>>()?;
        let mut grad = vec![Vec3::zeros(); self.mesh.len()];
        let mut total = 0.0;
        for (e, (w, local)) in per.iter().enumerate() {
            total += w;
            for (a, n) in self.mesh.element_nodes(e).iter().enumerate() {
                grad[*n] += local[a];
            }
        }
        Ok((total, grad))
    }

    /// Quasi-Newton descent with a 3-2-1 pin removing rigid motions.
    pub fn minimize(&self, init: &DeformationGrid, opts: &LbfgsOptions) -> Result<Minimized, ElasticError> {
        self.check(init)?;
        let init_energy = self.energy(init)?;
        let mask = self.pin_mask(init);
        let base = init.u.clone();
        let unpack = |x: &[f64]| -> DeformationGrid {
            let mut u = base.clone();
            for (n, v) in u.iter_mut().enumerate() {
                for c in 0..3 {
                    if mask[3 * n + c] {
                        v[c] = x[3 * n + c];
                    }
                }
            }
            DeformationGrid { mesh: self.mesh, u }
        };
        let x0: Vec<f64> = base.iter().flat_map(|v| [v.x, v.y, v.z]).collect();
        let run = lbfgs::minimize(x0, opts, |x| {
            let (e, g) = self.energy_and_gradient(&unpack(x))?;
            let flat = g
                .iter()
                .flat_map(|v| [v.x, v.y, v.z])
                .zip(&mask)
                .map(|(v, free)| if *free { v } else { 0.0 })
                .collect();
            Ok::<_, ElasticError>((e, flat))
        })?;
        let u = unpack(&run.x);
        let last = Box::new(u.clone());
        match run.termination {
            Termination::Converged => {}
            Termination::LineSearchFailed => {
                return Err(ElasticError::LineSearchFailed { iterations: run.iterations, energy: run.f, last })
            }
            Termination::MaxIterations => {
                return Err(ElasticError::MaxIterations { iterations: run.iterations, energy: run.f, last })
            }
        }
        Ok(Minimized { u, energy: run.f, init_energy, iterations: run.iterations, grad_norm: run.grad_norm })
    }

    /// Free-component mask; pins a midplate node fully, a second node in the two
    /// components transverse to the edge joining them, and a third in one component.
    fn pin_mask(&self, u: &DeformationGrid) -> Vec<bool> {
        let grid = self.mesh.grid;
        let k = self.mesh.nz / 2;
        let (ci, cj) = grid.central_node();
        let a = self.mesh.index(ci, cj, k);
        let b = self.mesh.index(grid.nx - 1, cj, k);
        let c = self.mesh.index(ci, grid.ny - 1, k);
        let mut mask = vec![true; 3 * self.mesh.len()];
        for comp in 0..3 {
            mask[3 * a + comp] = false;
        }
        let d1 = u.u[b] - u.u[a];
        let along = d1.iamax();
        for comp in (0..3).filter(|&c| c != along) {
            mask[3 * b + comp] = false;
        }
        let normal = d1.cross(&(u.u[c] - u.u[a]));
        mask[3 * c + normal.iamax()] = false;
        mask
    }
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub u: DeformationGrid,
    pub energy: f64,
    pub init_energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub fn energy3d(u: &DeformationGrid, m: &MetricField, d: &EnergyDensity) -> Result<f64, ElasticError> {
    ElasticProblem::new(u.mesh, m, d)?.energy(u)
}

pub fn gradient3d(u: &DeformationGrid, m: &MetricField, d: &EnergyDensity) -> Result<Vec<Vec3>, ElasticError> {
    Ok(ElasticProblem::new(u.mesh, m, d)?.energy_and_gradient(u)?.1)
}

pub fn minimize3d(
    init: &DeformationGrid,
    m: &MetricField,
    d: &EnergyDensity,
    opts: &LbfgsOptions,
) -> Result<Minimized, ElasticError> {
    ElasticProblem::new(init.mesh, m, d)?.minimize(init, opts)
}

fn check_fields(fields: &ExpansionFields, mesh: &Mesh3) -> Result<(), ElasticError> {
    if fields.grid != mesh.grid {
        return Err(ElasticError::Invalid("expansion fields and mesh use different midplate grids".into()));
    }
    Ok(())
}

/// `y0 + Σ_{k=1}^{K} x3^k/k! b_k`.
pub fn ansatz_deformation(fields: &ExpansionFields, mesh: Mesh3, order: usize) -> Result<DeformationGrid, ElasticError> {
    check_fields(fields, &mesh)?;
    if order > fields.order + 2 {
        return Err(ElasticError::Invalid(format!(
            "ansatz of order {order} needs expansion fields of order at least {}",
            order - 2
        )));
    }
    Ok(DeformationGrid::from_fn(mesh, |n, x3| {
        let mut u = fields.y0[n];
        for k in 1..=order {
            u += x3.powi(k as i32) / factorial(k) * fields.b(k)[n];
        }
        u
    }))
}

/// Nodal correctors of the recovery sequence.
#[derive(Debug, Clone)]
pub struct RecoveryCorrectors {
    pub v: Vec<Vec3>,
    pub p: Vec<Vec3>,
    pub w: Vec<Vec3>,
    pub q: Vec<Vec3>,
    pub r: Vec<Vec3>,
    pub k0: Vec<Vec3>,
}

fn solve_frame(b0: &Mat3, rhs: Vec3, node: usize) -> Result<Vec3, ElasticError> {
    let det = b0.determinant();
    if det <= 0.0 {
        return Err(LimitError::SingularFrame { node, det }.into());
    }
    b0.transpose().lu().solve(&rhs).ok_or_else(|| LimitError::SingularFrame { node, det }.into())
}

/// Build the correctors for a given first-order isometry `V`.
pub fn recovery_correctors(problem: &LimitProblem, v: &[Vec3]) -> Result<RecoveryCorrectors, ElasticError> {
    let fields = &problem.fields;
    let n = problem.n;
    let grid = fields.grid;
    let forms = &problem.plate().forms;
    let p = induced_p(fields, v)?;
    let bend = bending_tensor(fields, v, &p);
    let delta = crate::quad_forms::moment(n + 1) / factorial(n + 1);
    let w: Vec<Vec3> = problem.projection.w.iter().map(|x| -delta * x).collect();
    let gw = fd_tangent(&grid, &w);
    let gv = fd_tangent(&grid, v);
    let g_last = fd_tangent(&grid, fields.b(n + 1));
    let b1 = fields.b(1);
    let b2 = fields.b(2);
    let mut q = Vec::with_capacity(grid.len());
    let mut r = Vec::with_capacity(grid.len());
    let mut k0 = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let b0 = fields.frames[0][node];
        let mut y = b0;
        y.set_column(2, &Vec3::zeros());
        let form = &forms[node];

        let strain = sym2(&block2(&(y.transpose() * gw[node])));
        let c = form.c(&strain);
        let rhs = Vec3::new(c[0] - gw[node].column(0).dot(&b1[node]), c[1] - gw[node].column(1).dot(&b1[node]), c[2]);
        q.push(solve_frame(&b0, rhs, node)?);

        let c = form.c(&sym2(&bend.tensor[node]));
        let rhs = Vec3::new(
            c[0] - gv[node].column(0).dot(&b2[node]),
            c[1] - gv[node].column(1).dot(&b2[node]),
            c[2] - p[node].dot(&b2[node]),
        );
        r.push(solve_frame(&b0, rhs, node)?);

        let mut mt = -fields.metric_normal[n + 1][node] + 2.0 * sym(&(b0.transpose() * g_last[node]));
        for k in 1..=n {
            mt += binomial(n + 1, k) * fields.frames[k][node].transpose() * fields.frames[n + 1 - k][node];
        }
        let c = form.c(&block2(&mt));
        let rhs = Vec3::new(0.5 * c[0] - mt[(0, 2)], 0.5 * c[1] - mt[(1, 2)], 0.5 * (c[2] - mt[(2, 2)]));
        k0.push(solve_frame(&b0, rhs, node)?);
    }
    Ok(RecoveryCorrectors { v: v.to_vec(), p, w, q, r, k0 })
}

/// `Y + hⁿV + h^{n+1}w + hⁿx3 p + h^{n+1}x3 q + x3^{n+2}/(n+2)! k0 + hⁿ x3²/2 r`,
/// with `Y` the order-`(n+1)` ansatz.
pub fn recovery_deformation(
    problem: &LimitProblem,
    correctors: &RecoveryCorrectors,
    mesh: Mesh3,
) -> Result<DeformationGrid, ElasticError> {
    let fields = &problem.fields;
    check_fields(fields, &mesh)?;
    let n = problem.n;
    let h = mesh.h;
    let hn = h.powi(n as i32);
    let c = correctors;
    let y = ansatz_deformation(fields, mesh, n + 1)?;
    let plane = mesh.grid.len();
    Ok(DeformationGrid::from_fn(mesh, |node, x3| {
        let k = ((x3 + 0.5 * h) / mesh.spacing()[2]).round() as usize;
        y.u[k * plane + node]
            + hn * c.v[node]
            + hn * h * c.w[node]
            + hn * x3 * c.p[node]
            + hn * h * x3 * c.q[node]
            + x3.powi(n as i32 + 2) / factorial(n + 2) * c.k0[node]
            + hn * 0.5 * x3 * x3 * c.r[node]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Ansatz,
    Recovery,
    Minimize,
}

impl SweepMode {
    pub fn name(&self) -> &'static str {
        match self {
            SweepMode::Ansatz => "ansatz",
            SweepMode::Recovery => "recovery",
            SweepMode::Minimize => "minimize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub h: f64,
    pub energy: f64,
    pub scaled_energy: f64,
    pub mode: SweepMode,
    /// Discretisation delta of the evaluated (or initial) deformation: one more
    /// Gauss point per axis, and in ansatz mode also halving the in-plane spacing.
    pub floor: f64,
    pub at_floor: bool,
    /// Energy of the starting deformation in minimize mode.
    pub init_energy: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    pub nz: usize,
    pub points: Vec<SweepPoint>,
    pub fit: Option<SlopeFit>,
    pub flag: Option<String>,
}

/// Energy noise floor of a deformation: the change under one extra Gauss point per
/// axis, or a roundoff level, whichever is larger.
pub fn quadrature_floor(
    problem: &ElasticProblem,
    m: &MetricField,
    d: &EnergyDensity,
    u: &DeformationGrid,
    energy: f64,
) -> Result<f64, ElasticError> {
    let fine = ElasticProblem::with_gauss_order(problem.mesh, m, d, problem.gauss_order + 1)?;
    let delta = (fine.energy(u)? - energy).abs();
    let roundoff = 1e3 * f64::EPSILON * f64::EPSILON * problem.mesh.grid.bounds.area();
    Ok(delta.max(roundoff))
}

/// Least-squares line through `(log h, log E)`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Some(SlopeFit { slope, intercept, residual, points: pts.len() })
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub n: usize,
    pub nz: usize,
    pub mode: SweepMode,
    pub lbfgs: LbfgsOptions,
}

/// Per-thickness energies and a slope fit of `log E` against `log h`.
/// Recovery and minimize modes need the limit problem and the displacement `V`.
pub fn scaling_sweep(
    m: &MetricField,
    d: &EnergyDensity,
    fields: &ExpansionFields,
    recovery: Option<(&LimitProblem, &[Vec3])>,
    hs: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult, ElasticError> {
    if hs.len() < 3 {
        return Err(ElasticError::Invalid("a sweep needs at least 3 thickness values".into()));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ElasticError::Invalid("thickness values must be strictly decreasing".into()));
    }
    let n = opts.n;
    let correctors = match (opts.mode, recovery) {
        (SweepMode::Ansatz, _) => None,
        (_, Some((problem, v))) => Some((problem, recovery_correctors(problem, v)?)),
        (_, None) => return Err(ElasticError::Invalid("recovery and minimize sweeps need a limit problem".into())),
    };
    let build = |mesh: Mesh3| -> Result<DeformationGrid, ElasticError> {
        match &correctors {
            None => ansatz_deformation(fields, mesh, n + 1),
            Some((problem, c)) => recovery_deformation(problem, c, mesh),
        }
    };
    // The ansatz is an explicit formula, so it can be resampled on a finer midplate grid.
    let fine = match opts.mode {
        SweepMode::Ansatz => {
            let grid = fields.grid.refined();
            let frames = frame_transport(m, &grid, &FrameOptions::default())?;
            Some(expansion_fields(m, &frames, fields.order)?)
        }
        _ => None,
    };
    let mut points = Vec::with_capacity(hs.len());
    for &h in hs {
        let mesh = Mesh3::new(fields.grid, opts.nz, h)?;
        let problem = ElasticProblem::new(mesh, m, d)?;
        let u = build(mesh)?;
        let e0 = problem.energy(&u)?;
        let mut floor = quadrature_floor(&problem, m, d, &u, e0)?;
        if let Some(f) = &fine {
            let mesh = Mesh3::new(f.grid, opts.nz, h)?;
            let e = ElasticProblem::new(mesh, m, d)?.energy(&ansatz_deformation(f, mesh, n + 1)?)?;
            floor = floor.max((e - e0).abs());
        }
        let init_energy = (opts.mode == SweepMode::Minimize).then_some(e0);
        let (energy, iterations, converged) = match opts.mode {
            SweepMode::Minimize => match problem.minimize(&u, &opts.lbfgs) {
                Ok(r) => (r.energy, Some(r.iterations), Some(true)),
                Err(ElasticError::LineSearchFailed { iterations, energy, .. })
                | Err(ElasticError::MaxIterations { iterations, energy, .. }) => (energy, Some(iterations), Some(false)),
                Err(e) => return Err(e),
            },
            _ => (e0, None, None),
        };
        points.push(SweepPoint {
            h,
            energy,
            scaled_energy: energy / h.powi(2 * (n as i32 + 1)),
            mode: opts.mode,
            floor,
            at_floor: energy <= 10.0 * floor,
            init_energy,
            iterations,
            converged,
        });
    }
    let (fh, fe): (Vec<f64>, Vec<f64>) = points.iter().filter(|p| !p.at_floor).map(|p| (p.h, p.energy)).unzip();
    let fit = fit_slope(&fh, &fe);
    let flag = if fit.is_none() { Some("floor".to_string()) } else { None };
    Ok(SweepResult { n, nz: opts.nz, points, fit, flag })
}
