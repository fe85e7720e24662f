//! Midplate frame, immersion and the matched expansion `Σ x3^k/k! B_k`.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{gradient3, MidplateGrid};
use crate::linalg::{binomial, block2, max_abs, max_abs2, sym2, Mat2, Mat3, Vec3};
use crate::metric::MetricField;
use crate::tensor::{christoffel, normal_series, CurvatureMidplateJets, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImmersionError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("integrability violation: {what} defect {defect:e} exceeds {tol:e}")]
    IntegrabilityViolation { what: &'static str, defect: f64, tol: f64 },
    #[error("insufficient order: {0}")]
    InsufficientOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    /// Spine along x1 through the basepoint row, then every column along x2.
    RowsFirst,
    /// Spine along x2 through the basepoint column, then every row along x1.
    ColumnsFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    pub basepoint: Option<(usize, usize)>,
    /// Rotation applied to the base frame `G^{1/2}` (gauge).
    pub base_rotation: Mat3,
    pub substeps: usize,
    pub path: PathOrder,
    /// Relative loop-holonomy tolerance per grid cell.
    pub holonomy_tol: f64,
    /// Tolerance on the discrete curl of `∂_i y0 = B0 e_i`.
    pub curl_tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            basepoint: None,
            base_rotation: Mat3::identity(),
            substeps: 1,
            path: PathOrder::RowsFirst,
            holonomy_tol: 1e-8,
            curl_tol: 1e-6,
        }
    }
}

/// Transported frame `B0` and immersion `y0` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub grid: MidplateGrid,
    pub basepoint: (usize, usize),
    pub base_frame: Mat3,
    pub frames: Vec<Mat3>,
    pub y0: Vec<Vec3>,
    /// Largest relative loop-holonomy defect over the grid cells.
    pub holonomy: f64,
}

impl FrameField {
    /// `max |B0ᵀB0 − G(·, 0)|` over the nodes.
    pub fn metric_defect(&self, m: &MetricField) -> Result<f64, ImmersionError> {
        let mut worst: f64 = 0.0;
        for (node, b) in self.frames.iter().enumerate() {
            let x = self.grid.node_coord(node);
            let g = m.evaluate([x[0], x[1], 0.0]).map_err(TensorError::from)?;
            worst = worst.max(max_abs(&(b.transpose() * b - g)));
        }
        Ok(worst)
    }

    pub fn min_det(&self) -> f64 {
        self.frames.iter().map(|b| b.determinant()).fold(f64::INFINITY, f64::min)
    }
}

fn gamma_at(m: &MetricField, x: [f64; 2], axis: usize) -> Result<Mat3, TensorError> {
    Ok(christoffel(m, [x[0], x[1], 0.0], 0)?.values()[axis])
}

/// RK4 for `dB/dt = B Γ_axis`, `dy/dt = B e_axis` from `x` over signed length `len`.
fn transport(
    m: &MetricField,
    x: [f64; 2],
    axis: usize,
    len: f64,
    steps: usize,
    b: Mat3,
    y: Vec3,
) -> Result<(Mat3, Vec3), TensorError> {
    let h = len / steps as f64;
    let (mut b, mut y) = (b, y);
    let at = |t: f64| {
        let mut p = x;
        p[axis] += t;
        p
    };
    for s in 0..steps {
        let t0 = s as f64 * h;
        let g0 = gamma_at(m, at(t0), axis)?;
        let gm = gamma_at(m, at(t0 + 0.5 * h), axis)?;
        let g1 = gamma_at(m, at(t0 + h), axis)?;
        let kb1 = b * g0;
        let ky1 = b.column(axis).into_owned();
        let b2 = b + 0.5 * h * kb1;
        let kb2 = b2 * gm;
        let ky2 = b2.column(axis).into_owned();
        let b3 = b + 0.5 * h * kb2;
        let kb3 = b3 * gm;
        let ky3 = b3.column(axis).into_owned();
        let b4 = b + h * kb3;
        let kb4 = b4 * g1;
        let ky4 = b4.column(axis).into_owned();
        b += h / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
        y += h / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    }
    Ok((b, y))
}

/// Integrate `∂_i B0 = B0 Γ_i(x', 0)` and `∂_i y0 = B0 e_i` along axis paths
/// from the basepoint, where `B0 = Q G^{1/2}` and `y0 = 0`.
pub fn frame_transport(m: &MetricField, grid: &MidplateGrid, opts: &FrameOptions) -> Result<FrameField, ImmersionError> {
    let (bi, bj) = opts.basepoint.unwrap_or_else(|| grid.central_node());
    let base_x = grid.coord(bi, bj);
    let base_frame = opts.base_rotation * m.sqrt([base_x[0], base_x[1], 0.0]).map_err(TensorError::from)?;
    let [dx, dy] = grid.spacing();
    let steps = opts.substeps.max(1);
    let (spine_axis, spine_len, cross_len, spine_base, cross_base) = match opts.path {
        PathOrder::RowsFirst => (0, grid.nx, grid.ny, bi, bj),
        PathOrder::ColumnsFirst => (1, grid.ny, grid.nx, bj, bi),
    };
    let cross_axis = 1 - spine_axis;
    let step_len = [dx, dy];
    let node_at = |s: usize, c: usize| match opts.path {
        PathOrder::RowsFirst => grid.index(s, c),
        PathOrder::ColumnsFirst => grid.index(c, s),
    };
    let coord_at = |s: usize, c: usize| grid.node_coord(node_at(s, c));

    let mut spine = vec![(Mat3::zeros(), Vec3::zeros()); spine_len];
    spine[spine_base] = (base_frame, Vec3::zeros());
    for s in spine_base + 1..spine_len {
        let (b, y) = spine[s - 1];
        spine[s] = transport(m, coord_at(s - 1, cross_base), spine_axis, step_len[spine_axis], steps, b, y)?;
    }
    for s in (0..spine_base).rev() {
        let (b, y) = spine[s + 1];
        spine[s] = transport(m, coord_at(s + 1, cross_base), spine_axis, -step_len[spine_axis], steps, b, y)?;
    }

    let lines: Vec<Vec<(Mat3, Vec3)>> = (0..spine_len)
        .into_par_iter()
        .map(|s| {
            let mut line = vec![(Mat3::zeros(), Vec3::zeros()); cross_len];
            line[cross_base] = spine[s];
            for c in cross_base + 1..cross_len {
                let (b, y) = line[c - 1];
                line[c] = transport(m, coord_at(s, c - 1), cross_axis, step_len[cross_axis], steps, b, y)?;
            }
            for c in (0..cross_base).rev() {
                let (b, y) = line[c + 1];
                line[c] = transport(m, coord_at(s, c + 1), cross_axis, -step_len[cross_axis], steps, b, y)?;
            }
            Ok(line)
        })
        .collect::<Result<_, TensorError>>()?;

    let mut frames = vec![Mat3::zeros(); grid.len()];
    let mut y0 = vec![Vec3::zeros(); grid.len()];
    for (s, line) in lines.into_iter().enumerate() {
        for (c, (b, y)) in line.into_iter().enumerate() {
            let node = node_at(s, c);
            frames[node] = b;
            y0[node] = y;
        }
    }

    let holonomy = loop_holonomy(m, grid, &frames, steps)?;
    if holonomy > opts.holonomy_tol {
        return Err(ImmersionError::IntegrabilityViolation {
            what: "loop holonomy",
            defect: holonomy,
            tol: opts.holonomy_tol,
        });
    }
    Ok(FrameField { grid: *grid, basepoint: (bi, bj), base_frame, frames, y0, holonomy })
}

/// Relative defect after transporting each node's frame once around its cell.
fn loop_holonomy(m: &MetricField, grid: &MidplateGrid, frames: &[Mat3], steps: usize) -> Result<f64, TensorError> {
    let [dx, dy] = grid.spacing();
    let cells: Vec<(usize, usize)> =
        (0..grid.ny - 1).flat_map(|j| (0..grid.nx - 1).map(move |i| (i, j))).collect();
    let defects: Vec<f64> = cells
        .into_par_iter()
        .map(|(i, j)| {
            let b0 = frames[grid.index(i, j)];
            let y = Vec3::zeros();
            let (b, y) = transport(m, grid.coord(i, j), 0, dx, steps, b0, y)?;
            let (b, y) = transport(m, grid.coord(i + 1, j), 1, dy, steps, b, y)?;
            let (b, y) = transport(m, grid.coord(i + 1, j + 1), 0, -dx, steps, b, y)?;
            let (b, _) = transport(m, grid.coord(i, j + 1), 1, -dy, steps, b, y)?;
            Ok(max_abs(&(b - b0)) / max_abs(&b0))
        })
        .collect::<Result<_, TensorError>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// `∂1 (B0 e2) − ∂2 (B0 e1)` over interior nodes.
pub fn curl_defect(grid: &MidplateGrid, frames: &[Mat3]) -> f64 {
    let c1: Vec<[f64; 3]> = frames.iter().map(|b| [b[(0, 0)], b[(1, 0)], b[(2, 0)]]).collect();
    let c2: Vec<[f64; 3]> = frames.iter().map(|b| [b[(0, 1)], b[(1, 1)], b[(2, 1)]]).collect();
    let g1 = gradient3(grid, &c1);
    let g2 = gradient3(grid, &c2);
    (0..grid.len())
        .filter(|&n| grid.is_interior(n))
        .flat_map(|n| (0..3).map(move |c| (n, c)))
        .map(|(n, c)| (g2[n][0][c] - g1[n][1][c]).abs())
        .fold(0.0, f64::max)
}

/// The immersion `y0` together with its curl check.
pub fn midplate_immersion(frames: &FrameField, curl_tol: f64) -> Result<Vec<Vec3>, ImmersionError> {
    if frames.grid.nx >= 5 && frames.grid.ny >= 5 {
        let defect = curl_defect(&frames.grid, &frames.frames);
        if defect > curl_tol {
            return Err(ImmersionError::IntegrabilityViolation { what: "curl", defect, tol: curl_tol });
        }
    }
    Ok(frames.y0.clone())
}

/// Matched isometry expansion at level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFields {
    pub grid: MidplateGrid,
    pub order: usize,
    pub basepoint: (usize, usize),
    pub base_frame: Mat3,
    pub y0: Vec<Vec3>,
    /// `frames[k] = B_k`, `k = 0..=n`.
    pub frames: Vec<Vec<Mat3>>,
    /// `normals[k - 1] = b_k`, `k = 1..=n+2`.
    pub normals: Vec<Vec<Vec3>>,
    /// `metric_normal[m] = ∂3^m G(·, 0)`, `m = 0..=n+1`.
    pub metric_normal: Vec<Vec<Mat3>>,
}

impl ExpansionFields {
    pub fn frame(&self, k: usize) -> &[Mat3] {
        &self.frames[k]
    }

    pub fn b(&self, k: usize) -> &[Vec3] {
        &self.normals[k - 1]
    }

    /// `∇ b_k` (3×2 as a 3×3 with zero last column) from the stored frames,
    /// or by finite differences when `k = n+1`.
    fn tangent(&self, k: usize) -> Vec<Mat3> {
        if k <= self.order {
            return self.frames[k].iter().map(|b| {
                let mut t = *b;
                t.set_column(2, &Vec3::zeros());
                t
            }).collect();
        }
        fd_tangent(&self.grid, self.b(k))
    }

    /// `B_{n+1}` assembled as `[∇ b_{n+1}, b_{n+2}]`.
    fn next_frame(&self) -> Vec<Mat3> {
        let n = self.order;
        let mut out = fd_tangent(&self.grid, self.b(n + 1));
        for (m, b) in out.iter_mut().zip(self.b(n + 2)) {
            m.set_column(2, b);
        }
        out
    }
}

/// Finite-difference gradient of a vector field, packed into the first two columns.
pub fn fd_tangent(grid: &MidplateGrid, f: &[Vec3]) -> Vec<Mat3> {
    let arr: Vec<[f64; 3]> = f.iter().map(|v| [v.x, v.y, v.z]).collect();
    gradient3(grid, &arr)
        .into_iter()
        .map(|g| Mat3::new(g[0][0], g[1][0], 0.0, g[0][1], g[1][1], 0.0, g[0][2], g[1][2], 0.0))
        .collect()
}

/// Build `B_k = B0 ∇3^{(k−1)}Γ3(·, 0)` and `b_k = B_{k−1} e3`.
pub fn expansion_fields(m: &MetricField, frames: &FrameField, n: usize) -> Result<ExpansionFields, ImmersionError> {
    let grid = frames.grid;
    let series: Vec<_> = grid
        .coords()
        .into_par_iter()
        .map(|x| normal_series(m, [x[0], x[1], 0.0], n + 1))
        .collect::<Result<_, TensorError>>()?;
    let mut bk = vec![frames.frames.clone()];
    for k in 1..=n {
        bk.push(frames.frames.iter().zip(&series).map(|(b0, s)| b0 * s.gamma3[k - 1]).collect());
    }
    let mut normals: Vec<Vec<Vec3>> = (0..=n)
        .map(|k| bk[k].iter().map(|b| b.column(2).into_owned()).collect())
        .collect();
    normals.push(frames.frames.iter().zip(&series).map(|(b0, s)| b0 * s.gamma3[n].column(2)).collect());
    let metric_normal = (0..=n + 1)
        .map(|mm| series.iter().map(|s| s.metric[mm]).collect())
        .collect();
    Ok(ExpansionFields {
        grid,
        order: n,
        basepoint: frames.basepoint,
        base_frame: frames.base_frame,
        y0: frames.y0.clone(),
        frames: bk,
        normals,
        metric_normal,
    })
}

/// `Σ_{k=0}^m C(m,k) B_kᵀ B_{m−k} − ∂3^m G(·, 0)` for `m ≤ n+1`.
pub fn expansion_residual(fields: &ExpansionFields, m: usize) -> Result<Vec<Mat3>, ImmersionError> {
    let n = fields.order;
    if m > n + 1 {
        return Err(ImmersionError::InsufficientOrder(format!(
            "residual of order {m} needs fields of order at least {}",
            m - 1
        )));
    }
    let next = if m == n + 1 { Some(fields.next_frame()) } else { None };
    let frame = |k: usize| -> &[Mat3] {
        if k <= n {
            &fields.frames[k]
        } else {
            next.as_deref().expect("computed for m = n+1")
        }
    };
    Ok((0..fields.grid.len())
        .map(|node| {
            let mut acc = -fields.metric_normal[m][node];
            for k in 0..=m {
                acc += binomial(m, k) * frame(k)[node].transpose() * frame(m - k)[node];
            }
            acc
        })
        .collect())
}

/// Max-norm of a residual field over interior nodes (all nodes on small grids).
pub fn interior_max(grid: &MidplateGrid, field: &[Mat3]) -> f64 {
    let use_all = grid.nx < 5 || grid.ny < 5;
    field
        .iter()
        .enumerate()
        .filter(|(n, _)| use_all || grid.is_interior(*n))
        .map(|(_, r)| max_abs(r))
        .fold(0.0, f64::max)
}

/// Residual norms for `m = 1..=n+1`; entries `m ≤ n` must vanish.
pub fn residual_norms(fields: &ExpansionFields) -> Result<Vec<f64>, ImmersionError> {
    (1..=fields.order + 1)
        .map(|m| Ok(interior_max(&fields.grid, &expansion_residual(fields, m)?)))
        .collect()
}

/// Right-hand side of the curvature identity, per node:
/// `2((∇y0)ᵀ∇b_{n+1})_sym + Σ_{k=1}^n C(n+1,k)(∇b_k)ᵀ∇b_{n+1−k} − ∂3^{n+1}G_{2×2}`.
pub fn curvature_excess(fields: &ExpansionFields) -> Vec<Mat2> {
    let n = fields.order;
    let tangents: Vec<Vec<Mat3>> = (0..=n + 1).map(|k| fields.tangent(k)).collect();
    (0..fields.grid.len())
        .map(|node| {
            let t = |k: usize| tangents[k][node];
            let lead = block2(&(t(0).transpose() * t(n + 1)));
            let mut acc = 2.0 * sym2(&lead);
            for k in 1..=n {
                acc += binomial(n + 1, k) * block2(&(t(k).transpose() * t(n + 1 - k)));
            }
            acc - block2(&fields.metric_normal[n + 1][node])
        })
        .collect()
}

/// Max defect of `2 ∂3^{(n−1)} R_{i3,j3}(·, 0) = curvature_excess` over interior nodes.
pub fn riem_identity_check(fields: &ExpansionFields, jets: &CurvatureMidplateJets) -> Result<f64, ImmersionError> {
    let n = fields.order;
    if n == 0 || jets.order + 1 < n {
        return Err(ImmersionError::InsufficientOrder(format!(
            "curvature jets of order {} do not reach level {n}",
            jets.order
        )));
    }
    let rhs = curvature_excess(fields);
    let use_all = fields.grid.nx < 5 || fields.grid.ny < 5;
    Ok(rhs
        .iter()
        .enumerate()
        .filter(|(node, _)| use_all || fields.grid.is_interior(*node))
        .map(|(node, r)| max_abs2(&(2.0 * jets.normal[n - 1][node] - r)))
        .fold(0.0, f64::max))
}

/// `max |B_k e_i − ∂_i b_k|` over `k = 0..=n` (with `b_0 = y0`) on interior nodes.
pub fn column_consistency(fields: &ExpansionFields) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..=fields.order {
        let f = if k == 0 { fields.y0.clone() } else { fields.b(k).to_vec() };
        let fd = fd_tangent(&fields.grid, &f);
        for node in (0..fields.grid.len()).filter(|&n| fields.grid.is_interior(n)) {
            let b = fields.frames[k][node];
            for i in 0..2 {
                worst = worst.max((b.column(i) - fd[node].column(i)).amax());
            }
        }
    }
    worst
}
