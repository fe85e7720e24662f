//! Energy density, its quadratic forms, and the limit-energy coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{embed2, factorial, sym, Mat2, Mat3, Vec3};
use crate::metric::{MetricError, MetricField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("degenerate deformation gradient: det F = {det:e}")]
    DegenerateDeformation { det: f64 },
    #[error("singular plate reduction (check mu and lambda)")]
    SingularReduction,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub const DEFAULT_DET_FLOOR: f64 = 1e-8;

/// `W(F) = μ dist²(F, SO(3)) + (λ/2)(det F − 1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDensity {
    pub mu: f64,
    pub lambda: f64,
    #[serde(default = "default_det_floor")]
    pub det_floor: f64,
}

fn default_det_floor() -> f64 {
    DEFAULT_DET_FLOOR
}

impl EnergyDensity {
    pub fn new(mu: f64, lambda: f64) -> EnergyDensity {
        EnergyDensity { mu, lambda, det_floor: DEFAULT_DET_FLOOR }
    }

    fn check(&self, f: &Mat3) -> Result<f64, DensityError> {
        let det = f.determinant();
        if det.is_nan() || det <= self.det_floor {
            return Err(DensityError::DegenerateDeformation { det });
        }
        Ok(det)
    }

    pub fn eval(&self, f: &Mat3) -> Result<f64, DensityError> {
        let det = self.check(f)?;
        Ok(self.mu * dist2_so3(f) + 0.5 * self.lambda * (det - 1.0).powi(2))
    }

    /// `DW(F) = 2μ (F − R) + λ (det F − 1) cof F`, `R` the polar factor.
    pub fn gradient(&self, f: &Mat3) -> Result<Mat3, DensityError> {
        self.eval_with_gradient(f).map(|(_, g)| g)
    }

    pub fn eval_with_gradient(&self, f: &Mat3) -> Result<(f64, Mat3), DensityError> {
        let det = self.check(f)?;
        let svd = f.svd(true, true);
        let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let s = svd.singular_values;
        let r = u * vt;
        let dist2 = (s[0] - 1.0).powi(2) + (s[1] - 1.0).powi(2) + (s[2] - 1.0).powi(2);
        let cof = cofactor(f);
        let w = self.mu * dist2 + 0.5 * self.lambda * (det - 1.0).powi(2);
        let grad = 2.0 * self.mu * (f - r) + self.lambda * (det - 1.0) * cof;
        Ok((w, grad))
    }

    /// `Q3(F) = D²W(Id)(F, F) = 2μ |sym F|² + λ (tr F)²`.
    pub fn q3(&self, f: &Mat3) -> f64 {
        self.q3_bilinear(f, f)
    }

    pub fn q3_bilinear(&self, f: &Mat3, g: &Mat3) -> f64 {
        2.0 * self.mu * sym(f).dot(&sym(g)) + self.lambda * f.trace() * g.trace()
    }
}

/// Cofactor matrix, `cof F = det F · F^{-T}` for invertible `F`.
pub fn cofactor(f: &Mat3) -> Mat3 {
    let c0 = f.column(0);
    let c1 = f.column(1);
    let c2 = f.column(2);
    Mat3::from_columns(&[c1.cross(&c2), c2.cross(&c0), c0.cross(&c1)])
}

/// Squared distance from `F` to `SO(3)`.
pub fn dist2_so3(f: &Mat3) -> f64 {
    let mut s: Vec<f64> = f.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    if f.determinant() < 0.0 {
        s[0] = -s[0];
    }
    s.iter().map(|x| (x - 1.0).powi(2)).sum()
}

/// Nearest rotation (polar factor) of a matrix with positive determinant.
pub fn polar_rotation(f: &Mat3) -> Mat3 {
    let svd = f.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Symmetric 2×2 matrices as coordinate vectors `(F11, F22, F12)`.
pub fn sym_coords(f: &Mat2) -> Vec3 {
    Vec3::new(f[(0, 0)], f[(1, 1)], 0.5 * (f[(0, 1)] + f[(1, 0)]))
}

pub fn from_sym_coords(v: &Vec3) -> Mat2 {
    Mat2::new(v[0], v[2], v[2], v[1])
}

/// `Q2(x', ·)` and `c(x', ·)` at one midplate point, in `(F11, F22, F12)` coordinates:
/// `Q2(F) = vᵀ K v` and `c(F) = C v` for `v = sym_coords(F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateForm {
    pub k: Mat3,
    pub c: Mat3,
}

impl PlateForm {
    pub fn q2(&self, f: &Mat2) -> f64 {
        let v = sym_coords(f);
        v.dot(&(self.k * v))
    }

    pub fn inner(&self, f: &Mat2, g: &Mat2) -> f64 {
        sym_coords(f).dot(&(self.k * sym_coords(g)))
    }

    pub fn c(&self, f: &Mat2) -> Vec3 {
        self.c * sym_coords(f)
    }
}

/// Minimise `Q3(S (F2* + c⊗e3) S)` over `c`, `S = G0^{-1/2}`; returns `(Q2(F2), c)`.
pub fn q2_and_c_at(d: &EnergyDensity, g0: &Mat3, f2: &Mat2) -> Result<(f64, Vec3), DensityError> {
    let s = crate::linalg::sym_inv_sqrt(g0);
    let a = s * embed2(f2) * s;
    let basis: [Mat3; 3] = std::array::from_fn(|k| {
        let mut e = Mat3::zeros();
        e[(k, 2)] = 1.0;
        s * e * s
    });
    let h = Mat3::from_fn(|k, l| d.q3_bilinear(&basis[k], &basis[l]));
    let r = Vec3::from_fn(|k, _| d.q3_bilinear(&a, &basis[k]));
    let hinv = h.try_inverse().ok_or(DensityError::SingularReduction)?;
    if !hinv.iter().all(|x| x.is_finite()) {
        return Err(DensityError::SingularReduction);
    }
    let c = -(hinv * r);
    let q = d.q3(&a) + r.dot(&c);
    Ok((q.max(0.0), c))
}

pub fn q2_and_c(d: &EnergyDensity, m: &MetricField, x: [f64; 2], f2: &Mat2) -> Result<(f64, Vec3), DensityError> {
    let g0 = m.evaluate([x[0], x[1], 0.0])?;
    q2_and_c_at(d, &g0, f2)
}

/// Assemble [`PlateForm`] from `G(x', 0)` by probing the three coordinate directions.
pub fn plate_form(d: &EnergyDensity, g0: &Mat3) -> Result<PlateForm, DensityError> {
    let basis = [Mat2::new(1.0, 0.0, 0.0, 0.0), Mat2::new(0.0, 0.0, 0.0, 1.0), Mat2::new(0.0, 1.0, 1.0, 0.0)];
    let mut q = [0.0; 3];
    let mut c = Mat3::zeros();
    for i in 0..3 {
        let (qi, ci) = q2_and_c_at(d, g0, &basis[i])?;
        q[i] = qi;
        c.set_column(i, &ci);
    }
    let mut k = Mat3::zeros();
    for i in 0..3 {
        k[(i, i)] = q[i];
        for j in 0..i {
            let (qij, _) = q2_and_c_at(d, g0, &(basis[i] + basis[j]))?;
            let v = 0.5 * (qij - q[i] - q[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(PlateForm { k, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `δ_{n+1}`
    pub delta: f64,
}

impl CoefficientSet {
    /// `|δ²/2 + γ − β| / β`.
    pub fn identity_defect(&self) -> f64 {
        (0.5 * self.delta * self.delta + self.gamma - self.beta).abs() / self.beta
    }
}

/// Closed-form coefficients of the limit energy at level `n ≥ 1`.
pub fn coefficients(n: usize) -> CoefficientSet {
    assert!(n >= 1, "coefficients are defined for n >= 1");
    let nf = n as f64;
    let odd = n % 2 == 1;
    let fact = factorial(n + 1);
    let pref = 1.0 / (2f64.powi(2 * n as i32 + 3) * (2.0 * nf + 3.0) * fact * fact);
    let even_ratio = nf * nf / ((nf + 3.0) * (nf + 3.0));
    let alpha = if odd { 0.0 } else { 3.0 / (2f64.powi(n as i32) * (nf + 3.0) * fact) };
    let beta = pref * if odd { 1.0 } else { even_ratio };
    let gamma = pref * if odd { (nf + 1.0).powi(2) / (nf + 2.0).powi(2) } else { even_ratio };
    let delta = if odd { 1.0 / (factorial(n + 2) * 2f64.powi(n as i32 + 1)) } else { 0.0 };
    CoefficientSet { n, alpha, beta, gamma, delta }
}

/// `∫_{-1/2}^{1/2} t^p dt`.
pub fn moment(p: usize) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        1.0 / ((p + 1) as f64 * 2f64.powi(p as i32))
    }
}

/// The same coefficients rebuilt from thickness moments.
pub fn coefficients_via_moments(n: usize) -> CoefficientSet {
    assert!(n >= 1, "coefficients are defined for n >= 1");
    let fact = factorial(n + 1);
    let delta = moment(n + 1) / fact;
    let alpha = 12.0 * moment(n + 2) / fact;
    let gamma = (moment(2 * n + 2) - moment(n + 1).powi(2) - 12.0 * moment(n + 2).powi(2)) / (2.0 * fact * fact);
    let beta = 0.5 * delta * delta + gamma;
    CoefficientSet { n, alpha, beta, gamma, delta }
}
