//! Small dense helpers on top of nalgebra.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};

pub type Mat3 = Matrix3<f64>;
pub type Mat2 = Matrix2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

pub fn sym(m: &Mat3) -> Mat3 {
    0.5 * (m + m.transpose())
}

pub fn sym2(m: &Mat2) -> Mat2 {
    0.5 * (m + m.transpose())
}

/// Upper-left 2×2 block.
pub fn block2(m: &Mat3) -> Mat2 {
    m.fixed_view::<2, 2>(0, 0).into_owned()
}

/// Embed a 2×2 matrix into the upper-left block of a zero 3×3 matrix.
pub fn embed2(m: &Mat2) -> Mat3 {
    let mut out = Mat3::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(m);
    out
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0, |a, b| a.max(b.abs()))
}

pub fn max_abs2(m: &Mat2) -> f64 {
    m.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2]]
}

/// `f(M)` for symmetric `M` via its eigendecomposition.
pub fn sym_fn(m: &Mat3, f: impl Fn(f64) -> f64) -> Mat3 {
    let eig = SymmetricEigen::new(sym(m));
    let d = Mat3::from_diagonal(&eig.eigenvalues.map(f));
    let q = eig.eigenvectors;
    sym(&(q * d * q.transpose()))
}

pub fn sym_sqrt(m: &Mat3) -> Mat3 {
    sym_fn(m, f64::sqrt)
}

pub fn sym_inv_sqrt(m: &Mat3) -> Mat3 {
    sym_fn(m, |x| 1.0 / x.sqrt())
}

/// Rotation about a unit axis (Rodrigues).
pub fn rotation(axis: Vec3, angle: f64) -> Mat3 {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner()
}

pub fn skew(w: Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_diagonal() {
        let g = Mat3::from_diagonal(&Vec3::new(4.0, 1.0, 9.0));
        let s = sym_inv_sqrt(&g);
        assert!((s - Mat3::from_diagonal(&Vec3::new(0.5, 1.0, 1.0 / 3.0))).norm() < 1e-15);
        assert!((sym_sqrt(&g) * sym_sqrt(&g) - g).norm() < 1e-14);
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
                assert!((q - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(factorial(5), 120.0);
    }
}
