//! The prestrain metric `G` on the reference film.

use thiserror::Error;

use crate::expr::{BinaryOp, DomainError, Expr, Jet, JetShape, UnaryOp, Var};
use crate::grid::{MidplateGrid, Rect};
use crate::linalg::{self, Mat3};

/// Entrywise jets of a symmetric 3×3 field.
pub type MetricJet = [[Jet; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("metric is not positive definite at {point:?}: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { point: [f64; 3], min_eigenvalue: f64 },
    #[error("invalid metric family: {0}")]
    InvalidFamily(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricFamily {
    General,
    /// `G = e^{2φ(x3)} Id`.
    Conformal { phi: Expr },
    Constant,
}

/// Upper-triangle storage order: g11, g12, g13, g22, g23, g33.
pub const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn slot(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    UPPER.iter().position(|&p| p == (a, b)).expect("index in range")
}

/// Symmetric metric field over `ω × [-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    entries: [Expr; 6],
    family: MetricFamily,
    domain: Rect,
    spd_floor: f64,
}

pub const DEFAULT_SPD_FLOOR: f64 = 1e-10;

impl MetricField {
    /// From the six upper-triangle expressions (see [`UPPER`]).
    pub fn general(entries: [Expr; 6], domain: Rect) -> MetricField {
        MetricField { entries, family: MetricFamily::General, domain, spd_floor: DEFAULT_SPD_FLOOR }
    }

    pub fn conformal(phi: Expr, domain: Rect) -> Result<MetricField, MetricError> {
        if phi.depends_on(Var::X1) || phi.depends_on(Var::X2) {
            return Err(MetricError::InvalidFamily(format!("phi must depend on x3 only, got `{phi}`")));
        }
        let diag = Expr::unary(
            UnaryOp::Exp,
            Expr::binary(BinaryOp::Mul, Expr::Const(2.0), phi.clone()),
        );
        let z = Expr::Const(0.0);
        let entries = [diag.clone(), z.clone(), z.clone(), diag.clone(), z, diag];
        Ok(MetricField { entries, family: MetricFamily::Conformal { phi }, domain, spd_floor: DEFAULT_SPD_FLOOR })
    }

    pub fn constant(g: Mat3, domain: Rect) -> MetricField {
        let entries = UPPER.map(|(a, b)| Expr::Const(0.5 * (g[(a, b)] + g[(b, a)])));
        MetricField { entries, family: MetricFamily::Constant, domain, spd_floor: DEFAULT_SPD_FLOOR }
    }

    pub fn identity(domain: Rect) -> MetricField {
        MetricField::constant(Mat3::identity(), domain)
    }

    /// `G = Jᵀ J` for a Jacobian given row by row, `jacobian[c][a] = ∂_a u_c`.
    /// When `J` is the gradient of a map the result is immersible (flat).
    pub fn pullback(jacobian: &[[Expr; 3]; 3], domain: Rect) -> MetricField {
        let entries = UPPER.map(|(a, b)| {
            let terms = (0..3).map(|c| Expr::binary(BinaryOp::Mul, jacobian[c][a].clone(), jacobian[c][b].clone()));
            terms.reduce(|x, y| Expr::binary(BinaryOp::Add, x, y)).expect("three terms")
        });
        MetricField::general(entries, domain)
    }

    /// The metric `c·G` (same family tag unless it was conformal).
    pub fn scaled(&self, c: f64) -> MetricField {
        let entries = self.entries.clone().map(|e| Expr::binary(BinaryOp::Mul, Expr::Const(c), e));
        let family = match &self.family {
            MetricFamily::Constant => MetricFamily::Constant,
            _ => MetricFamily::General,
        };
        MetricField { entries, family, domain: self.domain, spd_floor: self.spd_floor }
    }

    pub fn with_spd_floor(mut self, floor: f64) -> MetricField {
        self.spd_floor = floor;
        self
    }

    pub fn with_domain(mut self, domain: Rect) -> MetricField {
        self.domain = domain;
        self
    }

    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        &self.entries[slot(a, b)]
    }

    pub fn entries(&self) -> &[Expr; 6] {
        &self.entries
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn spd_floor(&self) -> f64 {
        self.spd_floor
    }

    /// `G(point)` without the definiteness check.
    pub fn evaluate_raw(&self, point: [f64; 3]) -> Result<Mat3, MetricError> {
        let mut g = Mat3::zeros();
        for (k, &(a, b)) in UPPER.iter().enumerate() {
            let v = self.entries[k].eval(point)?;
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
        Ok(g)
    }

    /// `G(point)`, rejecting samples whose smallest eigenvalue is below the floor.
    pub fn evaluate(&self, point: [f64; 3]) -> Result<Mat3, MetricError> {
        let g = self.evaluate_raw(point)?;
        let min_eigenvalue = linalg::sym_eigenvalues(&g)[0];
        if min_eigenvalue.is_nan() || min_eigenvalue <= self.spd_floor {
            return Err(MetricError::NotPositiveDefinite { point, min_eigenvalue });
        }
        Ok(g)
    }

    pub fn inverse(&self, point: [f64; 3]) -> Result<Mat3, MetricError> {
        let g = self.evaluate(point)?;
        Ok(linalg::sym(&g.try_inverse().expect("positive definite matrices are invertible")))
    }

    /// Symmetric positive root of `G⁻¹`.
    pub fn inverse_sqrt(&self, point: [f64; 3]) -> Result<Mat3, MetricError> {
        Ok(linalg::sym_inv_sqrt(&self.evaluate(point)?))
    }

    /// Symmetric positive root of `G`.
    pub fn sqrt(&self, point: [f64; 3]) -> Result<Mat3, MetricError> {
        Ok(linalg::sym_sqrt(&self.evaluate(point)?))
    }

    /// Entrywise jets with full total-degree truncation.
    pub fn jet(&self, point: [f64; 3], order: u32) -> Result<MetricJet, MetricError> {
        self.jet_shaped(point, JetShape::full(order))
    }

    pub fn jet_shaped(&self, point: [f64; 3], shape: JetShape) -> Result<MetricJet, MetricError> {
        self.evaluate(point)?;
        let jets: Vec<Jet> = self
            .entries
            .iter()
            .map(|e| e.eval_jet_shaped(point, shape))
            .collect::<Result<_, _>>()?;
        Ok(std::array::from_fn(|a| std::array::from_fn(|b| jets[slot(a, b)].clone())))
    }

    /// Smallest eigenvalue over the grid nodes times `layers` evenly spaced
    /// thickness values in `[-1/2, 1/2]`.
    pub fn check_spd(&self, grid: &MidplateGrid, layers: usize) -> SpdReport {
        let layers = layers.max(1);
        let mut report = SpdReport { min_eigenvalue: f64::INFINITY, witness: None, failures: Vec::new(), pass: true };
        for l in 0..layers {
            let x3 = if layers == 1 { 0.0 } else { -0.5 + l as f64 / (layers - 1) as f64 };
            for p in grid.coords() {
                let point = [p[0], p[1], x3];
                let ev = match self.evaluate_raw(point) {
                    Ok(g) => linalg::sym_eigenvalues(&g)[0],
                    Err(_) => f64::NAN,
                };
                if ev.is_nan() || ev <= self.spd_floor {
                    report.failures.push((point, ev));
                }
                if ev < report.min_eigenvalue {
                    report.min_eigenvalue = ev;
                    report.witness = Some(point);
                }
            }
        }
        report.pass = report.failures.is_empty();
        report
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdReport {
    pub min_eigenvalue: f64,
    /// Sample attaining the minimum.
    pub witness: Option<[f64; 3]>,
    /// Samples at or below the floor (NaN marks evaluation failures).
    pub failures: Vec<([f64; 3], f64)>,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn conformal(src: &str) -> MetricField {
        MetricField::conformal(parse_expression(src).unwrap(), Rect::UNIT).unwrap()
    }

    #[test]
    fn identity_everywhere() {
        let m = MetricField::identity(Rect::UNIT);
        assert_eq!(m.evaluate([0.3, 0.1, -0.2]).unwrap(), Mat3::identity());
        assert_eq!(m.inverse_sqrt([0.0; 3]).unwrap(), Mat3::identity());
        let j = m.jet([0.2, 0.2, 0.0], 3).unwrap();
        for row in &j {
            for e in row {
                assert!(e.indices().iter().skip(1).all(|k| e.derivative(*k) == 0.0));
            }
        }
    }

    #[test]
    fn conformal_values() {
        let m = conformal("x3^2/2");
        assert!((m.evaluate([0.0; 3]).unwrap() - Mat3::identity()).norm() < 1e-15);
        let g = m.evaluate([0.0, 0.0, 0.5]).unwrap();
        assert!((g[(0, 0)] - 0.25f64.exp()).abs() < 1e-15);
        assert!((g[(0, 0)] - 1.2840254).abs() < 1e-7);
        let j = m.jet([0.0; 3], 3).unwrap();
        assert!((j[0][0].derivative([0, 0, 2]) - 2.0).abs() < 1e-14);
        let m = conformal("x3^3/6");
        let j = m.jet([0.0; 3], 3).unwrap();
        assert!((j[1][1].derivative([0, 0, 3]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conformal_rejects_planar_dependence() {
        assert!(MetricField::conformal(parse_expression("x1*x3").unwrap(), Rect::UNIT).is_err());
    }

    #[test]
    fn diagonal_roots() {
        let m = MetricField::constant(Mat3::from_diagonal(&[4.0, 1.0, 1.0].into()), Rect::UNIT);
        let s = m.inverse_sqrt([0.0; 3]).unwrap();
        assert!((s - Mat3::from_diagonal(&[0.5, 1.0, 1.0].into())).norm() < 1e-15);
    }

    #[test]
    fn spd_reports() {
        let grid = MidplateGrid::unit(5);
        let z = Expr::Const(0.0);
        let one = Expr::Const(1.0);
        let shifted = MetricField::general(
            [one.clone(), z.clone(), z.clone(), one.clone(), z.clone(), parse_expression("x3 + 1").unwrap()],
            Rect::UNIT,
        );
        let r = shifted.check_spd(&grid, 5);
        assert!(r.pass);
        assert!((r.min_eigenvalue - 0.5).abs() < 1e-14);
        let degenerate = MetricField::general(
            [one.clone(), z.clone(), z.clone(), one, z, parse_expression("x3").unwrap()],
            Rect::UNIT,
        );
        let r = degenerate.check_spd(&grid, 5);
        assert!(!r.pass);
        assert!(r.witness.unwrap()[2] <= 0.0);
        assert!(matches!(
            degenerate.evaluate([0.0, 0.0, -0.1]),
            Err(MetricError::NotPositiveDefinite { .. })
        ));
        let id = MetricField::identity(Rect::UNIT).check_spd(&grid, 3);
        assert!(id.pass && (id.min_eigenvalue - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pullback_of_identity_map() {
        let jac: [[Expr; 3]; 3] =
            std::array::from_fn(|c| std::array::from_fn(|a| Expr::Const(if a == c { 1.0 } else { 0.0 })));
        let m = MetricField::pullback(&jac, Rect::UNIT);
        assert_eq!(m.evaluate([0.1, 0.2, 0.3]).unwrap(), Mat3::identity());
    }
}
