//! Truncated multivariate Taylor arithmetic in `(x1, x2, x3)`.
//!
//! A jet carries every monomial `x1^k1 x2^k2 x3^k3` with `k1+k2+k3 <= order`
//! and `k1+k2 <= planar`. Both bounds describe a downward-closed index set, so
//! products truncated to the set are exact. Internally coefficients are stored
//! in Taylor form (divided by `k1! k2! k3!`); [`Jet::derivative`] returns the
//! raw partial derivative.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use super::ast::Var;

/// Truncation pattern of a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetShape {
    /// Bound on the total degree `k1+k2+k3`.
    pub order: u32,
    /// Bound on the in-plane degree `k1+k2`.
    pub planar: u32,
}

impl JetShape {
    pub fn new(order: u32, planar: u32) -> JetShape {
        JetShape { order, planar: planar.min(order) }
    }

    /// All multi-indices of total degree at most `order`.
    pub fn full(order: u32) -> JetShape {
        JetShape { order, planar: order }
    }

    pub fn contains(&self, k: [u32; 3]) -> bool {
        k[0] + k[1] + k[2] <= self.order && k[0] + k[1] <= self.planar
    }

    /// Largest shape contained in both.
    pub fn meet(self, other: JetShape) -> JetShape {
        JetShape::new(self.order.min(other.order), self.planar.min(other.planar))
    }

    /// Shape of the jet after one differentiation along `axis` (0-based).
    pub fn after_partial(self, axis: usize) -> Option<JetShape> {
        if self.order == 0 {
            return None;
        }
        if axis == 2 {
            Some(JetShape::new(self.order - 1, self.planar))
        } else if self.planar == 0 {
            None
        } else {
            Some(JetShape::new(self.order - 1, self.planar - 1))
        }
    }

    /// Number of stored coefficients.
    pub fn num_coeffs(&self) -> usize {
        layout(*self).indices.len()
    }
}

#[derive(Debug)]
struct Layout {
    shape: JetShape,
    indices: Vec<[u32; 3]>,
    lookup: Vec<u32>,
    /// `(lhs, rhs, out)` triples of the truncated Cauchy product.
    products: Vec<(u32, u32, u32)>,
}

const ABSENT: u32 = u32::MAX;

impl Layout {
    fn build(shape: JetShape) -> Layout {
        let side = shape.order as usize + 1;
        let mut indices = Vec::new();
        for total in 0..=shape.order {
            for k3 in (0..=total).rev() {
                let plane = total - k3;
                if plane > shape.planar {
                    continue;
                }
                for k2 in 0..=plane {
                    indices.push([plane - k2, k2, k3]);
                }
            }
        }
        let mut lookup = vec![ABSENT; side * side * side];
        for (i, k) in indices.iter().enumerate() {
            lookup[Self::slot(side, *k)] = i as u32;
        }
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let c = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if shape.contains(c) {
                    products.push((i as u32, j as u32, lookup[Self::slot(side, c)]));
                }
            }
        }
        Layout { shape, indices, lookup, products }
    }

    fn slot(side: usize, k: [u32; 3]) -> usize {
        (k[0] as usize * side + k[1] as usize) * side + k[2] as usize
    }

    fn index_of(&self, k: [u32; 3]) -> Option<usize> {
        if !self.shape.contains(k) {
            return None;
        }
        let side = self.shape.order as usize + 1;
        let i = self.lookup[Self::slot(side, k)];
        (i != ABSENT).then_some(i as usize)
    }
}

fn layout(shape: JetShape) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<JetShape, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(shape).or_insert_with(|| Arc::new(Layout::build(shape))).clone()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Truncated Taylor expansion of a scalar around a base point.
#[derive(Clone)]
pub struct Jet {
    point: [f64; 3],
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (k, c) in self.layout.indices.iter().zip(&self.coeffs) {
            if *c != 0.0 {
                m.entry(k, &self.derivative(*k));
            }
        }
        m.finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.point == other.point && self.shape() == other.shape() && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(point: [f64; 3], shape: JetShape) -> Jet {
        let layout = layout(shape);
        let coeffs = vec![0.0; layout.indices.len()];
        Jet { point, layout, coeffs }
    }

    pub fn constant(value: f64, point: [f64; 3], shape: JetShape) -> Jet {
        let mut j = Jet::zero(point, shape);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `v` expanded at `point`.
    pub fn variable(v: Var, point: [f64; 3], shape: JetShape) -> Jet {
        let mut j = Jet::constant(point[v.index()], point, shape);
        let mut k = [0; 3];
        k[v.index()] = 1;
        if let Some(i) = j.layout.index_of(k) {
            j.coeffs[i] = 1.0;
        }
        j
    }

    /// Build from raw partial derivatives; `f` is queried for every index of the shape.
    pub fn from_derivatives(point: [f64; 3], shape: JetShape, mut f: impl FnMut([u32; 3]) -> f64) -> Jet {
        let mut j = Jet::zero(point, shape);
        for (i, k) in j.layout.indices.iter().enumerate() {
            j.coeffs[i] = f(*k) / (factorial(k[0]) * factorial(k[1]) * factorial(k[2]));
        }
        j
    }

    pub fn shape(&self) -> JetShape {
        self.layout.shape
    }

    pub fn point(&self) -> [f64; 3] {
        self.point
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Multi-indices carried by this jet, in storage order.
    pub fn indices(&self) -> &[[u32; 3]] {
        &self.layout.indices
    }

    /// Taylor coefficient of `x^k`; zero outside the shape.
    pub fn taylor(&self, k: [u32; 3]) -> f64 {
        self.layout.index_of(k).map_or(0.0, |i| self.coeffs[i])
    }

    /// Raw partial derivative `∂1^k1 ∂2^k2 ∂3^k3`; `None` outside the shape.
    pub fn get(&self, k: [u32; 3]) -> Option<f64> {
        self.layout
            .index_of(k)
            .map(|i| self.coeffs[i] * factorial(k[0]) * factorial(k[1]) * factorial(k[2]))
    }

    /// Raw partial derivative; panics if `k` lies outside the shape.
    pub fn derivative(&self, k: [u32; 3]) -> f64 {
        self.get(k)
            .unwrap_or_else(|| panic!("multi-index {k:?} outside jet shape {:?}", self.shape()))
    }

    /// Raw normal derivatives `∂3^k f` for `k = 0..=order`.
    pub fn normal_derivatives(&self) -> Vec<f64> {
        (0..=self.shape().order).map(|k| self.derivative([0, 0, k])).collect()
    }

    /// Drop all coefficients outside `shape` (which must be no larger).
    pub fn restrict(&self, shape: JetShape) -> Jet {
        let shape = shape.meet(self.shape());
        if shape == self.shape() {
            return self.clone();
        }
        let mut out = Jet::zero(self.point, shape);
        for (i, k) in out.layout.indices.iter().enumerate() {
            out.coeffs[i] = self.taylor(*k);
        }
        out
    }

    /// Exact differentiation along `axis` (0-based); `None` if the shape has no room.
    pub fn partial(&self, axis: usize) -> Option<Jet> {
        let shape = self.shape().after_partial(axis)?;
        let mut out = Jet::zero(self.point, shape);
        for (i, k) in out.layout.indices.iter().enumerate() {
            let mut up = *k;
            up[axis] += 1;
            out.coeffs[i] = f64::from(up[axis]) * self.taylor(up);
        }
        Some(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Max absolute raw derivative over the whole jet.
    pub fn max_abs_derivative(&self) -> f64 {
        self.layout
            .indices
            .iter()
            .map(|k| self.derivative(*k).abs())
            .fold(0.0, f64::max)
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        debug_assert_eq!(self.point, other.point, "jets expanded at different points");
        if self.shape() == other.shape() {
            (Cow::Borrowed(self), Cow::Borrowed(other))
        } else {
            let s = self.shape().meet(other.shape());
            (Cow::Owned(self.restrict(s)), Cow::Owned(other.restrict(s)))
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut out = Jet::zero(a.point, a.shape());
        for &(i, j, o) in &a.layout.products {
            out.coeffs[o as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        out
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        let mut out = a.into_owned();
        out.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x = f(*x, *y));
        out
    }

    /// `Σ c_j (self − value)^j`, evaluated by Horner's scheme.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut tail = self.clone();
        tail.coeffs[0] = 0.0;
        let mut out = Jet::constant(*series.last().unwrap_or(&0.0), self.point, self.shape());
        for c in series.iter().rev().skip(1) {
            out = out.mul_jet(&tail);
            out.coeffs[0] += c;
        }
        out
    }

    fn terms(&self) -> usize {
        self.shape().order as usize + 1
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.terms());
        let mut fact = 1.0;
        for j in 0..self.terms() {
            if j > 0 {
                fact *= j as f64;
            }
            series.push(e / fact);
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet, &'static str> {
        let u = self.value();
        if u <= 0.0 {
            return Err("log of a nonpositive value");
        }
        let mut series = vec![u.ln()];
        for j in 1..self.terms() {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (j as f64 * u.powi(j as i32)));
        }
        Ok(self.compose(&series))
    }

    fn trig(&self, phase: usize) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let mut series = Vec::with_capacity(self.terms());
        let mut fact = 1.0;
        for j in 0..self.terms() {
            if j > 0 {
                fact *= j as f64;
            }
            series.push(cycle[(j + phase) % 4] / fact);
        }
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(1)
    }

    pub fn sqrt(&self) -> Result<Jet, &'static str> {
        let u = self.value();
        if u < 0.0 {
            return Err("sqrt of a negative value");
        }
        if u == 0.0 {
            if self.coeffs.iter().skip(1).all(|c| *c == 0.0) {
                return Ok(Jet::zero(self.point, self.shape()));
            }
            return Err("sqrt is not differentiable at zero");
        }
        // Binomial series of (u + t)^(1/2).
        let mut series = Vec::with_capacity(self.terms());
        let mut binom = 1.0;
        for j in 0..self.terms() {
            if j > 0 {
                binom *= (0.5 - (j - 1) as f64) / j as f64;
            }
            series.push(binom * u.sqrt() / u.powi(j as i32));
        }
        Ok(self.compose(&series))
    }

    pub fn recip(&self) -> Result<Jet, &'static str> {
        let u = self.value();
        if u == 0.0 {
            return Err("division by zero");
        }
        let series: Vec<f64> = (0..self.terms())
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / u.powi(j as i32 + 1))
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, &'static str> {
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, &'static str> {
        if k < 0 {
            if self.value() == 0.0 {
                return Err("negative power of zero");
            }
            return self.recip()?.powi(-k);
        }
        let mut result = Jet::constant(1.0, self.point, self.shape());
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(result)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const O: [f64; 3] = [0.0; 3];

    fn x(i: usize, p: [f64; 3], s: JetShape) -> Jet {
        Jet::variable(Var::ALL[i], p, s)
    }

    #[test]
    fn layout_respects_planar_bound() {
        let s = JetShape::new(4, 1);
        let l = layout(s);
        assert!(l.indices.iter().all(|k| k[0] + k[1] <= 1));
        // x3 powers 0..4 plus (x1|x2) * x3^0..3
        assert_eq!(l.indices.len(), 5 + 2 * 4);
        assert_eq!(l.indices[0], [0, 0, 0]);
    }

    #[test]
    fn cubic_monomial() {
        let j = x(2, O, JetShape::full(3)).powi(3).unwrap();
        assert_eq!(j.derivative([0, 0, 3]), 6.0);
        for k in j.indices() {
            if *k != [0, 0, 3] {
                assert_eq!(j.derivative(*k), 0.0);
            }
        }
    }

    #[test]
    fn exp_of_square() {
        let t = x(2, O, JetShape::full(4));
        let e = t.powi(2).unwrap().exp();
        assert_eq!(e.normal_derivatives(), vec![1.0, 0.0, 2.0, 0.0, 12.0]);
        let e = t.exp();
        assert!(e.normal_derivatives().iter().all(|d| (d - 1.0).abs() < 1e-15));
    }

    #[test]
    fn mixed_partials_of_product() {
        // f = x1^2 x2 x3 at (1,2,3): ∂1∂2∂3 f = 2 x1 = 2, ∂1^2 f = 2 x2 x3 = 12
        let p = [1.0, 2.0, 3.0];
        let s = JetShape::full(3);
        let f = &(&x(0, p, s).powi(2).unwrap() * &x(1, p, s)) * &x(2, p, s);
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.derivative([1, 1, 1]), 2.0);
        assert_eq!(f.derivative([2, 0, 0]), 12.0);
        assert_eq!(f.derivative([1, 0, 0]), 12.0);
    }

    #[test]
    fn transcendental_identities() {
        let p = [0.3, -0.2, 0.7];
        let s = JetShape::full(5);
        let u = &(&x(0, p, s) * &x(2, p, s)) + &x(1, p, s).add_scalar(2.0);
        let one = (&u.sin().powi(2).unwrap() + &u.cos().powi(2).unwrap()).add_scalar(-1.0);
        assert!(one.max_abs_derivative() < 1e-12);
        let back = &u.ln().unwrap().exp() - &u;
        assert!(back.max_abs_derivative() < 1e-12);
        let sq = &u.sqrt().unwrap().powi(2).unwrap() - &u;
        assert!(sq.max_abs_derivative() < 1e-12);
        let q = &(&u * &u.recip().unwrap()).add_scalar(-1.0);
        assert!(q.max_abs_derivative() < 1e-12);
        let inv = &u.powi(-3).unwrap() * &u.powi(3).unwrap();
        assert!(inv.add_scalar(-1.0).max_abs_derivative() < 1e-12);
    }

    #[test]
    fn partial_shifts_shape() {
        let s = JetShape::new(5, 2);
        let p = [0.1, 0.2, 0.3];
        let f = (&x(0, p, s) * &x(2, p, s)).exp();
        let d3 = f.partial(2).unwrap();
        assert_eq!(d3.shape(), JetShape::new(4, 2));
        let d1 = f.partial(0).unwrap();
        assert_eq!(d1.shape(), JetShape::new(4, 1));
        for k in d1.indices() {
            let up = [k[0] + 1, k[1], k[2]];
            assert!((d1.derivative(*k) - f.derivative(up)).abs() < 1e-12);
        }
        assert!(JetShape::new(3, 0).after_partial(0).is_none());
    }

    #[test]
    fn mixed_shapes_meet() {
        let a = Jet::constant(2.0, O, JetShape::new(4, 2));
        let b = x(2, O, JetShape::new(3, 3));
        let c = &a * &b;
        assert_eq!(c.shape(), JetShape::new(3, 2));
        assert_eq!(c.derivative([0, 0, 1]), 2.0);
    }

    #[test]
    fn domain_errors() {
        let z = Jet::zero(O, JetShape::full(2));
        assert!(z.ln().is_err());
        assert!(z.recip().is_err());
        assert!(z.powi(-1).is_err());
        assert!(x(2, O, JetShape::full(2)).sqrt().is_err());
        assert_eq!(z.sqrt().unwrap().value(), 0.0);
    }
}
