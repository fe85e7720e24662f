//! Uniform midplate grids, finite differences and nodal quadrature.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle `[x1.0, x1.1] × [x2.0, x2.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

impl Rect {
    pub const UNIT: Rect = Rect { x1: [0.0, 1.0], x2: [0.0, 1.0] };

    pub fn new(x1: [f64; 2], x2: [f64; 2]) -> Rect {
        Rect { x1, x2 }
    }

    pub fn area(&self) -> f64 {
        (self.x1[1] - self.x1[0]) * (self.x2[1] - self.x2[0])
    }

    pub fn centroid(&self) -> [f64; 2] {
        [0.5 * (self.x1[0] + self.x1[1]), 0.5 * (self.x2[0] + self.x2[1])]
    }
}

/// Uniform tensor grid on a rectangle. Node `(i, j)` is stored at `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidplateGrid {
    pub nx: usize,
    pub ny: usize,
    pub bounds: Rect,
}

impl MidplateGrid {
    pub fn new(nx: usize, ny: usize, bounds: Rect) -> MidplateGrid {
        assert!(nx >= 2 && ny >= 2, "grid needs at least 2 nodes per axis");
        MidplateGrid { nx, ny, bounds }
    }

    pub fn unit(n: usize) -> MidplateGrid {
        MidplateGrid::new(n, n, Rect::UNIT)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.bounds.x1[1] - self.bounds.x1[0]) / (self.nx - 1) as f64,
            (self.bounds.x2[1] - self.bounds.x2[0]) / (self.ny - 1) as f64,
        ]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        let [dx, dy] = self.spacing();
        [self.bounds.x1[0] + i as f64 * dx, self.bounds.x2[0] + j as f64 * dy]
    }

    pub fn node_coord(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.ij(node);
        self.coord(i, j)
    }

    pub fn coords(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|n| self.node_coord(n)).collect()
    }

    /// Node closest to the centroid (ties broken towards lower indices).
    pub fn central_node(&self) -> (usize, usize) {
        ((self.nx - 1) / 2, (self.ny - 1) / 2)
    }

    /// Nodes where the centred five-point stencil applies on both axes.
    pub fn is_interior(&self, node: usize) -> bool {
        let (i, j) = self.ij(node);
        i >= 2 && j >= 2 && i + 3 <= self.nx && j + 3 <= self.ny
    }

    /// Tensor trapezoid weights; they sum to the rectangle area.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let [dx, dy] = self.spacing();
        let w1 = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        (0..self.len())
            .map(|node| {
                let (i, j) = self.ij(node);
                w1(i, self.nx) * w1(j, self.ny) * dx * dy
            })
            .collect()
    }

    /// Same geometry with `2(n-1)+1` nodes per axis.
    pub fn refined(&self) -> MidplateGrid {
        MidplateGrid::new(2 * self.nx - 1, 2 * self.ny - 1, self.bounds)
    }
}

/// Fourth-order stencil weights (times `12 Δ`) for the derivative at node `i` of `n`.
fn stencil(i: usize, n: usize) -> (usize, [f64; 5]) {
    const LEFT0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const LEFT1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    let neg = |w: [f64; 5]| [-w[4], -w[3], -w[2], -w[1], -w[0]];
    if i == 0 {
        (0, LEFT0)
    } else if i == 1 {
        (0, LEFT1)
    } else if i + 1 == n {
        (n - 5, neg(LEFT0))
    } else if i + 2 == n {
        (n - 5, neg(LEFT1))
    } else {
        (i - 2, CENTRAL)
    }
}

/// Derivative of a nodal scalar field along `axis`; needs at least 5 nodes on that axis.
pub fn diff(grid: &MidplateGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    diff_into(grid, f, axis, 1, &mut out, 1);
    out
}

/// Strided variant used for vector-valued fields: reads component `f[node*stride_in]`.
fn diff_into(grid: &MidplateGrid, f: &[f64], axis: usize, stride_in: usize, out: &mut [f64], stride_out: usize) {
    let n = if axis == 0 { grid.nx } else { grid.ny };
    assert!(n >= 5, "fourth-order differences need at least 5 nodes per axis");
    let h = grid.spacing()[axis];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let pos = if axis == 0 { i } else { j };
            let (start, w) = stencil(pos, n);
            let mut acc = 0.0;
            for (s, ws) in w.iter().enumerate() {
                if *ws == 0.0 {
                    continue;
                }
                let q = start + s;
                let node = if axis == 0 { grid.index(q, j) } else { grid.index(i, q) };
                acc += ws * f[node * stride_in];
            }
            out[grid.index(i, j) * stride_out] = acc / (12.0 * h);
        }
    }
}

/// Adjoint of [`diff`] with respect to the plain Euclidean inner product.
pub fn diff_transpose(grid: &MidplateGrid, g: &[f64], axis: usize) -> Vec<f64> {
    let n = if axis == 0 { grid.nx } else { grid.ny };
    let h = grid.spacing()[axis];
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let pos = if axis == 0 { i } else { j };
            let (start, w) = stencil(pos, n);
            let gv = g[grid.index(i, j)] / (12.0 * h);
            for (s, ws) in w.iter().enumerate() {
                let q = start + s;
                let node = if axis == 0 { grid.index(q, j) } else { grid.index(i, q) };
                out[node] += ws * gv;
            }
        }
    }
    out
}

/// Componentwise gradient of a nodal 3-vector field: `(∂1 f, ∂2 f)`.
pub fn gradient3(grid: &MidplateGrid, f: &[[f64; 3]]) -> Vec<[[f64; 3]; 2]> {
    let mut out = vec![[[0.0; 3]; 2]; grid.len()];
    for c in 0..3 {
        let comp: Vec<f64> = f.iter().map(|v| v[c]).collect();
        for axis in 0..2 {
            let d = diff(grid, &comp, axis);
            for (o, v) in out.iter_mut().zip(d) {
                o[axis][c] = v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_is_differentiated_exactly() {
        let g = MidplateGrid::new(9, 7, Rect::new([-1.0, 2.0], [0.0, 1.0]));
        let f: Vec<f64> = g.coords().iter().map(|p| p[0].powi(4) + p[0] * p[1].powi(3)).collect();
        let d1 = diff(&g, &f, 0);
        let d2 = diff(&g, &f, 1);
        for (n, p) in g.coords().iter().enumerate() {
            assert!((d1[n] - (4.0 * p[0].powi(3) + p[1].powi(3))).abs() < 1e-11);
            assert!((d2[n] - 3.0 * p[0] * p[1].powi(2)).abs() < 1e-11);
        }
    }

    #[test]
    fn transpose_is_adjoint() {
        let g = MidplateGrid::new(8, 6, Rect::UNIT);
        let f: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let h: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.91).cos()).collect();
        for axis in 0..2 {
            let lhs: f64 = diff(&g, &f, axis).iter().zip(&h).map(|(a, b)| a * b).sum();
            let rhs: f64 = f.iter().zip(diff_transpose(&g, &h, axis)).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn weights_sum_to_area() {
        let g = MidplateGrid::new(5, 11, Rect::new([0.0, 2.0], [1.0, 4.0]));
        let s: f64 = g.trapezoid_weights().iter().sum();
        assert!((s - 6.0).abs() < 1e-14);
    }

    #[test]
    fn interior_nodes() {
        let g = MidplateGrid::unit(7);
        let count = (0..g.len()).filter(|&n| g.is_interior(n)).count();
        assert_eq!(count, 9);
        assert_eq!(g.central_node(), (3, 3));
    }
}
