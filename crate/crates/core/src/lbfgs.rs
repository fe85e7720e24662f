//! Limited-memory BFGS with a strong Wolfe line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when `|g| ≤ grad_tol_rel · |g0|`.
    pub grad_tol_rel: f64,
    pub grad_tol_abs: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_line_evals: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 12,
            max_iter: 500,
            grad_tol_rel: 1e-8,
            grad_tol_abs: 0.0,
            c1: 1e-4,
            c2: 0.9,
            max_line_evals: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimise `f`; the callback returns value and gradient, or an error that aborts the run.
/// Evaluation failures inside the line search are treated as "step too long".
pub fn minimize<E, F>(x0: Vec<f64>, opts: &LbfgsOptions, mut f: F) -> Result<LbfgsResult, E>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut evaluations = 1;
    let g0 = norm(&g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let done = |gn: f64| gn <= opts.grad_tol_abs || gn <= opts.grad_tol_rel * g0;
    let result = |x, f, g: &[f64], iterations, evaluations, termination| LbfgsResult {
        x,
        f,
        grad_norm: norm(g),
        iterations,
        evaluations,
        termination,
    };
    loop {
        if done(norm(&g)) {
            return Ok(result(x, fx, &g, iterations, evaluations, Termination::Converged));
        }
        if iterations >= opts.max_iter {
            return Ok(result(x, fx, &g, iterations, evaluations, Termination::MaxIterations));
        }
        // Two-loop recursion.
        let mut q: Vec<f64> = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = hist.back().map(|(s, y, _)| dot(s, y) / dot(y, y)).unwrap_or(1.0 / norm(&g).max(f64::MIN_POSITIVE));
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut dg = dot(&d, &g);
        if dg >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v / norm(&g)).collect();
            dg = dot(&d, &g);
        }
        let ls = line_search(&mut f, &x, fx, dg, &d, opts, &mut evaluations)?;
        let Some((alpha, fnew, gnew)) = ls else {
            if !hist.is_empty() {
                hist.clear();
                iterations += 1;
                continue;
            }
            return Ok(result(x, fx, &g, iterations, evaluations, Termination::LineSearchFailed));
        };
        let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let sy = dot(&s, &y);
        if sy > 0.0 {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > opts.memory {
                hist.pop_front();
            }
        }
        fx = fnew;
        g = gnew;
        iterations += 1;
    }
}

type Trial = (f64, f64, Vec<f64>);

/// Strong Wolfe search along `d`; `Ok(None)` when no acceptable step is found.
fn line_search<E, F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    dg0: f64,
    d: &[f64],
    opts: &LbfgsOptions,
    evaluations: &mut usize,
) -> Result<Option<(f64, f64, Vec<f64>)>, E>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
{
    let mut eval = |alpha: f64| -> Result<Option<Trial>, E> {
        *evaluations += 1;
        let xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        match f(&xt) {
            Ok((ft, gt)) if ft.is_finite() => {
                let dgt = dot(&gt, d);
                Ok(Some((ft, dgt, gt)))
            }
            Ok(_) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let armijo = |alpha: f64, ft: f64| ft <= f0 + opts.c1 * alpha * dg0;
    let curvature = |dgt: f64| dgt.abs() <= -opts.c2 * dg0;

    let (mut lo, mut hi): ((f64, f64, f64), Option<(f64, f64, f64)>) = ((0.0, f0, dg0), None);
    let mut alpha = 1.0;
    for _ in 0..opts.max_line_evals {
        let trial = eval(alpha).unwrap_or_default();
        let Some((ft, dgt, gt)) = trial else {
            hi = Some((alpha, f64::INFINITY, 0.0));
            alpha = 0.5 * (lo.0 + alpha);
            continue;
        };
        if !armijo(alpha, ft) || ft >= lo.1 && lo.0 > 0.0 {
            hi = Some((alpha, ft, dgt));
        } else {
            if curvature(dgt) {
                return Ok(Some((alpha, ft, gt)));
            }
            if dgt >= 0.0 {
                hi = Some(lo);
                lo = (alpha, ft, dgt);
            } else {
                lo = (alpha, ft, dgt);
            }
        }
        alpha = match hi {
            None => 2.0 * alpha,
            Some(h) => {
                // Safeguarded quadratic interpolation from the low end.
                let (a0, f0l, d0) = lo;
                let (a1, f1, _) = h;
                let span = a1 - a0;
                let denom = 2.0 * (f1 - f0l - d0 * span);
                let mut next = if f1.is_finite() && denom > 0.0 { a0 - d0 * span * span / denom } else { a0 + 0.5 * span };
                let (lo_b, hi_b) = if span > 0.0 { (a0 + 0.1 * span, a1 - 0.1 * span) } else { (a1 - 0.1 * span, a0 + 0.1 * span) };
                if !(next > lo_b.min(hi_b) && next < lo_b.max(hi_b)) {
                    next = a0 + 0.5 * span;
                }
                next
            }
        };
        if let Some(h) = hi {
            if (h.0 - lo.0).abs() <= 1e-14 * h.0.abs().max(lo.0.abs()) {
                break;
            }
        }
    }
    // Fall back to any sufficient decrease point found.
    if lo.0 > 0.0 {
        if let Some((ft, _, gt)) = eval(lo.0)? {
            if ft < f0 {
                return Ok(Some((lo.0, ft, gt)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize::<(), _>(vec![-1.2, 1.0], &LbfgsOptions { max_iter: 200, grad_tol_abs: 1e-10, ..Default::default() }, |x| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Ok((f, g))
        })
        .unwrap();
        assert_eq!(r.termination, Termination::Converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_in_many_dims() {
        let n = 50;
        let r = minimize::<(), _>(vec![1.0; n], &LbfgsOptions::default(), |x| {
            let f: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum();
            let g = x.iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v).collect();
            Ok((f, g))
        })
        .unwrap();
        assert!(r.f < 1e-12);
    }
}
