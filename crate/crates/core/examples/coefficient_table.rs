//! Limit-energy coefficients from the closed forms and from thickness moments.

use shellscale::quad_forms::{coefficients, coefficients_via_moments};

fn main() {
    println!("{:>2} {:>12} {:>12} {:>12} {:>12} {:>9}", "n", "alpha", "beta", "gamma", "delta", "routes");
    for n in 1..=8 {
        let (c, m) = (coefficients(n), coefficients_via_moments(n));
        let gap = [(c.alpha, m.alpha), (c.beta, m.beta), (c.gamma, m.gamma), (c.delta, m.delta)]
            .iter()
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        println!("{n:>2} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {gap:>9.1e}", c.alpha, c.beta, c.gamma, c.delta);
    }
}
