//! Gauss-Hermite quadrature in the log domain.
//!
//! Error-rate integrals over log-normal fading become Gaussian-weighted
//! integrals after the substitution `h = e^z`. Their integrands span hundreds
//! of orders of magnitude at high SNR, so rules are kept as log-weights and
//! sums are taken with log-sum-exp. [`log_integrate`] recentres the rule on
//! the integrand's mode (adaptive Gauss-Hermite), which keeps the nodes where
//! the mass is even when the mass sits far in the tail of the prior.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Default node count.
pub const DEFAULT_NODES: usize = 200;

/// Relative agreement required between `n` and `2n` nodes.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Largest supported node count; beyond it the recurrence overflows at the
/// outermost roots.
pub const MAX_NODES: usize = 500;

/// Grid step for root bracketing, below the minimum root gap for `MAX_NODES`.
const SCAN_STEP: f64 = 0.01;

/// `(p_n(x), p_{n-1}(x))` of the orthonormal Hermite recurrence.
fn hermite(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

fn polish_root(n: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let sign_lo = hermite(n, lo).0.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (p, pm1) = hermite(n, x);
        if p == 0.0 {
            return Ok(x);
        }
        if p.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - p / ((2.0 * n as f64).sqrt() * pm1);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Quadrature {
        achieved: hi - lo,
        requested: f64::EPSILON,
    })
}

/// `ln w = ln 2 - 2 ln |p_n'(x)|` with `p_n' = sqrt(2n) p_{n-1}`.
fn log_weight(n: usize, x: f64) -> f64 {
    let d = (2.0 * n as f64).sqrt() * hermite(n, x).1;
    std::f64::consts::LN_2 - 2.0 * d.abs().ln()
}

/// A Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule. Roots of the orthonormal Hermite function
    /// are bracketed by a sign scan on a grid finer than the smallest root
    /// gap and polished by safeguarded Newton steps.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::invalid(format!("node count must be in 1..={MAX_NODES}, got {n}")));
        }
        let half = n.div_ceil(2);
        let upper = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
        let steps = (upper / SCAN_STEP).ceil() as usize;

        // Positive roots (and 0 for odd n), in increasing order.
        let mut roots = Vec::with_capacity(half);
        if n % 2 == 1 {
            roots.push(0.0);
        }
        let mut prev_x = if n % 2 == 1 { 1e-9 } else { 0.0 };
        let mut prev_v = hermite(n, prev_x).0;
        for k in 1..=steps {
            let x = k as f64 * SCAN_STEP;
            let v = hermite(n, x).0;
            if v == 0.0 || v.signum() != prev_v.signum() {
                roots.push(polish_root(n, prev_x, x)?);
            }
            prev_x = x;
            prev_v = v;
        }
        if roots.len() != half {
            return Err(Error::Quadrature {
                achieved: roots.len() as f64,
                requested: half as f64,
            });
        }

        let mut nodes = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        let skip_zero = usize::from(n % 2 == 1);
        for &x in roots[skip_zero..].iter().rev() {
            nodes.push(-x);
            log_weights.push(log_weight(n, x));
        }
        for &x in &roots {
            nodes.push(x);
            log_weights.push(log_weight(n, x));
        }
        Ok(GaussHermite { nodes, log_weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `int f(x) exp(-x^2) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&x, &lw)| lw.exp() * f(x))
            .sum()
    }
}

/// Shared 200- and 400-point rules.
pub fn standard_rules() -> &'static (GaussHermite, GaussHermite) {
    static RULES: OnceLock<(GaussHermite, GaussHermite)> = OnceLock::new();
    RULES.get_or_init(|| {
        (
            GaussHermite::new(DEFAULT_NODES).expect("200-point rule"),
            GaussHermite::new(2 * DEFAULT_NODES).expect("400-point rule"),
        )
    })
}

/// `ln sum_i exp(v_i)` without overflow; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln int exp(g(z)) dz` with the rule centred at `mode` and stretched by
/// `scale` (ideally `1/sqrt(-g''(mode))`).
pub fn log_integrate_with<G: Fn(f64) -> f64>(
    rule: &GaussHermite,
    g: &G,
    mode: f64,
    scale: f64,
) -> f64 {
    let stretch = std::f64::consts::SQRT_2 * scale;
    let terms = rule
        .nodes
        .iter()
        .zip(&rule.log_weights)
        .map(|(&x, &lw)| lw + x * x + g(mode + stretch * x));
    stretch.ln() + log_sum_exp(terms)
}

/// [`log_integrate_with`] on the default rule, validated against the rule
/// with twice as many nodes. Returns the finer estimate.
pub fn log_integrate<G: Fn(f64) -> f64>(g: G, mode: f64, scale: f64) -> Result<f64> {
    let (coarse, fine) = standard_rules();
    let a = log_integrate_with(coarse, &g, mode, scale);
    let b = log_integrate_with(fine, &g, mode, scale);
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            requested: DEFAULT_TOLERANCE,
        });
    }
    // Relative error of the integral itself, from the difference of logs.
    let achieved = (a - b).exp_m1().abs();
    if achieved > DEFAULT_TOLERANCE {
        return Err(Error::Quadrature {
            achieved,
            requested: DEFAULT_TOLERANCE,
        });
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn small_rules_match_closed_forms() {
        let r2 = GaussHermite::new(2).unwrap();
        let x = 0.5f64.sqrt();
        assert!((r2.nodes()[0] + x).abs() < 1e-15 && (r2.nodes()[1] - x).abs() < 1e-15);
        for lw in r2.log_weights() {
            assert!((lw.exp() - SQRT_PI / 2.0).abs() < 1e-15);
        }
        let r3 = GaussHermite::new(3).unwrap();
        assert!(r3.nodes()[1].abs() < 1e-15);
        assert!((r3.log_weights()[1].exp() - 2.0 * SQRT_PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn moments_of_large_rules() {
        let (r200, r400) = standard_rules();
        for r in [r200, r400] {
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            let m0 = r.integrate(|_| 1.0);
            let m2 = r.integrate(|x| x * x);
            let m4 = r.integrate(|x| x.powi(4));
            assert!((m0 / SQRT_PI - 1.0).abs() < 1e-13);
            assert!((m2 / (SQRT_PI / 2.0) - 1.0).abs() < 1e-12);
            assert!((m4 / (3.0 * SQRT_PI / 4.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lognormal_density_integrates_to_one() {
        // After h = e^z the density is N(mu, sigma^2) in z.
        for sigma in [0.1, 0.5, 1.0, 3.0] {
            let g = |z: f64| -z * z / (2.0 * sigma * sigma) - (2.0 * std::f64::consts::PI).sqrt().ln() - sigma.ln();
            let v = log_integrate(g, 0.0, sigma).unwrap();
            assert!(v.exp_m1().abs() < 1e-9, "sigma = {sigma}");
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        let v = log_sum_exp(vec![-1000.0, -1000.0]);
        assert!((v - (-1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        assert!(matches!(log_integrate(|_| f64::NAN, 0.0, 1.0), Err(Error::Quadrature { .. })));
    }
}
