//! The densities `β₀`, `β_θ`, `α_θ` and quadrature rules for integrals
//! against them over the real line.
//!
//! With `u = tanh(πt/2)` the `β_θ` integral becomes an integral over
//! `(-1, 1)` with a smooth weight (constant `½` for `β₀`). The integrand
//! `g(t(u))` still has a logarithmic singularity at `u = ±1`, which limits
//! plain Gauss-Legendre to algebraic accuracy (about `2e-4` on the second
//! moment at 129 nodes). We therefore grade the endpoints with
//! `u = ψ(v)`, `ψ'(v) ∝ (1 − v²)^m`, and apply Gauss-Legendre in `v`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 129;
pub const MIN_NODES: usize = 3;

/// Endpoint grading exponent.
const GRADING: usize = 4;

/// `β₀(t) = (π/2) / (cosh(πt) + 1)`.
pub fn beta0(t: f64) -> f64 {
    (PI / 2.0) / ((PI * t).cosh() + 1.0)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    Ok(())
}

/// `β_θ(t) = sin(πθ) / (2θ (cosh(πt) + cos(πθ)))`; `θ = 0` gives `β₀`.
pub fn beta_theta(theta: f64, t: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(beta0(t));
    }
    check_theta(theta)?;
    Ok((PI * theta).sin() / (2.0 * theta * ((PI * t).cosh() + (PI * theta).cos())))
}

/// `α_θ(t) = sin(πθ) / (2(1−θ) (cosh(πt) − cos(πθ)))`.
pub fn alpha_theta(theta: f64, t: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((PI * theta).sin() / (2.0 * (1.0 - theta) * ((PI * t).cosh() - (PI * theta).cos())))
}

/// Values of the densities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValues {
    /// `α_θ(t)`; absent for `θ = 0`.
    pub alpha: Option<f64>,
    pub beta: f64,
}

pub fn beta_densities(t: f64, theta: f64) -> Result<DensityValues> {
    if theta == 0.0 {
        return Ok(DensityValues {
            alpha: None,
            beta: beta0(t),
        });
    }
    Ok(DensityValues {
        alpha: Some(alpha_theta(theta, t)?),
        beta: beta_theta(theta, t)?,
    })
}

/// Cumulative distribution of `β_θ` (`θ = 0` allowed).
pub fn beta_theta_cdf(theta: f64, t: f64) -> Result<f64> {
    let u = (PI * t / 2.0).tanh();
    if theta == 0.0 {
        return Ok(0.5 * (1.0 + u));
    }
    check_theta(theta)?;
    let k = (PI * theta / 2.0).tan();
    Ok(0.5 + (k * u).atan() / (PI * theta))
}

/// Nodes and positive weights for `∫ dt p(t) g(t) ≈ Σ w_k g(t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Validates finite sorted nodes, positive weights summing to 1 ± 1e-12.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::domain("quadrature needs equally many nodes and weights"));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("quadrature nodes must be finite and sorted"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::domain("quadrature weights must be positive"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("quadrature weights sum to {sum}")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `(P_n(z), P_{n-1}(z))` from the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss-Legendre nodes on `[-1, 1]` in ascending order, by Newton's method.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n / 2 + n % 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, pm) = legendre_pair(n, z);
            let dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
        }
        let (pn, pm) = legendre_pair(n, z);
        let dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The grading map `ψ(v) = ∫₀^v (1−s²)^m ds / c` on `[0, 1]`, returned as
/// `(ψ(v), 1 − ψ(v), ψ'(v))`. The tail is computed directly so that
/// `1 − ψ` keeps full relative accuracy near `v = 1`.
fn grading(v: f64) -> (f64, f64, f64) {
    let m = GRADING;
    let c: f64 = (0..=m)
        .map(|k| binomial(m, k) * if k % 2 == 0 { 1.0 } else { -1.0 } / (2 * k + 1) as f64)
        .sum();
    let x = 1.0 - v;
    // ∫_v^1 (1−s²)^m ds = ∫_0^x y^m (2−y)^m dy.
    let tail: f64 = (0..=m)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            binomial(m, k) * 2f64.powi((m - k) as i32) * sign * x.powi((m + k + 1) as i32)
                / (m + k + 1) as f64
        })
        .sum::<f64>()
        / c;
    let deriv = (1.0 - v * v).powi(m as i32) / c;
    (1.0 - tail, tail, deriv)
}

/// Graded rule for `∫_{-1}^{1} q(u) g(t(u)) du` with `t = (2/π) atanh(u)`.
///
/// Only nonnegative nodes are computed; the rule is mirrored so that it is
/// exactly symmetric. Weights are normalized to sum to one.
fn graded_rule(n: usize, q: impl Fn(f64) -> f64) -> Result<QuadratureRule> {
    if n < MIN_NODES {
        return Err(Error::domain(format!("need at least {MIN_NODES} quadrature nodes, got {n}")));
    }
    let (v, w) = gauss_legendre(n);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in n / 2..n {
        let vk = v[k].max(0.0);
        let (u, one_minus_u, dpsi) = grading(vk);
        let t = ((1.0 + u).ln() - one_minus_u.ln()) / PI;
        let wk = w[k] * dpsi * q(u);
        nodes[k] = t;
        weights[k] = wk;
        let mirror = n - 1 - k;
        if mirror != k {
            nodes[mirror] = -t;
            weights[mirror] = wk;
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    QuadratureRule::new(nodes, weights)
}

/// Rule for `∫ dt β₀(t) (·)`.
pub fn beta0_quadrature(n: usize) -> Result<QuadratureRule> {
    graded_rule(n, |_| 0.5)
}

/// Rule for `∫ dt β_θ(t) (·)`, `θ ∈ [0, 1)`.
///
/// In `u = tanh(πt/2)` the density is `k / (πθ (1 + k² u²))` with
/// `k = tan(πθ/2)`.
pub fn beta_theta_quadrature(theta: f64, n: usize) -> Result<QuadratureRule> {
    if theta == 0.0 {
        return beta0_quadrature(n);
    }
    check_theta(theta)?;
    let k = (PI * theta / 2.0).tan();
    graded_rule(n, move |u| k / (PI * theta * (1.0 + k * k * u * u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta0_values() {
        assert!((beta0(0.0) - PI / 4.0).abs() < 1e-15);
        // (π/2) / (cosh π + 1) evaluated independently.
        let expected = (PI / 2.0) / (0.5 * (PI.exp() + (-PI).exp()) + 1.0);
        assert!((beta0(1.0) - expected).abs() < 1e-15);
        assert!((beta0(1.0) - 0.124746).abs() < 1e-6);
    }

    #[test]
    fn beta_theta_tends_to_beta0() {
        let b = beta_theta(0.001, 0.7).unwrap();
        assert!((b - beta0(0.7)).abs() < 1e-3);
        assert!(beta_theta(1.0, 0.0).is_err());
        assert!(alpha_theta(0.0, 1.0).is_err());
        let d = beta_densities(0.3, 0.5).unwrap();
        assert!(d.alpha.unwrap() > 0.0 && d.beta > 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // Exact for degree 13.
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((i - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn rule_sums_and_symmetry() {
        for n in [3, 4, 65, 129, 200] {
            let r = beta0_quadrature(n).unwrap();
            assert!((r.weight_sum() - 1.0).abs() < 1e-12);
            assert!(r.integrate(|t| t).abs() < 1e-10);
        }
        assert!(beta0_quadrature(2).is_err());
    }

    #[test]
    fn moments_match_closed_forms() {
        // β₀ is logistic with scale 1/π: E t² = 1/3, E t⁴ = 7/15.
        let r = beta0_quadrature(65).unwrap();
        assert!((r.integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-10);
        assert!((r.integrate(|t| t.powi(4)) - 7.0 / 15.0).abs() < 1e-9);
        // Characteristic function: E cos(sT) = s / sinh(s).
        let s: f64 = 3.0;
        assert!((r.integrate(|t| (s * t).cos()) - s / s.sinh()).abs() < 1e-9);
    }

    /// Composite trapezoid of `p(t) g(t)` on a wide uniform grid.
    fn trapezoid(p: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
        let (a, b, n) = (-40.0, 40.0, 400_000);
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| {
                let t = a + i as f64 * h;
                let c = if i == 0 || i == n { 0.5 } else { 1.0 };
                c * p(t) * g(t)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn beta_theta_rule_matches_trapezoid() {
        for theta in [0.1, 0.5, 0.9] {
            let r = beta_theta_quadrature(theta, 129).unwrap();
            assert!((r.weight_sum() - 1.0).abs() < 1e-12);
            let g = |t: f64| (1.0 + t * t).ln();
            let reference = trapezoid(|t| beta_theta(theta, t).unwrap(), g);
            assert!((r.integrate(g) - reference).abs() < 1e-8, "theta {theta}");
            let half = beta_theta_cdf(theta, 0.0).unwrap();
            assert!((half - 0.5).abs() < 1e-15);
            assert!((beta_theta_cdf(theta, 60.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
