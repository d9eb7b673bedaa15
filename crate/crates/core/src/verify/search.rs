use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{extended_f64, slack};
use crate::channel::QuantumChannel;
use crate::entropy::{
    fidelity_measurement, fidelity_with_sqrt, measured_relative_entropy_lb, relative_entropy,
    support_tolerance, EntropyValue,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian_with, hermitian_part, psd_sqrt_lenient, Operator};
use crate::recovery::{convex_mixture, PetzFactory, RecoveryMap};
use crate::state::{DensityOperator, PositiveOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStateRow {
    pub lhs: EntropyValue,
    pub fidelity: f64,
    /// `lhs + 2 ln F`.
    #[serde(with = "extended_f64")]
    pub fidelity_slack: f64,
    /// Divergence of the fidelity measurement outcomes.
    pub measured_lb: EntropyValue,
    /// `lhs − measured_lb`.
    #[serde(with = "extended_f64")]
    pub measured_slack: f64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub map: RecoveryMap,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub rows: Vec<SearchStateRow>,
    pub min_fidelity_slack: f64,
    /// Minimum over states of `lhs − D_M,lb(ρ‖(R∘N)(ρ))`.
    pub min_slack: f64,
}

struct Prepared {
    lhs: f64,
    sqrt_rho: Operator,
    /// `(R^{t_k}∘N)(ρ)` for each grid point.
    images: Vec<Operator>,
}

impl Prepared {
    fn mixed(&self, w: &[f64]) -> Operator {
        let d = self.sqrt_rho.nrows();
        let mut acc = Operator::zeros(d, d);
        for (tau, &wk) in self.images.iter().zip(w) {
            if wk != 0.0 {
                acc += tau * Complex64::new(wk, 0.0);
            }
        }
        acc
    }

    /// `lhs + 2 ln F(ρ, Σ w_k τ_k)` and the fidelity.
    fn value(&self, w: &[f64]) -> Result<(f64, f64)> {
        let f = fidelity_with_sqrt(&self.sqrt_rho, &self.mixed(w))?;
        let v = if f <= 0.0 { f64::NEG_INFINITY } else { self.lhs + 2.0 * f.ln() };
        Ok((v, f))
    }

    /// Gradient of `2 ln F` in `w`: `tr(G τ_k) / F` with
    /// `G = √ρ (√ρ τ √ρ)^{−1/2} √ρ`.
    fn gradient(&self, w: &[f64], f: f64) -> Result<Vec<f64>> {
        let tau = self.mixed(w);
        let inner = hermitian_part(&(&self.sqrt_rho * tau * &self.sqrt_rho));
        let spec = eig_hermitian_with(&inner, support_tolerance())?;
        let inv_sqrt = spec.map_support(|l| Complex64::new(1.0 / l.sqrt(), 0.0));
        let g = &self.sqrt_rho * inv_sqrt * &self.sqrt_rho;
        Ok(self
            .images
            .iter()
            .map(|t| (&g * t).trace().re / f)
            .collect())
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Searches the convex hull of `{R^t : t ∈ t_grid}` for a map maximizing
/// the minimum over `states` of `lhs + 2 ln F`. The objective is concave in
/// the weights; projected supergradient ascent is run from the best of the
/// uniform mixture and the grid vertices. Best effort, with no optimality
/// claim.
pub fn finite_set_recovery_search(
    states: &[DensityOperator],
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    t_grid: &[f64],
    iterations: usize,
) -> Result<SearchResult> {
    if states.is_empty() {
        return Err(Error::domain("state list is empty"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("t grid must be nonempty and finite"));
    }
    let factory = PetzFactory::new(sigma, channel)?;
    let maps: Vec<RecoveryMap> = t_grid.iter().map(|&t| factory.rotated(t)).collect();
    let n_sigma = channel.apply(sigma.matrix())?;
    let prepared = states
        .iter()
        .map(|rho| {
            let out = channel.apply(rho.matrix())?;
            let a = relative_entropy(rho, sigma)?.value();
            let lhs = if a.is_infinite() {
                f64::INFINITY
            } else {
                a - relative_entropy(&out, &n_sigma)?.value()
            };
            Ok(Prepared {
                lhs,
                sqrt_rho: psd_sqrt_lenient(rho.matrix())?,
                images: maps.iter().map(|m| m.apply(&out)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Objective value, index of the active state and its fidelity.
    let objective = |w: &[f64]| -> Result<(f64, usize, f64)> {
        let mut best = (f64::INFINITY, 0, 1.0);
        for (j, p) in prepared.iter().enumerate() {
            let (v, f) = p.value(w)?;
            if v < best.0 {
                best = (v, j, f);
            }
        }
        Ok(best)
    };

    let n = t_grid.len();
    let mut starts = vec![vec![1.0 / n as f64; n]];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        starts.push(e);
    }
    let mut best_w = starts[0].clone();
    let mut best = objective(&best_w)?;
    for s in &starts[1..] {
        let v = objective(s)?;
        if v.0 > best.0 {
            best = v;
            best_w = s.clone();
        }
    }

    let mut w = best_w.clone();
    let mut current = best;
    for i in 0..iterations {
        let (value, j, f) = current;
        if !value.is_finite() || f <= 0.0 || n == 1 {
            break;
        }
        let g = prepared[j].gradient(&w, f)?;
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let step = 0.5 / ((i + 1) as f64).sqrt();
        let moved: Vec<f64> = w.iter().zip(&g).map(|(wk, gk)| wk + step * gk / norm).collect();
        w = project_simplex(&moved);
        current = objective(&w)?;
        if current.0 > best.0 {
            best = current;
            best_w = w.clone();
        }
    }

    let map = convex_mixture(&maps, &best_w)?;
    let rows = states
        .iter()
        .zip(&prepared)
        .map(|(rho, p)| {
            let rec = p.mixed(&best_w);
            let f = fidelity_with_sqrt(&p.sqrt_rho, &rec)?;
            let povm = fidelity_measurement(rho, &rec)?;
            let lb = measured_relative_entropy_lb(rho, &rec, &povm)?;
            Ok(SearchStateRow {
                lhs: EntropyValue::nats(p.lhs)?,
                fidelity: f,
                fidelity_slack: slack(p.lhs, super::neg_two_log(f)),
                measured_lb: lb,
                measured_slack: if lb.is_infinite() && !p.lhs.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    slack(p.lhs, lb.value())
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_of = |f: fn(&SearchStateRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(SearchResult {
        map,
        grid: t_grid.to_vec(),
        weights: best_w,
        min_fidelity_slack: min_of(|r| r.fidelity_slack),
        min_slack: min_of(|r| r.measured_slack),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::state::{random_density, StateEnsemble};

    #[test]
    fn simplex_projection() {
        let w = project_simplex(&[0.5, 0.9, -0.2]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.7).abs() < 1e-12 && w[2] == 0.0);
        assert_eq!(project_simplex(&[0.25, 0.75]), vec![0.25, 0.75]);
    }

    #[test]
    fn sigma_states_are_recovered_perfectly() {
        let sigma = random_density(3, 1, StateEnsemble::HilbertSchmidt).unwrap();
        let ch = random_channel(3, 2, 2, 2).unwrap();
        let states = vec![sigma.clone(), sigma.clone()];
        let r = finite_set_recovery_search(&states, &sigma.to_positive().unwrap(), &ch, &[-1.0, 0.0, 1.0], 20)
            .unwrap();
        for row in &r.rows {
            assert!((row.fidelity - 1.0).abs() < 1e-10);
            assert!(row.fidelity_slack >= -1e-10);
        }
    }

    #[test]
    fn search_does_not_lose_to_its_start() {
        let sigma = random_density(3, 3, StateEnsemble::HilbertSchmidt).unwrap().to_positive().unwrap();
        let ch = random_channel(3, 2, 2, 4).unwrap();
        let states: Vec<_> = (0..3)
            .map(|s| random_density(3, 10 + s, StateEnsemble::HilbertSchmidt).unwrap())
            .collect();
        let grid = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let r = finite_set_recovery_search(&states, &sigma, &ch, &grid, 50).unwrap();
        let petz_only = finite_set_recovery_search(&states, &sigma, &ch, &[0.0], 0).unwrap();
        assert!(r.min_fidelity_slack >= petz_only.min_fidelity_slack - 1e-12);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
