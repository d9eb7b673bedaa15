//! Petz, rotated Petz and universal recovery maps.
//!
//! For `σ` on `A` and `N: A → B` the rotated Petz map has Kraus operators
//! `σ^{1/2 − it} K_i† N(σ)^{−1/2 + it}`, with all powers taken on the
//! supports. `t = 0` is the Petz map itself and goes through the same code
//! path, so the two agree bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_kraus, apply_kraus_adjoint, check_dim, choi_distance, choi_from_kraus, kraus_gram,
    QuantumChannel,
};
use crate::entropy::support_tolerance;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, eig_hermitian_with, hs_inner, matrix_unit, Operator, SpectralDecomposition};
use crate::quadrature::QuadratureRule;
use crate::state::PositiveOperator;

/// Relative tolerance for grouping eigenvalues into eigenspaces.
pub const EIGENSPACE_RTOL: f64 = 1e-9;
/// Tolerance on mixture weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum RecoveryKind {
    Petz,
    Rotated { t: f64 },
    PhaseRotated { phi: Vec<f64>, theta: Vec<f64> },
    Mixture { nodes: Vec<Option<f64>>, weights: Vec<f64> },
}

/// A completely positive, trace non-increasing map `B → A`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryMap {
    kind: RecoveryKind,
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Operator>,
    components: Vec<(f64, RecoveryMap)>,
}

impl RecoveryMap {
    pub fn kind(&self) -> &RecoveryKind {
        &self.kind
    }

    /// Dimension of `B`, the space the map acts on.
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    /// Dimension of `A`.
    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// The flattened Kraus list.
    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    /// Weighted components of a mixture; empty for other kinds.
    pub fn components(&self) -> &[(f64, RecoveryMap)] {
        &self.components
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        check_dim("recovery input", self.dim_in, x)?;
        Ok(apply_kraus(&self.kraus, x))
    }

    /// `Σ w_k R_k(x)` evaluated component by component.
    pub fn apply_by_components(&self, x: &Operator) -> Result<Operator> {
        if self.components.is_empty() {
            return self.apply(x);
        }
        let mut acc = Operator::zeros(self.dim_out, self.dim_out);
        for (w, c) in &self.components {
            acc += c.apply(x)? * Complex64::new(*w, 0.0);
        }
        Ok(acc)
    }

    pub fn apply_adjoint(&self, y: &Operator) -> Result<Operator> {
        check_dim("recovery adjoint input", self.dim_out, y)?;
        Ok(apply_kraus_adjoint(&self.kraus, y))
    }

    pub fn choi(&self) -> Operator {
        choi_from_kraus(&self.kraus, self.dim_in)
    }

    pub fn choi_distance(&self, other: &RecoveryMap) -> Result<f64> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch {
                context: "recovery map comparison",
                expected: self.dim_in,
                found: other.dim_in,
            });
        }
        choi_distance(&self.kraus, &other.kraus, self.dim_in)
    }

    pub fn choi_distance_to_channel(&self, channel: &QuantumChannel) -> Result<f64> {
        if self.dim_in != channel.dim_in() || self.dim_out != channel.dim_out() {
            return Err(Error::DimensionMismatch {
                context: "recovery map comparison",
                expected: self.dim_in,
                found: channel.dim_in(),
            });
        }
        choi_distance(&self.kraus, channel.kraus(), self.dim_in)
    }

    /// `Σ K†K`, which should equal the support projector of `N(σ)`.
    pub fn completeness(&self) -> Operator {
        kraus_gram(&self.kraus)
    }

    /// As a trace non-increasing channel.
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::new(self.kraus.clone(), crate::channel::CompletenessMode::TraceNonIncreasing)
    }
}

/// Precomputed spectra of `σ` and `N(σ)` from which every rotated map is
/// assembled.
#[derive(Debug, Clone)]
pub struct PetzFactory {
    sigma: SpectralDecomposition,
    image: SpectralDecomposition,
    adjoint_kraus: Vec<Operator>,
    dim_in: usize,
    dim_out: usize,
}

fn scaled_columns(spec: &SpectralDecomposition, g: impl Fn(f64) -> Complex64) -> Operator {
    spec.map_support(g)
}

impl PetzFactory {
    pub fn new(sigma: &PositiveOperator, channel: &QuantumChannel) -> Result<Self> {
        if sigma.dim() != channel.dim_in() {
            return Err(Error::DimensionMismatch {
                context: "recovery reference operator",
                expected: channel.dim_in(),
                found: sigma.dim(),
            });
        }
        let image = channel.apply(sigma.matrix())?;
        let image_spec = eig_hermitian_with(&crate::linalg::hermitian_part(&image), support_tolerance())?;
        if image_spec.rank() == 0 {
            return Err(Error::Degenerate("N(sigma) is numerically zero".into()));
        }
        let sigma_spec = eig_hermitian_with(sigma.matrix(), support_tolerance())?;
        Ok(Self {
            sigma: sigma_spec,
            image: image_spec,
            adjoint_kraus: channel.kraus().iter().map(|k| k.adjoint()).collect(),
            dim_in: channel.dim_out(),
            dim_out: channel.dim_in(),
        })
    }

    pub fn sigma_spectrum(&self) -> &SpectralDecomposition {
        &self.sigma
    }

    pub fn image_spectrum(&self) -> &SpectralDecomposition {
        &self.image
    }

    /// Kraus operators `L K_i† R` for the given outer factors.
    fn kraus_with(&self, left: &Operator, right: &Operator) -> Vec<Operator> {
        self.adjoint_kraus.iter().map(|k| left * k * right).collect()
    }

    fn rotated_kraus(&self, t: f64) -> Vec<Operator> {
        let left = scaled_columns(&self.sigma, |l| {
            Complex64::from_polar(l.sqrt(), -t * l.ln())
        });
        let right = scaled_columns(&self.image, |l| {
            Complex64::from_polar(1.0 / l.sqrt(), t * l.ln())
        });
        self.kraus_with(&left, &right)
    }

    fn wrap(&self, kind: RecoveryKind, kraus: Vec<Operator>) -> RecoveryMap {
        RecoveryMap {
            kind,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus,
            components: Vec::new(),
        }
    }

    pub fn petz(&self) -> RecoveryMap {
        self.wrap(RecoveryKind::Petz, self.rotated_kraus(0.0))
    }

    /// `X ↦ σ^{−it} P(N(σ)^{it} X N(σ)^{−it}) σ^{it}`.
    pub fn rotated(&self, t: f64) -> RecoveryMap {
        self.wrap(RecoveryKind::Rotated { t }, self.rotated_kraus(t))
    }

    /// Number of distinct nonzero eigenvalues of `N(σ)` and of `σ`.
    pub fn eigenspace_counts(&self) -> (usize, usize) {
        (
            self.image.eigenspaces(EIGENSPACE_RTOL).len(),
            self.sigma.eigenspaces(EIGENSPACE_RTOL).len(),
        )
    }

    /// `X ↦ U_σ^θ P(U_{N(σ)}^φ X U_{N(σ)}^{φ†}) U_σ^{θ†}` where
    /// `U_H^φ = Σ_k e^{iφ_k} P_k` over the eigenspaces of `H` on its support.
    /// The kernels are left untouched; the Petz map annihilates them anyway.
    pub fn phase_rotated(&self, phi: &[f64], theta: &[f64]) -> Result<RecoveryMap> {
        let (n_image, n_sigma) = self.eigenspace_counts();
        if phi.len() != n_image || theta.len() != n_sigma {
            return Err(Error::domain(format!(
                "expected {n_image} phases for N(sigma) and {n_sigma} for sigma, got {} and {}",
                phi.len(),
                theta.len()
            )));
        }
        let unitary = |spec: &SpectralDecomposition, phases: &[f64]| -> Operator {
            let projectors = spec.eigenspace_projectors(EIGENSPACE_RTOL);
            let mut u = spec.kernel_projector();
            for (p, &ph) in projectors.iter().zip(phases) {
                u += p * Complex64::cis(ph);
            }
            u
        };
        let u_image = unitary(&self.image, phi);
        let u_sigma = unitary(&self.sigma, theta);
        let petz = self.rotated_kraus(0.0);
        let kraus = petz.iter().map(|a| &u_sigma * a * &u_image).collect();
        Ok(self.wrap(
            RecoveryKind::PhaseRotated {
                phi: phi.to_vec(),
                theta: theta.to_vec(),
            },
            kraus,
        ))
    }

    /// `Σ w_k R^{t_k/2}` over the nodes of a `β₀` rule.
    pub fn universal(&self, rule: &QuadratureRule) -> RecoveryMap {
        let parts: Vec<(f64, RecoveryMap)> = rule
            .iter()
            .map(|(t, w)| (w, self.rotated(t / 2.0)))
            .collect();
        mixture_unchecked(parts)
    }
}

fn mixture_unchecked(parts: Vec<(f64, RecoveryMap)>) -> RecoveryMap {
    let (dim_in, dim_out) = (parts[0].1.dim_in, parts[0].1.dim_out);
    let mut kraus = Vec::new();
    for (w, m) in &parts {
        let s = Complex64::new(w.sqrt(), 0.0);
        kraus.extend(m.kraus.iter().map(|k| k * s));
    }
    let nodes = parts
        .iter()
        .map(|(_, m)| match m.kind {
            RecoveryKind::Rotated { t } => Some(t),
            RecoveryKind::Petz => Some(0.0),
            _ => None,
        })
        .collect();
    let weights = parts.iter().map(|(w, _)| *w).collect();
    RecoveryMap {
        kind: RecoveryKind::Mixture { nodes, weights },
        dim_in,
        dim_out,
        kraus,
        components: parts,
    }
}

pub fn petz(sigma: &PositiveOperator, channel: &QuantumChannel) -> Result<RecoveryMap> {
    Ok(PetzFactory::new(sigma, channel)?.petz())
}

pub fn rotated_petz(sigma: &PositiveOperator, channel: &QuantumChannel, t: f64) -> Result<RecoveryMap> {
    Ok(PetzFactory::new(sigma, channel)?.rotated(t))
}

pub fn phase_rotated_petz(
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    phi: &[f64],
    theta: &[f64],
) -> Result<RecoveryMap> {
    PetzFactory::new(sigma, channel)?.phase_rotated(phi, theta)
}

/// `∫ dt β₀(t) R^{t/2}` discretized by `rule`.
pub fn universal_recovery(
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    rule: &QuadratureRule,
) -> Result<RecoveryMap> {
    Ok(PetzFactory::new(sigma, channel)?.universal(rule))
}

/// Convex combination of recovery maps with a common signature.
pub fn convex_mixture(maps: &[RecoveryMap], weights: &[f64]) -> Result<RecoveryMap> {
    if maps.is_empty() || maps.len() != weights.len() {
        return Err(Error::domain("mixture needs one weight per map"));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("mixture weights must be nonnegative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::domain(format!("mixture weights sum to {sum}")));
    }
    let (di, dout) = (maps[0].dim_in, maps[0].dim_out);
    if maps.iter().any(|m| m.dim_in != di || m.dim_out != dout) {
        return Err(Error::domain("mixture components differ in dimensions"));
    }
    Ok(mixture_unchecked(
        weights.iter().copied().zip(maps.iter().cloned()).collect(),
    ))
}

/// Largest deviation in the defining identity of the Petz map,
/// `⟨a₂, N†(a₁)⟩_σ = ⟨P†(a₂), a₁⟩_{N(σ)}` with `⟨a, b⟩_ω = tr(a† ω^{1/2} b ω^{1/2})`,
/// over all pairs of matrix units.
pub fn petz_adjoint_residual(
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    petz: &RecoveryMap,
) -> Result<f64> {
    let (da, db) = (channel.dim_in(), channel.dim_out());
    let sqrt_of = |m: &Operator| -> Result<Operator> {
        let spec = eig_hermitian(&crate::linalg::hermitian_part(m))?;
        Ok(spec.map_support(|l| Complex64::new(l.sqrt(), 0.0)))
    };
    let s_half = sqrt_of(sigma.matrix())?;
    let n_half = sqrt_of(&channel.apply(sigma.matrix())?)?;
    let weighted = |a: &Operator, b: &Operator, w: &Operator| hs_inner(a, &(w * b * w));

    let units = |d: usize| -> Vec<Operator> {
        (0..d)
            .flat_map(|i| (0..d).map(move |j| matrix_unit(d, i, j)))
            .collect()
    };
    let a1s = units(db);
    let a2s = units(da);
    let n_adj: Vec<Operator> = a1s
        .iter()
        .map(|a| channel.apply_adjoint(a))
        .collect::<Result<_>>()?;
    let p_adj: Vec<Operator> = a2s
        .iter()
        .map(|a| petz.apply_adjoint(a))
        .collect::<Result<_>>()?;
    let mut worst = 0.0_f64;
    for (a1, na1) in a1s.iter().zip(&n_adj) {
        for (a2, pa2) in a2s.iter().zip(&p_adj) {
            let lhs = weighted(a2, na1, &s_half);
            let rhs = weighted(pa2, a1, &n_half);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}
