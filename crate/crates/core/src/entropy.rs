//! Entropic quantities. All values are in nats; bits are a display unit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, eig_hermitian_with, ensure_square, hermitian_part, identity, partial_trace,
    psd_spectrum_lenient, psd_sqrt_lenient, schatten_norm, singular_values, Operator,
    RankTolerance, SpectralDecomposition,
};
use crate::random::{random_hermitian, rng_from_seed};
use crate::state::AsOperator;

/// Rank cutoff (relative to the largest eigenvalue) used for supports of
/// operators produced by the verification pipelines.
pub const SUPPORT_RTOL: f64 = 1e-12;
/// Mass outside the support of `σ` beyond which `D(ρ‖σ) = +∞`.
pub const SUPPORT_VIOLATION_TOL: f64 = 1e-10;

pub(crate) fn support_tolerance() -> RankTolerance {
    RankTolerance::Relative(SUPPORT_RTOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

impl FromStr for Unit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            other => Err(Error::Parse {
                what: "unit",
                message: format!("expected nats or bits, got {other:?}"),
            }),
        }
    }
}

/// A real entropy value in nats, possibly `+∞`, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue(0.0);
    pub const INFINITE: EntropyValue = EntropyValue(f64::INFINITY);

    pub fn nats(value: f64) -> Result<Self> {
        if value.is_nan() || value == f64::NEG_INFINITY {
            return Err(Error::Numerical(format!("invalid entropy value {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn in_unit(self, unit: Unit) -> f64 {
        unit.convert(self.0)
    }

    pub fn bits(self) -> f64 {
        self.in_unit(Unit::Bits)
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for EntropyValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => EntropyValue::nats(x).map_err(serde::de::Error::custom),
            Raw::Str(s) if s == "inf" => Ok(EntropyValue::INFINITE),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad entropy value {s:?}"))),
        }
    }
}

/// `−Σ λ ln λ` over eigenvalues above the rank cutoff.
fn entropy_of_spectrum(spec: &SpectralDecomposition) -> f64 {
    -spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > spec.cutoff)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

pub fn von_neumann_entropy<A: AsOperator + ?Sized>(rho: &A) -> Result<EntropyValue> {
    let spec = psd_spectrum_lenient(rho.operator())?;
    EntropyValue::nats(entropy_of_spectrum(&spec).max(0.0))
}

/// `D(ρ‖σ) = tr ρ (log ρ − log σ)` with `+∞` when more than `1e-10 tr ρ` of
/// the mass of `ρ` lies outside the support of `σ`.
///
/// Works for unnormalized arguments as written (no trace correction).
pub fn relative_entropy<A, B>(rho: &A, sigma: &B) -> Result<EntropyValue>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let value = relative_entropy_raw(rho.operator(), sigma.operator())?;
    EntropyValue::nats(value)
}

pub(crate) fn relative_entropy_raw(rho: &Operator, sigma: &Operator) -> Result<f64> {
    let d = ensure_square(rho)?;
    if sigma.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            context: "relative entropy",
            expected: d,
            found: sigma.nrows(),
        });
    }
    let rs = psd_spectrum_lenient(rho)?;
    let ss = {
        let s = eig_hermitian_with(sigma, support_tolerance())?;
        let floor = 1e-9 * s.max_eigenvalue().abs();
        if s.min_eigenvalue() < -floor {
            return Err(Error::NotPositive {
                eigenvalue: s.min_eigenvalue(),
                cutoff: floor,
            });
        }
        s
    };
    let tr_rho: f64 = rs.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let rho_h = hermitian_part(rho);
    // tr(ρ log σ) and the support mass in one pass over σ's eigenvectors.
    let mut cross = 0.0;
    let mut inside = 0.0;
    for (j, &mu) in ss.eigenvalues.iter().enumerate() {
        if mu > ss.cutoff {
            let v = ss.eigenvectors.column(j);
            let w = (v.adjoint() * &rho_h * v)[(0, 0)].re;
            inside += w;
            cross += w * mu.ln();
        }
    }
    if tr_rho - inside > SUPPORT_VIOLATION_TOL * tr_rho.max(f64::MIN_POSITIVE) {
        return Ok(f64::INFINITY);
    }
    let neg_entropy: f64 = rs
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum();
    Ok(neg_entropy - cross)
}

/// Relative entropy with the trace correction `+ tr σ − tr ρ`, which stays
/// nonnegative and monotone for unnormalized operators.
pub fn generalized_relative_entropy<A, B>(rho: &A, sigma: &B) -> Result<EntropyValue>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let d = relative_entropy_raw(rho.operator(), sigma.operator())?;
    let correction =
        crate::linalg::trace_re(sigma.operator()) - crate::linalg::trace_re(rho.operator());
    EntropyValue::nats(d + correction)
}

/// `F(ρ, τ) = ‖√ρ √τ‖₁`.
pub fn fidelity<A, B>(rho: &A, tau: &B) -> Result<f64>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let (r, t) = (rho.operator(), tau.operator());
    let d = ensure_square(r)?;
    if t.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            context: "fidelity",
            expected: d,
            found: t.nrows(),
        });
    }
    fidelity_with_sqrt(&psd_sqrt_lenient(r)?, t)
}

/// Fidelity with a precomputed `√ρ`, for many `τ` against one `ρ`.
pub(crate) fn fidelity_with_sqrt(sqrt_rho: &Operator, tau: &Operator) -> Result<f64> {
    let prod = sqrt_rho * psd_sqrt_lenient(tau)?;
    Ok(singular_values(&prod)?.iter().sum())
}

/// `½ ‖ρ − τ‖₁`.
pub fn trace_distance<A, B>(rho: &A, tau: &B) -> Result<f64>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let (r, t) = (rho.operator(), tau.operator());
    let diff = r - t;
    // Judge Hermiticity against the inputs; the difference of two nearly
    // equal states is pure rounding noise.
    let residual = crate::linalg::hermiticity_residual(&diff);
    let limit = crate::linalg::HERMITIAN_RTOL * r.norm().max(t.norm());
    if residual > limit {
        return Err(Error::NotHermitian { residual, limit });
    }
    let spec = eig_hermitian(&hermitian_part(&diff))?;
    Ok(0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `I(A:C|B) = H(AB) + H(BC) − H(ABC) − H(B)`.
pub fn conditional_mutual_information<A: AsOperator + ?Sized>(
    rho_abc: &A,
    dims: (usize, usize, usize),
) -> Result<EntropyValue> {
    let m = rho_abc.operator();
    let d = [dims.0, dims.1, dims.2];
    let h = |keep: &[usize]| -> Result<f64> {
        let r = partial_trace(m, &d, keep)?;
        Ok(von_neumann_entropy(&r)?.value())
    };
    let value = h(&[0, 1])? + h(&[1, 2])? - h(&[0, 1, 2])? - h(&[1])?;
    EntropyValue::nats(value)
}

/// `H(A|B) = H(AB) − H(B)` for a bipartite operator.
pub fn conditional_entropy<A: AsOperator + ?Sized>(rho_ab: &A, dims: (usize, usize)) -> Result<f64> {
    let m = rho_ab.operator();
    let hab = von_neumann_entropy(m)?.value();
    let hb = von_neumann_entropy(&partial_trace(m, &[dims.0, dims.1], &[1])?)?.value();
    Ok(hab - hb)
}

/// A positive operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Operator>,
}

impl Povm {
    /// Validates PSD effects summing to the identity within `1e-10`.
    pub fn new(effects: Vec<Operator>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let d = ensure_square(first)?;
        let mut sum = Operator::zeros(d, d);
        for e in &effects {
            if e.shape() != (d, d) {
                return Err(Error::InvalidPovm("effects differ in shape".into()));
            }
            let spec = eig_hermitian(e)?;
            if spec.min_eigenvalue() < -1e-10 {
                return Err(Error::InvalidPovm(format!(
                    "effect has eigenvalue {}",
                    spec.min_eigenvalue()
                )));
            }
            sum += e;
        }
        let dev = crate::linalg::max_abs(&(sum - identity(d)));
        if dev > 1e-10 {
            return Err(Error::InvalidPovm(format!("effects sum deviates from I by {dev:.3e}")));
        }
        Ok(Self { effects })
    }

    /// Rank-one projective measurement along the columns of a unitary.
    pub fn projective(basis: &Operator) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|j| {
                let v = basis.column(j);
                v * v.adjoint()
            })
            .collect();
        Self::new(effects)
    }

    pub fn trivial(d: usize) -> Self {
        Self {
            effects: vec![identity(d)],
        }
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    /// Outcome weights `tr(M_x ρ)`, clamped at zero.
    pub fn probabilities(&self, rho: &Operator) -> Vec<f64> {
        self.effects
            .iter()
            .map(|e| crate::linalg::hs_inner(e, rho).re.max(0.0))
            .collect()
    }
}

/// Kullback-Leibler divergence of two nonnegative weight vectors.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    let tp: f64 = p.iter().sum();
    let tq: f64 = q.iter().sum();
    let mut acc = 0.0;
    for (&px, &qx) in p.iter().zip(q) {
        if px <= 1e-15 * tp {
            continue;
        }
        if qx <= 1e-15 * tq {
            return f64::INFINITY;
        }
        acc += px * (px / qx).ln();
    }
    acc
}

/// Classical fidelity `Σ √(p q)`.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Divergence of the outcome distributions of `povm`: a lower bound on the
/// measured relative entropy.
pub fn measured_relative_entropy_lb<A, B>(rho: &A, omega: &B, povm: &Povm) -> Result<EntropyValue>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let (r, w) = (rho.operator(), omega.operator());
    if r.nrows() != povm.dim() || w.nrows() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "measurement",
            expected: povm.dim(),
            found: r.nrows(),
        });
    }
    let p = povm.probabilities(r);
    let q = povm.probabilities(w);
    EntropyValue::nats(classical_relative_entropy(&p, &q))
}

/// Projective measurement whose outcome distributions have the same
/// fidelity as `ρ` and `ω`.
///
/// Measures in the eigenbasis of `M = ω^{-1/2} (ω^{1/2} ρ ω^{1/2})^{1/2}
/// ω^{-1/2}` (pseudo-inverses), which satisfies `M ω M = Π ρ Π` on the
/// support `Π` of `ω`. The kernel of `ω` is split off by diagonalizing
/// `M − Π_ker` so that degenerate zero eigenvalues do not mix the two.
pub fn fidelity_measurement<A, B>(rho: &A, omega: &B) -> Result<Povm>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let (r, w) = (rho.operator(), omega.operator());
    let ws = eig_hermitian_with(w, support_tolerance())?;
    let w_half = ws.map_support(|l| Complex64::new(l.sqrt(), 0.0));
    let w_inv_half = ws.map_support(|l| Complex64::new(1.0 / l.sqrt(), 0.0));
    let inner = psd_sqrt_lenient(&hermitian_part(&(&w_half * r * &w_half)))?;
    let m = &w_inv_half * inner * &w_inv_half - ws.kernel_projector();
    let basis = eig_hermitian(&hermitian_part(&m))?.eigenvectors;
    Povm::projective(&basis)
}

/// Best-effort local search for a better projective measurement, starting
/// from the fidelity measurement and the eigenbasis of `ρ`. Returns the
/// largest divergence found, always a valid lower bound.
pub fn measured_relative_entropy_search<A, B>(
    rho: &A,
    omega: &B,
    iterations: usize,
    seed: u64,
) -> Result<EntropyValue>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    let (r, w) = (rho.operator(), omega.operator());
    let d = ensure_square(r)?;
    let eval = |basis: &Operator| -> Result<f64> {
        let povm = Povm::projective(basis)?;
        Ok(measured_relative_entropy_lb(r, w, &povm)?.value())
    };
    let start_a = {
        let p = fidelity_measurement(r, w)?;
        let mut b = Operator::zeros(d, d);
        for (j, e) in p.effects().iter().enumerate() {
            // Recover the unit vector from the rank-one projector.
            let col = (0..d).max_by(|&x, &y| e[(x, x)].re.total_cmp(&e[(y, y)].re)).unwrap_or(0);
            let v = e.column(col).unscale(e[(col, col)].re.sqrt());
            b.set_column(j, &v);
        }
        b
    };
    let start_b = eig_hermitian(&hermitian_part(r))?.eigenvectors;
    let (mut best_basis, mut best) = {
        let (a, b) = (eval(&start_a)?, eval(&start_b)?);
        if a >= b { (start_a, a) } else { (start_b, b) }
    };
    if best.is_infinite() {
        return EntropyValue::nats(best);
    }
    let mut rng = rng_from_seed(seed);
    let mut step = 0.3;
    for _ in 0..iterations {
        let h = random_hermitian(&mut rng, d);
        let rot = matrix_exp_i(&h, step)?;
        let candidate = &best_basis * rot;
        let value = eval(&candidate)?;
        if value > best {
            best = value;
            best_basis = candidate;
        } else {
            step *= 0.97;
        }
    }
    EntropyValue::nats(best)
}

/// `exp(i s H)` for Hermitian `H`.
fn matrix_exp_i(h: &Operator, s: f64) -> Result<Operator> {
    let spec = eig_hermitian(h)?;
    let v = &spec.eigenvectors;
    let mut scaled = v.clone();
    for (j, &l) in spec.eigenvalues.iter().enumerate() {
        let col = v.column(j) * Complex64::cis(s * l);
        scaled.set_column(j, &col);
    }
    Ok(scaled * v.adjoint())
}

/// The Rényi relative entropy difference
/// `Δ̃_α = (2α/(α−1)) log ‖(N(ρ)^a N(σ)^{−a} ⊗ I_E) U σ^a ρ^{1/2}‖_{2α}`
/// with `a = (1−α)/(2α)` and `U` the Stinespring isometry of `N`.
pub fn renyi_delta<A, B>(rho: &A, sigma: &B, channel: &QuantumChannel, alpha: f64) -> Result<EntropyValue>
where
    A: AsOperator + ?Sized,
    B: AsOperator + ?Sized,
{
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "alpha must lie in (0, 1) or (1, inf), got {alpha}; use the relative entropy difference at alpha = 1"
        )));
    }
    let (r, s) = (rho.operator(), sigma.operator());
    if relative_entropy_raw(r, s)?.is_infinite() {
        return Ok(EntropyValue::INFINITE);
    }
    let a = (1.0 - alpha) / (2.0 * alpha);
    let n_rho = channel.apply(r)?;
    let n_sigma = channel.apply(s)?;
    let tol = support_tolerance();
    let pow = |m: &Operator, p: f64| -> Result<Operator> {
        let spec = eig_hermitian_with(&hermitian_part(m), tol)?;
        Ok(spec.map_support(|l| Complex64::new(l.powf(p), 0.0)))
    };
    let left = pow(&n_rho, a)? * pow(&n_sigma, -a)?;
    let env = channel.env_dim();
    let left_e = crate::linalg::tensor_product(&left, &identity(env))?;
    let u = channel.stinespring().isometry;
    let x = left_e * u * pow(s, a)? * pow(r, 0.5)?;
    let norm = schatten_norm(&x, 2.0 * alpha)?;
    if norm == 0.0 {
        return Ok(EntropyValue::INFINITE);
    }
    EntropyValue::nats(2.0 * alpha / (alpha - 1.0) * norm.ln())
}

/// `h₂(p)` in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    Ok(term(p) + term(1.0 - p))
}

/// `ε log d + h₂(ε)`.
pub fn fannes_audenaert_bound(eps: f64, d: usize) -> Result<EntropyValue> {
    if d < 2 {
        return Err(Error::domain(format!("dimension must be at least 2, got {d}")));
    }
    let h = binary_entropy(eps)?;
    EntropyValue::nats(eps * (d as f64).ln() + h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::linalg::{from_real_diagonal, ket, tensor_product};
    use crate::state::{random_density, DensityOperator, StateEnsemble};
    use std::f64::consts::LN_2;

    #[test]
    fn von_neumann_examples() {
        let pure = DensityOperator::pure(&ket(3, 1)).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().value().abs() < 1e-15);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap().value() - LN_2).abs() < 1e-15);
        let q = DensityOperator::from_diagonal(&[0.25, 0.75]).unwrap();
        let expected = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((von_neumann_entropy(&q).unwrap().value() - expected).abs() < 1e-15);
        assert!((expected - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = random_density(3, 4, StateEnsemble::HilbertSchmidt).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().value().abs() < 1e-13);
        let a = DensityOperator::pure(&ket(2, 0)).unwrap();
        let b = DensityOperator::pure(&ket(2, 1)).unwrap();
        assert!(relative_entropy(&a, &b).unwrap().is_infinite());
        let p = from_real_diagonal(&[0.5, 0.5]);
        let q = from_real_diagonal(&[0.25, 0.75]);
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((relative_entropy(&p, &q).unwrap().value() - expected).abs() < 1e-15);
        assert!((expected - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_density(3, 9, StateEnsemble::HilbertSchmidt).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let zero = DensityOperator::pure(&ket(2, 0)).unwrap();
        let mut plus = ket(2, 0) + ket(2, 1);
        plus /= Complex64::new(2f64.sqrt(), 0.0);
        let plus = DensityOperator::pure(&plus).unwrap();
        assert!((fidelity(&zero, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let f = fidelity(&from_real_diagonal(&[0.5, 0.5]), &from_real_diagonal(&[0.25, 0.75])).unwrap();
        let expected = (0.125f64).sqrt() + (0.375f64).sqrt();
        assert!((f - expected).abs() < 1e-14);
        assert!((f - 0.9659258).abs() < 1e-7);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = random_density(3, 2, StateEnsemble::HilbertSchmidt).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-15);
        let a = DensityOperator::pure(&ket(2, 0)).unwrap();
        let b = DensityOperator::pure(&ket(2, 1)).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let t = trace_distance(&from_real_diagonal(&[0.5, 0.5]), &from_real_diagonal(&[0.25, 0.75])).unwrap();
        assert!((t - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cmi_examples() {
        let rab = random_density(4, 1, StateEnsemble::HilbertSchmidt).unwrap();
        let rc = random_density(2, 2, StateEnsemble::HilbertSchmidt).unwrap();
        let prod = tensor_product(rab.matrix(), rc.matrix()).unwrap();
        assert!(conditional_mutual_information(&prod, (2, 2, 2)).unwrap().value().abs() < 1e-12);

        let mut ghz = ket(8, 0) + ket(8, 7);
        ghz /= Complex64::new(2f64.sqrt(), 0.0);
        let ghz = DensityOperator::pure(&ghz).unwrap();
        let i = conditional_mutual_information(&ghz, (2, 2, 2)).unwrap().value();
        assert!((i - LN_2).abs() < 1e-12);

        let r = random_density(8, 3, StateEnsemble::HilbertSchmidt).unwrap();
        let h = |keep: &[usize]| {
            von_neumann_entropy(&partial_trace(r.matrix(), &[2, 2, 2], keep).unwrap())
                .unwrap()
                .value()
        };
        let direct = h(&[0, 1]) + h(&[1, 2]) - h(&[0, 1, 2]) - h(&[1]);
        let i = conditional_mutual_information(&r, (2, 2, 2)).unwrap().value();
        assert!((i - direct).abs() < 1e-14);
        assert!(i >= -1e-9);
        assert!(conditional_mutual_information(&r, (2, 2, 3)).is_err());
    }

    #[test]
    fn measurement_examples() {
        let p = from_real_diagonal(&[0.5, 0.3, 0.2]);
        let q = from_real_diagonal(&[0.2, 0.2, 0.6]);
        let povm = Povm::projective(&identity(3)).unwrap();
        let lb = measured_relative_entropy_lb(&p, &q, &povm).unwrap().value();
        assert!((lb - relative_entropy(&p, &q).unwrap().value()).abs() < 1e-14);
        let triv = measured_relative_entropy_lb(&p, &q, &Povm::trivial(3)).unwrap().value();
        assert!(triv.abs() < 1e-15);
        assert!(Povm::new(vec![identity(2).scale(0.5)]).is_err());
    }

    #[test]
    fn fidelity_measurement_matches_fidelity() {
        for seed in 0..20 {
            let r = random_density(2, seed, StateEnsemble::HilbertSchmidt).unwrap();
            let w = random_density(2, seed + 100, StateEnsemble::HilbertSchmidt).unwrap();
            let povm = fidelity_measurement(&r, &w).unwrap();
            let cf = classical_fidelity(&povm.probabilities(r.matrix()), &povm.probabilities(w.matrix()));
            let f = fidelity(&r, &w).unwrap();
            assert!((cf - f).abs() < 1e-8, "seed {seed}: {cf} vs {f}");
            let lb = measured_relative_entropy_lb(&r, &w, &povm).unwrap().value();
            assert!(lb >= -2.0 * f.ln() - 1e-9);
            assert!(lb <= relative_entropy(&r, &w).unwrap().value() + 1e-9);
        }
    }

    #[test]
    fn fidelity_measurement_with_singular_omega() {
        let r = random_density(4, 1, StateEnsemble::HilbertSchmidt).unwrap();
        let w = random_density(4, 2, StateEnsemble::Rank(2)).unwrap();
        let povm = fidelity_measurement(&r, &w).unwrap();
        let cf = classical_fidelity(&povm.probabilities(r.matrix()), &povm.probabilities(w.matrix()));
        assert!((cf - fidelity(&r, &w).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn commuting_measurement_is_diagonal_basis() {
        let p = from_real_diagonal(&[0.5, 0.3, 0.2]);
        let q = from_real_diagonal(&[0.2, 0.2, 0.6]);
        let povm = fidelity_measurement(&p, &q).unwrap();
        for e in povm.effects() {
            let off: f64 = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| e[(i, j)].norm())
                .sum();
            assert!(off < 1e-10);
        }
    }

    #[test]
    fn measurement_search_never_decreases() {
        let r = random_density(3, 5, StateEnsemble::HilbertSchmidt).unwrap();
        let w = random_density(3, 6, StateEnsemble::HilbertSchmidt).unwrap();
        let base = measured_relative_entropy_lb(&r, &w, &fidelity_measurement(&r, &w).unwrap())
            .unwrap()
            .value();
        let found = measured_relative_entropy_search(&r, &w, 200, 1).unwrap().value();
        assert!(found >= base - 1e-15);
        assert!(found <= relative_entropy(&r, &w).unwrap().value() + 1e-9);
    }

    #[test]
    fn renyi_classical_closed_form() {
        // Classical channel with Kraus √P(b|a) |b⟩⟨a|. Columns of the operator
        // inside the norm are orthogonal (distinct environment labels), so its
        // singular values are s_a = (Σ_b c_ba²)^{1/2} with
        // c_ba = (Nρ_b / Nσ_b)^x √P(b|a) σ_a^x ρ_a^{1/2}.
        let p = [0.6, 0.3, 0.1];
        let q = [0.2, 0.5, 0.3];
        let stoch: [[f64; 3]; 2] = [[0.9, 0.4, 0.25], [0.1, 0.6, 0.75]];
        let mut kraus = Vec::new();
        for (b, row) in stoch.iter().enumerate() {
            for (a, &pba) in row.iter().enumerate() {
                let mut k = Operator::zeros(2, 3);
                k[(b, a)] = Complex64::new(pba.sqrt(), 0.0);
                kraus.push(k);
            }
        }
        let ch = QuantumChannel::trace_preserving(kraus).unwrap();
        let np: Vec<f64> = stoch.iter().map(|r| r.iter().zip(&p).map(|(x, y)| x * y).sum()).collect();
        let nq: Vec<f64> = stoch.iter().map(|r| r.iter().zip(&q).map(|(x, y)| x * y).sum()).collect();
        for alpha in [0.6, 0.75, 1.5] {
            let x = (1.0 - alpha) / (2.0 * alpha);
            let norm = (0..3)
                .map(|a| {
                    let s2: f64 = (0..2)
                        .map(|b| {
                            let c = (np[b] / nq[b]).powf(x) * stoch[b][a].sqrt() * q[a].powf(x) * p[a].sqrt();
                            c * c
                        })
                        .sum();
                    s2.sqrt().powf(2.0 * alpha)
                })
                .sum::<f64>()
                .powf(1.0 / (2.0 * alpha));
            let expected = 2.0 * alpha / (alpha - 1.0) * norm.ln();
            let got = renyi_delta(&from_real_diagonal(&p), &from_real_diagonal(&q), &ch, alpha)
                .unwrap()
                .value();
            assert!((got - expected).abs() < 1e-12, "alpha {alpha}: {got} vs {expected}");
        }
        assert!(renyi_delta(&from_real_diagonal(&p), &from_real_diagonal(&q), &ch, 1.0).is_err());
    }

    #[test]
    fn renyi_near_one_approaches_entropy_difference() {
        let rho = random_density(3, 10, StateEnsemble::HilbertSchmidt).unwrap();
        let sigma = random_density(3, 11, StateEnsemble::HilbertSchmidt).unwrap();
        let ch = random_channel(3, 2, 2, 12).unwrap();
        let diff = relative_entropy(&rho, &sigma).unwrap().value()
            - relative_entropy(&ch.apply(rho.matrix()).unwrap(), &ch.apply(sigma.matrix()).unwrap())
                .unwrap()
                .value();
        let near = renyi_delta(&rho, &sigma, &ch, 0.999).unwrap().value();
        assert!((near - diff).abs() < 1e-2);
        let mut last = f64::INFINITY;
        for alpha in [0.6, 0.8, 0.95, 0.999] {
            let gap = (renyi_delta(&rho, &sigma, &ch, alpha).unwrap().value() - diff).abs();
            assert!(gap <= last + 1e-12);
            last = gap;
        }
    }

    #[test]
    fn fannes_examples() {
        assert_eq!(fannes_audenaert_bound(0.0, 2).unwrap().value(), 0.0);
        let v = fannes_audenaert_bound(0.5, 2).unwrap().value();
        assert!((v - 1.5 * LN_2).abs() < 1e-15);
        assert!((v - 1.039721).abs() < 1e-6);
        assert!((fannes_audenaert_bound(1.0, 4).unwrap().value() - 4f64.ln()).abs() < 1e-15);
        assert!(fannes_audenaert_bound(1.5, 4).is_err());
        assert!(fannes_audenaert_bound(0.5, 1).is_err());
    }

    #[test]
    fn entropy_value_serde_and_units() {
        let v = EntropyValue::nats(0.7).unwrap();
        assert!((v.bits() - 0.7 / LN_2).abs() < 1e-15);
        let s = serde_json::to_string(&EntropyValue::INFINITE).unwrap();
        assert_eq!(s, "\"inf\"");
        let back: EntropyValue = serde_json::from_str(&s).unwrap();
        assert!(back.is_infinite());
        assert!(EntropyValue::nats(f64::NAN).is_err());
    }
}
