//! Completely positive maps in Kraus form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, ensure_finite, identity, partial_trace, tensor_product, trace_norm, Operator,
    ONE,
};
use crate::random::{random_isometry, rng_from_seed};

/// Tolerance on `Σ K†K` against the identity.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompletenessMode {
    TracePreserving,
    TraceNonIncreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<Operator>,
    dim_in: usize,
    dim_out: usize,
    mode: CompletenessMode,
}

/// Shapes shared by every operator in a Kraus list.
pub(crate) fn kraus_shape(kraus: &[Operator]) -> Result<(usize, usize)> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidChannel("at least one Kraus operator is required".into()))?;
    let (rows, cols) = first.shape();
    for k in kraus {
        ensure_finite(k)?;
        if k.shape() != (rows, cols) {
            return Err(Error::InvalidChannel(format!(
                "Kraus shapes differ: {:?} vs {:?}",
                k.shape(),
                (rows, cols)
            )));
        }
    }
    Ok((rows, cols))
}

/// `Σ K† K`.
pub fn kraus_gram(kraus: &[Operator]) -> Operator {
    let d = kraus.first().map_or(0, |k| k.ncols());
    kraus
        .iter()
        .fold(Operator::zeros(d, d), |acc, k| acc + k.adjoint() * k)
}

impl QuantumChannel {
    pub fn new(kraus: Vec<Operator>, mode: CompletenessMode) -> Result<Self> {
        let (dim_out, dim_in) = kraus_shape(&kraus)?;
        let gram = kraus_gram(&kraus);
        let spec = eig_hermitian(&gram)?;
        match mode {
            CompletenessMode::TracePreserving => {
                let dev = spec
                    .eigenvalues
                    .iter()
                    .fold(0.0_f64, |a, l| a.max((l - 1.0).abs()));
                if dev > COMPLETENESS_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "sum of K†K deviates from identity by {dev:.3e}"
                    )));
                }
            }
            CompletenessMode::TraceNonIncreasing => {
                if spec.max_eigenvalue() > 1.0 + COMPLETENESS_TOL {
                    return Err(Error::InvalidChannel(format!(
                        "sum of K†K has eigenvalue {} above 1",
                        spec.max_eigenvalue()
                    )));
                }
                if spec.max_eigenvalue() <= 0.0 {
                    return Err(Error::InvalidChannel("map is identically zero".into()));
                }
            }
        }
        Ok(Self {
            kraus,
            dim_in,
            dim_out,
            mode,
        })
    }

    pub fn trace_preserving(kraus: Vec<Operator>) -> Result<Self> {
        Self::new(kraus, CompletenessMode::TracePreserving)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![identity(d)],
            dim_in: d,
            dim_out: d,
            mode: CompletenessMode::TracePreserving,
        }
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn mode(&self) -> CompletenessMode {
        self.mode
    }

    /// `Σ K X K†`.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        check_dim("channel input", self.dim_in, x)?;
        Ok(apply_kraus(&self.kraus, x))
    }

    /// `Σ K† Y K`.
    pub fn apply_adjoint(&self, y: &Operator) -> Result<Operator> {
        check_dim("adjoint channel input", self.dim_out, y)?;
        Ok(apply_kraus_adjoint(&self.kraus, y))
    }

    /// `U = Σ K_i ⊗ |i⟩_E`, rows indexed by `b * env + i`.
    pub fn stinespring(&self) -> IsometricExtension {
        let env = self.env_dim();
        let mut v = Operator::zeros(self.dim_out * env, self.dim_in);
        for (i, k) in self.kraus.iter().enumerate() {
            for b in 0..self.dim_out {
                for a in 0..self.dim_in {
                    v[(b * env + i, a)] = k[(b, a)];
                }
            }
        }
        IsometricExtension {
            isometry: v,
            dim_out: self.dim_out,
            env_dim: env,
        }
    }

    /// `self ⊗ other` acting on the tensor product of the inputs.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor_product(a, b)?);
            }
        }
        let mode = if self.mode == CompletenessMode::TracePreserving
            && other.mode == CompletenessMode::TracePreserving
        {
            CompletenessMode::TracePreserving
        } else {
            CompletenessMode::TraceNonIncreasing
        };
        Ok(QuantumChannel {
            kraus,
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            mode,
        })
    }

    pub fn choi(&self) -> Operator {
        choi_from_kraus(&self.kraus, self.dim_in)
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, x: &Operator) -> Result<()> {
    if x.nrows() != expected || x.ncols() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: if x.nrows() != expected { x.nrows() } else { x.ncols() },
        });
    }
    Ok(())
}

pub(crate) fn apply_kraus(kraus: &[Operator], x: &Operator) -> Operator {
    let d = kraus[0].nrows();
    kraus
        .iter()
        .fold(Operator::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
}

pub(crate) fn apply_kraus_adjoint(kraus: &[Operator], y: &Operator) -> Operator {
    let d = kraus[0].ncols();
    kraus
        .iter()
        .fold(Operator::zeros(d, d), |acc, k| acc + k.adjoint() * y * k)
}

/// Isometry `A → B ⊗ E` with the environment as the least significant factor.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometricExtension {
    pub isometry: Operator,
    pub dim_out: usize,
    pub env_dim: usize,
}

impl IsometricExtension {
    /// `tr_E(U X U†)`.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        check_dim("isometry input", self.isometry.ncols(), x)?;
        let full = &self.isometry * x * self.isometry.adjoint();
        partial_trace(&full, &[self.dim_out, self.env_dim], &[0])
    }

    /// `‖U†U − I‖` as the largest absolute entry.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.isometry.ncols();
        crate::linalg::max_abs(&(self.isometry.adjoint() * &self.isometry - identity(d)))
    }
}

/// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, input factor first.
pub fn choi_from_kraus(kraus: &[Operator], dim_in: usize) -> Operator {
    let dim_out = kraus.first().map_or(0, |k| k.nrows());
    let n = dim_in * dim_out;
    let mut j = Operator::zeros(n, n);
    for k in kraus {
        // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩.
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        for i in 0..dim_in {
            for b in 0..dim_out {
                v[i * dim_out + b] = k[(b, i)];
            }
        }
        j += &v * v.adjoint();
    }
    j
}

/// `½ ‖J₁ − J₂‖₁ / d_in`: zero iff the maps agree, at most 1 for channels.
pub fn choi_distance(a: &[Operator], b: &[Operator], dim_in: usize) -> Result<f64> {
    let ja = choi_from_kraus(a, dim_in);
    let jb = choi_from_kraus(b, dim_in);
    if ja.shape() != jb.shape() {
        return Err(Error::DimensionMismatch {
            context: "Choi comparison",
            expected: ja.nrows(),
            found: jb.nrows(),
        });
    }
    Ok(0.5 * trace_norm(&(ja - jb))? / dim_in as f64)
}

pub fn channels_equal(a: &QuantumChannel, b: &QuantumChannel, tol: f64) -> Result<bool> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Ok(false);
    }
    Ok(choi_distance(&a.kraus, &b.kraus, a.dim_in)? <= tol)
}

/// TP channel from a seeded Haar isometry of shape `(dim_out·env) × dim_in`.
pub fn random_channel(dim_in: usize, dim_out: usize, env_dim: usize, seed: u64) -> Result<QuantumChannel> {
    let mut rng = rng_from_seed(seed);
    random_channel_with(&mut rng, dim_in, dim_out, env_dim)
}

pub fn random_channel_with<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || env_dim == 0 {
        return Err(Error::domain("channel dimensions must be positive"));
    }
    if dim_out * env_dim < dim_in {
        return Err(Error::domain(format!(
            "env_dim {env_dim} too small: need at least {} for {dim_in} -> {dim_out}",
            dim_in.div_ceil(dim_out)
        )));
    }
    let v = random_isometry(rng, dim_out * env_dim, dim_in);
    let kraus = (0..env_dim)
        .map(|i| {
            Operator::from_fn(dim_out, dim_in, |b, a| v[(b * env_dim + i, a)])
        })
        .collect();
    QuantumChannel::trace_preserving(kraus)
}

/// Standard channels.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedChannel {
    Identity { dim: usize },
    /// `ρ ↦ (1−λ)ρ + λ tr(ρ) I/d`.
    Depolarizing { dim: usize, lambda: f64 },
    /// `ρ ↦ (1−λ)ρ + λ diag(ρ)`.
    Dephasing { dim: usize, lambda: f64 },
    /// Qubit bit flip with probability `p`.
    BitFlip { p: f64 },
    /// Qubit amplitude damping with decay `gamma`.
    AmplitudeDamping { gamma: f64 },
    /// Traces out factor `traced` of a product space.
    PartialTrace { dims: Vec<usize>, traced: usize },
    Unitary(Operator),
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

fn scaled(m: Operator, c: f64) -> Operator {
    m * Complex64::new(c, 0.0)
}

/// Weyl operator `X^a Z^b` on `C^d`.
pub fn weyl(d: usize, a: usize, b: usize) -> Operator {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut w = Operator::zeros(d, d);
    for j in 0..d {
        w[((j + a) % d, j)] = Complex64::cis(omega * ((b * j) % d) as f64);
    }
    w
}

impl NamedChannel {
    pub fn build(&self) -> Result<QuantumChannel> {
        let kraus: Vec<Operator> = match self {
            NamedChannel::Identity { dim } => vec![identity(*dim)],
            NamedChannel::Depolarizing { dim, lambda } => {
                check_unit_interval("depolarizing parameter", *lambda)?;
                let d = *dim;
                let df = d as f64;
                let mut ks = vec![scaled(identity(d), (1.0 - lambda + lambda / (df * df)).sqrt())];
                if *lambda > 0.0 {
                    for a in 0..d {
                        for b in 0..d {
                            if (a, b) != (0, 0) {
                                ks.push(scaled(weyl(d, a, b), lambda.sqrt() / df));
                            }
                        }
                    }
                }
                ks
            }
            NamedChannel::Dephasing { dim, lambda } => {
                check_unit_interval("dephasing parameter", *lambda)?;
                let mut ks = Vec::new();
                if *lambda < 1.0 {
                    ks.push(scaled(identity(*dim), (1.0 - lambda).sqrt()));
                }
                if *lambda > 0.0 {
                    for k in 0..*dim {
                        ks.push(scaled(crate::linalg::matrix_unit(*dim, k, k), lambda.sqrt()));
                    }
                }
                ks
            }
            NamedChannel::BitFlip { p } => {
                check_unit_interval("flip probability", *p)?;
                let x = crate::linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
                let mut ks = Vec::new();
                if *p < 1.0 {
                    ks.push(scaled(identity(2), (1.0 - p).sqrt()));
                }
                if *p > 0.0 {
                    ks.push(scaled(x, p.sqrt()));
                }
                ks
            }
            NamedChannel::AmplitudeDamping { gamma } => {
                check_unit_interval("damping parameter", *gamma)?;
                let k0 = crate::linalg::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]);
                let k1 = crate::linalg::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0]);
                vec![k0, k1]
            }
            NamedChannel::PartialTrace { dims, traced } => partial_trace_kraus(dims, *traced)?,
            NamedChannel::Unitary(u) => vec![u.clone()],
        };
        QuantumChannel::trace_preserving(kraus)
    }
}

/// Kraus operators `I ⊗ ⟨k| ⊗ I` tracing out factor `traced`.
fn partial_trace_kraus(dims: &[usize], traced: usize) -> Result<Vec<Operator>> {
    if traced >= dims.len() || dims.contains(&0) {
        return Err(Error::domain(format!("cannot trace factor {traced} of {dims:?}")));
    }
    let before: usize = dims[..traced].iter().product();
    let after: usize = dims[traced + 1..].iter().product();
    let dt = dims[traced];
    let mut out = Vec::with_capacity(dt);
    for k in 0..dt {
        let mut bra = Operator::zeros(1, dt);
        bra[(0, k)] = ONE;
        let left = tensor_product(&identity(before), &bra)?;
        out.push(tensor_product(&left, &identity(after))?);
    }
    Ok(out)
}

/// `N ⊗ id_d`, convenient for stabilization checks.
pub fn extend_with_identity(channel: &QuantumChannel, d: usize) -> Result<QuantumChannel> {
    channel.tensor(&QuantumChannel::identity(d))
}
