//! Recovery maps for quantum channels and numerical checks of the
//! remainder-term entropy inequalities built on them.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: Hermitian spectra, matrix functions, Schatten norms,
//!   tensor products and partial traces.
//! - [`state`] and [`channel`]: validated states, Kraus channels and
//!   seeded random instances.
//! - [`entropy`]: relative entropy, fidelity and the related quantities.
//! - [`quadrature`] and [`recovery`]: the Petz map, its rotations and the
//!   universal recovery map as a quadrature mixture.
//! - [`verify`]: the inequality harness.
//! - [`io`]: file formats for instances and reports.

pub mod channel;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod random;
pub mod recovery;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
