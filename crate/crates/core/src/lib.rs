//! Differentially private counting under continual observation.
//!
//! The crate builds explicit factorizations `M_count = L·R` of the lower-triangular
//! all-ones counting matrix and runs the Gaussian matrix mechanism on top of them.
//! The main factorization uses `L = R`, a lower-triangular Toeplitz matrix whose
//! entries are the ratios `(2k−1)!!/(2k)!!`; its mean-squared error is within a
//! small additive constant of the best any matrix mechanism can achieve.
//!
//! Modules:
//!
//! - [`linalg`]: dense matrices, norms, spectra, pseudoinverse, PSD checks.
//! - [`workload`]: counting and parity workloads and closed-form bounds for them.
//! - [`factorization`]: square-root Toeplitz, binary-tree and Honaker factorizations.
//! - [`mechanism`]: noise calibration, the streaming counter, binary/matrix mechanism
//!   runners and a Monte-Carlo error harness.
//! - [`certificates`]: dual certificates witnessing lower bounds on `γ_F`.
//! - [`ftrl`]: private follow-the-regularized-leader on top of the counter.
//! - [`cli`]: the command implementations behind the `contcount` binary.

pub mod certificates;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod ftrl;
pub mod linalg;
pub mod mechanism;
pub mod workload;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SingularSpectrum};
pub use mechanism::PrivacyBudget;
