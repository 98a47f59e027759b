//! Constructive additive combinatorics over small finite abelian groups.
//!
//! - [`group`]: `Z_{m1} x ... x Z_{mk}`, elements, characters, scalar action on `F_p^n`.
//! - [`harmonic`]: Fourier transform, convolution and norms under counting or probability measure.
//! - [`additive`]: sumsets, correlations, spectra, symmetry sets, additive energy, `Lambda_c`.
//! - [`spanstruct`]: spans, dissociated sets and certified span covers.
//! - [`increment`]: density-increment lemmas, the iteration trichotomy and the driver.
//!
//! Set-level thresholds are compared exactly on integer counts; Fourier-side
//! thresholds use a one-sided slack of [`INCLUSION_SLACK`] toward inclusion.

pub mod additive;
pub mod error;
pub mod generate;
pub mod group;
pub mod harmonic;
pub mod increment;
pub mod linalg;
pub mod spanstruct;
pub mod threshold;

pub use error::{Error, Result};
pub use group::{Character, Group, GroupElement};
pub use threshold::Threshold;

/// Tolerance for floating-point comparisons; threshold tests lean toward inclusion.
pub const INCLUSION_SLACK: f64 = 1e-9;
