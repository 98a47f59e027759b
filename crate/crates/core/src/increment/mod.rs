//! Density-increment lemmas, the iteration trichotomy, and the audited driver.

mod driver;
mod lemmas;
mod subspace;

pub use driver::{
    iteration_step, roth_driver, DriverLimits, IncrementTranscript, ItposAudit, L2Pipeline,
    LambdaValue, StepCase, StepKnobs, StepOutcome, Termination, TranscriptStep,
};
pub use lemmas::{fourier_coefficient, l2_increment, linf_increment, restrict, spectral_mass, Increment};
pub use subspace::Subspace;
