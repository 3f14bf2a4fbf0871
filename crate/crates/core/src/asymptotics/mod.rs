//! Leading-order spectral asymptotics and their comparison against computed
//! spectra: eigenvalue-count scaling, spectral distributions, oscillatory
//! phases, and periodic-orbit peak predictions.

pub mod gutzwiller;
pub mod phase;
pub mod testfn;
pub mod weyl;

pub use gutzwiller::{gutzwiller_terms, GutzwillerTerm, ManifoldGrid};
pub use phase::{det_star, phase_function, phase_value, PhaseEvaluation};
pub use testfn::{EnergyBump, FourierWindow, PlateauCutoff, WindowShape};
pub use weyl::{
    leading_term_l0_chart, leading_term_l0_mc, trace_from_oracle, weyl_check, VolMode,
    WeylLawReport,
};
