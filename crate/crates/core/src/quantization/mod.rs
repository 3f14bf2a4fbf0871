//! Weyl/standard quantization in a tensor Hermite basis, isotypic projectors,
//! and reduced spectra.

pub mod basis;
pub mod expansion;
pub mod spectra;
pub mod symmetry;

pub use basis::{quantize, quantize_complex, GalerkinBasis, OperatorMatrix, Ordering};
pub use expansion::{quantization_change_expansion, GradedSymbol};
pub use spectra::{
    cluster_eigenvalues, mark_trusted, reduced_spectrum, trace_f, SpectralData, SpectralLine,
};
pub use symmetry::{
    circular_labels, circular_transform, isotypic_projector, representation_matrix,
    so2_sector_hamiltonian, SectorState,
};
