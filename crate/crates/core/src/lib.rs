//! Symmetry-reduced semiclassical spectra at desk scale.
//!
//! The crate couples three layers around one family of model Hamiltonians:
//!
//! - **classical**: compact orthogonal group actions on phase space, Hamilton
//!   flows with variational equations, relative periodic orbits and their
//!   non-degeneracy certificates ([`group`], [`dynamics`]);
//! - **quantum**: Weyl/standard quantization of polynomial symbols in a
//!   Hermite Galerkin basis, isotypic projectors and reduced spectra
//!   ([`quantization`]);
//! - **asymptotic**: leading-order eigenvalue counts, spectral distributions,
//!   oscillatory-phase machinery and trace-formula peak predictions, checked
//!   against the quantum side over grids of the small parameter h
//!   ([`asymptotics`]).
//!
//! [`models`] holds the built-in registry; `aniso-ho-so2` is the reference
//! system exercised by the acceptance suite.

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod group;
pub mod models;
pub mod quad;
pub mod quantization;
pub mod symbol;

pub use error::{EquiweylError, Result};
