//! Reduced density matrices of the XXX spin chain through the fermionic basis.
//!
//! The pipeline has two halves. The exact half fixes, for every interval
//! length `n`, the rational matrix `X(n)` relating invariant local operators
//! to the fermionic basis, using random unphysical Matsubara data. The
//! numerical half supplies the Taylor matrix of `ω(λ,μ)` for a physical
//! state (zero temperature or a thermal state) and assembles density
//! matrices, spectra, entropies and emptiness formation probabilities.

pub mod cx;
pub mod density;
pub mod error;
pub mod exec;
pub mod fermion_basis;
pub mod linalg;
pub mod matsubara;
pub mod numerics;
pub mod omega_exact;
pub mod omega_thermal;
pub mod operator_space;
pub mod pipeline;
pub mod poly;
pub mod schur_engine;
pub mod xsolver;

pub use error::{Error, Result};
pub use exec::Exec;
