//! Spectral toolkit for Laplacians on radial metric trees with generalized
//! self-adjoint vertex couplings.
//!
//! The operators act as `-u''` on every edge of an infinite radial tree,
//! glued by per-generation coupling data `(alpha, beta, gamma, U)`.  Radial
//! symmetry reduces them to direct sums of halfline Laplacians with point
//! interactions, and this crate implements both sides of that picture and
//! the machinery around it:
//!
//! * [`couplings`] - the tree-to-halfline reduction of the coupling data,
//!   its inverse on the canonical branch, separating checks, and the
//!   admissibility-condition checker;
//! * [`halfline`] - point-interaction systems and transfer matrices;
//! * [`spectra`] - Floquet band structure, Titchmarsh-Weyl m-functions with
//!   the reflectionless defect, shooting eigenvalues, Lyapunov probe;
//! * [`tree`] - the direct secular eigensolver on truncated trees and the
//!   multiplicity-weighted comparison against the halfline direct sum;
//! * [`seqgen`] - coupling-sequence generators (periodic, power-of-two
//!   marking, substitution words) and an eventual-periodicity detector.

pub mod couplings;
pub mod error;
pub mod grid;
pub mod halfline;
pub mod seqgen;
pub mod serde_complex;
pub mod spectra;
pub mod tree;

pub use couplings::{
    check_conditions, preset, reconstruct_coupling, reduce_coupling, reduction_denominator,
    ConditionReport, CouplingPreset, InterfaceCoupling, VertexCoupling,
};
pub use error::{Error, Result};
pub use halfline::{
    free_transfer, interface_transfer, monodromy, monodromy_at, propagate, BoundaryAngle,
    HalflineSystem, PeriodHint, TransferMatrix,
};
pub use seqgen::{
    detect_eventual_period, periodic_word, power2_word, substitution_word, DataWord, Letter,
};
pub use spectra::{
    band_structure, band_tests, halfline_eigenvalues, in_band, lyapunov_exponent,
    reflectionless_defect, reflectionless_defect_limit, weyl_m, BandStructure, WeylValue,
};
pub use tree::{
    assemble_secular, compare_spectra, direct_sum_components, halfline_direct_sum_eigenvalues,
    tree_eigenvalues, RadialTreeSpec, SecularBasis, SecularOptions, SpectralComparison,
    TreeEigenvalue,
};

pub use num_complex::Complex64;
