//! Shared fixtures for the criterion benchmarks.

use treespec_core::couplings::{preset, CouplingPreset, InterfaceCoupling};
use treespec_core::halfline::{BoundaryAngle, HalflineSystem};
use treespec_core::tree::RadialTreeSpec;

/// Delta chain of unit spacing and strength 1 with `n` stored points.
pub fn delta_chain(n: usize) -> HalflineSystem {
    HalflineSystem::uniform_chain(
        0.0,
        1.0,
        n,
        InterfaceCoupling::real(1.0, 0.0, 0.0),
        BoundaryAngle::DIRICHLET,
    )
    .expect("valid chain")
}

/// Standard-coupling binary tree with unit gaps and Dirichlet root.
pub fn standard_tree(generations: usize) -> RadialTreeSpec {
    RadialTreeSpec::uniform(
        1.0,
        preset(CouplingPreset::Standard, 2),
        generations,
        BoundaryAngle::DIRICHLET,
    )
    .expect("valid tree")
}
