//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors produced by coupling maps, transfer-matrix propagation and the
/// spectral solvers.
///
/// Variants split into two classes: *validation* errors (malformed input,
/// out-of-range parameters) and *mathematical precondition* errors (the
/// input is well-formed but sits on a degenerate manifold where the
/// requested map does not exist). [`Error::is_math_precondition`]
/// distinguishes them, which the CLI maps onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The reduction denominator of the tree-to-halfline map vanishes.
    #[error("reduction denominator vanishes{}", fmt_generation(.generation))]
    DegenerateDenominator { generation: Option<usize> },

    /// The branching number recovered from interface data is not a positive
    /// integer, so the data is not in the image of the reduction map.
    #[error("recovered branching number {value} is not an integer >= 1")]
    NonIntegerBranching { value: f64 },

    /// Separating interface data: the transfer matrix across the point does
    /// not exist and the operator decomposes there.
    #[error("separating interface decouples the system{}", fmt_generation(.generation))]
    Decoupled { generation: Option<usize> },

    /// An operation requiring periodic structure was called on a system
    /// without a period hint.
    #[error("halfline system carries no period hint")]
    NoPeriod,

    /// The two Floquet multipliers coincide (band edge); no decaying/growing
    /// splitting exists.
    #[error("Floquet multipliers coincide within tolerance")]
    DegenerateFloquet,

    /// The real shooting solver was handed a coupling with Im c != 0.
    #[error("complex interface coupling unsupported by the shooting solver{}", fmt_generation(.generation))]
    ComplexCouplingUnsupported { generation: Option<usize> },

    /// A condition report over zero generations was requested.
    #[error("condition check requires a nonempty generation prefix")]
    EmptyPrefix,

    /// The truncated secular system exceeds the configured size cap.
    #[error("secular system needs {unknowns} unknowns, above the cap {cap}")]
    DepthTooLarge { unknowns: usize, cap: usize },

    /// The periodicity detector needs at least two full candidate periods.
    #[error("word of length {len} too short for bounds (preperiod {max_preperiod}, period {max_period})")]
    WindowTooShort {
        len: usize,
        max_preperiod: usize,
        max_period: usize,
    },

    /// A periodic word generator was given an empty block.
    #[error("periodic word block must be nonempty")]
    EmptyBlock,

    /// A substitution rule or letter assignment is missing.
    #[error("no rule or letter data for symbol '{0}'")]
    UndefinedLetter(char),

    /// Malformed input or violated call precondition.
    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors that signal a violated mathematical precondition on
    /// well-formed input (degenerate denominators, separating couplings,
    /// missing Floquet splitting, ...), as opposed to input validation.
    pub fn is_math_precondition(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator { .. }
                | Error::NonIntegerBranching { .. }
                | Error::Decoupled { .. }
                | Error::NoPeriod
                | Error::DegenerateFloquet
                | Error::ComplexCouplingUnsupported { .. }
        )
    }

    /// Generation (1-based interaction index) attached to the error, if any.
    pub fn generation(&self) -> Option<usize> {
        match self {
            Error::DegenerateDenominator { generation }
            | Error::Decoupled { generation }
            | Error::ComplexCouplingUnsupported { generation } => *generation,
            _ => None,
        }
    }

    /// Attach a generation index if the variant carries one and none is set.
    pub fn with_generation(self, g: usize) -> Self {
        match self {
            Error::DegenerateDenominator { generation: None } => {
                Error::DegenerateDenominator { generation: Some(g) }
            }
            Error::Decoupled { generation: None } => Error::Decoupled { generation: Some(g) },
            Error::ComplexCouplingUnsupported { generation: None } => {
                Error::ComplexCouplingUnsupported { generation: Some(g) }
            }
            other => other,
        }
    }
}

fn fmt_generation(g: &Option<usize>) -> String {
    match g {
        Some(g) => format!(" at generation {g}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
