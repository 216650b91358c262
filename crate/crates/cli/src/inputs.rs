//! Input JSON schemas.
//!
//! Tree specs deserialize straight into [`RadialTreeSpec`]:
//!
//! ```json
//! {"gaps": [1.0, 1.0], "generations": [{"alpha": 0.0, "beta": 0.0,
//!   "gamma": {"re": 0.0, "im": 0.0}, "b": 2, "eigenphases": [3.14159...]}],
//!  "root_angle": "dirichlet"}
//! ```
//!
//! Halfline systems carry the analogous fields plus optional `right_end`
//! (for truncated eigenvalue problems) and `basepoint` (for Weyl
//! evaluations); interface entries are `{"a": .., "q": .., "c": {..}}`.
//! Angles are radians; `"dirichlet"` and `"neumann"` are accepted.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use treespec_core::halfline::BoundaryAngle;
use treespec_core::seqgen::{self, DataWord, Letter};
use treespec_core::tree::RadialTreeSpec;
use treespec_core::HalflineSystem;

use crate::CliError;

#[derive(Debug, Deserialize)]
pub struct HalflineInput {
    #[serde(flatten)]
    pub system: HalflineSystem,
    /// Right truncation point for `eigs-halfline` and `transfer`.
    pub right_end: Option<f64>,
    /// Basepoint for `weyl` / `reflectionless` (default: middle of the
    /// first periodic gap).
    pub basepoint: Option<f64>,
}

/// Generator description for `gen-seq`; the output of the command is a
/// tree-spec JSON built from the generated word.
#[derive(Debug, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorInput {
    Periodic {
        block: Vec<Letter>,
        #[serde(default)]
        preperiod: Vec<Letter>,
        length: usize,
        root_angle: Option<BoundaryAngle>,
    },
    Power2 {
        special: Letter,
        default: Letter,
        length: usize,
        root_angle: Option<BoundaryAngle>,
    },
    Substitution {
        rules: HashMap<char, String>,
        letters: HashMap<char, Letter>,
        seed: char,
        iterations: usize,
        root_angle: Option<BoundaryAngle>,
    },
}

impl GeneratorInput {
    pub fn build(&self) -> Result<(DataWord, BoundaryAngle), CliError> {
        let (word, angle) = match self {
            GeneratorInput::Periodic { block, preperiod, length, root_angle } => {
                (seqgen::periodic_word(block, preperiod, *length)?, root_angle)
            }
            GeneratorInput::Power2 { special, default, length, root_angle } => {
                (seqgen::power2_word(special, default, *length), root_angle)
            }
            GeneratorInput::Substitution { rules, letters, seed, iterations, root_angle } => {
                (seqgen::substitution_word(rules, letters, *seed, *iterations)?, root_angle)
            }
        };
        Ok((word, angle.unwrap_or(BoundaryAngle::DIRICHLET)))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

pub fn load_tree(path: &Path) -> Result<RadialTreeSpec, CliError> {
    let spec: RadialTreeSpec = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("invalid tree spec: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_halfline(path: &Path) -> Result<HalflineInput, CliError> {
    let input: HalflineInput = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("invalid halfline system: {e}")))?;
    input.system.validate()?;
    Ok(input)
}

pub fn load_generator(path: &Path) -> Result<GeneratorInput, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("invalid generator description: {e}")))
}
