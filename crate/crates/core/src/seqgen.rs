//! Generators for coupling-data sequences and a finite-window detector of
//! eventual periodicity.
//!
//! A [`DataWord`] is a finite word over letters `(gap, coupling)`, one per
//! generation starting at generation 1.  Besides plain periodic words the
//! module builds the power-of-two marking (default letter everywhere,
//! special letter at generations 2, 4, 8, ...) and substitution words
//! (Fibonacci, period doubling, ...), the standard aperiodic test data.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::couplings::VertexCoupling;
use crate::error::{invalid, Error, Result};
use crate::halfline::BoundaryAngle;
use crate::tree::RadialTreeSpec;

/// Tolerance for letter equality on computed (non-rational) data.
pub const LETTER_TOL: f64 = 1e-12;

/// One generation of data: the gap to the next generation and the vertex
/// coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Letter {
    pub gap: f64,
    pub coupling: VertexCoupling,
}

impl Letter {
    pub fn new(gap: f64, coupling: VertexCoupling) -> Self {
        Letter { gap, coupling }
    }

    pub fn close_to(&self, other: &Letter, tol: f64) -> bool {
        (self.gap - other.gap).abs() <= tol
            && self.coupling.b == other.coupling.b
            && (self.coupling.alpha - other.coupling.alpha).abs() <= tol
            && (self.coupling.beta - other.coupling.beta).abs() <= tol
            && (self.coupling.gamma - other.coupling.gamma).norm() <= tol
            && self.coupling.eigenphases.len() == other.coupling.eigenphases.len()
            && self
                .coupling
                .eigenphases
                .iter()
                .zip(&other.coupling.eigenphases)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Finite word of letters, indexed by generation (letter 0 is generation 1),
/// with its alphabet of distinct letters.
#[derive(Debug, Clone, Serialize)]
pub struct DataWord {
    letters: Vec<Letter>,
    alphabet: Vec<Letter>,
}

impl DataWord {
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        let mut alphabet: Vec<Letter> = Vec::new();
        for l in &letters {
            if !alphabet.iter().any(|a| a.close_to(l, LETTER_TOL)) {
                alphabet.push(l.clone());
            }
        }
        alphabet.sort_by(|a, b| letter_key(a).partial_cmp(&letter_key(b)).unwrap());
        DataWord { letters, alphabet }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    /// Word shifted left by one letter.
    pub fn shifted(&self) -> DataWord {
        DataWord::from_letters(self.letters[1..].to_vec())
    }

    /// Turn the word into a tree: gaps `t_1 - t_0, t_2 - t_1, ...` and one
    /// coupling per generation.  The word's gap at generation `n` is read
    /// as `t_n - t_{n-1}`, and a trailing unit gap closes the last edge.
    pub fn to_tree_spec(&self, root_angle: BoundaryAngle) -> Result<RadialTreeSpec> {
        if self.is_empty() {
            return Err(invalid("cannot build a tree from an empty word"));
        }
        let mut gaps: Vec<f64> = self.letters.iter().map(|l| l.gap).collect();
        gaps.push(*gaps.last().expect("nonempty"));
        let couplings = self.letters.iter().map(|l| l.coupling.clone()).collect();
        RadialTreeSpec::new(gaps, couplings, root_angle)
    }
}

fn letter_key(l: &Letter) -> (f64, f64, f64, f64, f64, u32) {
    (
        l.gap,
        l.coupling.alpha,
        l.coupling.beta,
        l.coupling.gamma.re,
        l.coupling.gamma.im,
        l.coupling.b,
    )
}

/// Preperiod followed by cyclic repetition of `block`, truncated to `length`.
pub fn periodic_word(block: &[Letter], preperiod: &[Letter], length: usize) -> Result<DataWord> {
    if block.is_empty() {
        return Err(Error::EmptyBlock);
    }
    let letters: Vec<Letter> = preperiod
        .iter()
        .cloned()
        .chain(block.iter().cycle().cloned())
        .take(length)
        .collect();
    Ok(DataWord::from_letters(letters))
}

/// `special` at generations 2, 4, 8, 16, ..., `default` elsewhere
/// (generation 1 is default: the marking starts at exponent 1).
pub fn power2_word(special: &Letter, default: &Letter, length: usize) -> DataWord {
    let letters = (1..=length)
        .map(|n| {
            if n >= 2 && n.is_power_of_two() {
                special.clone()
            } else {
                default.clone()
            }
        })
        .collect();
    DataWord::from_letters(letters)
}

/// Iterated substitution from `seed`: each pass rewrites every symbol by
/// its rule, and the final symbol string maps through `letter_map`.
pub fn substitution_word(
    rules: &HashMap<char, String>,
    letter_map: &HashMap<char, Letter>,
    seed: char,
    iterations: usize,
) -> Result<DataWord> {
    let mut symbols = vec![seed];
    for _ in 0..iterations {
        let mut next = Vec::with_capacity(symbols.len() * 2);
        for s in symbols {
            let image = rules.get(&s).ok_or(Error::UndefinedLetter(s))?;
            next.extend(image.chars());
        }
        symbols = next;
    }
    let letters = symbols
        .into_iter()
        .map(|s| letter_map.get(&s).cloned().ok_or(Error::UndefinedLetter(s)))
        .collect::<Result<Vec<Letter>>>()?;
    Ok(DataWord::from_letters(letters))
}

/// Smallest `(preperiod, period)` in lexicographic `(period, preperiod)`
/// order such that `word[i] = word[i + period]` for all
/// `i in [preperiod, len - period)`; `None` if no pair within the bounds
/// works.  Needs at least two full candidate periods inside the word.
pub fn detect_eventual_period(
    word: &DataWord,
    max_preperiod: usize,
    max_period: usize,
) -> Result<Option<(usize, usize)>> {
    let len = word.len();
    if max_period == 0 || max_preperiod + 2 * max_period > len {
        return Err(Error::WindowTooShort { len, max_preperiod, max_period });
    }
    let w = word.letters();
    for q in 1..=max_period {
        'pre: for p in 0..=max_preperiod {
            for i in p..(len - q) {
                if !w[i].close_to(&w[i + q], LETTER_TOL) {
                    continue 'pre;
                }
            }
            return Ok(Some((p, q)));
        }
    }
    Ok(None)
}
