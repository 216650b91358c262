//! Vertex couplings on radial trees, generalized point-interaction data on
//! the halfline, and the reduction map between them.
//!
//! A generation of tree vertices carries the self-adjoint coupling data
//! `(alpha, beta, gamma, U)` with `U` a unitary acting on the non-radial
//! directions; only the eigenphases of `U` matter for the halfline picture,
//! so that is what [`VertexCoupling`] stores.  The radial part of the
//! operator reduces to a halfline Laplacian with point interactions whose
//! data `(a, q, c)` is given by a rational map of the tree data; this module
//! implements that map ([`reduce_coupling`]), its inverse on the canonical
//! branch ([`reconstruct_coupling`]), the separating criteria, and a
//! finite-horizon checker for the admissibility conditions under which the
//! data sequence is uniquely recoverable from the halfline side (the regime
//! where absolutely continuous spectrum forces eventual periodicity).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tree::RadialTreeSpec;

/// Absolute tolerance for the separating criterion `alpha*beta + |gamma|^2 = 4`.
pub const SEPARATING_TOL: f64 = 1e-9;
/// Absolute tolerance below which the reduction denominator counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-9;
/// Absolute tolerance for snapping a recovered branching number to an integer.
pub const INTEGER_B_TOL: f64 = 1e-9;

/// Coupling data of one tree generation: `(alpha, beta, gamma)` together
/// with the branching number and the eigenphases of the unitary acting on
/// the non-radial subspace (stored under the fixed canonical row basis, see
/// [`crate::tree::SecularBasis`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCoupling {
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "crate::serde_complex")]
    pub gamma: Complex64,
    /// Branching number, at least 1.
    pub b: u32,
    /// Exactly `b - 1` angles in `(-pi, pi]`; empty on couplings recovered
    /// by [`reconstruct_coupling`], which cannot see them.
    pub eigenphases: Vec<f64>,
}

impl VertexCoupling {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: Complex64,
        b: u32,
        eigenphases: Vec<f64>,
    ) -> Result<Self> {
        let c = VertexCoupling { alpha, beta, gamma, b, eigenphases };
        c.validate()?;
        Ok(c)
    }

    /// Shorthand for couplings with real `gamma` and all eigenphases `pi`
    /// (the `U = -I` choice used by the standard and delta families).
    pub fn real(alpha: f64, beta: f64, gamma: f64, b: u32) -> Self {
        VertexCoupling {
            alpha,
            beta,
            gamma: Complex64::new(gamma, 0.0),
            b,
            eigenphases: vec![std::f64::consts::PI; (b as usize).saturating_sub(1)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b < 1 {
            return Err(invalid("branching number must be at least 1"));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(invalid("coupling entries must be finite"));
        }
        if !self.eigenphases.is_empty() && self.eigenphases.len() != self.b as usize - 1 {
            return Err(invalid(format!(
                "expected {} eigenphases for branching number {}, got {}",
                self.b - 1,
                self.b,
                self.eigenphases.len()
            )));
        }
        for &t in &self.eigenphases {
            if !t.is_finite() || t <= -std::f64::consts::PI - 1e-12 || t > std::f64::consts::PI + 1e-12 {
                return Err(invalid("eigenphases must lie in (-pi, pi]"));
            }
        }
        Ok(())
    }

    /// Separating criterion `alpha*beta + |gamma|^2 = 4`, `Im gamma = 0`:
    /// such conditions disconnect the subtree above the vertex.
    pub fn is_separating(&self) -> bool {
        self.is_separating_with(SEPARATING_TOL)
    }

    pub fn is_separating_with(&self, tol: f64) -> bool {
        let s = self.alpha * self.beta + self.gamma.norm_sqr();
        (s - 4.0).abs() <= tol && self.gamma.im.abs() <= tol
    }

    /// Compare the data entering the reduction map (eigenphases excluded).
    pub fn data_close_to(&self, other: &VertexCoupling, tol: f64) -> bool {
        self.b == other.b
            && (self.alpha - other.alpha).abs() <= tol
            && (self.beta - other.beta).abs() <= tol
            && (self.gamma - other.gamma).norm() <= tol
    }
}

/// Point-interaction data `(a, q, c)` at one halfline interaction point;
/// `a` multiplies the mean value, `q` the mean derivative, `c` couples them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceCoupling {
    pub a: f64,
    pub q: f64,
    #[serde(with = "crate::serde_complex")]
    pub c: Complex64,
}

impl InterfaceCoupling {
    pub fn new(a: f64, q: f64, c: Complex64) -> Result<Self> {
        if !(a.is_finite() && q.is_finite() && c.is_finite()) {
            return Err(invalid("interface coupling entries must be finite"));
        }
        Ok(InterfaceCoupling { a, q, c })
    }

    pub fn real(a: f64, q: f64, c: f64) -> Self {
        InterfaceCoupling { a, q, c: Complex64::new(c, 0.0) }
    }

    /// The trivial interaction: solutions pass through unchanged.
    pub fn trivial() -> Self {
        InterfaceCoupling::real(0.0, 0.0, 0.0)
    }

    /// Separating criterion `a*q + |c|^2 = 4`, `Im c = 0`; exactly the
    /// locus where the interface transfer matrix ceases to exist.
    pub fn is_separating(&self) -> bool {
        self.is_separating_with(SEPARATING_TOL)
    }

    pub fn is_separating_with(&self, tol: f64) -> bool {
        let s = self.a * self.q + self.c.norm_sqr();
        (s - 4.0).abs() <= tol && self.c.im.abs() <= tol
    }

    pub fn close_to(&self, other: &InterfaceCoupling, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.q - other.q).abs() <= tol
            && (self.c - other.c).norm() <= tol
    }
}

/// Preset vertex-coupling families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingPreset {
    /// Standard (Kirchhoff/natural): continuity plus derivative balance.
    Standard,
    /// Delta coupling of the given strength: continuity, derivative sum
    /// proportional to the common value.
    Delta(f64),
    /// Weighted delta-prime coupling: matched derivatives, value jump
    /// proportional to the derivative.
    DeltaPrime(f64),
}

/// Build the preset coupling for branching number `b >= 1`.
///
/// Standard and delta use `U = -I` (all eigenphases `pi`); delta-prime uses
/// `U = I` (all eigenphases `0`).
pub fn preset(kind: CouplingPreset, b: u32) -> VertexCoupling {
    let phases = |v: f64| vec![v; (b as usize).saturating_sub(1)];
    match kind {
        CouplingPreset::Standard => VertexCoupling {
            alpha: 0.0,
            beta: 0.0,
            gamma: Complex64::new(0.0, 0.0),
            b,
            eigenphases: phases(std::f64::consts::PI),
        },
        CouplingPreset::Delta(alpha) => VertexCoupling {
            alpha,
            beta: 0.0,
            gamma: Complex64::new(0.0, 0.0),
            b,
            eigenphases: phases(std::f64::consts::PI),
        },
        CouplingPreset::DeltaPrime(beta) => VertexCoupling {
            alpha: 0.0,
            beta,
            gamma: Complex64::new(0.0, 0.0),
            b,
            eigenphases: phases(0.0),
        },
    }
}

/// Common denominator of the reduction map,
/// `4 (sqrt b + 1)^2 + (alpha beta + |gamma|^2)(sqrt b - 1)^2 + 4 (1 - b) Re gamma`.
///
/// Nonvanishing of this expression is exactly admissibility condition (c)
/// for the generation.
pub fn reduction_denominator(c: &VertexCoupling) -> f64 {
    let bf = c.b as f64;
    let sq = bf.sqrt();
    let s = c.alpha * c.beta + c.gamma.norm_sqr();
    4.0 * (sq + 1.0) * (sq + 1.0) + s * (sq - 1.0) * (sq - 1.0) + 4.0 * (1.0 - bf) * c.gamma.re
}

/// Map tree coupling data to the halfline interface data of the radial part.
///
/// For `b = 1` the map is the identity on `(alpha, beta, gamma)`.
pub fn reduce_coupling(c: &VertexCoupling) -> Result<InterfaceCoupling> {
    let d = reduction_denominator(c);
    if d.abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateDenominator { generation: None });
    }
    let bf = c.b as f64;
    let sq = bf.sqrt();
    let s = c.alpha * c.beta + c.gamma.norm_sqr();
    let a = 16.0 * c.alpha / d;
    let q = 16.0 * bf * c.beta / d;
    let c_re = 2.0 * ((1.0 - bf) * (4.0 + s) + 4.0 * (bf + 1.0) * c.gamma.re) / d;
    let c_im = 2.0 * (8.0 * sq * c.gamma.im) / d;
    Ok(InterfaceCoupling { a, q, c: Complex64::new(c_re, c_im) })
}

/// Invert the reduction map on its canonical branch.
///
/// `Re c = 0` gives back the data unchanged with `b = 1` (unique preimage
/// when `a*q + |c|^2 + 4 != 0`).  Otherwise the branching number is
/// recovered as a rational expression in the interface data and must come
/// out an integer `>= 2`; the returned coupling is the `Re gamma = 0`
/// representative of the fiber (the map is not injective in `Re gamma`),
/// with no eigenphase data.
pub fn reconstruct_coupling(m: &InterfaceCoupling) -> Result<VertexCoupling> {
    if m.c.re.abs() <= DEGENERATE_TOL {
        // b = 1 branch: the interface data is the vertex data itself.  The
        // preimage is unique only when a*q + |c|^2 + 4 != 0; otherwise
        // higher-branching preimages exist too and this is merely the
        // canonical representative.
        return Ok(VertexCoupling {
            alpha: m.a,
            beta: m.q,
            gamma: m.c,
            b: 1,
            eigenphases: Vec::new(),
        });
    }

    let two = Complex64::new(2.0, 0.0);
    let denom = (two + m.c).norm_sqr() + m.a * m.q;
    if denom.abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateDenominator { generation: None });
    }
    let b_raw = ((two - m.c).norm_sqr() + m.a * m.q) / denom;
    let b_round = b_raw.round();
    if (b_raw - b_round).abs() > INTEGER_B_TOL || b_round < 2.0 {
        return Err(Error::NonIntegerBranching { value: b_raw });
    }
    let bf = b_round;
    let sq = bf.sqrt();

    let denom2 = m.c.re * (sq - 1.0) * (sq - 1.0) - 2.0 * (1.0 - bf);
    if denom2.abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateDenominator { generation: None });
    }
    let scale = -32.0 * (1.0 - bf) * sq / denom2;

    Ok(VertexCoupling {
        alpha: m.a * scale / 16.0,
        beta: m.q * scale / (16.0 * bf),
        gamma: Complex64::new(0.0, m.c.im * scale / (16.0 * sq)),
        b: b_round as u32,
        eigenphases: Vec::new(),
    })
}

/// Finite-horizon evidence report for the admissibility conditions (a)-(d),
/// evaluated on generations `1..=horizon`.
///
/// The flags certify only the examined prefix (`finite_horizon_only` is
/// always set): a flag is true iff the corresponding offender list is
/// empty on that prefix.  The conditions themselves tolerate finitely many
/// exceptions, which a finite prefix cannot distinguish from persistent
/// failure.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub horizon: usize,
    /// Reports are evidence about a prefix, never proofs about the tree.
    pub finite_horizon_only: bool,
    /// Distinct values seen among gaps, branching numbers and coefficients.
    pub distinct_gaps: usize,
    pub distinct_b: usize,
    pub distinct_alpha: usize,
    pub distinct_beta: usize,
    pub distinct_gamma: usize,
    /// Generations with branching number 1 (condition (a), second clause).
    pub b_equal_one: Vec<usize>,
    pub cond_a: bool,
    /// Generations whose coupling is separating (condition (b)).
    pub separating_generations: Vec<usize>,
    pub cond_b: bool,
    /// Generations where the reduction denominator vanishes (condition (c)).
    pub degenerate_denominator: Vec<usize>,
    pub cond_c: bool,
    /// Generations violating condition (d): `Re gamma != 0` or
    /// `alpha beta + |gamma|^2 + 4 = 0`.
    pub cond_d_offenders: Vec<usize>,
    pub cond_d: bool,
    /// Minimum gap over the examined prefix.
    pub tau: f64,
}

/// Evaluate the admissibility conditions on the first `horizon` generations.
pub fn check_conditions(spec: &RadialTreeSpec, horizon: usize) -> Result<ConditionReport> {
    if horizon == 0 {
        return Err(Error::EmptyPrefix);
    }
    if spec.couplings().len() < horizon {
        return Err(invalid(format!(
            "horizon {} exceeds available prefix of {} generations",
            horizon,
            spec.couplings().len()
        )));
    }
    let gaps = &spec.gaps()[..spec.gaps().len().min(horizon + 1)];
    let couplings = &spec.couplings()[..horizon];

    let mut b_equal_one = Vec::new();
    let mut separating = Vec::new();
    let mut degenerate = Vec::new();
    let mut cond_d_offenders = Vec::new();
    for (i, c) in couplings.iter().enumerate() {
        let generation = i + 1;
        if c.b == 1 {
            b_equal_one.push(generation);
        }
        if c.is_separating() {
            separating.push(generation);
        }
        if reduction_denominator(c).abs() <= DEGENERATE_TOL {
            degenerate.push(generation);
        }
        let s4 = c.alpha * c.beta + c.gamma.norm_sqr() + 4.0;
        if c.gamma.re.abs() > SEPARATING_TOL || s4.abs() <= SEPARATING_TOL {
            cond_d_offenders.push(generation);
        }
    }

    let tau = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let report = ConditionReport {
        horizon,
        finite_horizon_only: true,
        distinct_gaps: distinct_count(gaps.iter().copied()),
        distinct_b: distinct_count(couplings.iter().map(|c| c.b as f64)),
        distinct_alpha: distinct_count(couplings.iter().map(|c| c.alpha)),
        distinct_beta: distinct_count(couplings.iter().map(|c| c.beta)),
        distinct_gamma: distinct_gamma_count(couplings),
        cond_a: b_equal_one.is_empty(),
        b_equal_one,
        cond_b: separating.is_empty(),
        separating_generations: separating,
        cond_c: degenerate.is_empty(),
        degenerate_denominator: degenerate,
        cond_d: cond_d_offenders.is_empty(),
        cond_d_offenders,
        tau,
    };
    Ok(report)
}

const VALUE_TOL: f64 = 1e-12;

fn distinct_count(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut n = 0;
    let mut last = f64::NEG_INFINITY;
    for x in v {
        if n == 0 || (x - last).abs() > VALUE_TOL {
            n += 1;
            last = x;
        }
    }
    n
}

fn distinct_gamma_count(couplings: &[VertexCoupling]) -> usize {
    let mut v: Vec<Complex64> = couplings.iter().map(|c| c.gamma).collect();
    v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut n = 0;
    let mut last = Complex64::new(f64::NEG_INFINITY, 0.0);
    for x in v {
        if n == 0 || (x - last).norm() > VALUE_TOL {
            n += 1;
            last = x;
        }
    }
    n
}
