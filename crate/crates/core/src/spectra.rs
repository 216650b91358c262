//! Spectral computations on halfline systems: Floquet bands of periodic
//! data, Titchmarsh-Weyl m-functions with the reflectionless defect,
//! truncated-system eigenvalues by shooting, and a Lyapunov-exponent probe
//! for aperiodic data.
//!
//! For a periodic system the monodromy `T(z)` over one period governs
//! everything: a real energy lies in a spectral band iff `T(E)` has an
//! eigenvalue on the unit circle (for real entries and unit determinant
//! this is `|tr T| <= 2`), and for `Im z > 0` the two Floquet multipliers
//! split off the circle, the eigenvector of the inner one being the Cauchy
//! data of the solution square-integrable at `+inf`.  That gives
//! `m_+(z, t) = u'(t)/u(t)` directly; the growing eigenvector gives
//! `m_-(z, t) = -u'(t)/u(t)` for the two-sided periodization.  On the
//! absolutely continuous bands the boundary values satisfy
//! `m_+(E + i0) = -conj(m_-(E + i0))`: the reflectionless identity whose
//! defect this module measures.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::halfline::{monodromy, monodromy_at, propagate, HalflineSystem, TransferMatrix};

/// Tolerance on `|lambda| - 1` for the unit-circle band test.
pub const BAND_MODULUS_TOL: f64 = 1e-8;
/// Slack on `|tr| <= 2` for the trace band test (absorbs roundoff in the
/// trace; the two tests then classify identically except on an interval of
/// width far below the band-edge refinement).
pub const TRACE_TOL: f64 = 1e-12;
/// Width to which band edges are refined by bisection.
pub const EDGE_REFINE_TOL: f64 = 1e-10;
/// eta sweep used for boundary values `m(E + i0)`: evaluate at `E + i eta`
/// and extrapolate linearly from the two smallest values.
pub const DEFAULT_ETA_SWEEP: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Band structure over an energy window: disjoint closed bands, sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStructure {
    pub window: (f64, f64),
    pub bands: Vec<(f64, f64)>,
    pub grid_points: usize,
}

impl BandStructure {
    /// Gaps between consecutive bands inside the window.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.bands
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .collect()
    }
}

/// Outcome of the two band membership tests at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPointTest {
    /// Unit-circle test: some Floquet multiplier has `||lambda| - 1|` below
    /// [`BAND_MODULUS_TOL`].
    pub modulus_in_band: bool,
    /// `|tr T| <= 2` test; only meaningful when the monodromy has real
    /// trace and unit determinant, `None` otherwise.
    pub trace_in_band: Option<bool>,
}

/// Floquet radius `max |lambda|` of the monodromy at real energy `E`.
///
/// The multipliers satisfy `|lambda_1 lambda_2| = 1`, so the radius is 1
/// exactly on bands and `> 1` on gaps.
pub fn floquet_radius(sys: &HalflineSystem, energy: f64) -> Result<f64> {
    let t = monodromy(sys, Complex64::new(energy, 0.0))?;
    let (l1, _) = t.eigenvalues();
    Ok(l1.norm())
}

/// Unit-circle band membership at real energy `E`.
pub fn in_band(sys: &HalflineSystem, energy: f64) -> Result<bool> {
    Ok(floquet_radius(sys, energy)? - 1.0 <= BAND_MODULUS_TOL)
}

/// Run both band tests at `E`.
pub fn band_tests(sys: &HalflineSystem, energy: f64) -> Result<BandPointTest> {
    let t = monodromy(sys, Complex64::new(energy, 0.0))?;
    let (l1, _) = t.eigenvalues();
    let modulus_in_band = l1.norm() - 1.0 <= BAND_MODULUS_TOL;
    let tr = t.m[0][0] + t.m[1][1];
    let trace_applicable = tr.im.abs() <= 1e-9 && (t.det() - Complex64::new(1.0, 0.0)).norm() <= 1e-9;
    let trace_in_band = trace_applicable.then(|| tr.re.abs() <= 2.0 + TRACE_TOL);
    Ok(BandPointTest { modulus_in_band, trace_in_band })
}

/// Compute the Floquet band structure of a periodic system over the window
/// with a `grid_points` scan; band edges are refined by bisection to
/// [`EDGE_REFINE_TOL`].
pub fn band_structure(
    sys: &HalflineSystem,
    window: (f64, f64),
    grid_points: usize,
) -> Result<BandStructure> {
    let energies = grid_linear(window, grid_points)?;
    // Surface structural errors (no period, separating coupling) once.
    let _ = in_band(sys, energies[0])?;
    let flags: Vec<bool> = energies
        .par_iter()
        .map(|&e| in_band(sys, e))
        .collect::<Result<Vec<bool>>>()?;

    let refine = |mut lo: f64, mut hi: f64, lo_state: bool| -> Result<f64> {
        while hi - lo > EDGE_REFINE_TOL {
            let mid = 0.5 * (lo + hi);
            if in_band(sys, mid)? == lo_state {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let mut bands = Vec::new();
    let mut start: Option<f64> = flags[0].then_some(window.0);
    for i in 1..energies.len() {
        if flags[i - 1] == flags[i] {
            continue;
        }
        let edge = refine(energies[i - 1], energies[i], flags[i - 1])?;
        if flags[i] {
            start = Some(edge);
        } else {
            bands.push((start.take().unwrap_or(window.0), edge));
        }
    }
    if let Some(s) = start {
        bands.push((s, window.1));
    }
    Ok(BandStructure { window, bands, grid_points })
}

fn grid_linear(window: (f64, f64), n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("window must be a finite nonempty interval"));
    }
    if n < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Weyl m-functions of the two-sided periodization at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylValue {
    #[serde(with = "crate::serde_complex")]
    pub m_plus: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub m_minus: Complex64,
    pub basepoint: f64,
    #[serde(with = "crate::serde_complex")]
    pub energy: Complex64,
}

impl WeylValue {
    /// `|m_+ + conj(m_-)|`, zero exactly when the data is reflectionless
    /// at this energy.
    pub fn reflection_defect(&self) -> f64 {
        (self.m_plus + self.m_minus.conj()).norm()
    }
}

/// Titchmarsh-Weyl m-functions `m_(z, t) = +- u'_(t)/u_(t)` of the
/// periodized system, from the Floquet eigenvectors of the monodromy based
/// at `basepoint`.
///
/// Requires `Im z > 0`; boundary values on the real axis are reached by the
/// eta sweep in [`reflectionless_defect_limit`].  Preperiodic data is
/// invisible here: the two-sided periodization is the object carrying both
/// halfline m-functions.
pub fn weyl_m(sys: &HalflineSystem, z: Complex64, basepoint: f64) -> Result<WeylValue> {
    if !z.im.is_finite() || z.im <= 0.0 {
        return Err(invalid("Weyl evaluation needs Im z > 0; add an explicit eta"));
    }
    let t = monodromy_at(sys, z, basepoint)?;
    let (grow, decay) = t.eigenvalues();
    if (grow - decay).norm() < 1e-12 {
        return Err(Error::DegenerateFloquet);
    }
    let vd = t.eigenvector(decay);
    let vg = t.eigenvector(grow);
    let scale = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    if vd[0].norm_sqr() < 1e-28 * scale(&vd) || vg[0].norm_sqr() < 1e-28 * scale(&vg) {
        return Err(Error::DegenerateFloquet);
    }
    Ok(WeylValue {
        m_plus: vd[1] / vd[0],
        m_minus: -vg[1] / vg[0],
        basepoint,
        energy: z,
    })
}

/// Reflectionless defect `|m_+(E + i eta) + conj(m_-(E + i eta))|`.
pub fn reflectionless_defect(
    sys: &HalflineSystem,
    energy: f64,
    eta: f64,
    basepoint: f64,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta must be positive"));
    }
    Ok(weyl_m(sys, Complex64::new(energy, eta), basepoint)?.reflection_defect())
}

/// Boundary-value defect `|m_+(E + i0) + conj(m_-(E + i0))|`, estimated by
/// evaluating along the eta sweep and extrapolating linearly in eta from
/// the two smallest values.
pub fn reflectionless_defect_limit(
    sys: &HalflineSystem,
    energy: f64,
    basepoint: f64,
    etas: &[f64],
) -> Result<f64> {
    if etas.is_empty() {
        return Err(invalid("eta sweep must be nonempty"));
    }
    let mut sweep: Vec<f64> = etas.to_vec();
    sweep.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let defects: Vec<f64> = sweep
        .iter()
        .map(|&eta| reflectionless_defect(sys, energy, eta, basepoint))
        .collect::<Result<Vec<f64>>>()?;
    if defects.len() == 1 {
        return Ok(defects[0]);
    }
    let (ea, eb) = (sweep[sweep.len() - 2], sweep[sweep.len() - 1]);
    let (da, db) = (defects[defects.len() - 2], defects[defects.len() - 1]);
    Ok(((db * ea - da * eb) / (ea - eb)).abs())
}

/// Eigenvalues of the truncated system on `[origin, right_end]` with the
/// system's left boundary condition and a Dirichlet condition at
/// `right_end`, located by a sign-change scan of the shooting solution on
/// a `grid_points` grid (uniform in `sqrt E`) plus bisection.
///
/// Couplings must be real (`Im c = 0`): the scan relies on real secular
/// values.  Complex couplings are fully supported by the band machinery
/// instead.
pub fn halfline_eigenvalues(
    sys: &HalflineSystem,
    right_end: f64,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<f64>> {
    for (i, c) in sys.couplings().iter().enumerate() {
        if c.c.im.abs() > 1e-12 {
            return Err(Error::ComplexCouplingUnsupported { generation: Some(i + 1) });
        }
    }
    if !right_end.is_finite() || right_end <= sys.origin() {
        return Err(invalid("right end must lie beyond the origin"));
    }
    let energies = grid::sqrt_spaced(window, grid_points)?;
    let shoot = |e: f64| -> Result<f64> {
        let t = propagate(sys, Complex64::new(e, 0.0), sys.origin(), right_end)?;
        Ok(t.apply(sys.left_boundary().initial_data())[0].re)
    };
    // Surface structural errors once before the parallel sweep.
    let _ = shoot(energies[0])?;
    let values: Vec<f64> = energies
        .par_iter()
        .map(|&e| shoot(e))
        .collect::<Result<Vec<f64>>>()?;

    let mut roots = Vec::new();
    for i in 1..energies.len() {
        let (mut lo, mut hi) = (energies[i - 1], energies[i]);
        let (mut flo, fhi) = (values[i - 1], values[i]);
        if flo == 0.0 {
            if i == 1 {
                roots.push(lo);
            }
            continue;
        }
        if fhi == 0.0 {
            roots.push(hi);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        while hi - lo > EDGE_REFINE_TOL {
            let mid = 0.5 * (lo + hi);
            let fmid = shoot(mid)?;
            if fmid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fmid.signum() == flo.signum() {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

/// Finite-size Lyapunov quotient `log ||T(origin -> x_n)|| / (x_n - origin)`
/// with `x_n` just past the `n`-th interaction point (the transfer includes
/// the `n`-th interface).  No convergence is claimed; the value is what the
/// finite product gives at this `n`.
///
/// Periodic systems are extended through their period hint, so `n_points`
/// may exceed the stored prefix; aperiodic systems need `n_points` stored
/// points.
pub fn lyapunov_exponent(sys: &HalflineSystem, energy: f64, n_points: usize) -> Result<f64> {
    if n_points == 0 {
        return Err(invalid("need at least one interaction point"));
    }
    let stored = sys.points().len();
    let extend = sys.period_hint().is_some();
    if !extend && stored < n_points {
        return Err(invalid(format!(
            "system stores {stored} points, {n_points} requested"
        )));
    }
    let z = Complex64::new(energy, 0.0);
    let (p, q, len) = if extend {
        sys.period()?
    } else {
        (0, 1, 0.0)
    };
    let point_at = |i: usize| -> (f64, crate::couplings::InterfaceCoupling) {
        if i < stored {
            (sys.points()[i], sys.couplings()[i])
        } else {
            let r = (i - p) % q;
            let m = ((i - p) / q) as f64;
            (sys.points()[p + r] + m * len, sys.couplings()[p + r])
        }
    };

    let mut t = TransferMatrix::identity();
    let mut log_acc = 0.0;
    let mut pos = sys.origin();
    for i in 0..n_points {
        let (x, coupling) = point_at(i);
        if x > pos {
            t = crate::halfline::free_transfer(x - pos, z).compose(&t);
        }
        let jump = crate::halfline::interface_transfer(&coupling)
            .map_err(|e| e.with_generation(i + 1))?;
        t = jump.compose(&t);
        pos = x;
        // Rescale well before norm_sqr computations can overflow.
        if t.max_abs_entry() > 1e50 {
            let s = t.spectral_norm();
            t.scale(1.0 / s);
            log_acc += s.ln();
        }
    }
    Ok((log_acc + t.spectral_norm().ln()) / (pos - sys.origin()))
}
