//! Energy-grid helpers.
//!
//! Scans run uniformly in `x = signed sqrt(E)`, where eigenvalues of the
//! truncated problems are roughly equally spaced (`Delta k ~ pi / L`), so a
//! fixed density per unit `x` resolves the whole window evenly.

use crate::error::{invalid, Result};

/// Default scan density per unit of `sqrt(E)`.  Eigenvalue spacings of a
/// length-`L` truncation are about `pi / L` in `sqrt(E)`, so this resolves
/// problems up to `L` of a few hundred.
pub const DEFAULT_POINTS_PER_UNIT: f64 = 2000.0;

/// `sign(E) * sqrt(|E|)`, the scan coordinate.
pub fn signed_sqrt(e: f64) -> f64 {
    if e >= 0.0 {
        e.sqrt()
    } else {
        -(-e).sqrt()
    }
}

/// Inverse of [`signed_sqrt`].
pub fn energy_of(x: f64) -> f64 {
    if x >= 0.0 {
        x * x
    } else {
        -(x * x)
    }
}

/// `n`-point grid over the energy window, uniform in the scan coordinate,
/// endpoints landing exactly on the window edges.
pub fn sqrt_spaced(window: (f64, f64), n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("window must be a finite nonempty interval"));
    }
    if n < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let (a, b) = (signed_sqrt(lo), signed_sqrt(hi));
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a + (b - a) * i as f64 / (n - 1) as f64;
        out.push(energy_of(x));
    }
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

/// Recommended number of scan points for the window at the default density.
pub fn recommended_points(window: (f64, f64)) -> usize {
    let span = signed_sqrt(window.1) - signed_sqrt(window.0);
    ((DEFAULT_POINTS_PER_UNIT * span).ceil() as usize).max(200)
}
