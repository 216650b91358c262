//! Halfline systems with generalized point interactions and the transfer
//! matrices that propagate Cauchy data `(u, u')` through them.
//!
//! Between interaction points solutions satisfy `-u'' = z u`; across a point
//! the two one-sided traces are linked by the interface conditions
//!
//! ```text
//! u'(t+) - u'(t-) = a/2 (u(t+) + u(t-)) + c/2 (u'(t+) + u'(t-))
//! u(t+)  - u(t-)  = -conj(c)/2 (u(t+) + u(t-)) + q/2 (u'(t+) + u'(t-))
//! ```
//!
//! Collecting the `t+` traces on the left gives `M (u,u')(t+) = N (u,u')(t-)`
//! with
//!
//! ```text
//! M = [[1 + conj(c)/2, -q/2], [-a/2, 1 - c/2]]
//! N = [[1 - conj(c)/2,  q/2], [ a/2, 1 + c/2]]
//! ```
//!
//! so the interface transfer matrix is `T = M^{-1} N`.  `det M` vanishes
//! exactly on the separating locus `a q + |c|^2 = 4`, `Im c = 0`, where no
//! transfer exists and the operator decomposes.
//!
//! Both one-sided derivatives are taken with respect to the increasing
//! coordinate; there is no sign flip across an interface.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::couplings::InterfaceCoupling;
use crate::error::{invalid, Error, Result};

/// Threshold on `|k * length|` below which the free transfer switches to a
/// series in `z * length^2`, avoiding cancellation near `z = 0`.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Points closer than this to a propagation endpoint count as colliding
/// with it.
const POINT_COLLISION_TOL: f64 = 1e-12;

/// Boundary angle `theta` in `(-pi/2, pi/2]` for conditions of the form
/// `u'(t) + u(t) tan(theta) = 0`; `theta = pi/2` is Dirichlet.
///
/// Deserializes from a radian value or from the strings `"dirichlet"` /
/// `"neumann"`; serializes as the radian value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BoundaryAngle(f64);

impl<'de> Deserialize<'de> for BoundaryAngle {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Radians(f64),
            Named(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Radians(t) => BoundaryAngle::new(t).map_err(D::Error::custom),
            Raw::Named(s) => match s.as_str() {
                "dirichlet" => Ok(BoundaryAngle::DIRICHLET),
                "neumann" => Ok(BoundaryAngle::NEUMANN),
                other => Err(D::Error::custom(format!(
                    "unknown boundary angle '{other}' (use radians, \"dirichlet\" or \"neumann\")"
                ))),
            },
        }
    }
}

impl BoundaryAngle {
    pub const DIRICHLET: BoundaryAngle = BoundaryAngle(std::f64::consts::FRAC_PI_2);
    pub const NEUMANN: BoundaryAngle = BoundaryAngle(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite()
            || theta <= -std::f64::consts::FRAC_PI_2 - 1e-12
            || theta > std::f64::consts::FRAC_PI_2 + 1e-12
        {
            return Err(invalid("boundary angle must lie in (-pi/2, pi/2]"));
        }
        Ok(BoundaryAngle(theta))
    }

    /// Map a unitary eigenphase `theta in (-pi, pi]` to the boundary angle
    /// of the corresponding halfline component.  Diagonalizing the vertex
    /// condition gives `(e^{i theta} - 1) g + i (e^{i theta} + 1) g' = 0`,
    /// i.e. `g' + tan(theta/2) g = 0`, so the angle is `theta / 2`, with
    /// `theta = pi` landing exactly on Dirichlet.
    pub fn from_eigenphase(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(invalid("eigenphase must be finite"));
        }
        if (theta - std::f64::consts::PI).abs() <= 1e-12 {
            return Ok(BoundaryAngle::DIRICHLET);
        }
        BoundaryAngle::new(theta / 2.0)
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    pub fn is_dirichlet(&self) -> bool {
        (self.0 - std::f64::consts::FRAC_PI_2).abs() <= 1e-12
    }

    /// Cauchy data `(u, u')` satisfying the boundary condition; exactly
    /// `(0, -1)` in the Dirichlet case.
    pub fn initial_data(&self) -> [Complex64; 2] {
        if self.is_dirichlet() {
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)]
        } else {
            [Complex64::new(self.0.cos(), 0.0), Complex64::new(-self.0.sin(), 0.0)]
        }
    }
}

/// 2x2 complex matrix acting on Cauchy data `(u, u')`.
///
/// The determinant is carried alongside the entries: it is set exactly at
/// construction (1 for interval transfers, the closed-form unimodular value
/// for interface transfers) and multiplied through products.  Recomputing
/// it from the entries loses all accuracy near the separating locus, where
/// the entries blow up while the determinant stays on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: [[Complex64; 2]; 2],
    det: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix { m: [[one, zero], [zero, one]], det: one }
    }

    /// Build from entries; the carried determinant is computed from them.
    pub fn from_entries(m: [[Complex64; 2]; 2]) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        TransferMatrix { m, det }
    }

    /// The carried (algebraically propagated) determinant.
    pub fn det(&self) -> Complex64 {
        self.det
    }

    /// Determinant recomputed from the stored entries; agrees with
    /// [`det`](Self::det) up to roundoff away from near-separating data.
    pub fn det_from_entries(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let a = &self.m;
        let b = &rhs.m;
        TransferMatrix {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            det: self.det * rhs.det,
        }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Eigenvalues ordered by descending modulus.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let tr = self.m[0][0] + self.m[1][1];
        let mut s = (tr * tr - 4.0 * self.det).sqrt();
        if (tr.conj() * s).re < 0.0 {
            s = -s;
        }
        let l1 = (tr + s) / 2.0;
        let l2 = if l1.norm() > 0.0 { self.det / l1 } else { (tr - s) / 2.0 };
        if l1.norm() >= l2.norm() {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }

    /// An eigenvector for `lambda`, chosen as the numerically larger of the
    /// two cross-row candidates.
    pub fn eigenvector(&self, lambda: Complex64) -> [Complex64; 2] {
        let v1 = [self.m[0][1], lambda - self.m[0][0]];
        let v2 = [lambda - self.m[1][1], self.m[1][0]];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        if n1 >= n2 {
            v1
        } else {
            v2
        }
    }

    /// Spectral (operator 2-) norm, from the closed-form singular values of
    /// a 2x2 matrix.
    pub fn spectral_norm(&self) -> f64 {
        let g11 = self.m[0][0].norm_sqr() + self.m[1][0].norm_sqr();
        let g22 = self.m[0][1].norm_sqr() + self.m[1][1].norm_sqr();
        let g12 = (self.m[0][0].conj() * self.m[0][1] + self.m[1][0].conj() * self.m[1][1]).norm();
        let mean = 0.5 * (g11 + g22);
        let rad = (0.25 * (g11 - g22) * (g11 - g22) + g12 * g12).sqrt();
        (mean + rad).max(0.0).sqrt()
    }

    /// Rescale entries by `s` (determinant picks up `s^2`); used by the
    /// Lyapunov accumulator to stay inside the floating range.
    pub fn scale(&mut self, s: f64) {
        for row in self.m.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        self.det *= s * s;
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }
}

/// Fundamental pair `(C, S)` at energy `z` and distance `x`: the solutions
/// of `-u'' = z u` with `C(0) = 1, C'(0) = 0` and `S(0) = 0, S'(0) = 1`.
/// Derivatives follow from `C' = -z S`, `S' = C`.
pub(crate) fn fundamental_pair(x: f64, z: Complex64) -> (Complex64, Complex64) {
    let w = z * (x * x);
    if w.norm() < SERIES_THRESHOLD * SERIES_THRESHOLD {
        // C = 1 - w/2 + w^2/24 - w^3/720, S = x (1 - w/6 + w^2/120 - w^3/5040).
        let c = Complex64::new(1.0, 0.0) - w / 2.0 + w * w / 24.0 - w * w * w / 720.0;
        let s = (Complex64::new(1.0, 0.0) - w / 6.0 + w * w / 120.0 - w * w * w / 5040.0) * x;
        return (c, s);
    }
    if z.im == 0.0 {
        let e = z.re;
        if e > 0.0 {
            let k = e.sqrt();
            return (
                Complex64::new((k * x).cos(), 0.0),
                Complex64::new((k * x).sin() / k, 0.0),
            );
        }
        let k = (-e).sqrt();
        return (
            Complex64::new((k * x).cosh(), 0.0),
            Complex64::new((k * x).sinh() / k, 0.0),
        );
    }
    let k = z.sqrt();
    let kx = k * x;
    (kx.cos(), kx.sin() / k)
}

/// Transfer of Cauchy data across a free interval of the given length at
/// energy `z`:
///
/// ```text
/// [[cos(k l), sin(k l)/k], [-k sin(k l), cos(k l)]],  k = sqrt(z),
/// ```
///
/// with the analytic `z -> 0` limit `[[1, l], [0, 1]]` and real
/// trigonometric/hyperbolic forms on the real axis.  The carried
/// determinant is exactly 1.
pub fn free_transfer(length: f64, z: Complex64) -> TransferMatrix {
    assert!(length > 0.0, "free transfer needs positive length");
    let (c, s) = fundamental_pair(length, z);
    TransferMatrix {
        m: [[c, s], [-z * s, c]],
        det: Complex64::new(1.0, 0.0),
    }
}

/// Transfer of Cauchy data across a generalized point interaction.
///
/// Fails with [`Error::Decoupled`] exactly on separating data, where
/// `det M = 0` and the two sides no longer communicate.
pub fn interface_transfer(m: &InterfaceCoupling) -> Result<TransferMatrix> {
    if m.is_separating() {
        return Err(Error::Decoupled { generation: None });
    }
    let p = (m.a * m.q + m.c.norm_sqr()) / 4.0;
    let w = 1.0 - p;
    let v = m.c.im;
    let det_m = Complex64::new(w, -v);
    let t = [
        [
            Complex64::new(1.0 - m.c.re + p, 0.0) / det_m,
            Complex64::new(m.q, 0.0) / det_m,
        ],
        [
            Complex64::new(m.a, 0.0) / det_m,
            Complex64::new(1.0 + m.c.re + p, 0.0) / det_m,
        ],
    ];
    // det T = det N / det M = (w + iv)/(w - iv), unimodular by construction.
    let det = Complex64::new(w, v) / det_m;
    Ok(TransferMatrix { m: t, det })
}

/// Index range hint for an eventually periodic interaction sequence:
/// points `preperiod..` repeat with period `period` (in points).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodHint {
    pub preperiod: usize,
    pub period: usize,
}

/// A halfline `[origin, inf)` carrying interaction points with interface
/// couplings and a boundary condition at the origin.  The stored point list
/// is a finite prefix; an optional [`PeriodHint`] declares the tail
/// periodic, which the Floquet machinery uses to extend the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalflineSystem {
    origin: f64,
    points: Vec<f64>,
    couplings: Vec<InterfaceCoupling>,
    left_boundary: BoundaryAngle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period_hint: Option<PeriodHint>,
}

impl HalflineSystem {
    pub fn new(
        origin: f64,
        points: Vec<f64>,
        couplings: Vec<InterfaceCoupling>,
        left_boundary: BoundaryAngle,
    ) -> Result<Self> {
        let sys = HalflineSystem { origin, points, couplings, left_boundary, period_hint: None };
        sys.validate()?;
        Ok(sys)
    }

    /// Declare the tail from point index `preperiod` on periodic with the
    /// given period (in points).  The stored prefix must exhibit at least
    /// one full repetition past the first cell so the spatial period is
    /// visible, and the visible data must actually repeat.
    pub fn with_period_hint(mut self, preperiod: usize, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(invalid("period must be at least one point"));
        }
        if self.points.len() < preperiod + period + 1 {
            return Err(invalid(
                "period hint needs at least preperiod + period + 1 stored points",
            ));
        }
        self.period_hint = Some(PeriodHint { preperiod, period });
        self.validate()?;
        Ok(self)
    }

    /// Uniformly spaced identical interactions; the canonical chain used by
    /// the band-structure examples.  Carries hint `(0, 1)`.
    pub fn uniform_chain(
        origin: f64,
        spacing: f64,
        n_points: usize,
        coupling: InterfaceCoupling,
        left_boundary: BoundaryAngle,
    ) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(invalid("spacing must be positive"));
        }
        if n_points < 2 {
            return Err(invalid("uniform chain needs at least two points"));
        }
        let points: Vec<f64> = (1..=n_points).map(|i| origin + spacing * i as f64).collect();
        let couplings = vec![coupling; n_points];
        HalflineSystem::new(origin, points, couplings, left_boundary)?.with_period_hint(0, 1)
    }

    /// Assemble a system from a preperiodic part and a periodic cell, each
    /// given as `(gap, coupling)` pairs; the cell is materialized `copies`
    /// times (at least 2, so the hint validates).
    pub fn periodic_from_cell(
        origin: f64,
        left_boundary: BoundaryAngle,
        preperiod: &[(f64, InterfaceCoupling)],
        cell: &[(f64, InterfaceCoupling)],
        copies: usize,
    ) -> Result<Self> {
        if cell.is_empty() {
            return Err(invalid("periodic cell must be nonempty"));
        }
        if copies < 2 {
            return Err(invalid("need at least two cell copies"));
        }
        let mut points = Vec::new();
        let mut couplings = Vec::new();
        let mut x = origin;
        for (gap, coupling) in preperiod.iter().chain(cell.iter().cycle().take(cell.len() * copies)) {
            x += gap;
            points.push(x);
            couplings.push(*coupling);
        }
        HalflineSystem::new(origin, points, couplings, left_boundary)?
            .with_period_hint(preperiod.len(), cell.len())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.origin.is_finite() {
            return Err(invalid("origin must be finite"));
        }
        if self.points.len() != self.couplings.len() {
            return Err(invalid("points and couplings must have equal length"));
        }
        let mut prev = self.origin;
        for &p in &self.points {
            if !p.is_finite() || p <= prev {
                return Err(invalid("interaction points must be finite and strictly increasing from the origin"));
            }
            prev = p;
        }
        if let Some(PeriodHint { preperiod, period }) = self.period_hint {
            if period == 0 || self.points.len() < preperiod + period + 1 {
                return Err(invalid("period hint inconsistent with stored points"));
            }
            let len = self.points[preperiod + period] - self.points[preperiod];
            for k in (preperiod + period)..self.points.len() {
                let gap_ok = (self.points[k] - self.points[k - period] - len).abs() <= 1e-9;
                if !gap_ok || !self.couplings[k].close_to(&self.couplings[k - period], 1e-9) {
                    return Err(invalid(format!(
                        "stored data violates the declared period at point {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn couplings(&self) -> &[InterfaceCoupling] {
        &self.couplings
    }

    pub fn left_boundary(&self) -> BoundaryAngle {
        self.left_boundary
    }

    pub fn period_hint(&self) -> Option<PeriodHint> {
        self.period_hint
    }

    /// Minimum gap between consecutive interaction points (and the origin).
    pub fn tau(&self) -> f64 {
        let mut tau = f64::INFINITY;
        let mut prev = self.origin;
        for &p in &self.points {
            tau = tau.min(p - prev);
            prev = p;
        }
        tau
    }

    /// `(preperiod, period, spatial period)` of the declared periodic tail.
    pub fn period(&self) -> Result<(usize, usize, f64)> {
        let PeriodHint { preperiod, period } = self.period_hint.ok_or(Error::NoPeriod)?;
        let len = self.points[preperiod + period] - self.points[preperiod];
        Ok((preperiod, period, len))
    }

    /// Shift the whole system (origin and points) by `s`.
    pub fn translated(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.origin += s;
        for p in out.points.iter_mut() {
            *p += s;
        }
        out
    }

    /// Interaction positions and couplings of the two-sided periodization
    /// of the periodic cell, restricted to the open interval `(a, b)`,
    /// sorted by position.  Preperiodic data is ignored: the periodization
    /// is the object whose Floquet data the Weyl machinery needs.
    pub fn periodized_interfaces(&self, a: f64, b: f64) -> Result<Vec<(f64, InterfaceCoupling)>> {
        let (p, q, len) = self.period()?;
        let mut out = Vec::new();
        for j in 0..q {
            let x = self.points[p + j];
            // positions x + m len in (a, b)
            let m_lo = ((a - x) / len).floor() as i64;
            let m_hi = ((b - x) / len).ceil() as i64;
            for m in m_lo..=m_hi {
                let pos = x + m as f64 * len;
                if pos > a && pos < b {
                    out.push((pos, self.couplings[p + j]));
                }
            }
        }
        out.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
        Ok(out)
    }

    /// Transfer across `[from, to]` of the two-sided periodization.
    pub fn periodized_transfer(&self, z: Complex64, from: f64, to: f64) -> Result<TransferMatrix> {
        if !(from.is_finite() && to.is_finite()) || from >= to {
            return Err(invalid("propagation interval must have finite from < to"));
        }
        let factors = self.periodized_interfaces(from, to)?;
        compose_transfers(z, from, to, &factors, None)
    }
}

/// Ordered product of interval and interface transfers across `[from, to]`
/// of the stored system.
///
/// `from` and `to` must not collide with interaction points; a separating
/// coupling inside the interval surfaces as [`Error::Decoupled`] tagged
/// with its 1-based point index.
pub fn propagate(sys: &HalflineSystem, z: Complex64, from: f64, to: f64) -> Result<TransferMatrix> {
    if !from.is_finite() || !to.is_finite() {
        return Err(invalid("propagation endpoints must be finite"));
    }
    if from < sys.origin() - POINT_COLLISION_TOL {
        return Err(invalid("propagation must start at or after the origin"));
    }
    if from >= to {
        return Err(invalid("propagation interval must have from < to"));
    }
    for (i, &p) in sys.points().iter().enumerate() {
        if (p - from).abs() <= POINT_COLLISION_TOL || (p - to).abs() <= POINT_COLLISION_TOL {
            return Err(invalid(format!(
                "propagation endpoint collides with interaction point {}",
                i + 1
            )));
        }
    }
    let factors: Vec<(f64, InterfaceCoupling)> = sys
        .points()
        .iter()
        .zip(sys.couplings())
        .filter(|(&p, _)| p > from && p < to)
        .map(|(&p, c)| (p, *c))
        .collect();
    let first_index = sys.points().iter().position(|&p| p > from && p < to);
    compose_transfers(z, from, to, &factors, first_index.map(|i| i + 1))
}

/// Transfer across exactly one period of a periodic system, starting just
/// left of the first periodic interaction point.
pub fn monodromy(sys: &HalflineSystem, z: Complex64) -> Result<TransferMatrix> {
    let (p, q, _) = sys.period()?;
    let points = sys.points();
    let couplings = sys.couplings();
    let mut t = interface_transfer(&couplings[p]).map_err(|e| e.with_generation(p + 1))?;
    for j in (p + 1)..(p + q) {
        t = interface_transfer(&couplings[j])
            .map_err(|e| e.with_generation(j + 1))?
            .compose(&free_transfer(points[j] - points[j - 1], z))
            .compose(&t);
    }
    t = free_transfer(points[p + q] - points[p + q - 1], z).compose(&t);
    Ok(t)
}

/// Transfer across `[basepoint, basepoint + period]` of the two-sided
/// periodization; the monodromy seen from an arbitrary basepoint.
pub fn monodromy_at(sys: &HalflineSystem, z: Complex64, basepoint: f64) -> Result<TransferMatrix> {
    let (_, _, len) = sys.period()?;
    let cell = sys.periodized_interfaces(basepoint, basepoint + len)?;
    for (pos, _) in &cell {
        if (pos - basepoint).abs() <= POINT_COLLISION_TOL
            || (pos - basepoint - len).abs() <= POINT_COLLISION_TOL
        {
            return Err(invalid("basepoint collides with an interaction point"));
        }
    }
    compose_transfers(z, basepoint, basepoint + len, &cell, None)
}

fn compose_transfers(
    z: Complex64,
    from: f64,
    to: f64,
    factors: &[(f64, InterfaceCoupling)],
    first_index: Option<usize>,
) -> Result<TransferMatrix> {
    let mut t = TransferMatrix::identity();
    let mut pos = from;
    for (i, (p, coupling)) in factors.iter().enumerate() {
        if *p - pos > 0.0 {
            t = free_transfer(*p - pos, z).compose(&t);
        }
        let jump = interface_transfer(coupling)
            .map_err(|e| e.with_generation(first_index.map_or(i + 1, |f| f + i)))?;
        t = jump.compose(&t);
        pos = *p;
    }
    if to - pos > 0.0 {
        t = free_transfer(to - pos, z).compose(&t);
    }
    Ok(t)
}
