//! Direct eigensolver on the truncated radial tree and the comparison
//! against the halfline direct-sum picture.
//!
//! The tree operator on the depth-`d` truncation is assembled edge by edge:
//! every edge carries a solution `A C(x) + B S(x)` in the fundamental pair
//! at energy `E`, the root condition, the full vertex conditions (two
//! radial lines plus `b - 1` lines through the zero-sum row basis) and the
//! Dirichlet cut at generation `d` give exactly `2 |edges|` linear
//! equations, and `E` is an eigenvalue iff the system is rank deficient,
//! detected through the smallest singular value.
//!
//! The same truncated operator decomposes into halfline pieces: one system
//! on `[0, t_d]` with the root boundary and the reduced interface data, and
//! for every generation `n` and eigenphase index `s` a system on
//! `[t_n, t_d]` with boundary angle `theta_{n,s}/2` and multiplicity
//! `b_0 ... b_{n-1}`.  Agreement of the two eigenvalue multisets is the
//! numerical witness of the unitary equivalence.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::couplings::{reduce_coupling, VertexCoupling};
use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::halfline::{fundamental_pair, BoundaryAngle, HalflineSystem};
use crate::spectra::halfline_eigenvalues;

/// Geometry and coupling data of a radial tree: `gaps[n] = t_{n+1} - t_n`,
/// one [`VertexCoupling`] per generation `n >= 1`, and the root boundary
/// angle.  `t_0 = 0` and `b_0 = 1` are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RadialTreeSpec {
    gaps: Vec<f64>,
    #[serde(rename = "generations")]
    couplings: Vec<VertexCoupling>,
    root_angle: BoundaryAngle,
}

impl RadialTreeSpec {
    pub fn new(
        gaps: Vec<f64>,
        couplings: Vec<VertexCoupling>,
        root_angle: BoundaryAngle,
    ) -> Result<Self> {
        let spec = RadialTreeSpec { gaps, couplings, root_angle };
        spec.validate()?;
        Ok(spec)
    }

    /// Constant-data tree: the same gap and coupling at every generation.
    pub fn uniform(
        gap: f64,
        coupling: VertexCoupling,
        generations: usize,
        root_angle: BoundaryAngle,
    ) -> Result<Self> {
        RadialTreeSpec::new(
            vec![gap; generations + 1],
            vec![coupling; generations],
            root_angle,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.gaps.is_empty() {
            return Err(invalid("tree needs at least one gap"));
        }
        for &g in &self.gaps {
            if !(g.is_finite() && g > 0.0) {
                return Err(invalid("gaps must be positive and finite"));
            }
        }
        for c in &self.couplings {
            c.validate()?;
        }
        Ok(())
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn couplings(&self) -> &[VertexCoupling] {
        &self.couplings
    }

    pub fn root_angle(&self) -> BoundaryAngle {
        self.root_angle
    }

    /// Distance `t_n` of generation `n` from the root.
    pub fn position(&self, n: usize) -> f64 {
        self.gaps[..n].iter().sum()
    }

    /// Branching number `b_n` (`b_0 = 1`).
    pub fn branching(&self, n: usize) -> u32 {
        if n == 0 {
            1
        } else {
            self.couplings[n - 1].b
        }
    }

    /// `b_0 b_1 ... b_{n-1}`, the multiplicity of the `(n, s)` components.
    pub fn multiplicity(&self, n: usize) -> u64 {
        (0..n).map(|i| self.branching(i) as u64).product()
    }

    /// Number of leaves of the depth-`d` truncation (`= b_0 ... b_{d-1}`).
    pub fn leaf_count(&self, depth: usize) -> u64 {
        self.multiplicity(depth)
    }
}

/// Choice of the zero-sum orthonormal rows entering the non-radial vertex
/// conditions.  Eigenvalues must not depend on it; two concrete bases are
/// provided so tests can check exactly that.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SecularBasis {
    /// Discrete-Fourier rows `v_s(j) = exp(2 pi i s j / b)/sqrt(b)`.
    #[default]
    DftRows,
    /// Real Helmert rows `(1, ..., 1, -s, 0, ..., 0)/sqrt(s(s+1))`.
    HelmertRows,
}

impl SecularBasis {
    /// `(b-1) x b` matrix with orthonormal, zero-sum rows.
    pub fn rows(&self, b: usize) -> Vec<Vec<Complex64>> {
        match self {
            SecularBasis::DftRows => (1..b)
                .map(|s| {
                    let scale = 1.0 / (b as f64).sqrt();
                    (0..b)
                        .map(|j| {
                            let arg = std::f64::consts::TAU * (s * j) as f64 / b as f64;
                            Complex64::from_polar(scale, arg)
                        })
                        .collect()
                })
                .collect(),
            SecularBasis::HelmertRows => (1..b)
                .map(|s| {
                    let norm = 1.0 / ((s * (s + 1)) as f64).sqrt();
                    (0..b)
                        .map(|j| {
                            let v = if j < s {
                                norm
                            } else if j == s {
                                -(s as f64) * norm
                            } else {
                                0.0
                            };
                            Complex64::new(v, 0.0)
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Tuning knobs for the secular solver.
#[derive(Debug, Clone, Copy)]
pub struct SecularOptions {
    /// Cap on the number of unknowns `2 |edges|`.
    pub max_unknowns: usize,
    /// An energy counts as an eigenvalue when the smallest singular value
    /// is below `sigma_rel_tol * sigma_max`.
    pub sigma_rel_tol: f64,
    pub basis: SecularBasis,
}

impl Default for SecularOptions {
    fn default() -> Self {
        SecularOptions {
            max_unknowns: 4096,
            sigma_rel_tol: 1e-7,
            basis: SecularBasis::DftRows,
        }
    }
}

/// Edge bookkeeping of the depth-`d` truncation.
struct Layout {
    /// `edges[n - 1]` = number of generation-`n` edges, `n = 1..=depth`.
    edges: Vec<usize>,
    /// Column offset (in edges) of each generation.
    offsets: Vec<usize>,
    total_edges: usize,
}

impl Layout {
    fn build(spec: &RadialTreeSpec, depth: usize) -> Result<Layout> {
        if depth < 1 {
            return Err(invalid("depth must be at least 1"));
        }
        if spec.gaps().len() < depth {
            return Err(invalid(format!(
                "depth {depth} needs {depth} gaps, spec has {}",
                spec.gaps().len()
            )));
        }
        if spec.couplings().len() + 1 < depth {
            return Err(invalid(format!(
                "depth {depth} needs {} generations of couplings, spec has {}",
                depth - 1,
                spec.couplings().len()
            )));
        }
        let mut edges = Vec::with_capacity(depth);
        let mut offsets = Vec::with_capacity(depth);
        let mut count = 1usize;
        let mut total = 0usize;
        for n in 1..=depth {
            offsets.push(total);
            edges.push(count);
            total += count;
            if n < depth {
                count = count
                    .checked_mul(spec.branching(n) as usize)
                    .ok_or_else(|| invalid("edge count overflow"))?;
            }
        }
        Ok(Layout { edges, offsets, total_edges: total })
    }

    /// Column of the `A` coefficient of edge `(n, j)`.
    fn col(&self, n: usize, j: usize) -> usize {
        2 * (self.offsets[n - 1] + j)
    }
}

/// Assemble the secular matrix of the depth-`d` truncation at energy `E`
/// (rows normalized to unit length).
pub fn secular_matrix(
    spec: &RadialTreeSpec,
    depth: usize,
    energy: f64,
    opts: &SecularOptions,
) -> Result<DMatrix<Complex64>> {
    let layout = Layout::build(spec, depth)?;
    let dim = 2 * layout.total_edges;
    if dim > opts.max_unknowns {
        return Err(Error::DepthTooLarge { unknowns: dim, cap: opts.max_unknowns });
    }
    let z = Complex64::new(energy, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);

    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    let mut row = 0usize;

    // Root condition on the single generation-1 edge.
    {
        let col = layout.col(1, 0);
        if spec.root_angle().is_dirichlet() {
            mat[(row, col)] = one;
        } else {
            mat[(row, col)] = Complex64::new(spec.root_angle().radians().tan(), 0.0);
            mat[(row, col + 1)] = one;
        }
        row += 1;
    }

    // Vertex conditions at generations 1..depth-1.
    for n in 1..depth {
        let coupling = &spec.couplings()[n - 1];
        let b = coupling.b as usize;
        if !coupling.eigenphases.is_empty() && coupling.eigenphases.len() != b - 1 {
            return Err(invalid(format!(
                "generation {n} carries {} eigenphases for branching {b}",
                coupling.eigenphases.len()
            )));
        }
        if coupling.eigenphases.is_empty() && b > 1 {
            return Err(invalid(format!(
                "generation {n} needs {} eigenphases for the vertex conditions",
                b - 1
            )));
        }
        let len = spec.gaps()[n - 1];
        // Incoming-edge traces at the vertex: value (cv, sv), derivative
        // (-z sv, cv) per column.
        let (cv, sv) = fundamental_pair(len, z);
        let alpha = Complex64::new(coupling.alpha, 0.0);
        let beta = Complex64::new(coupling.beta, 0.0);
        let gamma = coupling.gamma;
        let basis_rows = opts.basis.rows(b);

        for j in 0..layout.edges[n - 1] {
            let col_in = layout.col(n, j);
            let out_cols: Vec<usize> =
                (0..b).map(|m| layout.col(n + 1, j * b + m)).collect();

            // Radial line 1: derivative balance.
            for &col in &out_cols {
                mat[(row, col)] += -alpha / (2.0 * b as f64);
                mat[(row, col + 1)] += one - gamma / 2.0;
            }
            mat[(row, col_in)] = (one + gamma / 2.0) * z * sv - alpha / 2.0 * cv;
            mat[(row, col_in + 1)] = -(one + gamma / 2.0) * cv - alpha / 2.0 * sv;
            row += 1;

            // Radial line 2: value balance.
            for &col in &out_cols {
                mat[(row, col)] += (one + gamma.conj() / 2.0) / (b as f64);
                mat[(row, col + 1)] += -beta / 2.0;
            }
            mat[(row, col_in)] = -(one - gamma.conj() / 2.0) * cv + beta / 2.0 * z * sv;
            mat[(row, col_in + 1)] = -(one - gamma.conj() / 2.0) * sv - beta / 2.0 * cv;
            row += 1;

            // Non-radial lines through the zero-sum row basis.
            for s in 1..b {
                let phase = Complex64::from_polar(1.0, coupling.eigenphases[s - 1]);
                let fa = phase - one;
                let fb = i_unit * (phase + one);
                for (m, &col) in out_cols.iter().enumerate() {
                    let v = basis_rows[s - 1][m];
                    mat[(row, col)] += fa * v;
                    mat[(row, col + 1)] += fb * v;
                }
                row += 1;
            }
        }
    }

    // Dirichlet cut at generation `depth`.
    {
        let len = spec.gaps()[depth - 1];
        let (cv, sv) = fundamental_pair(len, z);
        for j in 0..layout.edges[depth - 1] {
            let col = layout.col(depth, j);
            mat[(row, col)] = cv;
            mat[(row, col + 1)] = sv;
            row += 1;
        }
    }
    debug_assert_eq!(row, dim);

    // Normalize rows so the singular-value threshold is scale free.
    for r in 0..dim {
        let norm: f64 = (0..dim).map(|c| mat[(r, c)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in 0..dim {
                mat[(r, c)] /= norm;
            }
        }
    }
    Ok(mat)
}

fn singular_values(mat: DMatrix<Complex64>) -> Vec<f64> {
    let svd = mat.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Smallest singular value of the secular matrix at energy `E`.
pub fn assemble_secular(spec: &RadialTreeSpec, depth: usize, energy: f64) -> Result<f64> {
    assemble_secular_with(spec, depth, energy, &SecularOptions::default())
}

pub fn assemble_secular_with(
    spec: &RadialTreeSpec,
    depth: usize,
    energy: f64,
    opts: &SecularOptions,
) -> Result<f64> {
    let mat = secular_matrix(spec, depth, energy, opts)?;
    let sv = singular_values(mat);
    Ok(*sv.last().expect("nonempty singular values"))
}

/// One detected tree eigenvalue with its numerical multiplicity (count of
/// near-zero singular values of the secular matrix).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeEigenvalue {
    pub energy: f64,
    pub multiplicity: usize,
}

/// Eigenvalues of the truncated tree in the window, located as refined
/// local minima of the smallest singular value over a `grid`-point scan
/// (uniform in `sqrt E`).
pub fn tree_eigenvalues(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<TreeEigenvalue>> {
    tree_eigenvalues_with(spec, depth, window, grid_points, &SecularOptions::default())
}

pub fn tree_eigenvalues_with(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid_points: usize,
    opts: &SecularOptions,
) -> Result<Vec<TreeEigenvalue>> {
    let energies = grid::sqrt_spaced(window, grid_points)?;
    // Fail fast on structural errors before the parallel scan.
    let _ = secular_matrix(spec, depth, energies[0], opts)?;
    let sigma: Vec<f64> = energies
        .par_iter()
        .map(|&e| assemble_secular_with(spec, depth, e, opts))
        .collect::<Result<Vec<f64>>>()?;

    let n = energies.len();
    let mut found: Vec<TreeEigenvalue> = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || sigma[i] <= sigma[i - 1];
        let right_ok = i == n - 1 || sigma[i] <= sigma[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = energies[i.saturating_sub(1)];
        let hi = energies[(i + 1).min(n - 1)];
        if hi <= lo {
            continue;
        }
        let f = |e: f64| assemble_secular_with(spec, depth, e, opts).unwrap_or(f64::INFINITY);
        let (e_star, _) = golden_min(f, lo, hi, 1e-9);
        let sv = singular_values(secular_matrix(spec, depth, e_star, opts)?);
        let sigma_max = sv[0];
        let tol = opts.sigma_rel_tol * sigma_max;
        let mult = sv.iter().filter(|&&s| s < tol).count();
        if mult == 0 || e_star < window.0 || e_star > window.1 {
            continue;
        }
        // Adjacent brackets can refine onto the same minimum.
        if let Some(last) = found.last() {
            if (last.energy - e_star).abs() < 1e-7 {
                continue;
            }
        }
        found.push(TreeEigenvalue { energy: e_star, multiplicity: mult });
    }
    Ok(found)
}

/// One halfline component of the direct-sum decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DirectSumComponent {
    /// Generation index `n` (0 for the radial component).
    pub generation: usize,
    /// Eigenphase index `s` within the generation (0 for the radial one).
    pub phase_index: usize,
    pub multiplicity: u64,
    pub system: HalflineSystem,
}

/// Build the halfline components of the depth-`d` truncation: interface
/// data is the reduced coupling at each interior generation, the right end
/// is cut at `t_d` (Dirichlet), boundary angles come from the root angle
/// and the eigenphase map.
pub fn direct_sum_components(spec: &RadialTreeSpec, depth: usize) -> Result<Vec<DirectSumComponent>> {
    Layout::build(spec, depth)?;
    let positions: Vec<f64> = (0..=depth).map(|n| spec.position(n)).collect();
    let reduced: Vec<_> = spec.couplings()[..depth - 1]
        .iter()
        .enumerate()
        .map(|(i, c)| reduce_coupling(c).map_err(|e| e.with_generation(i + 1)))
        .collect::<Result<Vec<_>>>()?;

    let mut components = Vec::new();
    components.push(DirectSumComponent {
        generation: 0,
        phase_index: 0,
        multiplicity: 1,
        system: HalflineSystem::new(
            0.0,
            positions[1..depth].to_vec(),
            reduced.clone(),
            spec.root_angle(),
        )?,
    });
    for n in 1..depth {
        let coupling = &spec.couplings()[n - 1];
        let b = coupling.b as usize;
        if b > 1 && coupling.eigenphases.len() != b - 1 {
            return Err(invalid(format!(
                "generation {n} needs {} eigenphases to build its components",
                b - 1
            )));
        }
        for s in 1..b {
            let angle = BoundaryAngle::from_eigenphase(coupling.eigenphases[s - 1])?;
            components.push(DirectSumComponent {
                generation: n,
                phase_index: s,
                multiplicity: spec.multiplicity(n),
                system: HalflineSystem::new(
                    positions[n],
                    positions[n + 1..depth].to_vec(),
                    reduced[n..].to_vec(),
                    angle,
                )?,
            });
        }
    }
    Ok(components)
}

/// One entry of the direct-sum eigenvalue multiset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectSumEigenvalue {
    pub energy: f64,
    pub multiplicity: u64,
    /// `(generation, phase index)` of the component the eigenvalue lives on.
    pub component: (usize, usize),
}

/// Eigenvalue multiset of the direct sum of truncated halfline components,
/// every component solved by shooting and cut with Dirichlet at `t_depth`.
pub fn halfline_direct_sum_eigenvalues(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid_points: usize,
) -> Result<Vec<DirectSumEigenvalue>> {
    let right_end = spec.position(depth);
    let mut out = Vec::new();
    for comp in direct_sum_components(spec, depth)? {
        let eigs = halfline_eigenvalues(&comp.system, right_end, window, grid_points)?;
        for e in eigs {
            out.push(DirectSumEigenvalue {
                energy: e,
                multiplicity: comp.multiplicity,
                component: (comp.generation, comp.phase_index),
            });
        }
    }
    out.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    Ok(out)
}

/// Result of matching the two eigenvalue multisets.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralComparison {
    pub window: (f64, f64),
    pub tree: Vec<TreeEigenvalue>,
    pub direct_sum: Vec<DirectSumEigenvalue>,
    /// Sorted pairwise matching (tree energy, direct-sum energy).
    pub matched: Vec<(f64, f64)>,
    pub tree_count: usize,
    pub direct_sum_count: usize,
    pub max_mismatch: f64,
    pub pass: bool,
}

/// Compare the tree spectrum against the direct-sum spectrum, counting
/// multiplicities on both sides.  Passes iff the flattened lists have equal
/// cardinality and match pairwise within `tol`.
pub fn compare_spectra(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid_points: usize,
    tol: f64,
) -> Result<SpectralComparison> {
    let tree = tree_eigenvalues(spec, depth, window, grid_points)?;
    let direct_sum = halfline_direct_sum_eigenvalues(spec, depth, window, grid_points)?;

    let mut flat_tree: Vec<f64> = Vec::new();
    for t in &tree {
        for _ in 0..t.multiplicity {
            flat_tree.push(t.energy);
        }
    }
    let mut flat_ds: Vec<f64> = Vec::new();
    for d in &direct_sum {
        for _ in 0..d.multiplicity {
            flat_ds.push(d.energy);
        }
    }
    flat_tree.sort_by(|a, b| a.partial_cmp(b).unwrap());
    flat_ds.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let matched: Vec<(f64, f64)> = flat_tree
        .iter()
        .copied()
        .zip(flat_ds.iter().copied())
        .collect();
    let max_mismatch = matched
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let pass = flat_tree.len() == flat_ds.len() && max_mismatch <= tol;
    Ok(SpectralComparison {
        window,
        tree_count: flat_tree.len(),
        direct_sum_count: flat_ds.len(),
        tree,
        direct_sum,
        matched,
        max_mismatch,
        pass,
    })
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    const INVPHI2: f64 = 1.0 - INVPHI;
    let mut h = b - a;
    let mut c = a + INVPHI2 * h;
    let mut d = a + INVPHI * h;
    let mut fc = f(c);
    let mut fd = f(d);
    while h > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = a + INVPHI2 * h;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + INVPHI * h;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
