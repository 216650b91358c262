//! Command implementations and their output payloads.

use num_complex::Complex64;
use serde::Serialize;

use treespec_core::couplings::{
    check_conditions, preset, reconstruct_coupling, reduce_coupling, CouplingPreset,
    InterfaceCoupling, VertexCoupling,
};
use treespec_core::halfline::{interface_transfer, propagate, BoundaryAngle, HalflineSystem};
use treespec_core::seqgen::{power2_word, Letter};
use treespec_core::spectra::{
    band_structure, reflectionless_defect, reflectionless_defect_limit, weyl_m, BandStructure,
    DEFAULT_ETA_SWEEP,
};
use treespec_core::tree::{
    compare_spectra, tree_eigenvalues, RadialTreeSpec, SpectralComparison, TreeEigenvalue,
};
use treespec_core::{ConditionReport, Error};

use crate::emit::{fmt_f64, to_canonical_json, to_csv};
use crate::inputs::HalflineInput;
use crate::{CliError, Format};

#[derive(Debug, Serialize)]
pub struct ReducedRow {
    pub generation: usize,
    pub a: f64,
    pub q: f64,
    #[serde(with = "treespec_core::serde_complex")]
    pub c: Complex64,
}

#[derive(Debug, Serialize)]
pub struct ReduceOutput {
    pub interfaces: Vec<ReducedRow>,
}

#[derive(Debug, Serialize)]
pub struct ReconstructedRow {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "treespec_core::serde_complex")]
    pub gamma: Complex64,
    pub b: u32,
}

#[derive(Debug, Serialize)]
pub struct ReconstructOutput {
    pub couplings: Vec<ReconstructedRow>,
}

#[derive(Debug, Serialize)]
pub struct TransferOutput {
    #[serde(with = "treespec_core::serde_complex")]
    pub z: Complex64,
    pub from: f64,
    pub to: f64,
    #[serde(with = "treespec_core::serde_complex")]
    pub t11: Complex64,
    #[serde(with = "treespec_core::serde_complex")]
    pub t12: Complex64,
    #[serde(with = "treespec_core::serde_complex")]
    pub t21: Complex64,
    #[serde(with = "treespec_core::serde_complex")]
    pub t22: Complex64,
    #[serde(with = "treespec_core::serde_complex")]
    pub det: Complex64,
}

#[derive(Debug, Serialize)]
pub struct WeylOutput {
    #[serde(with = "treespec_core::serde_complex")]
    pub energy: Complex64,
    pub basepoint: f64,
    #[serde(with = "treespec_core::serde_complex")]
    pub m_plus: Complex64,
    #[serde(with = "treespec_core::serde_complex")]
    pub m_minus: Complex64,
    pub reflection_defect: f64,
}

#[derive(Debug, Serialize)]
pub struct ReflectionlessOutput {
    pub energy: f64,
    pub eta: f64,
    pub basepoint: f64,
    pub defect_at_eta: f64,
    pub defect_extrapolated: f64,
}

#[derive(Debug, Serialize)]
pub struct EigsOutput {
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct TreeEigsOutput {
    pub eigenvalues: Vec<TreeEigenvalue>,
}

#[derive(Debug, Serialize)]
pub struct ExampleCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct ExamplesOutput {
    pub checks: Vec<ExampleCheck>,
    pub all_pass: bool,
}

pub enum Payload {
    Check(ConditionReport),
    Reduce(ReduceOutput),
    Reconstruct(ReconstructOutput),
    Transfer(TransferOutput),
    Bands(BandStructure),
    Weyl(WeylOutput),
    Reflectionless(ReflectionlessOutput),
    EigsHalfline(EigsOutput),
    EigsTree(TreeEigsOutput),
    Compare(SpectralComparison),
    GenSeq(RadialTreeSpec),
    Examples(ExamplesOutput),
}

pub fn reduce_tree(spec: &RadialTreeSpec) -> Result<ReduceOutput, CliError> {
    let interfaces = spec
        .couplings()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = reduce_coupling(c).map_err(|e| e.with_generation(i + 1))?;
            Ok(ReducedRow { generation: i + 1, a: m.a, q: m.q, c: m.c })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(ReduceOutput { interfaces })
}

pub fn reconstruct_halfline(input: &HalflineInput) -> Result<ReconstructOutput, CliError> {
    let couplings = input
        .system
        .couplings()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let v = reconstruct_coupling(m).map_err(|e| e.with_generation(i + 1))?;
            Ok(ReconstructedRow {
                index: i + 1,
                alpha: v.alpha,
                beta: v.beta,
                gamma: v.gamma,
                b: v.b,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(ReconstructOutput { couplings })
}

pub fn transfer(input: &HalflineInput, z: Complex64) -> Result<TransferOutput, CliError> {
    let sys = &input.system;
    let to = input
        .right_end
        .unwrap_or_else(|| sys.points().last().copied().unwrap_or(sys.origin()) + 1.0);
    let t = propagate(sys, z, sys.origin(), to)?;
    Ok(TransferOutput {
        z,
        from: sys.origin(),
        to,
        t11: t.m[0][0],
        t12: t.m[0][1],
        t21: t.m[1][0],
        t22: t.m[1][1],
        det: t.det(),
    })
}

/// Default Weyl basepoint: middle of the first periodic gap.
pub fn default_basepoint(sys: &HalflineSystem) -> Result<f64, CliError> {
    let (p, _, _) = sys.period()?;
    Ok(0.5 * (sys.points()[p] + sys.points()[p + 1]))
}

pub fn weyl(input: &HalflineInput, energy: f64, eta: f64) -> Result<WeylOutput, CliError> {
    let basepoint = match input.basepoint {
        Some(b) => b,
        None => default_basepoint(&input.system)?,
    };
    let w = weyl_m(&input.system, Complex64::new(energy, eta), basepoint)?;
    Ok(WeylOutput {
        energy: w.energy,
        basepoint,
        m_plus: w.m_plus,
        m_minus: w.m_minus,
        reflection_defect: w.reflection_defect(),
    })
}

pub fn reflectionless(
    input: &HalflineInput,
    energy: f64,
    eta: f64,
) -> Result<ReflectionlessOutput, CliError> {
    let basepoint = match input.basepoint {
        Some(b) => b,
        None => default_basepoint(&input.system)?,
    };
    Ok(ReflectionlessOutput {
        energy,
        eta,
        basepoint,
        defect_at_eta: reflectionless_defect(&input.system, energy, eta, basepoint)?,
        defect_extrapolated: reflectionless_defect_limit(
            &input.system,
            energy,
            basepoint,
            &DEFAULT_ETA_SWEEP,
        )?,
    })
}

/// Reproduce the worked examples: the reduction identities, the condition
/// checks on the two counterexample sequences, the swapped interface
/// conditions, and byte-identity of the band structures of the two
/// parameterizations that reduce to the same halfline data.
pub fn run_examples() -> Result<ExamplesOutput, CliError> {
    let mut checks: Vec<ExampleCheck> = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(ExampleCheck { name: name.to_string(), pass, detail });
    };

    let near = |m: &InterfaceCoupling, a: f64, q: f64, c: f64, tol: f64| {
        (m.a - a).abs() <= tol && (m.q - q).abs() <= tol && (m.c - Complex64::new(c, 0.0)).norm() <= tol
    };
    let describe = |m: &InterfaceCoupling| {
        format!("(a, q, c) = ({:.3e}, {:.3e}, {:.3e}+{:.3e}i)", m.a, m.q, m.c.re, m.c.im)
    };

    let pairs = [
        ("reduce (0, 0, 2/3, b=4) -> (0, 0, 0)", VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4), (0.0, 0.0, 0.0)),
        ("reduce (0, 0, 1, b=9) -> (0, 0, 0)", VertexCoupling::real(0.0, 0.0, 1.0, 9), (0.0, 0.0, 0.0)),
        ("reduce (4, -1, 0, b=4) -> (2, -2, 0)", VertexCoupling::real(4.0, -1.0, 0.0, 4), (2.0, -2.0, 0.0)),
        ("reduce (6, -2/3, 0, b=9) -> (2, -2, 0)", VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9), (2.0, -2.0, 0.0)),
    ];
    for (name, coupling, want) in pairs {
        match reduce_coupling(&coupling) {
            Ok(m) => push(name, near(&m, want.0, want.1, want.2, 1e-12), describe(&m)),
            Err(e) => push(name, false, format!("error: {e}")),
        }
    }

    let standard = RadialTreeSpec::uniform(
        1.0,
        preset(CouplingPreset::Standard, 2),
        16,
        BoundaryAngle::DIRICHLET,
    )?;
    match check_conditions(&standard, 16) {
        Ok(r) => push(
            "standard couplings satisfy conditions (a)-(d)",
            r.cond_a && r.cond_b && r.cond_c && r.cond_d,
            format!("flags (a,b,c,d) = ({}, {}, {}, {})", r.cond_a, r.cond_b, r.cond_c, r.cond_d),
        ),
        Err(e) => push("standard couplings satisfy conditions (a)-(d)", false, format!("error: {e}")),
    }

    let words = [
        (
            "power-of-two word with Re gamma != 0 violates condition (d) everywhere",
            Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4)),
            Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 1.0, 9)),
        ),
        (
            "power-of-two word with alpha*beta + 4 = 0 violates condition (d) everywhere",
            Letter::new(1.0, VertexCoupling::real(4.0, -1.0, 0.0, 4)),
            Letter::new(1.0, VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9)),
        ),
    ];
    for (name, special, default) in words {
        let word = power2_word(&special, &default, 16);
        let spec = word.to_tree_spec(BoundaryAngle::DIRICHLET)?;
        match check_conditions(&spec, 16) {
            Ok(r) => push(
                name,
                r.cond_b && r.cond_c && !r.cond_d && r.cond_d_offenders.len() == 16,
                format!("condition (d) offenders: {} of 16", r.cond_d_offenders.len()),
            ),
            Err(e) => push(name, false, format!("error: {e}")),
        }
    }

    match interface_transfer(&InterfaceCoupling::real(2.0, -2.0, 0.0)) {
        Ok(t) => {
            let want = [[0.0, -1.0], [1.0, 0.0]];
            let mut err: f64 = 0.0;
            for (i, row) in want.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    err = err.max((t.m[i][j] - Complex64::new(*w, 0.0)).norm());
                }
            }
            push(
                "interface (2, -2, 0) sends (u, u') to (-u', u)",
                err < 1e-12,
                format!("max entry deviation {err:.3e}"),
            );
        }
        Err(e) => push("interface (2, -2, 0) sends (u, u') to (-u', u)", false, format!("error: {e}")),
    }

    // Both parameterizations reduce to the constant interface (2, -2, 0);
    // the band structures must agree byte for byte.
    let band_bytes = |v: &VertexCoupling| -> Result<Vec<u8>, CliError> {
        let m = reduce_coupling(v)?;
        let sys = HalflineSystem::uniform_chain(0.0, 1.0, 4, m, BoundaryAngle::DIRICHLET)?;
        let bands = band_structure(&sys, (0.0, 30.0), 3000)?;
        Ok(to_canonical_json(&bands)?)
    };
    match (
        band_bytes(&VertexCoupling::real(4.0, -1.0, 0.0, 4)),
        band_bytes(&VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9)),
    ) {
        (Ok(b4), Ok(b9)) => push(
            "band structures of the b=4 and b=9 parameterizations are byte-identical",
            b4 == b9,
            format!("{} vs {} bytes", b4.len(), b9.len()),
        ),
        (Err(e), _) | (_, Err(e)) => push(
            "band structures of the b=4 and b=9 parameterizations are byte-identical",
            false,
            format!("error: {e}"),
        ),
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ExamplesOutput { checks, all_pass })
}

pub fn run_check(spec: &RadialTreeSpec, horizon: usize) -> Result<Payload, CliError> {
    Ok(Payload::Check(check_conditions(spec, horizon)?))
}

pub fn run_bands(
    input: &HalflineInput,
    window: (f64, f64),
    grid: usize,
) -> Result<Payload, CliError> {
    Ok(Payload::Bands(band_structure(&input.system, window, grid)?))
}

pub fn run_eigs_halfline(
    input: &HalflineInput,
    window: (f64, f64),
    grid: usize,
) -> Result<Payload, CliError> {
    let right_end = input
        .right_end
        .ok_or_else(|| CliError::Validation("halfline input needs \"right_end\"".into()))?;
    let eigenvalues =
        treespec_core::spectra::halfline_eigenvalues(&input.system, right_end, window, grid)?;
    Ok(Payload::EigsHalfline(EigsOutput { eigenvalues }))
}

pub fn run_eigs_tree(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid: usize,
) -> Result<Payload, CliError> {
    let eigenvalues = tree_eigenvalues(spec, depth, window, grid)?;
    Ok(Payload::EigsTree(TreeEigsOutput { eigenvalues }))
}

pub fn run_compare(
    spec: &RadialTreeSpec,
    depth: usize,
    window: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<Payload, CliError> {
    Ok(Payload::Compare(compare_spectra(spec, depth, window, grid, tol)?))
}

fn complex_cols(c: Complex64) -> [String; 2] {
    [fmt_f64(c.re), fmt_f64(c.im)]
}

impl Payload {
    pub fn to_bytes(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => Ok(match self {
                Payload::Check(x) => to_canonical_json(x)?,
                Payload::Reduce(x) => to_canonical_json(x)?,
                Payload::Reconstruct(x) => to_canonical_json(x)?,
                Payload::Transfer(x) => to_canonical_json(x)?,
                Payload::Bands(x) => to_canonical_json(x)?,
                Payload::Weyl(x) => to_canonical_json(x)?,
                Payload::Reflectionless(x) => to_canonical_json(x)?,
                Payload::EigsHalfline(x) => to_canonical_json(x)?,
                Payload::EigsTree(x) => to_canonical_json(x)?,
                Payload::Compare(x) => to_canonical_json(x)?,
                Payload::GenSeq(x) => to_canonical_json(x)?,
                Payload::Examples(x) => to_canonical_json(x)?,
            }),
            Format::Csv => self.to_csv_bytes(),
        }
    }

    fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let bytes = match self {
            Payload::Check(r) => {
                let join = |v: &[usize]| {
                    v.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";")
                };
                let rows = vec![
                    vec!["horizon".into(), r.horizon.to_string()],
                    vec!["finite_horizon_only".into(), r.finite_horizon_only.to_string()],
                    vec!["distinct_gaps".into(), r.distinct_gaps.to_string()],
                    vec!["distinct_b".into(), r.distinct_b.to_string()],
                    vec!["distinct_alpha".into(), r.distinct_alpha.to_string()],
                    vec!["distinct_beta".into(), r.distinct_beta.to_string()],
                    vec!["distinct_gamma".into(), r.distinct_gamma.to_string()],
                    vec!["cond_a".into(), r.cond_a.to_string()],
                    vec!["b_equal_one".into(), join(&r.b_equal_one)],
                    vec!["cond_b".into(), r.cond_b.to_string()],
                    vec!["separating_generations".into(), join(&r.separating_generations)],
                    vec!["cond_c".into(), r.cond_c.to_string()],
                    vec!["degenerate_denominator".into(), join(&r.degenerate_denominator)],
                    vec!["cond_d".into(), r.cond_d.to_string()],
                    vec!["cond_d_offenders".into(), join(&r.cond_d_offenders)],
                    vec!["tau".into(), fmt_f64(r.tau)],
                ];
                to_csv(&["field", "value"], &rows)?
            }
            Payload::Reduce(x) => {
                let rows: Vec<Vec<String>> = x
                    .interfaces
                    .iter()
                    .map(|r| {
                        let [cre, cim] = complex_cols(r.c);
                        vec![r.generation.to_string(), fmt_f64(r.a), fmt_f64(r.q), cre, cim]
                    })
                    .collect();
                to_csv(&["generation", "a", "q", "c_re", "c_im"], &rows)?
            }
            Payload::Reconstruct(x) => {
                let rows: Vec<Vec<String>> = x
                    .couplings
                    .iter()
                    .map(|r| {
                        let [gre, gim] = complex_cols(r.gamma);
                        vec![
                            r.index.to_string(),
                            fmt_f64(r.alpha),
                            fmt_f64(r.beta),
                            gre,
                            gim,
                            r.b.to_string(),
                        ]
                    })
                    .collect();
                to_csv(&["index", "alpha", "beta", "gamma_re", "gamma_im", "b"], &rows)?
            }
            Payload::Transfer(x) => {
                let mut rows = Vec::new();
                for (name, value) in [
                    ("t11", x.t11),
                    ("t12", x.t12),
                    ("t21", x.t21),
                    ("t22", x.t22),
                    ("det", x.det),
                    ("z", x.z),
                ] {
                    let [re, im] = complex_cols(value);
                    rows.push(vec![name.to_string(), re, im]);
                }
                to_csv(&["entry", "re", "im"], &rows)?
            }
            Payload::Bands(x) => {
                let rows: Vec<Vec<String>> = x
                    .bands
                    .iter()
                    .enumerate()
                    .map(|(i, (lo, hi))| vec![i.to_string(), fmt_f64(*lo), fmt_f64(*hi)])
                    .collect();
                to_csv(&["band", "lower", "upper"], &rows)?
            }
            Payload::Weyl(x) => {
                let [ere, eim] = complex_cols(x.energy);
                let [pre, pim] = complex_cols(x.m_plus);
                let [mre, mim] = complex_cols(x.m_minus);
                let row = vec![
                    ere,
                    eim,
                    fmt_f64(x.basepoint),
                    pre,
                    pim,
                    mre,
                    mim,
                    fmt_f64(x.reflection_defect),
                ];
                to_csv(
                    &[
                        "energy_re",
                        "energy_im",
                        "basepoint",
                        "m_plus_re",
                        "m_plus_im",
                        "m_minus_re",
                        "m_minus_im",
                        "reflection_defect",
                    ],
                    &[row],
                )?
            }
            Payload::Reflectionless(x) => {
                let row = vec![
                    fmt_f64(x.energy),
                    fmt_f64(x.eta),
                    fmt_f64(x.basepoint),
                    fmt_f64(x.defect_at_eta),
                    fmt_f64(x.defect_extrapolated),
                ];
                to_csv(
                    &["energy", "eta", "basepoint", "defect_at_eta", "defect_extrapolated"],
                    &[row],
                )?
            }
            Payload::EigsHalfline(x) => {
                let rows: Vec<Vec<String>> = x
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, e)| vec![i.to_string(), fmt_f64(*e)])
                    .collect();
                to_csv(&["index", "energy"], &rows)?
            }
            Payload::EigsTree(x) => {
                let rows: Vec<Vec<String>> = x
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        vec![i.to_string(), fmt_f64(e.energy), e.multiplicity.to_string()]
                    })
                    .collect();
                to_csv(&["index", "energy", "multiplicity"], &rows)?
            }
            Payload::Compare(x) => {
                let rows: Vec<Vec<String>> = x
                    .matched
                    .iter()
                    .enumerate()
                    .map(|(i, (t, d))| {
                        vec![i.to_string(), fmt_f64(*t), fmt_f64(*d), fmt_f64((t - d).abs())]
                    })
                    .collect();
                to_csv(
                    &["index", "tree_energy", "direct_sum_energy", "abs_diff"],
                    &rows,
                )?
            }
            Payload::GenSeq(spec) => {
                let rows: Vec<Vec<String>> = spec
                    .couplings()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let phases = c
                            .eigenphases
                            .iter()
                            .map(|p| fmt_f64(*p))
                            .collect::<Vec<_>>()
                            .join(";");
                        vec![
                            (i + 1).to_string(),
                            fmt_f64(spec.gaps()[i]),
                            fmt_f64(c.alpha),
                            fmt_f64(c.beta),
                            fmt_f64(c.gamma.re),
                            fmt_f64(c.gamma.im),
                            c.b.to_string(),
                            phases,
                        ]
                    })
                    .collect();
                to_csv(
                    &[
                        "generation",
                        "gap",
                        "alpha",
                        "beta",
                        "gamma_re",
                        "gamma_im",
                        "b",
                        "eigenphases",
                    ],
                    &rows,
                )?
            }
            Payload::Examples(x) => {
                let rows: Vec<Vec<String>> = x
                    .checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.pass.to_string(), c.detail.clone()])
                    .collect();
                to_csv(&["name", "pass", "detail"], &rows)?
            }
        };
        Ok(bytes)
    }
}
