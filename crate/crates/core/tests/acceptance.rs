//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The criteria pin the toolkit to its exactly checkable consequences: the
//! worked reduction identities, the reconstruction roundtrip, the
//! separating/decoupling equivalence, multiset agreement of the two
//! independent eigensolvers, the Kronig-Penney band edge, the
//! reflectionless identity on bands, condition-(d) necessity, the
//! aperiodicity detector, and Herglotz/Lyapunov sanity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use treespec_core::couplings::{
    check_conditions, preset, reconstruct_coupling, reduce_coupling, reduction_denominator,
    CouplingPreset, InterfaceCoupling, VertexCoupling,
};
use treespec_core::halfline::{interface_transfer, BoundaryAngle, HalflineSystem};
use treespec_core::seqgen::{detect_eventual_period, periodic_word, power2_word, DataWord, Letter};
use treespec_core::spectra::{
    band_structure, band_tests, floquet_radius, lyapunov_exponent, reflectionless_defect,
    reflectionless_defect_limit, weyl_m, DEFAULT_ETA_SWEEP,
};
use treespec_core::tree::{compare_spectra, RadialTreeSpec};
use treespec_core::Error;

fn delta_chain(a: f64, spacing: f64, n: usize) -> HalflineSystem {
    HalflineSystem::uniform_chain(
        0.0,
        spacing,
        n,
        InterfaceCoupling::real(a, 0.0, 0.0),
        BoundaryAngle::DIRICHLET,
    )
    .unwrap()
}

fn free_chain() -> HalflineSystem {
    HalflineSystem::uniform_chain(
        0.0,
        1.0,
        3,
        InterfaceCoupling::trivial(),
        BoundaryAngle::DIRICHLET,
    )
    .unwrap()
}

/// Criterion 1: the worked reduction identities, every component within
/// 1e-12 (bit-exact where the inputs are binary-representable).
#[test]
fn criterion_1_reduction_identities() {
    let cases = [
        (VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4), (0.0, 0.0, 0.0)),
        (VertexCoupling::real(0.0, 0.0, 1.0, 9), (0.0, 0.0, 0.0)),
        (VertexCoupling::real(4.0, -1.0, 0.0, 4), (2.0, -2.0, 0.0)),
        (VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9), (2.0, -2.0, 0.0)),
    ];
    for (coupling, (a, q, c)) in &cases {
        let m = reduce_coupling(coupling).unwrap();
        assert!((m.a - a).abs() <= 1e-12, "{coupling:?} -> a = {}", m.a);
        assert!((m.q - q).abs() <= 1e-12, "{coupling:?} -> q = {}", m.q);
        assert!(
            (m.c - Complex64::new(*c, 0.0)).norm() <= 1e-12,
            "{coupling:?} -> c = {:?}",
            m.c
        );
    }
    // The two collision pairs hit the same image.
    let m1 = reduce_coupling(&cases[0].0).unwrap();
    let m2 = reduce_coupling(&cases[1].0).unwrap();
    assert!(m1.close_to(&m2, 1e-12));
    let m3 = reduce_coupling(&cases[2].0).unwrap();
    let m4 = reduce_coupling(&cases[3].0).unwrap();
    assert_eq!(m3, m4);
    println!("[acceptance] criterion 1 PASS: reduction identities within 1e-12");
}

/// Criterion 2: reconstruct(reduce(c)) = c componentwise within 1e-9 on
/// 1000 randomized couplings satisfying conditions (c) and (d).
#[test]
fn criterion_2_reconstruction_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let branchings = [1u32, 2, 3, 4, 9];
    let mut accepted = 0usize;
    let mut worst: f64 = 0.0;
    while accepted < 1000 {
        let b = branchings[rng.gen_range(0..branchings.len())];
        let c = VertexCoupling {
            alpha: rng.gen_range(-3.0..3.0),
            beta: rng.gen_range(-3.0..3.0),
            gamma: Complex64::new(0.0, rng.gen_range(-2.0..2.0)),
            b,
            eigenphases: vec![PI; (b as usize).saturating_sub(1)],
        };
        let margin_d = c.alpha * c.beta + c.gamma.norm_sqr() + 4.0;
        if reduction_denominator(&c).abs() <= 1e-3 || margin_d.abs() <= 1e-3 {
            continue;
        }
        accepted += 1;
        let m = reduce_coupling(&c).unwrap();
        let back = reconstruct_coupling(&m).unwrap();
        assert_eq!(back.b, c.b, "branching lost: {c:?} -> {m:?} -> {back:?}");
        let err = (back.alpha - c.alpha)
            .abs()
            .max((back.beta - c.beta).abs())
            .max((back.gamma - c.gamma).norm());
        assert!(err <= 1e-9, "roundtrip error {err} on {c:?}");
        worst = worst.max(err);
    }
    println!("[acceptance] criterion 2 PASS: 1000 roundtrips, worst componentwise error {worst:.3e}");
}

/// Criterion 3: Decoupled fires exactly on the separating manifold of a
/// 50^3 real-coupling grid; |det T| = 1 within 1e-10 everywhere defined;
/// det T = 1 iff Im c = 0 on 1000 random complex samples.
#[test]
fn criterion_3_separating_iff_decoupled() {
    // Quarter-integer grid: all products and the separating residual are
    // exact in f64, and the manifold is hit exactly (e.g. a q = 3, c = 1).
    let values: Vec<f64> = (-24..26).map(|k| 0.25 * k as f64).collect();
    assert_eq!(values.len(), 50);
    let mut decoupled = 0usize;
    let mut defined = 0usize;
    for &a in &values {
        for &q in &values {
            for &c in &values {
                let m = InterfaceCoupling::real(a, q, c);
                let residual = (a * q + c * c - 4.0).abs();
                match interface_transfer(&m) {
                    Err(Error::Decoupled { .. }) => {
                        assert!(
                            residual <= 1e-9,
                            "spurious Decoupled at ({a}, {q}, {c}), residual {residual}"
                        );
                        decoupled += 1;
                    }
                    Err(other) => panic!("unexpected error {other:?}"),
                    Ok(t) => {
                        assert!(
                            residual > 1e-9,
                            "missed Decoupled at ({a}, {q}, {c}), residual {residual}"
                        );
                        defined += 1;
                        assert!(
                            (t.det().norm() - 1.0).abs() <= 1e-10,
                            "|det| = {} at ({a}, {q}, {c})",
                            t.det().norm()
                        );
                        // Away from the manifold the entrywise determinant
                        // must agree with the carried one.
                        if residual >= 1.0 {
                            assert!(
                                (t.det_from_entries() - t.det()).norm() <= 1e-8,
                                "det drift at ({a}, {q}, {c})"
                            );
                        }
                    }
                }
            }
        }
    }
    assert!(decoupled > 0, "the grid must hit the separating manifold");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for i in 0..1000 {
        let im = if i % 2 == 0 {
            0.0
        } else {
            let v: f64 = rng.gen_range(1e-3..2.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        };
        let m = InterfaceCoupling {
            a: rng.gen_range(-2.5..2.5),
            q: rng.gen_range(-2.5..2.5),
            c: Complex64::new(rng.gen_range(-2.0..2.0), im),
        };
        if m.is_separating_with(1e-6) {
            continue;
        }
        let t = interface_transfer(&m).unwrap();
        let dev = (t.det() - Complex64::new(1.0, 0.0)).norm();
        if im == 0.0 {
            assert!(dev <= 1e-12, "real coupling must have det 1, got deviation {dev}");
        } else {
            assert!(dev > 1e-9, "complex coupling must rotate det, got deviation {dev}");
        }
    }
    println!(
        "[acceptance] criterion 3 PASS: {decoupled} decoupled / {defined} defined grid points, det checks hold"
    );
}

/// Criterion 4: tree secular eigenvalues agree with the halfline direct
/// sum (multiplicities counted) within 1e-6 for the standard depth-3 tree
/// and the delta / delta-prime depth-2 trees, b = 2, window [0, 100].
#[test]
fn criterion_4_unitary_equivalence_oracle() {
    let window = (0.0, 100.0);
    let grid = treespec_core::grid::recommended_points(window);
    let cases = [
        ("standard", preset(CouplingPreset::Standard, 2), 3usize),
        ("delta(1)", preset(CouplingPreset::Delta(1.0), 2), 2),
        ("delta_prime(-1)", preset(CouplingPreset::DeltaPrime(-1.0), 2), 2),
    ];
    for (name, coupling, depth) in cases {
        let spec =
            RadialTreeSpec::uniform(1.0, coupling, depth, BoundaryAngle::DIRICHLET).unwrap();
        let cmp = compare_spectra(&spec, depth, window, grid, 1e-6).unwrap();
        assert!(
            cmp.pass,
            "{name} depth {depth}: counts {} vs {}, mismatch {:.3e}",
            cmp.tree_count, cmp.direct_sum_count, cmp.max_mismatch
        );
        println!(
            "[acceptance] criterion 4 PASS ({name}, depth {depth}): {} eigenvalues, max mismatch {:.3e}",
            cmp.tree_count, cmp.max_mismatch
        );
    }
}

/// Criterion 5: the delta chain (a = 1, spacing 1) opens its first gap at
/// E = pi^2 within 1e-8, and the unit-circle and trace band tests agree at
/// every grid point.
#[test]
fn criterion_5_kronig_penney_band_edge() {
    let sys = delta_chain(1.0, 1.0, 4);
    let window = (0.0, 30.0);
    let grid = 3000;
    let bands = band_structure(&sys, window, grid).unwrap();
    let gaps = bands.gaps();
    assert!(!gaps.is_empty(), "expected a gap in {bands:?}");
    assert!(
        (gaps[0].0 - PI * PI).abs() < 1e-8,
        "first gap lower edge {} vs pi^2",
        gaps[0].0
    );
    for i in 0..grid {
        let e = window.0 + (window.1 - window.0) * i as f64 / (grid - 1) as f64;
        let t = band_tests(&sys, e).unwrap();
        let trace = t.trace_in_band.expect("real chain has real unimodular monodromy");
        assert_eq!(t.modulus_in_band, trace, "band tests disagree at E = {e}");
    }
    println!(
        "[acceptance] criterion 5 PASS: gap edge {:.12} = pi^2 within 1e-8, tests agree on {grid} points",
        gaps[0].0
    );
}

/// Criterion 6: reflectionless identity on the delta chain: defect below
/// 1e-5 at band-interior energies under eta extrapolation, above 1e-2 at
/// gap energies, and below 1e-6 everywhere for the free system.
#[test]
fn criterion_6_reflectionless_identity() {
    let sys = delta_chain(1.0, 1.0, 4);
    // First band is about (0.912, 9.8696); first gap about (9.8696, 11.77).
    for &e in &[2.0, 3.5, 5.0, 6.5, 8.0] {
        for &basepoint in &[0.35, 0.5, 0.75] {
            let d = reflectionless_defect_limit(&sys, e, basepoint, &DEFAULT_ETA_SWEEP).unwrap();
            assert!(d < 1e-5, "band defect {d} at E = {e}, basepoint {basepoint}");
        }
    }
    for &e in &[10.2, 10.8, 11.4] {
        let d = reflectionless_defect_limit(&sys, e, 0.5, &DEFAULT_ETA_SWEEP).unwrap();
        assert!(d > 1e-2, "gap defect {d} at E = {e}");
    }
    let free = free_chain();
    for &e in &[0.5, 1.0, 2.0, 5.0, 10.0, 25.0] {
        let d = reflectionless_defect(&free, e, 1e-8, 0.5).unwrap();
        assert!(d < 1e-6, "free defect {d} at E = {e}");
    }
    println!("[acceptance] criterion 6 PASS: reflectionless on bands, reflective in gaps");
}

/// Criterion 7: condition (d) is flagged for both counterexample words and
/// clean for the standard preset; the two parameterizations that reduce to
/// the same halfline data give byte-identical band structures.
#[test]
fn criterion_7_condition_d_necessity_and_byte_identity() {
    let word_specs = [
        (
            Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4)),
            Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 1.0, 9)),
        ),
        (
            Letter::new(1.0, VertexCoupling::real(4.0, -1.0, 0.0, 4)),
            Letter::new(1.0, VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9)),
        ),
    ];
    for (special, default) in &word_specs {
        let spec = power2_word(special, default, 16)
            .to_tree_spec(BoundaryAngle::DIRICHLET)
            .unwrap();
        let report = check_conditions(&spec, 16).unwrap();
        assert!(!report.cond_d, "condition (d) must fail");
        assert_eq!(report.cond_d_offenders.len(), 16, "every generation offends");
        assert!(report.cond_b && report.cond_c);
    }
    let standard = RadialTreeSpec::uniform(
        1.0,
        preset(CouplingPreset::Standard, 2),
        16,
        BoundaryAngle::DIRICHLET,
    )
    .unwrap();
    let report = check_conditions(&standard, 16).unwrap();
    assert!(report.cond_a && report.cond_b && report.cond_c && report.cond_d);

    let bands_of = |v: &VertexCoupling| {
        let m = reduce_coupling(v).unwrap();
        let sys = HalflineSystem::uniform_chain(0.0, 1.0, 4, m, BoundaryAngle::DIRICHLET).unwrap();
        let bands = band_structure(&sys, (0.0, 30.0), 3000).unwrap();
        serde_json::to_vec(&bands).unwrap()
    };
    let b4 = bands_of(&VertexCoupling::real(4.0, -1.0, 0.0, 4));
    let b9 = bands_of(&VertexCoupling::real(6.0, -2.0 / 3.0, 0.0, 9));
    assert_eq!(b4, b9, "band structures must serialize byte-identically");
    println!("[acceptance] criterion 7 PASS: condition (d) necessity flagged, outputs byte-identical");
}

/// Criterion 8: the detector reports no eventual period for the
/// power-of-two word (cross-checked by an independent brute-force search)
/// and recovers the planted period of 100 random periodic words.
#[test]
fn criterion_8_aperiodicity_detector() {
    let special = Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4));
    let default = Letter::new(1.0, VertexCoupling::real(0.0, 0.0, 1.0, 9));
    let word = power2_word(&special, &default, 64);
    assert_eq!(detect_eventual_period(&word, 32, 16).unwrap(), None);

    // Independent oracle: exhaustive search straight over the boolean
    // special/non-special pattern.
    let marks: Vec<bool> = (1..=64usize).map(|n| n >= 2 && n.is_power_of_two()).collect();
    let mut brute = None;
    'outer: for q in 1..=16usize {
        for p in 0..=32usize {
            if (p..(64 - q)).all(|i| marks[i] == marks[i + q]) {
                brute = Some((p, q));
                break 'outer;
            }
        }
    }
    assert_eq!(brute, None, "brute force must agree there is no period");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    for trial in 0..100 {
        let q = rng.gen_range(1..=6usize);
        let p = rng.gen_range(0..=4usize);
        // Distinct continuous strengths make the block primitive and the
        // preperiod incompressible.
        let block: Vec<Letter> = (0..q)
            .map(|_| Letter::new(1.0, VertexCoupling::real(rng.gen_range(-5.0..5.0), 0.0, 0.0, 2)))
            .collect();
        let preperiod: Vec<Letter> = (0..p)
            .map(|_| Letter::new(1.0, VertexCoupling::real(rng.gen_range(5.0..10.0), 0.0, 0.0, 2)))
            .collect();
        let word = periodic_word(&block, &preperiod, 40).unwrap();
        let found = detect_eventual_period(&word, 8, 12).unwrap();
        assert_eq!(found, Some((p, q)), "trial {trial}: planted ({p}, {q})");
    }
    println!("[acceptance] criterion 8 PASS: power-of-two word aperiodic, 100 planted periods recovered");
}

/// Criterion 9: Herglotz property of m_+ on 100 random periodic systems,
/// and the Lyapunov quotient matches the monodromy growth rate at five gap
/// energies within 1e-6.
#[test]
fn criterion_9_herglotz_and_lyapunov() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut tested = 0usize;
    while tested < 100 {
        let cell_len = rng.gen_range(1..=3usize);
        let cell: Vec<(f64, InterfaceCoupling)> = (0..cell_len)
            .map(|_| {
                (
                    rng.gen_range(0.6..1.5),
                    InterfaceCoupling::real(
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ),
                )
            })
            .collect();
        if cell
            .iter()
            .any(|(_, m)| (m.a * m.q + m.c.norm_sqr() - 4.0).abs() < 0.3)
        {
            continue;
        }
        let sys = HalflineSystem::periodic_from_cell(0.0, BoundaryAngle::DIRICHLET, &[], &cell, 3)
            .unwrap();
        let z = Complex64::new(rng.gen_range(-3.0..15.0), rng.gen_range(0.05..3.0));
        let basepoint = sys.points()[0] + 0.5 * (sys.points()[1] - sys.points()[0]);
        let w = weyl_m(&sys, z, basepoint).unwrap();
        assert!(w.m_plus.im > 0.0, "Im m+ = {} at z = {z}", w.m_plus.im);
        tested += 1;
    }

    let sys = delta_chain(1.0, 1.0, 4);
    for &e in &[10.0, 10.3, 10.6, 10.9, 11.2] {
        let want = floquet_radius(&sys, e).unwrap().ln(); // period length 1
        let got = lyapunov_exponent(&sys, e, 4_000_000).unwrap();
        assert!(
            (got - want).abs() < 1e-6,
            "Lyapunov {got} vs log |lambda_max| {want} at E = {e}"
        );
    }
    println!("[acceptance] criterion 9 PASS: 100 Herglotz samples, Lyapunov matches monodromy growth");
}

/// Decomposition equivalence beyond the acceptance cases: all three preset
/// families at branching 3.
#[test]
fn decomposition_equivalence_branching_three() {
    let window = (0.0, 60.0);
    let grid = treespec_core::grid::recommended_points(window);
    for (name, coupling) in [
        ("standard", preset(CouplingPreset::Standard, 3)),
        ("delta(1)", preset(CouplingPreset::Delta(1.0), 3)),
        ("delta_prime(-1)", preset(CouplingPreset::DeltaPrime(-1.0), 3)),
    ] {
        let spec = RadialTreeSpec::uniform(1.0, coupling, 2, BoundaryAngle::DIRICHLET).unwrap();
        let cmp = compare_spectra(&spec, 2, window, grid, 1e-6).unwrap();
        assert!(
            cmp.pass,
            "{name} b=3 depth 2: counts {} vs {}, mismatch {:.3e}",
            cmp.tree_count, cmp.direct_sum_count, cmp.max_mismatch
        );
    }
    println!("[acceptance] extra PASS: decomposition equivalence at branching 3");
}

/// The shifted data word keeps the same sequence-level statistics used by
/// the condition checker (sanity link between seqgen and couplings).
#[test]
fn word_feeds_condition_checker() {
    let word: DataWord = power2_word(
        &Letter::new(0.8, VertexCoupling::real(0.0, 0.0, 2.0 / 3.0, 4)),
        &Letter::new(1.2, VertexCoupling::real(0.0, 0.0, 1.0, 9)),
        32,
    );
    let spec = word.to_tree_spec(BoundaryAngle::DIRICHLET).unwrap();
    let report = check_conditions(&spec, 32).unwrap();
    assert_eq!(report.distinct_b, 2);
    assert_eq!(report.distinct_gamma, 2);
    assert!((report.tau - 0.8).abs() < 1e-15);
}
