//! Randomized invariants of the coupling maps and transfer machinery.

use num_complex::Complex64;
use proptest::prelude::*;

use treespec_core::couplings::{
    reconstruct_coupling, reduce_coupling, reduction_denominator, InterfaceCoupling,
    VertexCoupling,
};
use treespec_core::halfline::{
    free_transfer, interface_transfer, propagate, BoundaryAngle, HalflineSystem,
};
use treespec_core::spectra::{band_tests, halfline_eigenvalues, weyl_m};

fn admissible_coupling() -> impl Strategy<Value = VertexCoupling> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -2.0..2.0f64,
        prop_oneof![Just(1u32), Just(2), Just(3), Just(4), Just(9)],
    )
        .prop_map(|(alpha, beta, im_gamma, b)| VertexCoupling {
            alpha,
            beta,
            gamma: Complex64::new(0.0, im_gamma),
            b,
            eigenphases: vec![std::f64::consts::PI; (b as usize).saturating_sub(1)],
        })
        .prop_filter("needs margins on conditions (c) and (d)", |c| {
            let s4 = c.alpha * c.beta + c.gamma.norm_sqr() + 4.0;
            reduction_denominator(c).abs() > 1e-3 && s4.abs() > 1e-3
        })
}

fn generic_interface() -> impl Strategy<Value = InterfaceCoupling> {
    (-2.5..2.5f64, -2.5..2.5f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(a, q, cr, ci)| InterfaceCoupling { a, q, c: Complex64::new(cr, ci) })
        .prop_filter("away from the separating manifold", |m| {
            let s = m.a * m.q + m.c.norm_sqr();
            (s - 4.0).abs() > 1e-3 || m.c.im.abs() > 1e-3
        })
}

proptest! {
    // Reduce then reconstruct is the identity on the canonical branch
    // (Re gamma = 0, conditions (c) and (d) with a margin).
    #[test]
    fn roundtrip_reduce_reconstruct(c in admissible_coupling()) {
        let m = reduce_coupling(&c).unwrap();
        let back = reconstruct_coupling(&m).unwrap();
        prop_assert!(back.data_close_to(&c, 1e-9), "{c:?} -> {m:?} -> {back:?}");
    }

    // Reconstruct then reduce is the identity on the image of reduce.
    #[test]
    fn roundtrip_reconstruct_reduce(c in admissible_coupling()) {
        let m = reduce_coupling(&c).unwrap();
        let again = reduce_coupling(&reconstruct_coupling(&m).unwrap()).unwrap();
        prop_assert!(again.close_to(&m, 1e-9), "{m:?} -> {again:?}");
    }

    // det T = (w + i Im c)/(w - i Im c) with w = 1 - (aq + |c|^2)/4, so
    // |det T| = 1 always and det T = 1 exactly when Im c = 0.
    #[test]
    fn interface_determinant_is_unimodular(m in generic_interface()) {
        let t = interface_transfer(&m).unwrap();
        let w = 1.0 - (m.a * m.q + m.c.norm_sqr()) / 4.0;
        let expect = Complex64::new(w, m.c.im) / Complex64::new(w, -m.c.im);
        prop_assert!((t.det() - expect).norm() < 1e-13);
        prop_assert!((t.det().norm() - 1.0).abs() < 1e-13);
        if m.c.im == 0.0 {
            prop_assert!((t.det() - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    // The transfer matrix satisfies both interface condition lines for
    // arbitrary Cauchy data.
    #[test]
    fn interface_conditions_hold(
        m in generic_interface(),
        u_re in -2.0..2.0f64,
        u_im in -2.0..2.0f64,
        du_re in -2.0..2.0f64,
        du_im in -2.0..2.0f64,
    ) {
        let t = interface_transfer(&m).unwrap();
        let minus = [Complex64::new(u_re, u_im), Complex64::new(du_re, du_im)];
        let plus = t.apply(minus);
        let r1 = (plus[1] - minus[1])
            - (m.a / 2.0) * (plus[0] + minus[0])
            - (m.c / 2.0) * (plus[1] + minus[1]);
        let r2 = (plus[0] - minus[0])
            + (m.c.conj() / 2.0) * (plus[0] + minus[0])
            - (m.q / 2.0) * (plus[1] + minus[1]);
        prop_assert!(r1.norm() < 1e-10, "line 1 residual {r1:?}");
        prop_assert!(r2.norm() < 1e-10, "line 2 residual {r2:?}");
    }

    // Free transfers compose over interval splits; tolerance is relative
    // to the entry scale since negative energies grow like cosh.
    #[test]
    fn free_transfer_composes(
        l1 in 0.05..2.0f64,
        l2 in 0.05..2.0f64,
        e in -10.0..40.0f64,
    ) {
        let z = Complex64::new(e, 0.0);
        let whole = free_transfer(l1 + l2, z);
        let split = free_transfer(l2, z).compose(&free_transfer(l1, z));
        let scale = whole.max_abs_entry().max(1.0);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((whole.m[i][j] - split.m[i][j]).norm() < 1e-10 * scale);
            }
        }
    }

    // Separating vertex data reduces to separating interface data whenever
    // the reduction exists.
    #[test]
    fn separating_survives_reduction(
        alpha in 0.2..3.0f64,
        gamma in -1.9..1.9f64,
        b in prop_oneof![Just(2u32), Just(3), Just(5)],
    ) {
        // alpha beta + gamma^2 = 4 solved for beta.
        let beta = (4.0 - gamma * gamma) / alpha;
        let c = VertexCoupling::real(alpha, beta, gamma, b);
        prop_assume!(reduction_denominator(&c).abs() > 1e-6);
        let m = reduce_coupling(&c).unwrap();
        prop_assert!(m.is_separating_with(1e-9), "{c:?} -> {m:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Propagation is associative across an interior split point.
    #[test]
    fn propagate_splits(
        a in 0.1..1.9f64,
        e in -5.0..30.0f64,
        split in 1.05..1.95f64,
    ) {
        let sys = HalflineSystem::new(
            0.0,
            vec![1.0, 2.0],
            vec![InterfaceCoupling::real(a, 0.0, 0.0); 2],
            BoundaryAngle::DIRICHLET,
        )
        .unwrap();
        let z = Complex64::new(e, 0.0);
        let whole = propagate(&sys, z, 0.5, 2.5).unwrap();
        let second = propagate(&sys, z, split, 2.5).unwrap();
        let first = propagate(&sys, z, 0.5, split).unwrap();
        let glued = second.compose(&first);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((whole.m[i][j] - glued.m[i][j]).norm() < 1e-10);
            }
        }
    }

    // Herglotz property of m_+ on random periodic systems.
    #[test]
    fn weyl_plus_is_herglotz(
        a in -1.5..1.5f64,
        q in -1.0..1.0f64,
        cr in -1.0..1.0f64,
        spacing in 0.6..1.4f64,
        z_re in -3.0..15.0f64,
        z_im in 0.05..3.0f64,
    ) {
        let coupling = InterfaceCoupling::real(a, q, cr);
        prop_assume!((coupling.a * coupling.q + coupling.c.norm_sqr() - 4.0).abs() > 0.5);
        let sys = HalflineSystem::uniform_chain(
            0.0,
            spacing,
            3,
            coupling,
            BoundaryAngle::DIRICHLET,
        )
        .unwrap();
        let w = weyl_m(&sys, Complex64::new(z_re, z_im), 0.5 * spacing).unwrap();
        prop_assert!(w.m_plus.im > 0.0, "Im m+ = {}", w.m_plus.im);
    }

    // Unit-circle and trace band tests classify identically for real
    // couplings (real monodromy entries, determinant 1).
    #[test]
    fn band_test_consistency(
        a in -1.5..1.5f64,
        spacing in 0.7..1.3f64,
        e in 0.05..40.0f64,
    ) {
        let sys = HalflineSystem::uniform_chain(
            0.0,
            spacing,
            3,
            InterfaceCoupling::real(a, 0.0, 0.0),
            BoundaryAngle::DIRICHLET,
        )
        .unwrap();
        let t = band_tests(&sys, e).unwrap();
        let trace = t.trace_in_band.expect("real chain");
        prop_assert_eq!(t.modulus_in_band, trace);
    }

    // Shifting the whole system moves no eigenvalue.
    #[test]
    fn eigenvalues_translation_invariant(
        a in -1.0..1.5f64,
        shift in -3.0..3.0f64,
    ) {
        let sys = HalflineSystem::new(
            0.0,
            vec![1.0, 2.2],
            vec![InterfaceCoupling::real(a, 0.0, 0.0); 2],
            BoundaryAngle::DIRICHLET,
        )
        .unwrap();
        let moved = sys.translated(shift);
        let base = halfline_eigenvalues(&sys, 3.0, (0.0, 30.0), 1500).unwrap();
        let shifted = halfline_eigenvalues(&moved, 3.0 + shift, (0.0, 30.0), 1500).unwrap();
        prop_assert_eq!(base.len(), shifted.len());
        for (x, y) in base.iter().zip(&shifted) {
            prop_assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }
}
