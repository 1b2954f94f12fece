use filmvortex::grid::{build_grid, DomainSpec, ScalarField};
use filmvortex::hodge::{decompose, face_weights, harmonic_basis, random_smooth_field, DEFAULT_TOL};
use filmvortex::staggered::Complex;
use proptest::prelude::*;

fn domain(annulus: bool) -> DomainSpec {
    if annulus {
        DomainSpec::annulus(0.35, 1.0)
    } else {
        DomainSpec::unit_disk()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn random_fields_split_orthogonally(seed in 0u64..10_000, res in 20usize..40, annulus: bool, amp in 0.0f64..0.6) {
        let g = build_grid(&domain(annulus), res).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |x, y| 1.0 + amp * (2.0 * x - y).sin());
        let z = random_smooth_field(&cx, seed);
        let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
        let r = s.report(&cx, &z, &a).unwrap();
        prop_assert!(r.worst() <= 1e-6, "{:?}", r);
    }

    #[test]
    fn split_is_linear(seed in 0u64..10_000, c in -3.0f64..3.0) {
        let g = build_grid(&DomainSpec::annulus(0.4, 1.0), 24).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |x, _| 1.2 + 0.3 * x);
        let (z1, z2) = (random_smooth_field(&cx, seed), random_smooth_field(&cx, seed + 1));
        let z = z1.axpy(c, &z2);
        let (s, s1, s2) = (
            decompose(&cx, &z, &a, DEFAULT_TOL).unwrap(),
            decompose(&cx, &z1, &a, DEFAULT_TOL).unwrap(),
            decompose(&cx, &z2, &a, DEFAULT_TOL).unwrap(),
        );
        let (af, _) = face_weights(&cx, &a).unwrap();
        let nz = cx.inner(&z, &z, &af).max(1e-300);
        for (p, p1, p2) in [(&s.u, &s1.u, &s2.u), (&s.v, &s1.v, &s2.v), (&s.w, &s1.w, &s2.w)] {
            let d = p.axpy(-1.0, p1).axpy(-c, p2);
            prop_assert!(cx.inner(&d, &d, &af) <= 1e-14 * nz);
        }
    }
}

#[test]
fn harmonic_part_lives_only_on_holes() {
    let g = build_grid(&DomainSpec::annulus(0.4, 1.0), 48).unwrap();
    let cx = Complex::new(&g);
    let a = ScalarField::constant(&g, 1.0);
    let basis = harmonic_basis(&cx, &a, DEFAULT_TOL).unwrap();
    assert_eq!(basis.len(), 1);
    let z = random_smooth_field(&cx, 11);
    let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
    let (af, _) = face_weights(&cx, &a).unwrap();
    assert!(cx.inner(&s.w, &s.w, &af) > 0.0);
    // W is a multiple of the single harmonic field
    let xi = &basis.fields(&cx, &a).unwrap()[0];
    let c = basis.coefficients(&cx, &a, &s.w).unwrap()[0];
    let d = s.w.axpy(-c, xi);
    assert!(cx.inner(&d, &d, &af) <= 1e-10 * cx.inner(&s.w, &s.w, &af));
}
