//! Invariants of the zero finder, counting functions, Jessen functions and the
//! composition-operator functionals.
use std::f64::consts::{LN_2, PI};

use meancount_core::compop::{area_integral, ClosedFormCounting};
use meancount_core::counting::{counting_sigma, littlewood_bound, mean_counting, LadderSpec};
use meancount_core::jessen::{jessen, jessen_time_average, jessen_torus};
use meancount_core::oracles::phi_nu_counting;
use meancount_core::zeros::{find_zeros, winding_count, Rectangle};
use meancount_core::{
    validate_symbol, Complex64 as C64, DirichletPolynomial, FiniteCharacter, QuadratureSpec,
};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn coeff(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..2.0 * PI).prop_map(|(m, t)| C64::from_polar(m, t))
}

/// `1 + sum c_n n^-s` over a few indices built from 2 and 3.
fn unit_series(r: f64) -> impl Strategy<Value = DirichletPolynomial> {
    prop::collection::vec(
        (prop::sample::select(vec![2u64, 3, 4, 6, 9]), coeff(r)),
        1..4,
    )
    .prop_map(|t| DirichletPolynomial::from_terms([(1, C64::new(1.0, 0.0))].into_iter().chain(t)))
}

/// `nu + c 2^-s + d 3^-s` with `|c| + |d| < Re nu - 1/2`, so the symbol is in the class.
fn symbol() -> impl Strategy<Value = DirichletPolynomial> {
    (
        1.0..2.0f64,
        -0.5..0.5f64,
        0.1..0.9f64,
        0.0..1.0f64,
        0.0..2.0 * PI,
        0.0..2.0 * PI,
    )
        .prop_map(|(re, im, frac, split, a, b)| {
            let budget = frac * (re - 0.5);
            DirichletPolynomial::from_terms([
                (1, C64::new(re, im)),
                (2, C64::from_polar(budget * split, a)),
                (3, C64::from_polar(budget * (1.0 - split), b)),
            ])
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn winding_is_conserved_under_partition(f in unit_series(2.0), xs in (-0.9..-0.1f64, 0.1..0.9f64), ys in (-6.0..-0.5f64, 0.5..6.0f64)) {
        let rect = Rectangle::new(-1.23, 1.37, -9.1, 8.7);
        let whole = match winding_count(&f, &rect, &spec()) {
            Ok(w) => w.count,
            // A zero on the outer contour: nothing to conserve.
            Err(_) => return Ok(()),
        };
        let sx = [rect.sigma_min, xs.0, xs.1, rect.sigma_max];
        let sy = [rect.t_min, ys.0, ys.1, rect.t_max];
        let mut sum = 0;
        for i in 0..3 {
            for j in 0..3 {
                match winding_count(&f, &Rectangle::new(sx[i], sx[i + 1], sy[j], sy[j + 1]), &spec()) {
                    Ok(w) => sum += w.count,
                    Err(_) => return Ok(()),
                }
            }
        }
        prop_assert_eq!(sum, whole);
    }

    #[test]
    fn zeros_are_certified_and_symmetric(c in prop::collection::vec(-2.0..2.0f64, 1..4)) {
        // Real coefficients: zeros come in conjugate pairs.
        let f = DirichletPolynomial::from_terms([(1u64, C64::new(1.0, 0.0))].into_iter().chain(c.iter().enumerate().map(|(k, &a)| ((k + 2) as u64, C64::new(a, 0.0)))));
        let rect = Rectangle::new(-3.1, 2.9, -10.3, 10.3);
        let tol = 1e-10;
        let Ok(set) = find_zeros(&f, &rect, tol, &spec()) else { return Ok(()) };
        prop_assert_eq!(set.count() as i64, set.total_winding);
        for z in &set.zeros {
            let df = f.derivative().eval(z.s).norm();
            // A simple zero moves by |f|/|f'| under one Newton step.
            if z.multiplicity == 1 {
                prop_assert!(z.residual <= tol * df.max(1.0) * 10.0, "{:?}", z);
            }
            let mirror = set.zeros.iter().map(|w| (w.s - z.s.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(mirror <= 1e-7, "{:?} has no mirror", z);
        }
    }

    #[test]
    fn jessen_is_character_invariant(f in unit_series(1.5), theta in prop::collection::vec(0.0..2.0 * PI, 2), sigma in 0.05..1.0f64) {
        let g = f.twist(&FiniteCharacter::from_angles(&theta));
        let a = jessen_torus(&f, sigma, usize::MAX, &spec()).unwrap();
        let b = jessen_torus(&g, sigma, usize::MAX, &spec()).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-7 + 10.0 * (a.error_estimate + b.error_estimate));
    }

    #[test]
    fn jessen_routes_agree(f in unit_series(1.5), sigma in 0.1..1.0f64) {
        let j = jessen(&f, sigma, &spec());
        prop_assert!(j.is_ok(), "{:?}", j);
    }

    #[test]
    fn jessen_tail_is_linear(c in prop::collection::vec(coeff(3.0), 1..3), lead in coeff(2.0)) {
        // Smallest index N = 2: J(sigma) = log|a_2| - sigma log 2 once a_2 2^-sigma dominates.
        let a2 = lead + C64::new(0.5, 0.0);
        let f = DirichletPolynomial::from_terms([(2u64, a2)].into_iter().chain(c.iter().enumerate().map(|(k, &a)| ((k + 3) as u64, a))));
        let sigma = 40.0;
        let j = jessen_torus(&f, sigma, usize::MAX, &spec()).unwrap().value;
        prop_assert!((j - (a2.norm().ln() - sigma * LN_2)).abs() <= 1e-9);
        let slope = jessen_torus(&f, sigma + 1.0, usize::MAX, &spec()).unwrap().value - j;
        prop_assert!((slope + LN_2).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn counting_is_monotone_in_sigma0_and_bounded(phi in symbol(), w in (0.6..2.5f64, -1.0..1.0f64)) {
        let phi = validate_symbol(phi, &spec()).unwrap();
        let w = C64::new(w.0, w.1);
        prop_assume!((w - phi.nu()).norm() > 0.05);
        let ladder = LadderSpec::for_series(phi.series());
        let mut prev: Option<(f64, f64)> = None;
        for &s in &ladder.sigma_ladder {
            let e = counting_sigma(&phi, w, s, &ladder, &spec()).unwrap();
            if let Some((v, err)) = prev {
                // Lowering sigma0 can only add solutions.
                prop_assert!(e.value >= v - err - e.error_estimate - 1e-9, "{} < {}", e.value, v);
            }
            prev = Some((e.value, e.error_estimate));
        }
        let m = mean_counting(&phi, w, &ladder, &spec()).unwrap();
        let b = littlewood_bound(w, phi.nu()).unwrap();
        prop_assert!(m.value <= b.bound + ladder.bound_tolerance);
        // The zero route and the Jessen route agree within the reported error.
        let route = m.jessen_route.unwrap();
        prop_assert!((route - m.value).abs() <= m.error_estimate + 1e-9);
    }

    #[test]
    fn time_average_matches_torus(f in unit_series(0.9), sigma in 0.05..1.0f64) {
        let t = 64.0 * PI / LN_2;
        let a = jessen_time_average(&f, sigma, t, &spec()).unwrap();
        let b = jessen_torus(&f, sigma, usize::MAX, &spec()).unwrap();
        // Quasi-periodic horizons leave an O(1/T) discrepancy.
        prop_assert!((a.value - b.value).abs() <= 0.05, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn larger_regions_never_decrease_the_area_integral(grow in (0.0..2.0f64, 0.0..3.0f64)) {
        let nu = C64::new(1.0, 0.0);
        let source = ClosedFormCounting { nu, f: move |w: C64| phi_nu_counting(nu, w) };
        let h = |w: C64| (-w * LN_2).exp().norm_sqr() * LN_2 * LN_2;
        let sup = |d: f64| 4f64.powf(-(1.0 - d)) * LN_2 * LN_2;
        let small = area_integral(&h, &source, Rectangle::new(0.5, 2.0, -1.5, 1.5), &sup, 1e-6, &spec()).unwrap();
        let large = area_integral(&h, &source, Rectangle::new(0.5, 2.0 + grow.0, -1.5 - grow.1, 1.5 + grow.1), &sup, 1e-6, &spec()).unwrap();
        prop_assert!(large.value >= small.value - small.error - large.error);
    }
}
