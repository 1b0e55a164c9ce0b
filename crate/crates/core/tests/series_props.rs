//! Algebraic invariants of finite Dirichlet series.
use meancount_core::{Complex64 as C64, DirichletPolynomial, FiniteCharacter};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// Up to five terms on indices `1..=max_index`.
fn series(max_index: u64) -> impl Strategy<Value = DirichletPolynomial> {
    prop::collection::vec((1..=max_index, coeff()), 0..5).prop_map(DirichletPolynomial::from_terms)
}

fn point() -> impl Strategy<Value = C64> {
    (0.5..3.0f64, -20.0..20.0f64).prop_map(|(x, y)| C64::new(x, y))
}

fn close(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #[test]
    fn convolution_is_commutative_and_associative(f in series(12), g in series(12), h in series(12)) {
        let n = 12 * 12 * 12;
        let fg = f.multiply(&g, n);
        let gf = g.multiply(&f, n);
        for (k, a) in fg.terms() {
            prop_assert!(close(a, gf.coeff(k), 1.0));
        }
        prop_assert_eq!(fg.len(), gf.len());
        let left = fg.multiply(&h, n);
        let right = f.multiply(&g.multiply(&h, n), n);
        for k in 1..=n {
            prop_assert!(close(left.coeff(k), right.coeff(k), 8.0));
        }
    }

    #[test]
    fn product_evaluates_pointwise(f in series(20), g in series(20), s in point()) {
        let p = f.multiply(&g, 400);
        let scale = f.abs_sum(s.re) * g.abs_sum(s.re);
        prop_assert!(close(p.eval(s), f.eval(s) * g.eval(s), scale));
    }

    #[test]
    fn exponential_converges(g in series(6), s in (4.0..6.0f64, -5.0..5.0f64)) {
        let g = &g - &DirichletPolynomial::constant(g.value_at_infinity());
        let s = C64::new(s.0, s.1);
        let exact = g.eval(s).exp();
        let coarse = (g.exp_series(1 << 8).unwrap().eval(s) - exact).norm();
        let fine = (g.exp_series(1 << 16).unwrap().eval(s) - exact).norm();
        // Terms beyond the cutoff N have modulus at most e^{A} N^{-Re s}, A = sum |g_n|.
        let a = g.abs_sum(0.0);
        prop_assert!(fine <= a.exp() * 2f64.powf(-16.0 * s.re) * 64.0 + 1e-13);
        prop_assert!(fine <= coarse + 1e-13);
    }

    #[test]
    fn composition_is_pointwise_within_tail_bound(f in series(6), c in prop::collection::vec(coeff(), 1..3), s in (4.0..6.0f64, -5.0..5.0f64)) {
        // nu = 2 and small coefficients keep Re phi above 1/2.
        let phi = DirichletPolynomial::from_terms([(1, C64::new(2.0, 0.0))].into_iter().chain(c.iter().enumerate().map(|(k, &a)| ((k + 2) as u64, a * 0.3))));
        let s = C64::new(s.0, s.1);
        let cut = 1 << 12;
        let comp = f.compose_series(&phi, cut).unwrap();
        let bound = f.compose_tail_bound(&phi, cut, s.re);
        let exact: C64 = f.terms().map(|(n, a)| a * (-(n as f64).ln() * phi.eval(s)).exp()).sum();
        prop_assert!((comp.eval(s) - exact).norm() <= bound + 1e-12, "{} > {}", (comp.eval(s) - exact).norm(), bound);
    }

    #[test]
    fn twist_keeps_magnitudes(f in series(60), theta in prop::collection::vec(0.0..6.3f64, 0..6)) {
        let chi = FiniteCharacter::from_angles(&theta);
        let g = f.twist(&chi);
        for (n, a) in f.terms() {
            prop_assert!((g.coeff(n).norm() - a.norm()).abs() <= 1e-14 * a.norm().max(1.0));
        }
        prop_assert!((g.h2_norm() - f.h2_norm()).abs() <= 1e-13);
    }

    #[test]
    fn abschnitt_keeps_smooth_indices(f in series(60), m in 0usize..5) {
        let a = f.abschnitt(m);
        let primes = [2u64, 3, 5, 7];
        for (n, c) in f.terms() {
            let mut k = n;
            for &p in primes.iter().take(m) {
                while k % p == 0 {
                    k /= p;
                }
            }
            prop_assert_eq!(a.coeff(n), if k == 1 { c } else { C64::new(0.0, 0.0) });
        }
    }
}
