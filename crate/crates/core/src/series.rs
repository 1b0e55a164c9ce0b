//! Finite Dirichlet polynomials `sum a_n n^{-s}` and their Bohr lift.
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::primes::{factorize, first_primes};

/// Sparse Dirichlet polynomial. Invariant: no stored coefficient is exactly zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirichletPolynomial {
    coeffs: BTreeMap<u64, C64>,
}

impl DirichletPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(1, c)
    }

    pub fn monomial(n: u64, c: C64) -> Self {
        Self::from_terms([(n, c)])
    }

    /// Sums repeated indices and drops zero coefficients. Panics on index 0.
    pub fn from_terms<I: IntoIterator<Item = (u64, C64)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, c) in terms {
            assert!(n >= 1, "Dirichlet indices start at 1");
            *coeffs.entry(n).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(terms: &[(u64, f64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(n, c)| (n, C64::new(c, 0.0))))
    }

    fn trim(&mut self) {
        self.coeffs.retain(|_, c| c.re != 0.0 || c.im != 0.0);
    }

    pub fn coeff(&self, n: u64) -> C64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    /// Terms in increasing index order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_index(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `f(+inf) = a_1`.
    pub fn value_at_infinity(&self) -> C64 {
        self.coeff(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&n| n == 1)
    }

    pub fn eval(&self, s: C64) -> C64 {
        self.terms()
            .map(|(n, a)| a * (-s * (n as f64).ln()).exp())
            .sum()
    }

    /// `f'` with coefficients `-a_n log n`.
    pub fn derivative(&self) -> Self {
        self.nth_derivative(1)
    }

    pub fn nth_derivative(&self, k: u32) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(n, a)| (n, a * (-(n as f64).ln()).powi(k as i32))),
        )
    }

    /// `sum |a_n| n^{-sigma}`.
    pub fn abs_sum(&self, sigma: f64) -> f64 {
        self.terms()
            .map(|(n, a)| a.norm() * (n as f64).powf(-sigma))
            .sum()
    }

    /// `sum |a_n| log n n^{-sigma}`, a bound for `|f'|` on `Re s >= sigma`.
    pub fn derivative_abs_sum(&self, sigma: f64) -> f64 {
        self.terms()
            .map(|(n, a)| {
                let l = (n as f64).ln();
                a.norm() * l * (-sigma * l).exp()
            })
            .sum()
    }

    /// `f(s + sigma)`.
    pub fn shift(&self, sigma: f64) -> Self {
        Self::from_terms(self.terms().map(|(n, a)| (n, a * (n as f64).powf(-sigma))))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.terms().map(|(n, a)| (n, a * c)))
    }

    /// Largest frequency `log(max n)`, zero for constants.
    pub fn max_log_index(&self) -> f64 {
        self.max_index().map_or(0.0, |n| (n as f64).ln())
    }

    /// Dirichlet convolution keeping indices `<= cutoff`.
    pub fn multiply(&self, other: &Self, cutoff: u64) -> Self {
        let mut out = BTreeMap::new();
        for (m, a) in self.terms() {
            for (n, b) in other.terms() {
                match m.checked_mul(n) {
                    Some(k) if k <= cutoff => {
                        *out.entry(k).or_insert(C64::new(0.0, 0.0)) += a * b;
                    }
                    _ => break,
                }
            }
        }
        let mut p = Self { coeffs: out };
        p.trim();
        p
    }

    /// `exp(g)` truncated at `cutoff`; requires `a_1 = 0`.
    pub fn exp_series(&self, cutoff: u64) -> Result<Self> {
        let a1 = self.value_at_infinity();
        if a1 != C64::new(0.0, 0.0) {
            return Err(Error::NonzeroConstant {
                re: a1.re,
                im: a1.im,
            });
        }
        let mut sum = Self::constant(C64::new(1.0, 0.0));
        let mut term = sum.clone();
        let mut k = 1.0;
        loop {
            term = term.multiply(self, cutoff).scale(C64::new(1.0 / k, 0.0));
            if term.is_zero() {
                return Ok(sum);
            }
            sum = &sum + &term;
            k += 1.0;
        }
    }

    /// `f(phi(s))` truncated at `cutoff`, using `n^{-phi} = n^{-nu} exp(-log n (phi - nu))`.
    pub fn compose_series(&self, phi: &Self, cutoff: u64) -> Result<Self> {
        let nu = phi.value_at_infinity();
        if nu.re <= 0.5 {
            return Err(Error::RejectedMean { re_nu: nu.re });
        }
        let g = phi - &Self::constant(nu);
        let mut out = Self::zero();
        for (n, a) in self.terms() {
            let l = (n as f64).ln();
            let head = a * (-nu * l).exp();
            if n == 1 {
                out = &out + &Self::constant(head);
                continue;
            }
            let e = g.scale(C64::new(-l, 0.0)).exp_series(cutoff)?;
            out = &out + &e.scale(head);
        }
        Ok(out)
    }

    /// Upper bound for `|f(phi(s)) - compose_series(f, phi, cutoff)(s)|` on `Re s >= sigma > 0`.
    pub fn compose_tail_bound(&self, phi: &Self, cutoff: u64, sigma: f64) -> f64 {
        let nu = phi.value_at_infinity();
        let g = phi - &Self::constant(nu);
        let ln_cut = (cutoff as f64).ln();
        let mut total = 0.0;
        for (n, a) in self.terms() {
            if n == 1 {
                continue;
            }
            let l = (n as f64).ln();
            let best = (1..64)
                .map(|i| {
                    let sp = sigma * i as f64 / 64.0;
                    (-(sigma - sp) * ln_cut + l * g.abs_sum(sp)).exp()
                })
                .fold(f64::INFINITY, f64::min);
            total += a.norm() * (-nu.re * l).exp() * best;
        }
        total
    }

    /// Keeps the terms whose prime factors are among the first `m` primes.
    pub fn abschnitt(&self, m: usize) -> Self {
        let bound = if m == 0 {
            1
        } else {
            *first_primes(m).last().unwrap()
        };
        Self::from_terms(
            self.terms()
                .filter(|&(n, _)| factorize(n).iter().all(|&(p, _)| p <= bound)),
        )
    }

    /// Multiplies `a_n` by the completely multiplicative `chi(n)`.
    pub fn twist(&self, chi: &FiniteCharacter) -> Self {
        Self::from_terms(self.terms().map(|(n, a)| (n, a * chi.at(n))))
    }

    /// `sqrt(sum |a_n|^2)`.
    pub fn h2_norm(&self) -> f64 {
        self.terms().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Primes dividing some supported index, ascending.
    pub fn support_primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self
            .terms()
            .flat_map(|(n, _)| factorize(n).into_iter().map(|(p, _)| p))
            .collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    pub fn bohr(&self) -> BohrForm {
        BohrForm::new(self)
    }
}

impl Add for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn add(self, rhs: Self) -> DirichletPolynomial {
        DirichletPolynomial::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn sub(self, rhs: Self) -> DirichletPolynomial {
        DirichletPolynomial::from_terms(self.terms().chain(rhs.terms().map(|(n, c)| (n, -c))))
    }
}

impl Neg for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn neg(self) -> DirichletPolynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<C64> for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn mul(self, c: C64) -> DirichletPolynomial {
        self.scale(c)
    }
}

/// Completely multiplicative character given by its values on the first primes;
/// later primes map to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCharacter {
    values: Vec<C64>,
}

impl FiniteCharacter {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
            return Err(invalid("character values must be unimodular"));
        }
        Ok(Self { values })
    }

    /// `chi(p_j) = exp(i theta_j)`.
    pub fn from_angles(theta: &[f64]) -> Self {
        Self {
            values: theta.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, n: u64) -> C64 {
        let primes = first_primes(self.values.len());
        let mut out = C64::new(1.0, 0.0);
        for (p, e) in factorize(n) {
            if let Some(j) = primes.iter().position(|&q| q == p) {
                out *= self.values[j].powi(e as i32);
            }
        }
        out
    }
}

/// The polynomial `P(z_1, .., z_m)` with `f(s) = P(p_1^{-s}, .., p_m^{-s})`.
#[derive(Clone, Debug)]
pub struct BohrForm {
    primes: Vec<u64>,
    log_primes: Vec<f64>,
    max_exp: Vec<u32>,
    offsets: Vec<usize>,
    coeffs: Vec<C64>,
    // exponent of prime j in term t at exps[t * m + j]
    exps: Vec<u32>,
}

const STACK_POWERS: usize = 256;

/// Runs `body` with a buffer of `n` complex slots, on the stack when small.
fn with_buffer<R>(n: usize, body: impl FnOnce(&mut [C64]) -> R) -> R {
    if n <= STACK_POWERS {
        let mut buf = [C64::new(0.0, 0.0); STACK_POWERS];
        body(&mut buf[..n])
    } else {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        body(&mut buf)
    }
}

impl BohrForm {
    pub fn new(f: &DirichletPolynomial) -> Self {
        let primes = f.support_primes();
        let m = primes.len();
        let mut coeffs = Vec::with_capacity(f.len());
        let mut exps = vec![0u32; f.len() * m];
        let mut max_exp = vec![0u32; m];
        for (t, (n, a)) in f.terms().enumerate() {
            coeffs.push(a);
            for (p, e) in factorize(n) {
                let j = primes.binary_search(&p).unwrap();
                exps[t * m + j] = e;
                max_exp[j] = max_exp[j].max(e);
            }
        }
        let mut offsets = Vec::with_capacity(m + 1);
        let mut acc = 0;
        for &e in &max_exp {
            offsets.push(acc);
            acc += e as usize + 1;
        }
        offsets.push(acc);
        Self {
            log_primes: primes.iter().map(|&p| (p as f64).ln()).collect(),
            primes,
            max_exp,
            offsets,
            coeffs,
            exps,
        }
    }

    /// Number of torus variables.
    pub fn dim(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn log_primes(&self) -> &[f64] {
        &self.log_primes
    }

    /// Degree in each variable.
    pub fn degrees(&self) -> &[u32] {
        &self.max_exp
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn exponents(&self, term: usize) -> &[u32] {
        let m = self.dim();
        &self.exps[term * m..(term + 1) * m]
    }

    fn fill_powers(&self, z: &[C64], pw: &mut [C64]) {
        for (j, &zj) in z.iter().enumerate() {
            let mut acc = C64::new(1.0, 0.0);
            for slot in &mut pw[self.offsets[j]..self.offsets[j + 1]] {
                *slot = acc;
                acc *= zj;
            }
        }
    }

    /// `P(z)` and `sum_t c_t d_t prod z^e` for a second coefficient set `d` (if given).
    fn eval_pair(&self, z: &[C64], second: Option<&dyn Fn(usize) -> C64>) -> (C64, C64) {
        let m = self.dim();
        if m == 0 {
            return (
                self.coeffs.first().copied().unwrap_or_default(),
                C64::new(0.0, 0.0),
            );
        }
        with_buffer(self.offsets[m], |pw| {
            self.fill_powers(z, pw);
            let mut v = C64::new(0.0, 0.0);
            let mut d = C64::new(0.0, 0.0);
            for t in 0..self.coeffs.len() {
                let mut mono = C64::new(1.0, 0.0);
                for j in 0..m {
                    mono *= pw[self.offsets[j] + self.exps[t * m + j] as usize];
                }
                let term = self.coeffs[t] * mono;
                v += term;
                if let Some(w) = second {
                    d += term * w(t);
                }
            }
            (v, d)
        })
    }

    /// `P(z_1, .., z_m)`.
    pub fn eval_torus(&self, z: &[C64]) -> C64 {
        self.eval_pair(z, None).0
    }

    fn point(&self, s: C64) -> Vec<C64> {
        self.log_primes.iter().map(|&l| (-s * l).exp()).collect()
    }

    pub fn eval(&self, s: C64) -> C64 {
        self.eval_torus(&self.point(s))
    }

    /// `(f(s), f'(s))`.
    pub fn eval_d(&self, s: C64) -> (C64, C64) {
        let z = self.point(s);
        let m = self.dim();
        let lp = &self.log_primes;
        let exps = &self.exps;
        let w = |t: usize| {
            let l: f64 = (0..m).map(|j| exps[t * m + j] as f64 * lp[j]).sum();
            C64::new(-l, 0.0)
        };
        self.eval_pair(&z, Some(&w))
    }

    /// Coefficients (ascending in `z_j`) of `P` as a polynomial in variable `j`,
    /// the remaining variables fixed at `z` (entry `j` of `z` is ignored).
    pub fn univariate(&self, j: usize, z: &[C64], out: &mut Vec<C64>) {
        let m = self.dim();
        out.clear();
        out.resize(self.max_exp[j] as usize + 1, C64::new(0.0, 0.0));
        with_buffer(self.offsets[m], |pw| {
            self.fill_powers(z, pw);
            for t in 0..self.coeffs.len() {
                let mut mono = self.coeffs[t];
                for i in 0..m {
                    if i != j {
                        mono *= pw[self.offsets[i] + self.exps[t * m + i] as usize];
                    }
                }
                out[self.exps[t * m + j] as usize] += mono;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_matches_bohr_form() {
        let f = DirichletPolynomial::from_terms([
            (1, c(1.0, 0.0)),
            (6, c(0.5, -0.2)),
            (8, c(0.0, 0.3)),
            (15, c(-0.1, 0.0)),
        ]);
        let b = f.bohr();
        assert_eq!(b.primes(), &[2, 3, 5]);
        for s in [c(0.3, 2.0), c(1.5, -7.0), c(-0.2, 0.1)] {
            assert!((f.eval(s) - b.eval(s)).norm() < 1e-13);
            let (v, d) = b.eval_d(s);
            assert!((v - f.eval(s)).norm() < 1e-13);
            assert!((d - f.derivative().eval(s)).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_series_rejects_constant() {
        let g = DirichletPolynomial::from_real(&[(1, 1.0), (2, 1.0)]);
        assert!(matches!(
            g.exp_series(16),
            Err(Error::NonzeroConstant { .. })
        ));
    }

    #[test]
    fn exp_of_two_power() {
        // exp(2^{-s}) = sum_k 2^{-ks}/k!
        let g = DirichletPolynomial::from_real(&[(2, 1.0)]);
        let e = g.exp_series(1 << 10).unwrap();
        let mut fact = 1.0;
        for k in 0..=10u32 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.coeff(1 << k).re - 1.0 / fact).abs() < 1e-15);
        }
        assert_eq!(e.len(), 11);
    }

    #[test]
    fn multiply_matches_product_of_values() {
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -0.5), (3, 0.25)]);
        let g = DirichletPolynomial::from_real(&[(1, 2.0), (5, 1.0)]);
        let h = f.multiply(&g, 1000);
        let s = c(0.7, 3.0);
        assert!((h.eval(s) - f.eval(s) * g.eval(s)).norm() < 1e-13);
        assert_eq!(f.multiply(&g, 6).max_index(), Some(5));
    }

    #[test]
    fn abschnitt_and_twist() {
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, 1.0), (3, 1.0), (6, 1.0), (7, 1.0)]);
        assert_eq!(f.abschnitt(1).len(), 2);
        assert_eq!(f.abschnitt(0).len(), 1);
        let chi =
            FiniteCharacter::from_angles(&[core::f64::consts::PI, core::f64::consts::FRAC_PI_2]);
        let t = f.twist(&chi);
        assert!((t.coeff(6) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((t.coeff(7) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_constant_symbol() {
        // f(3/2) for the constant symbol 3/2.
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, 1.0)]);
        let phi = DirichletPolynomial::from_real(&[(1, 1.5)]);
        let h = f.compose_series(&phi, 256).unwrap();
        assert!(h.is_constant());
        assert!((h.value_at_infinity().re - (1.0 + 2f64.powf(-1.5))).abs() < 1e-15);
        let bad = DirichletPolynomial::from_real(&[(1, 0.5), (2, 0.1)]);
        assert!(matches!(
            f.compose_series(&bad, 256),
            Err(Error::RejectedMean { .. })
        ));
    }
}
