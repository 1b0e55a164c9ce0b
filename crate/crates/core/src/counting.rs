//! Finite counting sums `(pi/T) sum Re s` over solutions of `phi(s) = w`,
//! their limits along a ladder of heights and abscissas, and the pointwise
//! bounds they must respect.
//!
//! All sums are drawn from a [`ZeroLadder`], which locates zeros once over a
//! growing window and answers every `(sigma0, T)` query by filtering.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::jessen::jessen_torus;
use crate::quad::QuadratureSpec;
use crate::series::DirichletPolynomial;
use crate::symbol::SymbolG0;
use crate::zeros::{find_zeros, quasi_period, zero_free_abscissa, Rectangle, Zero};

/// Default location tolerance for zeros feeding counting sums.
pub const ZERO_TOL: f64 = 1e-9;

/// Discretization of the double limit: heights `t0 * growth^k` for `k < steps`,
/// then abscissas along `sigma_ladder`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderSpec {
    pub t0: f64,
    pub steps: usize,
    pub growth: f64,
    /// Strictly decreasing, positive.
    pub sigma_ladder: Vec<f64>,
    /// Successive rungs closer than `rel_target * max(1, |value|)` count as converged.
    pub rel_target: f64,
    /// Slack allowed above the pointwise bound before reporting a violation.
    pub bound_tolerance: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            t0: 32.0 * 2.0 * PI / core::f64::consts::LN_2,
            steps: 6,
            growth: 2.0,
            sigma_ladder: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            rel_target: 1e-3,
            bound_tolerance: 1e-3,
        }
    }
}

impl LadderSpec {
    /// Default ladder with `t0` set to 32 quasi-periods of `f`.
    pub fn for_series(f: &DirichletPolynomial) -> Self {
        Self {
            t0: 32.0 * quasi_period(f),
            ..Self::default()
        }
    }

    pub fn t_values(&self) -> Vec<f64> {
        let mut t = self.t0;
        let mut out = Vec::with_capacity(self.steps);
        for _ in 0..self.steps {
            out.push(t);
            t *= self.growth;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(invalid("ladder t0 must be positive"));
        }
        if self.steps < 2 {
            return Err(invalid("ladder needs at least two rungs"));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(invalid("ladder growth must exceed 1"));
        }
        if self.sigma_ladder.is_empty()
            || self
                .sigma_ladder
                .iter()
                .any(|&s| !(s > 0.0 && s.is_finite()))
        {
            return Err(invalid("sigma ladder must be non-empty and positive"));
        }
        if self.sigma_ladder.windows(2).any(|p| p[1] >= p[0]) {
            return Err(invalid("sigma ladder must be strictly decreasing"));
        }
        if !(self.rel_target > 0.0) || !(self.bound_tolerance >= 0.0) {
            return Err(invalid("ladder tolerances must be positive"));
        }
        Ok(())
    }
}

/// A counting value with the ladder that produced it.
#[derive(Clone, Debug, PartialEq)]
#[allow(non_snake_case)]
pub struct CountingEstimate {
    pub value: f64,
    pub sigma0: f64,
    pub t_ladder: Vec<f64>,
    /// Same length as `t_ladder`.
    pub per_T_values: Vec<f64>,
    pub error_estimate: f64,
    pub converged: bool,
    /// `(sigma0, value, error)` for each abscissa visited, largest first.
    pub sigma_profile: Vec<(f64, f64, f64)>,
    /// Independent value from the Jessen function, when computed.
    pub jessen_route: Option<f64>,
}

impl CountingEstimate {
    fn zero(sigma0: f64) -> Self {
        Self {
            value: 0.0,
            sigma0,
            t_ladder: Vec::new(),
            per_T_values: Vec::new(),
            error_estimate: 0.0,
            converged: true,
            sigma_profile: Vec::new(),
            jessen_route: None,
        }
    }

    /// Turns an exhausted ladder into `NonConverged`.
    pub fn require_converged(self, context: &'static str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConverged {
                context,
                value: self.value,
                error_estimate: self.error_estimate,
            })
        }
    }
}

/// Zeros of `f` in `[floor, sigma_max] x [-covered, covered]`, grown on demand.
///
/// `sigma_max` is zero-free by construction. When a zero sits on the left
/// edge the floor is lowered and the window rebuilt; when it sits on the top
/// edge the cut is moved up.
#[derive(Clone, Debug)]
pub struct ZeroLadder {
    f: DirichletPolynomial,
    spec: QuadratureSpec,
    tol: f64,
    floor: f64,
    sigma_max: f64,
    covered: f64,
    zeros: Vec<Zero>,
}

impl ZeroLadder {
    pub fn new(f: &DirichletPolynomial, sigma_floor: f64, spec: &QuadratureSpec) -> Result<Self> {
        Self::with_tol(f, sigma_floor, ZERO_TOL, spec)
    }

    pub fn with_tol(
        f: &DirichletPolynomial,
        sigma_floor: f64,
        tol: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        if f.is_zero() {
            return Err(invalid("counting zeros of the zero function"));
        }
        if !sigma_floor.is_finite() || !(tol > 0.0) {
            return Err(invalid("bad floor or tolerance"));
        }
        let sigma_max = zero_free_abscissa(f).max(sigma_floor) + 0.25;
        Ok(Self {
            f: f.clone(),
            spec: spec.clone(),
            tol,
            floor: sigma_floor,
            sigma_max,
            covered: if f.is_constant() { f64::INFINITY } else { 0.0 },
            zeros: Vec::new(),
        })
    }

    pub fn series(&self) -> &DirichletPolynomial {
        &self.f
    }

    /// Current left edge; never above the requested floor.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn covered(&self) -> f64 {
        self.covered
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    fn coincidence(&self, x: f64) -> f64 {
        100.0 * self.tol * x.abs().max(1.0)
    }

    /// Ensures every zero with `|Im s| <= t` (plus a margin) is known.
    pub fn extend_to(&mut self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid("height must be positive"));
        }
        let needed = t + 2.0 * self.coincidence(t);
        if self.covered >= needed {
            return Ok(());
        }
        let mut top = needed * (1.0 + 1e-7);
        let mut attempt = 0;
        loop {
            match self.scan(self.covered, top) {
                Ok(found) => {
                    self.zeros.extend(found);
                    self.covered = top;
                    return Ok(());
                }
                Err(Error::BoundaryZero { re, im }) if attempt < 12 => {
                    attempt += 1;
                    let jitter = (1e-6 * top).max(1e-4) * (1u64 << attempt) as f64;
                    if (re - self.floor).abs() <= (im.abs() - top).abs() {
                        // Left edge: rebuild the whole window from a lower floor.
                        self.floor -=
                            (1e-3 * self.floor.abs()).max(1e-6) * (1u64 << attempt) as f64;
                        self.zeros.clear();
                        self.covered = 0.0;
                    } else {
                        top += jitter;
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn scan(&self, lo: f64, hi: f64) -> Result<Vec<Zero>> {
        let rect = |a: f64, b: f64| Rectangle::new(self.floor, self.sigma_max, a, b);
        if lo == 0.0 {
            return Ok(find_zeros(&self.f, &rect(-hi, hi), self.tol, &self.spec)?.zeros);
        }
        let mut out = find_zeros(&self.f, &rect(lo, hi), self.tol, &self.spec)?.zeros;
        out.extend(find_zeros(&self.f, &rect(-hi, -lo), self.tol, &self.spec)?.zeros);
        Ok(out)
    }

    /// Zeros in the window with their weight: the multiplicity, halved for zeros
    /// on the horizontal edges `|Im s| = t`. The halving makes every rung exact
    /// for periodic functions sampled over whole periods.
    fn counted(&self, sigma0: f64, t: f64) -> impl Iterator<Item = (&Zero, f64)> {
        let (es, et) = (self.coincidence(sigma0), self.coincidence(t));
        // A zero on Re s = sigma0 is resolved by moving sigma0 right, so it is excluded.
        self.zeros
            .iter()
            .filter(move |z| z.s.re > sigma0 + es && z.s.im.abs() < t + et)
            .map(move |z| {
                let m = z.multiplicity as f64;
                (z, if z.s.im.abs() > t - et { 0.5 * m } else { m })
            })
    }

    /// `sum weight(Re s)` over zeros with `Re s > sigma0`, `|Im s| <= t`, counted
    /// with multiplicity and halved on the horizontal edges.
    /// Requires `extend_to(t)` and `sigma0 >= floor()`.
    pub fn weighted_sum(&self, sigma0: f64, t: f64, weight: impl Fn(f64) -> f64) -> f64 {
        debug_assert!(t <= self.covered);
        self.counted(sigma0, t)
            .map(|(z, m)| m * weight(z.s.re))
            .sum()
    }

    /// Number of zeros in the same window with the same edge convention.
    pub fn count(&self, sigma0: f64, t: f64) -> f64 {
        debug_assert!(t <= self.covered);
        self.counted(sigma0, t).map(|(_, m)| m).sum()
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Weighted,
    Unweighted,
}

fn run_ladder(
    lad: &mut ZeroLadder,
    sigma0: f64,
    ladder: &LadderSpec,
    kind: Kind,
) -> Result<CountingEstimate> {
    let mut est = CountingEstimate::zero(sigma0);
    for t in ladder.t_values() {
        lad.extend_to(t)?;
        let v = match kind {
            Kind::Weighted => PI / t * lad.weighted_sum(sigma0, t, |re| re),
            Kind::Unweighted => lad.count(sigma0, t) / (2.0 * t),
        };
        est.t_ladder.push(t);
        est.per_T_values.push(v);
        est.value = v;
        if lad.series().is_constant() {
            break;
        }
        let n = est.per_T_values.len();
        if n >= 2 {
            est.error_estimate = (v - est.per_T_values[n - 2]).abs();
            if est.error_estimate < ladder.rel_target * v.abs().max(1.0) {
                break;
            }
        }
    }
    est.converged = lad.series().is_constant()
        || est.error_estimate < ladder.rel_target * est.value.abs().max(1.0);
    Ok(est)
}

fn floor_below(sigma0: f64, tol: f64) -> f64 {
    sigma0 - (1e-3 * sigma0).max(10.0 * tol)
}

fn check_level(phi: &SymbolG0, w: C64) -> Result<DirichletPolynomial> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(invalid("w must be finite"));
    }
    if (w - phi.nu()).norm() <= 1e-12 * phi.nu().norm().max(1.0) {
        return Err(Error::WEqualsNu);
    }
    Ok(phi.level(w))
}

/// `(pi/T) sum Re s` over solutions of `phi(s) = w` with `Re s > sigma0`, `|Im s| < T`.
pub fn counting_finite(
    phi: &SymbolG0,
    w: C64,
    sigma0: f64,
    t: f64,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let f = check_level(phi, w)?;
    if !(sigma0 > 0.0) || !(t > 0.0) || !(tol > 0.0) {
        return Err(invalid("sigma0, T and tol must be positive"));
    }
    if f.is_constant() || sigma0 >= zero_free_abscissa(&f) {
        return Ok(0.0);
    }
    let mut lad = ZeroLadder::with_tol(&f, floor_below(sigma0, tol), tol, spec)?;
    lad.extend_to(t)?;
    Ok(PI / t * lad.weighted_sum(sigma0, t, |re| re))
}

/// The counting sum along the height ladder at fixed `sigma0`; never errors on exhaustion.
pub fn counting_ladder(
    f: &DirichletPolynomial,
    sigma0: f64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<CountingEstimate> {
    ladder.validate()?;
    if !(sigma0 > 0.0) {
        return Err(invalid("sigma0 must be positive"));
    }
    let mut lad = ZeroLadder::new(f, floor_below(sigma0, ZERO_TOL), spec)?;
    run_ladder(&mut lad, sigma0, ladder, Kind::Weighted)
}

/// `M_phi(w, sigma0)` as the last converged rung of the height ladder.
pub fn counting_sigma(
    phi: &SymbolG0,
    w: C64,
    sigma0: f64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<CountingEstimate> {
    let f = check_level(phi, w)?;
    counting_ladder(&f, sigma0, ladder, spec)?.require_converged("counting ladder")
}

/// Mean counting function of `f` at `w`, i.e. of the zeros of `f - w`.
///
/// The zero route runs the height ladder at every abscissa of the sigma
/// ladder on one shared zero window. The Jessen route is
/// `J_{f-w}(0) - log|f(+inf) - w|`; `error_estimate` is the larger of the last
/// ladder difference and the gap between the routes.
pub fn mean_counting_series(
    f: &DirichletPolynomial,
    w: C64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<CountingEstimate> {
    ladder.validate()?;
    let g = f - &DirichletPolynomial::constant(w);
    let a1 = g.value_at_infinity();
    if a1.norm() == 0.0 {
        return Err(Error::WEqualsNu);
    }
    let smallest = *ladder.sigma_ladder.last().unwrap();
    if g.is_constant() {
        let mut est = CountingEstimate::zero(smallest);
        est.jessen_route = Some(0.0);
        return Ok(est);
    }
    let mut lad = ZeroLadder::new(&g, floor_below(smallest, ZERO_TOL), spec)?;
    let mut profile = Vec::with_capacity(ladder.sigma_ladder.len());
    let mut last = None;
    for &s0 in &ladder.sigma_ladder {
        let est = run_ladder(&mut lad, s0, ladder, Kind::Weighted)?
            .require_converged("mean counting ladder")?;
        profile.push((s0, est.value, est.error_estimate));
        last = Some(est);
    }
    let mut est = last.unwrap();
    est.sigma_profile = profile;
    let j = jessen_torus(&g, 0.0, usize::MAX, spec)?;
    let route = j.value - a1.norm().ln();
    est.jessen_route = Some(route);
    est.error_estimate = est
        .error_estimate
        .max((route - est.value).abs())
        .max(j.error_estimate);
    Ok(est)
}

/// `M_phi(w)` for a validated symbol, checked against the pointwise bound.
pub fn mean_counting(
    phi: &SymbolG0,
    w: C64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<CountingEstimate> {
    check_level(phi, w)?;
    let est = mean_counting_series(phi.series(), w, ladder, spec)?;
    if w.re > 0.5 {
        let bound = littlewood_bound(w, phi.nu())?.bound;
        if est.value > bound + ladder.bound_tolerance {
            return Err(Error::BoundViolation {
                value: est.value,
                bound,
            });
        }
    }
    Ok(est)
}

/// `Z_f(sigma)`: zeros per unit height with `Re s > sigma`.
pub fn unweighted_counting(
    f: &DirichletPolynomial,
    sigma: f64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<CountingEstimate> {
    ladder.validate()?;
    if !(sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    let mut lad = ZeroLadder::new(f, floor_below(sigma, ZERO_TOL), spec)?;
    run_ladder(&mut lad, sigma, ladder, Kind::Unweighted)?
        .require_converged("unweighted counting ladder")
}

/// The pointwise bound together with its two rational envelopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LittlewoodBound {
    pub bound: f64,
    pub lower_env: f64,
    pub upper_env: f64,
}

/// `log|(conj(w) + nu - 1)/(w - nu)|` for `w, nu` in `Re > 1/2`.
pub fn littlewood_bound(w: C64, nu: C64) -> Result<LittlewoodBound> {
    if !(w.re > 0.5) {
        return Err(Error::Domain {
            what: "w",
            re: w.re,
            im: w.im,
        });
    }
    if !(nu.re > 0.5) {
        return Err(Error::Domain {
            what: "nu",
            re: nu.re,
            im: nu.im,
        });
    }
    if w == nu {
        return Err(Error::WEqualsNu);
    }
    let num = w.conj() + nu - 1.0;
    let den = w - nu;
    let x = 2.0 * (w.re - 0.5) * (nu.re - 0.5);
    // |num|^2 - |den|^2 = 2x, so log|num/den| = log(1 + 2x/|den|^2)/2 without cancellation.
    Ok(LittlewoodBound {
        bound: 0.5 * (2.0 * x / den.norm_sqr()).ln_1p(),
        lower_env: x / num.norm_sqr(),
        upper_env: x / den.norm_sqr(),
    })
}

/// Inverse of the conformal map from the disc onto the half-strip `Re s > 0, |Im s| < 1` fixing `0 -> 1`.
pub fn theta_inverse(s: C64) -> Result<C64> {
    if !(s.re >= 0.0) || !(s.im.abs() <= 1.0) || !s.re.is_finite() {
        return Err(Error::Domain {
            what: "half-strip",
            re: s.re,
            im: s.im,
        });
    }
    let a = (s * (PI / 2.0)).sinh();
    let b = (PI / 2.0).sinh();
    Ok((a - b) / (a + b))
}

/// Largest `pi Re s / log(1/|theta_inverse(s)|)` on an `n x n` grid of
/// `0 < Re s <= 1/2`, `|Im s| <= 1/2`.
pub fn theta_constant_scan(n: usize) -> f64 {
    let n = n.max(2);
    let mut best = 0.0f64;
    for i in 1..=n {
        let x = 0.5 * i as f64 / n as f64;
        for j in 0..=n {
            let y = -0.5 + j as f64 / n as f64;
            let z = theta_inverse(C64::new(x, y)).unwrap();
            best = best.max(PI * x / -z.norm().ln());
        }
    }
    best
}

/// Both orders of the double limit, and their gap.
#[derive(Clone, Debug, PartialEq)]
pub struct InterchangeProbe {
    pub order_a: f64,
    pub order_b: f64,
    pub gap: f64,
}

/// Compares the mean counting value with the height ladder run at an abscissa of `1e-9`.
/// A diagnostic only: for non-periodic symbols nothing forces the gap to vanish.
pub fn limit_interchange_probe(
    phi: &SymbolG0,
    w: C64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<InterchangeProbe> {
    let f = check_level(phi, w)?;
    let a = mean_counting(phi, w, ladder, spec)?.value;
    let eps = 1e-9;
    let b = if f.is_constant() {
        0.0
    } else {
        let mut lad = ZeroLadder::new(&f, 0.5 * eps, spec)?;
        run_ladder(&mut lad, eps, ladder, Kind::Weighted)?
            .require_converged("interchange ladder")?
            .value
    };
    Ok(InterchangeProbe {
        order_a: a,
        order_b: b,
        gap: (a - b).abs(),
    })
}

/// One row of a counting grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingRow {
    pub w: C64,
    pub value: f64,
    pub error_estimate: f64,
    pub bound: f64,
}

impl CountingRow {
    pub fn new(w: C64, est: &CountingEstimate, nu: C64) -> Self {
        let bound = littlewood_bound(w, nu).map(|b| b.bound).unwrap_or(f64::NAN);
        Self {
            w,
            value: est.value,
            error_estimate: est.error_estimate,
            bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::phi_nu;
    use crate::symbol::validate_symbol;
    use core::f64::consts::LN_2;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// `sum log(1/|z|)` over roots of `P(z) = w` with `|z| < r`, where `phi(s) = P(2^-s)`:
    /// the per-period value of the counting sum, found without the zero finder.
    fn one_prime_value(phi: &SymbolG0, w: C64, r: f64) -> f64 {
        let deg = phi.series().max_index().unwrap().trailing_zeros() as usize;
        let mut c = vec![C64::new(0.0, 0.0); deg + 1];
        for (n, a) in phi.series().terms() {
            c[n.trailing_zeros() as usize] = a;
        }
        c[0] -= w;
        let roots = crate::polyroots::roots(&c, None).unwrap();
        roots
            .iter()
            .filter(|z| z.norm() < r)
            .map(|z| -z.norm().ln())
            .sum()
    }

    fn disc_symbol() -> SymbolG0 {
        validate_symbol(
            DirichletPolynomial::from_real(&[(1, 1.5), (2, 0.5)]),
            &spec(),
        )
        .unwrap()
    }

    #[test]
    fn finite_sum_over_one_period() {
        let phi = phi_nu(C64::new(1.0, 0.0), 1u64 << 63, &spec()).unwrap();
        let t = 2.0 * PI / LN_2;
        let v = counting_finite(&phi, C64::new(2.0, 0.0), 0.5, t, 1e-10, &spec()).unwrap();
        let exact = one_prime_value(&phi, C64::new(2.0, 0.0), 0.5f64.sqrt());
        assert!((v - exact).abs() < 1e-9, "{v} {exact}");
        // The damped symbol sits within its truncation error of the extremal value.
        assert!((v - LN_2).abs() < 5e-3);
        let d = disc_symbol();
        for (s0, tt) in [(0.1, 5.0), (0.7, 40.0)] {
            assert_eq!(
                counting_finite(&d, C64::new(3.0, 0.0), s0, tt, 1e-10, &spec()).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn ladder_on_periodic_symbols() {
        let phi = phi_nu(C64::new(1.0, 0.0), 1u64 << 63, &spec()).unwrap();
        let ladder = LadderSpec::for_series(phi.series());
        let e = counting_sigma(&phi, C64::new(2.0, 0.0), 0.5, &ladder, &spec()).unwrap();
        let exact = one_prime_value(&phi, C64::new(2.0, 0.0), 0.5f64.sqrt());
        assert!(e.converged && (e.value - exact).abs() < 1e-9, "{e:?}");
        assert_eq!(e.t_ladder.len(), e.per_T_values.len());

        // Solutions sit exactly on the cut heights; the ladder still converges.
        let d = disc_symbol();
        let e = counting_sigma(&d, C64::new(1.75, 0.0), 0.5, &ladder, &spec()).unwrap();
        assert!((e.value - LN_2).abs() < 2.0 * ladder.rel_target, "{e:?}");
    }

    #[test]
    fn mean_counting_matches_both_routes() {
        let phi = phi_nu(C64::new(1.0, 0.0), 1u64 << 63, &spec()).unwrap();
        let ladder = LadderSpec::for_series(phi.series());
        let w = C64::new(2.0, 0.0);
        let e = mean_counting(&phi, w, &ladder, &spec()).unwrap();
        let exact = one_prime_value(&phi, w, 2f64.powf(-0.0125));
        assert!((e.value - exact).abs() < 1e-9, "{e:?}");
        assert!((e.jessen_route.unwrap() - one_prime_value(&phi, w, 1.0)).abs() < 1e-9);
        assert!((e.value - LN_2).abs() < 5e-3);

        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]);
        let e = mean_counting_series(&f, C64::new(0.0, 0.0), &LadderSpec::for_series(&f), &spec())
            .unwrap();
        assert!((e.value - LN_2).abs() < 2e-3, "{e:?}");
        assert!(e
            .sigma_profile
            .windows(2)
            .all(|p| p[1].1 >= p[0].1 - p[0].2 - p[1].2));

        let c =
            validate_symbol(DirichletPolynomial::constant(C64::new(1.0, 0.0)), &spec()).unwrap();
        let e = mean_counting(&c, C64::new(2.0, 1.0), &ladder, &spec()).unwrap();
        assert_eq!((e.value, e.converged), (0.0, true));
        assert!(matches!(
            mean_counting(&c, C64::new(1.0, 0.0), &ladder, &spec()),
            Err(Error::WEqualsNu)
        ));
    }

    #[test]
    fn unweighted_density() {
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]);
        let ladder = LadderSpec::for_series(&f);
        let e = unweighted_counting(&f, 0.5, &ladder, &spec()).unwrap();
        assert!((e.value - LN_2 / (2.0 * PI)).abs() < 1e-3, "{e:?}");
        assert_eq!(
            unweighted_counting(&f, 1.5, &ladder, &spec())
                .unwrap()
                .value,
            0.0
        );
        let c = DirichletPolynomial::constant(C64::new(2.0, 0.0));
        let e = unweighted_counting(&c, 0.5, &ladder, &spec()).unwrap();
        assert_eq!((e.value, e.per_T_values.len()), (0.0, 1));
    }

    #[test]
    fn bound_and_envelopes() {
        let b = littlewood_bound(C64::new(2.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        assert!((b.bound - LN_2).abs() < 1e-15);
        let b = littlewood_bound(C64::new(1.0, 10.0), C64::new(1.0, 0.0)).unwrap();
        assert!((b.upper_env - 5e-3).abs() < 1e-15);
        assert!(b.lower_env <= b.bound && b.bound <= b.upper_env);
        assert!((b.bound / b.upper_env - 1.0).abs() < 1e-2);
        let near = littlewood_bound(C64::new(1.0 + 1e-8, 0.0), C64::new(1.0, 0.0)).unwrap();
        assert!((near.bound - (1e8f64).ln()).abs() < 1e-6);
        assert!(matches!(
            littlewood_bound(C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
            Err(Error::WEqualsNu)
        ));
        assert!(littlewood_bound(C64::new(0.4, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn theta_inverse_values() {
        assert!(theta_inverse(C64::new(1.0, 0.0)).unwrap().norm() < 1e-16);
        assert!((theta_inverse(C64::new(0.0, 0.0)).unwrap() + 1.0).norm() < 1e-15);
        assert!(theta_inverse(C64::new(-0.1, 0.0)).is_err());
        assert!(theta_inverse(C64::new(0.5, 1.5)).is_err());
        let c = theta_constant_scan(64);
        assert!(c.is_finite() && c > 0.0);
        let z = theta_inverse(C64::new(0.25, 0.0)).unwrap();
        assert!(z.norm() < 1.0 && PI * 0.25 <= c * -z.norm().ln() * (1.0 + 1e-12));
    }

    #[test]
    fn interchange_gap_for_periodic_symbols() {
        let d = disc_symbol();
        let ladder = LadderSpec::for_series(d.series());
        let p = limit_interchange_probe(&d, C64::new(1.75, 0.0), &ladder, &spec()).unwrap();
        assert!(p.gap <= 2.0 * ladder.rel_target, "{p:?}");
        let c =
            validate_symbol(DirichletPolynomial::constant(C64::new(1.0, 0.0)), &spec()).unwrap();
        let p = limit_interchange_probe(&c, C64::new(2.0, 0.0), &ladder, &spec()).unwrap();
        assert_eq!(p.gap, 0.0);
    }
}
