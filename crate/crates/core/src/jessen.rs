//! Jessen functions `J_f(sigma)`, the vertical mean of `log|f(sigma + it)|`.
//!
//! Torus route: the innermost circle is integrated exactly by Jensen's formula
//! from the roots of the one-variable restriction; the remaining circles use
//! nested trapezoid grids (up to two circles) or rank-1 lattices, doubled until
//! stable. Time-average route: panels along the line with nearby zeros factored
//! out and integrated in closed form.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::counting::{LadderSpec, ZeroLadder};
use crate::error::{invalid, Error, Result};
use crate::polyroots::{mahler_log, RootTracker};
use crate::quad::{integrate, lattice_points, QuadratureSpec};
use crate::series::{BohrForm, DirichletPolynomial};
use crate::zeros::{find_zeros, quasi_period, Rectangle, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    TimeAverage,
    Torus,
    Reconciled,
}

/// A Jessen value with its provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JessenValue {
    pub value: f64,
    pub error_estimate: f64,
    pub route: Route,
    /// `|time average - torus|` when both routes ran.
    pub route_gap: Option<f64>,
}

/// Torus mean with refinement diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusMean {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// `J` on a grid of abscissae with convexity diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct JessenProfile {
    pub sigmas: Vec<f64>,
    pub values: Vec<f64>,
    pub route: Route,
    /// Scaled so that on a uniform grid they are plain second differences.
    pub second_differences: Vec<f64>,
    pub first_differences: Vec<f64>,
    pub p_mean: Option<PMeanProfile>,
}

/// `A_p(sigma) = mean over the torus of |F(p_j^{-sigma} z_j)|^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PMeanProfile {
    pub p: f64,
    pub values: Vec<f64>,
    pub log_second_differences: Vec<f64>,
}

/// Second differences adapted to non-uniform grids.
pub fn second_differences(x: &[f64], v: &[f64]) -> Vec<f64> {
    (1..x.len().saturating_sub(1))
        .map(|i| {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            (h0 * (v[i + 1] - v[i]) - h1 * (v[i] - v[i - 1])) / (0.5 * (h0 + h1))
        })
        .collect()
}

/// Reusable torus integrator for `log|P(r_1 z_1, .., r_m z_m) - shift|`.
#[derive(Clone, Debug)]
pub struct TorusJessen {
    form: BohrForm,
    constant: C64,
    inner: usize,
    spec: QuadratureSpec,
}

impl TorusJessen {
    pub fn new(f: &DirichletPolynomial, spec: &QuadratureSpec) -> Self {
        let form = f.bohr();
        let inner = (0..form.dim())
            .max_by_key(|&j| (form.degrees()[j], core::cmp::Reverse(j)))
            .unwrap_or(0);
        Self {
            constant: f.value_at_infinity(),
            form,
            inner,
            spec: spec.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// Mean over the torus of `log|f_chi(sigma) - shift|`.
    pub fn mean(&self, sigma: f64, shift: C64) -> Result<TorusMean> {
        if !(sigma >= 0.0) {
            return Err(invalid("torus route needs sigma >= 0"));
        }
        let m = self.form.dim();
        if m == 0 {
            let c = self.constant - shift;
            if c.norm() == 0.0 {
                return Err(invalid("log of the zero function"));
            }
            return Ok(TorusMean {
                value: c.norm().ln(),
                error_estimate: 0.0,
                nodes: 1,
            });
        }
        let radii: Vec<f64> = self
            .form
            .log_primes()
            .iter()
            .map(|l| (-sigma * l).exp())
            .collect();
        let outer: Vec<usize> = (0..m).filter(|&j| j != self.inner).collect();
        let mut tracker = RootTracker::default();
        let mut coeffs = Vec::new();
        let mut z = vec![C64::new(1.0, 0.0); m];
        let mut inner_mean = |angles: &[f64]| -> Result<f64> {
            for (k, &j) in outer.iter().enumerate() {
                z[j] = C64::from_polar(radii[j], angles[k]);
            }
            self.form.univariate(self.inner, &z, &mut coeffs);
            coeffs[0] -= shift;
            // Rescale z_inner -> r z_inner so Jensen's formula is taken on the unit circle.
            let r = radii[self.inner];
            let mut rk = 1.0;
            for c in coeffs.iter_mut() {
                *c *= rk;
                rk *= r;
            }
            if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
                return Ok(f64::NEG_INFINITY);
            }
            let roots = tracker.roots(&coeffs)?;
            Ok(mahler_log(&coeffs, roots, 1.0))
        };
        let d = outer.len();
        if d == 0 {
            let v = inner_mean(&[])?;
            return Ok(TorusMean {
                value: v,
                error_estimate: 0.0,
                nodes: 1,
            });
        }
        let mut n = self.spec.torus_nodes.max(4);
        let mut prev: Option<f64> = None;
        let mut sum1 = 0.0; // running sum for the nested one-dimensional grid
        let mut have = 0usize;
        loop {
            let total = n.pow(d as u32);
            let value = if d == 1 {
                // Nested grids: only odd nodes are new after doubling.
                let step = if have == 0 { 1 } else { 2 };
                let start = if have == 0 { 0 } else { 1 };
                let mut i = start;
                while i < n {
                    sum1 += inner_mean(&[2.0 * PI * i as f64 / n as f64])?;
                    i += step;
                }
                have = n;
                sum1 / n as f64
            } else if d == 2 {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += inner_mean(&[
                            2.0 * PI * i as f64 / n as f64,
                            2.0 * PI * j as f64 / n as f64,
                        ])?;
                    }
                }
                s / total as f64
            } else {
                let pts = lattice_points(total, d);
                let mut s = 0.0;
                let mut th = vec![0.0; d];
                for p in &pts {
                    for k in 0..d {
                        th[k] = 2.0 * PI * p[k];
                    }
                    s += inner_mean(&th)?;
                }
                s / total as f64
            };
            if !value.is_finite() {
                return Err(Error::NonConverged {
                    context: "torus mean",
                    value,
                    error_estimate: f64::INFINITY,
                });
            }
            if let Some(p) = prev {
                let err = (value - p).abs();
                let next_total = (2 * n).pow(d as u32);
                if err <= self.spec.torus_tol || next_total > self.spec.max_torus_points {
                    if err > self.spec.torus_accept {
                        return Err(Error::NonConverged {
                            context: "torus mean",
                            value,
                            error_estimate: err,
                        });
                    }
                    return Ok(TorusMean {
                        value,
                        error_estimate: err,
                        nodes: total,
                    });
                }
            }
            prev = Some(value);
            n *= 2;
        }
    }
}

/// `J_f(sigma)` by integration over the torus of the primes supporting `f`.
/// `max_primes` guards the dimension of the integral.
pub fn jessen_torus(
    f: &DirichletPolynomial,
    sigma: f64,
    max_primes: usize,
    spec: &QuadratureSpec,
) -> Result<TorusMean> {
    if f.is_zero() {
        return Err(invalid("log of the zero function"));
    }
    let t = TorusJessen::new(f, spec);
    if t.dim() > max_primes {
        return Err(invalid("series needs more primes than allowed"));
    }
    t.mean(sigma, C64::new(0.0, 0.0))
}

/// `(1/2T) int_{-T}^{T} log|f(sigma + it)| dt`, with error estimate.
pub fn jessen_time_average(
    f: &DirichletPolynomial,
    sigma: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<TorusMean> {
    if f.is_zero() {
        return Err(invalid("log of the zero function"));
    }
    if !(t > 0.0) {
        return Err(invalid("T must be positive"));
    }
    if f.is_constant() {
        return Ok(TorusMean {
            value: f.value_at_infinity().norm().ln(),
            error_estimate: 0.0,
            nodes: 0,
        });
    }
    let form = f.bohr();
    let panel = (PI / 2.0 / f.max_log_index()).min(2.0 * t);
    let mut rho = panel.max(spec.singular_radius);
    let mut attempt = 0;
    let zeros = loop {
        let r = Rectangle::new(sigma - rho, sigma + rho, -t - rho, t + rho);
        match find_zeros(f, &r, 1e-12, spec) {
            Ok(z) => break z.zeros,
            Err(Error::BoundaryZero { .. }) if attempt < 8 => rho *= 1.1,
            Err(e) => return Err(e),
        }
        attempt += 1;
    };
    let n_panels = (2.0 * t / panel).ceil() as usize;
    let h = 2.0 * t / n_panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo_idx = 0;
    for k in 0..n_panels {
        let a = -t + h * k as f64;
        let b = if k + 1 == n_panels { t } else { a + h };
        while lo_idx < zeros.len() && zeros[lo_idx].s.im < a - rho {
            lo_idx += 1;
        }
        let near: Vec<Zero> = zeros[lo_idx..]
            .iter()
            .take_while(|z| z.s.im <= b + rho)
            .copied()
            .collect();
        let smooth = |x: f64| {
            let s = C64::new(sigma, x);
            let mut v = form.eval(s).norm().ln();
            for z in &near {
                v -= z.multiplicity as f64 * (s - z.s).norm().ln();
            }
            v
        };
        let r = integrate(smooth, a, b, spec.abs_tol * h, spec.rel_tol, 200)?;
        total += r.value;
        err += r.error;
        for z in &near {
            total += z.multiplicity as f64 * log_distance_integral(z.s.im, sigma - z.s.re, a, b);
        }
    }
    Ok(TorusMean {
        value: total / (2.0 * t),
        error_estimate: err / (2.0 * t),
        nodes: n_panels,
    })
}

/// `int_a^b log sqrt((t - y)^2 + eta^2) dt`.
fn log_distance_integral(y: f64, eta: f64, a: f64, b: f64) -> f64 {
    let prim = |u: f64| -> f64 {
        if eta == 0.0 {
            if u == 0.0 {
                0.0
            } else {
                u * u.abs().ln() - u
            }
        } else {
            0.5 * u * (u * u + eta * eta).ln() - u + eta * (u / eta).atan()
        }
    };
    prim(b - y) - prim(a - y)
}

/// Both routes; returns the torus value and fails on a route mismatch.
pub fn jessen(f: &DirichletPolynomial, sigma: f64, spec: &QuadratureSpec) -> Result<JessenValue> {
    if !(sigma > 0.0) {
        return Err(invalid("jessen needs sigma > 0"));
    }
    let torus = jessen_torus(f, sigma, usize::MAX, spec)?;
    if f.is_constant() {
        return Ok(JessenValue {
            value: torus.value,
            error_estimate: 0.0,
            route: Route::Reconciled,
            route_gap: Some(0.0),
        });
    }
    let primes = f.support_primes();
    let period = 2.0 * PI / (primes[0] as f64).ln();
    let t = 8.0 * period;
    let mut time = jessen_time_average(f, sigma, t, spec)?;
    if primes.len() > 1 {
        // Quasi-periodic: the horizon itself contributes an O(1/T) error.
        let half = jessen_time_average(f, sigma, 0.5 * t, spec)?;
        time.error_estimate += (time.value - half.value).abs();
    }
    let gap = (time.value - torus.value).abs();
    if gap > 10.0 * (time.error_estimate + torus.error_estimate) + 1e-8 {
        return Err(Error::RouteMismatch {
            time_average: time.value,
            torus: torus.value,
        });
    }
    Ok(JessenValue {
        value: torus.value,
        error_estimate: torus.error_estimate,
        route: Route::Reconciled,
        route_gap: Some(gap),
    })
}

/// `|(pi/T) sum (Re s - sigma0) - (J_f(sigma0) - log|f(+inf)|)|` at the top rung of the ladder,
/// after nudging `sigma0` off zeros. Returns `(residual, sigma0 used)`.
pub fn littlewood_lemma_residual(
    f: &DirichletPolynomial,
    sigma0: f64,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let a1 = f.value_at_infinity();
    if a1.norm() == 0.0 {
        return Err(invalid("Littlewood lemma needs f(+inf) != 0"));
    }
    if f.is_constant() {
        return Ok((0.0, sigma0));
    }
    let mut lad = ZeroLadder::new(f, sigma0 * 0.5, spec)?;
    let t_top = ladder.t_values().last().copied().unwrap();
    lad.extend_to(t_top)?;
    // Nudge sigma0 away from zeros lying on (or extremely near) the line.
    let mut s0 = sigma0;
    while lad.zeros().iter().any(|z| (z.s.re - s0).abs() < 1e-6) {
        s0 += 1e-4;
    }
    let lhs = lad.weighted_sum(s0, t_top, |re| re - s0) * PI / t_top;
    let j = jessen_torus(f, s0, usize::MAX, spec)?;
    Ok(((lhs - (j.value - a1.norm().ln())).abs(), s0))
}

/// `A_p(sigma)` by torus quadrature; exact from coefficients when `p = 2`.
pub fn p_mean(f: &DirichletPolynomial, p: f64, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    if p == 2.0 {
        return Ok(f
            .terms()
            .map(|(n, a)| a.norm_sqr() * (n as f64).powf(-2.0 * sigma))
            .sum());
    }
    let form = f.shift(sigma).bohr();
    let m = form.dim();
    if m == 0 {
        return Ok(f.value_at_infinity().norm().powf(p));
    }
    let mut n = spec.torus_nodes.max(8);
    let mut prev: Option<f64> = None;
    loop {
        let total = if m <= 3 { n.pow(m as u32) } else { n * n };
        let pts: Vec<Vec<f64>> = if m <= 3 {
            (0..total)
                .map(|mut i| {
                    (0..m)
                        .map(|_| {
                            let v = (i % n) as f64 / n as f64;
                            i /= n;
                            v
                        })
                        .collect()
                })
                .collect()
        } else {
            lattice_points(total, m)
        };
        let v = pts
            .iter()
            .map(|x| {
                let z: Vec<C64> = x
                    .iter()
                    .map(|u| C64::from_polar(1.0, 2.0 * PI * u))
                    .collect();
                form.eval_torus(&z).norm().powf(p)
            })
            .sum::<f64>()
            / total as f64;
        if let Some(q) = prev {
            let err = (v - q).abs();
            if err <= spec.torus_tol * v.max(1.0) {
                return Ok(v);
            }
            if 2 * total > spec.max_torus_points {
                if err > spec.torus_accept * v.max(1.0) {
                    return Err(Error::NonConverged {
                        context: "p-mean",
                        value: v,
                        error_estimate: err,
                    });
                }
                return Ok(v);
            }
        }
        prev = Some(v);
        n *= 2;
    }
}

/// Torus-route Jessen profile with convexity diagnostics and an optional `A_p` profile.
pub fn convexity_profile(
    f: &DirichletPolynomial,
    sigmas: &[f64],
    p: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<JessenProfile> {
    if sigmas.windows(2).any(|w| w[1] <= w[0]) || sigmas.first().is_some_and(|&s| s < 0.0) {
        return Err(invalid("sigmas must be increasing and non-negative"));
    }
    if f.is_zero() {
        return Err(invalid("log of the zero function"));
    }
    let t = TorusJessen::new(f, spec);
    let values = sigmas
        .iter()
        .map(|&s| t.mean(s, C64::new(0.0, 0.0)).map(|m| m.value))
        .collect::<Result<Vec<_>>>()?;
    let p_mean = match p {
        Some(p) => {
            let vals = sigmas
                .iter()
                .map(|&s| p_mean(f, p, s, spec))
                .collect::<Result<Vec<_>>>()?;
            let logs: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
            Some(PMeanProfile {
                p,
                log_second_differences: second_differences(sigmas, &logs),
                values: vals,
            })
        }
        None => None,
    };
    Ok(JessenProfile {
        second_differences: second_differences(sigmas, &values),
        first_differences: values.windows(2).map(|w| w[1] - w[0]).collect(),
        sigmas: sigmas.to_vec(),
        values,
        route: Route::Torus,
        p_mean,
    })
}

/// Default time-average horizon: eight vertical quasi-periods.
pub fn default_horizon(f: &DirichletPolynomial) -> f64 {
    8.0 * quasi_period(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    fn lattice() -> DirichletPolynomial {
        DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)])
    }

    #[test]
    fn torus_values_of_lattice_series() {
        let spec = QuadratureSpec::default();
        for (s, want) in [(0.0, LN_2), (0.5, 0.5 * LN_2), (2.0, 0.0)] {
            assert!((jessen_torus(&lattice(), s, 1, &spec).unwrap().value - want).abs() < 1e-14);
        }
        let c = DirichletPolynomial::constant(C64::new(0.0, 3.0));
        assert!((jessen_torus(&c, 0.3, 0, &spec).unwrap().value - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn time_average_over_a_period() {
        let spec = QuadratureSpec::default();
        let p = 2.0 * PI / LN_2;
        let v = jessen_time_average(&lattice(), 0.5, p, &spec).unwrap();
        assert!((v.value - 0.5 * LN_2).abs() < 1e-9, "{v:?}");
        let v = jessen_time_average(&lattice(), 2.0, p, &spec).unwrap();
        assert!(v.value.abs() < 1e-9);
        // A zero on the line of integration.
        let v = jessen_time_average(&lattice(), 1.0, p, &spec).unwrap();
        assert!(v.value.abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn routes_agree_for_two_primes() {
        let spec = QuadratureSpec::default();
        let f = lattice().multiply(&DirichletPolynomial::from_real(&[(1, 1.0), (3, -3.0)]), 100);
        let j = jessen(&f, 0.5, &spec).unwrap();
        assert!((j.value - 0.5 * (LN_2 + 3f64.ln())).abs() < 1e-8, "{j:?}");
        assert!(j.route_gap.unwrap() < 1e-2);
        let j = jessen(&lattice(), 0.25, &spec).unwrap();
        assert!((j.value - 0.75 * LN_2).abs() < 1e-12 && j.route_gap.unwrap() < 1e-3);
    }

    #[test]
    fn profile_of_lattice_series() {
        let spec = QuadratureSpec::default();
        let sig = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5];
        let prof = convexity_profile(&lattice(), &sig, Some(2.0), &spec).unwrap();
        for (s, v) in sig.iter().zip(&prof.values) {
            assert!((v - (1.0 - s).max(0.0) * LN_2).abs() < 1e-13);
        }
        assert!(prof.second_differences.iter().all(|&d| d >= -1e-12));
        let pm = prof.p_mean.unwrap();
        assert!((pm.values[1] - (1.0 + 4.0 * 4f64.powf(-0.25))).abs() < 1e-14);
    }
}
