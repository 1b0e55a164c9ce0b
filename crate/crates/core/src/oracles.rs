//! Closed-form reference cases. Nothing here calls the numerical pipelines.
//!
//! The extremal symbol is `psi_nu(2^{-s})` with the Moebius map
//! `psi_nu(z) = nu + (1 - 2 Re nu) z / (1 + z)`, which sends the unit disc onto
//! `Re w > 1/2` with `psi_nu(0) = nu`.
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::series::DirichletPolynomial;
use crate::symbol::{validate_symbol, SymbolG0};

/// Closed-form evaluator of a named quantity; parameters are real scalars
/// (`[sigma]` or `[w_re, w_im]`).
pub type Evaluator = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub struct OracleCase {
    pub name: String,
    pub series: DirichletPolynomial,
    pub exact: BTreeMap<&'static str, Evaluator>,
}

impl core::fmt::Debug for OracleCase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("OracleCase")
            .field("name", &self.name)
            .field("series", &self.series)
            .field("quantities", &self.exact.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn degree_for(cutoff: u64) -> u32 {
    63 - cutoff.max(1).leading_zeros()
}

/// Fejer-Korovkin weights `kappa_0 = 1, .., kappa_K`; the kernel
/// `1 + 2 sum kappa_k cos(k x)` is non-negative.
pub fn fejer_korovkin(k_max: u32) -> Vec<f64> {
    let n = (k_max + 2) as f64;
    let cot = 1.0 / (PI / n).tan();
    (0..=k_max)
        .map(|k| {
            let x = PI * k as f64 / n;
            ((n - k as f64) * x.cos() + x.sin() * cot) / n
        })
        .collect()
}

/// Undamped expansion of `psi_nu(2^{-s})` keeping `2^k <= cutoff`.
pub fn phi_nu_truncated(nu: C64, cutoff: u64) -> DirichletPolynomial {
    let a = 2.0 * nu.re - 1.0;
    DirichletPolynomial::from_terms(
        core::iter::once((1, nu)).chain(
            (1..=degree_for(cutoff))
                .map(|k| (1u64 << k, C64::new(if k % 2 == 0 { a } else { -a }, 0.0))),
        ),
    )
}

/// Fejer-Korovkin damped expansion: `Re = 1/2 + (Re nu - 1/2) F(theta - pi) >= 1/2` on the circle.
pub fn phi_nu_series(nu: C64, cutoff: u64) -> DirichletPolynomial {
    let k_max = degree_for(cutoff);
    let kappa = fejer_korovkin(k_max);
    let a = 2.0 * nu.re - 1.0;
    DirichletPolynomial::from_terms(core::iter::once((1, nu)).chain((1..=k_max).map(|k| {
        let c = a * kappa[k as usize];
        (1u64 << k, C64::new(if k % 2 == 0 { c } else { -c }, 0.0))
    })))
}

/// The validated damped symbol of degree `floor(log2 cutoff)`.
pub fn phi_nu(nu: C64, cutoff: u64, spec: &QuadratureSpec) -> Result<SymbolG0> {
    if nu.re <= 0.5 {
        return Err(Error::RejectedMean { re_nu: nu.re });
    }
    if cutoff < 2 {
        return Err(crate::error::invalid("cutoff must be at least 2"));
    }
    validate_symbol(phi_nu_series(nu, cutoff), spec)
}

/// `psi_nu(z)`.
pub fn psi_nu(nu: C64, z: C64) -> C64 {
    nu + (1.0 - 2.0 * nu.re) * z / (1.0 + z)
}

/// `psi_nu^{-1}(w) = (w - nu) / (1 - conj(nu) - w)`.
pub fn psi_nu_inverse(nu: C64, w: C64) -> C64 {
    (w - nu) / (1.0 - nu.conj() - w)
}

/// Exact `phi_nu(s) = psi_nu(2^{-s})`.
pub fn phi_nu_exact(nu: C64, s: C64) -> C64 {
    psi_nu(nu, (-s * LN_2).exp())
}

/// Bound on `|phi_nu_truncated - phi_nu_exact|` on `Re s >= sigma > 0`.
pub fn phi_nu_truncation_bound(nu: C64, cutoff: u64, sigma: f64) -> f64 {
    let r = 2f64.powf(-sigma);
    (2.0 * nu.re - 1.0).abs() * r.powi(degree_for(cutoff) as i32 + 1) / (1.0 - r)
}

/// `log|(conj(w) + nu - 1)/(w - nu)|`, the mean counting function of `phi_nu`.
pub fn phi_nu_counting(nu: C64, w: C64) -> Result<f64> {
    if w == nu {
        return Err(Error::WEqualsNu);
    }
    if w.re <= 0.5 || nu.re <= 0.5 {
        return Err(Error::Domain {
            what: "phi_nu_counting",
            re: w.re,
            im: w.im,
        });
    }
    Ok(((w.conj() + nu - 1.0).norm() / (w - nu).norm()).ln())
}

/// `||f o phi_nu||^2` for the exact symbol: the boundary values of `Im phi_nu` are
/// Cauchy distributed with centre `Im nu` and scale `Re nu - 1/2`.
pub fn phi_nu_composition_norm_sq(nu: C64, f: &DirichletPolynomial) -> f64 {
    let scale = nu.re - 0.5;
    let mut total = 0.0;
    for (m, am) in f.terms() {
        for (n, an) in f.terms() {
            let u = (n as f64 / m as f64).ln();
            let ch = C64::from_polar((-scale * u.abs()).exp(), u * nu.im);
            total += (am * an.conj() * ch).re / ((m as f64) * (n as f64)).sqrt();
        }
    }
    total
}

/// `log(1/|psi^{-1}(w)|)` for a univalent `psi` on the disc; `None` means `w` is
/// outside the image. Returns `+inf` at `w = psi(0)`.
pub fn univalent_periodic_counting(
    psi_inverse: &dyn Fn(C64) -> Option<C64>,
    w: C64,
) -> Result<f64> {
    match psi_inverse(w) {
        Some(z) if z.norm() < 1.0 => Ok(if z.norm() == 0.0 {
            f64::INFINITY
        } else {
            -z.norm().ln()
        }),
        _ => Err(Error::Domain {
            what: "univalent_periodic_counting",
            re: w.re,
            im: w.im,
        }),
    }
}

/// `f = 1 - 2 * 2^{-s}`: zeros `1 + 2 pi i k / log 2`, Jessen function `(1 - sigma)^+ log 2`.
pub fn geometric_lattice_case() -> OracleCase {
    let mut exact: BTreeMap<&'static str, Evaluator> = BTreeMap::new();
    exact.insert("jessen", Box::new(|p: &[f64]| (1.0 - p[0]).max(0.0) * LN_2));
    exact.insert(
        "unweighted_counting",
        Box::new(|p: &[f64]| if p[0] < 1.0 { LN_2 / (2.0 * PI) } else { 0.0 }),
    );
    exact.insert(
        "mean_counting",
        Box::new(|p: &[f64]| {
            if p[0] == 0.0 && p[1] == 0.0 {
                LN_2
            } else {
                f64::NAN
            }
        }),
    );
    exact.insert("zero_im", Box::new(|p: &[f64]| 2.0 * PI * p[0] / LN_2));
    exact.insert("zero_re", Box::new(|_: &[f64]| 1.0));
    OracleCase {
        name: String::from("geometric_lattice"),
        series: DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]),
        exact,
    }
}

/// `phi_nu` oracle with damped series of degree 63.
pub fn phi_nu_case(nu: C64) -> OracleCase {
    let mut exact: BTreeMap<&'static str, Evaluator> = BTreeMap::new();
    exact.insert(
        "mean_counting",
        Box::new(move |p: &[f64]| phi_nu_counting(nu, C64::new(p[0], p[1])).unwrap_or(f64::NAN)),
    );
    exact.insert(
        "symbol_re",
        Box::new(move |p: &[f64]| phi_nu_exact(nu, C64::new(p[0], p[1])).re),
    );
    exact.insert(
        "symbol_im",
        Box::new(move |p: &[f64]| phi_nu_exact(nu, C64::new(p[0], p[1])).im),
    );
    let name = alloc::format!("phi_nu({}{:+}i)", nu.re, nu.im);
    OracleCase {
        name,
        series: phi_nu_series(nu, 1 << 63),
        exact,
    }
}

/// `phi = 3/2 + 2^{-s}/2`, whose image is the disc `|w - 3/2| < 1/2`.
pub fn contained_disc_case() -> OracleCase {
    let mut exact: BTreeMap<&'static str, Evaluator> = BTreeMap::new();
    exact.insert(
        "mean_counting",
        Box::new(|p: &[f64]| {
            univalent_periodic_counting(&|w: C64| Some(2.0 * w - 3.0), C64::new(p[0], p[1]))
                .unwrap_or(0.0)
        }),
    );
    OracleCase {
        name: String::from("contained_disc"),
        series: DirichletPolynomial::from_real(&[(1, 1.5), (2, 0.5)]),
        exact,
    }
}

/// Constant symbol `phi = nu`: no solutions, so the counting function vanishes.
pub fn constant_case(nu: C64) -> OracleCase {
    let mut exact: BTreeMap<&'static str, Evaluator> = BTreeMap::new();
    exact.insert("mean_counting", Box::new(|_: &[f64]| 0.0));
    let name = alloc::format!("constant({}{:+}i)", nu.re, nu.im);
    OracleCase {
        name,
        series: DirichletPolynomial::constant(nu),
        exact,
    }
}

/// Every oracle case, in a fixed order.
pub fn battery() -> Vec<OracleCase> {
    alloc::vec![
        geometric_lattice_case(),
        phi_nu_case(C64::new(1.0, 0.0)),
        phi_nu_case(C64::new(1.3, 0.7)),
        contained_disc_case(),
        constant_case(C64::new(2.0, 0.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_expansion_of_phi_one() {
        let p = phi_nu_truncated(C64::new(1.0, 0.0), 8);
        assert_eq!(
            p,
            DirichletPolynomial::from_real(&[(1, 1.0), (2, -1.0), (4, 1.0), (8, -1.0)])
        );
        let s = C64::new(2.0, 0.0);
        let long = phi_nu_truncated(C64::new(1.0, 0.0), 1 << 63);
        assert!((long.eval(s).re - 0.8).abs() < 1e-10);
        assert!(
            (phi_nu_exact(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).re - 2.0 / 3.0).abs() < 1e-15
        );
    }

    #[test]
    fn damped_symbol_is_valid() {
        for nu in [C64::new(1.0, 0.0), C64::new(1.3, 0.7)] {
            let s = phi_nu(nu, 1 << 63, &QuadratureSpec::default()).unwrap();
            assert_eq!(s.nu(), nu);
            assert!(s.certificate().min_real_part_found >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn counting_values() {
        let one = C64::new(1.0, 0.0);
        assert!((phi_nu_counting(one, C64::new(2.0, 0.0)).unwrap() - LN_2).abs() < 1e-15);
        assert!(
            (phi_nu_counting(one, C64::new(1.0, 1.0)).unwrap() - 2f64.sqrt().ln()).abs() < 1e-15
        );
        assert!(phi_nu_counting(one, one).is_err());
        // The inverse Moebius map gives the same value.
        let nu = C64::new(1.3, 0.7);
        let w = C64::new(0.9, -1.1);
        let z = psi_nu_inverse(nu, w);
        assert!((psi_nu(nu, z) - w).norm() < 1e-14);
        assert!((-z.norm().ln() - phi_nu_counting(nu, w).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn composition_norm_of_two_power() {
        // |2^{-phi}|^2 = 2^{-1} on the boundary, so the norm is 1/2 for every nu.
        let f = DirichletPolynomial::from_real(&[(2, 1.0)]);
        assert!((phi_nu_composition_norm_sq(C64::new(1.3, 0.7), &f) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn univalent_case() {
        let inv = |w: C64| Some(psi_nu_inverse(C64::new(1.0, 0.0), w));
        assert!(
            (univalent_periodic_counting(&inv, C64::new(2.0, 0.0)).unwrap() - LN_2).abs() < 1e-15
        );
        assert_eq!(
            univalent_periodic_counting(&inv, C64::new(1.0, 0.0)).unwrap(),
            f64::INFINITY
        );
        let disc = contained_disc_case();
        assert!((disc.exact["mean_counting"](&[1.75, 0.0]) - LN_2).abs() < 1e-15);
    }
}
