//! Symbols of composition operators: Dirichlet polynomials mapping the right
//! half-plane into `Re w > 1/2`.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::{lattice_points, nelder_mead, QuadratureSpec};
use crate::series::{BohrForm, DirichletPolynomial};

/// Evidence that `min Re P >= 1/2 - tolerance` on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCertificate {
    pub min_real_part_found: f64,
    /// Torus angles of the minimizer.
    pub argmin: Vec<f64>,
    pub tolerance: f64,
    pub node_count: usize,
    /// Set when the grid was replaced by a rank-1 lattice (more than three primes).
    pub lattice: bool,
}

/// A validated symbol with `nu = phi(+inf)`, `Re nu > 1/2`.
#[derive(Clone, Debug)]
pub struct SymbolG0 {
    phi: DirichletPolynomial,
    certificate: ValidationCertificate,
}

impl SymbolG0 {
    pub fn series(&self) -> &DirichletPolynomial {
        &self.phi
    }

    pub fn nu(&self) -> C64 {
        self.phi.value_at_infinity()
    }

    pub fn certificate(&self) -> &ValidationCertificate {
        &self.certificate
    }

    /// `phi - w`, whose zeros are the solutions of `phi(s) = w`.
    pub fn level(&self, w: C64) -> DirichletPolynomial {
        &self.phi - &DirichletPolynomial::constant(w)
    }

    /// Smallest index above 1 in the support; sets the vertical quasi-period.
    pub fn base_index(&self) -> Option<u64> {
        self.phi.terms().map(|(n, _)| n).find(|&n| n > 1)
    }
}

/// Which part of `P` on the torus to extremize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    MinRe,
    MaxRe,
    MinIm,
    MaxIm,
}

fn torus_point(theta: &[f64]) -> Vec<C64> {
    theta.iter().map(|&t| C64::from_polar(1.0, t)).collect()
}

/// Extremum of `Re P` or `Im P` over the torus by grid (lattice for more than three
/// variables) plus Nelder-Mead refinement. Returns `(value, argmin, node_count, lattice)`.
pub fn torus_extremum(
    form: &BohrForm,
    which: Extremum,
    spec: &QuadratureSpec,
) -> (f64, Vec<f64>, usize, bool) {
    let m = form.dim();
    let objective = |theta: &[f64]| -> f64 {
        let v = form.eval_torus(&torus_point(theta));
        match which {
            Extremum::MinRe => v.re,
            Extremum::MaxRe => -v.re,
            Extremum::MinIm => v.im,
            Extremum::MaxIm => -v.im,
        }
    };
    let sign = if matches!(which, Extremum::MinRe | Extremum::MinIm) {
        1.0
    } else {
        -1.0
    };
    if m == 0 {
        return (sign * objective(&[]), Vec::new(), 1, false);
    }
    let lattice = m > 3;
    let per_dim = if lattice {
        0
    } else {
        let p = (spec.validation_points as f64).powf(1.0 / m as f64).ceil() as usize;
        p.max(spec.validation_min_per_dim)
    };
    let points: Vec<Vec<f64>> = if lattice {
        lattice_points(1 << 18, m)
            .into_iter()
            .map(|x| x.iter().map(|u| 2.0 * PI * u).collect())
            .collect()
    } else {
        let total = per_dim.pow(m as u32);
        (0..total)
            .map(|mut i| {
                let mut th = vec![0.0; m];
                for t in th.iter_mut() {
                    *t = 2.0 * PI * (i % per_dim) as f64 / per_dim as f64;
                    i /= per_dim;
                }
                th
            })
            .collect()
    };
    let nodes = points.len();
    let mut scored: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (objective(p), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let step = if lattice {
        2.0 * PI / (nodes as f64).powf(1.0 / m as f64)
    } else {
        2.0 * PI / per_dim as f64
    };
    let mut starts: Vec<Vec<f64>> = scored
        .iter()
        .take(8)
        .map(|&(_, i)| points[i].clone())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..4 {
        starts.push(
            (0..m)
                .map(|_| 2.0 * PI * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
                .collect(),
        );
    }
    let mut best = (scored[0].0, points[scored[0].1].clone());
    for s in starts {
        let (x, v) = nelder_mead(objective, &s, step, 1e-15, 400 * m);
        if v < best.0 {
            best = (v, x);
        }
    }
    let argmin = best
        .1
        .iter()
        .map(|t| t - 2.0 * PI * (t / (2.0 * PI)).floor())
        .collect();
    (sign * best.0, argmin, nodes, lattice)
}

/// Accepts `phi` when `Re nu > 1/2` and `min Re P >= 1/2 - validation_tol` on the torus.
pub fn validate_symbol(phi: DirichletPolynomial, spec: &QuadratureSpec) -> Result<SymbolG0> {
    let nu = phi.value_at_infinity();
    if nu.re <= 0.5 {
        return Err(Error::RejectedMean { re_nu: nu.re });
    }
    let (min, argmin, node_count, lattice) = torus_extremum(&phi.bohr(), Extremum::MinRe, spec);
    if min < 0.5 - spec.validation_tol {
        return Err(Error::RejectedRange {
            min_real_part: min,
            tolerance: spec.validation_tol,
        });
    }
    Ok(SymbolG0 {
        phi,
        certificate: ValidationCertificate {
            min_real_part_found: min,
            argmin,
            tolerance: spec.validation_tol,
            node_count,
            lattice,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_contained_image() {
        let phi = DirichletPolynomial::from_real(&[(1, 1.5), (2, 0.5)]);
        let s = validate_symbol(phi, &QuadratureSpec::default()).unwrap();
        assert!((s.certificate().min_real_part_found - 1.0).abs() < 1e-9);
        assert_eq!(s.certificate().node_count, 4096);
    }

    #[test]
    fn rejects_range_and_mean() {
        let spec = QuadratureSpec::default();
        let phi = DirichletPolynomial::from_real(&[(1, 1.0), (2, 0.6)]);
        match validate_symbol(phi, &spec) {
            Err(Error::RejectedRange { min_real_part, .. }) => {
                assert!((min_real_part - 0.4).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
        let phi = DirichletPolynomial::from_real(&[(1, 0.5), (2, 0.1)]);
        assert!(matches!(
            validate_symbol(phi, &spec),
            Err(Error::RejectedMean { .. })
        ));
    }

    #[test]
    fn three_variables_grid_size() {
        let phi = DirichletPolynomial::from_real(&[(1, 2.0), (2, 0.3), (3, 0.3), (5, 0.3)]);
        let s = validate_symbol(phi, &QuadratureSpec::default()).unwrap();
        assert_eq!(s.certificate().node_count, 64 * 64 * 64);
        assert!((s.certificate().min_real_part_found - 1.1).abs() < 1e-8);
    }
}
