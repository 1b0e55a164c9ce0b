//! Roots of complex polynomials by simultaneous Aberth-Ehrlich iteration.
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::{Error, Result};

/// `p(z) / p'(z)` for ascending coefficients, evaluated through the reversed
/// polynomial when `|z| > 1` to avoid overflow. The flag reports `|p(z)|` at
/// the level of Horner rounding, where further steps are noise.
fn newton_ratio(c: &[C64], z: C64) -> (C64, bool) {
    let d = c.len() - 1;
    let noise = 4.0 * (d + 1) as f64 * f64::EPSILON;
    if z.norm_sqr() <= 1.0 {
        let r = z.norm();
        let mut p = c[d];
        let mut dp = C64::new(0.0, 0.0);
        let mut bound = c[d].norm();
        for k in (0..d).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
            bound = bound * r + c[k].norm();
        }
        (p / dp, p.norm() <= noise * bound)
    } else {
        // p(z) = z^d q(1/z) with q(y) = sum c_k y^{d-k}.
        let y = z.inv();
        let r = y.norm();
        let mut q = c[0];
        let mut dq = C64::new(0.0, 0.0);
        let mut bound = c[0].norm();
        for k in 1..=d {
            dq = dq * y + q;
            q = q * y + c[k];
            bound = bound * r + c[k].norm();
        }
        // p'/p = (d - y q'(y)/q(y)) / z
        (
            z / (C64::new(d as f64, 0.0) - y * dq / q),
            q.norm() <= noise * bound,
        )
    }
}

/// All roots of `sum c_k z^k` (ascending coefficients), with multiplicity.
/// Leading zero coefficients are dropped; `warm` supplies starting points.
pub fn roots(coeffs: &[C64], warm: Option<&[C64]>) -> Result<Vec<C64>> {
    let top = match coeffs.iter().rposition(|c| c.norm_sqr() > 0.0) {
        Some(t) => t,
        None => {
            return Err(crate::error::invalid(
                "zero polynomial has no isolated roots",
            ))
        }
    };
    let low = coeffs.iter().position(|c| c.norm_sqr() > 0.0).unwrap();
    let c = &coeffs[low..=top];
    let d = c.len() - 1;
    let mut out: Vec<C64> = core::iter::repeat_n(C64::new(0.0, 0.0), low).collect();
    if d == 0 {
        return Ok(out);
    }
    if d == 1 {
        out.push(-c[0] / c[1]);
        return Ok(out);
    }
    let mut z: Vec<C64> = match warm {
        Some(w) if w.len() == d + low => w
            .iter()
            .copied()
            .filter(|r| r.norm_sqr() > 0.0)
            .chain(core::iter::repeat(C64::new(1.0, 0.0)))
            .take(d)
            .collect(),
        _ => {
            let r = (c[0].norm() / c[d].norm()).powf(1.0 / d as f64).max(1e-3);
            (0..d)
                .map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / d as f64 + 0.4))
                .collect()
        }
    };
    // Separate coincident warm starts so the repulsion term is finite.
    for i in 0..d {
        for j in 0..i {
            if (z[i] - z[j]).norm() < 1e-12 * (1.0 + z[i].norm()) {
                let bump = C64::from_polar(1e-7 * (1.0 + z[i].norm()), 1.0 + i as f64);
                z[i] += bump;
            }
        }
    }
    let mut done = alloc::vec![false; d];
    for _ in 0..800 {
        let mut all = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (ratio, settled) = newton_ratio(c, z[i]);
            let mut rep = C64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    rep += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (C64::new(1.0, 0.0) - ratio * rep);
            if !step.re.is_finite() || !step.im.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if settled || step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            out.extend(z);
            return Ok(out);
        }
    }
    Err(Error::NonConverged {
        context: "polynomial roots",
        value: d as f64,
        error_estimate: f64::NAN,
    })
}

/// Aberth iteration warm-started from the previous call.
#[derive(Clone, Debug, Default)]
pub struct RootTracker {
    last: Vec<C64>,
}

impl RootTracker {
    pub fn roots(&mut self, coeffs: &[C64]) -> Result<&[C64]> {
        let r = match roots(coeffs, Some(&self.last)) {
            Ok(r) => r,
            Err(_) => roots(coeffs, None)?,
        };
        self.last = r;
        Ok(&self.last)
    }
}

/// `mean over theta of log|p(r e^{i theta})|` by Jensen's formula.
pub fn mahler_log(coeffs: &[C64], roots: &[C64], r: f64) -> f64 {
    let top = coeffs.iter().rposition(|c| c.norm_sqr() > 0.0).unwrap();
    let lead = coeffs[top].norm().ln();
    lead + roots.iter().map(|z| z.norm().max(r).ln()).sum::<f64>()
}
