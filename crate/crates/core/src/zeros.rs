//! Zeros of Dirichlet polynomials in rectangles by the argument principle.
//!
//! Contours are sampled adaptively: a step is accepted when the phase moves by
//! less than `pi/2` and the local phase rate `|f'/f|` times the step is below
//! `pi/2` at both ends. Cells are bisected along their longer side, cut lines
//! are jittered off zeros, and cells of winding `k` are refined by Newton's
//! method on `f^{(k-1)}`.
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::series::{BohrForm, DirichletPolynomial};
use crate::symbol::SymbolG0;

/// `[sigma_min, sigma_max] x [t_min, t_max]` in the `s`-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Rectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Self {
        Self {
            sigma_min,
            sigma_max,
            t_min,
            t_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> C64 {
        C64::new(
            0.5 * (self.sigma_min + self.sigma_max),
            0.5 * (self.t_min + self.t_max),
        )
    }

    /// Open-interior membership.
    pub fn contains(&self, s: C64) -> bool {
        s.re > self.sigma_min && s.re < self.sigma_max && s.im > self.t_min && s.im < self.t_max
    }

    fn is_valid(&self) -> bool {
        self.sigma_min < self.sigma_max
            && self.t_min < self.t_max
            && [self.sigma_min, self.sigma_max, self.t_min, self.t_max]
                .iter()
                .all(|v| v.is_finite())
    }
}

/// A zero with multiplicity from the winding of its isolating cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub s: C64,
    pub multiplicity: u32,
    /// `|f(s)|`.
    pub residual: f64,
}

/// All zeros in a rectangle, sorted by `(Im, Re)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub rect: Rectangle,
    pub zeros: Vec<Zero>,
    /// Winding number of the boundary; equals the sum of multiplicities.
    pub total_winding: i64,
}

impl ZeroSet {
    pub fn count(&self) -> u64 {
        self.zeros.iter().map(|z| z.multiplicity as u64).sum()
    }
}

/// Argument-principle count for one contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub count: i64,
    /// Distance of the accumulated phase / 2pi from the nearest integer.
    pub rounding_gap: f64,
    pub min_modulus: f64,
    pub samples: usize,
}

type EdgeKey = [u64; 4];

fn key(a: C64, b: C64) -> EdgeKey {
    [
        a.re.to_bits(),
        a.im.to_bits(),
        b.re.to_bits(),
        b.im.to_bits(),
    ]
}

#[derive(Clone, Copy)]
struct EdgeResult {
    phase: f64,
    min_modulus: f64,
    samples: usize,
}

struct Finder<'a> {
    f: &'a DirichletPolynomial,
    form: BohrForm,
    spec: &'a QuadratureSpec,
    freq: f64,
    derivs: RefCell<BTreeMap<u32, BohrForm>>,
    cache: RefCell<BTreeMap<EdgeKey, EdgeResult>>,
}

impl<'a> Finder<'a> {
    fn new(f: &'a DirichletPolynomial, spec: &'a QuadratureSpec) -> Self {
        Self {
            f,
            form: f.bohr(),
            spec,
            freq: f.max_log_index(),
            derivs: RefCell::new(BTreeMap::new()),
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    fn threshold(&self, sigma: f64) -> f64 {
        self.spec.boundary_tol * self.f.abs_sum(sigma)
    }

    fn edge(&self, a: C64, b: C64) -> Result<EdgeResult> {
        if let Some(r) = self.cache.borrow().get(&key(a, b)) {
            return Ok(*r);
        }
        if let Some(r) = self.cache.borrow().get(&key(b, a)) {
            return Ok(EdgeResult {
                phase: -r.phase,
                ..*r
            });
        }
        let r = self.trace(a, b)?;
        self.cache.borrow_mut().insert(key(a, b), r);
        Ok(r)
    }

    fn trace(&self, a: C64, b: C64) -> Result<EdgeResult> {
        let len = (b - a).norm();
        let thr = self.threshold(a.re.max(b.re));
        let n0 = ((len * self.freq / (PI / 4.0)).ceil() as usize).max(1);
        let at = |u: f64| a + (b - a) * u;
        let sample = |u: f64| -> Result<(C64, C64)> {
            let s = at(u);
            let (v, d) = self.form.eval_d(s);
            if v.norm() <= thr {
                return Err(Error::BoundaryZero { re: s.re, im: s.im });
            }
            Ok((v, d))
        };
        let ok = |h: f64, fa: (C64, C64), fb: (C64, C64)| -> bool {
            let dphi = (fb.0 / fa.0).arg().abs();
            dphi < PI / 2.0
                && h * fa.1.norm() <= PI / 2.0 * fa.0.norm()
                && h * fb.1.norm() <= PI / 2.0 * fb.0.norm()
        };
        let mut phase = 0.0;
        let mut min_modulus = f64::INFINITY;
        let mut samples = 1;
        let mut left = sample(0.0)?;
        min_modulus = min_modulus.min(left.0.norm());
        let mut stack: Vec<(f64, f64, (C64, C64), (C64, C64), u32)> = Vec::new();
        for i in 0..n0 {
            let (u0, u1) = (i as f64 / n0 as f64, (i + 1) as f64 / n0 as f64);
            let right = sample(u1)?;
            samples += 1;
            min_modulus = min_modulus.min(right.0.norm());
            stack.push((u0, u1, left, right, 0));
            while let Some((ua, ub, fa, fb, depth)) = stack.pop() {
                let h = (ub - ua) * len;
                if ok(h, fa, fb) {
                    phase += (fb.0 / fa.0).arg();
                    continue;
                }
                if depth >= self.spec.max_depth {
                    let s = at(0.5 * (ua + ub));
                    return Err(
                        if fa.0.norm().min(fb.0.norm()) < 1e3 * thr.max(f64::MIN_POSITIVE) {
                            Error::BoundaryZero { re: s.re, im: s.im }
                        } else {
                            Error::NonConverged {
                                context: "contour sampling",
                                value: s.im,
                                error_estimate: h,
                            }
                        },
                    );
                }
                let um = 0.5 * (ua + ub);
                let fm = sample(um)?;
                samples += 1;
                min_modulus = min_modulus.min(fm.0.norm());
                // Left half first so phases accumulate in order.
                stack.push((um, ub, fm, fb, depth + 1));
                stack.push((ua, um, fa, fm, depth + 1));
            }
            left = right;
        }
        Ok(EdgeResult {
            phase,
            min_modulus,
            samples,
        })
    }

    fn winding(&self, r: &Rectangle) -> Result<Winding> {
        let c = [
            C64::new(r.sigma_min, r.t_min),
            C64::new(r.sigma_max, r.t_min),
            C64::new(r.sigma_max, r.t_max),
            C64::new(r.sigma_min, r.t_max),
        ];
        let mut phase = 0.0;
        let mut min_modulus = f64::INFINITY;
        let mut samples = 0;
        for i in 0..4 {
            let e = self.edge(c[i], c[(i + 1) % 4])?;
            phase += e.phase;
            min_modulus = min_modulus.min(e.min_modulus);
            samples += e.samples;
        }
        let x = phase / (2.0 * PI);
        let count = x.round();
        let gap = (x - count).abs();
        if gap > 0.1 {
            return Err(Error::NonConverged {
                context: "winding number",
                value: x,
                error_estimate: gap,
            });
        }
        Ok(Winding {
            count: count as i64,
            rounding_gap: gap,
            min_modulus,
            samples,
        })
    }

    fn deriv_form(&self, k: u32) -> BohrForm {
        if k == 0 {
            return self.form.clone();
        }
        self.derivs
            .borrow_mut()
            .entry(k)
            .or_insert_with(|| self.f.nth_derivative(k).bohr())
            .clone()
    }

    /// Newton on `f^{(k-1)}` from the cell center; accepted if it stays in the cell.
    fn refine(&self, cell: &Rectangle, k: u32, tol: f64) -> Option<Zero> {
        let g = self.deriv_form(k - 1);
        let diam = cell.diameter();
        let mut s = cell.center();
        let mut converged = false;
        for _ in 0..100 {
            let (v, d) = g.eval_d(s);
            if d.norm() == 0.0 {
                return None;
            }
            let mut step = v / d;
            if step.norm() > diam {
                step = step * (diam / step.norm());
            }
            s -= step;
            if !(s.re.is_finite() && s.im.is_finite()) {
                return None;
            }
            if step.norm() < (0.01 * tol).max(8.0 * f64::EPSILON * s.norm()) {
                converged = true;
                break;
            }
        }
        let margin = tol;
        let inside = s.re > cell.sigma_min - margin
            && s.re < cell.sigma_max + margin
            && s.im > cell.t_min - margin
            && s.im < cell.t_max + margin;
        let residual = self.form.eval(s).norm();
        let res_tol = tol.max(64.0 * f64::EPSILON * self.f.abs_sum(s.re));
        (converged && inside && residual <= res_tol).then_some(Zero {
            s,
            multiplicity: k,
            residual,
        })
    }

    /// Cut position near `mid` in `[lo, hi]` such that `make(cut)` succeeds.
    fn jittered_cut<T>(
        &self,
        lo: f64,
        hi: f64,
        tol: f64,
        mut make: impl FnMut(f64) -> Result<T>,
    ) -> Result<(f64, T)> {
        let mid = 0.5 * (lo + hi);
        let base = (tol / 10.0).max(1e-9 * (hi - lo));
        let mut last = None;
        for attempt in 0..16 {
            let off = if attempt == 0 {
                0.0
            } else {
                let mag = base * 4f64.powi((attempt - 1) / 2);
                if attempt % 2 == 1 {
                    mag
                } else {
                    -mag
                }
            };
            let cut = mid + off;
            if cut <= lo || cut >= hi {
                break;
            }
            match make(cut) {
                Ok(v) => return Ok((cut, v)),
                Err(e @ (Error::BoundaryZero { .. } | Error::NonConverged { .. })) => {
                    last = Some(e)
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(Error::NonConverged {
            context: "cell subdivision",
            value: mid,
            error_estimate: hi - lo,
        }))
    }

    fn split(&self, cell: &Rectangle, tol: f64) -> Result<[(Rectangle, Winding); 2]> {
        let by_sigma = cell.width() >= cell.height();
        let (lo, hi) = if by_sigma {
            (cell.sigma_min, cell.sigma_max)
        } else {
            (cell.t_min, cell.t_max)
        };
        let (_, pair) = self.jittered_cut(lo, hi, tol, |cut| {
            let (a, b) = if by_sigma {
                (
                    Rectangle {
                        sigma_max: cut,
                        ..*cell
                    },
                    Rectangle {
                        sigma_min: cut,
                        ..*cell
                    },
                )
            } else {
                (
                    Rectangle {
                        t_max: cut,
                        ..*cell
                    },
                    Rectangle {
                        t_min: cut,
                        ..*cell
                    },
                )
            };
            let wa = self.winding(&a)?;
            let wb = self.winding(&b)?;
            Ok([(a, wa), (b, wb)])
        })?;
        Ok(pair)
    }
}

/// Winding number of `f` around the boundary of `rect`.
pub fn winding_count(
    f: &DirichletPolynomial,
    rect: &Rectangle,
    spec: &QuadratureSpec,
) -> Result<Winding> {
    if !rect.is_valid() {
        return Err(crate::error::invalid("degenerate rectangle"));
    }
    if f.is_zero() {
        return Err(crate::error::invalid("zero function"));
    }
    Finder::new(f, spec).winding(rect)
}

/// Zeros of `f` inside `rect`, located to within `tol`.
pub fn find_zeros(
    f: &DirichletPolynomial,
    rect: &Rectangle,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<ZeroSet> {
    if !rect.is_valid() || !(tol > 0.0) {
        return Err(crate::error::invalid("degenerate rectangle or tolerance"));
    }
    if f.is_zero() {
        return Err(crate::error::invalid("zero function"));
    }
    let finder = Finder::new(f, spec);
    let total = finder.winding(rect)?;
    let mut zeros = Vec::new();
    // Tall rectangles are first cut into slabs of height about twice the width.
    let slab = (2.0 * rect.width()).max(1.0);
    let pieces = (rect.height() / slab).floor().max(1.0) as usize;
    let mut queue: Vec<(Rectangle, Winding)> = Vec::new();
    let mut t0 = rect.t_min;
    let mut acc = 0;
    for i in 1..=pieces {
        let (top, w) = if i == pieces {
            let r = Rectangle { t_min: t0, ..*rect };
            (rect.t_max, finder.winding(&r)?)
        } else {
            let nominal = rect.t_min + rect.height() * i as f64 / pieces as f64;
            let step = rect.height() / pieces as f64;
            finder.jittered_cut(nominal - 0.5 * step, nominal + 0.5 * step, tol, |cut| {
                finder.winding(&Rectangle {
                    t_min: t0,
                    t_max: cut,
                    ..*rect
                })
            })?
        };
        acc += w.count;
        queue.push((
            Rectangle {
                t_min: t0,
                t_max: top,
                ..*rect
            },
            w,
        ));
        t0 = top;
    }
    if acc != total.count {
        return Err(Error::NonConverged {
            context: "slab winding conservation",
            value: acc as f64,
            error_estimate: total.count as f64,
        });
    }
    queue.reverse();
    while let Some((cell, w)) = queue.pop() {
        if w.count == 0 {
            continue;
        }
        if w.count < 0 {
            return Err(Error::NonConverged {
                context: "negative winding",
                value: w.count as f64,
                error_estimate: 0.0,
            });
        }
        let k = w.count as u32;
        if let Some(z) = finder.refine(&cell, k, tol) {
            zeros.push(z);
            continue;
        }
        if cell.diameter() < tol {
            let s = cell.center();
            let residual = f.eval(s).norm();
            zeros.push(Zero {
                s,
                multiplicity: k,
                residual,
            });
            continue;
        }
        let [(a, wa), (b, wb)] = finder.split(&cell, tol)?;
        if wa.count + wb.count != w.count {
            return Err(Error::NonConverged {
                context: "winding conservation",
                value: (wa.count + wb.count) as f64,
                error_estimate: w.count as f64,
            });
        }
        queue.push((b, wb));
        queue.push((a, wa));
    }
    zeros.sort_by(|a, b| a.s.im.total_cmp(&b.s.im).then(a.s.re.total_cmp(&b.s.re)));
    Ok(ZeroSet {
        rect: *rect,
        zeros,
        total_winding: total.count,
    })
}

/// Solutions of `phi(s) = w` in `rect`.
pub fn solve_level(
    phi: &SymbolG0,
    w: C64,
    rect: &Rectangle,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<ZeroSet> {
    if (w - phi.nu()).norm() <= 1e-12 * phi.nu().norm().max(1.0) {
        return Err(Error::WEqualsNu);
    }
    find_zeros(&phi.level(w), rect, tol, spec)
}

/// Vertical quasi-period `2 pi / log n` of the smallest index `n > 1` in the support.
pub fn quasi_period(f: &DirichletPolynomial) -> f64 {
    match f.terms().map(|(n, _)| n).find(|&n| n > 1) {
        Some(n) => 2.0 * PI / (n as f64).ln(),
        None => 2.0 * PI / 2f64.ln(),
    }
}

/// Smallest `sigma` with `sum_{n > n0} |a_n| (n/n0)^{-sigma} < |a_{n0}| / 2`, `n0` the least index.
/// `f` has no zeros with real part at or beyond the returned abscissa.
pub fn zero_free_abscissa(f: &DirichletPolynomial) -> f64 {
    let mut it = f.terms();
    let (n0, a0) = match it.next() {
        Some(t) => t,
        None => return 0.0,
    };
    let rest: Vec<(f64, f64)> = it
        .map(|(n, a)| (((n as f64) / n0 as f64).ln(), a.norm()))
        .collect();
    if rest.is_empty() {
        return 0.0;
    }
    let g = |s: f64| rest.iter().map(|&(l, a)| a * (-s * l).exp()).sum::<f64>() - 0.5 * a0.norm();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if g(lo) < 0.0 {
        return lo.max(-1.0);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn lattice_zeros_of_one_minus_two_powers() {
        // 1 - 2 * 2^{-s} vanishes at 1 + 2 pi i k / log 2.
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]);
        let r = Rectangle::new(0.0, 2.0, -1.0, 30.0);
        let z = find_zeros(&f, &r, 1e-10, &spec()).unwrap();
        let p = 2.0 * PI / 2f64.ln();
        assert_eq!(z.total_winding, 4);
        for (k, zero) in z.zeros.iter().enumerate() {
            assert!((zero.s - C64::new(1.0, k as f64 * p)).norm() < 1e-12);
            assert_eq!(zero.multiplicity, 1);
        }
    }

    #[test]
    fn boundary_zero_is_reported() {
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0)]);
        let r = Rectangle::new(1.0, 2.0, -1.0, 1.0);
        assert!(matches!(
            winding_count(&f, &r, &spec()),
            Err(Error::BoundaryZero { .. })
        ));
    }

    #[test]
    fn double_zero() {
        // (2^{-s} - 1/2)(3^{-s} - 1/3) has a double zero at s = 1.
        let f =
            DirichletPolynomial::from_real(&[(1, 1.0 / 6.0), (2, -1.0 / 3.0), (3, -0.5), (6, 1.0)]);
        let r = Rectangle::new(0.5, 1.5, -0.5, 0.5);
        let z = find_zeros(&f, &r, 1e-10, &spec()).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert_eq!(z.zeros[0].multiplicity, 2);
        assert!((z.zeros[0].s - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn right_edge_is_zero_free() {
        let f = DirichletPolynomial::from_real(&[(1, 1.0), (2, -2.0), (3, 0.7)]);
        let a = zero_free_abscissa(&f);
        assert!(f.abs_sum(a) - 1.0 <= 0.5 + 1e-12);
        let w = winding_count(&f, &Rectangle::new(a, a + 5.0, -50.0, 50.0), &spec()).unwrap();
        assert_eq!(w.count, 0);
    }
}
