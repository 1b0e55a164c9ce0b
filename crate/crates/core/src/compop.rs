//! Composition operators on the Hardy space of Dirichlet series: norms from
//! coefficients, the Littlewood-Paley identity, the change-of-variables
//! identity weighted by the mean counting function, Hilbert-Schmidt norms and
//! compactness profiles.
//!
//! Area integrals over `Re w > 1/2` run on the image box of the symbol, where
//! the counting function is supported. Around `nu` the box is integrated in
//! polar coordinates with a small excluded disc whose contribution is bounded
//! through the pointwise bound `M <= log|(conj(w) + nu - 1)/(w - nu)|`.
use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::counting::{mean_counting_series, LadderSpec};
use crate::error::{invalid, Error, Result};
use crate::jessen::TorusJessen;
use crate::quad::{cubature, integrate, lattice_points, Cell, QuadratureSpec};
use crate::series::DirichletPolynomial;
use crate::symbol::{torus_extremum, Extremum, SymbolG0};
use crate::zeros::Rectangle;
use crate::zeta::{zeta, zeta_second_derivative, zeta_tail};

/// Radius of the disc around `nu` left out of area integrals.
pub const SINGULAR_RADIUS: f64 = 1e-2;

/// A way of evaluating `M_phi(w)` for one symbol.
pub trait CountingSource: Sync {
    /// `phi(+inf)`.
    fn nu(&self) -> C64;
    fn value(&self, w: C64) -> Result<f64>;
}

/// `M_phi(w) = J_{phi - w}(0) - log|nu - w|` by exact Jensen integration on the torus.
#[derive(Clone, Debug)]
pub struct JessenCounting {
    torus: TorusJessen,
    nu: C64,
}

impl JessenCounting {
    pub fn new(phi: &SymbolG0, spec: &QuadratureSpec) -> Self {
        Self {
            torus: TorusJessen::new(phi.series(), spec),
            nu: phi.nu(),
        }
    }
}

impl CountingSource for JessenCounting {
    fn nu(&self) -> C64 {
        self.nu
    }

    fn value(&self, w: C64) -> Result<f64> {
        if w == self.nu {
            return Err(Error::WEqualsNu);
        }
        let j = self.torus.mean(0.0, w)?;
        // Rounding can leave a tiny negative value where no solutions exist.
        Ok((j.value - (self.nu - w).norm().ln()).max(0.0))
    }
}

/// A closed-form counting function.
pub struct ClosedFormCounting<F: Fn(C64) -> Result<f64> + Sync> {
    pub nu: C64,
    pub f: F,
}

impl<F: Fn(C64) -> Result<f64> + Sync> CountingSource for ClosedFormCounting<F> {
    fn nu(&self) -> C64 {
        self.nu
    }

    fn value(&self, w: C64) -> Result<f64> {
        (self.f)(w)
    }
}

/// Counting function by locating zeros along the ladders. Slow; for spot checks.
#[derive(Clone, Debug)]
pub struct ZeroRouteCounting {
    pub phi: SymbolG0,
    pub ladder: LadderSpec,
    pub spec: QuadratureSpec,
}

impl CountingSource for ZeroRouteCounting {
    fn nu(&self) -> C64 {
        self.phi.nu()
    }

    fn value(&self, w: C64) -> Result<f64> {
        Ok(mean_counting_series(self.phi.series(), w, &self.ladder, &self.spec)?.value)
    }
}

/// `sqrt(sum |a_n|^2)`.
pub fn h2_norm(f: &DirichletPolynomial) -> f64 {
    f.h2_norm()
}

/// Mean of `g` over the torus of dimension `dim`, refined until stable.
/// Returns `(value, error_estimate, nodes)`.
pub fn torus_average(
    dim: usize,
    mut g: impl FnMut(&[C64]) -> f64,
    max_points: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, usize)> {
    if dim == 0 {
        return Ok((g(&[]), 0.0, 1));
    }
    let mut z = vec![C64::new(1.0, 0.0); dim];
    let mut n = spec.torus_nodes.max(4);
    let mut prev: Option<f64> = None;
    let mut sum1 = 0.0;
    loop {
        let total = n.pow(dim as u32);
        let value = if dim == 1 {
            // Nested grids: after the first pass only odd nodes are new.
            let (start, step) = if prev.is_none() { (0, 1) } else { (1, 2) };
            for i in (start..n).step_by(step) {
                z[0] = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
                sum1 += g(&z);
            }
            sum1 / n as f64
        } else if dim == 2 {
            let mut s = 0.0;
            for i in 0..n {
                z[0] = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
                for j in 0..n {
                    z[1] = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                    s += g(&z);
                }
            }
            s / total as f64
        } else {
            let mut s = 0.0;
            for p in lattice_points(total, dim) {
                for (zk, u) in z.iter_mut().zip(&p) {
                    *zk = C64::from_polar(1.0, 2.0 * PI * u);
                }
                s += g(&z);
            }
            s / total as f64
        };
        if !value.is_finite() {
            return Err(Error::NonConverged {
                context: "torus average",
                value,
                error_estimate: f64::INFINITY,
            });
        }
        if let Some(p) = prev {
            let err = (value - p).abs();
            let scale = value.abs().max(1.0);
            if err <= spec.torus_tol * scale {
                return Ok((value, err, total));
            }
            if (2 * n).pow(dim as u32) > max_points {
                if err > spec.torus_accept * scale {
                    return Err(Error::NonConverged {
                        context: "torus average",
                        value,
                        error_estimate: err,
                    });
                }
                return Ok((value, err, total));
            }
        }
        prev = Some(value);
        n *= 2;
    }
}

/// `||f o phi||^2` as the torus mean of `|f(P(z))|^2`.
pub fn composition_norm_sq_torus(
    f: &DirichletPolynomial,
    phi: &SymbolG0,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let form = phi.series().bohr();
    let (v, e, _) = torus_average(
        form.dim(),
        |z| f.eval(form.eval_torus(z)).norm_sqr(),
        spec.max_torus_points,
        spec,
    )?;
    Ok((v, e))
}

/// Norm of `C_phi f` from the coefficients of `f o phi` up to `cutoff`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositionNorm {
    /// `h2_norm` of the truncated composition.
    pub norm: f64,
    /// Squared norm carried by indices beyond `cutoff`: torus value minus the partial sum.
    pub tail: f64,
    pub torus_norm_sq: f64,
    pub torus_error: f64,
}

pub fn composition_norm(
    f: &DirichletPolynomial,
    phi: &SymbolG0,
    cutoff: u64,
    target: f64,
    spec: &QuadratureSpec,
) -> Result<CompositionNorm> {
    let partial = f.compose_series(phi.series(), cutoff)?;
    let norm = partial.h2_norm();
    let (torus, err) = composition_norm_sq_torus(f, phi, spec)?;
    let tail = (torus - norm * norm).max(0.0);
    if tail > target + err {
        return Err(Error::Truncation { tail, target });
    }
    Ok(CompositionNorm {
        norm,
        tail,
        torus_norm_sq: torus,
        torus_error: err,
    })
}

/// Both sides of the Littlewood-Paley identity at the top rungs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LittlewoodPaley {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub sigma0: f64,
    pub t: f64,
    pub quadrature_error: f64,
}

/// `|‖f‖² − |f(+inf)|² − (2/T) ∫∫ |f'(σ+it)|² dt σdσ|` at the top `T` rung.
/// The lower limit `σ0 -> 0` is taken by Richardson extrapolation over the two
/// smallest `σ` rungs: the omitted strip `[0, σ0]` is `O(σ0²)` for finite `f`.
pub fn littlewood_paley_residual(
    f: &DirichletPolynomial,
    ladder: &LadderSpec,
    spec: &QuadratureSpec,
) -> Result<LittlewoodPaley> {
    ladder.validate()?;
    let sigma0 = *ladder.sigma_ladder.last().unwrap();
    // Next rung up, or twice the last when the ladder has one rung.
    let sigma1 = ladder
        .sigma_ladder
        .iter()
        .rev()
        .nth(1)
        .copied()
        .unwrap_or(2.0 * sigma0);
    let t = *ladder.t_values().last().unwrap();
    let lhs = f.h2_norm().powi(2) - f.value_at_infinity().norm_sqr();
    let df = f.derivative();
    if df.is_zero() {
        return Ok(LittlewoodPaley {
            lhs,
            rhs: 0.0,
            residual: lhs.abs(),
            sigma0,
            t,
            quadrature_error: 0.0,
        });
    }
    let sigma_cap = 10.0;
    // Panels no wider than a quarter period of the fastest frequency of |f'|^2,
    // which is log(max index / min index) over the support of f'.
    let (lo, hi) = (df.min_index().unwrap(), df.max_index().unwrap());
    let lambda = (hi as f64 / lo as f64).ln();
    let panels = ((2.0 * t * lambda / (0.5 * PI)).ceil() as usize).max(1);
    let width = 2.0 * t / panels as f64;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0);
    let row = |sigma: f64| {
        let mut s = 0.0;
        for k in 0..panels {
            let a = -t + k as f64 * width;
            match integrate(
                |y| df.eval(C64::new(sigma, y)).norm_sqr(),
                a,
                a + width,
                1e-15,
                spec.rel_tol,
                64,
            ) {
                Ok(r) => {
                    s += r.value;
                    *inner_err.borrow_mut() += r.error * sigma * 2.0 / t;
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        s * sigma * 2.0 / t
    };
    let upper = integrate(&row, sigma1, sigma_cap, 0.0, 1e-8, 200)?;
    let strip = integrate(&row, sigma0, sigma1, 0.0, 1e-8, 200)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let tail: f64 = f
        .terms()
        .filter(|&(n, _)| n > 1)
        .map(|(n, a)| {
            let l = (n as f64).ln();
            // 4 |a|^2 L^2 int_cap^inf sigma e^{-2 L sigma} d sigma
            4.0 * a.norm_sqr()
                * l
                * l
                * (-2.0 * l * sigma_cap).exp()
                * (sigma_cap / (2.0 * l) + 1.0 / (4.0 * l * l))
        })
        .sum();
    let (r0, r1) = (upper.value + strip.value, upper.value);
    let q = (sigma1 / sigma0).powi(2);
    let rhs = (q * r0 - r1) / (q - 1.0) + tail;
    let quadrature_error = upper.error + strip.error + inner_err.into_inner();
    Ok(LittlewoodPaley {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        sigma0,
        t,
        quadrature_error,
    })
}

/// Bounding box of `phi` over `Re s > 0`, slightly padded; `M_phi` vanishes outside it.
pub fn image_box(phi: &SymbolG0, spec: &QuadratureSpec) -> Rectangle {
    let form = phi.series().bohr();
    let max_re = torus_extremum(&form, Extremum::MaxRe, spec).0;
    let min_im = torus_extremum(&form, Extremum::MinIm, spec).0;
    let max_im = torus_extremum(&form, Extremum::MaxIm, spec).0;
    let min_re = phi.certificate().min_real_part_found;
    let pad = 1e-6 * (1.0 + max_re - min_re + max_im - min_im);
    Rectangle::new(
        (min_re - pad).max(0.5),
        max_re + pad,
        min_im - pad,
        max_im + pad,
    )
}

/// An area integral with its pieces.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AreaIntegral {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
    /// Bound for the excluded disc around `nu`.
    pub patch_bound: f64,
}

/// `int_D log|(conj(w)+nu-1)/(w-nu)| dA <= pi d^2 (log((2 Re nu - 1 + d)/d) + 1/2)` on `D = D(nu, d)`.
fn disc_bound_integral(nu: C64, d: f64) -> f64 {
    PI * d * d * (((2.0 * nu.re - 1.0 + d) / d).ln() + 0.5)
}

/// `int_rect h(w) M(w) dA`, with `h >= 0` and `weight_sup(d)` bounding `h` on `D(nu, d)`.
pub fn area_integral(
    h: &dyn Fn(C64) -> f64,
    m: &dyn CountingSource,
    rect: Rectangle,
    weight_sup: &dyn Fn(f64) -> f64,
    rel_tol: f64,
    spec: &QuadratureSpec,
) -> Result<AreaIntegral> {
    if rect.width() <= 0.0 || rect.height() <= 0.0 {
        return Ok(AreaIntegral::default());
    }
    let nu = m.nu();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |w: C64| -> f64 {
        let hv = h(w);
        if hv == 0.0 {
            return 0.0;
        }
        match m.value(w) {
            Ok(v) => hv * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let abs_tol = spec.abs_tol;
    let mut out = AreaIntegral::default();
    let add_cell = |c: Cell, out: &mut AreaIntegral| -> Result<()> {
        if c.x1 > c.x0 && c.y1 > c.y0 {
            let r = cubature(
                |x, y| g(C64::new(x, y)),
                c,
                abs_tol,
                rel_tol,
                spec.max_cells,
            )?;
            out.value += r.value;
            out.error += r.error;
            out.cells += r.pieces;
        }
        Ok(())
    };
    let full = Cell {
        x0: rect.sigma_min,
        x1: rect.sigma_max,
        y0: rect.t_min,
        y1: rect.t_max,
    };
    let d = SINGULAR_RADIUS;
    let r = [
        0.5 * (nu.re - 0.5),
        nu.re - rect.sigma_min,
        rect.sigma_max - nu.re,
        nu.im - rect.t_min,
        rect.t_max - nu.im,
        0.25,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    if r <= 2.0 * d {
        // nu is outside the box or hugs its edge; the disc is still excluded from the bound.
        add_cell(full, &mut out)?;
        out.patch_bound = weight_sup(d) * disc_bound_integral(nu, d);
    } else {
        // Square of half-side r around nu in polar coordinates, minus the disc of radius d.
        for k in 0..8 {
            let (a, b) = (k as f64 * PI / 4.0, (k + 1) as f64 * PI / 4.0);
            let res = integrate(
                |th| {
                    let (s, c) = th.sin_cos();
                    let rmax = r / c.abs().max(s.abs());
                    match integrate(
                        |rho| rho * g(nu + C64::from_polar(rho, th)),
                        d,
                        rmax,
                        abs_tol,
                        rel_tol,
                        200,
                    ) {
                        Ok(v) => v.value,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                a,
                b,
                abs_tol,
                rel_tol,
                200,
            )?;
            out.value += res.value;
            out.error += res.error;
            out.cells += res.pieces;
        }
        let (x0, x1, y0, y1) = (nu.re - r, nu.re + r, nu.im - r, nu.im + r);
        add_cell(Cell { x1: x0, ..full }, &mut out)?;
        add_cell(Cell { x0: x1, ..full }, &mut out)?;
        add_cell(
            Cell {
                x0,
                x1,
                y1: y0,
                ..full
            },
            &mut out,
        )?;
        add_cell(
            Cell {
                x0,
                x1,
                y0: y1,
                ..full
            },
            &mut out,
        )?;
        out.patch_bound = weight_sup(d) * disc_bound_integral(nu, d);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out)
}

/// `sum |a_n| log n n^{-x}`, a bound for `|f'(w)|` on `Re w >= x`.
fn derivative_bound(f: &DirichletPolynomial, x: f64) -> f64 {
    f.derivative_abs_sum(x)
}

/// Outcome of comparing both sides of the change-of-variables identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StantonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub quad_cells: usize,
    /// Area integral outside the quadrature region, bounded above.
    pub tail_bound: f64,
    pub singular_patch_bound: f64,
    pub quad_error: f64,
    /// Uncertainty of the left side: the squared norm beyond the coefficient
    /// cutoff is added from a torus mean with this error estimate.
    pub lhs_tail: f64,
}

impl StantonReport {
    /// Sum of every reported error term.
    pub fn budget(&self) -> f64 {
        self.tail_bound + self.singular_patch_bound + self.quad_error + self.lhs_tail
    }

    fn new(lhs: f64, lhs_tail: f64, f_nu: f64, area: AreaIntegral, tail_bound: f64) -> Self {
        let rhs = f_nu + 2.0 / PI * area.value;
        let abs_gap = (lhs - rhs).abs();
        Self {
            lhs,
            rhs,
            abs_gap,
            rel_gap: abs_gap / lhs.max(f64::MIN_POSITIVE),
            quad_cells: area.cells,
            tail_bound,
            singular_patch_bound: 2.0 / PI * area.patch_bound,
            quad_error: 2.0 / PI * area.error,
            lhs_tail,
        }
    }
}

/// Cutoff used for left-hand sides built from coefficients.
pub const COMPOSITION_CUTOFF: u64 = 1 << 63;

/// Change-of-variables check with `M` from the torus route over the image box.
pub fn stanton_check(
    f: &DirichletPolynomial,
    phi: &SymbolG0,
    spec: &QuadratureSpec,
) -> Result<StantonReport> {
    let comp = composition_norm(f, phi, COMPOSITION_CUTOFF, f64::INFINITY, spec)?;
    let lhs = comp.norm * comp.norm + comp.tail;
    let nu = phi.nu();
    let f_nu = f.eval(nu).norm_sqr();
    if phi.series().is_constant() {
        return Ok(StantonReport::new(
            lhs,
            comp.torus_error,
            f_nu,
            AreaIntegral::default(),
            0.0,
        ));
    }
    let source = JessenCounting::new(phi, spec);
    let df = f.derivative();
    let area = area_integral(
        &|w| df.eval(w).norm_sqr(),
        &source,
        image_box(phi, spec),
        &|d| derivative_bound(f, nu.re - d).powi(2),
        spec.cubature_rel_tol,
        spec,
    )?;
    Ok(StantonReport::new(lhs, comp.torus_error, f_nu, area, 0.0))
}

/// Upper bound for `int |f'|^2 M` outside `[1/2, x_r] x [-h, h]`, using
/// `M <= 2(Re w - 1/2)(Re nu - 1/2)/|w - nu|^2` and `|f'(w)| <= derivative_bound(Re w)`.
fn far_tail_bound(f: &DirichletPolynomial, nu: C64, x_r: f64, h: f64) -> Result<f64> {
    let c = 2.0 * (nu.re - 0.5);
    let right = integrate(
        |x| derivative_bound(f, x).powi(2) * c * (x - 0.5) * PI / (x - nu.re),
        x_r,
        x_r + 200.0,
        1e-14,
        1e-8,
        400,
    )?;
    let top = integrate(
        |x| derivative_bound(f, x).powi(2) * c * (x - 0.5),
        0.5,
        x_r,
        1e-14,
        1e-8,
        400,
    )?;
    Ok(right.value + top.value * 2.0 / (h - nu.im.abs()))
}

/// Change-of-variables check for the exact extremal symbol with the closed-form
/// counting function and closed-form norm. The region grows until the far tail
/// is below `spec.cubature_rel_tol` of the left side.
pub fn stanton_closed_form(
    f: &DirichletPolynomial,
    nu: C64,
    spec: &QuadratureSpec,
) -> Result<StantonReport> {
    if nu.re <= 0.5 {
        return Err(Error::RejectedMean { re_nu: nu.re });
    }
    let lhs = crate::oracles::phi_nu_composition_norm_sq(nu, f);
    let source = ClosedFormCounting {
        nu,
        f: move |w: C64| crate::oracles::phi_nu_counting(nu, w),
    };
    let target = spec.cubature_rel_tol * lhs;
    let (mut x_r, mut h) = (nu.re + 4.0, nu.im.abs() + 8.0);
    let mut tail = far_tail_bound(f, nu, x_r, h)?;
    for _ in 0..40 {
        if tail <= target {
            break;
        }
        x_r = 0.5 + 2.0 * (x_r - 0.5);
        h *= 2.0;
        tail = far_tail_bound(f, nu, x_r, h)?;
    }
    let df = f.derivative();
    let area = area_integral(
        &|w| df.eval(w).norm_sqr(),
        &source,
        Rectangle::new(0.5, x_r, -h, h),
        &|d| derivative_bound(f, nu.re - d).powi(2),
        spec.cubature_rel_tol,
        spec,
    )?;
    Ok(StantonReport::new(
        lhs,
        0.0,
        f.eval(nu).norm_sqr(),
        area,
        2.0 / PI * tail,
    ))
}

/// Squared Hilbert-Schmidt norm from the counting function.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSchmidt {
    /// `+inf` when the shells toward `Re w = 1/2` do not decay.
    pub norm_sq: f64,
    pub base: f64,
    pub integral: f64,
    pub error: f64,
    pub singular_patch_bound: f64,
    /// `(2/pi) * integral` over `Re w - 1/2` in `[2^-(k+1), 2^-k]`.
    pub shells: Vec<f64>,
    pub divergent: bool,
}

impl HilbertSchmidt {
    pub fn budget(&self) -> f64 {
        self.error + self.singular_patch_bound
    }
}

/// `zeta(2 Re nu) + (2/pi) int zeta''(2 Re w) M(w) dA`, by torus-route `M`.
pub fn hilbert_schmidt_norm(phi: &SymbolG0, spec: &QuadratureSpec) -> Result<HilbertSchmidt> {
    let base = zeta(2.0 * phi.nu().re)?;
    if phi.series().is_constant() {
        return Ok(HilbertSchmidt {
            norm_sq: base,
            base,
            integral: 0.0,
            error: 0.0,
            singular_patch_bound: 0.0,
            shells: Vec::new(),
            divergent: false,
        });
    }
    let source = JessenCounting::new(phi, spec);
    hilbert_schmidt_with(&source, image_box(phi, spec), base, spec)
}

/// Shell decomposition of the Hilbert-Schmidt integral over `rect`.
pub fn hilbert_schmidt_with(
    source: &dyn CountingSource,
    rect: Rectangle,
    base: f64,
    spec: &QuadratureSpec,
) -> Result<HilbertSchmidt> {
    let h = |w: C64| {
        if w.re > 0.5 {
            zeta_second_derivative(2.0 * w.re).unwrap_or(f64::INFINITY)
        } else {
            0.0
        }
    };
    let nu = source.nu();
    let sup = |d: f64| zeta_second_derivative(2.0 * (nu.re - d)).unwrap_or(f64::INFINITY);
    let rel = spec.cubature_rel_tol;
    const K0: i32 = 3;
    let split = 0.5 + 2f64.powi(-K0);
    let mut total = AreaIntegral::default();
    let add = |a: AreaIntegral, total: &mut AreaIntegral| {
        total.value += a.value;
        total.error += a.error;
        total.cells += a.cells;
        total.patch_bound += a.patch_bound;
    };
    let main = Rectangle::new(
        rect.sigma_min.max(split),
        rect.sigma_max,
        rect.t_min,
        rect.t_max,
    );
    if main.sigma_max > main.sigma_min {
        add(
            area_integral(&h, source, main, &sup, rel, spec)?,
            &mut total,
        );
    }
    let mut shells = Vec::new();
    let mut divergent = false;
    let mut k = K0;
    while rect.sigma_min < 0.5 + 2f64.powi(-k) && k < 60 {
        let (lo, hi) = (
            0.5 + 2f64.powi(-k - 1),
            (0.5 + 2f64.powi(-k)).min(rect.sigma_max),
        );
        let shell = Rectangle::new(lo.max(rect.sigma_min), hi, rect.t_min, rect.t_max);
        let a = if shell.sigma_max > shell.sigma_min {
            area_integral(&h, source, shell, &sup, rel, spec)?
        } else {
            AreaIntegral::default()
        };
        let v = 2.0 / PI * a.value;
        add(a, &mut total);
        shells.push(v);
        k += 1;
        let n = shells.len();
        if n >= 4 {
            let last = &shells[n - 4..];
            // Non-decaying shells: the integral diverges like a harmonic series or worse.
            if last[0] > 0.0 && last.windows(2).all(|p| p[1] >= 0.7 * p[0]) {
                divergent = true;
                break;
            }
        }
        let so_far = base + 2.0 / PI * total.value;
        if n >= 2 && v <= 1e-2 * rel * so_far && shells[n - 2] >= v {
            break;
        }
    }
    let integral = 2.0 / PI * total.value;
    Ok(HilbertSchmidt {
        norm_sq: if divergent {
            f64::INFINITY
        } else {
            base + integral
        },
        base,
        integral,
        error: 2.0 / PI * total.error + shells.last().copied().unwrap_or(0.0),
        singular_patch_bound: 2.0 / PI * total.patch_bound,
        shells,
        divergent,
    })
}

/// `sum_{n <= n_max} ||C_phi n^-s||^2` from coefficients, and the rest of
/// `sum_n ||C_phi n^-s||^2 = int_T zeta(2 Re P)` by torus quadrature.
pub fn hilbert_schmidt_from_basis(
    phi: &SymbolG0,
    n_max: u64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let mut head = 0.0;
    for n in 1..=n_max {
        let c = composition_norm(
            &DirichletPolynomial::monomial(n, C64::new(1.0, 0.0)),
            phi,
            COMPOSITION_CUTOFF,
            f64::INFINITY,
            spec,
        )?;
        head += c.norm * c.norm + c.tail;
    }
    let form = phi.series().bohr();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let (tail, _, _) = torus_average(
        form.dim(),
        |z| match zeta_tail(2.0 * form.eval_torus(z).re, 0, n_max + 1) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        spec.max_torus_points,
        spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((head, tail))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CompactConsistent,
    NoncompactConsistent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactnessSample {
    pub w: C64,
    pub m_value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompactnessProfile {
    pub samples: Vec<CompactnessSample>,
    pub verdict: Verdict,
}

/// `w_k = 1/2 + 2^-k + i t` for `k = 1..=n`.
pub fn default_path(n: u32, t: f64) -> Vec<C64> {
    (1..=n)
        .map(|k| C64::new(0.5 + 2f64.powi(-(k as i32)), t))
        .collect()
}

/// Compact if the last ratio has fallen below a tenth of the largest; non-compact
/// if the last three agree within 25% and stay above that floor. Ratios below
/// `1e-10` throughout are rounding noise of an identically vanishing function.
pub fn verdict(ratios: &[f64]) -> Verdict {
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let Some(&last) = ratios.last() else {
        return Verdict::Inconclusive;
    };
    if max <= 1e-10 || last < 0.1 * max {
        return Verdict::CompactConsistent;
    }
    if ratios.len() >= 3 {
        let tail = &ratios[ratios.len() - 3..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        if lo >= 0.1 * max && hi <= 1.25 * lo {
            return Verdict::NoncompactConsistent;
        }
    }
    Verdict::Inconclusive
}

pub fn compactness_profile(
    phi: &SymbolG0,
    path: &[C64],
    spec: &QuadratureSpec,
) -> Result<CompactnessProfile> {
    if phi.series().is_constant() {
        return compactness_profile_with(
            &ClosedFormCounting {
                nu: phi.nu(),
                f: |_| Ok(0.0),
            },
            path,
        );
    }
    compactness_profile_with(&JessenCounting::new(phi, spec), path)
}

pub fn compactness_profile_with(
    source: &dyn CountingSource,
    path: &[C64],
) -> Result<CompactnessProfile> {
    let mut samples = Vec::with_capacity(path.len());
    for &w in path {
        if !(w.re > 0.5) {
            return Err(Error::Domain {
                what: "approach path",
                re: w.re,
                im: w.im,
            });
        }
        let m = source.value(w)?;
        samples.push(CompactnessSample {
            w,
            m_value: m,
            ratio: m / (w.re - 0.5),
        });
    }
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    Ok(CompactnessProfile {
        verdict: verdict(&ratios),
        samples,
    })
}

/// `||C_phi K||^2 / ||K||^2` for the kernel `K(s) = sum_{n <= n_terms} n^{-conj(w)} n^{-s}`,
/// by torus quadrature with at most `max_points` nodes. Returns `(ratio, error)`.
pub fn kernel_ratio(
    phi: &SymbolG0,
    w: C64,
    n_terms: u64,
    max_points: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !(w.re > 0.5) || n_terms == 0 {
        return Err(invalid("kernel needs Re w > 1/2 and at least one term"));
    }
    let logs: Box<[f64]> = (1..=n_terms).map(|n| (n as f64).ln()).collect();
    let norm_sq: f64 = logs.iter().map(|l| (-2.0 * w.re * l).exp()).sum();
    let form = phi.series().bohr();
    let wc = w.conj();
    let (v, e, _) = torus_average(
        form.dim(),
        |z| {
            let u = wc + form.eval_torus(z);
            logs.iter().map(|&l| (-u * l).exp()).sum::<C64>().norm_sqr()
        },
        max_points,
        spec,
    )?;
    Ok((v / norm_sq, e / norm_sq))
}
