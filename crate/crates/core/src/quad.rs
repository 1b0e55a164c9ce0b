//! Quadrature rules, adaptive integrators and a derivative-free minimizer.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerances and node budgets shared by all integrators.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Absolute target for one-dimensional integrals and torus means.
    pub abs_tol: f64,
    /// Relative target for one-dimensional integrals.
    pub rel_tol: f64,
    /// Relative target for planar integrals in the operator identities.
    pub cubature_rel_tol: f64,
    pub max_cells: usize,
    /// Maximal bisection depth of contour sampling.
    pub max_depth: u32,
    /// Starting nodes per circle for torus means.
    pub torus_nodes: usize,
    /// Cap on the total number of torus nodes.
    pub max_torus_points: usize,
    /// Target change between successive torus refinements.
    pub torus_tol: f64,
    /// Largest torus error estimate returned instead of failing when the budget runs out.
    pub torus_accept: f64,
    /// Total grid budget for symbol validation (at least `validation_min_per_dim` per circle).
    pub validation_points: usize,
    pub validation_min_per_dim: usize,
    pub validation_tol: f64,
    /// `|f| < boundary_tol * sum |a_n| n^{-sigma}` on a contour counts as a zero.
    pub boundary_tol: f64,
    /// Zeros closer than this to a line of integration are integrated analytically.
    pub singular_radius: f64,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            cubature_rel_tol: 1e-4,
            max_cells: 6000,
            max_depth: 40,
            torus_nodes: 64,
            max_torus_points: 1 << 20,
            torus_tol: 1e-9,
            torus_accept: 1e-5,
            validation_points: 4096,
            validation_min_per_dim: 64,
            validation_tol: 1e-6,
            boundary_tol: 1e-11,
            singular_radius: 1e-3,
            seed: 0x6d65_616e_636f_756e,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            self.abs_tol,
            self.rel_tol,
            self.cubature_rel_tol,
            self.torus_tol,
            self.torus_accept,
            self.validation_tol,
            self.boundary_tol,
            self.singular_radius,
        ];
        if tols.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(crate::error::invalid(
                "quadrature tolerances must be positive and finite",
            ));
        }
        if self.max_cells == 0
            || self.max_depth == 0
            || self.torus_nodes < 2
            || self.max_torus_points < self.torus_nodes
        {
            return Err(crate::error::invalid("quadrature budgets too small"));
        }
        if self.validation_points == 0 || self.validation_min_per_dim < 2 {
            return Err(crate::error::invalid("validation grid too small"));
        }
        Ok(())
    }
}

/// Integral value with an error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// Number of subintervals or cells used.
    pub pieces: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod nodes on [-1, 1] with Kronrod weights and embedded Gauss weights (0 off-Gauss).
fn gk15_rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (x, wk, wg) = gk15_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (mut k, mut g) = (0.0, 0.0);
    for i in 0..15 {
        let v = f(c + h * x[i]);
        k += wk[i] * v;
        g += wg[i] * v;
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod 7/15 quadrature.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral::default());
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::NonConverged {
                context: "adaptive quadrature",
                value,
                error_estimate: error,
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                pieces: pieces.len(),
            });
        }
        if pieces.len() >= max_pieces {
            return Err(Error::NonConverged {
                context: "adaptive quadrature",
                value,
                error_estimate: error,
            });
        }
        let worst = argmax(pieces.iter().map(|p| p.3));
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

fn argmax<I: Iterator<Item = f64>>(it: I) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Axis-parallel rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

struct CellEstimate {
    cell: Cell,
    value: f64,
    error: f64,
    split_x: bool,
}

fn tensor_gk15<F: FnMut(f64, f64) -> f64>(f: &mut F, c: Cell) -> CellEstimate {
    let (x, wk, wg) = gk15_rule();
    let (cx, hx) = (0.5 * (c.x0 + c.x1), 0.5 * (c.x1 - c.x0));
    let (cy, hy) = (0.5 * (c.y0 + c.y1), 0.5 * (c.y1 - c.y0));
    let (mut kk, mut gk, mut kg) = (0.0, 0.0, 0.0);
    for i in 0..15 {
        let px = cx + hx * x[i];
        for j in 0..15 {
            let v = f(px, cy + hy * x[j]);
            kk += wk[i] * wk[j] * v;
            gk += wg[i] * wk[j] * v;
            kg += wk[i] * wg[j] * v;
        }
    }
    let area = hx * hy;
    let ex = ((kk - gk) * area).abs();
    let ey = ((kk - kg) * area).abs();
    CellEstimate {
        cell: c,
        value: kk * area,
        error: ex.max(ey),
        split_x: ex >= ey,
    }
}

/// Globally adaptive tensor Gauss-Kronrod cubature over a rectangle.
pub fn cubature<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    domain: Cell,
    abs_tol: f64,
    rel_tol: f64,
    max_cells: usize,
) -> Result<Integral> {
    if domain.x1 <= domain.x0 || domain.y1 <= domain.y0 {
        return Ok(Integral::default());
    }
    let mut cells = vec![tensor_gk15(&mut f, domain)];
    loop {
        let value: f64 = cells.iter().map(|c| c.value).sum();
        let error: f64 = cells.iter().map(|c| c.error).sum();
        if !value.is_finite() {
            return Err(Error::NonConverged {
                context: "cubature",
                value,
                error_estimate: error,
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                pieces: cells.len(),
            });
        }
        if cells.len() >= max_cells {
            return Err(Error::NonConverged {
                context: "cubature",
                value,
                error_estimate: error,
            });
        }
        let worst = cells.swap_remove(argmax(cells.iter().map(|c| c.error)));
        let c = worst.cell;
        let (a, b) = if worst.split_x {
            let m = 0.5 * (c.x0 + c.x1);
            (Cell { x1: m, ..c }, Cell { x0: m, ..c })
        } else {
            let m = 0.5 * (c.y0 + c.y1);
            (Cell { y1: m, ..c }, Cell { y0: m, ..c })
        };
        cells.push(tensor_gk15(&mut f, a));
        cells.push(tensor_gk15(&mut f, b));
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Rank-1 lattice on the unit cube `[0,1)^d` with `n` points.
pub fn lattice_points(n: usize, d: usize) -> Vec<Vec<f64>> {
    // Korobov generator (1, a, a^2, ..) mod n with a near n times the golden section.
    let mut a = ((n as f64) * 0.618_033_988_749_895) as u64 | 1;
    if a < 3 {
        a = 3;
    }
    let mut gen = vec![1u64; d];
    for k in 1..d {
        gen[k] = (gen[k - 1] * a) % n as u64;
    }
    (0..n)
        .map(|i| {
            gen.iter()
                .map(|&g| ((i as u64 * g) % n as u64) as f64 / n as f64)
                .collect()
        })
        .collect()
}

/// Nelder-Mead minimization from `x0` with initial step `step`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f(x0));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += x[i] / n as f64;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + t * (worst[i] - centroid[i]))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(-1.0, &worst);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0, &worst);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(0.5, &worst);
            let fc = f(&xc);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for k in 1..=n {
                    let x: Vec<f64> = (0..n)
                        .map(|i| best[i] + 0.5 * (simplex[k].0[i] - best[i]))
                        .collect();
                    let v = f(&x);
                    simplex[k] = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12, 500).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn cubature_of_kinked_function() {
        let r = cubature(
            |x: f64, y: f64| (x - y).abs(),
            Cell {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            },
            1e-9,
            1e-9,
            5000,
        )
        .unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_finds_minimum() {
        let (x, v) = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            1e-16,
            2000,
        );
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5);
    }
}
