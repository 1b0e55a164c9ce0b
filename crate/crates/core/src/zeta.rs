//! The Riemann zeta function and its derivatives for real arguments `s > 1`,
//! by Euler-Maclaurin summation of `x^-s (log x)^j`.
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

/// `B_{2k} / (2k)!` for `k = 1..=8`.
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Summation switches to the integral expansion at this index.
const CUT: u64 = 40;

/// `x^-a * P(log x)` with `P` in ascending powers.
#[derive(Clone)]
struct LogPower {
    a: f64,
    p: Vec<f64>,
}

impl LogPower {
    fn eval(&self, x: f64) -> f64 {
        let l = x.ln();
        self.p.iter().rev().fold(0.0, |acc, &c| acc * l + c) * x.powf(-self.a)
    }

    /// `d/dx [x^-a P(L)] = x^-(a+1) (P'(L) - a P(L))`.
    fn derivative(&self) -> Self {
        let mut p: Vec<f64> = self.p.iter().map(|&c| -self.a * c).collect();
        for (i, &c) in self.p.iter().enumerate().skip(1) {
            p[i - 1] += i as f64 * c;
        }
        Self { a: self.a + 1.0, p }
    }
}

/// `int_M^inf x^-s (log x)^j dx = e^{-(s-1)L} sum_i j!/i! L^i / (s-1)^{j-i+1}`, `L = log M`.
fn tail_integral(s: f64, j: u32, m: f64) -> f64 {
    let (l, r) = (m.ln(), s - 1.0);
    let sum: f64 = (0..=j)
        .map(|i| factorial(j) / factorial(i) * l.powi(i as i32) / r.powi((j - i + 1) as i32))
        .sum();
    sum * (-r * l).exp()
}

fn factorial(j: u32) -> f64 {
    (1..=j).map(|k| k as f64).product()
}

/// `sum_{n >= n0} (log n)^j n^-s` for real `s > 1` and `n0 >= 1`.
pub fn zeta_tail(s: f64, j: u32, n0: u64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain {
            what: "zeta argument",
            re: s,
            im: 0.0,
        });
    }
    let n0 = n0.max(1);
    let m = n0.max(CUT);
    let mut p = vec![0.0; j as usize + 1];
    p[j as usize] = 1.0;
    let f = LogPower { a: s, p };
    let direct: f64 = (n0..m).map(|n| f.eval(n as f64)).sum();
    let mf = m as f64;
    let mut em = tail_integral(s, j, mf) + 0.5 * f.eval(mf);
    let mut d = f.derivative();
    for &b in &BERNOULLI_OVER_FACT {
        em -= b * d.eval(mf);
        d = d.derivative().derivative();
    }
    Ok(direct + em)
}

/// `zeta(s)` for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    zeta_tail(s, 0, 1)
}

/// `zeta''(s) = sum (log n)^2 n^-s` for real `s > 1`.
pub fn zeta_second_derivative(s: f64) -> Result<f64> {
    zeta_tail(s, 2, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) {
        assert!((a - b).abs() <= rel * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn zeta_values() {
        close(zeta(2.0).unwrap(), PI * PI / 6.0, 1e-14);
        close(zeta(3.0).unwrap(), 1.2020569031595942, 1e-14);
        close(zeta(1.05).unwrap(), 20.580844302036985, 1e-12);
        close(zeta(1.2).unwrap(), 5.591582441177752, 1e-13);
        assert!(zeta(1.0).is_err() && zeta(0.5).is_err());
    }

    #[test]
    fn second_derivative_and_tails() {
        close(
            zeta_second_derivative(2.0).unwrap(),
            1.989280234298901,
            1e-13,
        );
        close(
            zeta_second_derivative(3.0).unwrap(),
            0.23974691730538718,
            1e-13,
        );
        close(
            zeta_second_derivative(1.05).unwrap(),
            15999.990209835168,
            1e-12,
        );
        close(zeta_tail(2.0, 0, 65).unwrap(), 0.01550356543933893, 1e-13);
        close(zeta_tail(2.5, 2, 65).unwrap(), 0.03063639249279865, 1e-13);
        close(zeta_tail(1.2, 2, 65).unwrap(), 236.91634097812986, 1e-12);
    }
}
