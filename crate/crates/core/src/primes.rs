//! Primes and factorization of `u64` indices.
use alloc::vec::Vec;

const SMALL_LIMIT: usize = 1024;

const fn sieve_table() -> [u16; 172] {
    let mut composite = [false; SMALL_LIMIT];
    let mut out = [0u16; 172];
    let mut count = 0;
    let mut i = 2;
    while i < SMALL_LIMIT {
        if !composite[i] {
            out[count] = i as u16;
            count += 1;
            let mut j = i * i;
            while j < SMALL_LIMIT {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    out
}

/// All 172 primes below 1024.
pub const SMALL_PRIMES: [u16; 172] = sieve_table();

/// The first `m` primes.
pub fn first_primes(m: usize) -> Vec<u64> {
    if m <= SMALL_PRIMES.len() {
        return SMALL_PRIMES[..m].iter().map(|&p| p as u64).collect();
    }
    let mut out: Vec<u64> = SMALL_PRIMES.iter().map(|&p| p as u64).collect();
    let mut c = *out.last().unwrap() + 2;
    while out.len() < m {
        if is_prime(c) {
            out.push(c);
        }
        c += 2;
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES[..12] {
        let p = p as u64;
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Brent's variant of Pollard rho; `n` is odd, composite, without small factors.
fn rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn split(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = rho(n);
    split(d, out);
    split(n / d, out);
}

/// Prime factorization as ascending `(prime, exponent)` pairs; `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize(0)");
    let mut out = Vec::new();
    for &p in SMALL_PRIMES.iter() {
        let p = p as u64;
        if p * p > n {
            break;
        }
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut big = Vec::new();
        split(n, &mut big);
        big.sort_unstable();
        for p in big {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

/// Largest prime factor, with `1` for `n = 1`.
pub fn largest_prime_factor(n: u64) -> u64 {
    factorize(n).last().map_or(1, |&(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_ends() {
        assert_eq!(SMALL_PRIMES[0], 2);
        assert_eq!(SMALL_PRIMES[171], 1021);
        assert_eq!(first_primes(180)[179], 1069);
    }

    #[test]
    fn factorizations_multiply_back() {
        for n in [
            1u64,
            2,
            12,
            97,
            1 << 63,
            600851475143,
            18446744073709551557,
            4295098369,
        ] {
            let f = factorize(n);
            let prod = f
                .iter()
                .fold(1u128, |acc, &(p, e)| acc * (p as u128).pow(e));
            assert_eq!(prod, n as u128);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
        assert_eq!(factorize(4295098369), alloc::vec![(65537, 2)]);
    }
}
