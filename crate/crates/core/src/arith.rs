//! Exact integer arithmetic and the multiplicative functions used throughout.

use serde::Serialize;

use crate::error::{Error, Result};

/// Prime-power decomposition of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub n: u64,
    /// `(p, e)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Multiplicative (or additive) arithmetic function selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithFn {
    Mobius,
    EulerPhi,
    Omega,
    DivisorCount,
    TwoPowOmega,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

const SMALL_PRIME_BOUND: u64 = 1 << 12;

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn collect_large_factors(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    collect_large_factors(d, out);
    collect_large_factors(n / d, out);
}

/// Prime factorization by trial division, falling back to Pollard rho for
/// cofactors without small prime factors.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    if n > i64::MAX as u64 {
        return Err(Error::OutOfRange(format!("{n} exceeds 2^63 - 1")));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p < SMALL_PRIME_BOUND && p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        let mut large = Vec::new();
        collect_large_factors(m, &mut large);
        large.sort_unstable();
        for p in large {
            match factors.last_mut() {
                Some((last, e)) if *last == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Ok(Factorization { n, factors })
}

/// Value of `kind` at `f.n`.
pub fn arith_fn_of(kind: ArithFn, f: &Factorization) -> i64 {
    match kind {
        ArithFn::Mobius => {
            if f.is_squarefree() {
                if f.omega().is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            } else {
                0
            }
        }
        ArithFn::EulerPhi => f.euler_phi() as i64,
        ArithFn::Omega => f.omega() as i64,
        ArithFn::DivisorCount => f.factors.iter().map(|&(_, e)| e as i64 + 1).product(),
        ArithFn::TwoPowOmega => 1i64 << f.omega(),
    }
}

pub fn arith_fn(kind: ArithFn, n: u64) -> Result<i64> {
    Ok(arith_fn_of(kind, &factorize(n)?))
}

pub fn mobius(n: u64) -> i64 {
    arith_fn(ArithFn::Mobius, n).expect("mobius of zero")
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).expect("phi of zero").euler_phi()
}

/// Number of primitive characters modulo `f.n`.
pub fn phi_star_of(f: &Factorization) -> u64 {
    f.factors
        .iter()
        .map(|&(p, e)| {
            if e == 1 {
                p - 2
            } else {
                // p^e (1 - 1/p)^2 = p^(e-2) (p - 1)^2
                p.pow(e - 2) * (p - 1) * (p - 1)
            }
        })
        .product()
}

pub fn phi_star(q: u64) -> Result<u64> {
    Ok(phi_star_of(&factorize(q)?))
}

/// `sum_{k | q} phi(k) mu(q/k)`, the Möbius-inversion form of `phi_star`.
pub fn phi_star_by_inversion(q: u64) -> Result<i64> {
    let f = factorize(q)?;
    Ok(f.divisors()
        .into_iter()
        .map(|k| euler_phi(k) as i64 * mobius(q / k))
        .sum())
}

/// Sieve of smallest prime factors supporting bulk multiplicative scans.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub const MAX: u64 = 100_000_000;

    pub fn new(limit: u64) -> Result<Self> {
        if limit > Self::MAX {
            return Err(Error::ScaleCap(format!(
                "sieve limit {limit} exceeds {}",
                Self::MAX
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Factorization of `n` by repeated smallest-prime-factor lookup.
    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.limit(), "{n} outside sieve range");
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as u64;
            match factors.last_mut() {
                Some((last, e)) if *last == p => *e += 1,
                _ => factors.push((p, 1)),
            }
            m /= p as usize;
        }
        Factorization { n, factors }
    }

    /// `omega(n)` for every `0 <= n <= limit` (`omega(0)` reported as 0).
    pub fn omega_table(&self) -> Vec<u8> {
        let n = self.spf.len();
        let mut omega = vec![0u8; n];
        for m in 2..n {
            let p = self.spf[m] as usize;
            let r = m / p;
            omega[m] = if r.is_multiple_of(p) {
                omega[r]
            } else {
                omega[r] + 1
            };
        }
        omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(1009).unwrap().factors, vec![(1009, 1)]);
        assert_eq!(factorize(0), Err(Error::ZeroModulus));
    }

    #[test]
    fn factorize_large_semiprime() {
        let p = 4_294_967_291u64;
        let q = 2_147_483_647u64;
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors, vec![(q, 1), (p, 1)]);
        let big = (1u64 << 61) - 1;
        assert_eq!(factorize(big).unwrap().factors, vec![(big, 1)]);
    }

    #[test]
    fn arith_fn_examples() {
        assert_eq!(arith_fn(ArithFn::Mobius, 30).unwrap(), -1);
        assert_eq!(arith_fn(ArithFn::DivisorCount, 6).unwrap(), 4);
        assert_eq!(arith_fn(ArithFn::TwoPowOmega, 12).unwrap(), 4);
        assert_eq!(arith_fn(ArithFn::Mobius, 12).unwrap(), 0);
        assert_eq!(arith_fn(ArithFn::EulerPhi, 1).unwrap(), 1);
    }

    #[test]
    fn phi_star_examples() {
        assert_eq!(phi_star(5).unwrap(), 3);
        assert_eq!(phi_star(8).unwrap(), 2);
        assert_eq!(phi_star(6).unwrap(), 0);
        assert_eq!(phi_star(1).unwrap(), 1);
    }

    #[test]
    fn phi_star_matches_inversion_formula() {
        for q in 1..=10_000u64 {
            let direct = phi_star(q).unwrap();
            assert_eq!(direct as i64, phi_star_by_inversion(q).unwrap(), "q = {q}");
            assert_eq!(direct == 0, q % 4 == 2, "q = {q}");
        }
    }

    #[test]
    fn multiplicativity_on_coprime_pairs() {
        for m in 1..=1000u64 {
            for n in (1..=1000u64).step_by(7) {
                if gcd(m, n) != 1 {
                    continue;
                }
                assert_eq!(
                    phi_star(m * n).unwrap(),
                    phi_star(m).unwrap() * phi_star(n).unwrap()
                );
                for kind in [
                    ArithFn::EulerPhi,
                    ArithFn::DivisorCount,
                    ArithFn::Mobius,
                    ArithFn::TwoPowOmega,
                ] {
                    assert_eq!(
                        arith_fn(kind, m * n).unwrap(),
                        arith_fn(kind, m).unwrap() * arith_fn(kind, n).unwrap(),
                        "{kind:?} at ({m}, {n})"
                    );
                }
            }
        }
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let sieve = Sieve::new(5000).unwrap();
        let omega = sieve.omega_table();
        for n in 1..=5000u64 {
            let f = factorize(n).unwrap();
            assert_eq!(sieve.factorize(n), f);
            assert_eq!(omega[n as usize] as u32, f.omega());
        }
    }

    #[test]
    fn inverse_and_isqrt() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
    }

    proptest! {
        #[test]
        fn factorization_product_recovers_n(n in 1u64..(1u64 << 40)) {
            let f = factorize(n).unwrap();
            let prod: u64 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.factors.iter().all(|&(p, _)| is_prime(p)));
        }
    }
}
