//! Exact sums of roots of unity.
//!
//! An element `sum_k c_k zeta_n^k` of `Z[zeta_n]` is reduced modulo the
//! cyclotomic polynomial `Phi_n`, which gives a canonical integer vector.
//! This lets character sums be compared against integers with no rounding.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::arith::factorize;

fn poly_cache() -> &'static Mutex<HashMap<u64, Vec<i64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Divides `num` by the monic polynomial `den` exactly (coefficients low to high).
fn div_monic_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

/// Coefficients (low to high) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    assert!(n >= 1);
    if let Some(p) = poly_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut acc = vec![0i64; n as usize + 1];
    acc[0] = -1;
    acc[n as usize] = 1;
    for d in factorize(n).unwrap().divisors() {
        if d < n {
            acc = div_monic_exact(&acc, &cyclotomic_poly(d));
        }
    }
    poly_cache().lock().unwrap().insert(n, acc.clone());
    acc
}

/// Formal integer combination of `n`-th roots of unity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSum {
    n: u64,
    counts: Vec<i64>,
}

impl RootSum {
    pub fn new(n: u64) -> Self {
        assert!(n >= 1);
        Self {
            n,
            counts: vec![0; n as usize],
        }
    }

    /// Adds `mult * zeta_n^k`.
    pub fn add(&mut self, k: u64, mult: i64) {
        self.counts[(k % self.n) as usize] += mult;
    }

    /// Canonical coordinates in the power basis of `Z[zeta_n]`.
    pub fn reduce(&self) -> Vec<i64> {
        let phi = cyclotomic_poly(self.n);
        let deg = phi.len() - 1;
        let mut p = self.counts.clone();
        for i in (deg..p.len()).rev() {
            let c = p[i];
            if c != 0 {
                p[i] = 0;
                for (j, &f) in phi.iter().enumerate().take(deg) {
                    p[i - deg + j] -= c * f;
                }
            }
        }
        p.truncate(deg);
        p
    }

    /// The sum as an integer, if it is one.
    pub fn to_integer(&self) -> Option<i64> {
        let r = self.reduce();
        if r.iter().skip(1).all(|&c| c == 0) {
            Some(r.first().copied().unwrap_or(0))
        } else {
            None
        }
    }
}
