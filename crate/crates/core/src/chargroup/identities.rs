//! Closed-form character sums over primitive characters, each paired with
//! an exact brute-force enumeration over the group.

use num_complex::Complex64;
use num_rational::Rational64;

use super::{CharacterGroup, CharacterLabel, RootSum};
use crate::arith::{euler_phi, factorize, gcd, mobius};
use crate::error::{Error, Result};
use crate::summation::CompensatedComplex;

/// `sum_{k | d} phi(k) mu(q/k)` for `d | q`.
fn inversion_sum(q: u64, d: u64) -> i64 {
    factorize(d)
        .unwrap()
        .divisors()
        .into_iter()
        .map(|k| euler_phi(k) as i64 * mobius(q / k))
        .sum()
}

/// `gcd(q, |x|)` with the convention `gcd(q, 0) = q`.
fn gcd_with(q: u64, x: i64) -> u64 {
    gcd(q, x.unsigned_abs())
}

fn require_coprime(q: u64, x: i64, what: &str) -> Result<()> {
    if gcd_with(q, x) != 1 {
        return Err(Error::NotCoprime {
            what: format!("{what} = {x}"),
            q,
        });
    }
    Ok(())
}

/// Sum of `chi(r)` over primitive characters mod `q`, by Möbius inversion:
/// `sum_{k | (q, r-1)} phi(k) mu(q/k)`.
pub fn primitive_sum_lemma1(q: u64, r: i64) -> Result<i64> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    require_coprime(q, r, "r")?;
    Ok(inversion_sum(q, gcd_with(q, r - 1)))
}

/// Sum of `chi(m) conj(chi(n))` over primitive characters of parity `parity`,
/// in closed form. Returned as an exact half-integer.
pub fn signed_sum_eq21(q: u64, m: i64, n: i64, parity: u8) -> Result<Rational64> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    require_coprime(q, m, "m")?;
    require_coprime(q, n, "n")?;
    let diff = inversion_sum(q, gcd_with(q, (m - n).abs()));
    let plus = inversion_sum(q, gcd_with(q, m + n));
    let sign = if parity.is_multiple_of(2) { 1 } else { -1 };
    Ok(Rational64::new(diff + sign * plus, 2))
}

/// Exact enumeration of `sum chi(r)` over primitive `chi` mod `q`.
pub fn primitive_sum_by_enumeration(g: &CharacterGroup, r: i64) -> Result<i64> {
    let primitive: Vec<CharacterLabel> = g.labels().filter(|c| c.primitive).collect();
    sum_over_labels(g, &primitive, r)
}

/// `sum chi(r)` over the given characters, exactly.
pub fn sum_over_labels(g: &CharacterGroup, labels: &[CharacterLabel], r: i64) -> Result<i64> {
    let q = g.modulus();
    require_coprime(q, r, "r")?;
    let u = r.rem_euclid(q as i64) as u64;
    let mut sum = RootSum::new(g.exponent());
    for chi in labels {
        sum.add(g.value_exact(&chi.exponents, u).unwrap().k, 1);
    }
    Ok(sum
        .to_integer()
        .expect("sum over a Galois-stable set is rational"))
}

/// Exact enumeration of `sum chi(m) conj(chi(n))` over primitive `chi` with
/// `chi(-1) = (-1)^parity`.
pub fn signed_sum_by_enumeration(
    g: &CharacterGroup,
    m: i64,
    n: i64,
    parity: u8,
) -> Result<Rational64> {
    let primitive: Vec<CharacterLabel> = g.labels().filter(|c| c.primitive).collect();
    signed_sum_over_labels(g, &primitive, m, n, parity)
}

/// `sum chi(m) conj(chi(n))` over the given characters of parity `parity`, exactly.
pub fn signed_sum_over_labels(
    g: &CharacterGroup,
    labels: &[CharacterLabel],
    m: i64,
    n: i64,
    parity: u8,
) -> Result<Rational64> {
    let q = g.modulus();
    require_coprime(q, m, "m")?;
    require_coprime(q, n, "n")?;
    let um = m.rem_euclid(q as i64) as u64;
    let un = n.rem_euclid(q as i64) as u64;
    let e = g.exponent();
    let mut sum = RootSum::new(e);
    for chi in labels.iter().filter(|c| c.parity == parity % 2) {
        let a = g.value_exact(&chi.exponents, um).unwrap().k;
        let b = g.value_exact(&chi.exponents, un).unwrap().k;
        sum.add((a + e - b) % e, 1);
    }
    Ok(Rational64::from_integer(
        sum.to_integer()
            .expect("sum over a Galois-stable set is rational"),
    ))
}

/// `tau(chi) = sum_{a mod q} chi(a) e(a/q)`.
pub fn gauss_sum(g: &CharacterGroup, chi: &CharacterLabel) -> Complex64 {
    let q = g.modulus();
    let roots = g.roots();
    let mut acc = CompensatedComplex::new();
    for a in 0..q {
        if let Some(v) = g.value_exact(&chi.exponents, a) {
            let theta = std::f64::consts::TAU * a as f64 / q as f64;
            let (s, c) = theta.sin_cos();
            acc.add(roots[v.k as usize] * Complex64::new(c, s));
        }
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::build_group;

    #[test]
    fn lemma1_examples() {
        assert_eq!(primitive_sum_lemma1(5, 1).unwrap(), 3);
        assert_eq!(primitive_sum_lemma1(4, 3).unwrap(), -1);
        assert_eq!(primitive_sum_lemma1(5, 2).unwrap(), -1);
        assert!(matches!(
            primitive_sum_lemma1(6, 4),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn signed_sum_examples() {
        assert_eq!(
            signed_sum_eq21(5, 2, 3, 0).unwrap(),
            Rational64::from_integer(1)
        );
        let split = signed_sum_eq21(5, 1, 1, 0).unwrap() + signed_sum_eq21(5, 1, 1, 1).unwrap();
        assert_eq!(split, Rational64::from_integer(3));
        assert_eq!(
            signed_sum_eq21(4, 1, 3, 1).unwrap(),
            Rational64::from_integer(-1)
        );
        assert!(signed_sum_eq21(10, 2, 3, 0).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let g5 = build_group(5).unwrap();
        assert_eq!(primitive_sum_by_enumeration(&g5, 2).unwrap(), -1);
        assert_eq!(
            signed_sum_by_enumeration(&g5, 2, 3, 0).unwrap(),
            Rational64::from_integer(1)
        );
        let g4 = build_group(4).unwrap();
        assert_eq!(primitive_sum_by_enumeration(&g4, 3).unwrap(), -1);
    }

    #[test]
    fn gauss_sum_examples() {
        let g4 = build_group(4).unwrap();
        let tau = gauss_sum(&g4, &g4.label(1));
        assert!((tau - Complex64::new(0.0, 2.0)).norm() < 1e-12);

        let g1 = build_group(1).unwrap();
        assert!((gauss_sum(&g1, &g1.label(0)) - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let g7 = build_group(7).unwrap();
        for chi in g7.labels().filter(|c| c.primitive) {
            assert!((gauss_sum(&g7, &chi).norm() - 7f64.sqrt()).abs() < 1e-10);
        }
    }
}
