//! Dirichlet characters modulo `q`.
//!
//! The unit group `(Z/qZ)*` is split by the Chinese remainder theorem into
//! cyclic factors: one per odd prime power (and for `2`, `4`), and the pair
//! `<-1> x <5>` for `2^e` with `e >= 3`. A character is an exponent vector
//! over these factors; its value at `u` is `exp(2 pi i sum e_i l_i / ord_i)`
//! where `l_i` is the discrete log of `u` in factor `i`.

mod cyclotomic;
mod identities;

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{factorize, gcd, inv_mod, pow_mod, Factorization};
use crate::error::{Error, Result};

pub use cyclotomic::{cyclotomic_poly, RootSum};
pub use identities::{
    gauss_sum, primitive_sum_by_enumeration, primitive_sum_lemma1, signed_sum_by_enumeration,
    signed_sum_eq21, signed_sum_over_labels, sum_over_labels,
};

/// Largest modulus for which a group (and its residue tables) will be built.
pub const MAX_MODULUS: u64 = 10_000_000;

const NO_LOG: u32 = u32::MAX;

/// One cyclic factor of the unit group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicFactor {
    pub prime: u64,
    /// The prime power `p^e` this factor lives in.
    pub prime_power: u64,
    /// Generator, as a residue modulo `prime_power`.
    pub generator: u64,
    pub order: u64,
}

/// `e^{2 pi i k / n}`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub k: u64,
    pub n: u64,
}

impl RootOfUnity {
    pub fn to_complex(self) -> Complex64 {
        let theta = std::f64::consts::TAU * (self.k % self.n) as f64 / self.n as f64;
        let (s, c) = theta.sin_cos();
        Complex64::new(c, s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterLabel {
    /// Mixed-radix index of the exponent vector (factor 0 least significant).
    pub index: u64,
    pub exponents: Vec<u64>,
    /// 0 if `chi(-1) = 1`, 1 if `chi(-1) = -1`.
    pub parity: u8,
    pub conductor: u64,
    pub primitive: bool,
}

#[derive(Debug)]
pub struct CharacterGroup {
    q: u64,
    factorization: Factorization,
    factors: Vec<CyclicFactor>,
    /// For each prime power of `q`: `(p, e, p^e, range of factor indices)`.
    prime_powers: Vec<(u64, u32, u64, std::ops::Range<usize>)>,
    strides: Vec<u64>,
    order: u64,
    /// Least common multiple of the factor orders.
    exponent: u64,
    /// Flat exponent-vector index for every residue mod `q`, or `NO_LOG`.
    flat_logs: Vec<u32>,
    minus_one: u64,
    roots: OnceLock<Vec<Complex64>>,
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let f = factorize(p - 1).unwrap();
    (2..p)
        .find(|&g| f.primes().all(|r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("primes have primitive roots")
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn cyclic_log_table(modulus: u64, generator: u64, order: u64) -> Vec<u32> {
    let mut table = vec![NO_LOG; modulus as usize];
    let mut x = 1 % modulus;
    for j in 0..order {
        table[x as usize] = j as u32;
        x = x * generator % modulus;
    }
    table
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        if q > MAX_MODULUS {
            return Err(Error::MemoryBudget(format!(
                "modulus {q} exceeds the residue-table limit {MAX_MODULUS}"
            )));
        }
        let factorization = factorize(q)?;
        let mut factors = Vec::new();
        let mut local_logs = Vec::new();
        let mut prime_powers = Vec::new();

        for &(p, e) in &factorization.factors {
            let pe = p.pow(e);
            let start = factors.len();
            if p == 2 && e >= 3 {
                let big = 1u64 << (e - 2);
                let mut minus = vec![NO_LOG; pe as usize];
                let mut five = vec![NO_LOG; pe as usize];
                for beta in 0..big {
                    let v = pow_mod(5, beta, pe);
                    minus[v as usize] = 0;
                    five[v as usize] = beta as u32;
                    minus[(pe - v) as usize] = 1;
                    five[(pe - v) as usize] = beta as u32;
                }
                factors.push(CyclicFactor {
                    prime: 2,
                    prime_power: pe,
                    generator: pe - 1,
                    order: 2,
                });
                factors.push(CyclicFactor {
                    prime: 2,
                    prime_power: pe,
                    generator: 5,
                    order: big,
                });
                local_logs.push(minus);
                local_logs.push(five);
            } else {
                let order = (p - 1) * p.pow(e - 1);
                let generator = if p == 2 {
                    // 2: trivial group; 4: generated by 3 = -1.
                    pe - 1
                } else {
                    let g = primitive_root_mod_prime(p);
                    if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                        g + p
                    } else {
                        g
                    }
                };
                local_logs.push(cyclic_log_table(pe, generator, order));
                factors.push(CyclicFactor {
                    prime: p,
                    prime_power: pe,
                    generator: generator % pe,
                    order,
                });
            }
            prime_powers.push((p, e, pe, start..factors.len()));
        }

        let mut strides = Vec::with_capacity(factors.len());
        let mut order = 1u64;
        let mut exponent = 1u64;
        for f in &factors {
            strides.push(order);
            order *= f.order;
            exponent = lcm(exponent, f.order);
        }

        let mut flat_logs = vec![NO_LOG; q as usize];
        for u in 0..q {
            if gcd(u, q) != 1 {
                continue;
            }
            let mut idx = 0u64;
            for (i, f) in factors.iter().enumerate() {
                idx += local_logs[i][(u % f.prime_power) as usize] as u64 * strides[i];
            }
            flat_logs[u as usize] = idx as u32;
        }
        // (Z/1Z)* and (Z/2Z)* contain only the class of 1 = -1.
        let minus_one = (q - 1) % q.max(1);

        Ok(Self {
            q,
            factorization,
            factors,
            prime_powers,
            strides,
            order,
            exponent,
            flat_logs,
            minus_one,
            roots: OnceLock::new(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// `phi(q)`.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Exponent of the group: every character value is a power of `e(1/exponent)`.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    /// Flat index of the discrete-log vector of `u`, or `None` when `gcd(u, q) > 1`.
    #[inline]
    pub fn log_index(&self, u: u64) -> Option<u64> {
        match self.flat_logs[(u % self.q) as usize] {
            NO_LOG => None,
            idx => Some(idx as u64),
        }
    }

    /// Discrete-log vector of `u`.
    pub fn dlog(&self, u: u64) -> Option<Vec<u64>> {
        self.log_index(u).map(|idx| self.decode(idx))
    }

    /// Exponent vector encoded by a mixed-radix index.
    pub fn decode(&self, mut index: u64) -> Vec<u64> {
        self.factors
            .iter()
            .map(|f| {
                let e = index % f.order;
                index /= f.order;
                e
            })
            .collect()
    }

    pub fn encode(&self, exponents: &[u64]) -> u64 {
        exponents
            .iter()
            .zip(&self.strides)
            .zip(&self.factors)
            .map(|((&e, &s), f)| (e % f.order) * s)
            .sum()
    }

    /// Recovers `u mod q` from its discrete-log vector.
    pub fn exponentiate(&self, logs: &[u64]) -> u64 {
        let mut u = 1 % self.q;
        for (i, f) in self.factors.iter().enumerate() {
            let local = pow_mod(f.generator, logs[i], f.prime_power);
            u = u * self.crt_lift(local, f.prime_power) % self.q;
        }
        u
    }

    /// The residue mod `q` congruent to `v` mod `prime_power` and to 1 elsewhere.
    fn crt_lift(&self, v: u64, prime_power: u64) -> u64 {
        let rest = self.q / prime_power;
        if rest == 1 {
            return v % self.q;
        }
        let inv = inv_mod(rest % prime_power, prime_power).expect("coprime CRT moduli");
        let t = (v + prime_power - 1) % prime_power * inv % prime_power;
        (1 + rest * t) % self.q
    }

    /// Exact value of `chi` at `n` as a root of unity of order dividing the group exponent.
    #[inline]
    pub fn value_exact(&self, exponents: &[u64], n: u64) -> Option<RootOfUnity> {
        let idx = self.log_index(n)?;
        Some(RootOfUnity {
            k: self.value_exponent(exponents, idx),
            n: self.exponent,
        })
    }

    /// `k` with `chi(u) = e(k / exponent)`, for `u` with flat log index `log_idx`.
    #[inline]
    pub fn value_exponent(&self, exponents: &[u64], mut log_idx: u64) -> u64 {
        let mut k = 0u64;
        for (f, &e) in self.factors.iter().zip(exponents) {
            let l = log_idx % f.order;
            log_idx /= f.order;
            k = (k + (e * l % f.order) * (self.exponent / f.order)) % self.exponent;
        }
        k
    }

    /// `e(k / exponent)` for all `k`, computed once.
    pub fn roots(&self) -> &[Complex64] {
        self.roots.get_or_init(|| {
            (0..self.exponent)
                .map(|k| {
                    RootOfUnity {
                        k,
                        n: self.exponent,
                    }
                    .to_complex()
                })
                .collect()
        })
    }

    /// Parity of the character with the given exponent vector.
    pub fn parity_of(&self, exponents: &[u64]) -> u8 {
        let k = self
            .value_exact(exponents, self.minus_one)
            .expect("-1 is a unit")
            .k;
        if k == 0 {
            0
        } else {
            debug_assert_eq!(2 * k, self.exponent);
            1
        }
    }

    /// Conductor, computed prime power by prime power.
    pub fn conductor_of(&self, exponents: &[u64]) -> u64 {
        let mut f = 1u64;
        for (p, e, _, range) in &self.prime_powers {
            let (p, e) = (*p, *e);
            let ex = &exponents[range.clone()];
            let local = if p == 2 && e >= 3 {
                let (sign, five) = (ex[0], ex[1]);
                if five == 0 {
                    if sign == 0 {
                        1
                    } else {
                        4
                    }
                } else {
                    1u64 << (e - five.trailing_zeros())
                }
            } else {
                let j = ex[0];
                if j == 0 {
                    1
                } else if p == 2 {
                    4
                } else {
                    let mut v = 0u32;
                    let mut t = j;
                    while t.is_multiple_of(p) {
                        t /= p;
                        v += 1;
                    }
                    p.pow(e.saturating_sub(v).max(1))
                }
            };
            f *= local;
        }
        f
    }

    pub fn label(&self, index: u64) -> CharacterLabel {
        assert!(index < self.order, "character index out of range");
        let exponents = self.decode(index);
        let parity = self.parity_of(&exponents);
        let conductor = self.conductor_of(&exponents);
        CharacterLabel {
            index,
            exponents,
            parity,
            conductor,
            primitive: conductor == self.q,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = CharacterLabel> + '_ {
        (0..self.order).map(|i| self.label(i))
    }

    /// `(parity, primitive)` for every character index.
    pub fn classify_all(&self) -> Vec<(u8, bool)> {
        (0..self.order)
            .map(|i| {
                let ex = self.decode(i);
                (self.parity_of(&ex), self.conductor_of(&ex) == self.q)
            })
            .collect()
    }

    pub fn conjugate(&self, chi: &CharacterLabel) -> CharacterLabel {
        let ex: Vec<u64> = chi
            .exponents
            .iter()
            .zip(&self.factors)
            .map(|(&e, f)| (f.order - e) % f.order)
            .collect();
        self.label(self.encode(&ex))
    }

    /// The character `psi` mod `f` with `chi(u) = psi(u mod f)` for every unit `u`,
    /// if `chi` factors through `f`.
    pub fn restrict(
        &self,
        chi: &CharacterLabel,
        f: u64,
    ) -> Result<Option<(CharacterGroup, CharacterLabel)>> {
        if f == 0 || !self.q.is_multiple_of(f) {
            return Err(Error::OutOfRange(format!("{f} does not divide {}", self.q)));
        }
        let target = CharacterGroup::new(f)?;
        let mut ex = Vec::with_capacity(target.factors.len());
        for tf in &target.factors {
            let h = target.crt_lift(tf.generator, tf.prime_power);
            // Lift h mod f to a unit mod q: keep it mod the matching prime power of q.
            let qpp = self
                .prime_powers
                .iter()
                .find(|pp| pp.0 == tf.prime)
                .map(|pp| pp.2)
                .unwrap();
            let u = self.crt_lift(h % qpp, qpp);
            let v = self.value_exact(&chi.exponents, u).expect("lift is a unit");
            let num = v.k * tf.order;
            if !num.is_multiple_of(v.n) {
                return Ok(None);
            }
            ex.push(num / v.n % tf.order);
        }
        let psi = target.label(target.encode(&ex));
        for u in 1..self.q {
            if gcd(u, self.q) != 1 {
                continue;
            }
            let lhs = self.value_exact(&chi.exponents, u).unwrap();
            let rhs = target.value_exact(&psi.exponents, u % f).unwrap();
            if lhs.k * rhs.n != rhs.k * lhs.n {
                return Ok(None);
            }
        }
        Ok(Some((target, psi)))
    }
}

/// Builds the character group modulo `q`.
pub fn build_group(q: u64) -> Result<CharacterGroup> {
    CharacterGroup::new(q)
}

/// `chi(n)`; zero when `gcd(n, q) > 1`.
pub fn char_eval(g: &CharacterGroup, chi: &CharacterLabel, n: i64) -> Complex64 {
    let u = n.rem_euclid(g.modulus() as i64) as u64;
    match g.value_exact(&chi.exponents, u) {
        Some(root) => g.roots()[root.k as usize],
        None => Complex64::new(0.0, 0.0),
    }
}

/// `(parity, conductor, primitive)`.
pub fn classify(g: &CharacterGroup, chi: &CharacterLabel) -> (u8, u64, bool) {
    let conductor = g.conductor_of(&chi.exponents);
    (
        g.parity_of(&chi.exponents),
        conductor,
        conductor == g.modulus(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn build_examples() {
        let g5 = build_group(5).unwrap();
        assert_eq!(g5.factors().len(), 1);
        assert_eq!(g5.factors()[0].generator, 2);
        assert_eq!(g5.factors()[0].order, 4);

        let g8 = build_group(8).unwrap();
        let gens: Vec<_> = g8
            .factors()
            .iter()
            .map(|f| (f.generator, f.order))
            .collect();
        assert_eq!(gens, vec![(7, 2), (5, 2)]);

        let g1 = build_group(1).unwrap();
        assert!(g1.factors().is_empty());
        assert_eq!(g1.order(), 1);

        assert_eq!(build_group(0).unwrap_err(), Error::ZeroModulus);
        assert!(matches!(
            build_group(MAX_MODULUS + 1),
            Err(Error::MemoryBudget(_))
        ));
    }

    #[test]
    fn group_invariants() {
        for q in 1..=300u64 {
            let g = build_group(q).unwrap();
            assert_eq!(g.order(), crate::arith::euler_phi(q));
            let prod: u64 = g.factors().iter().map(|f| f.order).product();
            assert_eq!(prod, g.order());
            for u in 0..q {
                match g.dlog(u) {
                    Some(logs) => assert_eq!(g.exponentiate(&logs), u % q),
                    None => assert!(gcd(u, q) > 1),
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let g4 = build_group(4).unwrap();
        let nonprincipal = g4.label(1);
        assert!(close(
            char_eval(&g4, &nonprincipal, 3),
            Complex64::new(-1.0, 0.0)
        ));

        let g5 = build_group(5).unwrap();
        // exponent 1 on generator 2 gives chi(2) = i.
        let chi = g5.label(1);
        assert!(close(char_eval(&g5, &chi, 2), Complex64::new(0.0, 1.0)));
        assert!(close(char_eval(&g5, &chi, 3), Complex64::new(0.0, -1.0)));
        assert!(close(char_eval(&g5, &chi, 1), Complex64::new(1.0, 0.0)));
        assert!(close(char_eval(&g5, &chi, 10), Complex64::new(0.0, 0.0)));
        assert!(close(char_eval(&g5, &chi, -1), Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn classify_examples() {
        let g6 = build_group(6).unwrap();
        let chi = g6.labels().find(|c| c.index != 0).unwrap();
        assert_eq!(classify(&g6, &chi), (1, 3, false));

        for q in [1u64, 5, 12] {
            let g = build_group(q).unwrap();
            let (_, f, prim) = classify(&g, &g.label(0));
            assert_eq!(f, 1);
            assert_eq!(prim, q == 1);
        }

        let g4 = build_group(4).unwrap();
        assert_eq!(classify(&g4, &g4.label(1)), (1, 4, true));
    }

    #[test]
    fn completely_multiplicative_and_unimodular() {
        for q in [7u64, 8, 9, 12, 15, 16, 20, 24, 45] {
            let g = build_group(q).unwrap();
            for chi in g.labels() {
                for m in 1..30i64 {
                    for n in 1..30i64 {
                        let lhs = char_eval(&g, &chi, m * n);
                        let rhs = char_eval(&g, &chi, m) * char_eval(&g, &chi, n);
                        assert!(close(lhs, rhs));
                    }
                    let v = char_eval(&g, &chi, m);
                    if gcd(m as u64, q) == 1 {
                        assert!((v.norm() - 1.0).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn parity_matches_evaluation_at_minus_one() {
        for q in 1..=120u64 {
            let g = build_group(q).unwrap();
            for chi in g.labels() {
                let v = char_eval(&g, &chi, -1);
                let expected = if chi.parity == 0 { 1.0 } else { -1.0 };
                assert!(
                    close(v, Complex64::new(expected, 0.0)),
                    "q={q} chi={}",
                    chi.index
                );
            }
        }
    }

    #[test]
    fn orthogonality_exact() {
        for q in 1..=200u64 {
            let g = build_group(q).unwrap();
            let labels: Vec<_> = g.labels().collect();
            for u in 1..=q {
                if gcd(u, q) != 1 {
                    continue;
                }
                let mut sum = RootSum::new(g.exponent());
                for chi in &labels {
                    sum.add(g.value_exact(&chi.exponents, u).unwrap().k, 1);
                }
                let expected = if u % q == 1 % q { g.order() as i64 } else { 0 };
                assert_eq!(sum.to_integer(), Some(expected), "q={q} u={u}");
            }
        }
    }

    #[test]
    fn conductor_restriction_reinduces() {
        for q in 1..=100u64 {
            let g = build_group(q).unwrap();
            for chi in g.labels() {
                let (target, psi) = g.restrict(&chi, chi.conductor).unwrap().unwrap_or_else(|| {
                    panic!(
                        "q={q} chi={} does not factor through its conductor",
                        chi.index
                    )
                });
                assert!(
                    psi.primitive,
                    "restriction to the conductor must be primitive"
                );
                assert_eq!(target.modulus(), chi.conductor);
                // Minimality: no proper divisor of the conductor induces chi.
                for d in g.factorization().divisors() {
                    if chi.conductor % d == 0 && d < chi.conductor {
                        assert!(g.restrict(&chi, d).unwrap().is_none(), "q={q} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn primitive_count_matches_phi_star() {
        for q in 1..=1000u64 {
            let g = build_group(q).unwrap();
            let count = g.classify_all().iter().filter(|c| c.1).count() as u64;
            assert_eq!(count, crate::arith::phi_star(q).unwrap(), "q={q}");
        }
    }

    #[test]
    fn conjugate_inverts_values() {
        let g = build_group(63).unwrap();
        for chi in g.labels() {
            let bar = g.conjugate(&chi);
            for n in 1..63 {
                assert!(close(char_eval(&g, &bar, n), char_eval(&g, &chi, n).conj()));
            }
        }
    }

    mod props {
        use super::*;
        use crate::arith::gcd;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn characters_are_completely_multiplicative(q in 2u64..400, seed in any::<u64>(), m in 0i64..2000, n in 0i64..2000) {
                let g = CharacterGroup::new(q).unwrap();
                let chi = g.label(seed % g.order());
                let lhs = char_eval(&g, &chi, m * n);
                let rhs = char_eval(&g, &chi, m) * char_eval(&g, &chi, n);
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }

            #[test]
            fn orthogonality_over_characters(q in 2u64..300, m in 1u64..600) {
                let g = CharacterGroup::new(q).unwrap();
                let total: Complex64 = g.labels().map(|chi| char_eval(&g, &chi, m as i64)).sum();
                let want = if gcd(m, q) == 1 && m % q == 1 % q { g.order() as f64 } else { 0.0 };
                prop_assert!((total - Complex64::new(want, 0.0)).norm() < 1e-9);
            }

            #[test]
            fn conductor_divides_modulus(q in 2u64..2000, seed in any::<u64>()) {
                let g = CharacterGroup::new(q).unwrap();
                let chi = g.label(seed % g.order());
                prop_assert_eq!(q % chi.conductor, 0);
                prop_assert_eq!(chi.primitive, chi.conductor == q);
            }
        }
    }
}
