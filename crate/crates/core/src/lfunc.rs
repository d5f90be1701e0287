//! Per-character central values.
//!
//! `A(chi) = sum_{a,b >= 1} chi(a) conj(chi(b)) W_a(pi ab / q) / sqrt(ab)` is
//! split at `ab <= Z = q / 2^omega(q)` into a head `B(chi)` and a tail `C(chi)`.
//! For primitive `chi`, `2 A(chi)` equals `|L(1/2, chi)|^2`, which is checked
//! against an independent Hurwitz-zeta evaluation of `L(1/2, chi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::chargroup::{CharacterGroup, CharacterLabel};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::pairs::{collect_pairs, Pair};
use crate::summation::{Compensated, CompensatedComplex};

/// Kernel weights `W_a(pi m / q) / sqrt(m)` for `m <= cutoff`, both parities,
/// plus the head/tail split point.
#[derive(Debug, Clone)]
pub struct SmoothedWeights {
    pub q: u64,
    pub cutoff: u64,
    two_pow_omega: u64,
    weights: [Vec<f64>; 2],
}

impl SmoothedWeights {
    pub fn new(q: u64, kernel: &Kernel, cfg: &PipelineConfig) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        let cutoff = cfg.cutoff(q);
        for parity in 0..2 {
            let tail = kernel.eval(parity, PI * cutoff as f64 / q as f64)?.abs();
            if tail > cfg.tail_tolerance {
                return Err(Error::Truncation {
                    cutoff,
                    tail,
                    tolerance: cfg.tail_tolerance,
                });
            }
        }
        let omega = crate::arith::factorize(q)?.omega();
        Ok(Self {
            q,
            cutoff,
            two_pow_omega: 1 << omega,
            weights: [
                kernel.scaled_table(0, q, cutoff)?,
                kernel.scaled_table(1, q, cutoff)?,
            ],
        })
    }

    /// `W_parity(pi m / q) / sqrt(m)`.
    #[inline]
    pub fn weight(&self, parity: u8, m: u64) -> f64 {
        self.weights[parity as usize][m as usize]
    }

    pub fn table(&self, parity: u8) -> &[f64] {
        &self.weights[parity as usize]
    }

    /// `Z = q / 2^omega(q)`.
    pub fn split_point(&self) -> f64 {
        self.q as f64 / self.two_pow_omega as f64
    }

    /// `m <= Z`, decided in integers.
    #[inline]
    pub fn in_head(&self, m: u64) -> bool {
        (m as u128) * (self.two_pow_omega as u128) <= self.q as u128
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralValue {
    pub q: u64,
    pub character: CharacterLabel,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Largest imaginary part left in the accumulated `A`, `B`, `C`.
    pub imag_residue: f64,
    /// `L(1/2, chi)` as `(re, im)`, for primitive characters with `q >= 3`.
    pub l_oracle: Option<(f64, f64)>,
    pub cutoff: u64,
}

impl CentralValue {
    pub fn l_oracle_complex(&self) -> Option<Complex64> {
        self.l_oracle.map(|(re, im)| Complex64::new(re, im))
    }

    /// `| |L|^2 - 2A | / (1 + |L|^2)`.
    pub fn lemma2_discrepancy(&self) -> Option<f64> {
        self.l_oracle_complex().map(|l| {
            let l2 = l.norm_sqr();
            (l2 - 2.0 * self.a).abs() / (1.0 + l2)
        })
    }
}

/// Naive per-character evaluator: loops over every coprime pair for each character.
pub struct CentralEvaluator<'g> {
    group: &'g CharacterGroup,
    weights: SmoothedWeights,
    pairs: Vec<Pair>,
}

impl<'g> CentralEvaluator<'g> {
    pub fn new(group: &'g CharacterGroup, kernel: &Kernel, cfg: &PipelineConfig) -> Result<Self> {
        let q = group.modulus();
        let weights = SmoothedWeights::new(q, kernel, cfg)?;
        let pairs = collect_pairs(q, weights.cutoff);
        Ok(Self {
            group,
            weights,
            pairs,
        })
    }

    pub fn with_weights(group: &'g CharacterGroup, weights: SmoothedWeights) -> Self {
        let pairs = collect_pairs(group.modulus(), weights.cutoff);
        Self {
            group,
            weights,
            pairs,
        }
    }

    pub fn weights(&self) -> &SmoothedWeights {
        &self.weights
    }

    /// `(B, C)` as complex accumulations, in pair order.
    fn head_tail(&self, chi: &CharacterLabel) -> (Complex64, Complex64) {
        let g = self.group;
        let q = g.modulus();
        let n = g.exponent();
        let roots = g.roots();
        let exps: Vec<u64> = (0..q)
            .map(|u| match g.log_index(u) {
                Some(idx) => g.value_exponent(&chi.exponents, idx),
                None => u64::MAX,
            })
            .collect();
        let table = self.weights.table(chi.parity);
        let mut head = CompensatedComplex::new();
        let mut tail = CompensatedComplex::new();
        for p in &self.pairs {
            let ka = exps[(p.a % q) as usize];
            let kb = exps[(p.b % q) as usize];
            let z = roots[((ka + n - kb) % n) as usize] * table[p.m as usize];
            if self.weights.in_head(p.m) {
                head.add(z);
            } else {
                tail.add(z);
            }
        }
        (head.value(), tail.value())
    }

    pub fn evaluate(&self, chi: &CharacterLabel) -> Result<CentralValue> {
        let (b, c) = self.head_tail(chi);
        let a = b + c;
        let imag_residue = a.im.abs().max(b.im.abs()).max(c.im.abs());
        let l_oracle = if chi.primitive && self.group.modulus() >= 3 {
            let l = l_half_oracle(self.group, chi)?;
            Some((l.re, l.im))
        } else {
            None
        };
        Ok(CentralValue {
            q: self.group.modulus(),
            character: chi.clone(),
            a: a.re,
            b: b.re,
            c: c.re,
            imag_residue,
            l_oracle,
            cutoff: self.weights.cutoff,
        })
    }

    /// `(B, C)` real parts only, skipping the oracle.
    pub fn head_tail_real(&self, chi: &CharacterLabel) -> (f64, f64) {
        let (b, c) = self.head_tail(chi);
        (b.re, c.re)
    }
}

/// `A`, `B`, `C` for one character, from scratch.
pub fn abc_values(
    group: &CharacterGroup,
    chi: &CharacterLabel,
    cfg: &PipelineConfig,
) -> Result<CentralValue> {
    let kernel = Kernel::new(cfg.kernel)?;
    CentralEvaluator::new(group, &kernel, cfg)?.evaluate(chi)
}

/// `B_{2k}` for `k = 1..=12`.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const HURWITZ_DIRECT_TERMS: u32 = 24;

/// Hurwitz zeta `zeta(s, a)` for `0 < s < 1`, `0 < a <= 1`, by Euler–Maclaurin
/// summation after `24` direct terms.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::OutOfRange(format!(
            "hurwitz_zeta needs 0 < s < 1, got {s}"
        )));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "hurwitz_zeta needs 0 < a <= 1, got {a}"
        )));
    }
    let mut acc = Compensated::new();
    for n in 0..HURWITZ_DIRECT_TERMS {
        acc.add((n as f64 + a).powf(-s));
    }
    let big = HURWITZ_DIRECT_TERMS as f64 + a;
    acc.add(big.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * big.powf(-s));
    // Term k: B_{2k} / (2k)! * s (s+1) ... (s+2k-2) * big^{-s-2k+1}.
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = big.powf(-s - 1.0);
    let inv_big2 = 1.0 / (big * big);
    for (k, &b2k) in BERNOULLI.iter().enumerate() {
        if k > 0 {
            let j = 2 * k as u32;
            rising *= (s + j as f64 - 1.0) * (s + j as f64);
            factorial *= (j + 1) as f64 * (j + 2) as f64;
            power *= inv_big2;
        }
        acc.add(b2k / factorial * rising * power);
    }
    Ok(acc.value())
}

/// `L(1/2, chi) = q^{-1/2} sum_{a=1}^{q} chi(a) zeta(1/2, a/q)` for primitive `chi`.
pub fn l_half_oracle(group: &CharacterGroup, chi: &CharacterLabel) -> Result<Complex64> {
    let q = group.modulus();
    if q < 3 {
        return Err(Error::OutOfRange(format!("oracle needs q >= 3, got {q}")));
    }
    let conductor = group.conductor_of(&chi.exponents);
    if conductor != q {
        return Err(Error::NotPrimitive { q, conductor });
    }
    let roots = group.roots();
    let mut acc = CompensatedComplex::new();
    for a in 1..q {
        if let Some(v) = group.value_exact(&chi.exponents, a) {
            acc.add(roots[v.k as usize] * hurwitz_zeta(0.5, a as f64 / q as f64)?);
        }
    }
    Ok(acc.value() / (q as f64).sqrt())
}
