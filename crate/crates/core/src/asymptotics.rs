//! Main terms and the lemma-level sums behind them.
//!
//! Everything here is a finite computation: closed-form leading terms, the
//! diagonal `M` summed two ways, and exhaustive or sieve-backed versions of
//! the counting and divisor-sum estimates, each reported next to its envelope.
//! Implied constants are measured, not proved; the frozen values below are
//! empirical maxima over the stated grids with a safety margin.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::arith::{factorize, gcd, inv_mod, phi_star_of, Factorization, Sieve};
use crate::chargroup::CharacterGroup;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::lfunc::CentralEvaluator;
use crate::summation::Compensated;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const ZETA_TWO: f64 = 1.644_934_066_848_226_4;

/// Largest number of `(a, b)` pairs the quadruple enumeration accepts.
pub const DIRECT_PAIR_CAP: usize = 20_000;
/// Largest `Z1`, `Z2` for the exhaustive quadruple count.
pub const LEMMA3_MAX_Z: u64 = 1000;
/// Largest `x` (and `q`) for the sieve-backed divisor sums.
pub const LEMMA5_MAX_X: u64 = 10_000_000;
/// Largest `q` for the per-character error sum.
pub const ERROR_SUM_MAX_Q: u64 = 200;

/// Empirical constants, each the measured maximum over its grid rounded up.
pub mod frozen {
    /// `count / ((Z1 Z2 / k) (log Z1 Z2)^3)` over `k <= 50`, `Z1, Z2 <= 200`, `Z1 Z2 >= 25`
    /// (measured maximum 0.655).
    pub const LEMMA3_RATIO: f64 = 0.7;
    /// Largest count on the same grid with `Z1 Z2 < 25`.
    pub const LEMMA3_SMALL_ALLOWANCE: u64 = 200;
    /// `sum1 (q / phi(q))^2 / (log q)^2` over primorials up to `30030` (maximum 8.33 at `q = 2`).
    pub const LEMMA5_FIRST_RATIO: f64 = 8.4;
    /// `c_moment_all / (q (phi(q)/q)^5 (omega log q)^2 + q (log q)^3)` over `3 <= q <= 200`
    /// (maximum 6.7e-4 at `q = 15`).
    pub const PROP2_RATIO: f64 = 1e-3;
    /// `|E| / (q (log q)^3)` over `3 <= q <= 200` (maximum 5.0e-3 at `q = 143`).
    pub const ERROR_SUM_RATIO: f64 = 1e-2;
    /// `sum2 / main2` at `x = 10^6`.
    pub const LEMMA5_SECOND_RATIOS: [(u64, f64); 3] = [
        (1, 1.708_182_514_576_625_8),
        (6, 2.509_873_832_557_979),
        (30, 2.870_095_306_957_561_7),
    ];
}

fn local_factor(f: &Factorization) -> f64 {
    f.primes()
        .map(|p| {
            let r = 1.0 / p as f64;
            (1.0 - r).powi(3) / (1.0 + r)
        })
        .product()
}

/// `(phi*(q) / 2 pi^2) prod_{p | q} (1 - 1/p)^3 / (1 + 1/p) (log q)^4`.
pub fn theorem_main_term(q: u64) -> Result<f64> {
    if q < 3 {
        return Err(Error::OutOfRange(format!(
            "main term needs q >= 3, got {q}"
        )));
    }
    let f = factorize(q)?;
    let phi_star = phi_star_of(&f) as f64;
    Ok(phi_star / (2.0 * PI * PI) * local_factor(&f) * (q as f64).ln().powi(4))
}

/// `Z = q / 2^omega(q)` as a float.
pub fn split_point(f: &Factorization) -> f64 {
    f.n as f64 / (1u64 << f.omega()) as f64
}

/// Largest integer `m` with `m <= Z`.
fn split_floor(f: &Factorization) -> u64 {
    f.n >> f.omega()
}

/// `W_a(pi m / q)` for `m = 0..=upto`, both parities (entry 0 unused).
fn kernel_values(kernel: &Kernel, q: u64, upto: u64) -> Result<[Vec<f64>; 2]> {
    let mut out: [Vec<f64>; 2] = Default::default();
    for (parity, table) in out.iter_mut().enumerate() {
        let mut v = vec![0.0; upto as usize + 1];
        for m in 1..=upto {
            v[m as usize] = kernel.eval(parity as u8, PI * m as f64 / q as f64)?;
        }
        *table = v;
    }
    Ok(out)
}

/// Diagonal `M` by enumerating quadruples with `ac = bd`.
pub fn m_direct(q: u64, cfg: &PipelineConfig) -> Result<f64> {
    if q < 3 {
        return Err(Error::OutOfRange(format!("diagonal needs q >= 3, got {q}")));
    }
    let f = factorize(q)?;
    let z = split_floor(&f);
    let mut pairs = Vec::new();
    for a in 1..=z {
        for b in 1..=z / a {
            if gcd(a * b, q) == 1 {
                pairs.push((a, b));
                if pairs.len() > DIRECT_PAIR_CAP {
                    return Err(Error::ScaleCap(format!(
                        "quadruple enumeration for q = {q} exceeds {DIRECT_PAIR_CAP} pairs"
                    )));
                }
            }
        }
    }
    let kernel = Kernel::new(cfg.kernel)?;
    let w = kernel_values(&kernel, q, z)?;
    let mut acc = Compensated::new();
    for &(a, b) in &pairs {
        let ab = (a * b) as usize;
        for &(c, d) in &pairs {
            if a * c != b * d {
                continue;
            }
            let cd = (c * d) as usize;
            let num = w[0][ab] * w[0][cd] + w[1][ab] * w[1][cd];
            acc.add(num / ((ab * cd) as f64).sqrt());
        }
    }
    Ok(phi_star_of(&f) as f64 / 2.0 * acc.value())
}

/// Truncations for [`m_reparametrized`]; `None` means the natural range.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReparamLimits {
    pub n_max: Option<u64>,
    pub g_max: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Reparametrized {
    pub total: f64,
    /// Contribution of `n <= Z_0 = Z / 9^omega(q)`.
    pub below_z0: f64,
    /// Contribution of `Z_0 < n <= Z`.
    pub above_z0: f64,
}

/// Diagonal `M` as
/// `(phi*/2) sum_a sum_n (2^omega(n) / n) (sum_g W_a(pi g^2 n / q) / g)^2`.
pub fn m_reparametrized(
    q: u64,
    cfg: &PipelineConfig,
    limits: ReparamLimits,
) -> Result<Reparametrized> {
    let kernel = Kernel::new(cfg.kernel)?;
    m_reparametrized_with(q, &kernel, limits)
}

pub fn m_reparametrized_with(
    q: u64,
    kernel: &Kernel,
    limits: ReparamLimits,
) -> Result<Reparametrized> {
    if q < 3 {
        return Err(Error::OutOfRange(format!("diagonal needs q >= 3, got {q}")));
    }
    let f = factorize(q)?;
    let z = split_floor(&f);
    let z0 = split_point(&f) / 9f64.powi(f.omega() as i32);
    let phi_star = phi_star_of(&f) as f64;
    if phi_star == 0.0 || z == 0 {
        return Ok(Reparametrized {
            total: 0.0,
            below_z0: 0.0,
            above_z0: 0.0,
        });
    }
    let w = kernel_values(kernel, q, z)?;
    let omega = Sieve::new(z.max(2))?.omega_table();
    let n_top = limits.n_max.map_or(z, |n| n.min(z));
    let mut below = Compensated::new();
    let mut above = Compensated::new();
    for n in 1..=n_top {
        if gcd(n, q) != 1 {
            continue;
        }
        let mult = (1u64 << omega[n as usize]) as f64 / n as f64;
        for table in &w {
            let mut inner = Compensated::new();
            let mut g = 1u64;
            while g * g * n <= z && limits.g_max.is_none_or(|cap| g <= cap) {
                if gcd(g, q) == 1 {
                    inner.add(table[(g * g * n) as usize] / g as f64);
                }
                g += 1;
            }
            let s = inner.value();
            let term = mult * s * s;
            if (n as f64) <= z0 {
                below.add(term);
            } else {
                above.add(term);
            }
        }
    }
    let scale = phi_star / 2.0;
    let (below, above) = (scale * below.value(), scale * above.value());
    let mut total = Compensated::new();
    total.add(below);
    total.add(above);
    Ok(Reparametrized {
        total: total.value(),
        below_z0: below,
        above_z0: above,
    })
}

/// Number of ordered factorizations `n = rs` with `gcd(r, s) = 1`.
pub fn coprime_factorization_count(n: u64) -> u64 {
    (1..=n)
        .filter(|r| n.is_multiple_of(*r) && gcd(*r, n / r) == 1)
        .count() as u64
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainTermBreakdown {
    pub q: u64,
    pub leading: f64,
    pub relative_error_budget: f64,
    /// Absent when the quadruple enumeration is over its cap.
    pub m_direct: Option<f64>,
    pub m_repar: f64,
    pub e_measured: f64,
}

/// Leading term, diagonal and `E = b_moment - M` for a known `b_moment`.
pub fn main_term_breakdown(
    q: u64,
    b_moment: f64,
    cfg: &PipelineConfig,
) -> Result<MainTermBreakdown> {
    let f = factorize(q)?;
    let leading = theorem_main_term(q)?;
    let ln_q = (q as f64).ln();
    let relative_error_budget = f.omega() as f64 / ln_q * (q as f64 / f.euler_phi() as f64).sqrt();
    let m_repar = m_reparametrized(q, cfg, ReparamLimits::default())?.total;
    let m_direct = match m_direct(q, cfg) {
        Ok(v) => Some(v),
        Err(Error::ScaleCap(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(MainTermBreakdown {
        q,
        leading,
        relative_error_budget,
        m_direct,
        m_repar,
        e_measured: b_moment - m_direct.unwrap_or(m_repar),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma3Count {
    pub count: u64,
    pub envelope: f64,
    pub ratio: f64,
}

fn lemma3_pairs(z: u64, k: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a in 1..2 * z {
        for b in z.div_ceil(a).max(1)..=(2 * z - 1) / a {
            if a * b >= z && gcd(a * b, k) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Quadruples `Z1 <= ab < 2 Z1`, `Z2 <= cd < 2 Z2`, `(abcd, k) = 1`,
/// `ac = +-bd (mod k)`, `ac != bd`.
///
/// Pairs are bucketed by `a b^{-1}` and `d c^{-1}` mod `k` (the congruence
/// compares exactly these), and the exact diagonal `a/b = d/c` is removed by
/// bucketing reduced fractions.
pub fn lemma3_count(k: u64, z1: u64, z2: u64) -> Result<Lemma3Count> {
    if k == 0 {
        return Err(Error::ZeroModulus);
    }
    for z in [z1, z2] {
        if !(2..=LEMMA3_MAX_Z).contains(&z) {
            return Err(Error::ScaleCap(format!(
                "quadruple count needs 2 <= Z <= {LEMMA3_MAX_Z}, got {z}"
            )));
        }
    }
    let first = lemma3_pairs(z1, k);
    let second = lemma3_pairs(z2, k);
    let ratio_mod = |x: u64, y: u64| -> u64 {
        if k == 1 {
            0
        } else {
            (x % k) * inv_mod(y % k, k).expect("coprime to k") % k
        }
    };
    let mut by_residue: HashMap<u64, u64> = HashMap::new();
    let mut by_fraction: HashMap<(u64, u64), u64> = HashMap::new();
    for &(c, d) in &second {
        *by_residue.entry(ratio_mod(d, c)).or_default() += 1;
        let g = gcd(d, c);
        *by_fraction.entry((d / g, c / g)).or_default() += 1;
    }
    let mut congruent = 0u64;
    let mut diagonal = 0u64;
    for &(a, b) in &first {
        let r = ratio_mod(a, b);
        let neg = (k - r) % k;
        congruent += by_residue.get(&r).copied().unwrap_or(0);
        if neg != r {
            congruent += by_residue.get(&neg).copied().unwrap_or(0);
        }
        let g = gcd(a, b);
        diagonal += by_fraction.get(&(a / g, b / g)).copied().unwrap_or(0);
    }
    let count = congruent - diagonal;
    let zz = (z1 * z2) as f64;
    let envelope = zz / k as f64 * zz.ln().powi(3);
    Ok(Lemma3Count {
        count,
        envelope,
        ratio: count as f64 / envelope,
    })
}

/// The same count by looping over all quadruples.
pub fn lemma3_count_brute(k: u64, z1: u64, z2: u64) -> u64 {
    let first = lemma3_pairs(z1, k);
    let second = lemma3_pairs(z2, k);
    let mut count = 0;
    for &(a, b) in &first {
        for &(c, d) in &second {
            let (ac, bd) = (a * c, b * d);
            if ac != bd && ((ac + k - bd % k).is_multiple_of(k) || (ac + bd) % k == 0) {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma4Check {
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub bound: f64,
    /// `sum_{p | q} log p / (p - 1)`.
    pub prime_sum: f64,
    /// `1 + log omega(q)` (1 when `omega(q) = 0`).
    pub prime_envelope: f64,
}

/// `sum_{n <= x, (n, q) = 1} 1/n` against `(phi(q)/q)(log x + gamma + sum_{p|q} log p/(p-1))`.
pub fn lemma4_check(q: u64, x: f64) -> Result<Lemma4Check> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if !(x >= 2.0 && x <= LEMMA5_MAX_X as f64) {
        return Err(Error::OutOfRange(format!(
            "need 2 <= x <= {LEMMA5_MAX_X}, got {x}"
        )));
    }
    let f = factorize(q)?;
    let top = x.floor() as u64;
    let lhs = Compensated::sum_iter(
        (1..=top)
            .filter(|&n| gcd(n, q) == 1)
            .map(|n| 1.0 / n as f64),
    );
    let prime_sum = Compensated::sum_iter(f.primes().map(|p| (p as f64).ln() / (p - 1) as f64));
    let density = f.euler_phi() as f64 / q as f64;
    let rhs = density * (x.ln() + EULER_GAMMA + prime_sum);
    let omega = f.omega();
    Ok(Lemma4Check {
        lhs,
        rhs,
        error: (lhs - rhs).abs(),
        bound: (1u64 << omega) as f64 * x.ln() / x,
        prime_sum,
        prime_envelope: if omega == 0 {
            1.0
        } else {
            1.0 + (omega as f64).ln()
        },
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma5Sums {
    pub sum1: f64,
    pub sum2: f64,
    pub main2: f64,
    pub ratio: f64,
}

/// `sum1 = sum_{n <= q} 2^omega(n) / n` and
/// `sum2 = sum_{n <= x} (2^omega(n) / n) log^2(x / n)`, both over `(n, q) = 1`,
/// with `main2 = (log x)^4 / (12 zeta(2)) prod_{p | q} (1 - 1/p) / (1 + 1/p)`.
pub fn lemma5_sums(q: u64, x: f64) -> Result<Lemma5Sums> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if !(x >= 1.0 && x <= LEMMA5_MAX_X as f64) || q > LEMMA5_MAX_X {
        return Err(Error::ScaleCap(format!(
            "divisor sums need x, q <= {LEMMA5_MAX_X}, got x = {x}, q = {q}"
        )));
    }
    let top = x.floor() as u64;
    let sieve = Sieve::new(top.max(q).max(2))?;
    let omega = sieve.omega_table();
    let weight = |n: u64| (1u64 << omega[n as usize]) as f64 / n as f64;
    let sum1 = Compensated::sum_iter((1..=q).filter(|&n| gcd(n, q) == 1).map(weight));
    let ln_x = x.ln();
    let sum2 = Compensated::sum_iter((1..=top).filter(|&n| gcd(n, q) == 1).map(|n| {
        let l = ln_x - (n as f64).ln();
        weight(n) * l * l
    }));
    let f = factorize(q)?;
    let local: f64 = f
        .primes()
        .map(|p| {
            let r = 1.0 / p as f64;
            (1.0 - r) / (1.0 + r)
        })
        .product();
    let main2 = ln_x.powi(4) / (12.0 * ZETA_TWO) * local;
    Ok(Lemma5Sums {
        sum1,
        sum2,
        main2,
        ratio: sum2 / main2,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorSum {
    pub q: u64,
    pub b_moment: f64,
    pub m_direct: f64,
    pub e_measured: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// `E = sum* B(chi)^2 - M` with `B` from the per-character double sums.
pub fn error_sum_e(q: u64, cfg: &PipelineConfig) -> Result<ErrorSum> {
    if !(3..=ERROR_SUM_MAX_Q).contains(&q) {
        return Err(Error::ScaleCap(format!(
            "error sum runs for 3 <= q <= {ERROR_SUM_MAX_Q}, got {q}"
        )));
    }
    let group = CharacterGroup::new(q)?;
    let kernel = Kernel::new(cfg.kernel)?;
    let eval = CentralEvaluator::new(&group, &kernel, cfg)?;
    let mut b_moment = Compensated::new();
    for chi in group.labels().filter(|c| c.primitive) {
        let (b, _) = eval.head_tail_real(&chi);
        b_moment.add(b * b);
    }
    let b_moment = b_moment.value();
    let m = m_direct(q, cfg)?;
    let envelope = q as f64 * (q as f64).ln().powi(3);
    let e = b_moment - m;
    Ok(ErrorSum {
        q,
        b_moment,
        m_direct: m,
        e_measured: e,
        envelope,
        ratio: e.abs() / envelope,
    })
}

/// `q (phi(q)/q)^5 (omega(q) log q)^2 + q (log q)^3`.
pub fn prop2_envelope(q: u64) -> Result<f64> {
    let f = factorize(q)?;
    let qf = q as f64;
    let ln_q = qf.ln();
    let density = f.euler_phi() as f64 / qf;
    Ok(qf * density.powi(5) * (f.omega() as f64 * ln_q).powi(2) + qf * ln_q.powi(3))
}
