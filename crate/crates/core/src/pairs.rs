//! Enumeration of pairs `(a, b)` with `ab <= cutoff` and `gcd(ab, q) = 1`,
//! in the fixed order "increasing `ab`, then increasing `a`".
//!
//! Work is cut into chunks of consecutive `m = ab`; each chunk lists the
//! divisors of its `m` values in CSR form. Chunk boundaries depend only on
//! `cutoff`, never on the thread count.

use crate::arith::{gcd, isqrt};

pub const CHUNK_LEN: u64 = 1 << 15;

/// Units mod `q` as a lookup table.
pub fn unit_table(q: u64) -> Vec<bool> {
    (0..q).map(|u| gcd(u, q) == 1).collect()
}

/// Divisors of every `m` in `[start, end)` coprime to `q`.
#[derive(Debug, Clone)]
pub struct DivisorChunk {
    pub start: u64,
    pub end: u64,
    /// `offsets[i]..offsets[i+1]` indexes the divisors of `start + i`.
    offsets: Vec<u32>,
    divisors: Vec<u32>,
}

impl DivisorChunk {
    pub fn new(start: u64, end: u64, q: u64, units: &[bool]) -> Self {
        assert!(start >= 1 && start <= end);
        assert!(end <= u32::MAX as u64, "pair cutoff exceeds 32-bit range");
        let len = (end - start) as usize;
        let coprime = |m: u64| units[(m % q) as usize];
        let root = if end > 1 { isqrt(end - 1) } else { 0 };

        let mut counts = vec![0u32; len + 1];
        for d in 1..=root {
            let first = (start.div_ceil(d) * d).max(d * d);
            let mut m = first;
            while m < end {
                if coprime(m) {
                    counts[(m - start) as usize] += if d * d == m { 1 } else { 2 };
                }
                m += d;
            }
        }
        let mut offsets = vec![0u32; len + 1];
        for i in 0..len {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let mut lo: Vec<u32> = offsets[..len].to_vec();
        let mut hi: Vec<u32> = offsets[1..].to_vec();
        let mut divisors = vec![0u32; offsets[len] as usize];
        for d in 1..=root {
            let first = (start.div_ceil(d) * d).max(d * d);
            let mut m = first;
            while m < end {
                if coprime(m) {
                    let i = (m - start) as usize;
                    divisors[lo[i] as usize] = d as u32;
                    lo[i] += 1;
                    if d * d != m {
                        hi[i] -= 1;
                        divisors[hi[i] as usize] = (m / d) as u32;
                    }
                }
                m += d;
            }
        }
        Self {
            start,
            end,
            offsets,
            divisors,
        }
    }

    /// Divisors of `m` (empty unless `gcd(m, q) = 1`), ascending.
    #[inline]
    pub fn divisors_of(&self, m: u64) -> &[u32] {
        let i = (m - self.start) as usize;
        &self.divisors[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn pair_count(&self) -> usize {
        self.divisors.len()
    }
}

/// Chunk ranges covering `1..=cutoff`.
pub fn chunk_ranges(cutoff: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = 1;
    while start <= cutoff {
        let end = (start + CHUNK_LEN).min(cutoff + 1);
        out.push((start, end));
        start = end;
    }
    out
}

/// One coprime pair: `a`, `b`, and `m = ab`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub a: u64,
    pub b: u64,
    pub m: u64,
}

/// All coprime pairs up to `cutoff`, materialized in canonical order.
pub fn collect_pairs(q: u64, cutoff: u64) -> Vec<Pair> {
    let units = unit_table(q);
    let mut out = Vec::new();
    for (start, end) in chunk_ranges(cutoff) {
        let chunk = DivisorChunk::new(start, end, q, &units);
        for m in start..end {
            for &a in chunk.divisors_of(m) {
                out.push(Pair {
                    a: a as u64,
                    b: m / a as u64,
                    m,
                });
            }
        }
    }
    out
}
