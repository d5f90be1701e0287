//! Residue-class weight tables
//! `S_a(u) = sum_{a b^{-1} = u (mod q)} W_a(pi ab / q) / sqrt(ab)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::inv_mod;
use crate::chargroup::CharacterGroup;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::lfunc::SmoothedWeights;
use crate::pairs::{chunk_ranges, unit_table, DivisorChunk};
use crate::summation::Compensated;

/// Chunks processed concurrently before their partial tables are merged.
const MERGE_BATCH: usize = 8;

/// Accumulators per unit: two parities times head/tail.
const SLOTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Predicate {
    /// `ab <= Z`.
    B,
    /// `Z < ab <= cutoff`.
    C,
    /// `ab <= cutoff`.
    A,
}

/// One weight table on the log grid of `(Z/q)*`.
#[derive(Debug, Clone)]
pub struct ResidueWeightTable {
    pub q: u64,
    pub parity: u8,
    pub predicate: Predicate,
    /// Indexed by discrete-log index.
    pub weights: Vec<f64>,
}

impl ResidueWeightTable {
    /// `S(u)` for a unit `u`.
    pub fn at(&self, group: &CharacterGroup, u: u64) -> Option<f64> {
        group.log_index(u).map(|l| self.weights[l as usize])
    }

    pub fn total(&self) -> f64 {
        Compensated::sum_iter(self.weights.iter().copied())
    }
}

/// Head and tail tables for both parities, built in one pass over the pairs.
#[derive(Debug, Clone)]
pub struct WeightTables {
    pub q: u64,
    pub cutoff: u64,
    /// `[parity][0 = B, 1 = C]`.
    tables: [[Vec<f64>; 2]; 2],
    pub pair_count: u64,
}

impl WeightTables {
    pub fn build(
        group: &CharacterGroup,
        weights: &SmoothedWeights,
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        let q = group.modulus();
        if weights.q != q {
            return Err(Error::Config(format!(
                "weights built for q = {} used with q = {q}",
                weights.q
            )));
        }
        let phi = group.order() as usize;
        let cutoff = weights.cutoff;
        let needed = memory_estimate(phi as u64, cutoff);
        if needed > cfg.memory_budget_bytes {
            return Err(Error::MemoryBudget(format!(
                "q = {q} needs about {needed} bytes, budget is {}",
                cfg.memory_budget_bytes
            )));
        }

        let units = unit_table(q);
        let inverse: Vec<u64> = (0..q)
            .map(|u| {
                if units[u as usize] {
                    inv_mod(u, q).unwrap_or(0)
                } else {
                    0
                }
            })
            .collect();
        let w = [weights.table(0), weights.table(1)];

        let chunk_table = |start: u64, end: u64| -> (Vec<Compensated>, u64) {
            let chunk = DivisorChunk::new(start, end, q, &units);
            let mut acc = vec![Compensated::new(); SLOTS * phi];
            for m in start..end {
                let divisors = chunk.divisors_of(m);
                if divisors.is_empty() {
                    continue;
                }
                let half = if weights.in_head(m) { 0 } else { 1 };
                let (w0, w1) = (w[0][m as usize], w[1][m as usize]);
                for &a in divisors {
                    let a = a as u64;
                    let b = m / a;
                    let u = (a % q) * inverse[(b % q) as usize] % q;
                    let l = group.log_index(u).expect("pair residues are units") as usize;
                    acc[SLOTS * l + half].add(w0);
                    acc[SLOTS * l + 2 + half].add(w1);
                }
            }
            (acc, chunk.pair_count() as u64)
        };

        let ranges = chunk_ranges(cutoff);
        let mut total = vec![Compensated::new(); SLOTS * phi];
        let mut pair_count = 0u64;
        for batch in ranges.chunks(MERGE_BATCH) {
            let parts: Vec<(Vec<Compensated>, u64)> =
                batch.par_iter().map(|&(s, e)| chunk_table(s, e)).collect();
            for (part, count) in parts {
                for (t, p) in total.iter_mut().zip(&part) {
                    t.merge(p);
                }
                pair_count += count;
            }
        }

        let mut tables: [[Vec<f64>; 2]; 2] = Default::default();
        for (parity, halves) in tables.iter_mut().enumerate() {
            for (half, table) in halves.iter_mut().enumerate() {
                *table = (0..phi)
                    .map(|l| total[SLOTS * l + 2 * parity + half].value())
                    .collect();
            }
        }
        Ok(Self {
            q,
            cutoff,
            tables,
            pair_count,
        })
    }

    pub fn raw(&self, parity: u8, predicate: Predicate) -> Vec<f64> {
        let p = parity as usize;
        match predicate {
            Predicate::B => self.tables[p][0].clone(),
            Predicate::C => self.tables[p][1].clone(),
            Predicate::A => self.tables[p][0]
                .iter()
                .zip(&self.tables[p][1])
                .map(|(b, c)| b + c)
                .collect(),
        }
    }

    pub fn table(&self, parity: u8, predicate: Predicate) -> ResidueWeightTable {
        ResidueWeightTable {
            q: self.q,
            parity,
            predicate,
            weights: self.raw(parity, predicate),
        }
    }
}

/// Rough peak bytes: two kernel tables, one merged and `MERGE_BATCH` partial
/// accumulator tables, and the transform buffers.
pub fn memory_estimate(phi: u64, cutoff: u64) -> u64 {
    let acc = SLOTS as u64 * 16 * phi;
    2 * 8 * cutoff + (MERGE_BATCH as u64 + 1) * acc + 6 * 16 * phi + 16 * cutoff
}

/// One table from scratch.
pub fn weight_table(
    q: u64,
    parity: u8,
    predicate: Predicate,
    cfg: &PipelineConfig,
) -> Result<ResidueWeightTable> {
    let group = CharacterGroup::new(q)?;
    let kernel = Kernel::new(cfg.kernel)?;
    let weights = SmoothedWeights::new(q, &kernel, cfg)?;
    Ok(WeightTables::build(&group, &weights, cfg)?.table(parity, predicate))
}
