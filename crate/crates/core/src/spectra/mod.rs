//! All characters at once.
//!
//! The double sums over `(a, b)` only see `chi(a b^{-1})`, so they collapse
//! onto weight tables over `(Z/q)*`; one transform per table then gives `B`
//! and `C` for every character. Moments are assembled in character-index
//! order, so results do not depend on the thread count.

mod tables;
mod transform;

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

pub use tables::{memory_estimate, weight_table, Predicate, ResidueWeightTable, WeightTables};
pub use transform::{naive_transform, Fft, GroupTransform};

use crate::arith::phi_star_of;
use crate::asymptotics::{m_reparametrized_with, theorem_main_term, ReparamLimits};
use crate::chargroup::CharacterGroup;
use crate::config::{PipelineConfig, TransformMethod};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::lfunc::{CentralEvaluator, SmoothedWeights};
use crate::summation::Compensated;

pub const NO_PRIMITIVE_WARNING: &str = "no primitive characters";

/// `sum_u chi(u) S(u)` for every character, indexed like [`CharacterGroup::label`].
pub fn all_char_sums(
    group: &CharacterGroup,
    table: &ResidueWeightTable,
    method: TransformMethod,
) -> Result<Vec<Complex64>> {
    if table.q != group.modulus() {
        return Err(Error::Config(format!(
            "table for q = {} used with group mod {}",
            table.q,
            group.modulus()
        )));
    }
    Ok(transform_with(
        group,
        &table.weights,
        resolve(method, group.modulus(), &PipelineConfig::default()),
    ))
}

fn resolve(method: TransformMethod, q: u64, cfg: &PipelineConfig) -> TransformMethod {
    match method {
        TransformMethod::Auto if q <= cfg.naive_limit => TransformMethod::Naive,
        TransformMethod::Auto => TransformMethod::Fast,
        m => m,
    }
}

fn transform_with(
    group: &CharacterGroup,
    values: &[f64],
    method: TransformMethod,
) -> Vec<Complex64> {
    match method {
        TransformMethod::Naive => naive_transform(group, values),
        _ => GroupTransform::new(group).forward_real(values),
    }
}

/// `B(chi)` and `C(chi)` for every character mod `q`.
#[derive(Debug, Clone)]
pub struct CharacterSums {
    pub q: u64,
    /// `(parity, primitive)` per character index.
    pub classes: Vec<(u8, bool)>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub pair_count: u64,
    pub method: TransformMethod,
    pub cutoff: u64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageTimings {
    pub kernel_ms: f64,
    pub tables_ms: f64,
    pub transform_ms: f64,
    pub assembly_ms: f64,
    pub total_ms: f64,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Weight tables plus transforms.
pub fn character_sums(
    group: &CharacterGroup,
    kernel: &Kernel,
    cfg: &PipelineConfig,
    timings: &mut StageTimings,
) -> Result<CharacterSums> {
    let q = group.modulus();
    let t = Instant::now();
    let weights = SmoothedWeights::new(q, kernel, cfg)?;
    timings.kernel_ms = ms_since(t);

    let t = Instant::now();
    let tables = WeightTables::build(group, &weights, cfg)?;
    timings.tables_ms = ms_since(t);

    let t = Instant::now();
    let method = resolve(cfg.transform, q, cfg);
    let spectra: Vec<Vec<Complex64>> = [
        (0u8, Predicate::B),
        (0, Predicate::C),
        (1, Predicate::B),
        (1, Predicate::C),
    ]
    .iter()
    .map(|&(parity, pred)| transform_with(group, &tables.raw(parity, pred), method))
    .collect();
    let classes = group.classify_all();
    let pick = |half: usize| -> Vec<Complex64> {
        classes
            .iter()
            .enumerate()
            .map(|(j, &(parity, _))| spectra[2 * parity as usize + half][j])
            .collect()
    };
    let (b, c) = (pick(0), pick(1));
    timings.transform_ms = ms_since(t);
    Ok(CharacterSums {
        q,
        classes,
        b,
        c,
        pair_count: tables.pair_count,
        method,
        cutoff: weights.cutoff,
    })
}

/// The same values from the per-character double sums.
pub fn naive_character_sums(
    group: &CharacterGroup,
    kernel: &Kernel,
    cfg: &PipelineConfig,
) -> Result<CharacterSums> {
    let eval = CentralEvaluator::new(group, kernel, cfg)?;
    let classes = group.classify_all();
    let mut b = Vec::with_capacity(classes.len());
    let mut c = Vec::with_capacity(classes.len());
    for chi in group.labels() {
        let (hb, tc) = eval.head_tail_real(&chi);
        b.push(Complex64::new(hb, 0.0));
        c.push(Complex64::new(tc, 0.0));
    }
    Ok(CharacterSums {
        q: group.modulus(),
        classes,
        b,
        c,
        pair_count: 0,
        method: TransformMethod::Naive,
        cutoff: eval.weights().cutoff,
    })
}

/// Moment sums assembled from per-character `B`, `C`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    /// `sum* (2A)^2`.
    pub fourth_moment: f64,
    /// `sum* B^2`.
    pub b_moment: f64,
    /// `sum* C^2`.
    pub c_moment_primitive: f64,
    /// `sum |C|^2` over all characters.
    pub c_moment_all: f64,
    /// `sum* B C`.
    pub cross_term: f64,
    /// `sqrt(sum* B^2 * sum* C^2)`.
    pub cross_term_bound: f64,
    /// `|fourth_moment - 4 (b + 2 cross + c)| / fourth_moment`.
    pub assembly_residual: f64,
    /// Largest `|Im|` of `B`, `C` over primitive characters.
    pub max_imag_residue: f64,
    /// `sum* B^2` split as even plus odd characters.
    pub b_moment_even: f64,
    pub b_moment_odd: f64,
}

impl CharacterSums {
    pub fn moments(&self) -> Moments {
        let mut fourth = Compensated::new();
        let mut bm = Compensated::new();
        let mut bm_parity = [Compensated::new(), Compensated::new()];
        let mut cp = Compensated::new();
        let mut ca = Compensated::new();
        let mut cross = Compensated::new();
        let mut imag: f64 = 0.0;
        for (j, &(parity, primitive)) in self.classes.iter().enumerate() {
            let (b, c) = (self.b[j], self.c[j]);
            ca.add(c.norm_sqr());
            if !primitive {
                continue;
            }
            imag = imag.max(b.im.abs()).max(c.im.abs());
            let a = 2.0 * (b.re + c.re);
            fourth.add(a * a);
            bm.add(b.re * b.re);
            bm_parity[parity as usize].add(b.re * b.re);
            cp.add(c.re * c.re);
            cross.add(b.re * c.re);
        }
        let fourth_moment = fourth.value();
        let (b_moment, c_moment_primitive, cross_term) = (bm.value(), cp.value(), cross.value());
        let mut assembled = Compensated::new();
        assembled.add(4.0 * b_moment);
        assembled.add(8.0 * cross_term);
        assembled.add(4.0 * c_moment_primitive);
        let assembly_residual = if fourth_moment > 0.0 {
            (fourth_moment - assembled.value()).abs() / fourth_moment
        } else {
            assembled.value().abs()
        };
        Moments {
            fourth_moment,
            b_moment,
            c_moment_primitive,
            c_moment_all: ca.value(),
            cross_term,
            cross_term_bound: (b_moment * c_moment_primitive).sqrt(),
            assembly_residual,
            max_imag_residue: imag,
            b_moment_even: bm_parity[0].value(),
            b_moment_odd: bm_parity[1].value(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub phi_star: u64,
    pub fourth_moment: f64,
    pub main_term: f64,
    /// `fourth_moment / main_term`, or 0 when there are no primitive characters.
    pub ratio: f64,
    pub b_moment: f64,
    pub c_moment_all: f64,
    pub c_moment_primitive: f64,
    pub cross_term: f64,
    pub cross_term_bound: f64,
    pub assembly_residual: f64,
    pub max_imag_residue: f64,
    /// Diagonal main term `M` of `sum* B^2`.
    pub m_diagonal: f64,
    /// `b_moment - m_diagonal`.
    pub e_measured: f64,
    pub cutoff: u64,
    pub pair_count: u64,
    pub transform: TransformMethod,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
}

/// `sum* |L(1/2, chi)|^4` over primitive `chi` mod `q`, through weight tables.
pub fn fourth_moment(q: u64, cfg: &PipelineConfig) -> Result<MomentReport> {
    let start = Instant::now();
    if q < 3 {
        return Err(Error::OutOfRange(format!("moment needs q >= 3, got {q}")));
    }
    let group = CharacterGroup::new(q)?;
    let kernel = Kernel::new(cfg.kernel)?;
    let mut timings = StageTimings::default();
    let sums = character_sums(&group, &kernel, cfg, &mut timings)?;

    let t = Instant::now();
    let m = sums.moments();
    let main_term = theorem_main_term(q)?;
    let m_diagonal = m_reparametrized_with(q, &kernel, ReparamLimits::default())?.total;
    let phi_star = phi_star_of(group.factorization());
    let mut warnings = Vec::new();
    if phi_star == 0 {
        warnings.push(NO_PRIMITIVE_WARNING.to_string());
    }
    timings.assembly_ms = ms_since(t);
    timings.total_ms = ms_since(start);
    Ok(MomentReport {
        q,
        phi_star,
        fourth_moment: m.fourth_moment,
        main_term,
        ratio: if main_term > 0.0 {
            m.fourth_moment / main_term
        } else {
            0.0
        },
        b_moment: m.b_moment,
        c_moment_all: m.c_moment_all,
        c_moment_primitive: m.c_moment_primitive,
        cross_term: m.cross_term,
        cross_term_bound: m.cross_term_bound,
        assembly_residual: m.assembly_residual,
        max_imag_residue: m.max_imag_residue,
        m_diagonal,
        e_measured: m.b_moment - m_diagonal,
        cutoff: sums.cutoff,
        pair_count: sums.pair_count,
        transform: sums.method,
        warnings,
        timings: Some(timings),
    })
}

/// `(sum* B^2, sum |C|^2 over all characters)`.
pub fn bc_moments(q: u64, cfg: &PipelineConfig) -> Result<(f64, f64)> {
    if q < 3 {
        return Err(Error::OutOfRange(format!("moment needs q >= 3, got {q}")));
    }
    let group = CharacterGroup::new(q)?;
    let kernel = Kernel::new(cfg.kernel)?;
    let m = character_sums(&group, &kernel, cfg, &mut StageTimings::default())?.moments();
    Ok((m.b_moment, m.c_moment_all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::build_group;
    use crate::lfunc::l_half_oracle;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn table_totals_match_character_free_sum() {
        let cfg = PipelineConfig::default();
        let kernel = Kernel::new(cfg.kernel).unwrap();
        let q = 12;
        let g = build_group(q).unwrap();
        let w = SmoothedWeights::new(q, &kernel, &cfg).unwrap();
        let tables = WeightTables::build(&g, &w, &cfg).unwrap();
        for parity in 0..2u8 {
            let mut want = Compensated::new();
            for m in 1..=w.cutoff {
                if crate::arith::gcd(m, q) == 1 && w.in_head(m) {
                    let d = (1..=m).filter(|a| m % a == 0).count();
                    want.add(d as f64 * w.weight(parity, m));
                }
            }
            let got = tables.table(parity, Predicate::B).total();
            assert!((got - want.value()).abs() < 1e-10);
        }
    }

    #[test]
    fn table_reconstructs_head_sums() {
        let cfg = PipelineConfig::default();
        let kernel = Kernel::new(cfg.kernel).unwrap();
        let g = build_group(3).unwrap();
        let w = SmoothedWeights::new(3, &kernel, &cfg).unwrap();
        let tables = WeightTables::build(&g, &w, &cfg).unwrap();
        let eval = CentralEvaluator::new(&g, &kernel, &cfg).unwrap();
        for chi in g.labels() {
            let table = tables.table(chi.parity, Predicate::B);
            let from_table =
                all_char_sums(&g, &table, TransformMethod::Naive).unwrap()[chi.index as usize];
            let (b, _) = eval.head_tail_real(&chi);
            assert!((from_table.re - b).abs() < 1e-12);
        }
        // Same index sets for both parities.
        let w4 = SmoothedWeights::new(4, &kernel, &cfg).unwrap();
        let t4 = WeightTables::build(&build_group(4).unwrap(), &w4, &cfg).unwrap();
        for pred in [Predicate::B, Predicate::C] {
            let (e, o) = (t4.raw(0, pred), t4.raw(1, pred));
            assert!(e.iter().zip(&o).all(|(x, y)| (*x == 0.0) == (*y == 0.0)));
        }
    }

    #[test]
    fn moment_matches_oracle() {
        let cfg = PipelineConfig::default();
        for q in [4u64, 5, 7, 11] {
            let g = build_group(q).unwrap();
            let mut want = Compensated::new();
            for chi in g.labels().filter(|c| c.primitive) {
                want.add(l_half_oracle(&g, &chi).unwrap().norm_sqr().powi(2));
            }
            let r = fourth_moment(q, &cfg).unwrap();
            assert!(rel(r.fourth_moment, want.value()) <= 1e-6, "q={q}");
            assert!(r.assembly_residual <= 1e-9);
        }
    }

    #[test]
    fn no_primitive_characters() {
        let cfg = PipelineConfig::default();
        let r = fourth_moment(6, &cfg).unwrap();
        assert_eq!(r.fourth_moment, 0.0);
        assert_eq!(r.b_moment, 0.0);
        assert_eq!(r.warnings, vec![NO_PRIMITIVE_WARNING.to_string()]);
        assert_eq!(bc_moments(6, &cfg).unwrap().0, 0.0);
        assert!(fourth_moment(2, &cfg).is_err());
    }

    #[test]
    fn pipelines_agree_small_q() {
        let cfg = PipelineConfig::default();
        let kernel = Kernel::new(cfg.kernel).unwrap();
        for q in [3u64, 4, 8, 9, 15, 16, 20, 21, 60] {
            let g = build_group(q).unwrap();
            let fast = character_sums(&g, &kernel, &cfg, &mut StageTimings::default())
                .unwrap()
                .moments();
            let slow = naive_character_sums(&g, &kernel, &cfg).unwrap().moments();
            assert!(rel(fast.fourth_moment, slow.fourth_moment) <= 1e-9, "q={q}");
            assert!(rel(fast.b_moment, slow.b_moment) <= 1e-9, "q={q}");
            assert!(rel(fast.c_moment_all, slow.c_moment_all) <= 1e-9, "q={q}");
            assert!(
                (fast.b_moment_even + fast.b_moment_odd - fast.b_moment).abs()
                    <= 1e-10 * (1.0 + fast.b_moment)
            );
        }
    }

    #[test]
    fn transform_routes_agree_on_moments() {
        let kernel = Kernel::new(PipelineConfig::default().kernel).unwrap();
        for q in [105u64, 1009] {
            let g = build_group(q).unwrap();
            let naive = PipelineConfig {
                transform: TransformMethod::Naive,
                ..PipelineConfig::default()
            };
            let fast = PipelineConfig {
                transform: TransformMethod::Fast,
                ..naive
            };
            let a = character_sums(&g, &kernel, &naive, &mut StageTimings::default()).unwrap();
            let b = character_sums(&g, &kernel, &fast, &mut StageTimings::default()).unwrap();
            for (x, y) in a.b.iter().zip(&b.b).chain(a.c.iter().zip(&b.c)) {
                assert!((x - y).norm() <= 1e-12);
            }
        }
    }
}
