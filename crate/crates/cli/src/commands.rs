use serde::Serialize;

use fourth_moment::arith::factorize;
use fourth_moment::asymptotics::{
    frozen, lemma3_count, lemma4_check, lemma5_sums, m_direct, m_reparametrized,
    main_term_breakdown, ReparamLimits,
};
use fourth_moment::chargroup::CharacterGroup;
use fourth_moment::config::PipelineConfig;
use fourth_moment::kernel::w_series;
use fourth_moment::kernel::{Kernel, SERIES_MAX_X};
use fourth_moment::lfunc::{abc_values, CentralValue};
use fourth_moment::spectra::{fourth_moment, MomentReport};
use fourth_moment::verify::{
    self, CheckSummary, LEMMA2_TOLERANCE, LEMMA4_CONSTANT, M_EQUALITY_TOLERANCE,
};

use crate::format::{float, to_json, Csv};
use crate::{CliError, Outcome};

const ASSEMBLY_TOLERANCE: f64 = 1e-9;
const IMAG_TOLERANCE: f64 = 1e-10;

pub const SCAN_HEADER: [&str; 9] = [
    "q",
    "phi_star",
    "moment",
    "main_term",
    "ratio",
    "b_moment",
    "c_moment",
    "E_measured",
    "wall_ms",
];

const MOMENT_HEADER: [&str; 18] = [
    "q",
    "phi_star",
    "fourth_moment",
    "main_term",
    "ratio",
    "b_moment",
    "c_moment_all",
    "c_moment_primitive",
    "cross_term",
    "cross_term_bound",
    "assembly_residual",
    "max_imag_residue",
    "m_diagonal",
    "e_measured",
    "cutoff",
    "pair_count",
    "transform",
    "wall_ms",
];

fn pass(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// Moduli from a list file: tokens split on whitespace or commas, `a..b`
/// inclusive ranges, `#` to end of line ignored.
pub fn parse_qlist(text: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let parse = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad modulus {s:?} in q list")))
            };
            match tok.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    if a > b {
                        return Err(CliError::Usage(format!("empty range {tok}")));
                    }
                    out.extend(a..=b);
                }
                None => out.push(parse(tok)?),
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("q list is empty".into()));
    }
    Ok(out)
}

fn moment_checks(r: &MomentReport) -> Vec<String> {
    let mut f = Vec::new();
    if r.assembly_residual > ASSEMBLY_TOLERANCE {
        f.push(format!(
            "q={}: assembled identity off by {:e}",
            r.q, r.assembly_residual
        ));
    }
    if r.max_imag_residue > IMAG_TOLERANCE {
        f.push(format!(
            "q={}: imaginary residue {:e}",
            r.q, r.max_imag_residue
        ));
    }
    if !(r.fourth_moment >= 0.0 && r.fourth_moment.is_finite()) {
        f.push(format!(
            "q={}: moment {} is not a finite nonnegative number",
            r.q, r.fourth_moment
        ));
    }
    f
}

fn wall_ms(r: &MomentReport) -> f64 {
    r.timings.map_or(0.0, |t| t.total_ms)
}

pub fn moment(q: u64, csv: bool, timings: bool, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    let mut r = fourth_moment(q, cfg)?;
    if !timings {
        r.timings = None;
    }
    let failures = moment_checks(&r);
    let artifact = if csv {
        let mut t = Csv::new(&MOMENT_HEADER);
        t.row(&[
            r.q.to_string(),
            r.phi_star.to_string(),
            float(r.fourth_moment),
            float(r.main_term),
            float(r.ratio),
            float(r.b_moment),
            float(r.c_moment_all),
            float(r.c_moment_primitive),
            float(r.cross_term),
            float(r.cross_term_bound),
            float(r.assembly_residual),
            float(r.max_imag_residue),
            float(r.m_diagonal),
            float(r.e_measured),
            r.cutoff.to_string(),
            r.pair_count.to_string(),
            format!("{:?}", r.transform).to_lowercase(),
            float(wall_ms(&r)),
        ]);
        t.finish()
    } else {
        to_json(&r)
    };
    Ok(Outcome {
        artifact,
        failures,
        warnings: r.warnings.clone(),
    })
}

pub fn scan(qs: &[u64], timings: bool, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    let mut t = Csv::new(&SCAN_HEADER);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for &q in qs {
        let r = fourth_moment(q, cfg)?;
        failures.extend(moment_checks(&r));
        warnings.extend(r.warnings.iter().map(|w| format!("q={q}: {w}")));
        t.row(&[
            q.to_string(),
            r.phi_star.to_string(),
            float(r.fourth_moment),
            float(r.main_term),
            float(r.ratio),
            float(r.b_moment),
            float(r.c_moment_all),
            float(r.e_measured),
            float(if timings { wall_ms(&r) } else { 0.0 }),
        ]);
    }
    Ok(Outcome {
        artifact: t.finish(),
        failures,
        warnings,
    })
}

#[derive(Serialize)]
struct ValueOut {
    #[serde(flatten)]
    value: CentralValue,
    lemma2_discrepancy: Option<f64>,
}

pub fn value(q: u64, index: u64, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    let g = CharacterGroup::new(q)?;
    if index >= g.order() {
        return Err(CliError::Usage(format!(
            "character index {index} out of range (there are {} characters mod {q})",
            g.order()
        )));
    }
    let v = abc_values(&g, &g.label(index), cfg)?;
    let d = v.lemma2_discrepancy();
    let mut failures = Vec::new();
    if let Some(d) = d.filter(|&d| d > LEMMA2_TOLERANCE) {
        failures.push(format!("|L|^2 - 2A discrepancy {d:e}"));
    }
    if v.imag_residue > 1e-12 {
        failures.push(format!("imaginary residue {:e}", v.imag_residue));
    }
    Ok(Outcome {
        artifact: to_json(&ValueOut {
            value: v,
            lemma2_discrepancy: d,
        }),
        failures,
        warnings: Vec::new(),
    })
}

#[derive(Serialize)]
struct CheckReport {
    pass: bool,
    checks: Vec<CheckSummary>,
}

fn checks_outcome(checks: Vec<CheckSummary>) -> Outcome {
    let failures = checks
        .iter()
        .filter(|c| !c.ok())
        .map(|c| {
            format!(
                "{}: {} of {} failed",
                c.name,
                c.checked - c.passed,
                c.checked
            )
        })
        .collect::<Vec<_>>();
    Outcome {
        artifact: to_json(&CheckReport {
            pass: failures.is_empty(),
            checks,
        }),
        failures,
        warnings: Vec::new(),
    }
}

pub fn verify_identities(qmax: u64, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    Ok(checks_outcome(verify::identities(qmax, cfg)?))
}

pub fn verify_bounds(qmax: u64, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    Ok(checks_outcome(verify::bounds(qmax, cfg)?))
}

pub fn kernel_table(
    xmin: f64,
    xmax: f64,
    points: usize,
    cfg: &PipelineConfig,
) -> Result<Outcome, CliError> {
    if !(xmin > 0.0 && xmax >= xmin && points >= 1) {
        return Err(CliError::Usage(
            "need 0 < xmin <= xmax and points >= 1".into(),
        ));
    }
    let kernel = Kernel::new(cfg.kernel)?;
    let mut t = Csv::new(&["x", "w0", "w1", "w0_series", "w1_series"]);
    for i in 0..points {
        let frac = if points == 1 {
            0.0
        } else {
            i as f64 / (points - 1) as f64
        };
        let x = xmin * (xmax / xmin).powf(frac);
        let series = |parity: u8| -> Result<String, CliError> {
            Ok(if x <= SERIES_MAX_X {
                float(w_series(parity, x, &cfg.kernel)?)
            } else {
                String::new()
            })
        };
        t.row(&[
            float(x),
            float(kernel.eval(0, x)?),
            float(kernel.eval(1, x)?),
            series(0)?,
            series(1)?,
        ]);
    }
    Ok(Outcome {
        artifact: t.finish(),
        failures: Vec::new(),
        warnings: Vec::new(),
    })
}

fn single(header: &[&str], row: Vec<String>, ok: bool, what: &str) -> Outcome {
    let mut t = Csv::new(header);
    t.row(&row);
    Outcome {
        artifact: t.finish(),
        failures: if ok {
            Vec::new()
        } else {
            vec![what.to_string()]
        },
        warnings: Vec::new(),
    }
}

pub fn verify_lemma3(k: u64, z1: u64, z2: u64) -> Result<Outcome, CliError> {
    let c = lemma3_count(k, z1, z2).map_err(|e| CliError::Usage(e.to_string()))?;
    let ok =
        c.count as f64 <= frozen::LEMMA3_RATIO * c.envelope + frozen::LEMMA3_SMALL_ALLOWANCE as f64;
    Ok(single(
        &["k", "z1", "z2", "count", "envelope", "ratio", "pass"],
        vec![
            k.to_string(),
            z1.to_string(),
            z2.to_string(),
            c.count.to_string(),
            float(c.envelope),
            float(c.ratio),
            pass(ok),
        ],
        ok,
        "lemma3: count above frozen envelope",
    ))
}

pub fn verify_lemma4(q: u64, x: f64) -> Result<Outcome, CliError> {
    let c = lemma4_check(q, x)?;
    let ok = c.error <= LEMMA4_CONSTANT * c.bound;
    Ok(single(
        &[
            "q",
            "x",
            "lhs",
            "rhs",
            "error",
            "bound",
            "prime_sum",
            "prime_envelope",
            "pass",
        ],
        vec![
            q.to_string(),
            float(x),
            float(c.lhs),
            float(c.rhs),
            float(c.error),
            float(c.bound),
            float(c.prime_sum),
            float(c.prime_envelope),
            pass(ok),
        ],
        ok,
        "lemma4: error above 4 * 2^omega(q) log x / x",
    ))
}

pub fn verify_lemma5(q: u64, x: f64) -> Result<Outcome, CliError> {
    let s = lemma5_sums(q, x).map_err(|e| CliError::Usage(e.to_string()))?;
    let first_ratio = if q >= 2 {
        let f = factorize(q)?;
        s.sum1 * (q as f64 / f.euler_phi() as f64).powi(2) / (q as f64).ln().powi(2)
    } else {
        0.0
    };
    let mut ok = first_ratio <= frozen::LEMMA5_FIRST_RATIO;
    if x == 1e6 {
        if let Some(&(_, want)) = frozen::LEMMA5_SECOND_RATIOS.iter().find(|(fq, _)| *fq == q) {
            ok &= (s.ratio - want).abs() <= 1e-9 * want;
        }
    }
    Ok(single(
        &[
            "q",
            "x",
            "sum1",
            "sum2",
            "main2",
            "ratio",
            "first_ratio",
            "pass",
        ],
        vec![
            q.to_string(),
            float(x),
            float(s.sum1),
            float(s.sum2),
            float(s.main2),
            float(s.ratio),
            float(first_ratio),
            pass(ok),
        ],
        ok,
        "lemma5: sums off their frozen values",
    ))
}

pub fn verify_mterm(q: u64, cfg: &PipelineConfig) -> Result<Outcome, CliError> {
    let repar = m_reparametrized(q, cfg, ReparamLimits::default())?;
    let direct = match m_direct(q, cfg) {
        Ok(v) => Some(v),
        Err(fourth_moment::Error::ScaleCap(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let b_moment = fourth_moment::spectra::bc_moments(q, cfg)?.0;
    let m = main_term_breakdown(q, b_moment, cfg)?;
    let rel = direct.map(|d| {
        if d == 0.0 && repar.total == 0.0 {
            0.0
        } else {
            (d - repar.total).abs() / d.abs().max(repar.total.abs())
        }
    });
    let ok = rel.is_none_or(|r| r <= M_EQUALITY_TOLERANCE);
    Ok(single(
        &[
            "q",
            "leading",
            "relative_error_budget",
            "m_direct",
            "m_repar",
            "below_z0",
            "above_z0",
            "rel_diff",
            "b_moment",
            "E_measured",
            "pass",
        ],
        vec![
            q.to_string(),
            float(m.leading),
            float(m.relative_error_budget),
            direct.map(float).unwrap_or_default(),
            float(repar.total),
            float(repar.below_z0),
            float(repar.above_z0),
            rel.map(float).unwrap_or_default(),
            float(b_moment),
            float(m.e_measured),
            pass(ok),
        ],
        ok,
        "mterm: diagonal sums disagree",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qlist_forms() {
        assert_eq!(
            parse_qlist("3 5,7\n# x\n10..12 # tail").unwrap(),
            vec![3, 5, 7, 10, 11, 12]
        );
        assert!(parse_qlist("").is_err());
        assert!(parse_qlist("5..3").is_err());
        assert!(parse_qlist("abc").is_err());
    }
}
