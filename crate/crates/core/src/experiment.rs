//! Empirical experiments: overlapping against disjoint frequencies, and the
//! `[1,1]` frequency of an arithmetic-progression subsequence.

use serde::Serialize;

use crate::cf::Word;
use crate::error::{Error, Result};
use crate::gauss::{
    joint_pattern_measure_with, measure_of_cylinder, Accumulation, BoundedMeasure, JointOptions,
};
use crate::stats::{frequency_report_chunked, select_ap, CounterSpec, Mode, ReportRow, StreamStats};
use crate::stream::{EndReason, SourceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NormalConsistent,
    NonNormal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NormalConsistent => "NORMAL_CONSISTENT",
            Verdict::NonNormal => "NON_NORMAL",
        })
    }
}

pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct PillaiConfig {
    pub source: SourceSpec,
    pub n: u64,
    pub patterns: Vec<Word>,
    pub checkpoint_every: u64,
    pub tolerance: f64,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternSummary {
    pub pattern: String,
    pub gamma: f64,
    pub overlap_freq: f64,
    pub disjoint_freq: f64,
    pub overlap_gamma: f64,
    pub disjoint_gamma: f64,
    pub overlap_disjoint: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PillaiReport {
    pub source: String,
    pub n: u64,
    pub truncated: bool,
    pub end: Option<EndReason>,
    pub rows: Vec<ReportRow>,
    pub summary: Vec<PatternSummary>,
    pub verdict: Verdict,
}

/// Overlapping and disjoint frequencies of each pattern, compared with each
/// other and with the Gauss measure of its cylinder.
pub fn run_pillai(cfg: &PillaiConfig) -> Result<PillaiReport> {
    if cfg.patterns.is_empty() {
        return Err(Error::param("patterns", "at least one pattern is required"));
    }
    let kmax = cfg.patterns.iter().map(Word::len).max().unwrap_or(0) as u64;
    if kmax == 0 {
        return Err(Error::EmptyPattern);
    }
    if cfg.n < 10 * kmax {
        return Err(Error::param("n", format!("must be at least {}", 10 * kmax)));
    }
    let specs = cfg
        .patterns
        .iter()
        .flat_map(|w| [Mode::Overlap, Mode::Disjoint].map(|m| CounterSpec::new(w.clone(), m)))
        .collect::<Result<Vec<_>>>()?;
    let mut source = cfg.source.build()?;
    let stats = frequency_report_chunked(&mut source, &specs, cfg.n, cfg.checkpoint_every, cfg.jobs)?;
    let summary: Vec<PatternSummary> = cfg
        .patterns
        .iter()
        .enumerate()
        .map(|(p, w)| {
            let (o, d) = (2 * p, 2 * p + 1);
            let gamma = stats.gamma(o);
            let overlap_freq = stats.frequency_float(o);
            let disjoint_freq = stats.frequency_float(d);
            let overlap_gamma = (overlap_freq - gamma).abs();
            let disjoint_gamma = (disjoint_freq - gamma).abs();
            let overlap_disjoint = (overlap_freq - disjoint_freq).abs();
            let within = overlap_gamma < cfg.tolerance
                && disjoint_gamma < cfg.tolerance
                && overlap_disjoint < cfg.tolerance;
            PatternSummary {
                pattern: w.to_string(),
                gamma,
                overlap_freq,
                disjoint_freq,
                overlap_gamma,
                disjoint_gamma,
                overlap_disjoint,
                verdict: if within {
                    Verdict::NormalConsistent
                } else {
                    Verdict::NonNormal
                },
            }
        })
        .collect();
    let verdict = if summary.iter().all(|s| s.verdict == Verdict::NormalConsistent) {
        Verdict::NormalConsistent
    } else {
        Verdict::NonNormal
    };
    Ok(PillaiReport {
        source: stats.source.clone(),
        n: stats.n,
        truncated: stats.truncated(),
        end: stats.end,
        rows: stats.rows(),
        summary,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsequenceConfig {
    pub source: SourceSpec,
    /// Digits of the underlying stream.
    pub n: u64,
    pub b: u64,
    pub k: u64,
    /// Joint-measure enumeration cap; [`default_joint_cap`] when `None`.
    pub cap: Option<u64>,
    pub checkpoint_every: u64,
    pub jobs: usize,
}

/// 1000 for `k = 2`, otherwise the cap that keeps `cap^(k−1)` near 10⁶.
pub fn default_joint_cap(k: u64) -> u64 {
    if k <= 2 {
        1000
    } else {
        let cap = 10f64.powf(6.0 / (k - 1) as f64).floor() as u64;
        // guard against the float landing just below an exact power
        if (cap + 1).checked_pow((k - 1) as u32).is_some_and(|t| t <= 1_000_000) {
            cap + 1
        } else {
            cap.max(1)
        }
    }
}

/// Tuple counts above this use the outward-rounded accumulation.
pub const EXACT_TUPLE_LIMIT: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsequenceReport {
    pub source: String,
    pub b: u64,
    pub k: u64,
    pub cap: u64,
    pub selected: u64,
    pub truncated: bool,
    pub end: Option<EndReason>,
    pub rows: Vec<ReportRow>,
    pub freq_11: f64,
    pub joint_bracket: [f64; 2],
    pub joint_float: f64,
    pub gamma_11: f64,
    pub distance_joint: f64,
    pub distance_gamma_11: f64,
    pub verdict: Verdict,
}

fn distance_to(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Joint measure `γ(C₁ ∩ T⁻ᵏC₁)` with the accumulation chosen by size.
pub fn joint_measure_for(k: u64, cap: u64, jobs: usize) -> Result<BoundedMeasure> {
    let tuples = cap.checked_pow((k - 1) as u32);
    let accumulation = if tuples.is_some_and(|t| t <= EXACT_TUPLE_LIMIT) {
        Accumulation::Exact
    } else {
        Accumulation::Compressed
    };
    joint_pattern_measure_with(k, cap, JointOptions { accumulation, jobs })
}

/// Overlapping `[1,1]` frequency of `x_b, x_{b+k}, ...` compared with the
/// joint measure and with `γ(C₁₁)`; the verdict is whichever is closer.
pub fn run_subsequence(cfg: &SubsequenceConfig) -> Result<SubsequenceReport> {
    let source = cfg.source.build()?;
    let mut selected = select_ap(source, cfg.b, cfg.k)?;
    let cap = cfg.cap.unwrap_or_else(|| default_joint_cap(cfg.k));
    let joint = joint_measure_for(cfg.k, cap, cfg.jobs)?;
    let m = if cfg.n >= cfg.b { (cfg.n - cfg.b) / cfg.k + 1 } else { 0 };
    if m < 2 {
        return Err(Error::param("n", "selects fewer than two digits"));
    }
    let one_one = Word::new(vec![1, 1])?;
    let specs = [CounterSpec::new(one_one.clone(), Mode::Overlap)?];
    let stats: StreamStats =
        frequency_report_chunked(&mut selected, &specs, m, cfg.checkpoint_every, cfg.jobs)?;
    let freq_11 = stats.frequency_float(0);
    let gamma_11 = measure_of_cylinder(&one_one)?.to_f64();
    let (lo, hi) = joint.bracket();
    let distance_joint = distance_to(freq_11, lo, hi);
    let distance_gamma_11 = (freq_11 - gamma_11).abs();
    let verdict = if distance_joint < distance_gamma_11 {
        Verdict::NonNormal
    } else {
        Verdict::NormalConsistent
    };
    Ok(SubsequenceReport {
        source: stats.source.clone(),
        b: cfg.b,
        k: cfg.k,
        cap,
        selected: stats.n,
        truncated: stats.truncated(),
        end: stats.end,
        rows: stats.rows(),
        freq_11,
        joint_bracket: [lo, hi],
        joint_float: joint.float_value,
        gamma_11,
        distance_joint,
        distance_gamma_11,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pillai(source: &str, n: u64, patterns: &[&str]) -> Result<PillaiReport> {
        run_pillai(&PillaiConfig {
            source: source.parse()?,
            n,
            patterns: patterns.iter().map(|p| p.parse()).collect::<Result<_>>()?,
            checkpoint_every: n / 4,
            tolerance: DEFAULT_TOLERANCE,
            jobs: 2,
        })
    }

    #[test]
    fn periodic_twos_are_flagged() {
        let r = pillai("periodic:,2", 1000, &["2,2"]).unwrap();
        assert_eq!(r.summary[0].overlap_freq, 0.999);
        assert_eq!(r.summary[0].disjoint_freq, 1.0);
        assert_eq!(r.verdict, Verdict::NonNormal);
    }

    #[test]
    fn finite_source_is_truncated() {
        let r = pillai("rational:7/16", 100, &["2"]).unwrap();
        assert!(r.truncated);
        assert_eq!(r.n, 3);
        assert_eq!(r.end, Some(EndReason::Finished));
    }

    #[test]
    fn pillai_needs_enough_digits() {
        assert!(pillai("concat-normal", 15, &["1,2"]).is_err());
        assert!(pillai("concat-normal", 100, &[]).is_err());
    }

    #[test]
    fn all_ones_subsequence_is_non_normal() {
        let r = run_subsequence(&SubsequenceConfig {
            source: "periodic:,1".parse().unwrap(),
            n: 1001,
            b: 1,
            k: 2,
            cap: Some(100),
            checkpoint_every: 100,
            jobs: 1,
        })
        .unwrap();
        assert_eq!(r.selected, 501);
        assert_eq!(r.rows.last().unwrap().freq_num, 500);
        assert_eq!(r.verdict, Verdict::NonNormal);
    }

    #[test]
    fn default_caps() {
        assert_eq!(default_joint_cap(2), 1000);
        assert_eq!(default_joint_cap(3), 1000);
        assert_eq!(default_joint_cap(4), 100);
        assert_eq!(default_joint_cap(7), 10);
        assert_eq!(default_joint_cap(8), 7);
    }
}
