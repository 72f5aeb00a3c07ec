//! Occurrence counters over digit sequences.
//!
//! Positions are 0-based shifts `i` (the occurrence covers digits
//! `i+1 ..= i+k` in 1-based numbering) and only occurrences fully inside the
//! prefix are counted. Every mode is an arithmetic progression of admissible
//! starts: overlapping counts every start, disjoint counts multiples of `k`,
//! and aligned counts `m·i + o`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::cf::Word;
use crate::error::{Error, Result};
use crate::gauss::measure_of_cylinder;
use crate::stream::{DigitSource, EndReason, Pull, SourceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Overlap,
    Disjoint,
    Aligned { stride: u64, offset: u64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Overlap => f.write_str("overlap"),
            Mode::Disjoint => f.write_str("disjoint"),
            Mode::Aligned { stride, offset } => write!(f, "aligned:{stride}:{offset}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("mode", format!("unknown mode {s:?}"));
        match s.trim() {
            "overlap" => Ok(Mode::Overlap),
            "disjoint" => Ok(Mode::Disjoint),
            other => {
                let rest = other.strip_prefix("aligned:").ok_or_else(bad)?;
                let (m, o) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Mode::Aligned {
                    stride: m.parse().map_err(|_| bad())?,
                    offset: o.parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

/// A counting mode together with the pattern length it applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeDescriptor {
    pub mode: Mode,
    pub pattern_length: usize,
}

impl ModeDescriptor {
    pub fn new(mode: Mode, pattern_length: usize) -> Result<Self> {
        if pattern_length == 0 {
            return Err(Error::EmptyPattern);
        }
        if let Mode::Aligned { stride, offset } = mode {
            if stride == 0 || offset.saturating_add(pattern_length as u64) > stride {
                return Err(Error::OffsetOutOfRange {
                    stride,
                    offset,
                    len: pattern_length,
                });
            }
        }
        Ok(ModeDescriptor {
            mode,
            pattern_length,
        })
    }

    /// `(m, o)` such that the admissible starts are `m·i + o`.
    pub fn stride_offset(&self) -> (u64, u64) {
        match self.mode {
            Mode::Overlap => (1, 0),
            Mode::Disjoint => (self.pattern_length as u64, 0),
            Mode::Aligned { stride, offset } => (stride, offset),
        }
    }

    /// Number of admissible starts in a prefix of length `n`.
    pub fn admissible(&self, n: u64) -> u64 {
        let (m, o) = self.stride_offset();
        let k = self.pattern_length as u64;
        if n < o + k {
            0
        } else {
            (n - o - k) / m + 1
        }
    }

    /// Frequency denominator: `n` when overlapping, `⌊n/m⌋` for strided modes.
    pub fn frequency_den(&self, n: u64) -> u64 {
        match self.mode {
            Mode::Overlap => n,
            _ => n / self.stride_offset().0,
        }
    }
}

/// A pattern and the way its occurrences are counted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CounterSpec {
    pattern: Word,
    descriptor: ModeDescriptor,
}

impl CounterSpec {
    pub fn new(pattern: Word, mode: Mode) -> Result<Self> {
        let descriptor = ModeDescriptor::new(mode, pattern.len())?;
        Ok(CounterSpec {
            pattern,
            descriptor,
        })
    }

    pub fn pattern(&self) -> &Word {
        &self.pattern
    }

    pub fn mode(&self) -> Mode {
        self.descriptor.mode
    }

    pub fn descriptor(&self) -> ModeDescriptor {
        self.descriptor
    }

    /// Occurrences with start `s ∈ [s_lo, s_hi)` inside `window`, whose
    /// first element is digit `window_start`.
    fn count_starts(&self, window: &[u64], window_start: u64, s_lo: u64, s_hi: u64) -> u64 {
        let (m, o) = self.descriptor.stride_offset();
        let pat = self.pattern.digits();
        let mut s = s_lo.max(o);
        let r = (s - o) % m;
        if r != 0 {
            s += m - r;
        }
        let mut count = 0;
        while s < s_hi {
            let at = (s - window_start) as usize;
            if &window[at..at + pat.len()] == pat {
                count += 1;
            }
            s += m;
        }
        count
    }

    /// Occurrences fully inside `digits`.
    pub fn count(&self, digits: &[u64]) -> u64 {
        let k = self.pattern.len() as u64;
        let n = digits.len() as u64;
        if n < k {
            return 0;
        }
        self.count_starts(digits, 0, 0, n - k + 1)
    }
}

fn nonempty(w: &Word) -> Result<()> {
    if w.is_empty() {
        Err(Error::EmptyPattern)
    } else {
        Ok(())
    }
}

pub fn count_overlapping(digits: &[u64], w: &Word) -> Result<u64> {
    nonempty(w)?;
    Ok(CounterSpec::new(w.clone(), Mode::Overlap)?.count(digits))
}

pub fn count_disjoint(digits: &[u64], w: &Word) -> Result<u64> {
    nonempty(w)?;
    Ok(CounterSpec::new(w.clone(), Mode::Disjoint)?.count(digits))
}

pub fn count_aligned(digits: &[u64], stride: u64, offset: u64, w: &Word) -> Result<u64> {
    nonempty(w)?;
    Ok(CounterSpec::new(w.clone(), Mode::Aligned { stride, offset })?.count(digits))
}

/// Overlapping `[1,1]` occurrences in an AP-selected stream with gap `k`.
pub fn joint_occurrence_count(digits: &[u64], k: u64) -> Result<u64> {
    if k < 2 {
        return Err(Error::param("k", "must be at least 2"));
    }
    count_overlapping(digits, &Word::new(vec![1, 1])?)
}

/// Digits at 1-based positions `b, b+k, b+2k, ...` of the inner source.
#[derive(Clone, Debug)]
pub struct ApSelect<S> {
    inner: S,
    b: u64,
    k: u64,
    emitted: u64,
}

pub fn select_ap<S: DigitSource>(source: S, b: u64, k: u64) -> Result<ApSelect<S>> {
    if b == 0 {
        return Err(Error::param("b", "must be at least 1"));
    }
    if k < 2 {
        return Err(Error::param("k", "must be at least 2"));
    }
    Ok(ApSelect {
        inner: source,
        b,
        k,
        emitted: 0,
    })
}

impl<S> ApSelect<S> {
    pub fn into_inner(self) -> S {
        self.inner
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: DigitSource> DigitSource for ApSelect<S> {
    fn pull(&mut self) -> Pull {
        let skip = if self.emitted == 0 { self.b - 1 } else { self.k - 1 };
        for _ in 0..skip {
            if let Pull::End(reason) = self.inner.pull() {
                return Pull::End(reason);
            }
        }
        let next = self.inner.pull();
        if let Pull::Digit(_) = next {
            self.emitted += 1;
        }
        next
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::ApSelection
    }

    fn describe(&self) -> String {
        format!("ap:b={},k={}:{}", self.b, self.k, self.inner.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub n: u64,
    /// One count per counter, in counter order.
    pub counts: Vec<u64>,
}

/// Result of a counting pass.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamStats {
    pub source: String,
    pub requested: u64,
    /// Digits consumed.
    pub n: u64,
    /// Set when the source ended before `requested` digits.
    pub end: Option<EndReason>,
    pub specs: Vec<CounterSpec>,
    pub counts: Vec<u64>,
    /// Snapshots every `checkpoint_every` digits and at the final length.
    pub checkpoints: Vec<Checkpoint>,
    gammas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: u64,
    pub pattern: String,
    pub mode: String,
    pub count: u64,
    pub freq_num: u64,
    pub freq_den: u64,
    pub freq_float: f64,
    pub gamma_float: f64,
    pub abs_err: f64,
}

/// `count / den` in lowest terms; `0/1` when nothing is admissible.
pub fn frequency(count: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::new_raw(0, 1)
    } else {
        Ratio::new(count, den)
    }
}

impl StreamStats {
    fn new(source: String, requested: u64, specs: &[CounterSpec]) -> Result<Self> {
        let gammas = specs
            .iter()
            .map(|s| Ok(measure_of_cylinder(s.pattern())?.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        Ok(StreamStats {
            source,
            requested,
            n: 0,
            end: None,
            specs: specs.to_vec(),
            counts: vec![0; specs.len()],
            checkpoints: Vec::new(),
            gammas,
        })
    }

    pub fn truncated(&self) -> bool {
        self.end.is_some()
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.gammas[i]
    }

    /// Exact frequency of counter `i` at the final length.
    pub fn frequency(&self, i: usize) -> Ratio<u64> {
        frequency(self.counts[i], self.specs[i].descriptor().frequency_den(self.n))
    }

    pub fn frequency_float(&self, i: usize) -> f64 {
        ratio_to_f64(self.frequency(i))
    }

    fn row(&self, n: u64, i: usize, count: u64) -> ReportRow {
        let spec = &self.specs[i];
        let freq = frequency(count, spec.descriptor().frequency_den(n));
        let freq_float = ratio_to_f64(freq);
        ReportRow {
            n,
            pattern: spec.pattern().to_string(),
            mode: spec.mode().to_string(),
            count,
            freq_num: *freq.numer(),
            freq_den: *freq.denom(),
            freq_float,
            gamma_float: self.gammas[i],
            abs_err: (freq_float - self.gammas[i]).abs(),
        }
    }

    /// One row per counter per checkpoint, checkpoints in order.
    pub fn rows(&self) -> Vec<ReportRow> {
        self.checkpoints
            .iter()
            .flat_map(|c| c.counts.iter().enumerate().map(|(i, &count)| self.row(c.n, i, count)))
            .collect()
    }

    pub fn final_rows(&self) -> Vec<ReportRow> {
        (0..self.specs.len()).map(|i| self.row(self.n, i, self.counts[i])).collect()
    }

    fn snapshot(&mut self) {
        if self.checkpoints.last().map(|c| c.n) != Some(self.n) {
            self.checkpoints.push(Checkpoint {
                n: self.n,
                counts: self.counts.clone(),
            });
        }
    }
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn validate(n: u64, specs: &[CounterSpec], checkpoint_every: u64) -> Result<()> {
    if checkpoint_every == 0 {
        return Err(Error::param("checkpoint_every", "must be at least 1"));
    }
    let kmax = specs.iter().map(|s| s.pattern().len()).max().unwrap_or(0) as u64;
    if n < kmax {
        return Err(Error::param("n", format!("must be at least the pattern length {kmax}")));
    }
    Ok(())
}

const BLOCK: u64 = 1 << 16;

/// Single streaming pass over the first `n` digits of `source`, keeping
/// only a block of digits in memory.
pub fn frequency_report<S: DigitSource + ?Sized>(
    source: &mut S,
    specs: &[CounterSpec],
    n: u64,
    checkpoint_every: u64,
) -> Result<StreamStats> {
    validate(n, specs, checkpoint_every)?;
    let mut stats = StreamStats::new(source.describe(), n, specs)?;
    let carry = specs.iter().map(|s| s.pattern().len()).max().unwrap_or(1) - 1;
    let mut window: Vec<u64> = Vec::new();
    while stats.n < n {
        let next_checkpoint = (stats.n / checkpoint_every + 1) * checkpoint_every;
        let target = next_checkpoint.min(n).min(stats.n + BLOCK);
        let keep = window.len().min(carry);
        window.drain(..window.len() - keep);
        let window_start = stats.n - keep as u64;
        let mut got = stats.n;
        while got < target {
            match source.pull() {
                Pull::Digit(d) => {
                    window.push(d);
                    got += 1;
                }
                Pull::End(reason) => {
                    stats.end = Some(reason);
                    break;
                }
            }
        }
        for (i, spec) in specs.iter().enumerate() {
            let k = spec.pattern().len() as u64;
            // occurrences ending in (stats.n, got]
            let s_lo = (stats.n + 1).saturating_sub(k);
            let s_hi = (got + 1).saturating_sub(k);
            if s_hi > s_lo {
                stats.counts[i] += spec.count_starts(&window, window_start, s_lo, s_hi);
            }
        }
        stats.n = got;
        if stats.end.is_some() {
            break;
        }
        if stats.n % checkpoint_every == 0 {
            stats.snapshot();
        }
    }
    stats.snapshot();
    Ok(stats)
}

/// Counts over a materialized prefix. Work is split on a fixed grid of
/// checkpoints and blocks, so the result does not depend on `jobs`; each
/// chunk sees the preceding `|w|−1` digits for occurrences across a seam.
pub fn count_chunked(
    digits: &[u64],
    specs: &[CounterSpec],
    checkpoint_every: u64,
    jobs: usize,
) -> Result<StreamStats> {
    let n = digits.len() as u64;
    validate(n, specs, checkpoint_every)?;
    let mut stats = StreamStats::new(String::new(), n, specs)?;
    let mut bounds = vec![0u64];
    while *bounds.last().expect("non-empty") < n {
        let at = *bounds.last().expect("non-empty");
        let next_checkpoint = (at / checkpoint_every + 1) * checkpoint_every;
        bounds.push(next_checkpoint.min(at + BLOCK).min(n));
    }
    let segments: Vec<(u64, u64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    let partial: Vec<Vec<u64>> = crate::with_jobs(jobs, || {
        segments
            .par_iter()
            .map(|&(lo, hi)| {
                specs
                    .iter()
                    .map(|spec| {
                        let k = spec.pattern().len() as u64;
                        let s_lo = (lo + 1).saturating_sub(k);
                        let s_hi = (hi + 1).saturating_sub(k);
                        if s_hi > s_lo {
                            spec.count_starts(digits, 0, s_lo, s_hi)
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect()
    });
    for (&(_, hi), counts) in segments.iter().zip(partial) {
        for (total, c) in stats.counts.iter_mut().zip(counts) {
            *total += c;
        }
        stats.n = hi;
        if hi % checkpoint_every == 0 {
            stats.snapshot();
        }
    }
    stats.snapshot();
    Ok(stats)
}

/// Pulls `n` digits, then counts them in parallel with [`count_chunked`].
pub fn frequency_report_chunked<S: DigitSource + ?Sized>(
    source: &mut S,
    specs: &[CounterSpec],
    n: u64,
    checkpoint_every: u64,
    jobs: usize,
) -> Result<StreamStats> {
    validate(n, specs, checkpoint_every)?;
    let (digits, end) = crate::stream::take_digits(source, n);
    let mut stats = if digits.len() as u64 >= specs.iter().map(|s| s.pattern().len() as u64).max().unwrap_or(0) {
        count_chunked(&digits, specs, checkpoint_every, jobs)?
    } else {
        let mut stats = StreamStats::new(String::new(), n, specs)?;
        stats.n = digits.len() as u64;
        stats.snapshot();
        stats
    };
    stats.source = source.describe();
    stats.requested = n;
    stats.end = end;
    Ok(stats)
}

/// Overlapping occurrences split by the smallest dyadic block containing
/// them.
///
/// Blocks at level `p ≥ 2` have size `2^(p−1)·k` and start at multiples of
/// their size. An occurrence starting at a multiple of `k` is aligned; any
/// other crosses a block boundary `B = k·⌈s/k⌉`, and its level is
/// `2 + v₂(B/k)`, where it starts `B − s` before the middle of its block.
/// Levels above `1 + ⌊log₂(n/k)⌋` have no full block in the prefix and are
/// collected as the boundary term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicDecomposition {
    pub aligned: u64,
    /// Counts for levels `2, 3, ...`.
    pub levels: Vec<u64>,
    pub boundary: u64,
}

impl DyadicDecomposition {
    pub fn total(&self) -> u64 {
        self.aligned + self.levels.iter().sum::<u64>() + self.boundary
    }
}

pub fn dyadic_decomposition(digits: &[u64], w: &Word) -> Result<DyadicDecomposition> {
    nonempty(w)?;
    let k = w.len() as u64;
    let n = digits.len() as u64;
    let aligned = count_disjoint(digits, w)?;
    let top = if n < k { 1 } else { 1 + (n / k).ilog2() as u64 };
    let mut levels = Vec::new();
    for p in 2..=top {
        let stride = (1u64 << (p - 1)) * k;
        let middle = (1u64 << (p - 2)) * k;
        let mut c = 0;
        for j in 1..k {
            c += count_aligned(digits, stride, middle - j, w)?;
        }
        levels.push(c);
    }
    let overlap = count_overlapping(digits, w)?;
    let classified = aligned + levels.iter().sum::<u64>();
    Ok(DyadicDecomposition {
        aligned,
        levels,
        boundary: overlap - classified,
    })
}
