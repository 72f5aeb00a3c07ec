//! Exhaustive exact checks over bounded families of words, plus a seeded
//! comparison of the counters against a rescanning oracle.
//!
//! Work is split by word index, and failures are reported by the smallest
//! index, so reports do not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cf::{denominator_dominance, Word};
use crate::error::{Error, Result};
use crate::gauss::{
    joint_pattern_measure, measure_compare, measure_of_cylinder, pairwise_cylinder_inequality,
    reversal_equality_check, PairwiseVerdict,
};
use crate::stats::{count_aligned, count_disjoint, count_overlapping, frequency_report, CounterSpec, Mode};
use crate::stream::VecSource;

/// Largest word family an exhaustive suite will enumerate.
pub const WORD_CEILING: u64 = 20_000_000;
/// Largest number of random streams for the counting suite.
pub const STREAM_CEILING: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Reversal,
    Dominance,
    Pairwise,
    JointK2,
    Counting,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Reversal,
        Suite::Dominance,
        Suite::Pairwise,
        Suite::JointK2,
        Suite::Counting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Reversal => "reversal",
            Suite::Dominance => "dominance",
            Suite::Pairwise => "pairwise",
            Suite::JointK2 => "joint-k2",
            Suite::Counting => "counting",
        }
    }

    /// Bounds used when none are given.
    pub fn default_bounds(self) -> Bounds {
        let (max_digit, max_len) = match self {
            Suite::Reversal => (4, 5),
            Suite::Dominance => (5, 4),
            _ => (5, 3),
        };
        Bounds {
            max_digit,
            max_len,
            cap: 1000,
            streams: 1000,
            max_stream_len: 200,
            seed: 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| Error::param("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_digit: u64,
    pub max_len: usize,
    /// Enumeration cap for the joint measure.
    pub cap: u64,
    pub streams: u64,
    pub max_stream_len: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checked: u64,
    pub failures: u64,
    /// The first failing case in enumeration order.
    pub counterexample: Option<String>,
    pub passed: bool,
    #[serde(flatten)]
    pub details: BTreeMap<&'static str, Value>,
}

/// Number of words with digits in `1..=max_digit` and lengths `1..=max_len`.
pub fn family_size(max_digit: u64, max_len: usize) -> Result<u64> {
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..max_len {
        layer = layer.checked_mul(max_digit).filter(|&l| l <= WORD_CEILING).ok_or(
            Error::ResourceCeiling {
                count: format!("{max_digit}^{max_len}"),
                ceiling: WORD_CEILING,
            },
        )?;
        total += layer;
    }
    if total > WORD_CEILING {
        return Err(Error::ResourceCeiling {
            count: total.to_string(),
            ceiling: WORD_CEILING,
        });
    }
    Ok(total)
}

/// The `index`-th word of the family, ordered by length, then
/// lexicographically.
pub fn word_at(max_digit: u64, mut index: u64) -> Word {
    let mut len = 1u32;
    let mut layer = max_digit;
    while index >= layer {
        index -= layer;
        len += 1;
        layer *= max_digit;
    }
    let mut digits = vec![1; len as usize];
    for slot in digits.iter_mut().rev() {
        *slot = 1 + index % max_digit;
        index /= max_digit;
    }
    Word::new(digits).expect("digits are positive")
}

/// All words of the family, in order.
pub fn words(max_digit: u64, max_len: usize) -> Result<Vec<Word>> {
    let total = family_size(max_digit, max_len)?;
    Ok((0..total).map(|i| word_at(max_digit, i)).collect())
}

#[derive(Default)]
struct Tally {
    checked: u64,
    failures: u64,
    first: Option<(u64, String)>,
    tags: BTreeMap<&'static str, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures += other.failures;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        for (k, v) in other.tags {
            *self.tags.entry(k).or_default() += v;
        }
        self
    }
}

enum Outcome {
    Skip,
    Pass(Option<&'static str>),
    Fail(String),
}

fn run_indexed(total: u64, jobs: usize, check: impl Fn(u64) -> Outcome + Sync) -> Tally {
    crate::with_jobs(jobs, || {
        (0..total)
            .into_par_iter()
            .fold(Tally::default, |mut t, i| {
                match check(i) {
                    Outcome::Skip => {}
                    Outcome::Pass(tag) => {
                        t.checked += 1;
                        if let Some(tag) = tag {
                            *t.tags.entry(tag).or_default() += 1;
                        }
                    }
                    Outcome::Fail(detail) => {
                        t.checked += 1;
                        t.failures += 1;
                        if t.first.as_ref().is_none_or(|(j, _)| i < *j) {
                            t.first = Some((i, detail));
                        }
                    }
                }
                t
            })
            .reduce(Tally::default, Tally::merge)
    })
}

fn report(suite: Suite, tally: Tally, mut details: BTreeMap<&'static str, Value>) -> VerifyReport {
    for (k, v) in &tally.tags {
        details.insert(k, json!(v));
    }
    VerifyReport {
        suite,
        checked: tally.checked,
        failures: tally.failures,
        passed: tally.failures == 0,
        counterexample: tally.first.map(|(_, d)| d),
        details,
    }
}

fn check_bounds(b: &Bounds) -> Result<()> {
    if b.max_digit == 0 {
        return Err(Error::param("max_digit", "must be at least 1"));
    }
    if b.max_len == 0 {
        return Err(Error::param("max_len", "must be at least 1"));
    }
    Ok(())
}

/// Runs one suite.
pub fn run_suite(suite: Suite, bounds: &Bounds, jobs: usize) -> Result<VerifyReport> {
    match suite {
        Suite::Reversal => verify_reversal(bounds, jobs),
        Suite::Dominance => verify_dominance(bounds, jobs),
        Suite::Pairwise => verify_pairwise(bounds, jobs),
        Suite::JointK2 => verify_joint_k2(bounds.cap),
        Suite::Counting => verify_counting(bounds, jobs),
    }
}

fn family_details(b: &Bounds) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([("max_digit", json!(b.max_digit)), ("max_len", json!(b.max_len))])
}

/// `γ(C_w) = γ(C_{reverse(w)})` for every word of the family.
pub fn verify_reversal(b: &Bounds, jobs: usize) -> Result<VerifyReport> {
    check_bounds(b)?;
    let total = family_size(b.max_digit, b.max_len)?;
    let tally = run_indexed(total, jobs, |i| {
        let w = word_at(b.max_digit, i);
        match reversal_equality_check(&w) {
            Ok(true) => Outcome::Pass(None),
            Ok(false) => Outcome::Fail(w.to_string()),
            Err(e) => Outcome::Fail(format!("{w}: {e}")),
        }
    });
    Ok(report(Suite::Reversal, tally, family_details(b)))
}

/// Denominator dominance for every word of the family ending in a digit
/// `>= 2`.
pub fn verify_dominance(b: &Bounds, jobs: usize) -> Result<VerifyReport> {
    check_bounds(b)?;
    let total = family_size(b.max_digit, b.max_len)?;
    let tally = run_indexed(total, jobs, |i| {
        let w = word_at(b.max_digit, i);
        if w.last() == Some(1) {
            return Outcome::Skip;
        }
        match denominator_dominance(&w) {
            Ok(true) => Outcome::Pass(None),
            Ok(false) => Outcome::Fail(w.to_string()),
            Err(e) => Outcome::Fail(format!("{w}: {e}")),
        }
    });
    Ok(report(Suite::Dominance, tally, family_details(b)))
}

/// The term pairing for every word of the family, with the verdict its last
/// digit calls for.
pub fn verify_pairwise(b: &Bounds, jobs: usize) -> Result<VerifyReport> {
    check_bounds(b)?;
    let total = family_size(b.max_digit, b.max_len)?;
    let tally = run_indexed(total, jobs, |i| {
        let w = word_at(b.max_digit, i);
        let expected = if w.last() == Some(1) {
            PairwiseVerdict::PairedEqual
        } else {
            PairwiseVerdict::StrictGreater
        };
        match pairwise_cylinder_inequality(&w) {
            Ok(v) if v == expected => Outcome::Pass(Some(match v {
                PairwiseVerdict::StrictGreater => "strict_greater",
                PairwiseVerdict::PairedEqual => "paired_equal",
            })),
            Ok(v) => Outcome::Fail(format!("{w}: {v:?}")),
            Err(e) => Outcome::Fail(format!("{w}: {e}")),
        }
    });
    Ok(report(Suite::Pairwise, tally, family_details(b)))
}

/// `log₂(32/(9π))`, the closed form of `γ(C₁ ∩ T⁻²C₁)`.
pub fn joint_k2_closed_form() -> f64 {
    (32.0 / (9.0 * std::f64::consts::PI)).log2()
}

/// The `k = 2` joint measure: its bracket must contain the closed form and
/// its exact lower bound must exceed `γ(C₁₁)`.
pub fn verify_joint_k2(cap: u64) -> Result<VerifyReport> {
    let m = joint_pattern_measure(2, cap)?;
    let gamma11 = measure_of_cylinder(&Word::new(vec![1, 1])?)?;
    let (lo, hi) = m.bracket();
    let oracle = joint_k2_closed_form();
    let contains = lo <= oracle && oracle <= hi;
    let exceeds = measure_compare(&m.lower, &gamma11).is_gt();
    let mut failures = 0;
    let mut counterexample = None;
    if !contains {
        failures += 1;
        counterexample = Some(format!("bracket [{lo}, {hi}] misses {oracle}"));
    }
    if !exceeds {
        failures += 1;
        counterexample.get_or_insert(format!("lower bound {} does not exceed γ(C[1,1])", m.lower));
    }
    let details = BTreeMap::from([
        ("cap", json!(cap)),
        ("bracket", json!([lo, hi])),
        ("width", json!(hi - lo)),
        ("closed_form", json!(oracle)),
        ("gamma_11", json!(gamma11.to_f64())),
        ("contains_closed_form", json!(contains)),
        ("lower_exceeds_gamma_11", json!(exceeds)),
    ]);
    Ok(VerifyReport {
        suite: Suite::JointK2,
        checked: 2,
        failures,
        passed: failures == 0,
        counterexample,
        details,
    })
}

/// Rescanning oracle: tests every start against the pattern digit by digit
/// and against the stride by walking the progression.
pub mod oracle {
    pub fn occurs_at(digits: &[u64], pattern: &[u64], i: usize) -> bool {
        if i + pattern.len() > digits.len() {
            return false;
        }
        for (j, &p) in pattern.iter().enumerate() {
            if digits[i + j] != p {
                return false;
            }
        }
        true
    }

    pub fn count(digits: &[u64], pattern: &[u64], stride: usize, offset: usize) -> u64 {
        let mut count = 0;
        for i in 0..digits.len() {
            let mut start = offset;
            while start < i {
                start += stride;
            }
            if start == i && occurs_at(digits, pattern, i) {
                count += 1;
            }
        }
        count
    }
}

/// One random case of the counting suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingCase {
    pub digits: Vec<u64>,
    pub pattern: Word,
    pub stride: u64,
    pub offset: u64,
}

fn below(rng: &mut ChaCha12Rng, n: u64) -> u64 {
    rng.next_u64() % n
}

/// Case `index` of the stream with the given seed: length `1..=max_len`,
/// digits `<= 4`, pattern length `<= 3`, stride up to `k + 4`.
pub fn counting_case(seed: u64, index: u64, max_len: usize) -> CountingCase {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let len = 1 + below(&mut rng, max_len.max(1) as u64) as usize;
    let digits = (0..len).map(|_| 1 + below(&mut rng, 4)).collect();
    let k = 1 + below(&mut rng, 3);
    let pattern = Word::new((0..k).map(|_| 1 + below(&mut rng, 4)).collect()).expect("positive");
    let stride = k + below(&mut rng, 5);
    let offset = below(&mut rng, stride - k + 1);
    CountingCase {
        digits,
        pattern,
        stride,
        offset,
    }
}

fn check_case(c: &CountingCase) -> std::result::Result<(), String> {
    let k = c.pattern.len();
    let p = c.pattern.digits();
    let fast = [
        count_overlapping(&c.digits, &c.pattern),
        count_disjoint(&c.digits, &c.pattern),
        count_aligned(&c.digits, c.stride, c.offset, &c.pattern),
    ];
    let slow = [
        oracle::count(&c.digits, p, 1, 0),
        oracle::count(&c.digits, p, k, 0),
        oracle::count(&c.digits, p, c.stride as usize, c.offset as usize),
    ];
    let modes = [
        Mode::Overlap,
        Mode::Disjoint,
        Mode::Aligned {
            stride: c.stride,
            offset: c.offset,
        },
    ];
    let specs: Vec<CounterSpec> = modes
        .iter()
        .map(|&m| CounterSpec::new(c.pattern.clone(), m))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let streamed = if c.digits.len() >= k {
        let mut src = VecSource::new(c.digits.clone()).map_err(|e| e.to_string())?;
        let n = c.digits.len() as u64;
        Some(frequency_report(&mut src, &specs, n, 7).map_err(|e| e.to_string())?.counts)
    } else {
        None
    };
    for (i, mode) in modes.iter().enumerate() {
        let got = fast[i].as_ref().map_err(|e| e.to_string())?;
        if *got != slow[i] || streamed.as_ref().is_some_and(|s| s[i] != slow[i]) {
            return Err(format!(
                "{mode} pattern {} on {:?}: counter {got}, oracle {}",
                c.pattern, c.digits, slow[i]
            ));
        }
    }
    Ok(())
}

/// Overlapping, disjoint and aligned counters (direct and streamed) against
/// the rescanning oracle on seeded random streams.
pub fn verify_counting(b: &Bounds, jobs: usize) -> Result<VerifyReport> {
    if b.streams > STREAM_CEILING {
        return Err(Error::ResourceCeiling {
            count: b.streams.to_string(),
            ceiling: STREAM_CEILING,
        });
    }
    if b.max_stream_len == 0 {
        return Err(Error::param("max_stream_len", "must be at least 1"));
    }
    let tally = run_indexed(b.streams, jobs, |i| {
        let case = counting_case(b.seed, i, b.max_stream_len);
        match check_case(&case) {
            Ok(()) => Outcome::Pass(None),
            Err(detail) => Outcome::Fail(format!("stream {i}: {detail}")),
        }
    });
    let details = BTreeMap::from([
        ("seed", json!(b.seed)),
        ("streams", json!(b.streams)),
        ("max_stream_len", json!(b.max_stream_len)),
        ("comparisons", json!(3 * tally.checked)),
    ]);
    Ok(report(Suite::Counting, tally, details))
}
