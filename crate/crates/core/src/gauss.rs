//! Gauss measure `γ(A) = (1/ln 2) ∫_A dx/(1+x)` held exactly.
//!
//! The measure of an interval `(lo, hi)` is `log2((1+hi)/(1+lo))`, so every
//! cylinder measure is the base-2 logarithm of a rational. A [`LogRational`]
//! stores that rational; sums of measures are products of arguments and
//! comparisons are exact rational comparisons. Floats appear only in reports.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::cf::{cylinder_interval, fmt_rational, reverse, tail_convergents, Word};
use crate::error::{Error, Result};

/// A Gauss-measure value `log2(arg)` with `arg >= 1`; zero is `arg = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogRational {
    arg: BigRational,
}

impl LogRational {
    pub fn zero() -> Self {
        LogRational {
            arg: BigRational::one(),
        }
    }

    pub fn from_arg(arg: BigRational) -> Result<Self> {
        if arg < BigRational::one() {
            return Err(Error::NegativeMeasure(fmt_rational(&arg)));
        }
        Ok(LogRational { arg })
    }

    pub fn arg(&self) -> &BigRational {
        &self.arg
    }

    pub fn into_arg(self) -> BigRational {
        self.arg
    }

    /// Nearest-ish binary64 value of `log2(arg)`, accurate to a few ulps.
    pub fn to_f64(&self) -> f64 {
        let excess = &self.arg - BigRational::one();
        match excess.to_f64() {
            Some(e) if e.is_finite() => e.ln_1p() / std::f64::consts::LN_2,
            _ => log2_big(&self.arg),
        }
    }
}

fn log2_big(r: &BigRational) -> f64 {
    let bits = |n: &BigInt| -> f64 {
        let b = n.bits();
        let shift = b.saturating_sub(60);
        let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
        top.log2() + shift as f64
    };
    bits(r.numer()) - bits(r.denom())
}

impl Ord for LogRational {
    fn cmp(&self, other: &Self) -> Ordering {
        measure_compare(self, other)
    }
}

impl PartialOrd for LogRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &LogRational {
    type Output = LogRational;

    fn add(self, rhs: &LogRational) -> LogRational {
        measure_sum(self, rhs)
    }
}

impl fmt::Display for LogRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log2({})", fmt_rational(&self.arg))
    }
}

/// Measure of a disjoint union: the product of the arguments.
pub fn measure_sum(a: &LogRational, b: &LogRational) -> LogRational {
    LogRational {
        arg: &a.arg * &b.arg,
    }
}

/// Exact comparison by cross-multiplication of the arguments.
pub fn measure_compare(a: &LogRational, b: &LogRational) -> Ordering {
    let left = a.arg.numer() * b.arg.denom();
    let right = b.arg.numer() * a.arg.denom();
    left.cmp(&right)
}

/// `γ((lo, hi)) = log2((1+hi)/(1+lo))` for `0 <= lo <= hi`.
pub fn measure_of_interval(lo: &BigRational, hi: &BigRational) -> Result<LogRational> {
    let one = BigRational::one();
    LogRational::from_arg((&one + hi) / (&one + lo))
}

/// Unreduced `(num, den)` of the cylinder argument. For `(p, q)` the last
/// convergent and `(p', q')` the previous one the argument is
/// `(p+q)(q+q') / (q (p+q+p'+q'))` or its reciprocal depending on parity;
/// both factors pairs are coprime so the fraction is already reduced.
fn cylinder_arg_parts(digits: &[u64]) -> (BigUint, BigUint) {
    let (p, q, p1, q1) = tail_convergents(digits);
    let qb = &q + &q1;
    let pb = &p + &p1;
    // own value p/q, bumped value pb/qb; (1+own) = (p+q)/q, (1+bumped) = (pb+qb)/qb
    let own_num = &p + &q;
    let bumped_num = pb + &qb;
    if digits.len() % 2 == 1 {
        // own value is the upper endpoint
        (own_num * qb, q * bumped_num)
    } else {
        (bumped_num * q, qb * own_num)
    }
}

/// `γ(C_w) = log2((1+hi)/(1+lo))` over the cylinder interval of `w`.
pub fn measure_of_cylinder(w: &Word) -> Result<LogRational> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let (num, den) = cylinder_arg_parts(w.digits());
    let arg = BigRational::new_raw(BigInt::from(num), BigInt::from(den));
    debug_assert_eq!(arg, reduced(&arg));
    Ok(LogRational { arg })
}

fn reduced(r: &BigRational) -> BigRational {
    BigRational::new(r.numer().clone(), r.denom().clone())
}

/// Measure of `{x : first digit > n}`, the interval `(0, 1/(n+1))`:
/// `log2((n+2)/(n+1))`.
pub fn digit_tail_measure(n: u64) -> Result<LogRational> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    let n = BigInt::from(n);
    Ok(LogRational {
        arg: BigRational::new(&n + 2, &n + 1),
    })
}

/// An exact partial sum together with a rigorous bound on the omitted mass:
/// the true value lies in `[lower, lower + tail_bound]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedMeasure {
    pub lower: LogRational,
    pub tail_bound: LogRational,
    pub float_value: f64,
}

impl BoundedMeasure {
    pub fn upper(&self) -> LogRational {
        measure_sum(&self.lower, &self.tail_bound)
    }

    /// `[lower, lower + tail]` as floats rounded outward.
    pub fn bracket(&self) -> (f64, f64) {
        (
            round_out(self.lower.to_f64(), false),
            round_out(self.upper().to_f64(), true),
        )
    }
}

/// Moves a float computed to within a few ulps safely past the true value.
pub fn round_out(x: f64, up: bool) -> f64 {
    let mut y = x;
    for _ in 0..4 {
        y = if up { y.next_up() } else { y.next_down() };
    }
    if !up && y < 0.0 && x >= 0.0 {
        0.0
    } else {
        y
    }
}

/// How partial products are accumulated in [`joint_pattern_measure_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Accumulation {
    /// Fully exact rational products.
    #[default]
    Exact,
    /// Round the accumulated argument outward to denominators `2^256` after
    /// every chunk; the rounding excess is folded into the tail bound.
    Compressed,
}

#[derive(Clone, Copy, Debug)]
pub struct JointOptions {
    pub accumulation: Accumulation,
    pub jobs: usize,
}

impl Default for JointOptions {
    fn default() -> Self {
        JointOptions {
            accumulation: Accumulation::Exact,
            jobs: 1,
        }
    }
}

/// Largest tuple enumeration `joint_pattern_measure` accepts.
pub const JOINT_TUPLE_CEILING: u64 = 50_000_000;
const JOINT_CHUNK: u64 = 1024;
const COMPRESS_BITS: u64 = 256;

/// `γ(C_1 ∩ T^{-k} C_1)` truncated to intermediate digits `1..=cap`, exact.
pub fn joint_pattern_measure(k: u64, cap: u64) -> Result<BoundedMeasure> {
    joint_pattern_measure_with(k, cap, JointOptions::default())
}

/// Sums `γ(C_[1, n_1, ..., n_{k-1}, 1])` over `(n_1..n_{k-1}) ∈ {1..cap}^{k-1}`
/// enumerated lexicographically. The omitted mass is bounded by the union
/// bound `(k-1) · γ(first digit > cap)`, valid because the shift preserves
/// the Gauss measure.
///
/// The enumeration is cut into fixed-size chunks independent of `jobs` and
/// combined in chunk order, so every option gives the same result for every
/// worker count.
pub fn joint_pattern_measure_with(k: u64, cap: u64, opts: JointOptions) -> Result<BoundedMeasure> {
    if k < 2 {
        return Err(Error::param("k", "must be at least 2"));
    }
    if cap == 0 {
        return Err(Error::param("cap", "must be at least 1"));
    }
    let free = u32::try_from(k - 1).map_err(|_| Error::param("k", "too large"))?;
    let total = cap
        .checked_pow(free)
        .filter(|&t| t <= JOINT_TUPLE_CEILING)
        .ok_or_else(|| Error::ResourceCeiling {
            count: format!("{cap}^{free}"),
            ceiling: JOINT_TUPLE_CEILING,
        })?;
    let chunks = total.div_ceil(JOINT_CHUNK);
    let free = free as usize;

    let partials: Vec<(BigUint, BigUint)> = crate::with_jobs(opts.jobs, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * JOINT_CHUNK;
                let end = (start + JOINT_CHUNK).min(total);
                let (n, d) = chunk_product(free, cap, start, end);
                let g = n.gcd(&d);
                (n / &g, d / g)
            })
            .collect()
    });

    let mut tail = digit_tail_measure(cap)?.into_arg();
    tail = pow_rational(&tail, free);

    let lower = match opts.accumulation {
        Accumulation::Exact => {
            let (n, d) = product_tree(partials);
            BigRational::new(BigInt::from(n), BigInt::from(d))
        }
        Accumulation::Compressed => {
            let mut lo = BigRational::one();
            let mut hi = BigRational::one();
            for (n, d) in partials {
                let term = BigRational::new_raw(BigInt::from(n), BigInt::from(d));
                lo = round_dyadic(&(&lo * &term), false);
                hi = round_dyadic(&(&hi * &term), true);
            }
            tail *= &hi / &lo;
            lo
        }
    };
    let lower = LogRational::from_arg(lower)?;
    let float_value = lower.to_f64();
    Ok(BoundedMeasure {
        lower,
        tail_bound: LogRational::from_arg(tail)?,
        float_value,
    })
}

fn pow_rational(r: &BigRational, e: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out = &out * r;
    }
    out
}

/// Rounds `r > 0` to a multiple of `2^-256`, down or up.
fn round_dyadic(r: &BigRational, up: bool) -> BigRational {
    let scaled = r.numer() << COMPRESS_BITS;
    let (q, rem) = scaled.div_rem(r.denom());
    let q = if up && rem != BigInt::from(0) { q + 1 } else { q };
    BigRational::new(q, BigInt::one() << COMPRESS_BITS)
}

/// Product of the cylinder arguments for tuple indices `start..end`.
fn chunk_product(free: usize, cap: u64, start: u64, end: u64) -> (BigUint, BigUint) {
    let mut tuple = vec![1u64; free];
    // base-cap digits of `start`, most significant first
    let mut rest = start;
    for slot in tuple.iter_mut().rev() {
        *slot = rest % cap + 1;
        rest /= cap;
    }
    let mut word = Vec::with_capacity(free + 2);
    let mut terms = Vec::with_capacity((end - start) as usize);
    for _ in start..end {
        word.clear();
        word.push(1);
        word.extend_from_slice(&tuple);
        word.push(1);
        terms.push(cylinder_arg_parts(&word));
        // odometer increment
        for slot in tuple.iter_mut().rev() {
            if *slot < cap {
                *slot += 1;
                break;
            }
            *slot = 1;
        }
    }
    product_tree(terms)
}

/// Balanced product of `(num, den)` pairs without intermediate reduction.
fn product_tree(mut items: Vec<(BigUint, BigUint)>) -> (BigUint, BigUint) {
    if items.is_empty() {
        return (BigUint::one(), BigUint::one());
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some((n1, d1)) = it.next() {
            match it.next() {
                Some((n2, d2)) => next.push((n1 * n2, d1 * d2)),
                None => next.push((n1, d1)),
            }
        }
        items = next;
    }
    items.pop().expect("non-empty")
}

/// Outcome of one term-pairing check of the joint-measure inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairwiseVerdict {
    /// `γ(C_[1,n,1]) > γ(C_[1,1,n])`, for `n` ending in a digit `>= 2`.
    StrictGreater,
    /// `γ(C_[1,m,1,1]) = γ(C_[1,1,rev(m),1])`, for `n = m·[1]`.
    PairedEqual,
}

/// Checks the term pairing behind `Σ γ(C_[1,n,1]) > Σ γ(C_[1,1,n])`.
///
/// If the last digit of `n` is at least 2 the `[1,n,1]` cylinder must be
/// strictly heavier than `[1,1,n]`; otherwise `n = m·[1]` and the cylinders
/// `[1,m,1,1]` and `[1,1,rev(m),1]` must have equal measure. A failed check
/// is reported as [`Error::Contradiction`].
pub fn pairwise_cylinder_inequality(n: &Word) -> Result<PairwiseVerdict> {
    let last = n.last().ok_or(Error::EmptyWord)?;
    let one = Word::new(vec![1])?;
    let one_one = Word::new(vec![1, 1])?;
    if last >= 2 {
        let heavy = measure_of_cylinder(&one.concat(n).extended(1))?;
        let light = measure_of_cylinder(&one_one.concat(n))?;
        if measure_compare(&heavy, &light) == Ordering::Greater {
            Ok(PairwiseVerdict::StrictGreater)
        } else {
            Err(Error::Contradiction(format!(
                "γ(C[1,{n},1]) = {heavy} is not greater than γ(C[1,1,{n}]) = {light}"
            )))
        }
    } else {
        let m = Word::new(n.digits()[..n.len() - 1].to_vec())?;
        let left = measure_of_cylinder(&one.concat(&m).concat(&one_one))?;
        let right = measure_of_cylinder(&one_one.concat(&reverse(&m)).extended(1))?;
        if left == right {
            Ok(PairwiseVerdict::PairedEqual)
        } else {
            Err(Error::Contradiction(format!(
                "reversal pairing failed for n = {n}: {left} vs {right}"
            )))
        }
    }
}

/// `γ(C_w) == γ(C_{reverse(w)})`, compared exactly.
pub fn reversal_equality_check(w: &Word) -> Result<bool> {
    Ok(measure_of_cylinder(w)? == measure_of_cylinder(&reverse(w))?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub word: String,
    pub log2_arg: String,
    pub float: f64,
}

impl MeasureReport {
    pub fn new(w: &Word) -> Result<Self> {
        let m = measure_of_cylinder(w)?;
        Ok(MeasureReport {
            word: w.to_string(),
            log2_arg: fmt_rational(m.arg()),
            float: m.to_f64(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedMeasureReport {
    pub k: u64,
    pub cap: u64,
    pub log2_arg: String,
    pub float: f64,
    pub tail_log2_arg: String,
    pub bracket: [f64; 2],
}

impl BoundedMeasureReport {
    pub fn new(k: u64, cap: u64, m: &BoundedMeasure) -> Self {
        let (lo, hi) = m.bracket();
        BoundedMeasureReport {
            k,
            cap,
            log2_arg: fmt_rational(m.lower.arg()),
            float: m.float_value,
            tail_log2_arg: fmt_rational(m.tail_bound.arg()),
            bracket: [lo, hi],
        }
    }
}

/// Cylinder endpoints as exact rationals, for reports.
pub fn cylinder_endpoints(w: &Word) -> Result<(String, String)> {
    let c = cylinder_interval(w)?;
    Ok((fmt_rational(&c.lo), fmt_rational(&c.hi)))
}
