//! Digit extraction from an exact rational interval.
//!
//! The interval is held as two integer vectors `(u, v)`, one per endpoint,
//! each representing the point `u/v`. A Gauss-map step `x ↦ 1/x − a` is the
//! linear map `(u, v) ↦ (v − a·u, u)`, so both endpoints stay exact and are
//! transformed by the same integer matrix. A digit is emitted only when both
//! endpoints give the same `a = ⌊v/u⌋`.
//!
//! Working on full-size integers costs one pass per digit. Instead, the top
//! bits of all four integers give small rationals bracketing the two
//! endpoints; as long as those agree on a digit, every point of the true
//! interval does too, because cylinders are intervals. Steps are taken on the
//! small values and the composed 2×2 matrix is applied to the big vectors
//! once. Large intervals recurse on a truncated bracket (in the manner of a
//! half-gcd), small ones use 126-bit brackets in machine integers, and a
//! single exact step is the fallback when the bracket is too coarse.

use std::collections::VecDeque;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

const TOP_BITS: u64 = 126;
/// Above this size digits are decided on a truncated copy first.
const RECURSE_BITS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extract {
    Digit(u64),
    /// The endpoints disagree on the next digit.
    Ambiguous,
    /// The next digit is determined but exceeds `u64`.
    Overflow,
}

#[derive(Clone, Debug)]
struct Point {
    u: BigInt,
    v: BigInt,
}

impl Point {
    fn apply(&mut self, m: &[[i128; 2]; 2]) {
        let u = &self.u * m[0][0] + &self.v * m[0][1];
        let v = &self.u * m[1][0] + &self.v * m[1][1];
        self.u = u;
        self.v = v;
    }

    fn apply_big(&mut self, m: &[[BigInt; 2]; 2]) {
        let u = &self.u * &m[0][0] + &self.v * &m[0][1];
        let v = &self.u * &m[1][0] + &self.v * &m[1][1];
        self.u = u;
        self.v = v;
    }

    /// Brackets `u/v` by `(û/(v̂+1), (û+1)/v̂)` on the bits above `shift`.
    fn bracket(&self, shift: u64) -> Option<(Point, Point)> {
        let u = &self.u >> shift;
        let v = &self.v >> shift;
        if v.is_zero() {
            return None;
        }
        let lo = Point {
            u: u.clone(),
            v: &v + 1,
        };
        let hi = Point { u: u + 1, v };
        Some((lo, hi))
    }

    fn less_than(&self, other: &Point) -> bool {
        &self.u * &other.v < &other.u * &self.v
    }

    fn step(&mut self, a: &BigInt) {
        let u = &self.v - a * &self.u;
        self.v = std::mem::replace(&mut self.u, u);
    }

    fn to_rational(&self) -> BigRational {
        BigRational::new(self.u.clone(), self.v.clone())
    }
}

#[derive(Clone, Debug)]
pub(crate) struct IntervalExtractor {
    first: Point,
    second: Point,
    /// Images of the basis vectors, kept only when the composed matrix is
    /// wanted by a caller.
    basis: Option<[Point; 2]>,
    pending: VecDeque<u64>,
}

impl IntervalExtractor {
    /// Interval with endpoints `lo_num/den` and `hi_num/den`, both in `[0, 1]`.
    pub(crate) fn new(lo_num: BigInt, hi_num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.sign() == Sign::Plus);
        IntervalExtractor {
            first: Point {
                u: lo_num,
                v: den.clone(),
            },
            second: Point { u: hi_num, v: den },
            basis: None,
            pending: VecDeque::new(),
        }
    }

    fn tracking(first: Point, second: Point) -> Self {
        let e = |u: i32, v: i32| Point {
            u: u.into(),
            v: v.into(),
        };
        IntervalExtractor {
            first,
            second,
            basis: Some([e(1, 0), e(0, 1)]),
            pending: VecDeque::new(),
        }
    }

    fn points_mut(&mut self) -> impl Iterator<Item = &mut Point> {
        [&mut self.first, &mut self.second]
            .into_iter()
            .chain(self.basis.iter_mut().flatten())
    }

    /// Current interval of the Gauss-map remainder, ordered.
    pub(crate) fn interval(&self) -> (BigRational, BigRational) {
        let a = self.first.to_rational();
        let b = self.second.to_rational();
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Digits already decided but not yet handed out.
    pub(crate) fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    pub(crate) fn next_digit(&mut self) -> Extract {
        if let Some(d) = self.pending.pop_front() {
            return Extract::Digit(d);
        }
        let status = self.fill();
        match self.pending.pop_front() {
            Some(d) => Extract::Digit(d),
            None => status,
        }
    }

    /// Queues every digit the interval determines; returns why it stopped.
    fn fill(&mut self) -> Extract {
        loop {
            if self.reduce_truncated() || self.batch() > 0 {
                continue;
            }
            match self.exact_step() {
                Extract::Digit(d) => self.pending.push_back(d),
                stop => return stop,
            }
        }
    }

    /// Refines a dyadic interval `[m/2^N, (m+1)/2^N]` (as originally
    /// constructed, `second − first` is the image of one unit in the last
    /// place) to `[(m·2^B + r)/2^(N+B), (m·2^B + r + 1)/2^(N+B)]`.
    pub(crate) fn refine(&mut self, r: &BigInt, bits: u64) {
        debug_assert!(self.pending.is_empty());
        let du = &self.second.u - &self.first.u;
        let dv = &self.second.v - &self.first.v;
        self.first.u = (&self.first.u << bits) + r * &du;
        self.first.v = (&self.first.v << bits) + r * &dv;
        self.second.u = &self.first.u + du;
        self.second.v = &self.first.v + dv;
    }

    fn exact_step(&mut self) -> Extract {
        if self.first.u.is_zero() || self.second.u.is_zero() {
            return Extract::Ambiguous;
        }
        let a = &self.first.v / &self.first.u;
        let b = &self.second.v / &self.second.u;
        if a != b || a.is_zero() {
            return Extract::Ambiguous;
        }
        let Some(digit) = a.to_u64() else {
            return Extract::Overflow;
        };
        for p in self.points_mut() {
            p.step(&a);
        }
        Extract::Digit(digit)
    }

    /// Decides digits on a truncated bracket of a large interval and applies
    /// the composed matrix; false when that decides nothing.
    fn reduce_truncated(&mut self) -> bool {
        let size = self.first.v.bits().max(self.second.v.bits());
        if size <= RECURSE_BITS {
            return false;
        }
        // bits of relative precision the interval actually carries
        let du = (&self.second.u - &self.first.u).bits();
        let dv = (&self.second.v - &self.first.v).bits();
        let precision = size.saturating_sub(du.max(dv));
        let keep = if precision + 128 < size / 2 {
            precision + 128
        } else {
            size / 2
        };
        let shift = size - keep;
        let (Some((a_lo, a_hi)), Some((b_lo, b_hi))) =
            (self.first.bracket(shift), self.second.bracket(shift))
        else {
            return false;
        };
        let lo = if a_lo.less_than(&b_lo) { a_lo } else { b_lo };
        let hi = if a_hi.less_than(&b_hi) { b_hi } else { a_hi };
        let mut sub = IntervalExtractor::tracking(lo, hi);
        sub.fill();
        if sub.pending.is_empty() {
            return false;
        }
        let [c0, c1] = sub.basis.take().expect("tracking extractor");
        let m = [[c0.u, c1.u], [c0.v, c1.v]];
        for p in self.points_mut() {
            p.apply_big(&m);
        }
        self.pending.append(&mut sub.pending);
        true
    }

    /// Runs small-integer steps on leading-bit brackets; returns the number
    /// of digits queued.
    fn batch(&mut self) -> usize {
        let vbits = self.first.v.bits().max(self.second.v.bits());
        let shift = vbits.saturating_sub(TOP_BITS);
        let top = |n: &BigInt| -> Option<u128> { (n >> shift).to_u128() };
        let (Some(u0), Some(v0), Some(u1), Some(v1)) = (
            top(&self.first.u),
            top(&self.first.v),
            top(&self.second.u),
            top(&self.second.v),
        ) else {
            return 0;
        };
        // Each endpoint u/v lies between lo = û/(v̂+1) and hi = (û+1)/v̂.
        let mut pts: [(u128, u128); 4] = if shift == 0 {
            [(u0, v0), (u0, v0), (u1, v1), (u1, v1)]
        } else {
            [(u0, v0 + 1), (u0 + 1, v0), (u1, v1 + 1), (u1 + 1, v1)]
        };
        let mut m: [[i128; 2]; 2] = [[1, 0], [0, 1]];
        let mut emitted = 0;
        while let Some(a) = common_digit(&pts) {
            let Ok(a_small) = i128::try_from(a) else { break };
            // [[-a, 1], [1, 0]] · m
            let next = (|| {
                Some([
                    [
                        m[1][0].checked_sub(a_small.checked_mul(m[0][0])?)?,
                        m[1][1].checked_sub(a_small.checked_mul(m[0][1])?)?,
                    ],
                    m[0],
                ])
            })();
            let Some(next) = next else { break };
            m = next;
            for (num, den) in pts.iter_mut() {
                let rem = *den - a * *num;
                *den = *num;
                *num = rem;
            }
            self.pending.push_back(a as u64);
            emitted += 1;
        }
        if emitted > 0 {
            for p in self.points_mut() {
                p.apply(&m);
            }
        }
        emitted
    }
}

/// The digit `⌊den/num⌋` shared by all bracket points, if any.
fn common_digit(pts: &[(u128, u128); 4]) -> Option<u128> {
    let (n0, d0) = pts[0];
    if n0 == 0 {
        return None;
    }
    let a = d0 / n0;
    if a == 0 || a > u64::MAX as u128 {
        return None;
    }
    for &(n, d) in &pts[1..] {
        if n == 0 || d / n != a {
            return None;
        }
    }
    Some(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{cf_of_rational, value_of, Word};
    use num_bigint::BigUint;
    use num_traits::One;

    fn drain(ex: &mut IntervalExtractor) -> Vec<u64> {
        let mut out = Vec::new();
        while let Extract::Digit(d) = ex.next_digit() {
            out.push(d);
        }
        out
    }

    #[test]
    fn degenerate_interval_expands_rational_exactly() {
        // a single point: both endpoints equal 7/16
        let mut ex = IntervalExtractor::new(7.into(), 7.into(), 16.into());
        assert_eq!(drain(&mut ex), vec![2, 3, 2]);
    }

    #[test]
    fn large_degenerate_interval_uses_batches() {
        let word = Word::new((0..400).map(|i| 1 + (i * 7919) % 13).collect()).unwrap();
        let word = word.extended(2);
        let x = value_of(&word).unwrap();
        let (p, q) = (x.numer().clone(), x.denom().clone());
        let mut ex = IntervalExtractor::new(p.clone(), p, q);
        assert_eq!(drain(&mut ex), word.digits());
    }

    #[test]
    fn refine_matches_direct_interval() {
        // [0,1] refined by 0xC000.. (top bits 11) gives [3/4, 3/4 + 2^-64]
        let mut ex = IntervalExtractor::new(0.into(), 1.into(), 1.into());
        ex.refine(&BigInt::from(0xC000_0000_0000_0000u64), 64);
        let (lo, hi) = ex.interval();
        let scale = BigInt::one() << 64u32;
        assert_eq!(lo, BigRational::new(3.into(), 4.into()));
        assert_eq!(&hi - &lo, BigRational::new(1.into(), scale));
        // 3/4 = [0;1,3] and everything just above it starts [1,3,...]
        let expect = cf_of_rational(&BigUint::from(3u32), &BigUint::from(4u32)).unwrap();
        assert_eq!(drain(&mut ex), expect.digits());
    }

    #[test]
    fn point_at_one_gives_digit_one() {
        let mut ex = IntervalExtractor::new(1.into(), 1.into(), 1.into());
        assert_eq!(ex.next_digit(), Extract::Digit(1));
        assert_eq!(ex.next_digit(), Extract::Ambiguous);
    }

    #[test]
    fn huge_digit_overflows() {
        let den = BigInt::one() << 80u32;
        let mut ex = IntervalExtractor::new(BigInt::one(), BigInt::one(), den);
        assert_eq!(ex.next_digit(), Extract::Overflow);
    }
}
