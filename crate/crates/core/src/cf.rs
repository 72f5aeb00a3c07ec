//! Finite regular continued fractions `[0; a_1, ..., a_n]` over exact
//! integers: words of partial quotients, convergents, values and cylinder
//! intervals.
//!
//! Words are indexed from 1 in documentation (`a_1` is the first digit) and
//! stored 0-based.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A finite block of partial quotients. Every digit is at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u64>);

impl Word {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if digits.contains(&0) {
            return Err(Error::ZeroDigit);
        }
        Ok(Word(digits))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    /// `self · d`. Panics if `d == 0`.
    pub fn extended(&self, d: u64) -> Word {
        assert!(d >= 1, "partial quotients must be positive");
        let mut digits = Vec::with_capacity(self.0.len() + 1);
        digits.extend_from_slice(&self.0);
        digits.push(d);
        Word(digits)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut digits = Vec::with_capacity(self.0.len() + other.0.len());
        digits.extend_from_slice(&self.0);
        digits.extend_from_slice(&other.0);
        Word(digits)
    }

    /// The word with its last digit increased by one; the other endpoint of
    /// the cylinder.
    pub fn with_last_incremented(&self) -> Result<Word> {
        let mut digits = self.0.clone();
        let last = digits.last_mut().ok_or(Error::EmptyWord)?;
        *last = last.checked_add(1).ok_or(Error::DigitOverflow)?;
        Ok(Word(digits))
    }

    pub fn into_digits(self) -> Vec<u64> {
        self.0
    }
}

impl From<Word> for Vec<u64> {
    fn from(w: Word) -> Self {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Parses comma-separated positive integers, e.g. `1,2,3`. The empty string
/// is the empty word.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let digits = s
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::WordSyntax(s.to_string()))?;
        Word::new(digits)
    }
}

/// The `index`-th convergent `p/q` of a word (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
    pub index: usize,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new_raw(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }
}

/// Convergents `p_n/q_n` for `n = 1..=|w|` from the recurrence
/// `p_n = a_n p_{n-1} + p_{n-2}`, `q_n = a_n q_{n-1} + q_{n-2}` seeded with
/// `p_{-1} = 1, q_{-1} = 0, p_0 = 0, q_0 = 1`.
pub fn convergents(w: &Word) -> Result<Vec<Convergent>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut out = Vec::with_capacity(w.len());
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    for (i, &a) in w.digits().iter().enumerate() {
        let p_next = &p * a + &p_prev;
        let q_next = &q * a + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent {
            p: p.clone(),
            q: q.clone(),
            index: i + 1,
        });
    }
    Ok(out)
}

/// Last two convergents `(p_n, q_n, p_{n-1}, q_{n-1})` without keeping the
/// whole sequence.
pub(crate) fn tail_convergents(digits: &[u64]) -> (BigUint, BigUint, BigUint, BigUint) {
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    for &a in digits {
        let p_next = &p * a + &p_prev;
        let q_next = &q * a + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    (p, q, p_prev, q_prev)
}

/// `[0; a_1, ..., a_n]` in lowest terms; lies in `(0, 1]`.
pub fn value_of(w: &Word) -> Result<BigRational> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let (p, q, _, _) = tail_convergents(w.digits());
    // p_n q_{n-1} - p_{n-1} q_n = ±1, so the convergent is already reduced.
    Ok(BigRational::new_raw(BigInt::from(p), BigInt::from(q)))
}

/// The set of reals in `(0, 1)` whose expansion begins with `word`, as the
/// open interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderInterval {
    pub word: Word,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl CylinderInterval {
    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo < x && x < &self.hi
    }
}

impl fmt::Display for CylinderInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

/// Endpoints are `value_of(w)` and `value_of(w with last digit + 1)`; the
/// word's own value is the upper endpoint for odd `|w|` and the lower one
/// for even `|w|`.
pub fn cylinder_interval(w: &Word) -> Result<CylinderInterval> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let (p, q, p1, q1) = tail_convergents(w.digits());
    let own = BigRational::new_raw(BigInt::from(p.clone()), BigInt::from(q.clone()));
    // [.., a_n + 1] = (p_n + p_{n-1}) / (q_n + q_{n-1})
    let bumped = BigRational::new_raw(BigInt::from(p + p1), BigInt::from(q + q1));
    let (lo, hi) = if w.len() % 2 == 1 {
        (bumped, own)
    } else {
        (own, bumped)
    };
    Ok(CylinderInterval {
        word: w.clone(),
        lo,
        hi,
    })
}

pub fn reverse(w: &Word) -> Word {
    let mut digits = w.0.clone();
    digits.reverse();
    Word(digits)
}

/// Canonical expansion of `num/den` for `0 < num < den` by the Euclidean
/// algorithm. The last digit is always at least 2.
pub fn cf_of_rational(num: &BigUint, den: &BigUint) -> Result<Word> {
    if num.is_zero() || num >= den {
        return Err(Error::RationalOutOfRange {
            num: num.to_string(),
            den: den.to_string(),
        });
    }
    let (mut a, mut b) = (num.clone(), den.clone());
    let mut digits = Vec::new();
    while !a.is_zero() {
        let (quot, rem) = b.div_rem(&a);
        digits.push(quot.to_u64().ok_or(Error::DigitOverflow)?);
        b = std::mem::replace(&mut a, rem);
    }
    Ok(Word(digits))
}

/// [`cf_of_rational`] on machine integers.
pub fn cf_of_ratio(num: u64, den: u64) -> Result<Word> {
    if num == 0 || num >= den {
        return Err(Error::RationalOutOfRange {
            num: num.to_string(),
            den: den.to_string(),
        });
    }
    let (mut a, mut b) = (num, den);
    let mut digits = Vec::new();
    while a != 0 {
        digits.push(b / a);
        (a, b) = (b % a, a);
    }
    Ok(Word(digits))
}

/// Machine check of the denominator inequality: for `n = n_1..n_k` with
/// `n_k >= 2`, the denominator of `[0;1,1,n_1..n_k]` exceeds that of
/// `[0;1,n_1..n_k,1]`. Returns the outcome of the comparison; the inequality
/// is a theorem, so `false` means a counterexample.
pub fn denominator_dominance(n: &Word) -> Result<bool> {
    match n.last() {
        None => return Err(Error::EmptyWord),
        Some(1) => return Err(Error::LastDigitOne),
        Some(_) => {}
    }
    let left = Word(vec![1, 1]).concat(n);
    let right = Word(vec![1]).concat(n).extended(1);
    let (_, q_left, _, _) = tail_convergents(left.digits());
    let (_, q_right, _, _) = tail_convergents(right.digits());
    Ok(q_left > q_right)
}

/// Formats a rational as `p/q`, or `p` when the denominator is 1.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or `p`; the result is reduced.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::RationalSyntax(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(d: &[u64]) -> Word {
        Word::new(d.to_vec()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn word_text_round_trip() {
        let word: Word = "1, 2,3".parse().unwrap();
        assert_eq!(word, w(&[1, 2, 3]));
        assert_eq!(word.to_string(), "1,2,3");
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
        assert_eq!("1,0".parse::<Word>(), Err(Error::ZeroDigit));
        assert!(matches!("1,,2".parse::<Word>(), Err(Error::WordSyntax(_))));
        assert!(matches!("-1".parse::<Word>(), Err(Error::WordSyntax(_))));
    }

    #[test]
    fn cf_of_rational_examples() {
        assert_eq!(cf_of_ratio(7, 16).unwrap(), w(&[2, 3, 2]));
        assert_eq!(cf_of_ratio(1, 2).unwrap(), w(&[2]));
        assert_eq!(cf_of_ratio(2, 3).unwrap(), w(&[1, 2]));
        let big = cf_of_rational(&BigUint::from(7u32), &BigUint::from(16u32)).unwrap();
        assert_eq!(big, w(&[2, 3, 2]));
    }

    #[test]
    fn cf_of_rational_rejects_out_of_range() {
        assert!(cf_of_ratio(0, 5).is_err());
        assert!(cf_of_ratio(5, 5).is_err());
        assert!(cf_of_ratio(6, 5).is_err());
        assert!(cf_of_rational(&BigUint::from(3u32), &BigUint::from(2u32)).is_err());
    }

    #[test]
    fn cf_of_rational_reports_digit_overflow() {
        let den = BigUint::one() << 70;
        assert_eq!(cf_of_rational(&BigUint::one(), &den), Err(Error::DigitOverflow));
    }

    #[test]
    fn convergent_examples() {
        let pq = |word: &[u64]| -> Vec<(u64, u64)> {
            convergents(&w(word))
                .unwrap()
                .iter()
                .map(|c| (c.p.to_u64().unwrap(), c.q.to_u64().unwrap()))
                .collect()
        };
        assert_eq!(pq(&[1, 2, 3]), vec![(1, 1), (2, 3), (7, 10)]);
        assert_eq!(pq(&[2]), vec![(1, 2)]);
        assert_eq!(pq(&[1, 1, 2]), vec![(1, 1), (1, 2), (3, 5)]);
        assert_eq!(convergents(&Word::empty()), Err(Error::EmptyWord));
        let idx: Vec<usize> = convergents(&w(&[4, 1, 7])).unwrap().iter().map(|c| c.index).collect();
        assert_eq!(idx, vec![1, 2, 3]);
    }

    #[test]
    fn value_examples() {
        assert_eq!(value_of(&w(&[1])).unwrap(), rat(1, 1));
        assert_eq!(value_of(&w(&[1, 2])).unwrap(), rat(2, 3));
        assert_eq!(value_of(&w(&[2, 3, 2])).unwrap(), rat(7, 16));
        assert_eq!(value_of(&Word::empty()), Err(Error::EmptyWord));
    }

    #[test]
    fn cylinder_examples() {
        let c = cylinder_interval(&w(&[1])).unwrap();
        assert_eq!((c.lo.clone(), c.hi.clone()), (rat(1, 2), rat(1, 1)));
        assert_eq!(c.to_string(), "(1/2, 1)");
        let c = cylinder_interval(&w(&[1, 1])).unwrap();
        assert_eq!((c.lo, c.hi), (rat(1, 2), rat(2, 3)));
        let c = cylinder_interval(&w(&[1, 2])).unwrap();
        assert_eq!((c.lo, c.hi), (rat(2, 3), rat(3, 4)));
        assert_eq!(cylinder_interval(&Word::empty()), Err(Error::EmptyWord));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse(&w(&[1, 2])), w(&[2, 1]));
        assert_eq!(reverse(&w(&[1, 1])), w(&[1, 1]));
        assert_eq!(reverse(&w(&[1, 2, 3])), w(&[3, 2, 1]));
        assert_eq!(reverse(&Word::empty()), Word::empty());
    }

    #[test]
    fn dominance_examples() {
        assert!(denominator_dominance(&w(&[2])).unwrap());
        assert!(denominator_dominance(&w(&[3])).unwrap());
        assert!(denominator_dominance(&w(&[2, 2])).unwrap());
        assert_eq!(denominator_dominance(&w(&[2, 1])), Err(Error::LastDigitOne));
        assert_eq!(denominator_dominance(&Word::empty()), Err(Error::EmptyWord));
    }

    #[test]
    fn dominance_denominators_for_two() {
        // [0;1,1,2] = 3/5 and [0;1,2,1] = 3/4
        assert_eq!(value_of(&w(&[1, 1, 2])).unwrap(), rat(3, 5));
        assert_eq!(value_of(&w(&[1, 2, 1])).unwrap(), rat(3, 4));
    }

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("10/9").unwrap(), rat(10, 9));
        assert_eq!(parse_rational("4/2").unwrap(), rat(2, 1));
        assert_eq!(fmt_rational(&rat(2, 1)), "2");
        assert_eq!(fmt_rational(&rat(7, 16)), "7/16");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }
}
