use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{pow, Zero};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use super::extract::{Extract, IntervalExtractor};
use super::{DigitSource, EndReason, Pull, SourceKind};
use crate::cf::{cf_of_ratio, Word};
use crate::error::{Error, Result};

/// The finite canonical expansion of `num/den`.
#[derive(Clone, Debug)]
pub struct RationalSource {
    num: u64,
    den: u64,
    digits: Vec<u64>,
    pos: usize,
}

pub fn source_rational(num: u64, den: u64) -> Result<RationalSource> {
    let digits = cf_of_ratio(num, den)?.into_digits();
    Ok(RationalSource {
        num,
        den,
        digits,
        pos: 0,
    })
}

impl DigitSource for RationalSource {
    fn pull(&mut self) -> Pull {
        match self.digits.get(self.pos) {
            Some(&d) => {
                self.pos += 1;
                Pull::Digit(d)
            }
            None => Pull::End(EndReason::Finished),
        }
    }

    fn emitted(&self) -> u64 {
        self.pos as u64
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Rational
    }

    fn describe(&self) -> String {
        format!("rational:{}/{}", self.num, self.den)
    }
}

/// `prefix` followed by `period` repeated forever; a quadratic irrational.
#[derive(Clone, Debug)]
pub struct PeriodicSource {
    prefix: Word,
    period: Word,
    emitted: u64,
}

pub fn source_periodic(prefix: Word, period: Word) -> Result<PeriodicSource> {
    if period.is_empty() {
        return Err(Error::EmptyPeriod);
    }
    Ok(PeriodicSource {
        prefix,
        period,
        emitted: 0,
    })
}

impl DigitSource for PeriodicSource {
    fn pull(&mut self) -> Pull {
        let i = self.emitted as usize;
        let pre = self.prefix.digits();
        let d = if i < pre.len() {
            pre[i]
        } else {
            let per = self.period.digits();
            per[(i - pre.len()) % per.len()]
        };
        self.emitted += 1;
        Pull::Digit(d)
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Periodic
    }

    fn describe(&self) -> String {
        super::SourceSpec::Periodic {
            prefix: self.prefix.clone(),
            period: self.period.clone(),
        }
        .to_string()
    }
}

/// Digits shared by every real in `[d − 10^e, d + 10^e] ∩ [0, 1]`.
#[derive(Clone, Debug)]
pub struct DecimalIntervalSource {
    decimal: String,
    ulp_exponent: i32,
    extractor: IntervalExtractor,
    emitted: u64,
    ended: Option<EndReason>,
}

/// Parses `0.ddd` (or `.ddd`) into `(digits, number of fraction digits)`.
fn parse_decimal(text: &str) -> Result<(BigInt, usize)> {
    let bad = || Error::DecimalSyntax(text.to_string());
    let t = text.trim();
    let (int_part, frac) = t.split_once('.').ok_or_else(bad)?;
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || frac.is_empty()
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let int_part: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac_digits: BigInt = frac.parse().map_err(|_| bad())?;
    let scale = pow(BigInt::from(10), frac.len());
    Ok((int_part * scale + frac_digits, frac.len()))
}

pub fn source_decimal_interval(decimal: &str, ulp_exponent: i32) -> Result<DecimalIntervalSource> {
    let (digits, frac_len) = parse_decimal(decimal)?;
    let ten = BigInt::from(10);
    let den_d = pow(ten.clone(), frac_len);
    if digits.is_zero() || digits >= den_d {
        return Err(Error::DecimalOutOfRange(decimal.trim().to_string()));
    }
    // common denominator 10^s with s >= frac_len and s + e >= 0
    let s = (frac_len as i64).max(-(ulp_exponent as i64));
    let s_usize = usize::try_from(s).map_err(|_| Error::param("ulp_exponent", "out of range"))?;
    let ulp_pow = usize::try_from(s + ulp_exponent as i64)
        .map_err(|_| Error::param("ulp_exponent", "out of range"))?;
    let den = pow(ten.clone(), s_usize);
    let centre = digits * pow(ten.clone(), s_usize - frac_len);
    let ulp = pow(ten, ulp_pow);
    let lo = (&centre - &ulp).max(BigInt::zero());
    let hi = (&centre + &ulp).min(den.clone());
    Ok(DecimalIntervalSource {
        decimal: decimal.trim().to_string(),
        ulp_exponent,
        extractor: IntervalExtractor::new(lo, hi, den),
        emitted: 0,
        ended: None,
    })
}

impl DecimalIntervalSource {
    /// Exact interval for the remainder after every digit decided so far;
    /// `None` while decided digits are still queued.
    pub fn remainder_interval(&self) -> Option<(BigRational, BigRational)> {
        (!self.extractor.has_pending()).then(|| self.extractor.interval())
    }
}

impl DigitSource for DecimalIntervalSource {
    fn pull(&mut self) -> Pull {
        if let Some(reason) = self.ended {
            return Pull::End(reason);
        }
        match self.extractor.next_digit() {
            Extract::Digit(d) => {
                self.emitted += 1;
                Pull::Digit(d)
            }
            Extract::Ambiguous => {
                self.ended = Some(EndReason::PrecisionExhausted);
                Pull::End(EndReason::PrecisionExhausted)
            }
            Extract::Overflow => {
                self.ended = Some(EndReason::DigitOverflow);
                Pull::End(EndReason::DigitOverflow)
            }
        }
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::DecimalInterval
    }

    fn describe(&self) -> String {
        format!("decimal:{}:e{}", self.decimal, self.ulp_exponent)
    }
}

/// Concatenated canonical expansions of all reduced `p/q`, by `q = 2, 3, ...`
/// and `p = 1..q-1` ascending.
#[derive(Clone, Debug)]
pub struct ConcatNormalSource {
    q: u64,
    p: u64,
    word: Vec<u64>,
    pos: usize,
    emitted: u64,
}

pub fn source_concat_normal() -> ConcatNormalSource {
    ConcatNormalSource {
        q: 2,
        p: 0,
        word: Vec::new(),
        pos: 0,
        emitted: 0,
    }
}

impl ConcatNormalSource {
    fn next_word(&mut self) {
        loop {
            self.p += 1;
            if self.p >= self.q {
                self.q += 1;
                self.p = 1;
            }
            if self.p.gcd(&self.q) == 1 {
                break;
            }
        }
        self.word = cf_of_ratio(self.p, self.q)
            .expect("0 < p < q")
            .into_digits();
        self.pos = 0;
    }
}

impl DigitSource for ConcatNormalSource {
    fn pull(&mut self) -> Pull {
        if self.pos == self.word.len() {
            self.next_word();
        }
        let d = self.word[self.pos];
        self.pos += 1;
        self.emitted += 1;
        Pull::Digit(d)
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::ConcatNormal
    }

    fn describe(&self) -> String {
        "concat-normal".into()
    }
}

/// Expansion of a uniformly random real whose binary digits are drawn on
/// demand, in 64-bit words, from a seeded ChaCha generator.
///
/// The first draw holds bits 1..=64 of `x` (most significant first), the
/// second bits 65..=128, and so on. Digits are emitted only once the dyadic
/// interval known so far determines them, so the source never runs out of
/// precision.
#[derive(Clone, Debug)]
pub struct RandomRealSource {
    seed: u64,
    rng: ChaCha12Rng,
    extractor: IntervalExtractor,
    emitted: u64,
    bits_drawn: u64,
    ended: Option<EndReason>,
}

pub fn source_random_real(seed: u64) -> RandomRealSource {
    RandomRealSource {
        seed,
        rng: RandomRealSource::bit_generator(seed),
        // x ∈ [0, 1] before any bit is known
        extractor: IntervalExtractor::new(0.into(), 1.into(), 1.into()),
        emitted: 0,
        bits_drawn: 0,
        ended: None,
    }
}

impl RandomRealSource {
    /// The generator the bits of `x` are drawn from.
    pub fn bit_generator(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    pub fn bits_drawn(&self) -> u64 {
        self.bits_drawn
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl DigitSource for RandomRealSource {
    fn pull(&mut self) -> Pull {
        if let Some(reason) = self.ended {
            return Pull::End(reason);
        }
        loop {
            match self.extractor.next_digit() {
                Extract::Digit(d) => {
                    self.emitted += 1;
                    return Pull::Digit(d);
                }
                Extract::Ambiguous => {
                    // blocks grow with the bits already known so that
                    // each refinement is amortized over many digits
                    let words = (self.bits_drawn / 128).max(1);
                    let mut bytes = Vec::with_capacity(8 * words as usize);
                    for _ in 0..words {
                        bytes.extend_from_slice(&self.rng.next_u64().to_be_bytes());
                    }
                    let r = BigInt::from_bytes_be(Sign::Plus, &bytes);
                    self.extractor.refine(&r, 64 * words);
                    self.bits_drawn += 64 * words;
                }
                Extract::Overflow => {
                    self.ended = Some(EndReason::DigitOverflow);
                    return Pull::End(EndReason::DigitOverflow);
                }
            }
        }
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::RandomReal
    }

    fn describe(&self) -> String {
        format!("random:seed={}", self.seed)
    }
}

/// A finite explicit digit list.
#[derive(Clone, Debug)]
pub struct VecSource {
    digits: Vec<u64>,
    pos: usize,
}

impl VecSource {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        let digits = Word::new(digits)?.into_digits();
        Ok(VecSource { digits, pos: 0 })
    }
}

impl DigitSource for VecSource {
    fn pull(&mut self) -> Pull {
        match self.digits.get(self.pos) {
            Some(&d) => {
                self.pos += 1;
                Pull::Digit(d)
            }
            None => Pull::End(EndReason::Finished),
        }
    }

    fn emitted(&self) -> u64 {
        self.pos as u64
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Explicit
    }

    fn describe(&self) -> String {
        "explicit".into()
    }
}

/// Infinite source whose digit at 1-based position `i` is `f(i)`.
pub struct FnSource<F> {
    f: F,
    emitted: u64,
}

impl<F: FnMut(u64) -> u64 + Send> FnSource<F> {
    pub fn new(f: F) -> Self {
        FnSource { f, emitted: 0 }
    }
}

impl<F: FnMut(u64) -> u64 + Send> DigitSource for FnSource<F> {
    fn pull(&mut self) -> Pull {
        self.emitted += 1;
        let d = (self.f)(self.emitted);
        assert!(d >= 1, "partial quotients must be positive");
        Pull::Digit(d)
    }

    fn emitted(&self) -> u64 {
        self.emitted
    }

    fn kind(&self) -> SourceKind {
        SourceKind::Explicit
    }

    fn describe(&self) -> String {
        "explicit".into()
    }
}
