//! Pull-based sources of partial quotients.
//!
//! A source is a single-consumer stateful iterator. It may end with a
//! distinct [`EndReason`]; precision exhaustion is a terminal signal and not
//! an error, and consumers treat what was emitted as a finite prefix.

mod extract;
mod sources;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cf::{parse_rational, Word};
use crate::error::{Error, Result};

pub use sources::{
    source_concat_normal, source_decimal_interval, source_periodic, source_random_real,
    source_rational, ConcatNormalSource, DecimalIntervalSource, FnSource, PeriodicSource,
    RandomRealSource, RationalSource, VecSource,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndReason {
    /// A finite expansion is complete.
    Finished,
    /// The known interval no longer determines the next digit.
    PrecisionExhausted,
    /// The next digit does not fit in 64 bits.
    DigitOverflow,
}

impl fmt::Display for EndReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndReason::Finished => "finished",
            EndReason::PrecisionExhausted => "precision-exhausted",
            EndReason::DigitOverflow => "digit-overflow",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pull {
    Digit(u64),
    End(EndReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceKind {
    Rational,
    Periodic,
    DecimalInterval,
    ConcatNormal,
    RandomReal,
    ApSelection,
    Explicit,
}

/// An unbounded (or finite) stream of partial quotients, every one `>= 1`.
///
/// Construction parameters determine the sequence completely. Once a source
/// returns [`Pull::End`] it keeps returning the same reason.
pub trait DigitSource: Send {
    fn pull(&mut self) -> Pull;

    /// Digits produced so far.
    fn emitted(&self) -> u64;

    fn kind(&self) -> SourceKind;

    /// Provenance string; a parseable [`SourceSpec`] for the built-in kinds.
    fn describe(&self) -> String;
}

impl<S: DigitSource + ?Sized> DigitSource for Box<S> {
    fn pull(&mut self) -> Pull {
        (**self).pull()
    }

    fn emitted(&self) -> u64 {
        (**self).emitted()
    }

    fn kind(&self) -> SourceKind {
        (**self).kind()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Pulls up to `n` digits. The end reason is returned when the source ended
/// before `n` digits.
pub fn take_digits<S: DigitSource + ?Sized>(source: &mut S, n: u64) -> (Vec<u64>, Option<EndReason>) {
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    while (out.len() as u64) < n {
        match source.pull() {
            Pull::Digit(d) => out.push(d),
            Pull::End(reason) => return (out, Some(reason)),
        }
    }
    (out, None)
}

/// Parsed source description, as used on the command line:
/// `rational:7/16`, `periodic:,2`, `periodic:1,4;2,3`,
/// `decimal:0.6180339887:e-10`, `concat-normal`, `random:seed=42`.
///
/// For `periodic:` the text before the first `;` is the prefix and the rest
/// the period; without a `;`, the text before the first comma is a prefix of
/// at most one digit, so `periodic:,2` is `2,2,2,...` and `periodic:1,2,3`
/// is `1,2,3,2,3,...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceSpec {
    Rational { num: u64, den: u64 },
    Periodic { prefix: Word, period: Word },
    Decimal { decimal: String, ulp_exponent: i32 },
    ConcatNormal,
    /// `seed: None` means the seed is supplied elsewhere (e.g. `--seed`).
    Random { seed: Option<u64> },
}

impl SourceSpec {
    pub fn build(&self) -> Result<Box<dyn DigitSource>> {
        Ok(match self {
            SourceSpec::Rational { num, den } => Box::new(source_rational(*num, *den)?),
            SourceSpec::Periodic { prefix, period } => {
                Box::new(source_periodic(prefix.clone(), period.clone())?)
            }
            SourceSpec::Decimal {
                decimal,
                ulp_exponent,
            } => Box::new(source_decimal_interval(decimal, *ulp_exponent)?),
            SourceSpec::ConcatNormal => Box::new(source_concat_normal()),
            SourceSpec::Random { seed } => Box::new(source_random_real(seed.unwrap_or(0))),
        })
    }

    /// Fills in the seed of a `random` source.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            SourceSpec::Random { .. } => SourceSpec::Random { seed: Some(seed) },
            other => other,
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Rational { num, den } => write!(f, "rational:{num}/{den}"),
            SourceSpec::Periodic { prefix, period } => {
                if prefix.len() <= 1 {
                    write!(f, "periodic:{prefix},{period}")
                } else {
                    write!(f, "periodic:{prefix};{period}")
                }
            }
            SourceSpec::Decimal {
                decimal,
                ulp_exponent,
            } => write!(f, "decimal:{decimal}:e{ulp_exponent}"),
            SourceSpec::ConcatNormal => f.write_str("concat-normal"),
            SourceSpec::Random { seed: Some(s) } => write!(f, "random:seed={s}"),
            SourceSpec::Random { seed: None } => f.write_str("random"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SourceSpec(s.to_string());
        let s = s.trim();
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        match (kind, rest) {
            ("rational", Some(r)) => {
                let (n, d) = r.split_once('/').ok_or_else(bad)?;
                let num = n.trim().parse().map_err(|_| bad())?;
                let den = d.trim().parse().map_err(|_| bad())?;
                // validates the range
                parse_rational(r)?;
                source_rational(num, den)?;
                Ok(SourceSpec::Rational { num, den })
            }
            ("periodic", Some(r)) => {
                let (prefix, period) = match r.split_once(';') {
                    Some(parts) => parts,
                    None => r.split_once(',').unwrap_or(("", r)),
                };
                let prefix: Word = prefix.parse()?;
                let period: Word = period.parse()?;
                if period.is_empty() {
                    return Err(Error::EmptyPeriod);
                }
                Ok(SourceSpec::Periodic { prefix, period })
            }
            ("decimal", Some(r)) => {
                let (decimal, exp) = r.rsplit_once(':').ok_or_else(bad)?;
                let exp = exp.trim();
                let exp = exp.strip_prefix(['e', 'E']).unwrap_or(exp);
                let ulp_exponent = exp.parse().map_err(|_| bad())?;
                source_decimal_interval(decimal, ulp_exponent)?;
                Ok(SourceSpec::Decimal {
                    decimal: decimal.trim().to_string(),
                    ulp_exponent,
                })
            }
            ("concat-normal", None) => Ok(SourceSpec::ConcatNormal),
            ("random", None) => Ok(SourceSpec::Random { seed: None }),
            ("random", Some(r)) => {
                let seed = r.trim().strip_prefix("seed=").ok_or_else(bad)?;
                let seed = seed.trim().parse().map_err(|_| bad())?;
                Ok(SourceSpec::Random { seed: Some(seed) })
            }
            _ => Err(bad()),
        }
    }
}
