//! Exact continued-fraction arithmetic and streaming block statistics for
//! studying continued-fraction normality.
//!
//! - [`cf`]: words of partial quotients, convergents, cylinder intervals.
//! - [`gauss`]: Gauss measures held exactly as `log2` of a rational.
//! - [`stream`]: pull-based digit sources.
//! - [`stats`]: overlapping, disjoint and aligned occurrence counters.
//! - [`verify`]: exhaustive exact checks over bounded word families.
//! - [`experiment`]: the empirical equivalence and subsequence experiments.

pub mod cf;
pub mod error;
pub mod experiment;
pub mod gauss;
pub mod stats;
pub mod stream;
pub mod verify;

pub use cf::{Convergent, CylinderInterval, Word};
pub use error::{Error, Result};
pub use gauss::{BoundedMeasure, LogRational};
pub use stream::{DigitSource, EndReason, Pull, SourceSpec};

/// Runs `f` on a dedicated rayon pool of `jobs` workers.
///
/// Every parallel reduction in this crate partitions work independently of
/// `jobs`, so the result does not depend on the pool size.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    let jobs = jobs.max(1);
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
