mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cflab::experiment::{
    run_pillai, run_subsequence, PillaiConfig, SubsequenceConfig, Verdict, DEFAULT_TOLERANCE,
};
use cflab::gauss::{cylinder_endpoints, MeasureReport};
use cflab::stream::take_digits;
use cflab::verify::{run_suite, Bounds, Suite};
use cflab::{Error, SourceSpec, Word};

use output::{Header, Output};

#[derive(Parser, Debug)]
#[command(name = "cflab", version, about = "Continued-fraction normality laboratory")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed for `random` sources given without one, and for seeded suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File of `key=value` lines mirroring the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Expect {
    Normal,
    NonNormal,
}

impl Expect {
    fn matches(self, v: Verdict) -> bool {
        matches!(
            (self, v),
            (Expect::Normal, Verdict::NormalConsistent) | (Expect::NonNormal, Verdict::NonNormal)
        )
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gauss measure of a cylinder, e.g. `measure 1,1`.
    Measure {
        word: String,
        /// Also print the cylinder's endpoints.
        #[arg(long)]
        interval: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Dump digits of a source, one per line.
    Expand {
        source: String,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive exact checks.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        max_digit: Option<u64>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Enumeration cap for joint-k2.
        #[arg(long)]
        cap: Option<u64>,
        /// Random streams for the counting suite.
        #[arg(long)]
        streams: Option<u64>,
        #[arg(long)]
        max_stream_len: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Overlapping vs disjoint block frequencies against the Gauss measure.
    Pillai {
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Patterns separated by `;`, e.g. `1;2;1,1;1,2`.
        #[arg(long, default_value = "1;2;1,1;1,2")]
        patterns: String,
        /// Digits between checkpoints; a tenth of `n` by default.
        #[arg(long)]
        checkpoint: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Exit 1 unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        #[command(flatten)]
        common: Common,
    },
    /// `[1,1]` frequency of the subsequence `x_b, x_{b+k}, ...`.
    Subsequence {
        #[arg(long)]
        source: String,
        /// Digits of the underlying stream.
        #[arg(long, default_value_t = 2_000_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        b: u64,
        #[arg(long, default_value_t = 2)]
        k: u64,
        /// Joint-measure enumeration cap.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        checkpoint: Option<u64>,
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit status of a command that ran to completion.
enum Status {
    Ok,
    CheckFailed,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Contradiction(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        match config::load(Path::new(&path)) {
            Ok(flags) => args = config::merge(args, flags),
            Err(e) => {
                eprintln!("error: config {e}");
                return ExitCode::from(2);
            }
        }
    }
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn source_spec(text: &str, seed: u64) -> Result<SourceSpec, Failure> {
    let spec: SourceSpec = text.parse()?;
    Ok(match spec {
        SourceSpec::Random { seed: None } => spec.with_seed(seed),
        other => other,
    })
}

fn expectation(expect: Option<Expect>, verdict: Verdict) -> Status {
    match expect {
        Some(e) if !e.matches(verdict) => {
            eprintln!("verdict {verdict} contradicts the expectation");
            Status::CheckFailed
        }
        _ => Status::Ok,
    }
}

fn run(command: Command) -> Result<Status, Failure> {
    match command {
        Command::Measure {
            word,
            interval,
            common,
        } => {
            let w: Word = word.parse()?;
            if w.is_empty() {
                return Err(Error::EmptyWord.into());
            }
            let report = MeasureReport::new(&w)?;
            let endpoints = if interval {
                Some(cylinder_endpoints(&w)?)
            } else {
                None
            };
            let out = Output::new(common.format, common.out.as_deref());
            out.measure(&report, endpoints.as_ref())?;
            Ok(Status::Ok)
        }
        Command::Expand { source, n, common } => {
            let spec = source_spec(&source, common.seed)?;
            let mut src = spec.build()?;
            let (digits, end) = take_digits(&mut src, n);
            let header = Header::new("expand")
                .field("source", spec.to_string())
                .field("n", n)
                .field("seed", common.seed);
            let out = Output::new(common.format, common.out.as_deref());
            out.expand(&header, &digits, end)?;
            Ok(Status::Ok)
        }
        Command::Verify {
            suite,
            max_digit,
            max_len,
            cap,
            streams,
            max_stream_len,
            common,
        } => {
            let d = suite.default_bounds();
            let bounds = Bounds {
                max_digit: max_digit.unwrap_or(d.max_digit),
                max_len: max_len.unwrap_or(d.max_len),
                cap: cap.unwrap_or(d.cap),
                streams: streams.unwrap_or(d.streams),
                max_stream_len: max_stream_len.unwrap_or(d.max_stream_len),
                seed: common.seed,
            };
            let report = run_suite(suite, &bounds, common.jobs)?;
            let header = verify_header(suite, &bounds);
            let out = Output::new(common.format, common.out.as_deref());
            out.verify(&header, &report)?;
            if let Some(c) = &report.counterexample {
                eprintln!("counterexample: {c}");
            }
            Ok(if report.passed {
                Status::Ok
            } else {
                Status::CheckFailed
            })
        }
        Command::Pillai {
            source,
            n,
            patterns,
            checkpoint,
            tolerance,
            expect,
            common,
        } => {
            let spec = source_spec(&source, common.seed)?;
            let words = parse_patterns(&patterns)?;
            let checkpoint_every = checkpoint.unwrap_or((n / 10).max(1));
            let cfg = PillaiConfig {
                source: spec.clone(),
                n,
                patterns: words.clone(),
                checkpoint_every,
                tolerance,
                jobs: common.jobs,
            };
            let report = run_pillai(&cfg)?;
            let header = Header::new("pillai")
                .field("source", spec.to_string())
                .field("n", n)
                .field("patterns", join_patterns(&words))
                .field("checkpoint", checkpoint_every)
                .field("tolerance", tolerance)
                .field("seed", common.seed);
            let out = Output::new(common.format, common.out.as_deref());
            out.pillai(&header, &report)?;
            Ok(expectation(expect, report.verdict))
        }
        Command::Subsequence {
            source,
            n,
            b,
            k,
            cap,
            checkpoint,
            expect,
            common,
        } => {
            let spec = source_spec(&source, common.seed)?;
            let selected = if n >= b && k > 0 { (n - b) / k + 1 } else { 0 };
            let checkpoint_every = checkpoint.unwrap_or((selected / 10).max(1));
            let cfg = SubsequenceConfig {
                source: spec.clone(),
                n,
                b,
                k,
                cap,
                checkpoint_every,
                jobs: common.jobs,
            };
            let report = run_subsequence(&cfg)?;
            let header = Header::new("subsequence")
                .field("source", spec.to_string())
                .field("n", n)
                .field("b", b)
                .field("k", k)
                .field("cap", report.cap)
                .field("checkpoint", checkpoint_every)
                .field("seed", common.seed);
            let out = Output::new(common.format, common.out.as_deref());
            out.subsequence(&header, &report)?;
            Ok(expectation(expect, report.verdict))
        }
    }
}

fn verify_header(suite: Suite, b: &Bounds) -> Header {
    let h = Header::new("verify").field("suite", suite.name());
    match suite {
        Suite::Reversal | Suite::Dominance | Suite::Pairwise => {
            h.field("max_digit", b.max_digit).field("max_len", b.max_len)
        }
        Suite::JointK2 => h.field("cap", b.cap),
        Suite::Counting => h
            .field("streams", b.streams)
            .field("max_stream_len", b.max_stream_len)
            .field("seed", b.seed),
    }
}

fn parse_patterns(text: &str) -> Result<Vec<Word>, Failure> {
    let words = text
        .split(';')
        .map(|p| p.parse::<Word>())
        .collect::<Result<Vec<_>, _>>()?;
    if words.iter().any(Word::is_empty) {
        return Err(Error::EmptyPattern.into());
    }
    Ok(words)
}

fn join_patterns(words: &[Word]) -> String {
    words.iter().map(Word::to_string).collect::<Vec<_>>().join(";")
}
