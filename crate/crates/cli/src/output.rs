//! Report rendering. Every report starts with the parameters that produced
//! it; worker count and output path are left out so that they cannot change
//! the bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use cflab::experiment::{PillaiReport, SubsequenceReport};
use cflab::gauss::MeasureReport;
use cflab::verify::VerifyReport;
use cflab::EndReason;

use crate::Format;

pub struct Header {
    command: &'static str,
    fields: Vec<(&'static str, Value)>,
}

impl Header {
    pub fn new(command: &'static str) -> Self {
        Header {
            command,
            fields: vec![("version", json!(env!("CARGO_PKG_VERSION")))],
        }
    }

    pub fn field(mut self, key: &'static str, value: impl Serialize) -> Self {
        self.fields
            .push((key, serde_json::to_value(value).expect("plain values serialize")));
        self
    }

    fn json(&self) -> Value {
        let config: Map<String, Value> =
            self.fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        json!({ "command": self.command, "config": config })
    }

    fn comments(&self) -> String {
        let mut s = format!("# command={}\n", self.command);
        for (k, v) in &self.fields {
            match v {
                Value::String(text) => writeln!(s, "# {k}={text}"),
                other => writeln!(s, "# {k}={other}"),
            }
            .expect("write to string");
        }
        s
    }
}

pub struct Output<'a> {
    format: Format,
    path: Option<&'a Path>,
}

fn csv_rows<T: Serialize>(rows: &[T]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

fn pretty(header: &Header, report: impl Serialize) -> io::Result<String> {
    let mut doc = header.json();
    doc["report"] = serde_json::to_value(report).map_err(io::Error::other)?;
    let mut s = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

fn verdict_word(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

impl<'a> Output<'a> {
    pub fn new(format: Format, path: Option<&'a Path>) -> Self {
        Output { format, path }
    }

    fn emit(&self, text: &str) -> io::Result<()> {
        match self.path {
            Some(p) => fs::write(p, text),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()
            }
        }
    }

    pub fn measure(&self, r: &MeasureReport, interval: Option<&(String, String)>) -> io::Result<()> {
        let text = match self.format {
            Format::Text => {
                let mut s = format!("log2({}) ≈ {:.6}\n", r.log2_arg, r.float);
                if let Some((lo, hi)) = interval {
                    writeln!(s, "({lo}, {hi})").expect("write to string");
                }
                s
            }
            Format::Json => {
                let mut v = serde_json::to_value(r).map_err(io::Error::other)?;
                if let Some((lo, hi)) = interval {
                    v["interval"] = json!([lo, hi]);
                }
                let mut s = serde_json::to_string(&v).map_err(io::Error::other)?;
                s.push('\n');
                s
            }
            Format::Csv => {
                #[derive(Serialize)]
                struct Row<'r> {
                    word: &'r str,
                    log2_arg: &'r str,
                    float: f64,
                    lo: Option<&'r str>,
                    hi: Option<&'r str>,
                }
                csv_rows(&[Row {
                    word: &r.word,
                    log2_arg: &r.log2_arg,
                    float: r.float,
                    lo: interval.map(|i| i.0.as_str()),
                    hi: interval.map(|i| i.1.as_str()),
                }])?
            }
        };
        self.emit(&text)
    }

    pub fn expand(&self, header: &Header, digits: &[u64], end: Option<EndReason>) -> io::Result<()> {
        if let Some(reason) = end {
            eprintln!("source ended after {} digits: {reason}", digits.len());
        }
        let text = match self.format {
            Format::Text => digits.iter().map(|d| format!("{d}\n")).collect(),
            Format::Json => pretty(header, json!({ "digits": digits, "emitted": digits.len(), "end": end }))?,
            Format::Csv => {
                #[derive(Serialize)]
                struct Row {
                    index: usize,
                    digit: u64,
                }
                let rows: Vec<Row> = digits
                    .iter()
                    .enumerate()
                    .map(|(i, &digit)| Row { index: i + 1, digit })
                    .collect();
                header.comments() + &csv_rows(&rows)?
            }
        };
        self.emit(&text)
    }

    pub fn verify(&self, header: &Header, r: &VerifyReport) -> io::Result<()> {
        let text = match self.format {
            Format::Text => {
                let mut s = format!(
                    "{}: {} ({} checked, {} failures)\n",
                    r.suite.name(),
                    verdict_word(r.passed),
                    r.checked,
                    r.failures
                );
                if let (Some(b), Some(g)) = (r.details.get("bracket"), r.details.get("gamma_11")) {
                    writeln!(s, "  bracket {b} vs γ(C[1,1]) = {g}").expect("write to string");
                }
                for (k, v) in &r.details {
                    if *k != "bracket" {
                        writeln!(s, "  {k} {v}").expect("write to string");
                    }
                }
                if let Some(c) = &r.counterexample {
                    writeln!(s, "  counterexample {c}").expect("write to string");
                }
                s
            }
            Format::Json => pretty(header, r)?,
            Format::Csv => {
                #[derive(Serialize)]
                struct Row<'r> {
                    suite: &'r str,
                    checked: u64,
                    failures: u64,
                    passed: bool,
                    counterexample: Option<&'r str>,
                }
                header.comments()
                    + &csv_rows(&[Row {
                        suite: r.suite.name(),
                        checked: r.checked,
                        failures: r.failures,
                        passed: r.passed,
                        counterexample: r.counterexample.as_deref(),
                    }])?
            }
        };
        self.emit(&text)
    }

    pub fn pillai(&self, header: &Header, r: &PillaiReport) -> io::Result<()> {
        let text = match self.format {
            Format::Text => {
                let mut s = header.comments();
                if r.truncated {
                    writeln!(s, "# truncated after {} digits", r.n).expect("write to string");
                }
                writeln!(
                    s,
                    "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}  verdict",
                    "pattern", "gamma", "overlap", "disjoint", "|o-g|", "|d-g|", "|o-d|"
                )
                .expect("write to string");
                for p in &r.summary {
                    writeln!(
                        s,
                        "{:<10} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>9.6}  {}",
                        p.pattern,
                        p.gamma,
                        p.overlap_freq,
                        p.disjoint_freq,
                        p.overlap_gamma,
                        p.disjoint_gamma,
                        p.overlap_disjoint,
                        p.verdict
                    )
                    .expect("write to string");
                }
                writeln!(s, "verdict {}", r.verdict).expect("write to string");
                s
            }
            Format::Json => pretty(header, r)?,
            Format::Csv => {
                let mut s = header.comments();
                s += &csv_rows(&r.rows)?;
                for p in &r.summary {
                    writeln!(
                        s,
                        "# summary pattern={} overlap_gamma={} disjoint_gamma={} overlap_disjoint={} verdict={}",
                        p.pattern, p.overlap_gamma, p.disjoint_gamma, p.overlap_disjoint, p.verdict
                    )
                    .expect("write to string");
                }
                writeln!(s, "# truncated={} verdict={}", r.truncated, r.verdict).expect("write to string");
                s
            }
        };
        self.emit(&text)
    }

    pub fn subsequence(&self, header: &Header, r: &SubsequenceReport) -> io::Result<()> {
        let text = match self.format {
            Format::Text => {
                let mut s = header.comments();
                if r.truncated {
                    writeln!(s, "# truncated after {} selected digits", r.selected)
                        .expect("write to string");
                }
                writeln!(s, "selected digits   {}", r.selected).expect("write to string");
                writeln!(s, "freq [1,1]        {:.6}", r.freq_11).expect("write to string");
                writeln!(
                    s,
                    "joint measure     [{:.6}, {:.6}]  distance {:.6}",
                    r.joint_bracket[0], r.joint_bracket[1], r.distance_joint
                )
                .expect("write to string");
                writeln!(s, "γ(C[1,1])         {:.6}  distance {:.6}", r.gamma_11, r.distance_gamma_11)
                    .expect("write to string");
                writeln!(s, "verdict {}", r.verdict).expect("write to string");
                s
            }
            Format::Json => pretty(header, r)?,
            Format::Csv => {
                let mut s = header.comments();
                s += &csv_rows(&r.rows)?;
                writeln!(
                    s,
                    "# summary freq_11={} joint_lo={} joint_hi={} gamma_11={} distance_joint={} distance_gamma_11={} truncated={} verdict={}",
                    r.freq_11,
                    r.joint_bracket[0],
                    r.joint_bracket[1],
                    r.gamma_11,
                    r.distance_joint,
                    r.distance_gamma_11,
                    r.truncated,
                    r.verdict
                )
                .expect("write to string");
                s
            }
        };
        self.emit(&text)
    }
}
