//! `key=value` config files, merged into the argument list so that flags
//! given on the command line win.

use std::fs;
use std::path::Path;

/// Finds the value of `--config` in raw arguments.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            return iter.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Turns config lines into flags. Blank lines and `#` comments are skipped;
/// `true`/`false` values toggle switches.
pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", no + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        if key == "config" {
            continue;
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

pub fn load(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text)
}

/// Inserts config flags right after the subcommand so later command-line
/// flags override them.
pub fn merge(args: Vec<String>, config_flags: Vec<String>) -> Vec<String> {
    let Some(at) = args.iter().skip(1).position(|a| !a.starts_with('-')) else {
        return args;
    };
    let at = at + 2;
    let mut merged = args[..at].to_vec();
    merged.extend(config_flags);
    merged.extend_from_slice(&args[at..]);
    merged
}
