//! Turning command-line strings and files into core values. Anything that
//! fails here is the caller's mistake and exits with status 2.

use std::fs;
use std::path::Path;

use lacuna_core::rational::{self, Rational};
use lacuna_core::sequences::{self, LacunarySequence, SequenceFile};
use lacuna_core::survivor::SurvivorConfig;
use serde::Deserialize;

use crate::args::{SeqArgs, SetArgs, SpectrumArgs};
use crate::CliError;

pub const MAX_INTERVALS_VAR: &str = "LACUNA_MAX_INTERVALS";

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn rational(flag: &str, text: &str) -> Result<Rational, CliError> {
    rational::parse(text).map_err(|e| usage(format!("--{flag}: {e}")))
}

pub fn int_list(flag: &str, text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| usage(format!("--{flag}: {t:?} is not a nonnegative integer"))))
        .collect()
}

/// `a:b`, both ends included.
pub fn window(text: &str) -> Result<(i64, i64), CliError> {
    let bad = || usage(format!("--window: expected a:b, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(usage(format!("--window: {lo} > {hi}")));
    }
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Integer lists on disk may be bare arrays or sequence files.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntFile {
    Bare(Vec<u64>),
    Seq(SequenceFile),
}

fn int_file(path: &Path) -> Result<Vec<u64>, CliError> {
    Ok(match json::<IntFile>(path)? {
        IntFile::Bare(v) => v,
        IntFile::Seq(f) => f.terms,
    })
}

pub fn set(args: &SetArgs) -> Result<Vec<u64>, CliError> {
    match (&args.s, &args.s_file) {
        (Some(s), _) => int_list("s", s),
        (_, Some(p)) => int_file(p),
        _ => Err(usage("one of --s, --s-file is required")),
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<Vec<u64>, CliError> {
    match (&args.h, &args.h_file) {
        (Some(h), _) => int_list("h", h),
        (_, Some(p)) => int_file(p),
        _ => Err(usage("one of --h, --h-file is required")),
    }
}

/// Loads the sequence. Input errors exit 2; a sequence that fails its own
/// invariants is a failed check and exits 1.
pub fn sequence(args: &SeqArgs) -> Result<LacunarySequence, CliError> {
    let epsilon = args.epsilon.as_deref().map(|e| rational("epsilon", e)).transpose()?;
    let seq = match (&args.input, &args.terms, args.count) {
        (Some(path), _, _) => LacunarySequence::from_file(&json(path)?),
        (_, Some(terms), _) => sequences::validate(&int_list("terms", terms)?, epsilon),
        (_, _, Some(count)) => {
            let eps = epsilon.ok_or_else(|| usage("--count needs --epsilon"))?;
            sequences::generate_geometric(&eps, count, 1)
        }
        _ => return Err(usage("one of --input, --terms, --count is required")),
    };
    Ok(seq.map_err(lacuna_core::Error::from)?)
}

pub fn truncation(seq: &LacunarySequence, n: Option<usize>) -> Result<usize, CliError> {
    match n {
        None => Ok(seq.len()),
        Some(n) if n <= seq.len() => Ok(n),
        Some(n) => Err(usage(format!("-n {n} exceeds the {} available terms", seq.len()))),
    }
}

pub fn coloring_csv(path: &Path) -> Result<(i64, Vec<u64>), CliError> {
    let text = read(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("n,color") {
        return Err(usage(format!("{}: expected header n,color", path.display())));
    }
    let mut lo = None;
    let mut colors = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || usage(format!("{}: bad row {line:?}", path.display()));
        let (n, c) = line.split_once(',').ok_or_else(bad)?;
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let c: u64 = c.trim().parse().map_err(|_| bad())?;
        let start = *lo.get_or_insert(n);
        if n != start + i as i64 {
            return Err(usage(format!("{}: rows must cover consecutive integers", path.display())));
        }
        colors.push(c);
    }
    match lo {
        Some(lo) => Ok((lo, colors)),
        None => Err(usage(format!("{}: no rows", path.display()))),
    }
}

pub fn survivor_config(panes: usize) -> Result<SurvivorConfig, CliError> {
    let mut config = SurvivorConfig {
        panes: panes.max(1),
        ..SurvivorConfig::default()
    };
    if let Ok(v) = std::env::var(MAX_INTERVALS_VAR) {
        config.max_intervals = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("{MAX_INTERVALS_VAR}={v:?} is not a positive integer")))?;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(window("-100000:100000").unwrap(), (-100_000, 100_000));
        assert_eq!(window("3:3").unwrap(), (3, 3));
        assert!(window("4:3").is_err());
        assert!(window("4").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(int_list("s", "1, 2,3,").unwrap(), vec![1, 2, 3]);
        assert!(int_list("s", "1,-2").is_err());
    }
}
