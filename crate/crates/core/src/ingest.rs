//! PrefLib pairwise-graph (`.pwg`) files and Borda-score ground truth.
//!
//! Two layouts are accepted. The classic one:
//!
//! ```text
//! 3                 <- number of candidates
//! 1,Alice           <- one "index,label" line per candidate (1-based)
//! 2,Bob
//! 3,Carol
//! 50,120,4          <- voters, sum of counts, number of records
//! 30,1,2            <- "count,i,j": 30 votes prefer candidate 1 over 2
//! ...
//! ```
//!
//! and the newer one, where metadata lines start with `#`
//! (`# NUMBER ALTERNATIVES: 3`, `# ALTERNATIVE NAME 1: Alice`, ...) and
//! records are written `count: i, j`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::model::{ItemId, PreferenceInstance, Ranking};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: candidate index {index} out of range 1..={n}")]
    IndexOutOfRange { line: usize, index: i64, n: usize },
    #[error("line {line}: count {text:?} is not a non-negative integer")]
    NonIntegerCount { line: usize, text: String },
}

/// Summary line of a classic `.pwg` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwgTotals {
    pub voters: u64,
    pub vote_sum: u64,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwgDocument {
    pub n: usize,
    pub labels: Vec<String>,
    pub totals: PwgTotals,
    /// `counts[(i, j)]` is the number of votes preferring `i` over `j`
    /// (zero-based indices).
    pub counts: BTreeMap<(ItemId, ItemId), u64>,
}

impl PwgDocument {
    pub fn count(&self, i: ItemId, j: ItemId) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Writes the classic layout with 1-based indices.
    pub fn to_pwg_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for (i, label) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, label);
        }
        let t = self.totals;
        let _ = writeln!(out, "{},{},{}", t.voters, t.vote_sum, t.records);
        for (&(i, j), &c) in &self.counts {
            let _ = writeln!(out, "{},{},{}", c, i + 1, j + 1);
        }
        out
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().map(|(i, l)| (i + 1, l.trim())).find(|(_, l)| !l.is_empty())
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedLine { line, reason: reason.into() }
}

fn parse_count(line: usize, text: &str) -> Result<u64, ParseError> {
    text.trim().parse().map_err(|_| ParseError::NonIntegerCount { line, text: text.trim().to_string() })
}

fn parse_index(line: usize, text: &str, n: usize) -> Result<ItemId, ParseError> {
    let index: i64 = text.trim().parse().map_err(|_| malformed(line, format!("bad index {text:?}")))?;
    if index < 1 || index as usize > n {
        return Err(ParseError::IndexOutOfRange { line, index, n });
    }
    Ok(index as usize - 1)
}

fn parse_record(line: usize, text: &str, n: usize) -> Result<(u64, ItemId, ItemId), ParseError> {
    let (count, rest) = match text.split_once(':') {
        Some((c, rest)) => (c, rest),
        None => text.split_once(',').ok_or_else(|| malformed(line, "expected `count,i,j`"))?,
    };
    let fields: Vec<&str> = rest.split(',').collect();
    if fields.len() != 2 {
        return Err(malformed(line, "expected `count,i,j`"));
    }
    let count = parse_count(line, count)?;
    let i = parse_index(line, fields[0], n)?;
    let j = parse_index(line, fields[1], n)?;
    if i == j {
        return Err(malformed(line, "record compares a candidate with itself"));
    }
    Ok((count, i, j))
}

pub fn parse_pwg(text: &str) -> Result<PwgDocument, ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.lines().any(|l| l.trim_start().starts_with('#')) {
        parse_commented(text)
    } else {
        parse_classic(text)
    }
}

fn parse_classic(text: &str) -> Result<PwgDocument, ParseError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (ln, first) = lines.next_line().ok_or_else(|| malformed(1, "empty input"))?;
    let n: usize = first.parse().map_err(|_| malformed(ln, "expected candidate count"))?;

    let mut labels = vec![String::new(); n];
    for _ in 0..n {
        let (ln, l) = lines.next_line().ok_or_else(|| malformed(ln, "missing candidate line"))?;
        let (idx, label) = l.split_once(',').ok_or_else(|| malformed(ln, "expected `index,label`"))?;
        let idx = parse_index(ln, idx, n)?;
        labels[idx] = label.trim().to_string();
    }

    let (ln, l) = lines.next_line().ok_or_else(|| malformed(ln, "missing totals line"))?;
    let parts: Vec<&str> = l.split(',').collect();
    if parts.len() != 3 {
        return Err(malformed(ln, "expected `voters,sum,records`"));
    }
    let totals = PwgTotals {
        voters: parse_count(ln, parts[0])?,
        vote_sum: parse_count(ln, parts[1])?,
        records: parse_count(ln, parts[2])?,
    };

    let mut counts = BTreeMap::new();
    while let Some((ln, l)) = lines.next_line() {
        let (c, i, j) = parse_record(ln, l, n)?;
        *counts.entry((i, j)).or_insert(0) += c;
    }
    Ok(PwgDocument { n, labels, totals, counts })
}

fn parse_commented(text: &str) -> Result<PwgDocument, ParseError> {
    let mut n: Option<usize> = None;
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut voters = None;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(meta) = l.strip_prefix('#') {
            let Some((key, value)) = meta.split_once(':') else { continue };
            let key = key.trim().to_ascii_uppercase();
            let value = value.trim();
            if key == "NUMBER ALTERNATIVES" {
                n = Some(value.parse().map_err(|_| malformed(ln, "bad alternative count"))?);
            } else if key == "NUMBER VOTERS" {
                voters = Some(parse_count(ln, value)?);
            } else if let Some(i) = key.strip_prefix("ALTERNATIVE NAME") {
                let i: usize = i.trim().parse().map_err(|_| malformed(ln, "bad alternative index"))?;
                names.insert(i, value.to_string());
            }
            continue;
        }
        records.push((ln, l));
    }
    let n = n.ok_or_else(|| malformed(1, "missing `# NUMBER ALTERNATIVES`"))?;
    let mut labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for (i, name) in names {
        if i < 1 || i > n {
            return Err(ParseError::IndexOutOfRange { line: 0, index: i as i64, n });
        }
        labels[i - 1] = name;
    }
    let mut counts = BTreeMap::new();
    for (ln, l) in records {
        let (c, i, j) = parse_record(ln, l, n)?;
        *counts.entry((i, j)).or_insert(0) += c;
    }
    let vote_sum = counts.values().sum();
    let totals = PwgTotals { voters: voters.unwrap_or(vote_sum), vote_sum, records: counts.len() as u64 };
    Ok(PwgDocument { n, labels, totals, counts })
}

/// How to treat a pair with no recorded votes in either direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Error,
    /// Use `p = 1/2`; the instance is then non-strict.
    Half,
}

impl std::str::FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "error" => Ok(MissingPolicy::Error),
            "half" => Ok(MissingPolicy::Half),
            other => Err(format!("unknown missing-pair policy {other:?}")),
        }
    }
}

/// `p[i][j] = N_ij / (N_ij + N_ji)`.
pub fn to_preference_instance(doc: &PwgDocument, missing: MissingPolicy) -> Result<PreferenceInstance> {
    let n = doc.n;
    let mut p = vec![0.5; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (doc.count(i, j), doc.count(j, i));
            let v = if a + b == 0 {
                match missing {
                    MissingPolicy::Error => return Err(Error::MissingPair(i, j)),
                    MissingPolicy::Half => 0.5,
                }
            } else {
                a as f64 / (a + b) as f64
            };
            p[i * n + j] = v;
            p[j * n + i] = 1.0 - v;
        }
    }
    PreferenceInstance::from_flat(n, p)
}

/// Normalized `{n, labels, p}` form of a parsed file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedInstance {
    pub n: usize,
    pub labels: Vec<String>,
    pub p: Vec<Vec<f64>>,
}

impl NormalizedInstance {
    pub fn new(doc: &PwgDocument, instance: &PreferenceInstance) -> Self {
        NormalizedInstance { n: doc.n, labels: doc.labels.clone(), p: instance.rows() }
    }
}

/// Borda scores `(1/(n−1)) Σ_{j≠i} p[i][j]` and the ranking by descending
/// score, ties broken by ascending index.
pub fn borda_ranking(instance: &PreferenceInstance) -> Result<(Ranking, Vec<f64>)> {
    let n = instance.n();
    if n < 2 {
        return Err(Error::param("instance", "Borda scores need at least two items"));
    }
    let scores: Vec<f64> =
        (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| instance.prob(i, j)).sum::<f64>() / (n - 1) as f64).collect();
    let mut order: Vec<ItemId> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok((Ranking::new(order)?, scores))
}
