//! libsvm ingestion and the 2:1 constraint/group split.

use crate::error::{Result, SsgError};
use crate::linalg::SparseVector;
use crate::problems::classifier::LinearClassifierData;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::BufRead;

/// Parses `label idx:val idx:val ...` lines with 1-based indices.
///
/// Labels must be ±1, or 0/1 (0 becomes −1). Blank lines and `#` comments
/// are skipped. The dimension is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<LinearClassifierData> {
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    let mut dim = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| SsgError::Parse { line: lineno, message: e.to_string() })?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| SsgError::Parse {
            line: lineno,
            message: format!("bad label `{label_tok}`"),
        })?;
        let mut pairs = Vec::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| SsgError::Parse {
                line: lineno,
                message: format!("expected idx:val, got `{tok}`"),
            })?;
            let i: usize = i.parse().map_err(|_| SsgError::Parse {
                line: lineno,
                message: format!("bad index `{i}`"),
            })?;
            if i == 0 {
                return Err(SsgError::Parse { line: lineno, message: "indices are 1-based".into() });
            }
            let v: f64 = v.parse().map_err(|_| SsgError::Parse {
                line: lineno,
                message: format!("bad value `{v}`"),
            })?;
            if !v.is_finite() {
                return Err(SsgError::Parse { line: lineno, message: format!("non-finite value `{v}`") });
            }
            dim = dim.max(i);
            pairs.push((i - 1, v));
        }
        rows.push(SparseVector::from_pairs(pairs));
        raw_labels.push((lineno, label));
    }
    let zero_one = raw_labels.iter().any(|(_, b)| *b == 0.0);
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (lineno, b) in raw_labels {
        let y = match (zero_one, b) {
            (_, b) if b == 1.0 => 1.0,
            (true, b) if b == 0.0 => -1.0,
            (false, b) if b == -1.0 => -1.0,
            _ => {
                return Err(SsgError::Parse { line: lineno, message: format!("label {b} is not ±1 or 0/1") });
            }
        };
        labels.push(y);
    }
    LinearClassifierData::new(dim, rows, labels)
}

/// Membership test on one feature value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Predicate {
    Greater { value: f64 },
    GreaterEq { value: f64 },
    Less { value: f64 },
    LessEq { value: f64 },
    Equal { value: f64 },
    /// Inclusive on both ends.
    Between { lo: f64, hi: f64 },
}

impl Predicate {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Predicate::Greater { value } => v > value,
            Predicate::GreaterEq { value } => v >= value,
            Predicate::Less { value } => v < value,
            Predicate::LessEq { value } => v <= value,
            Predicate::Equal { value } => v == value,
            Predicate::Between { lo, hi } => v >= lo && v <= hi,
        }
    }
}

/// Rows whose `feature` (0-based) satisfies `predicate` form the protected group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRule {
    pub feature: usize,
    pub predicate: Predicate,
}

impl fmt::Display for GroupRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = format!("x[{}]", self.feature);
        match self.predicate {
            Predicate::Greater { value } => write!(f, "{x} > {value}"),
            Predicate::GreaterEq { value } => write!(f, "{x} >= {value}"),
            Predicate::Less { value } => write!(f, "{x} < {value}"),
            Predicate::LessEq { value } => write!(f, "{x} <= {value}"),
            Predicate::Equal { value } => write!(f, "{x} == {value}"),
            Predicate::Between { lo, hi } => write!(f, "{lo} <= {x} <= {hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    /// D with labels, plus the group sets D_p and D_u.
    pub data: LinearClassifierData,
    /// Original row numbers of D, D_p and D_u, in split order.
    pub rows_constraint: Vec<usize>,
    pub rows_p: Vec<usize>,
    pub rows_u: Vec<usize>,
    pub split_seed: u64,
    pub group_rule: GroupRule,
}

/// Seeded shuffle, first two thirds to D, the rest split into D_p and D_u by
/// `rule`. With `retain_group_feature = false` the group coordinate is
/// dropped from D_p and D_u.
pub fn split_dataset(
    data: &LinearClassifierData,
    rule: GroupRule,
    seed: u64,
    retain_group_feature: bool,
) -> Result<DatasetSplit> {
    if data.is_empty() {
        return Err(SsgError::EmptyData("nothing to split".into()));
    }
    if rule.feature >= data.dim {
        return Err(SsgError::Contract(format!(
            "group feature {} outside dimension {}",
            rule.feature, data.dim
        )));
    }
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    RngStream::new(seed).shuffle(&mut order);
    let n_d = 2 * n / 3;
    let (rows_constraint, rest) = order.split_at(n_d);
    let (rows_p, rows_u): (Vec<usize>, Vec<usize>) = rest
        .iter()
        .partition(|&&i| rule.predicate.holds(data.features[i].get(rule.feature)));
    let name = rule.to_string();
    if rows_p.is_empty() {
        return Err(SsgError::EmptyGroup { rule: name, group: "protected" });
    }
    if rows_u.is_empty() {
        return Err(SsgError::EmptyGroup { rule: name, group: "unprotected" });
    }
    let group = |rows: &[usize]| -> Vec<SparseVector> {
        rows.iter()
            .map(|&i| {
                let a = &data.features[i];
                if retain_group_feature {
                    a.clone()
                } else {
                    a.without(rule.feature)
                }
            })
            .collect()
    };
    let mut out = LinearClassifierData::new(
        data.dim,
        rows_constraint.iter().map(|&i| data.features[i].clone()).collect(),
        rows_constraint.iter().map(|&i| data.labels[i]).collect(),
    )?;
    out.group_p = group(&rows_p);
    out.group_u = group(&rows_u);
    Ok(DatasetSplit {
        data: out,
        rows_constraint: rows_constraint.to_vec(),
        rows_p,
        rows_u,
        split_seed: seed,
        group_rule: rule,
    })
}
