//! Per-run metric rows and their CSV form.

use crate::error::{HarnessError, Result};
use std::path::Path;

pub const HEADER: [&str; 7] = [
    "run_id",
    "seed",
    "iteration",
    "wall_clock_s",
    "objective",
    "infeasibility",
    "near_stationarity",
];

/// One checkpoint of one run. `iteration = t` reports the iterate produced by
/// step t, i.e. x^(t+1).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub iteration: usize,
    /// CPU seconds spent by the run up to this iterate.
    pub wall_clock_s: f64,
    pub objective: f64,
    /// g_+ of the iterate.
    pub infeasibility: f64,
    pub near_stationarity: Option<f64>,
}

/// `count` equally spaced 0-based positions in `0..total`, ending at
/// `total − 1`: position k is `(k+1)·total/count − 1`.
pub fn equally_spaced(total: usize, count: usize) -> Vec<usize> {
    assert!(count >= 1 && count <= total, "need 1 <= count <= total");
    (0..count).map(|k| (k + 1) * total / count - 1).collect()
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip form, so identical runs write identical bytes.
    format!("{v}")
}

pub fn write_rows(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.run_id.clone(),
            r.seed.to_string(),
            r.iteration.to_string(),
            format!("{:.6}", r.wall_clock_s),
            fmt_f64(r.objective),
            fmt_f64(r.infeasibility),
            r.near_stationarity.map(fmt_f64).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads and validates a run CSV: exact header, parseable fields, strictly
/// increasing iterations, at least one row.
pub fn read_rows(path: &Path) -> Result<Vec<MetricsRow>> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let schema = |column: &str, problem| HarnessError::Schema {
        path: path.to_path_buf(),
        column: column.to_string(),
        problem,
    };
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(HarnessError::EmptyCsv(path.to_path_buf()));
    }
    for (k, want) in HEADER.iter().enumerate() {
        match headers.get(k) {
            Some(got) if got == *want => {}
            Some(_) if headers.iter().any(|h| h == *want) => return Err(schema(want, "is out of order")),
            _ => return Err(schema(want, "is missing")),
        }
    }
    if let Some(extra) = headers.iter().nth(HEADER.len()) {
        return Err(schema(extra, "is not part of the schema"));
    }

    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| field(k).parse::<f64>().map_err(|_| schema(HEADER[k], "has a non-numeric value"));
        let row = MetricsRow {
            run_id: field(0).to_string(),
            seed: field(1).parse().map_err(|_| schema(HEADER[1], "has a non-integer value"))?,
            iteration: field(2).parse().map_err(|_| schema(HEADER[2], "has a non-integer value"))?,
            wall_clock_s: num(3)?,
            objective: num(4)?,
            infeasibility: num(5)?,
            near_stationarity: if field(6).is_empty() { None } else { Some(num(6)?) },
        };
        if let Some(prev) = rows.last() {
            let prev: &MetricsRow = prev;
            if row.iteration <= prev.iteration {
                return Err(schema(HEADER[2], "is not strictly increasing"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(HarnessError::EmptyCsv(path.to_path_buf()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_thousand_into_one_hundred() {
        let s = equally_spaced(5000, 100);
        assert_eq!(s.len(), 100);
        assert_eq!(&s[..3], &[49, 99, 149]);
        assert_eq!(*s.last().unwrap(), 4999);
    }

    #[test]
    fn subsample_of_checkpoint_rows() {
        assert_eq!(equally_spaced(600, 30)[..2], [19, 39]);
        assert_eq!(equally_spaced(7, 7), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rows = vec![
            MetricsRow {
                run_id: "a".into(),
                seed: 3,
                iteration: 4,
                wall_clock_s: 0.5,
                objective: 0.1,
                infeasibility: 0.0,
                near_stationarity: None,
            },
            MetricsRow {
                run_id: "a".into(),
                seed: 3,
                iteration: 9,
                wall_clock_s: 1.0,
                objective: 1e-7,
                infeasibility: 2.5,
                near_stationarity: Some(0.25),
            },
        ];
        write_rows(&p, &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("run_id,seed,iteration,wall_clock_s,objective,infeasibility,near_stationarity\n"));
        assert!(text.contains("a,3,4,0.500000,0.1,0,\n"));
        assert_eq!(read_rows(&p).unwrap(), rows);
    }

    #[test]
    fn schema_errors_name_the_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "run_id,seed,iteration,wall_clock_s,objective,near_stationarity\n").unwrap();
        match read_rows(&p) {
            Err(HarnessError::Schema { column, .. }) => assert_eq!(column, "infeasibility"),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&p, format!("{}\na,1,5,0,1,0,\na,1,5,0,1,0,\n", HEADER.join(","))).unwrap();
        match read_rows(&p) {
            Err(HarnessError::Schema { column, .. }) => assert_eq!(column, "iteration"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(read_rows(&p), Err(HarnessError::EmptyCsv(_))));
        std::fs::write(&p, format!("{}\n", HEADER.join(","))).unwrap();
        assert!(matches!(read_rows(&p), Err(HarnessError::EmptyCsv(_))));
    }
}
