//! Experiment reports: JSON with a schema version, plus a flat CSV export of
//! the per-trial records.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::IoError;

pub const SCHEMA_VERSION: u32 = 1;

/// One seed of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrialRecord {
    pub seed: u64,
    /// Distinct entries of `b` read.
    pub queries: Option<usize>,
    /// Declared query budget.
    pub budget: Option<usize>,
    /// Loss norm of the returned solution over that of the full solve.
    pub cost_ratio: Option<f64>,
    pub wall_ms: f64,
    /// Rows kept by an embedding.
    pub nnz: Option<usize>,
    /// Largest measured `|‖SAx‖/‖Ax‖ − 1|`.
    pub distortion: Option<f64>,
    /// Pipeline-specific values.
    pub extra: BTreeMap<String, f64>,
}

/// Median and 10/90 percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub count: usize,
}

impl Quantiles {
    /// Linear interpolation between order statistics; `None` when empty.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            median: at(0.5),
            p10: at(0.1),
            p90: at(0.9),
            count: v.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub cost_ratio: Option<Quantiles>,
    pub queries: Option<Quantiles>,
    pub nnz: Option<Quantiles>,
    pub distortion: Option<Quantiles>,
    pub wall_ms: Option<Quantiles>,
    pub extra: BTreeMap<String, Quantiles>,
}

impl Summary {
    pub fn of(trials: &[TrialRecord]) -> Self {
        let pick =
            |f: &dyn Fn(&TrialRecord) -> Option<f64>| Quantiles::of(&trials.iter().filter_map(f).collect::<Vec<_>>());
        let mut extra = BTreeMap::new();
        for key in trials.iter().flat_map(|t| t.extra.keys()) {
            if !extra.contains_key(key) {
                if let Some(q) = pick(&|t| t.extra.get(key).copied()) {
                    extra.insert(key.clone(), q);
                }
            }
        }
        Self {
            cost_ratio: pick(&|t| t.cost_ratio),
            queries: pick(&|t| t.queries.map(|q| q as f64)),
            nnz: pick(&|t| t.nnz.map(|q| q as f64)),
            distortion: pick(&|t| t.distortion),
            wall_ms: pick(&|t| Some(t.wall_ms)),
            extra,
        }
    }
}

/// Everything needed to re-run an experiment, and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub pipeline: String,
    /// The experiment spec, echoed verbatim.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    /// Set when the instance was too large for a full-solve baseline.
    pub baseline_omitted: bool,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// The report with every wall time zeroed, for replay comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for t in &mut r.trials {
            t.wall_ms = 0.0;
        }
        r.summary = Summary::of(&r.trials);
        r
    }

    /// One CSV row per trial; `extra` keys become columns.
    pub fn write_csv(&self, path: &Path) -> Result<(), IoError> {
        let fail = |e: csv::Error| IoError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut keys: Vec<&String> = self.trials.iter().flat_map(|t| t.extra.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut w = csv::Writer::from_path(path).map_err(fail)?;
        let mut header: Vec<String> = [
            "seed",
            "queries",
            "budget",
            "cost_ratio",
            "wall_ms",
            "nnz",
            "distortion",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(keys.iter().map(|k| k.to_string()));
        w.write_record(&header).map_err(fail)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for t in &self.trials {
            let mut row = vec![
                t.seed.to_string(),
                opt(t.queries.map(|v| v.to_string())),
                opt(t.budget.map(|v| v.to_string())),
                opt(t.cost_ratio.map(|v| v.to_string())),
                t.wall_ms.to_string(),
                opt(t.nnz.map(|v| v.to_string())),
                opt(t.distortion.map(|v| v.to_string())),
            ];
            row.extend(keys.iter().map(|k| opt(t.extra.get(*k).map(|v| v.to_string()))));
            w.write_record(&row).map_err(fail)?;
        }
        w.flush().map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let q = Quantiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.median, q.count), (3.0, 5));
        assert!((q.p10 - 1.4).abs() < 1e-12 && (q.p90 - 4.6).abs() < 1e-12);
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn csv_has_extra_columns() {
        let mut t = TrialRecord {
            seed: 3,
            queries: Some(10),
            ..TrialRecord::default()
        };
        t.extra.insert("sum".into(), 2.5);
        let r = ExperimentReport {
            schema_version: SCHEMA_VERSION,
            pipeline: "sens".into(),
            config: serde_json::Value::Null,
            seeds: vec![3],
            baseline_omitted: false,
            summary: Summary::of(std::slice::from_ref(&t)),
            trials: vec![t],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        r.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("seed,queries,budget,cost_ratio,wall_ms,nnz,distortion,sum\n3,10,,,0,,,2.5"));
        assert_eq!(r.summary.extra["sum"].median, 2.5);
    }
}
