// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Series comparison, pass/fail bookkeeping and CSV export.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{EnsembleStats, ObservableSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

/// Outcome of one preset run. Every check records the bound it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub preset: String,
    pub seed: u64,
    pub pass: bool,
    pub tolerances: BTreeMap<String, f64>,
    pub deviations: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Effective noise strength γ in units of c, when the preset uses one.
    pub gamma: Option<f64>,
    pub insufficient_statistics: bool,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

impl Report {
    pub fn new(preset: &str, seed: u64) -> Self {
        Self {
            preset: preset.into(),
            seed,
            pass: true,
            tolerances: BTreeMap::new(),
            deviations: BTreeMap::new(),
            checks: Vec::new(),
            gamma: None,
            insufficient_statistics: false,
            notes: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, measured: f64, tolerance: f64, relation: Relation) -> bool {
        let name = name.into();
        let pass = match relation {
            Relation::AtMost => measured <= tolerance,
            Relation::AtLeast => measured >= tolerance,
        };
        self.tolerances.insert(name.clone(), tolerance);
        self.deviations.insert(name.clone(), measured);
        self.checks.push(Check {
            name,
            measured,
            tolerance,
            relation,
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Informational value without a bound.
    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.deviations.insert(name.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn flag_insufficient_statistics(&mut self, n_traj: usize) {
        self.insufficient_statistics = true;
        self.pass = false;
        self.note(format!("insufficient statistics: n_traj = {n_traj}, standard errors are undefined"));
    }

    pub fn checks_named(&self, prefix: &str) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.name.starts_with(prefix)).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Pointwise bound max(k_sigma · stderr, abs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub k_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
    /// max |a - b| / allowed over the common grid; ≤ 1 passes.
    pub worst_ratio: f64,
    pub n_points: usize,
    pub pass: bool,
}

/// Linear interpolation of `s` at `t`, or `None` outside its range.
pub fn interpolate(s: &ObservableSeries, t: f64) -> Option<f64> {
    let ts = &s.times;
    let (first, last) = (*ts.first()?, *ts.last()?);
    if t < first || t > last {
        return None;
    }
    let k = ts.partition_point(|&x| x < t);
    if ts[k] == t || k == 0 {
        return Some(s.values[k]);
    }
    let (t0, t1) = (ts[k - 1], ts[k]);
    let w = (t - t0) / (t1 - t0);
    Some(s.values[k - 1] * (1.0 - w) + s.values[k] * w)
}

/// Compares `a` with `b` interpolated onto `a`'s grid, over the overlap only.
pub fn compare_series(
    a: &ObservableSeries,
    b: &ObservableSeries,
    a_stderr: Option<&[f64]>,
    tol: Tolerance,
) -> Result<ComparisonReport> {
    if let Some(se) = a_stderr {
        if se.len() != a.values.len() {
            return Err(Error::DimensionMismatch {
                op: "compare_series",
                left: (a.values.len(), 1),
                right: (se.len(), 1),
            });
        }
    }
    let (mut max_abs, mut sum_sq, mut worst, mut n) = (0.0f64, 0.0, 0.0f64, 0usize);
    for (i, (&t, &va)) in a.times.iter().zip(&a.values).enumerate() {
        let Some(vb) = interpolate(b, t) else { continue };
        let d = (va - vb).abs();
        let allowed = a_stderr.map_or(tol.abs, |se| (tol.k_sigma * se[i]).max(tol.abs));
        max_abs = max_abs.max(d);
        sum_sq += d * d;
        worst = worst.max(if allowed > 0.0 { d / allowed } else if d > 0.0 { f64::INFINITY } else { 0.0 });
        n += 1;
    }
    if n == 0 {
        return Err(Error::DisjointGrids);
    }
    Ok(ComparisonReport {
        name: a.name.clone(),
        max_abs,
        rms: (sum_sq / n as f64).sqrt(),
        worst_ratio: worst,
        n_points: n,
        pass: worst <= 1.0,
    })
}

/// Significant excursions of a relaxing trace around its asymptote.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    /// Local extrema beyond the asymptote on either side, after the initial
    /// approach.
    pub extrema: usize,
    /// Largest such excursion, in units of the trace.
    pub max_excursion: f64,
    /// Largest such excursion, in standard errors.
    pub max_excursion_sigma: f64,
}

/// Splits the trace into maximal runs where |mean - asymptote| > k·stderr.
/// The first run on the starting side is the approach itself; every later
/// run holds one extremum.
pub fn detect_oscillation(mean: &[f64], stderr: &[f64], asymptote: f64, k_sigma: f64) -> Oscillation {
    let mut runs: Vec<(f64, f64, f64)> = Vec::new(); // (side, excursion, sigma)
    let mut current: Option<(f64, f64, f64)> = None;
    for (&m, &se) in mean.iter().zip(stderr) {
        let d = m - asymptote;
        let significant = d.abs() > k_sigma * se && d != 0.0;
        match (&mut current, significant) {
            (Some(run), true) if run.0 == d.signum() => {
                if d.abs() > run.1 {
                    run.1 = d.abs();
                    run.2 = if se > 0.0 { d.abs() / se } else { f64::INFINITY };
                }
            }
            (_, true) => {
                if let Some(run) = current.take() {
                    runs.push(run);
                }
                current = Some((d.signum(), d.abs(), if se > 0.0 { d.abs() / se } else { f64::INFINITY }));
            }
            (_, false) => {
                if let Some(run) = current.take() {
                    runs.push(run);
                }
            }
        }
    }
    runs.extend(current);
    let start_side = mean.first().map_or(0.0, |m| (m - asymptote).signum());
    let skip = usize::from(runs.first().is_some_and(|r| r.0 == start_side));
    let later = &runs[skip.min(runs.len())..];
    Oscillation {
        extrema: later.len(),
        max_excursion: later.iter().map(|r| r.1).fold(0.0, f64::max),
        max_excursion_sigma: later.iter().map(|r| r.2).fold(0.0, f64::max),
    }
}

/// Largest rise of a nominally non-increasing trace, in units of the combined
/// band 2(se_i + se_j): a value ≤ 1 means some non-increasing curve stays
/// within 2 standard errors of every point.
pub fn monotone_violation(mean: &[f64], stderr: &[f64], decreasing: bool) -> f64 {
    let sign = if decreasing { 1.0 } else { -1.0 };
    let mut worst = 0.0f64;
    for j in 1..mean.len() {
        for i in 0..j {
            let rise = sign * (mean[j] - mean[i]);
            if rise > 0.0 {
                let band = 2.0 * (stderr[i] + stderr[j]);
                worst = worst.max(if band > 0.0 { rise / band } else { f64::INFINITY });
            }
        }
    }
    worst
}

/// Columns sharing one time grid, written as `t,<name>_mean,<name>_stderr,...`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesTable {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SeriesTable {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            columns: Vec::new(),
        }
    }

    pub fn from_stats(stats: &EnsembleStats) -> Self {
        let mut t = Self::new(stats.times.clone());
        for (k, name) in stats.names.iter().enumerate() {
            t.columns.push(Column {
                name: name.clone(),
                mean: stats.mean[k].clone(),
                stderr: stats.stderr[k].clone(),
            });
        }
        t
    }

    pub fn push(&mut self, name: &str, mean: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<()> {
        let stderr = stderr.unwrap_or_else(|| vec![0.0; mean.len()]);
        if mean.len() != self.times.len() || stderr.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                op: "SeriesTable::push",
                left: (self.times.len(), 1),
                right: (mean.len(), stderr.len()),
            });
        }
        self.columns.push(Column {
            name: name.into(),
            mean,
            stderr,
        });
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Writes the table with a header row; floats use the shortest representation
/// that parses back to the same value.
pub fn export_csv(table: &SeriesTable, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = String::from("t");
    for c in &table.columns {
        header.push_str(&format!(",{0}_mean,{0}_stderr", c.name));
    }
    writeln!(f, "{header}")?;
    for (i, t) in table.times.iter().enumerate() {
        let mut line = format!("{t}");
        for c in &table.columns {
            line.push_str(&format!(",{},{}", c.mean[i], c.stderr[i]));
        }
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    Ok(())
}

pub fn import_csv(path: &Path) -> Result<SeriesTable> {
    let bad = |reason: String| Error::Config {
        field: path.display().to_string(),
        reason,
    };
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.first() != Some(&"t") || fields.len() % 2 != 1 {
        return Err(bad(format!("malformed header `{header}`")));
    }
    let mut table = SeriesTable::default();
    for pair in fields[1..].chunks(2) {
        let name = pair[0]
            .strip_suffix("_mean")
            .filter(|n| pair[1].strip_suffix("_stderr") == Some(*n))
            .ok_or_else(|| bad(format!("expected <name>_mean,<name>_stderr, got {},{}", pair[0], pair[1])))?;
        table.columns.push(Column {
            name: name.into(),
            mean: Vec::new(),
            stderr: Vec::new(),
        });
    }
    for (row, line) in lines.enumerate() {
        let line = line?;
        let values = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", row + 1)))?;
        if values.len() != fields.len() {
            return Err(bad(format!("row {} has {} fields, expected {}", row + 1, values.len(), fields.len())));
        }
        table.times.push(values[0]);
        for (k, c) in table.columns.iter_mut().enumerate() {
            c.mean.push(values[1 + 2 * k]);
            c.stderr.push(values[2 + 2 * k]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> ObservableSeries {
        ObservableSeries {
            name: "x".into(),
            times: (0..values.len()).map(|k| k as f64 * 0.5).collect(),
            values,
        }
    }

    #[test]
    fn compare_examples() {
        let tol = Tolerance { abs: 0.02, k_sigma: 3.0 };
        let a = series(vec![1.0, 0.5, 0.2, 0.1]);
        let same = compare_series(&a, &a, None, tol).unwrap();
        assert_eq!((same.max_abs, same.rms, same.pass), (0.0, 0.0, true));

        let shifted = series(a.values.iter().map(|v| v + 0.1).collect());
        let r = compare_series(&a, &shifted, None, tol).unwrap();
        assert!((r.max_abs - 0.1).abs() < 1e-15 && !r.pass);
        let r = compare_series(&a, &shifted, Some(&[0.05; 4]), tol).unwrap();
        assert!(r.pass);

        let far = ObservableSeries {
            name: "y".into(),
            times: vec![10.0, 11.0],
            values: vec![0.0, 0.0],
        };
        assert!(matches!(compare_series(&a, &far, None, tol), Err(Error::DisjointGrids)));
    }

    #[test]
    fn interpolation_is_linear() {
        let b = series(vec![0.0, 1.0, 3.0]);
        assert_eq!(interpolate(&b, 0.25), Some(0.5));
        assert_eq!(interpolate(&b, 0.75), Some(2.0));
        assert_eq!(interpolate(&b, 1.0), Some(3.0));
        assert_eq!(interpolate(&b, 1.5), None);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut t = SeriesTable::new(vec![0.0, 0.1, 0.2]);
        t.push("sigma_z", vec![1.0, 1.0 / 3.0, -0.123456789012345], Some(vec![0.0, 1e-17, 0.02])).unwrap();
        export_csv(&t, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,sigma_z_mean,sigma_z_stderr\n"));
        assert_eq!(import_csv(&path).unwrap(), t);

        let empty = SeriesTable::new(vec![]);
        let mut e = empty.clone();
        e.push("sigma_z", vec![], None).unwrap();
        export_csv(&e, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "t,sigma_z_mean,sigma_z_stderr\n");
    }

    #[test]
    fn oscillation_detector() {
        let se = vec![0.01; 8];
        let damped = [1.0, 0.5, 0.1, -0.2, -0.05, 0.04, 0.0, 0.0];
        let o = detect_oscillation(&damped, &se, 0.0, 3.0);
        assert_eq!(o.extrema, 2);
        assert!((o.max_excursion - 0.2).abs() < 1e-15);
        let plain = [1.0, 0.5, 0.2, 0.05, 0.01, 0.0, 0.0, 0.0];
        assert_eq!(detect_oscillation(&plain, &se, 0.0, 3.0).extrema, 0);
    }

    #[test]
    fn monotone_band() {
        let se = [0.0, 0.01, 0.01, 0.01];
        assert_eq!(monotone_violation(&[1.0, 0.5, 0.2, 0.1], &se, true), 0.0);
        assert!(monotone_violation(&[1.0, 0.5, 0.2, 0.23], &se, true) <= 1.0);
        assert!(monotone_violation(&[1.0, 0.5, 0.2, 0.3], &se, true) > 1.0);
    }

    #[test]
    fn report_bookkeeping() {
        let mut r = Report::new("fig2a", 1);
        assert!(r.check("a", 0.01, 0.02, Relation::AtMost));
        assert!(r.pass);
        assert!(!r.check("b", 1.1, 1.2, Relation::AtLeast));
        assert!(!r.pass);
        assert_eq!(r.tolerances["b"], 1.2);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["preset", "seed", "tolerances", "deviations", "pass"] {
            assert!(json.get(key).is_some());
        }
    }
}
