//! Tabular performance data: loading, standardization, mean imputation,
//! missing-value injection and k-fold planning.
//!
//! Missing-value injection is per cell: a rate of `p` blanks `round(p * S * F)`
//! feature cells drawn uniformly without replacement over the whole S×F grid.
//! It does not blank `p` percent of rows.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    features: Array2<f64>,
    target: Array1<f64>,
    feature_names: Vec<String>,
    missing_mask: Array2<bool>,
    standardized: bool,
}

/// Per-column statistics recorded by [`standardize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

/// Summary of what [`load_csv`] skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub rows_read: usize,
    pub unlabeled_dropped: usize,
}

impl std::fmt::Display for LoadReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} rows read, {} unlabeled row{} dropped",
            self.rows_read,
            self.unlabeled_dropped,
            if self.unlabeled_dropped == 1 { "" } else { "s" }
        )
    }
}

impl TabularDataset {
    /// Builds a dataset, deriving the missing mask from non-finite cells.
    pub fn new(features: Array2<f64>, target: Array1<f64>, feature_names: Vec<String>) -> Result<Self> {
        let (s, f) = features.dim();
        if target.len() != s {
            return Err(Error::LengthMismatch {
                left: s,
                right: target.len(),
            });
        }
        if feature_names.len() != f {
            return Err(Error::LengthMismatch {
                left: f,
                right: feature_names.len(),
            });
        }
        if s == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut features = features;
        let missing_mask = features.mapv(|v| !v.is_finite());
        // Canonical sentinel for absent cells.
        features.zip_mut_with(&missing_mask, |v, &m| {
            if m {
                *v = f64::NAN
            }
        });
        Ok(Self {
            features,
            target,
            feature_names,
            missing_mask,
            standardized: false,
        })
    }

    /// Convenience constructor with generated column names `x0, x1, ...`.
    pub fn from_arrays(features: Array2<f64>, target: Array1<f64>) -> Result<Self> {
        let names = (0..features.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(features, target, names)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn target(&self) -> &Array1<f64> {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn missing_mask(&self) -> &Array2<bool> {
        &self.missing_mask
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn missing_count(&self) -> usize {
        self.missing_mask.iter().filter(|&&m| m).count()
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), idx),
            target: self.target.select(Axis(0), idx),
            feature_names: self.feature_names.clone(),
            missing_mask: self.missing_mask.select(Axis(0), idx),
            standardized: self.standardized,
        }
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let (s, f) = self.features.dim();
        if self.target.len() != s || self.missing_mask.dim() != (s, f) || self.feature_names.len() != f {
            return Err("dimension mismatch".into());
        }
        for ((i, j), &v) in self.features.indexed_iter() {
            let m = self.missing_mask[[i, j]];
            if m && !v.is_nan() {
                return Err(format!("cell ({i},{j}) flagged missing but holds {v}"));
            }
            if !m && !v.is_finite() {
                return Err(format!("cell ({i},{j}) unflagged but non-finite"));
            }
        }
        if self.standardized {
            for j in 0..f {
                let obs: Vec<f64> = (0..s)
                    .filter(|&i| !self.missing_mask[[i, j]])
                    .map(|i| self.features[[i, j]])
                    .collect();
                let (mean, std) = mean_std(&obs);
                if std == 0.0 {
                    continue;
                }
                if mean.abs() >= 1e-9 || (std - 1.0).abs() >= 1e-6 {
                    return Err(format!("column {j}: mean {mean}, std {std}"));
                }
            }
        }
        Ok(())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Reads a comma-separated file with a header row. Blank cells are missing.
/// Rows with a blank target are dropped and counted in the report.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<(TabularDataset, LoadReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, target_column: &str) -> Result<(TabularDataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTargetColumn(target_column.to_owned()))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let f = names.len();

    let mut cells = Vec::new();
    let mut target = Vec::new();
    let mut report = LoadReport::default();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        report.rows_read += 1;
        let parse = |j: usize, raw: &str| -> Result<f64> {
            if raw.is_empty() {
                return Ok(f64::NAN);
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::NonNumericCell {
                    row,
                    column: headers[j].clone(),
                    value: raw.to_owned(),
                }),
            }
        };
        let y = parse(target_idx, record.get(target_idx).unwrap_or(""))?;
        let mut row_vals = Vec::with_capacity(f);
        for j in 0..headers.len() {
            if j == target_idx {
                continue;
            }
            row_vals.push(parse(j, record.get(j).unwrap_or(""))?);
        }
        if y.is_nan() {
            report.unlabeled_dropped += 1;
            continue;
        }
        target.push(y);
        cells.extend(row_vals);
    }
    if target.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let s = target.len();
    let features = Array2::from_shape_vec((s, f), cells).expect("row width checked");
    let d = TabularDataset::new(features, Array1::from(target), names)?;
    Ok((d, report))
}

/// Per-column z-score over observed entries with the population standard
/// deviation. Zero-spread columns become all zero; missing cells stay missing.
pub fn standardize(d: &TabularDataset) -> Result<(TabularDataset, Vec<ColumnStats>)> {
    if d.standardized {
        return Err(Error::AlreadyStandardized);
    }
    let mut out = d.clone();
    let mut stats = Vec::with_capacity(d.n_features());
    for j in 0..d.n_features() {
        let obs: Vec<f64> = (0..d.n_samples())
            .filter(|&i| !d.missing_mask[[i, j]])
            .map(|i| d.features[[i, j]])
            .collect();
        let (mean, std) = mean_std(&obs);
        stats.push(ColumnStats { mean, std });
        for i in 0..d.n_samples() {
            if d.missing_mask[[i, j]] {
                continue;
            }
            let v = &mut out.features[[i, j]];
            *v = if std > 0.0 { (*v - mean) / std } else { 0.0 };
        }
    }
    out.standardized = true;
    Ok((out, stats))
}

/// Replaces each missing cell by its column's observed mean.
pub fn impute_mean(d: &TabularDataset) -> Result<TabularDataset> {
    let mut out = d.clone();
    for j in 0..d.n_features() {
        let col_mask = d.missing_mask.column(j);
        if !col_mask.iter().any(|&m| m) {
            continue;
        }
        let obs: Vec<f64> = d
            .features
            .column(j)
            .iter()
            .zip(col_mask)
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
            .collect();
        if obs.is_empty() {
            return Err(Error::AllMissingColumn(j));
        }
        let mean = obs.iter().sum::<f64>() / obs.len() as f64;
        for i in 0..d.n_samples() {
            if d.missing_mask[[i, j]] {
                out.features[[i, j]] = mean;
                out.missing_mask[[i, j]] = false;
            }
        }
    }
    Ok(out)
}

/// Missing-value injection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingSpec {
    pub rate: f64,
    pub seed: u64,
}

impl MissingSpec {
    pub const SWEEP_RATES: [f64; 6] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25];

    pub fn none() -> Self {
        Self { rate: 0.0, seed: 0 }
    }

    pub fn cell_count(&self, samples: usize, features: usize) -> usize {
        (self.rate * (samples * features) as f64).round() as usize
    }
}

/// Blanks exactly `round(rate * S * F)` feature cells, uniformly without
/// replacement. Targets are never touched.
pub fn inject_missing(d: &TabularDataset, spec: MissingSpec) -> Result<TabularDataset> {
    if !(0.0..=1.0).contains(&spec.rate) {
        return Err(Error::InvalidRate(spec.rate));
    }
    let present = d.missing_count();
    if present > 0 {
        return Err(Error::NonEmptyMask(present));
    }
    let (s, f) = d.features.dim();
    let count = spec.cell_count(s, f);
    let mut out = d.clone();
    if count == 0 {
        return Ok(out);
    }
    let mut rng = seed::rng(spec.seed);
    for cell in index::sample(&mut rng, s * f, count).into_iter() {
        let (i, j) = (cell / f, cell % f);
        out.features[[i, j]] = f64::NAN;
        out.missing_mask[[i, j]] = true;
    }
    Ok(out)
}

/// Imputed and standardized data with no missing cells. Graph construction
/// only accepts this type.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset {
    data: TabularDataset,
    stats: Vec<ColumnStats>,
}

impl PreparedDataset {
    /// Impute then standardize.
    pub fn prepare(d: &TabularDataset) -> Result<Self> {
        let imputed = impute_mean(d)?;
        let (data, stats) = standardize(&imputed)?;
        Ok(Self { data, stats })
    }

    /// Wraps an already-processed dataset, checking it is mask-free and standardized.
    pub fn from_processed(d: TabularDataset) -> Result<Self> {
        if d.missing_count() > 0 {
            return Err(Error::NotPrepared("dataset has missing cells; impute first"));
        }
        if !d.standardized {
            return Err(Error::NotPrepared("dataset is not standardized"));
        }
        Ok(Self {
            data: d,
            stats: Vec::new(),
        })
    }

    pub fn dataset(&self) -> &TabularDataset {
        &self.data
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.data.features()
    }

    pub fn target(&self) -> &Array1<f64> {
        self.data.target()
    }

    pub fn n_samples(&self) -> usize {
        self.data.n_samples()
    }

    pub fn n_features(&self) -> usize {
        self.data.n_features()
    }

    pub fn column_stats(&self) -> &[ColumnStats] {
        &self.stats
    }
}

/// Assignment of samples to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n_samples(&self) -> usize {
        self.assignments.len()
    }

    /// Test indices of fold `i`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&s| self.assignments[s] == fold)
            .collect()
    }

    /// Training indices of fold `i` (every sample outside it), ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&s| self.assignments[s] != fold)
            .collect()
    }

    /// Boolean training mask for fold `i`.
    pub fn train_mask(&self, fold: usize) -> Vec<bool> {
        self.assignments.iter().map(|&a| a != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// One `index,fold` line per sample, preceded by a `# k=<k>` header.
    pub fn to_text(&self) -> String {
        let mut out = format!("# k={}\n", self.k);
        for (i, a) in self.assignments.iter().enumerate() {
            let _ = writeln!(out, "{i},{a}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, message: &str| Error::MalformedFoldPlan {
            line,
            message: message.to_owned(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let k: usize = header
            .strip_prefix("# k=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(1, "expected `# k=<folds>` header"))?;
        let mut assignments = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (idx, fold) = line
                .split_once(',')
                .ok_or_else(|| bad(n + 1, "expected `index,fold`"))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad(n + 1, "bad index"))?;
            let fold: usize = fold.trim().parse().map_err(|_| bad(n + 1, "bad fold id"))?;
            if idx != assignments.len() {
                return Err(bad(n + 1, "indices must be consecutive from 0"));
            }
            if fold >= k {
                return Err(bad(n + 1, "fold id out of range"));
            }
            assignments.push(fold);
        }
        Ok(Self { k, assignments })
    }
}

/// Random permutation of `0..samples` cut into `k` contiguous near-equal folds;
/// the first `samples % k` folds get one extra sample.
pub fn make_folds(samples: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || samples < k {
        return Err(Error::TooFewSamples { samples, folds: k });
    }
    let mut perm: Vec<usize> = (0..samples).collect();
    perm.shuffle(&mut seed::rng(seed));
    let base = samples / k;
    let extra = samples % k;
    let mut assignments = vec![0; samples];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &s in &perm[pos..pos + size] {
            assignments[s] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan { k, assignments })
}
