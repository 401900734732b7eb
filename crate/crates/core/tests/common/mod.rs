#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::ArrayView2;
use ping_gnn::dataset::TabularDataset;

/// Writes `d` as a CSV with a `y` target column.
pub fn write_csv(path: &Path, d: &TabularDataset) {
    let mut text = d.feature_names().join(",") + ",y\n";
    let x = d.features();
    for i in 0..d.n_samples() {
        for j in 0..d.n_features() {
            let _ = write!(text, "{},", x[[i, j]]);
        }
        let _ = writeln!(text, "{}", d.target()[i]);
    }
    std::fs::write(path, text).unwrap();
}

/// All-pairs cosine neighbor graph: every row keeps its `n` most similar
/// other rows (lower index on ties), mutual picks collapse.
pub fn brute_force_edges(x: ArrayView2<'_, f64>, rows: &[usize], n: usize) -> BTreeSet<(usize, usize)> {
    let cos = |a: usize, b: usize| {
        let (ra, rb) = (x.row(a), x.row(b));
        let c = ra.dot(&rb) / (ra.dot(&ra).sqrt() * rb.dot(&rb).sqrt());
        if (c.abs() - 1.0).abs() < 1e-12 {
            c.signum()
        } else {
            c
        }
    };
    let mut edges = BTreeSet::new();
    for (li, &i) in rows.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .filter(|&(lj, _)| lj != li)
            .map(|(lj, &j)| (cos(i, j), lj))
            .collect();
        others.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, lj) in others.iter().take(n) {
            edges.insert((li.min(lj), li.max(lj)));
        }
    }
    edges
}
