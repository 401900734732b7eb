//! Initial graph construction from a prepared dataset.
//!
//! Single-graph construction links every sample to its `N` most
//! cosine-similar samples. Selection takes the top `N + 1` candidates (a
//! sample is always among its own most similar) and then drops the sample
//! itself, so no self-loops survive; in the published pseudocode the source
//! array is the current sample index repeated `N + 1` times. Mutual
//! selections collapse to a single undirected edge.
//!
//! Batched construction clusters the samples first and runs the same
//! procedure inside each cluster.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::dataset::PreparedDataset;
use crate::error::{Error, Result};
use crate::graph::{GraphBatch, PingGraph};

/// Below this many samples, batched construction risks clusters too small to
/// form useful graphs.
pub const BGC_SAFE_SAMPLES: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionMethod {
    Sgc,
    Bgc,
}

impl ConstructionMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sgc => "sgc",
            Self::Bgc => "bgc",
        }
    }
}

impl fmt::Display for ConstructionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ConstructionMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sgc" => Ok(Self::Sgc),
            "bgc" => Ok(Self::Bgc),
            _ => Err(format!("unknown construction method `{s}` (expected sgc, bgc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionConfig {
    pub n_neighbors: usize,
    pub method: ConstructionMethod,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            n_neighbors: 5,
            method: ConstructionMethod::Sgc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionWarning {
    SmallDatasetForBatching { samples: usize },
    SingletonClustersMerged { count: usize },
}

impl fmt::Display for ConstructionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SmallDatasetForBatching { samples } => write!(
                f,
                "batched construction on {samples} samples: datasets under {BGC_SAFE_SAMPLES} samples \
                 risk clusters too small to form graphs; single-graph construction is recommended"
            ),
            Self::SingletonClustersMerged { count } => {
                write!(f, "{count} single-sample cluster(s) merged into the nearest cluster")
            }
        }
    }
}

/// Values this close to ±1 are snapped to ±1 so that parallel vectors tie
/// exactly and the index tie-break applies.
const PARALLEL_TOL: f64 = 1e-12;

/// Pairwise cosine similarity `dot(x_i, x_j) / (|x_i| |x_j|)`, diagonal exactly 1.
pub fn cosine_similarity_matrix(features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let norms: Vec<f64> = features.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroNormRow(i));
    }
    let mut sim = features.dot(&features.t());
    let s = sim.nrows();
    for i in 0..s {
        for j in 0..s {
            sim[[i, j]] = if i == j {
                1.0
            } else {
                let c = sim[[i, j]] / (norms[i] * norms[j]);
                if c.abs() > 1.0 - PARALLEL_TOL {
                    c.signum()
                } else {
                    c
                }
            };
        }
    }
    Ok(sim)
}

/// The `n` samples most similar to `i`, excluding `i`, by descending
/// similarity with ties broken toward the lower index.
pub fn top_n_neighbors(sim: &Array2<f64>, i: usize, n: usize) -> Result<Vec<usize>> {
    let s = sim.nrows();
    if n + 1 > s {
        return Err(Error::NTooLarge {
            neighbors: n,
            samples: s,
        });
    }
    if i >= s {
        return Err(Error::IndexOutOfRange { index: i, len: s });
    }
    let row = sim.row(i);
    let cmp = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
    let mut cand: Vec<usize> = (0..s).collect();
    if n + 1 < s {
        cand.select_nth_unstable_by(n, cmp);
        cand.truncate(n + 1);
    }
    cand.sort_unstable_by(cmp);
    // The sample itself normally ranks first; if ties push it out of the
    // top N + 1 the last candidate goes instead.
    cand.retain(|&j| j != i);
    cand.truncate(n);
    Ok(cand)
}

/// Undirected top-N edge set over rows of `features`, as local indices.
fn knn_edges(features: ArrayView2<'_, f64>, n: usize) -> Result<BTreeSet<(usize, usize)>> {
    let sim = cosine_similarity_matrix(features)?;
    let mut edges = BTreeSet::new();
    for i in 0..features.nrows() {
        for j in top_n_neighbors(&sim, i, n)? {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    Ok(edges)
}

fn sgc_over(d: &PreparedDataset, members: &[usize], n: usize) -> Result<PingGraph> {
    let x = d.features().select(Axis(0), members);
    let y: Array1<f64> = d.target().select(Axis(0), members);
    let edges = knn_edges(x.view(), n)?;
    PingGraph::new(x, y, members.to_vec(), edges)
}

/// Single-graph construction over every sample.
pub fn build_single_graph(d: &PreparedDataset, cfg: &ConstructionConfig) -> Result<PingGraph> {
    if cfg.n_neighbors == 0 {
        return Err(Error::InvalidConfig("n_neighbors must be at least 1".into()));
    }
    let all: Vec<usize> = (0..d.n_samples()).collect();
    sgc_over(d, &all, cfg.n_neighbors)
}

/// Batched construction: one graph per cluster with `N' = min(N, size - 1)`.
/// Single-sample clusters are merged into the cluster whose centroid is most
/// cosine-similar to them before any graph is built.
pub fn build_batched_graphs(
    d: &PreparedDataset,
    cfg: &ConstructionConfig,
    clusters: &ClusterAssignment,
) -> Result<(GraphBatch, Vec<ConstructionWarning>)> {
    if cfg.n_neighbors == 0 {
        return Err(Error::InvalidConfig("n_neighbors must be at least 1".into()));
    }
    let s = d.n_samples();
    if clusters.labels.len() != s {
        return Err(Error::EmptyClustering(format!(
            "{} labels for {s} samples",
            clusters.labels.len()
        )));
    }
    if clusters.num_clusters == 0 {
        return Err(Error::EmptyClustering("no clusters".into()));
    }
    if let Some(i) = clusters
        .labels
        .iter()
        .position(|&l| l < 0 || l as usize >= clusters.num_clusters)
    {
        return Err(Error::EmptyClustering(format!(
            "sample {i} has label {}",
            clusters.labels[i]
        )));
    }
    let mut warnings = Vec::new();
    if s < BGC_SAFE_SAMPLES {
        warnings.push(ConstructionWarning::SmallDatasetForBatching { samples: s });
    }

    let mut groups: Vec<Vec<usize>> = clusters.members().into_iter().filter(|g| !g.is_empty()).collect();
    let merged = merge_singletons(d.features(), &mut groups);
    if merged > 0 {
        warnings.push(ConstructionWarning::SingletonClustersMerged { count: merged });
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::EmptyClustering("fewer than two samples in total".into()));
    }

    let graphs = groups
        .iter()
        .map(|members| sgc_over(d, members, cfg.n_neighbors.min(members.len() - 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok((GraphBatch::new(graphs, s)?, warnings))
}

fn centroid(x: ArrayView2<'_, f64>, members: &[usize]) -> Array1<f64> {
    let mut c = Array1::zeros(x.ncols());
    for &m in members {
        c += &x.row(m);
    }
    c / members.len() as f64
}

fn cosine(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let (na, nb) = (a.dot(a).sqrt(), b.dot(b).sqrt());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.dot(b) / (na * nb)
    }
}

/// Repeatedly folds the first single-member group into the group with the
/// most similar centroid (ties to the lower group index). Returns the number
/// of merges.
fn merge_singletons(x: ArrayView2<'_, f64>, groups: &mut Vec<Vec<usize>>) -> usize {
    let mut merges = 0;
    while groups.len() > 1 {
        let Some(single) = groups.iter().position(|g| g.len() == 1) else {
            break;
        };
        let point = x.row(groups[single][0]).to_owned();
        let target = (0..groups.len())
            .filter(|&g| g != single)
            .map(|g| (g, cosine(&point, &centroid(x, &groups[g]))))
            .fold(
                (usize::MAX, f64::NEG_INFINITY),
                |acc, c| if c.1 > acc.1 { c } else { acc },
            )
            .0;
        let member = groups[single][0];
        groups[target].push(member);
        groups[target].sort_unstable();
        groups.remove(single);
        merges += 1;
    }
    merges
}
