//! Density-based hierarchical clustering used by batched graph construction.
//!
//! Core distances, mutual reachability, a minimum spanning tree over the
//! mutual-reachability graph, a condensed cluster hierarchy, and flat
//! extraction by excess-of-mass stability. Distances are Euclidean.

use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub min_cluster_size: usize,
    /// Neighbor rank used for core distances.
    pub min_samples: usize,
}

impl ClusterConfig {
    /// `min_samples` defaults to `min_cluster_size`.
    pub fn new(min_cluster_size: usize) -> Self {
        Self {
            min_cluster_size,
            min_samples: min_cluster_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::InvalidClusterConfig(
                "min_cluster_size must be at least 2".into(),
            ));
        }
        if self.min_samples < 1 {
            return Err(Error::InvalidClusterConfig("min_samples must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self::new(25)
    }
}

/// Flat clustering. Labels are cluster ids in `0..num_clusters` or `-1` for noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    pub num_clusters: usize,
}

impl ClusterAssignment {
    pub fn single(samples: usize) -> Self {
        Self {
            labels: vec![0; samples],
            num_clusters: usize::from(samples > 0),
        }
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    /// Members of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }

    /// One `index,label` line per sample.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }
}

/// Dense all-pairs Euclidean distances.
pub fn pairwise_distances(features: ArrayView2<'_, f64>) -> Array2<f64> {
    let s = features.nrows();
    let mut d = Array2::zeros((s, s));
    for i in 0..s {
        let xi = features.row(i);
        for j in (i + 1)..s {
            let dist = xi
                .iter()
                .zip(features.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    d
}

/// Distance from each sample to its `k`-th nearest other sample.
pub fn core_distances(features: ArrayView2<'_, f64>, k: usize) -> Result<Vec<f64>> {
    core_distances_from(&pairwise_distances(features), k)
}

pub fn core_distances_from(dist: &Array2<f64>, k: usize) -> Result<Vec<f64>> {
    let s = dist.nrows();
    if k == 0 || k + 1 > s {
        return Err(Error::KTooLarge { k, samples: s });
    }
    let mut buf = Vec::with_capacity(s);
    Ok((0..s)
        .map(|i| {
            buf.clear();
            buf.extend((0..s).filter(|&j| j != i).map(|j| dist[[i, j]]));
            let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// Symmetric mutual-reachability distances, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct MutualReachability {
    matrix: Array2<f64>,
}

impl MutualReachability {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[[i, j]]
    }

    pub fn from_matrix(matrix: Array2<f64>) -> Self {
        Self { matrix }
    }
}

/// `mr(i, j) = max(core_i, core_j, dist(i, j))`, with `mr(i, i) = 0`.
pub fn mutual_reachability(features: ArrayView2<'_, f64>, core: &[f64]) -> MutualReachability {
    mutual_reachability_from(&pairwise_distances(features), core)
}

pub fn mutual_reachability_from(dist: &Array2<f64>, core: &[f64]) -> MutualReachability {
    let s = dist.nrows();
    let mut m = Array2::zeros((s, s));
    for i in 0..s {
        for j in (i + 1)..s {
            let v = dist[[i, j]].max(core[i]).max(core[j]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    MutualReachability { matrix: m }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl MstEdge {
    fn key(&self) -> (f64, usize, usize) {
        (self.weight, self.a.min(self.b), self.a.max(self.b))
    }
}

fn key_less(x: (f64, usize, usize), y: (f64, usize, usize)) -> bool {
    match x.0.total_cmp(&y.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => (x.1, x.2) < (y.1, y.2),
    }
}

/// Prim's algorithm on the dense graph. Edges compare by
/// `(weight, min index, max index)`, a strict total order, so the tree is
/// unique. Output is sorted by that key with `a < b`.
pub fn minimum_spanning_tree(mr: &MutualReachability) -> Vec<MstEdge> {
    let s = mr.len();
    if s < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; s];
    // Best connecting edge for each vertex outside the tree.
    let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; s];
    let mut edges = Vec::with_capacity(s - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..s {
        for v in 0..s {
            if in_tree[v] {
                continue;
            }
            let cand = (mr.get(current, v), current.min(v), current.max(v));
            if best[v].is_none_or(|b| key_less(cand, b)) {
                best[v] = Some(cand);
            }
        }
        let (next, key) = (0..s)
            .filter(|&v| !in_tree[v])
            .map(|v| (v, best[v].expect("all outside vertices have a candidate")))
            .reduce(|acc, x| if key_less(x.1, acc.1) { x } else { acc })
            .expect("vertices remain");
        in_tree[next] = true;
        edges.push(MstEdge {
            a: key.1,
            b: key.2,
            weight: key.0,
        });
        current = next;
    }
    edges.sort_by(|x, y| {
        if key_less(x.key(), y.key()) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    edges
}

// Condensed hierarchy ---------------------------------------------------------

/// Distances of exactly zero map to this density level instead of infinity so
/// stability sums stay finite.
const MAX_LAMBDA: f64 = 1e12;

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        (1.0 / distance).min(MAX_LAMBDA)
    } else {
        MAX_LAMBDA
    }
}

/// Row of the condensed tree: `child` is a point (`< n`) or a cluster (`>= n`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct CondensedRow {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

struct SingleLinkage {
    // node n + k merges children[k]
    children: Vec<(usize, usize)>,
    distance: Vec<f64>,
    size: Vec<usize>,
}

fn single_linkage(mst: &[MstEdge], n: usize) -> SingleLinkage {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut sizes = vec![1usize; 2 * n];
    let mut children = Vec::with_capacity(n.saturating_sub(1));
    let mut distance = Vec::with_capacity(n.saturating_sub(1));
    let mut node_size = Vec::with_capacity(n.saturating_sub(1));
    for (k, e) in mst.iter().enumerate() {
        let ra = find(&mut parent, e.a);
        let rb = find(&mut parent, e.b);
        let new = n + k;
        parent[ra] = new;
        parent[rb] = new;
        sizes[new] = sizes[ra] + sizes[rb];
        children.push((ra, rb));
        distance.push(e.weight);
        node_size.push(sizes[new]);
    }
    SingleLinkage {
        children,
        distance,
        size: node_size,
    }
}

fn condense(slt: &SingleLinkage, n: usize, min_cluster_size: usize) -> Vec<CondensedRow> {
    let root = 2 * n - 2;
    let size_of = |node: usize| if node < n { 1 } else { slt.size[node - n] };
    let leaves_under = |node: usize| -> Vec<usize> {
        let mut stack = vec![node];
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let (l, r) = slt.children[x - n];
                stack.push(r);
                stack.push(l);
            }
        }
        out
    };
    let mut rows = Vec::new();
    let mut next_label = n + 1;
    // (single-linkage node, condensed cluster label)
    let mut queue = std::collections::VecDeque::from([(root, n)]);
    while let Some((node, label)) = queue.pop_front() {
        if node < n {
            continue;
        }
        let (left, right) = slt.children[node - n];
        let lambda = lambda_of(slt.distance[node - n]);
        let (ls, rs) = (size_of(left), size_of(right));
        match (ls >= min_cluster_size, rs >= min_cluster_size) {
            (true, true) => {
                for (child, sz) in [(left, ls), (right, rs)] {
                    rows.push(CondensedRow {
                        parent: label,
                        child: next_label,
                        lambda,
                        size: sz,
                    });
                    queue.push_back((child, next_label));
                    next_label += 1;
                }
            }
            (false, false) => {
                for child in [left, right] {
                    for p in leaves_under(child) {
                        rows.push(CondensedRow {
                            parent: label,
                            child: p,
                            lambda,
                            size: 1,
                        });
                    }
                }
            }
            (true, false) | (false, true) => {
                let (keep, drop) = if ls >= min_cluster_size {
                    (left, right)
                } else {
                    (right, left)
                };
                for p in leaves_under(drop) {
                    rows.push(CondensedRow {
                        parent: label,
                        child: p,
                        lambda,
                        size: 1,
                    });
                }
                queue.push_back((keep, label));
            }
        }
    }
    rows
}

/// Flat clustering from a spanning tree over `mst.len() + 1` points.
///
/// Clusters are the most stable non-overlapping nodes of the condensed
/// hierarchy, where the stability of a cluster is the sum over its points of
/// `lambda_point - lambda_birth` with `lambda = 1 / distance`. The root is a
/// candidate only when it never splits; in that case points that leave it
/// before its final density level are noise.
pub fn extract_clusters(mst: &[MstEdge], cfg: &ClusterConfig) -> ClusterAssignment {
    let n = mst.len() + 1;
    if n < cfg.min_cluster_size || n < 2 {
        return ClusterAssignment {
            labels: vec![-1; n],
            num_clusters: 0,
        };
    }
    let mut sorted = mst.to_vec();
    sorted.sort_by(|x, y| x.weight.total_cmp(&y.weight).then((x.a, x.b).cmp(&(y.a, y.b))));
    let slt = single_linkage(&sorted, n);
    let rows = condense(&slt, n, cfg.min_cluster_size);

    let root = n;
    let max_label = rows.iter().map(|r| r.child.max(r.parent)).max().unwrap_or(root);
    let n_clusters_total = max_label + 1 - root;
    let idx = |c: usize| c - root;

    let mut birth = vec![0.0; n_clusters_total];
    let mut parent_of = vec![None; n_clusters_total];
    let mut child_clusters: Vec<Vec<usize>> = vec![Vec::new(); n_clusters_total];
    for r in &rows {
        if r.child >= n {
            birth[idx(r.child)] = r.lambda;
            parent_of[idx(r.child)] = Some(r.parent);
            child_clusters[idx(r.parent)].push(r.child);
        }
    }
    let mut stability = vec![0.0; n_clusters_total];
    for r in &rows {
        stability[idx(r.parent)] += (r.lambda - birth[idx(r.parent)]) * r.size as f64;
    }

    let root_splits = !child_clusters[0].is_empty();
    let mut selected = vec![false; n_clusters_total];
    if root_splits {
        // Excess of mass, leaves first (children always have larger labels).
        let mut subtree = stability.clone();
        for c in (1..n_clusters_total).rev() {
            let kids: f64 = child_clusters[c].iter().map(|&k| subtree[idx(k)]).sum();
            if child_clusters[c].is_empty() || stability[c] >= kids {
                selected[c] = true;
                subtree[c] = stability[c];
            } else {
                subtree[c] = kids;
            }
        }
        // Keep only the topmost selected node on every root-to-leaf path.
        for c in 1..n_clusters_total {
            let mut p = parent_of[c];
            while let Some(pl) = p {
                if pl == root {
                    break;
                }
                if selected[idx(pl)] {
                    selected[c] = false;
                    break;
                }
                p = parent_of[idx(pl)];
            }
        }
    } else {
        selected[0] = true;
    }

    let mut cluster_ids = vec![-1i64; n_clusters_total];
    let mut next = 0i64;
    for c in 0..n_clusters_total {
        if selected[c] {
            cluster_ids[c] = next;
            next += 1;
        }
    }

    let root_final_lambda = rows
        .iter()
        .filter(|r| r.parent == root)
        .map(|r| r.lambda)
        .fold(0.0, f64::max);
    let mut labels = vec![-1i64; n];
    for r in rows.iter().filter(|r| r.child < n) {
        if r.parent == root {
            if selected[0] && r.lambda >= root_final_lambda {
                labels[r.child] = cluster_ids[0];
            }
            continue;
        }
        let mut c = Some(r.parent);
        while let Some(cl) = c {
            if cl == root {
                break;
            }
            if selected[idx(cl)] {
                labels[r.child] = cluster_ids[idx(cl)];
                break;
            }
            c = parent_of[idx(cl)];
        }
    }
    ClusterAssignment {
        labels,
        num_clusters: next as usize,
    }
}

fn centroids(features: ArrayView2<'_, f64>, assignment: &ClusterAssignment) -> Array2<f64> {
    let mut c = Array2::zeros((assignment.num_clusters, features.ncols()));
    let mut counts = vec![0usize; assignment.num_clusters];
    for (i, &l) in assignment.labels.iter().enumerate() {
        if l >= 0 {
            let mut row = c.row_mut(l as usize);
            row += &features.row(i);
            counts[l as usize] += 1;
        }
    }
    for (k, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            c.row_mut(k).mapv_inplace(|v| v / cnt as f64);
        }
    }
    c
}

/// Full clustering with total coverage: noise points join the cluster with
/// the nearest (Euclidean) centroid. Fewer samples than `min_cluster_size`,
/// or a hierarchy with no cluster at all, yields a single cluster.
pub fn cluster(features: ArrayView2<'_, f64>, cfg: &ClusterConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let s = features.nrows();
    if s < cfg.min_cluster_size || s < 2 {
        return Ok(ClusterAssignment::single(s));
    }
    let k = cfg.min_samples.min(s - 1);
    let dist = pairwise_distances(features);
    let core = core_distances_from(&dist, k)?;
    let mr = mutual_reachability_from(&dist, &core);
    let mst = minimum_spanning_tree(&mr);
    let mut assignment = extract_clusters(&mst, cfg);
    if assignment.num_clusters == 0 {
        return Ok(ClusterAssignment::single(s));
    }
    let cents = centroids(features, &assignment);
    for i in 0..s {
        if assignment.labels[i] >= 0 {
            continue;
        }
        let x = features.row(i);
        let nearest = (0..assignment.num_clusters)
            .map(|c| {
                let d: f64 = x.iter().zip(cents.row(c)).map(|(a, b)| (a - b) * (a - b)).sum();
                (c, d)
            })
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
            .0;
        assignment.labels[i] = nearest as i64;
    }
    Ok(assignment)
}
