//! The performance interaction graph: nodes are samples, undirected edges are
//! inferred similarity relations, and each edge carries a weight (the sparse
//! adjacency matrix restricted to existing edges).

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PingGraph {
    node_features: Array2<f64>,
    node_targets: Array1<f64>,
    node_global_ids: Vec<usize>,
    edges: Vec<(usize, usize)>,
    initial_edge_weights: Vec<f64>,
}

impl PingGraph {
    /// Builds a graph from an arbitrary undirected edge set. Pairs are
    /// canonicalized to `(min, max)`, sorted and deduplicated; every weight is 1.
    /// Self-loops are rejected.
    pub fn new(
        node_features: Array2<f64>,
        node_targets: Array1<f64>,
        node_global_ids: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = edges.into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
        canon.sort_unstable();
        canon.dedup();
        let weights = vec![1.0; canon.len()];
        let g = Self::from_raw_parts(node_features, node_targets, node_global_ids, canon, weights)?;
        let report = g.validate();
        if !report.is_valid() {
            return Err(Error::InvalidGraph(report.to_string()));
        }
        Ok(g)
    }

    /// Graph with no edges over the given nodes.
    pub fn edgeless(
        node_features: Array2<f64>,
        node_targets: Array1<f64>,
        node_global_ids: Vec<usize>,
    ) -> Result<Self> {
        Self::new(node_features, node_targets, node_global_ids, std::iter::empty())
    }

    /// Assembles a graph without canonicalizing or validating edges. Only
    /// dimension agreement is checked; use [`PingGraph::validate`] afterward.
    pub fn from_raw_parts(
        node_features: Array2<f64>,
        node_targets: Array1<f64>,
        node_global_ids: Vec<usize>,
        edges: Vec<(usize, usize)>,
        initial_edge_weights: Vec<f64>,
    ) -> Result<Self> {
        let n = node_features.nrows();
        if node_targets.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: node_targets.len(),
            });
        }
        if node_global_ids.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: node_global_ids.len(),
            });
        }
        if edges.len() != initial_edge_weights.len() {
            return Err(Error::LengthMismatch {
                left: edges.len(),
                right: initial_edge_weights.len(),
            });
        }
        Ok(Self {
            node_features,
            node_targets,
            node_global_ids,
            edges,
            initial_edge_weights,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.node_features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.node_features.ncols()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_features(&self) -> ArrayView2<'_, f64> {
        self.node_features.view()
    }

    pub fn node_targets(&self) -> &Array1<f64> {
        &self.node_targets
    }

    pub fn node_global_ids(&self) -> &[usize] {
        &self.node_global_ids
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn initial_edge_weights(&self) -> &[f64] {
        &self.initial_edge_weights
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        if v >= self.n_nodes() {
            return Err(Error::IndexOutOfRange {
                index: v,
                len: self.n_nodes(),
            });
        }
        Ok(self.edges.iter().filter(|&&(i, j)| i == v || j == v).count())
    }

    /// Degrees of all nodes in one pass.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes()];
        for &(i, j) in &self.edges {
            if i < deg.len() {
                deg[i] += 1;
            }
            if j < deg.len() && j != i {
                deg[j] += 1;
            }
        }
        deg
    }

    /// Copy of this graph with `targets` replacing the node targets.
    pub fn with_targets(&self, targets: Array1<f64>) -> Result<Self> {
        if targets.len() != self.n_nodes() {
            return Err(Error::LengthMismatch {
                left: self.n_nodes(),
                right: targets.len(),
            });
        }
        let mut g = self.clone();
        g.node_targets = targets;
        Ok(g)
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n_nodes();
        let mut report = ValidationReport::default();
        let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            if i >= n || j >= n {
                report.out_of_range_edges.push(k);
                continue;
            }
            if i == j {
                report.self_loops.push(k);
                continue;
            }
            if !seen.insert((i.min(j), i.max(j))) {
                report.duplicate_edges.push(k);
            }
        }
        for (k, &w) in self.initial_edge_weights.iter().enumerate() {
            if w != 1.0 {
                report.non_unit_weights.push(k);
            }
        }
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        for (v, &id) in self.node_global_ids.iter().enumerate() {
            if ids.insert(id, v).is_some() {
                report.duplicate_global_ids.push(v);
            }
        }
        report
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::malformed(&e))?;
        file.into_graph()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Per-invariant outcome of [`PingGraph::validate`]; each list holds offending
/// edge indices (or node indices for global ids).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub self_loops: Vec<usize>,
    pub duplicate_edges: Vec<usize>,
    pub out_of_range_edges: Vec<usize>,
    pub non_unit_weights: Vec<usize>,
    pub duplicate_global_ids: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.self_loops.is_empty()
            && self.duplicate_edges.is_empty()
            && self.out_of_range_edges.is_empty()
            && self.non_unit_weights.is_empty()
            && self.duplicate_global_ids.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let checks = [
            ("no self-loops", &self.self_loops),
            ("no duplicate edges", &self.duplicate_edges),
            ("edge endpoints in range", &self.out_of_range_edges),
            ("unit initial weights", &self.non_unit_weights),
            ("distinct global ids", &self.duplicate_global_ids),
        ];
        for (name, bad) in checks {
            if bad.is_empty() {
                writeln!(f, "pass  {name}")?;
            } else {
                writeln!(f, "FAIL  {name}: {bad:?}")?;
            }
        }
        Ok(())
    }
}

/// A batch of graphs from batched construction, with the map from dataset
/// row to `(graph index, local node index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBatch {
    graphs: Vec<PingGraph>,
    sample_to_graph: Vec<(usize, usize)>,
}

impl GraphBatch {
    /// Checks every sample in `0..n_samples` appears exactly once and no graph
    /// has fewer than two nodes.
    pub fn new(graphs: Vec<PingGraph>, n_samples: usize) -> Result<Self> {
        let mut map = vec![None; n_samples];
        for (gi, g) in graphs.iter().enumerate() {
            if g.n_nodes() < 2 {
                return Err(Error::InvalidGraph(format!("graph {gi} has {} node(s)", g.n_nodes())));
            }
            for (local, &gid) in g.node_global_ids().iter().enumerate() {
                let slot = map.get_mut(gid).ok_or(Error::IndexOutOfRange {
                    index: gid,
                    len: n_samples,
                })?;
                if slot.is_some() {
                    return Err(Error::InvalidGraph(format!(
                        "sample {gid} appears in more than one graph"
                    )));
                }
                *slot = Some((gi, local));
            }
        }
        let sample_to_graph = map
            .into_iter()
            .enumerate()
            .map(|(s, slot)| slot.ok_or_else(|| Error::InvalidGraph(format!("sample {s} is in no graph"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            graphs,
            sample_to_graph,
        })
    }

    pub fn graphs(&self) -> &[PingGraph] {
        &self.graphs
    }

    pub fn sample_to_graph(&self) -> &[(usize, usize)] {
        &self.sample_to_graph
    }

    pub fn n_samples(&self) -> usize {
        self.sample_to_graph.len()
    }

    pub fn n_edges(&self) -> usize {
        self.graphs.iter().map(PingGraph::n_edges).sum()
    }

    pub fn to_json(&self) -> String {
        let file = BatchFile {
            format: BATCH_FORMAT.into(),
            version: FORMAT_VERSION,
            n_samples: self.n_samples(),
            graphs: self.graphs.iter().map(GraphFile::from).collect(),
        };
        serde_json::to_string(&file).expect("batch serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BatchFile = serde_json::from_str(text).map_err(|e| Error::malformed(&e))?;
        check_header(&file.format, BATCH_FORMAT, file.version)?;
        let graphs = file
            .graphs
            .into_iter()
            .map(GraphFile::into_graph)
            .collect::<Result<Vec<_>>>()?;
        Self::new(graphs, file.n_samples)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub const GRAPH_FORMAT: &str = "ping-graph";
pub const BATCH_FORMAT: &str = "ping-graph-batch";
pub const FORMAT_VERSION: u32 = 1;

// On-disk layout. Field names are part of the stable file format.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    format: String,
    version: u32,
    n_features: usize,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    global_id: usize,
    features: Vec<f64>,
    target: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    i: usize,
    j: usize,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchFile {
    format: String,
    version: u32,
    n_samples: usize,
    graphs: Vec<GraphFile>,
}

fn check_header(format: &str, expected: &str, version: u32) -> Result<()> {
    if format != expected {
        return Err(Error::MalformedFile {
            line: 1,
            column: 1,
            message: format!("format field is `{format}`, expected `{expected}`"),
        });
    }
    if version != FORMAT_VERSION {
        return Err(Error::MalformedFile {
            line: 1,
            column: 1,
            message: format!("unsupported version {version}"),
        });
    }
    Ok(())
}

impl From<&PingGraph> for GraphFile {
    fn from(g: &PingGraph) -> Self {
        let nodes = (0..g.n_nodes())
            .map(|v| NodeRecord {
                id: v,
                global_id: g.node_global_ids[v],
                features: g.node_features.row(v).to_vec(),
                target: g.node_targets[v],
            })
            .collect();
        let edges = g
            .edges
            .iter()
            .zip(&g.initial_edge_weights)
            .map(|(&(i, j), &weight)| EdgeRecord { i, j, weight })
            .collect();
        GraphFile {
            format: GRAPH_FORMAT.into(),
            version: FORMAT_VERSION,
            n_features: g.n_features(),
            nodes,
            edges,
        }
    }
}

impl GraphFile {
    fn into_graph(self) -> Result<PingGraph> {
        check_header(&self.format, GRAPH_FORMAT, self.version)?;
        let n = self.nodes.len();
        let f = self.n_features;
        let bad = |message: String| Error::MalformedFile {
            line: 1,
            column: 1,
            message,
        };
        let mut features = Vec::with_capacity(n * f);
        let mut targets = Vec::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        for (v, node) in self.nodes.into_iter().enumerate() {
            if node.id != v {
                return Err(bad(format!("node {v} has id {}", node.id)));
            }
            if node.features.len() != f {
                return Err(bad(format!(
                    "node {v} has {} features, expected {f}",
                    node.features.len()
                )));
            }
            features.extend(node.features);
            targets.push(node.target);
            ids.push(node.global_id);
        }
        let (edges, weights) = self.edges.into_iter().map(|e| ((e.i, e.j), e.weight)).unzip();
        let g = PingGraph::from_raw_parts(
            Array2::from_shape_vec((n, f), features).expect("sizes checked"),
            Array1::from(targets),
            ids,
            edges,
            weights,
        )?;
        let report = g.validate();
        if !report.is_valid() {
            return Err(bad(format!("graph violates invariants:\n{report}")));
        }
        Ok(g)
    }
}
