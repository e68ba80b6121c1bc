//! Finite non-compact metric graphs with δ-type vertex couplings.
//!
//! Vertices are kept sorted by id and that order is the matrix index order
//! used everywhere else in the crate. Edges are kept sorted by id.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub coupling: Complex64,
}

/// A compact edge. `from == to` is a loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    pub fn touches(&self, v: &str) -> bool {
        self.from == v || self.to == v
    }

    /// The endpoint opposite to `v` (itself for a loop).
    pub fn other(&self, v: &str) -> &str {
        if self.from == v {
            &self.to
        } else {
            &self.from
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    leads: Vec<String>,
}

impl MetricGraph {
    /// Build a graph, sorting vertices, edges and leads by id.
    ///
    /// Only dangling references are rejected here; every other standing
    /// assumption is reported by [`MetricGraph::validate`].
    pub fn new(
        mut vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        mut leads: Vec<String>,
    ) -> Result<Self> {
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        leads.sort();
        let known: BTreeSet<&str> = vertices.iter().map(|v| v.id.as_str()).collect();
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !known.contains(end.as_str()) {
                    return Err(Error::UnknownVertex(end.clone()));
                }
            }
        }
        for l in &leads {
            if !known.contains(l.as_str()) {
                return Err(Error::UnknownVertex(l.clone()));
            }
        }
        Ok(Self {
            vertices,
            edges,
            leads,
        })
    }

    /// [`MetricGraph::new`] followed by [`MetricGraph::validate`], failing on
    /// any violation.
    pub fn checked(vertices: Vec<Vertex>, edges: Vec<Edge>, leads: Vec<String>) -> Result<Self> {
        let g = Self::new(vertices, edges, leads)?;
        g.validate().into_result()?;
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Lead vertex ids, sorted.
    pub fn leads(&self) -> &[String] {
        &self.leads
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn lead_count(&self) -> usize {
        self.leads.len()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.vertices
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .map_err(|_| Error::UnknownVertex(id.to_string()))
    }

    pub fn vertex(&self, id: &str) -> Result<&Vertex> {
        Ok(&self.vertices[self.index_of(id)?])
    }

    pub fn edge(&self, id: &str) -> Result<&Edge> {
        self.edges
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .map(|i| &self.edges[i])
            .map_err(|_| Error::UnknownEdge(id.to_string()))
    }

    pub fn is_external(&self, id: &str) -> bool {
        self.leads.iter().any(|l| l == id)
    }

    /// Matrix indices of the external vertices, ascending.
    pub fn external_indices(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| self.is_external(&v.id))
            .map(|(i, _)| i)
            .collect()
    }

    /// Ids of the external vertices in matrix order.
    pub fn external_ids(&self) -> Vec<String> {
        self.external_indices()
            .into_iter()
            .map(|i| self.vertices[i].id.clone())
            .collect()
    }

    pub fn couplings(&self) -> Vec<Complex64> {
        self.vertices.iter().map(|v| v.coupling).collect()
    }

    /// Same topology and lengths with new couplings (vertex order).
    pub fn with_couplings(&self, couplings: &[Complex64]) -> Result<Self> {
        if couplings.len() != self.vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coupling constants, got {}",
                self.vertices.len(),
                couplings.len()
            )));
        }
        let mut g = self.clone();
        for (v, &a) in g.vertices.iter_mut().zip(couplings) {
            v.coupling = a;
        }
        Ok(g)
    }

    /// Same graph with the listed edges scaled by `factor`.
    pub fn with_scaled_edges(&self, edge_ids: &[String], factor: f64) -> Result<Self> {
        let mut g = self.clone();
        for id in edge_ids {
            let i = g
                .edges
                .binary_search_by(|e| e.id.as_str().cmp(id))
                .map_err(|_| Error::UnknownEdge(id.clone()))?;
            g.edges[i].length *= factor;
        }
        Ok(g)
    }

    /// Degree in the compact part: non-loop incident edges count once,
    /// loops twice. Leads are not counted.
    pub fn compact_degree(&self, id: &str) -> usize {
        self.edges
            .iter()
            .map(|e| {
                if e.is_loop() && e.from == id {
                    2
                } else if e.touches(id) {
                    1
                } else {
                    0
                }
            })
            .sum()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// A standing-assumption violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyGraph,
    DuplicateVertex(String),
    DuplicateEdge(String),
    NonPositiveLength { edge: String, length: f64 },
    NonFiniteCoupling(String),
    MultipleLeads(String),
    Disconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no vertices"),
            Violation::DuplicateVertex(id) => write!(f, "duplicate vertex id `{id}`"),
            Violation::DuplicateEdge(id) => write!(f, "duplicate edge id `{id}`"),
            Violation::NonPositiveLength { edge, length } => {
                write!(f, "non-positive length {length} on edge `{edge}`")
            }
            Violation::NonFiniteCoupling(id) => write!(f, "non-finite coupling at vertex `{id}`"),
            Violation::MultipleLeads(id) => write!(f, "multiple leads at vertex `{id}`"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidGraph(msg.join("; ")))
        }
    }
}

/// Pairs of edge lengths whose ratio is within `1e-9` of `p/q`, `q ≤ 16`.
fn commensurable_pairs(edges: &[Edge]) -> Vec<(String, String, u32, u32)> {
    let mut out = Vec::new();
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            if !(a.length > 0.0 && b.length > 0.0) || !a.length.is_finite() || !b.length.is_finite()
            {
                continue;
            }
            let r = a.length / b.length;
            for q in 1..=16u32 {
                let p = (r * q as f64).round();
                if p >= 1.0 && (r - p / q as f64).abs() < 1e-9 {
                    out.push((a.id.clone(), b.id.clone(), p as u32, q));
                    break;
                }
            }
        }
    }
    out
}

pub fn validate(graph: &MetricGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    if graph.vertices.is_empty() {
        report.violations.push(Violation::EmptyGraph);
        return report;
    }
    for w in graph.vertices.windows(2) {
        if w[0].id == w[1].id {
            report
                .violations
                .push(Violation::DuplicateVertex(w[0].id.clone()));
        }
    }
    for w in graph.edges.windows(2) {
        if w[0].id == w[1].id {
            report
                .violations
                .push(Violation::DuplicateEdge(w[0].id.clone()));
        }
    }
    for e in &graph.edges {
        if !(e.length > 0.0) || !e.length.is_finite() {
            report.violations.push(Violation::NonPositiveLength {
                edge: e.id.clone(),
                length: e.length,
            });
        }
    }
    for v in &graph.vertices {
        if !v.coupling.re.is_finite() || !v.coupling.im.is_finite() {
            report
                .violations
                .push(Violation::NonFiniteCoupling(v.id.clone()));
        }
    }
    for w in graph.leads.windows(2) {
        if w[0] == w[1]
            && !report
                .violations
                .contains(&Violation::MultipleLeads(w[0].clone()))
        {
            report
                .violations
                .push(Violation::MultipleLeads(w[0].clone()));
        }
    }
    if reachable_from(graph, &graph.vertices[0].id).len() != distinct_ids(graph) {
        report.violations.push(Violation::Disconnected);
    }
    for (a, b, p, q) in commensurable_pairs(&graph.edges) {
        report.warnings.push(format!(
            "lengths of `{a}` and `{b}` are rationally dependent (ratio ≈ {p}/{q})"
        ));
    }
    report
}

fn distinct_ids(graph: &MetricGraph) -> usize {
    graph
        .vertices
        .iter()
        .map(|v| v.id.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

fn reachable_from<'a>(graph: &'a MetricGraph, root: &'a str) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for e in graph.edges.iter().filter(|e| e.touches(v)) {
            let w = e.other(v);
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Id of the vertex produced by contracting an edge `V–W`.
pub fn merged_id(from: &str, to: &str) -> String {
    format!("({from}|{to})")
}

/// Glue the endpoints of a non-loop edge into one vertex.
///
/// The edge disappears, other edges between the same endpoints become loops
/// at the merged vertex and the merged coupling is the sum of the two.
pub fn contract(graph: &MetricGraph, edge_id: &str) -> Result<MetricGraph> {
    let edge = graph.edge(edge_id)?;
    if edge.is_loop() {
        return Err(Error::LoopContraction(edge_id.to_string()));
    }
    let (v, w) = (edge.from.as_str(), edge.to.as_str());
    let merged = merged_id(v, w);
    let rename = |id: &str| -> String {
        if id == v || id == w {
            merged.clone()
        } else {
            id.to_string()
        }
    };
    let coupling = graph.vertex(v)?.coupling + graph.vertex(w)?.coupling;
    let mut vertices: Vec<Vertex> = graph
        .vertices
        .iter()
        .filter(|x| x.id != v && x.id != w)
        .cloned()
        .collect();
    vertices.push(Vertex {
        id: merged.clone(),
        coupling,
    });
    let edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| e.id != edge_id)
        .map(|e| Edge {
            id: e.id.clone(),
            from: rename(&e.from),
            to: rename(&e.to),
            length: e.length,
        })
        .collect();
    let mut leads: Vec<String> = graph.leads.iter().map(|l| rename(l)).collect();
    leads.sort();
    leads.dedup();
    MetricGraph::new(vertices, edges, leads)
}

/// Tree path from the root to one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTreePath {
    pub root: String,
    pub target: String,
    /// Lengths of the tree edges from the root outwards.
    pub ordered_edge_lengths: Vec<f64>,
    pub edge_ids: Vec<String>,
    pub vertex_count: usize,
    pub vertices_on_path: Vec<String>,
}

/// Breadth-first spanning tree from `root`; incident edges are explored in
/// ascending (length, id) order. One path per vertex, sorted by vertex count
/// (ties keep discovery order).
pub fn spanning_tree(graph: &MetricGraph, root: &str) -> Result<Vec<SpanningTreePath>> {
    graph.index_of(root)?;
    let mut parent: HashMap<&str, (&str, &Edge)> = HashMap::new();
    let mut order = vec![root];
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let mut incident: Vec<&Edge> = graph
            .edges
            .iter()
            .filter(|e| !e.is_loop() && e.touches(v))
            .collect();
        incident.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.id.cmp(&b.id)));
        for e in incident {
            let w = e.other(v);
            if seen.insert(w) {
                parent.insert(w, (v, e));
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    if order.len() != distinct_ids(graph) {
        return Err(Error::Disconnected);
    }
    let mut paths: Vec<SpanningTreePath> = order
        .iter()
        .map(|&target| {
            let mut verts = vec![target.to_string()];
            let mut edges = Vec::new();
            let mut cur = target;
            while let Some(&(p, e)) = parent.get(cur) {
                verts.push(p.to_string());
                edges.push(e);
                cur = p;
            }
            verts.reverse();
            edges.reverse();
            SpanningTreePath {
                root: root.to_string(),
                target: target.to_string(),
                ordered_edge_lengths: edges.iter().map(|e| e.length).collect(),
                edge_ids: edges.iter().map(|e| e.id.clone()).collect(),
                vertex_count: verts.len(),
                vertices_on_path: verts,
            }
        })
        .collect();
    paths.sort_by_key(|p| p.vertex_count);
    Ok(paths)
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: String,
    #[serde(default)]
    coupling: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    from: String,
    to: String,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    leads: Vec<String>,
}

/// Parse the JSON graph format. Edges without an id are named `e1`, `e2`, …
/// in file order. Couplings default to zero.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let rec: GraphRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let vertices = rec
        .vertices
        .into_iter()
        .map(|v| Vertex {
            id: v.id,
            coupling: Complex64::new(v.coupling[0], v.coupling[1]),
        })
        .collect();
    let edges = rec
        .edges
        .into_iter()
        .enumerate()
        .map(|(i, e)| Edge {
            id: e.id.unwrap_or_else(|| format!("e{}", i + 1)),
            from: e.from,
            to: e.to,
            length: e.length,
        })
        .collect();
    MetricGraph::new(vertices, edges, rec.leads)
}

/// Canonical pretty-printed JSON (sorted vertices, edges and leads).
pub fn serialize_graph(graph: &MetricGraph) -> String {
    let rec = GraphRecord {
        vertices: graph
            .vertices
            .iter()
            .map(|v| VertexRecord {
                id: v.id.clone(),
                coupling: [v.coupling.re, v.coupling.im],
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| EdgeRecord {
                id: Some(e.id.clone()),
                from: e.from.clone(),
                to: e.to.clone(),
                length: e.length,
            })
            .collect(),
        leads: graph.leads.clone(),
    };
    let mut s = serde_json::to_string_pretty(&rec).expect("graph records always serialise");
    s.push('\n');
    s
}

/// Convenience constructor used by tests and the graph catalogue:
/// `vertices` are `(id, coupling)`, `edges` are `(from, to, length)` and get
/// ids `e1`, `e2`, ….
pub fn build(
    vertices: &[(&str, f64)],
    edges: &[(&str, &str, f64)],
    leads: &[&str],
) -> Result<MetricGraph> {
    MetricGraph::new(
        vertices
            .iter()
            .map(|&(id, a)| Vertex {
                id: id.to_string(),
                coupling: Complex64::new(a, 0.0),
            })
            .collect(),
        edges
            .iter()
            .enumerate()
            .map(|(i, &(f, t, l))| Edge {
                id: format!("e{}", i + 1),
                from: f.to_string(),
                to: t.to_string(),
                length: l,
            })
            .collect(),
        leads.iter().map(|s| s.to_string()).collect(),
    )
}
