//! JSON graph files.
//!
//! ```json
//! {"vertices": [{"id": "a", "theta": 1.0}],
//!  "edges": [{"u": "a", "v": "b", "w": 0.5}],
//!  "frontier": ["b"]}
//! ```
//!
//! `frontier` is optional; it lists the vertices of a window whose
//! neighbourhood in the underlying infinite graph is incomplete.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use graphheat_core::graph::{GraphBuilder, GraphError};
use graphheat_core::WeightedGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frontier: Vec<String>,
}

impl GraphFile {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let vertices = (0..g.vertex_count())
            .map(|v| VertexRecord { id: g.label(v).to_string(), theta: g.theta(v) })
            .collect();
        let mut edges = Vec::with_capacity(g.edge_count());
        for u in 0..g.vertex_count() {
            for (v, w) in g.neighbors(u) {
                if u < v {
                    edges.push(EdgeRecord { u: g.label(u).to_string(), v: g.label(v).to_string(), w });
                }
            }
        }
        let frontier = g.frontier().map(|v| g.label(v).to_string()).collect();
        GraphFile { vertices, edges, frontier }
    }

    pub fn to_graph(&self) -> Result<WeightedGraph, GraphError> {
        let mut b = GraphBuilder::new();
        let mut index = HashMap::with_capacity(self.vertices.len());
        for rec in &self.vertices {
            if index.contains_key(rec.id.as_str()) {
                return Err(GraphError::DuplicateVertex(rec.id.clone()));
            }
            index.insert(rec.id.as_str(), b.add_vertex(rec.id.clone(), rec.theta));
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| GraphError::UnknownVertex(s.to_string()));
        for e in &self.edges {
            b.add_edge(lookup(&e.u)?, lookup(&e.v)?, e.w);
        }
        for f in &self.frontier {
            b.mark_frontier(lookup(f)?);
        }
        b.build()
    }
}

pub fn parse_graph(json: &str) -> Result<WeightedGraph, IoError> {
    let file: GraphFile = serde_json::from_str(json)?;
    Ok(file.to_graph()?)
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    let mut s = serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph records serialize");
    s.push('\n');
    s
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<WeightedGraph, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })?;
    parse_graph(&text)
}

pub fn write_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, graph_to_json(g)).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}
