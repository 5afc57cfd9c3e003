//! DOT and JSON serialisation. Output depends only on vertex order and the
//! edge relation, so identical inputs give byte-identical text.

use serde::{Deserialize, Serialize};

use super::{Digraph, SimpleGraph};
use crate::error::GraphError;

/// JSON graph document `{"vertices": [...], "edges": [[u, v], ...], "directed": bool}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub directed: bool,
}

impl GraphDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("graph document serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))
    }

    fn endpoints(&self) -> Result<Vec<(usize, usize)>, GraphError> {
        let index: std::collections::HashMap<&str, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        self.edges
            .iter()
            .map(|[a, b]| {
                let a = *index.get(a.as_str()).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
                let b = *index.get(b.as_str()).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
                Ok((a, b))
            })
            .collect()
    }

    pub fn to_simple(&self) -> Result<SimpleGraph, GraphError> {
        if self.directed {
            return Err(GraphError::Parse("document is directed".into()));
        }
        SimpleGraph::new(self.vertices.clone(), self.endpoints()?)
    }

    pub fn to_digraph(&self) -> Result<Digraph, GraphError> {
        if !self.directed {
            return Err(GraphError::Parse("document is undirected".into()));
        }
        Digraph::new(self.vertices.clone(), self.endpoints()?)
    }
}

fn quote(label: &str) -> String {
    let mut s = String::with_capacity(label.len() + 2);
    s.push('"');
    for c in label.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

fn dot(kind: &str, name: &str, arrow: &str, labels: &[String], edges: impl Iterator<Item = (usize, usize)>) -> String {
    let mut out = format!("{kind} {} {{\n", quote(name));
    for l in labels {
        out.push_str(&format!("  {};\n", quote(l)));
    }
    for (i, j) in edges {
        out.push_str(&format!("  {} {arrow} {};\n", quote(&labels[i]), quote(&labels[j])));
    }
    out.push_str("}\n");
    out
}

impl SimpleGraph {
    pub fn to_dot(&self, name: &str) -> String {
        dot("graph", name, "--", self.labels(), self.edges())
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.labels().to_vec(),
            edges: self.edges().map(|(i, j)| [self.label(i).to_string(), self.label(j).to_string()]).collect(),
            directed: false,
        }
    }
}

impl Digraph {
    pub fn to_dot(&self, name: &str) -> String {
        dot("digraph", name, "->", self.labels(), self.arcs())
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.labels().to_vec(),
            edges: self.arcs().map(|(i, j)| [self.label(i).to_string(), self.label(j).to_string()]).collect(),
            directed: true,
        }
    }
}
