//! Finite simple graphs and digraphs with string-labelled vertices.
//!
//! Vertices are stored by index in insertion order; every operation keeps
//! that order stable so exports and isomorphism search are deterministic.

use std::collections::{HashMap, VecDeque};

use crate::error::GraphError;

mod export;
mod iso;

pub use export::GraphDocument;
pub use iso::{find_anti_isomorphism, find_isomorphism, is_anti_isomorphism, is_isomorphism, Adjacency};

/// Dense bit matrix, one row per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix { words, data: vec![0; words * n] }
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }
}

fn label_index(labels: &[String]) -> Result<HashMap<String, usize>, GraphError> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(GraphError::DuplicateVertex(l.clone()));
        }
    }
    Ok(index)
}

/// Undirected simple graph.
#[derive(Clone, Debug)]
pub struct SimpleGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    matrix: BitMatrix,
}

impl PartialEq for SimpleGraph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.adj == other.adj
    }
}

impl Eq for SimpleGraph {}

impl SimpleGraph {
    pub fn new(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let index = label_index(&labels)?;
        let n = labels.len();
        let mut matrix = BitMatrix::new(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(GraphError::UnknownVertex(format!("#{}", i.max(j))));
            }
            if i == j {
                return Err(GraphError::SelfLoop(labels[i].clone()));
            }
            matrix.set(i, j);
            matrix.set(j, i);
        }
        let adj = (0..n).map(|i| (0..n).filter(|&j| matrix.get(i, j)).collect()).collect();
        Ok(SimpleGraph { labels, index, adj, matrix })
    }

    /// Graph on `labels` with `i ~ j` iff `adjacent(i, j)`, queried for `i < j`.
    pub fn from_fn(labels: Vec<String>, mut adjacent: impl FnMut(usize, usize) -> bool) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if adjacent(i, j) {
                    edges.push((i, j));
                }
            }
        }
        SimpleGraph::new(labels, edges)
    }

    pub fn from_labeled_edges(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let index = label_index(&labels)?;
        let lookup = |l: &str| index.get(l).copied().ok_or_else(|| GraphError::UnknownVertex(l.to_string()));
        let edges = edges.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect::<Result<Vec<_>, GraphError>>()?;
        SimpleGraph::new(labels, edges)
    }

    fn numbered(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    pub fn complete(n: usize) -> Self {
        SimpleGraph::from_fn(Self::numbered(n), |_, _| true).unwrap()
    }

    pub fn empty(n: usize) -> Self {
        SimpleGraph::from_fn(Self::numbered(n), |_, _| false).unwrap()
    }

    /// Path on `n` vertices (`P_2` is a single edge).
    pub fn path(n: usize) -> Self {
        SimpleGraph::from_fn(Self::numbered(n), |i, j| j == i + 1).unwrap()
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, GraphError> {
        self.index.get(label).copied().ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.matrix.get(i, j)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Edges `(i, j)` with `i < j`, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.order()).filter(|&i| self.adj[i].is_empty()).collect()
    }

    pub fn complement(&self) -> SimpleGraph {
        SimpleGraph::from_fn(self.labels.clone(), |i, j| !self.has_edge(i, j)).unwrap()
    }

    /// Induced subgraph on `vertices`, in the given order.
    pub fn induced(&self, vertices: &[usize]) -> SimpleGraph {
        let labels = vertices.iter().map(|&v| self.labels[v].clone()).collect();
        SimpleGraph::from_fn(labels, |i, j| self.has_edge(vertices[i], vertices[j]))
            .expect("induced subgraph of a valid graph")
    }

    pub fn induced_by_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<SimpleGraph, GraphError> {
        let idx = labels.iter().map(|l| self.index_of(l.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(self.induced(&idx))
    }

    /// Strong product; vertex `(u, v)` is labelled `u|v`, ordered with the
    /// first factor major.
    pub fn strong_product(&self, other: &SimpleGraph) -> SimpleGraph {
        let (n, m) = (self.order(), other.order());
        let labels = (0..n * m)
            .map(|k| format!("{}|{}", self.labels[k / m], other.labels[k % m]))
            .collect();
        SimpleGraph::from_fn(labels, |p, q| {
            let (x1, y1, x2, y2) = (p / m, p % m, q / m, q % m);
            let (ex, ey) = (x1 == x2, y1 == y2);
            let (ax, ay) = (self.has_edge(x1, x2), other.has_edge(y1, y2));
            (ex && ay) || (ax && ey) || (ax && ay)
        })
        .unwrap()
    }

    /// Connected components, each sorted ascending, ordered by least vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        components(self.order(), |v| self.adj[v].iter().copied())
    }

    /// Vertices adjacent to every other vertex.
    pub fn dominating_vertices(&self) -> Vec<usize> {
        let n = self.order();
        (0..n).filter(|&i| self.degree(i) + 1 == n).collect()
    }

    fn closed_row(&self, i: usize) -> Vec<u64> {
        let mut row = self.matrix.row(i).to_vec();
        row[i / 64] |= 1 << (i % 64);
        row
    }

    pub fn closed_neighborhood(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.adj[i].clone();
        out.push(i);
        out.sort_unstable();
        out
    }

    /// Partition into classes of equal closed neighborhoods.
    pub fn twin_partition(&self) -> TwinPartition {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.order() {
            let row = self.closed_row(i);
            match seen.get(&row) {
                Some(&b) => blocks[b].push(i),
                None => {
                    seen.insert(row, blocks.len());
                    blocks.push(vec![i]);
                }
            }
        }
        TwinPartition::from_blocks(blocks, self.order())
    }

    /// Quotient by a twin partition: one vertex per block, labelled by the
    /// block's first member.
    pub fn quotient_by_twins(&self, partition: &TwinPartition) -> Result<SimpleGraph, GraphError> {
        let actual = self.twin_partition();
        if !actual.same_blocks(partition) {
            return Err(GraphError::PartitionMismatch(format!(
                "expected {} blocks, got {}",
                actual.len(),
                partition.len()
            )));
        }
        self.quotient_by_blocks(partition)
    }

    /// Quotient by a partition whose blocks consist of mutual twins, not
    /// necessarily maximal ones.
    pub fn quotient_by_blocks(&self, partition: &TwinPartition) -> Result<SimpleGraph, GraphError> {
        let blocks = partition.blocks();
        if partition.block_of.len() != self.order() {
            return Err(GraphError::PartitionMismatch("partition covers a different vertex set".into()));
        }
        for b in blocks {
            let row = self.closed_row(b[0]);
            if let Some(&v) = b.iter().find(|&&v| self.closed_row(v) != row) {
                return Err(GraphError::PartitionMismatch(format!(
                    "{} and {} are not twins",
                    self.labels[b[0]], self.labels[v]
                )));
            }
        }
        let labels = blocks.iter().map(|b| self.labels[b[0]].clone()).collect();
        SimpleGraph::from_fn(labels, |a, b| {
            let some = blocks[a].iter().any(|&x| blocks[b].iter().any(|&y| self.has_edge(x, y)));
            let every = blocks[a].iter().all(|&x| blocks[b].iter().all(|&y| self.has_edge(x, y)));
            assert_eq!(some, every, "twin blocks must be homogeneous");
            some
        })
    }
}

pub(crate) fn components<I: Iterator<Item = usize>>(n: usize, neighbors: impl Fn(usize) -> I) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Partition of a vertex set into twin classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwinPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl TwinPartition {
    /// Blocks must be disjoint and cover `0..n`.
    pub fn from_blocks(blocks: Vec<Vec<usize>>, n: usize) -> TwinPartition {
        let mut block_of = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            for &v in members {
                assert_eq!(block_of[v], usize::MAX, "vertex {v} in two blocks");
                block_of[v] = b;
            }
        }
        assert!(block_of.iter().all(|&b| b != usize::MAX), "blocks do not cover the vertex set");
        TwinPartition { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    /// Block sizes, descending.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Equal as set partitions, ignoring block and member order.
    pub fn same_blocks(&self, other: &TwinPartition) -> bool {
        let norm = |p: &TwinPartition| {
            let mut bs: Vec<Vec<usize>> = p
                .blocks
                .iter()
                .map(|b| {
                    let mut b = b.clone();
                    b.sort_unstable();
                    b
                })
                .collect();
            bs.sort();
            bs
        };
        norm(self) == norm(other)
    }
}

/// Directed graph with an irreflexive arc relation.
#[derive(Clone, Debug)]
pub struct Digraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    matrix: BitMatrix,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.out == other.out
    }
}

impl Eq for Digraph {}

impl Digraph {
    pub fn new(labels: Vec<String>, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let index = label_index(&labels)?;
        let n = labels.len();
        let mut matrix = BitMatrix::new(n);
        for (i, j) in arcs {
            if i >= n || j >= n {
                return Err(GraphError::UnknownVertex(format!("#{}", i.max(j))));
            }
            if i == j {
                return Err(GraphError::SelfLoop(labels[i].clone()));
            }
            matrix.set(i, j);
        }
        let out = (0..n).map(|i| (0..n).filter(|&j| matrix.get(i, j)).collect()).collect();
        let inn = (0..n).map(|j| (0..n).filter(|&i| matrix.get(i, j)).collect()).collect();
        Ok(Digraph { labels, index, out, inn, matrix })
    }

    /// Digraph with `i -> j` iff `arc(i, j)`, queried for `i != j`.
    pub fn from_fn(labels: Vec<String>, mut arc: impl FnMut(usize, usize) -> bool) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && arc(i, j) {
                    arcs.push((i, j));
                }
            }
        }
        Digraph::new(labels, arcs)
    }

    pub fn from_labeled_arcs(labels: &[&str], arcs: &[(&str, &str)]) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let index = label_index(&labels)?;
        let lookup = |l: &str| index.get(l).copied().ok_or_else(|| GraphError::UnknownVertex(l.to_string()));
        let arcs = arcs.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect::<Result<Vec<_>, GraphError>>()?;
        Digraph::new(labels, arcs)
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, GraphError> {
        self.index.get(label).copied().ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.matrix.get(i, j)
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(i, ns)| ns.iter().map(move |&j| (i, j)))
    }

    pub fn transpose(&self) -> Digraph {
        Digraph::from_fn(self.labels.clone(), |i, j| self.has_arc(j, i)).unwrap()
    }

    /// Underlying simple graph.
    pub fn underlying(&self) -> SimpleGraph {
        SimpleGraph::from_fn(self.labels.clone(), |i, j| self.has_arc(i, j) || self.has_arc(j, i)).unwrap()
    }

    pub fn induced(&self, vertices: &[usize]) -> Digraph {
        let labels = vertices.iter().map(|&v| self.labels[v].clone()).collect();
        Digraph::from_fn(labels, |i, j| self.has_arc(vertices[i], vertices[j])).unwrap()
    }

    pub fn induced_by_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Digraph, GraphError> {
        let idx = labels.iter().map(|l| self.index_of(l.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(self.induced(&idx))
    }
}
