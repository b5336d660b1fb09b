//! Power digraphs and the matrices derived from them.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::Group;
use crate::linalg::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigraphError {
    #[error("punctured power digraph of the trivial group has no vertices")]
    EmptyPunctured,
    #[error("adjacency is {rows}x{cols} but there are {vertices} vertices")]
    Shape { rows: usize, cols: usize, vertices: usize },
    #[error("ordering is not a permutation of 0..{0}")]
    BadOrdering(usize),
    #[error("vertex {0} is not a group element")]
    NotAGroupVertex(usize),
    #[error("cannot parse digraph: {0}")]
    Parse(String),
}

/// A finite digraph with (possibly repeated) edges counted in `adjacency`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    labels: Vec<String>,
    /// Group element behind each vertex, when built from a group.
    elements: Option<Vec<usize>>,
    /// Row-major; entry `(u, v)` is the number of edges `u -> v`.
    adjacency: Vec<u64>,
}

/// A permutation of the vertex indices: position `i` holds the vertex placed `i`-th.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering(Vec<usize>);

impl VertexOrdering {
    pub fn new(perm: Vec<usize>) -> Result<Self, DigraphError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(DigraphError::BadOrdering(n));
            }
            seen[p] = true;
        }
        Ok(VertexOrdering(perm))
    }

    pub fn identity(n: usize) -> Self {
        VertexOrdering((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct DigraphJson {
    vertices: Vec<String>,
    adjacency: Vec<Vec<u64>>,
}

impl Digraph {
    /// A user-supplied digraph. Entries are edge multiplicities.
    pub fn from_adjacency(labels: Vec<String>, adjacency: Vec<Vec<u64>>) -> Result<Self, DigraphError> {
        let n = labels.len();
        if adjacency.len() != n || adjacency.iter().any(|r| r.len() != n) {
            return Err(DigraphError::Shape {
                rows: adjacency.len(),
                cols: adjacency.first().map_or(0, |r| r.len()),
                vertices: n,
            });
        }
        Ok(Digraph { labels, elements: None, adjacency: adjacency.concat() })
    }

    /// `Pow(G)`, or `Pow*(G)` when `punctured`: an edge `x -> y` whenever
    /// `x != y` and `y` lies in `<x>`. Vertices are listed in element order.
    pub fn power(g: &Group, punctured: bool) -> Result<Self, DigraphError> {
        let e = g.identity();
        let elements: Vec<usize> = g.elements().filter(|&x| !punctured || x != e).collect();
        if elements.is_empty() {
            return Err(DigraphError::EmptyPunctured);
        }
        let n = elements.len();
        let mut pos = vec![usize::MAX; g.order()];
        for (i, &x) in elements.iter().enumerate() {
            pos[x] = i;
        }
        let mut adjacency = vec![0u64; n * n];
        for (i, &x) in elements.iter().enumerate() {
            for y in g.cyclic_subgroup(x) {
                if y != x && pos[y] != usize::MAX {
                    adjacency[i * n + pos[y]] = 1;
                }
            }
        }
        Ok(Digraph {
            labels: elements.iter().map(|&x| g.element_label(x)).collect(),
            elements: Some(elements),
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> Option<&[usize]> {
        self.elements.as_deref()
    }

    pub fn edges(&self, u: usize, v: usize) -> u64 {
        self.adjacency[u * self.vertex_count() + v]
    }

    pub fn edge_count(&self) -> u64 {
        self.adjacency.iter().sum()
    }

    pub fn out_degree(&self, u: usize) -> u64 {
        let n = self.vertex_count();
        self.adjacency[u * n..(u + 1) * n].iter().sum()
    }

    pub fn is_sink(&self, u: usize) -> bool {
        self.out_degree(u) == 0
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&u| self.is_sink(u)).collect()
    }

    /// Vertices with at least one outgoing edge.
    pub fn regular_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&u| !self.is_sink(u)).collect()
    }

    fn check_ordering(&self, o: &VertexOrdering) -> Result<(), DigraphError> {
        if o.len() != self.vertex_count() {
            return Err(DigraphError::BadOrdering(self.vertex_count()));
        }
        Ok(())
    }

    /// Sorts vertices by (element order, element index). For cyclic p-groups
    /// this groups vertices into blocks of equal order, smallest first.
    pub fn canonical_order(&self, g: &Group) -> Result<VertexOrdering, DigraphError> {
        let Some(elements) = &self.elements else {
            return Ok(VertexOrdering::identity(self.vertex_count()));
        };
        if let Some(i) = elements.iter().position(|&x| x >= g.order()) {
            return Err(DigraphError::NotAGroupVertex(i));
        }
        let mut idx: Vec<usize> = (0..elements.len()).collect();
        idx.sort_by_key(|&i| (g.element_order(elements[i]), elements[i]));
        Ok(VertexOrdering(idx))
    }

    /// Adjacency matrix with rows and columns in the order given by `o`.
    pub fn adjacency_matrix(&self, o: &VertexOrdering) -> Result<IntMatrix, DigraphError> {
        self.check_ordering(o)?;
        let p = o.as_slice();
        Ok(IntMatrix::from_fn(p.len(), p.len(), |i, j| BigInt::from(self.edges(p[i], p[j]))))
    }

    /// `(I_ns - A_ns)^T` in the order `o`: one row per vertex, one column per
    /// regular vertex. Its cokernel is `K0` of the Leavitt path algebra.
    pub fn k0_matrix(&self, o: &VertexOrdering) -> Result<IntMatrix, DigraphError> {
        self.check_ordering(o)?;
        let p = o.as_slice();
        let regular: Vec<usize> = p.iter().copied().filter(|&u| !self.is_sink(u)).collect();
        Ok(IntMatrix::from_fn(p.len(), regular.len(), |i, j| {
            let (row_vertex, col_vertex) = (p[i], regular[j]);
            let delta = i64::from(row_vertex == col_vertex);
            BigInt::from(delta) - BigInt::from(self.edges(col_vertex, row_vertex))
        }))
    }

    /// Relabels through `o`: vertex `i` of the result is vertex `o[i]` of `self`.
    pub fn reordered(&self, o: &VertexOrdering) -> Result<Digraph, DigraphError> {
        self.check_ordering(o)?;
        let p = o.as_slice();
        let n = p.len();
        let mut adjacency = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                adjacency[i * n + j] = self.edges(p[i], p[j]);
            }
        }
        Ok(Digraph {
            labels: p.iter().map(|&u| self.labels[u].clone()).collect(),
            elements: self.elements.as_ref().map(|el| p.iter().map(|&u| el[u]).collect()),
            adjacency,
        })
    }

    /// DOT text with vertices in the order `o` and one line per edge.
    pub fn to_dot(&self, o: &VertexOrdering) -> Result<String, DigraphError> {
        self.check_ordering(o)?;
        let p = o.as_slice();
        let mut pos = vec![0; p.len()];
        for (i, &u) in p.iter().enumerate() {
            pos[u] = i;
        }
        let mut out = String::from("digraph {\n");
        for (i, &u) in p.iter().enumerate() {
            let label = self.labels[u].replace('"', "\\\"");
            writeln!(out, "  n{i} [label=\"{label}\"];").unwrap();
        }
        for &u in p {
            for &v in p {
                for _ in 0..self.edges(u, v) {
                    writeln!(out, "  n{} -> n{};", pos[u], pos[v]).unwrap();
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    /// `{"vertices": [...], "adjacency": [[...]]}` in the order `o`.
    pub fn to_json(&self, o: &VertexOrdering) -> Result<String, DigraphError> {
        let g = self.reordered(o)?;
        let n = g.vertex_count();
        let doc = DigraphJson {
            vertices: g.labels.clone(),
            adjacency: (0..n).map(|i| g.adjacency[i * n..(i + 1) * n].to_vec()).collect(),
        };
        Ok(serde_json::to_string(&doc).expect("digraph serializes"))
    }

    pub fn from_json(text: &str) -> Result<Self, DigraphError> {
        let doc: DigraphJson = serde_json::from_str(text).map_err(|e| DigraphError::Parse(e.to_string()))?;
        Self::from_adjacency(doc.vertices, doc.adjacency)
    }
}
