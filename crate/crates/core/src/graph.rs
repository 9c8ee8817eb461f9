//! Finite connected graphs, 1-forms and the differential `d`.
//!
//! Every edge is stored with its canonical orientation `[low, high]`; a
//! [`OneForm`] holds one value per edge in that orientation, and reading it on
//! the reversed edge negates the value.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An undirected edge stored in canonical orientation (`tail < head`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<Edge>,
    /// `adjacency[x]` lists `(neighbor, edge index)` sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    tree_edges: Vec<usize>,
    chords: Vec<usize>,
    /// BFS parent of each vertex as `(parent, edge index)`; `None` at the root.
    parent: Vec<Option<(usize, usize)>>,
    bfs_order: Vec<usize>,
}

impl Graph {
    /// Builds a connected simple graph. Edges keep their input order; each is
    /// reoriented low → high. The spanning tree comes from a breadth-first
    /// search rooted at vertex 0 that visits neighbors by increasing index.
    pub fn new(num_vertices: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidEdge {
                u: 0,
                v: 0,
                reason: "graph needs at least one vertex".into(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            let reason = if u == v {
                Some("self-loop")
            } else if u >= num_vertices || v >= num_vertices {
                Some("vertex index out of range")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidEdge { u, v, reason: reason.into() });
            }
            let e = Edge { tail: u.min(v), head: u.max(v) };
            if !seen.insert(e) {
                return Err(Error::InvalidEdge { u, v, reason: "duplicate edge".into() });
            }
            edges.push(e);
        }

        let mut adjacency = vec![Vec::new(); num_vertices];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.tail].push((e.head, k));
            adjacency[e.head].push((e.tail, k));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let mut parent = vec![None; num_vertices];
        let mut visited = vec![false; num_vertices];
        let mut in_tree = vec![false; edges.len()];
        let mut bfs_order = Vec::with_capacity(num_vertices);
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(x) = queue.pop_front() {
            bfs_order.push(x);
            for &(y, k) in &adjacency[x] {
                if !visited[y] {
                    visited[y] = true;
                    parent[y] = Some((x, k));
                    in_tree[k] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(x) = visited.iter().position(|v| !v) {
            return Err(Error::DisconnectedGraph(x));
        }
        let tree_edges = (0..edges.len()).filter(|&k| in_tree[k]).collect();
        let chords = (0..edges.len()).filter(|&k| !in_tree[k]).collect();

        Ok(Self { num_vertices, edges, adjacency, tree_edges, chords, parent, bfs_order })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> Edge {
        self.edges[k]
    }

    /// Neighbors of `x` with the connecting edge index, by increasing neighbor.
    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency
            .get(u)?
            .binary_search_by_key(&v, |&(y, _)| y)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    pub fn spanning_tree(&self) -> &[usize] {
        &self.tree_edges
    }

    pub fn chords(&self) -> &[usize] {
        &self.chords
    }

    /// Dimension of the cycle space, `1 + #E - #X`.
    pub fn cycle_dimension(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    pub(crate) fn bfs_parent(&self, x: usize) -> Option<(usize, usize)> {
        self.parent[x]
    }

    pub(crate) fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    /// The `#E × #X` incidence matrix of `d`: row `e = [x, y]` has `-1` at
    /// column `x` and `+1` at column `y`.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.edges.len(), self.num_vertices);
        for (k, e) in self.edges.iter().enumerate() {
            d[(k, e.tail)] = -1.0;
            d[(k, e.head)] = 1.0;
        }
        d
    }

    /// `(df)([x,y]) = f(y) - f(x)` on every canonically oriented edge.
    pub fn differential(&self, f: &[f64]) -> Result<OneForm> {
        check_len(self.num_vertices, f.len())?;
        Ok(OneForm(self.edges.iter().map(|e| f[e.head] - f[e.tail]).collect()))
    }

    /// Basis `d e_1, …, d e_{#X-1}` of the gradient subspace `d R^X`, as the
    /// columns of a `#E × (#X - 1)` matrix.
    pub fn gradient_subspace_basis(&self) -> DMatrix<f64> {
        let d = self.incidence_matrix();
        d.columns(1, self.num_vertices - 1).into_owned()
    }

    /// Same basis as [`Graph::gradient_subspace_basis`], one `OneForm` each.
    pub fn gradient_forms(&self) -> Vec<OneForm> {
        let basis = self.gradient_subspace_basis();
        basis.column_iter().map(|c| OneForm(c.iter().copied().collect())).collect()
    }

    /// Two-colouring for bipartite graphs: `Ok(colour)` with `colour[0] == 0`.
    pub fn bipartition(&self) -> Result<Vec<u8>> {
        let mut colour = vec![u8::MAX; self.num_vertices];
        for &x in &self.bfs_order {
            colour[x] = match self.parent[x] {
                None => 0,
                Some((p, _)) => 1 - colour[p],
            };
        }
        for e in &self.edges {
            if colour[e.tail] == colour[e.head] {
                return Err(Error::NotBipartite(e.tail, e.head));
            }
        }
        Ok(colour)
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A real 1-form, one value per canonically oriented edge.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm(pub Vec<f64>);

impl OneForm {
    pub fn zeros(g: &Graph) -> Self {
        Self(vec![0.0; g.num_edges()])
    }

    pub fn from_values(g: &Graph, values: Vec<f64>) -> Result<Self> {
        check_len(g.num_edges(), values.len())?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value on the oriented edge `[x, y]`; `None` if `{x, y}` is not an edge.
    pub fn on(&self, g: &Graph, x: usize, y: usize) -> Option<f64> {
        let k = g.edge_index(x, y)?;
        let v = self.0[k];
        Some(if g.edge(k).tail == x { v } else { -v })
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, s: f64) -> OneForm {
        OneForm(self.0.iter().map(|a| s * a).collect())
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}
