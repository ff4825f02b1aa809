//! Graph and feature containers shared by every stage of the pipeline.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = usize;

/// Simple undirected graph with sorted adjacency lists.
///
/// No self-loops and no parallel edges; `u ∈ adj(v)` iff `v ∈ adj(u)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UndirectedGraph {
    adj: Vec<Vec<NodeId>>,
    m: usize,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from an edge iterator. Duplicate edges collapse; a
    /// self-loop is an error.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    fn check(&self, u: NodeId) -> Result<()> {
        if u < self.adj.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: u,
                n: self.adj.len(),
            })
        }
    }

    /// Inserts the undirected edge `{u, v}`. Returns `true` if it was new.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[u].insert(pos, v);
                let pos = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(pos, u);
                self.m += 1;
                Ok(true)
            }
        }
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(&self.adj[u])
    }

    /// Unchecked neighbor access for hot loops over known-valid ids.
    #[inline]
    pub(crate) fn adj(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj.get(u).map_or(0, Vec::len)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj
            .get(u)
            .is_some_and(|nbrs| nbrs.binary_search(&v).is_ok())
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Hop distances from `source`. Unreachable nodes get the sentinel `n`.
    pub fn bfs_geodesics(&self, source: NodeId) -> Result<Vec<usize>> {
        self.check(source)?;
        let n = self.adj.len();
        let mut dist = vec![n; n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in &self.adj[u] {
                if dist[v] == n {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Subgraph induced by `nodes` (ids are kept; other nodes become isolated).
    pub fn induced(&self, nodes: &[NodeId]) -> Result<Self> {
        let mut keep = vec![false; self.adj.len()];
        for &u in nodes {
            self.check(u)?;
            keep[u] = true;
        }
        let mut g = Self::new(self.adj.len());
        for (u, v) in self.edges() {
            if keep[u] && keep[v] {
                g.add_edge(u, v)?;
            }
        }
        Ok(g)
    }
}

/// Binary node metadata, one sparse row of set feature indices per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    dim: usize,
    rows: Vec<Vec<u32>>,
}

impl FeatureMatrix {
    /// Rows are sorted and deduplicated; every index must be `< dim`.
    pub fn new(dim: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if let Some(&last) = row.last() {
                if last as usize >= dim {
                    return Err(Error::Input(format!(
                        "feature index {last} of node {i} exceeds dimension {dim}"
                    )));
                }
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn empty(n: usize, dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, u: NodeId) -> &[u32] {
        &self.rows[u]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn dense_row(&self, u: NodeId) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for &i in &self.rows[u] {
            x[i as usize] = 1.0;
        }
        x
    }
}

/// Directed graph with arc weights in `[0, 1]`, at most one arc per ordered pair.
///
/// Carries diffusion probabilities, which are direction dependent under the
/// weighted cascade model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedDigraph {
    out: Vec<Vec<(NodeId, f64)>>,
    arcs: usize,
}

impl WeightedDigraph {
    pub fn new(n: usize) -> Self {
        Self {
            out: vec![Vec::new(); n],
            arcs: 0,
        }
    }

    /// Both arcs of every edge of `g` with the same probability `p`.
    pub fn uniform(g: &UndirectedGraph, p: f64) -> Result<Self> {
        let mut d = Self::new(g.node_count());
        for (u, v) in g.edges() {
            d.set_arc(u, v, p)?;
            d.set_arc(v, u, p)?;
        }
        Ok(d)
    }

    /// Weighted cascade on a known graph: arc `u -> v` gets `1 / deg(v)`.
    pub fn weighted_cascade(g: &UndirectedGraph) -> Result<Self> {
        let mut d = Self::new(g.node_count());
        for (u, v) in g.edges() {
            d.set_arc(u, v, 1.0 / g.degree(v) as f64)?;
            d.set_arc(v, u, 1.0 / g.degree(u) as f64)?;
        }
        Ok(d)
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs
    }

    /// Inserts or overwrites the arc `u -> v`.
    pub fn set_arc(&mut self, u: NodeId, v: NodeId, w: f64) -> Result<()> {
        let n = self.out.len();
        for x in [u, v] {
            if x >= n {
                return Err(Error::NodeOutOfRange { node: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Input(format!("arc weight {w} outside [0, 1]")));
        }
        let list = &mut self.out[u];
        match list.binary_search_by_key(&v, |&(t, _)| t) {
            Ok(pos) => list[pos].1 = w,
            Err(pos) => {
                list.insert(pos, (v, w));
                self.arcs += 1;
            }
        }
        Ok(())
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = self.out.get(u)?;
        list.binary_search_by_key(&v, |&(t, _)| t)
            .ok()
            .map(|pos| list[pos].1)
    }

    #[inline]
    pub fn out_arcs(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.out[u]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&(v, w)| (u, v, w)))
    }

    /// Same arcs with every weight multiplied by `factor` (clamped to 1).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for list in &mut out.out {
            for arc in list.iter_mut() {
                arc.1 = (arc.1 * factor).min(1.0);
            }
        }
        out
    }
}
