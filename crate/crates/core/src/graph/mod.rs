//! Undirected simple graphs stored as a coordinate-format edge index.

mod io;
mod lcc;
mod random;
mod sample;
mod split;

pub use io::{
    format_edge_list, format_pairs, parse_edge_list, parse_pairs, read_edge_list, write_edge_list, LoadedGraph,
};
pub use lcc::{largest_connected_component, Component};
pub use random::{erdos_renyi, stochastic_block_model};
pub use sample::{random_walk_from, sample_edge_batch, sample_poisson_batch, sample_random_walks};
pub use split::{split_edges, EdgeSplit, SplitManifest};

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Node identifier; always in `[0, num_nodes)`.
pub type NodeId = usize;

/// Unordered pair normalized so that `.0 < .1`.
pub type Edge = (NodeId, NodeId);

pub(crate) fn normalize(u: NodeId, v: NodeId) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Immutable undirected simple graph.
///
/// The edge index holds each unordered edge once as `(u, v)` with `u < v`,
/// sorted lexicographically. A CSR adjacency is derived at construction so
/// both directed views are available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from arbitrary pairs. Duplicates (in either orientation)
    /// collapse; self-loops and out-of-range ids are errors.
    pub fn from_edges<I>(num_nodes: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            for id in [u, v] {
                if id >= num_nodes {
                    return Err(Error::NodeOutOfRange { id, num_nodes });
                }
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            edges.push(normalize(u, v));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_unique(num_nodes, edges))
    }

    pub(crate) fn from_sorted_unique(num_nodes: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..num_nodes].to_vec();
        let mut adjacency = vec![0; offsets[num_nodes]];
        for &(u, v) in &edges {
            adjacency[cursor[u]] = v;
            cursor[u] += 1;
            adjacency[cursor[v]] = u;
            cursor[v] += 1;
        }
        for u in 0..num_nodes {
            adjacency[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Graph {
            num_nodes,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Unordered edges, `u < v`, lexicographically sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes).map(|u| self.degree(u)).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.num_nodes && v < self.num_nodes && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Component label per node; labels are assigned in order of each
    /// component's smallest node id.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.num_nodes];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.num_nodes {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.num_nodes > 0 && self.component_labels().iter().all(|&c| c == 0)
    }

    /// Nodes with no incident edge.
    pub fn isolated_nodes(&self) -> usize {
        (0..self.num_nodes).filter(|&u| self.degree(u) == 0).count()
    }
}
