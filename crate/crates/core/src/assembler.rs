//! Turns a multiset of generated ordered edges into an undirected graph.
//!
//! Counts go into a score matrix `S`, which is symmetrized with
//! `s_ij = s_ji = max(s_ij, s_ji)`. Every node with generated mass first
//! receives one neighbor drawn from its row distribution. Pairs are then
//! drawn from the global distribution `s_ij / Σ s_uv` until the graph holds
//! the requested number of unique edges.

use std::collections::{BTreeMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize, Edge, Graph, NodeId};
use crate::rng::{stream_rng, streams};

/// Sparse square matrix of generated-edge counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreMatrix {
    size: usize,
    counts: BTreeMap<(NodeId, NodeId), u64>,
    symmetrized: bool,
    dropped_self_pairs: u64,
}

impl ScoreMatrix {
    pub fn new(size: usize) -> Self {
        ScoreMatrix {
            size,
            counts: BTreeMap::new(),
            symmetrized: false,
            dropped_self_pairs: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn dropped_self_pairs(&self) -> u64 {
        self.dropped_self_pairs
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Positive entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = ((NodeId, NodeId), u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn row(&self, i: NodeId) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.counts.range((i, 0)..(i + 1, 0)).map(|(&(_, j), &v)| (j, v))
    }

    pub fn row_sum(&self, i: NodeId) -> u64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: &ScoreMatrix) -> Result<()> {
        if other.size != self.size || self.symmetrized || other.symmetrized {
            return Err(Error::InvalidArgument(
                "only unsymmetrized matrices of equal size can be merged".into(),
            ));
        }
        for (&k, &v) in &other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.dropped_self_pairs += other.dropped_self_pairs;
        Ok(())
    }
}

/// `s_ij` = number of occurrences of the ordered pair `(i, j)`.
pub fn count_edges(samples: &[(NodeId, NodeId)], size: usize) -> Result<ScoreMatrix> {
    let mut sm = ScoreMatrix::new(size);
    for &(i, j) in samples {
        for id in [i, j] {
            if id >= size {
                return Err(Error::NodeOutOfRange { id, num_nodes: size });
            }
        }
        if i == j {
            sm.dropped_self_pairs += 1;
            continue;
        }
        *sm.counts.entry((i, j)).or_insert(0) += 1;
    }
    Ok(sm)
}

/// Splits each sequence into its consecutive node pairs.
pub fn sequences_to_pairs(sequences: &[Vec<NodeId>]) -> Vec<(NodeId, NodeId)> {
    sequences
        .iter()
        .flat_map(|s| s.windows(2).map(|w| (w[0], w[1])))
        .collect()
}

/// Elementwise maximum with the transpose.
pub fn symmetrize(sm: &ScoreMatrix) -> ScoreMatrix {
    let mut out = ScoreMatrix {
        size: sm.size,
        counts: BTreeMap::new(),
        symmetrized: true,
        dropped_self_pairs: sm.dropped_self_pairs,
    };
    for (&(i, j), &v) in &sm.counts {
        let m = v.max(sm.get(j, i));
        out.counts.insert((i, j), m);
        out.counts.insert((j, i), m);
    }
    out
}

/// Assembled graph plus bookkeeping for the assembly manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    pub graph: Graph,
    /// Edges inserted while guaranteeing each supported node a neighbor,
    /// as `(node, chosen neighbor)`.
    pub phase_one: Vec<(NodeId, NodeId)>,
    /// Nodes that never appeared in a generated edge.
    pub isolated_nodes: usize,
    pub dropped_self_pairs: u64,
    pub seed: u64,
}

/// Summary written next to an assembled graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyManifest {
    pub sample_volume: usize,
    pub target_edges: usize,
    pub dropped_self_pairs: u64,
    pub isolated_nodes: usize,
    pub phase_one_edges: usize,
    pub seed: u64,
}

impl Assembly {
    pub fn manifest(&self, sample_volume: usize) -> AssemblyManifest {
        AssemblyManifest {
            sample_volume,
            target_edges: self.graph.num_edges(),
            dropped_self_pairs: self.dropped_self_pairs,
            isolated_nodes: self.isolated_nodes,
            phase_one_edges: self.phase_one.len(),
            seed: self.seed,
        }
    }
}

/// Samples a graph with exactly `target_edges` unique undirected edges.
pub fn assemble_graph(sm: &ScoreMatrix, target_edges: usize, seed: u64) -> Result<Assembly> {
    if !sm.symmetrized {
        return Err(Error::InvalidArgument(
            "assemble_graph expects a symmetrized matrix".into(),
        ));
    }
    if sm.counts.is_empty() {
        return Err(Error::InsufficientSupport {
            available: 0,
            requested: target_edges,
        });
    }
    let support: Vec<Edge> = sm.counts.keys().filter(|(i, j)| i < j).copied().collect();
    if support.len() < target_edges {
        return Err(Error::InsufficientSupport {
            available: support.len(),
            requested: target_edges,
        });
    }
    let mut rng = stream_rng(seed, streams::ASSEMBLE);
    let mut present: HashSet<Edge> = HashSet::with_capacity(target_edges);
    let mut edges: Vec<Edge> = Vec::with_capacity(target_edges);

    let phase_one = phase_one(sm, &mut rng);
    for &(i, j) in &phase_one {
        let e = normalize(i, j);
        if present.insert(e) {
            edges.push(e);
        }
    }
    if edges.len() > target_edges {
        return Err(Error::PhaseOneOverflow {
            produced: edges.len(),
            target: target_edges,
        });
    }

    // Rejection sampling from the global distribution. When rejections pile
    // up the sampler is rebuilt over the absent pairs only, which is the
    // same conditional distribution.
    let mut pool: Vec<Edge> = support;
    let mut sampler =
        WeightedIndex::new(pool.iter().map(|&(i, j)| sm.get(i, j))).expect("support has positive weights");
    let mut rejections = 0usize;
    while edges.len() < target_edges {
        let e = pool[sampler.sample(&mut rng)];
        if present.insert(e) {
            edges.push(e);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections > 32 {
                pool.retain(|e| !present.contains(e));
                sampler = WeightedIndex::new(pool.iter().map(|&(i, j)| sm.get(i, j)))
                    .expect("remaining support has positive weights");
                rejections = 0;
            }
        }
    }

    edges.sort_unstable();
    let graph = Graph::from_sorted_unique(sm.size, edges);
    let isolated_nodes = (0..sm.size).filter(|&i| sm.row_sum(i) == 0).count();
    Ok(Assembly {
        graph,
        phase_one,
        isolated_nodes,
        dropped_self_pairs: sm.dropped_self_pairs,
        seed,
    })
}

/// One neighbor per node with a positive row, drawn with probability
/// `s_ij / Σ_v s_iv`, visiting nodes in id order.
pub fn phase_one(sm: &ScoreMatrix, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    let mut chosen = Vec::new();
    let mut i = 0;
    while i < sm.size {
        let row: Vec<(NodeId, u64)> = sm.row(i).collect();
        if !row.is_empty() {
            let dist = WeightedIndex::new(row.iter().map(|&(_, w)| w)).expect("row has positive weights");
            chosen.push((i, row[dist.sample(rng)].0));
        }
        // skip straight to the next populated row
        i = match sm.counts.range((i + 1, 0)..).next() {
            Some((&(next, _), _)) => next,
            None => sm.size,
        };
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_ordered_pairs() {
        let sm = count_edges(&[(0, 1), (1, 0), (0, 1), (2, 0)], 3).unwrap();
        assert_eq!(sm.get(0, 1), 2);
        assert_eq!(sm.get(1, 0), 1);
        assert_eq!(sm.get(2, 0), 1);
        assert_eq!(sm.get(0, 2), 0);
        assert_eq!(sm.total(), 4);
    }

    #[test]
    fn empty_and_self_pairs() {
        let sm = count_edges(&[], 4).unwrap();
        assert_eq!(sm.total(), 0);
        let sm = count_edges(&[(1, 1)], 4).unwrap();
        assert_eq!(sm.total(), 0);
        assert_eq!(sm.dropped_self_pairs(), 1);
        assert!(matches!(
            count_edges(&[(0, 4)], 4),
            Err(Error::NodeOutOfRange { id: 4, .. })
        ));
    }

    #[test]
    fn symmetrize_takes_max() {
        let sm = symmetrize(&count_edges(&[(0, 1), (1, 0), (0, 1)], 2).unwrap());
        assert_eq!((sm.get(0, 1), sm.get(1, 0)), (2, 2));
        assert!(sm.is_symmetrized());
        let again = symmetrize(&sm);
        assert_eq!(again.counts, sm.counts);
        assert_eq!(symmetrize(&ScoreMatrix::new(3)).total(), 0);
    }

    #[test]
    fn merge_shards() {
        let mut a = count_edges(&[(0, 1), (2, 2)], 3).unwrap();
        let b = count_edges(&[(0, 1), (1, 2)], 3).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.get(0, 1), 2);
        assert_eq!(a.get(1, 2), 1);
        assert_eq!(a.dropped_self_pairs(), 1);
    }

    #[test]
    fn single_support_row_is_forced() {
        let sm = symmetrize(&count_edges(&[(2, 0)], 3).unwrap());
        let a = assemble_graph(&sm, 1, 0).unwrap();
        assert_eq!(a.graph.edges(), &[(0, 2)]);
        assert!(a.phase_one.contains(&(2, 0)));
        assert_eq!(a.isolated_nodes, 1);
    }

    #[test]
    fn exact_support_is_reproduced() {
        let samples = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (0, 2), (0, 2)];
        let sm = symmetrize(&count_edges(&samples, 4).unwrap());
        let a = assemble_graph(&sm, 5, 11).unwrap();
        assert_eq!(a.graph.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]);
    }

    #[test]
    fn insufficient_support_reports_maximum() {
        let sm = symmetrize(&count_edges(&[(0, 1), (1, 2)], 3).unwrap());
        match assemble_graph(&sm, 3, 0) {
            Err(Error::InsufficientSupport { available, requested }) => {
                assert_eq!((available, requested), (2, 3))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phase_one_overflow_is_an_error() {
        // a perfect matching: phase one alone yields 3 edges
        let sm = symmetrize(&count_edges(&[(0, 1), (2, 3), (4, 5), (0, 2)], 6).unwrap());
        assert!(matches!(assemble_graph(&sm, 2, 0), Err(Error::PhaseOneOverflow { .. })));
    }

    #[test]
    fn unsymmetrized_input_rejected() {
        let sm = count_edges(&[(0, 1)], 2).unwrap();
        assert!(assemble_graph(&sm, 1, 0).is_err());
    }

    #[test]
    fn walk_sequences_decompose_into_pairs() {
        let pairs = sequences_to_pairs(&[vec![0, 1, 2, 1], vec![3, 4]]);
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 1), (3, 4)]);
    }
}
