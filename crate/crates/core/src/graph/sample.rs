use rand::seq::index;
use rand::Rng;

use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Draws `m` distinct edges uniformly without replacement, each in a random
/// orientation. The result depends only on `(seed, step)`.
pub fn sample_edge_batch(g: &Graph, m: usize, seed: u64, step: u64) -> Result<Vec<(NodeId, NodeId)>> {
    if m > g.num_edges() {
        return Err(Error::InvalidArgument(format!(
            "batch of {m} edges requested from a graph with {}",
            g.num_edges()
        )));
    }
    let mut rng = stream_rng(seed, streams::EDGE_BATCH ^ step);
    let picks = index::sample(&mut rng, g.num_edges(), m);
    Ok(picks.into_iter().map(|i| orient(g.edges()[i], &mut rng)).collect())
}

/// Includes every edge independently with probability `rate`.
pub fn sample_poisson_batch(g: &Graph, rate: f64, seed: u64, step: u64) -> Result<Vec<(NodeId, NodeId)>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("sampling rate {rate} outside [0, 1]")));
    }
    let mut rng = stream_rng(seed, streams::EDGE_BATCH ^ step);
    let mut out = Vec::new();
    for &e in g.edges() {
        if rng.random_bool(rate) {
            out.push(orient(e, &mut rng));
        }
    }
    Ok(out)
}

fn orient((u, v): (NodeId, NodeId), rng: &mut impl Rng) -> (NodeId, NodeId) {
    if rng.random_bool(0.5) {
        (u, v)
    } else {
        (v, u)
    }
}

/// `m` uniform random walks of `length` nodes with uniformly chosen starts.
pub fn sample_random_walks(g: &Graph, length: usize, m: usize, seed: u64, step: u64) -> Result<Vec<Vec<NodeId>>> {
    if length < 2 {
        return Err(Error::InvalidArgument(format!(
            "walk length must be at least 2, got {length}"
        )));
    }
    if g.num_nodes() == 0 {
        return Err(Error::EmptyInput("graph has no nodes".into()));
    }
    let mut rng = stream_rng(seed, streams::WALK_BATCH ^ step);
    (0..m)
        .map(|_| {
            let start = rng.random_range(0..g.num_nodes());
            random_walk_from(g, start, length, &mut rng)
        })
        .collect()
}

/// One walk of `length` nodes from `start`, each hop uniform over neighbors.
pub fn random_walk_from(g: &Graph, start: NodeId, length: usize, rng: &mut impl Rng) -> Result<Vec<NodeId>> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut u = start;
    for _ in 1..length {
        let nbrs = g.neighbors(u);
        if nbrs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "random walk stuck at isolated node {u}"
            )));
        }
        u = nbrs[rng.random_range(0..nbrs.len())];
        walk.push(u);
    }
    Ok(walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize;
    use std::collections::HashSet;

    fn binomial_ok(hits: usize, trials: usize, p: f64) -> bool {
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        (hits as f64 - mean).abs() <= 3.0 * sd
    }

    #[test]
    fn full_batch_covers_every_edge_once() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let batch = sample_edge_batch(&g, 6, 3, 0).unwrap();
        let seen: HashSet<_> = batch.iter().map(|&(u, v)| normalize(u, v)).collect();
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|&(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn orientation_is_fair() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let trials = 10_000;
        let forward = (0..trials)
            .filter(|&s| sample_edge_batch(&g, 1, 17, s as u64).unwrap()[0] == (0, 1))
            .count();
        assert!(binomial_ok(forward, trials, 0.5), "forward = {forward}");
    }

    #[test]
    fn batches_are_reproducible_per_step() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(
            sample_edge_batch(&g, 2, 1, 5).unwrap(),
            sample_edge_batch(&g, 2, 1, 5).unwrap()
        );
        assert!(sample_edge_batch(&g, 5, 1, 5).is_err());
    }

    #[test]
    fn path_walk_bounces() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let mut rng = stream_rng(0, 0);
        assert_eq!(random_walk_from(&g, 0, 3, &mut rng).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn two_step_walks_are_edges() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 2)]).unwrap();
        for w in sample_random_walks(&g, 2, 500, 2, 0).unwrap() {
            assert_eq!(w.len(), 2);
            assert!(g.has_edge(w[0], w[1]));
        }
        assert!(sample_random_walks(&g, 1, 1, 0, 0).is_err());
    }

    #[test]
    fn star_walks_pick_leaves_uniformly() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut rng = stream_rng(11, 0);
        let trials = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            counts[random_walk_from(&g, 0, 2, &mut rng).unwrap()[1]] += 1;
        }
        assert_eq!(counts[0], 0);
        for &c in &counts[1..] {
            assert!(binomial_ok(c, trials, 1.0 / 3.0), "{counts:?}");
        }
    }

    #[test]
    fn poisson_batch_rate() {
        let edges: Vec<_> = (1..201).map(|i| (0, i)).collect();
        let g = Graph::from_edges(201, edges).unwrap();
        let total: usize = (0..50)
            .map(|s| sample_poisson_batch(&g, 0.1, 0, s).unwrap().len())
            .sum();
        assert!(binomial_ok(total, 200 * 50, 0.1));
    }
}
