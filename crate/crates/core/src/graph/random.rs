//! Seeded random graph models for tests, examples and smoke runs.

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// `G(n, p)`: every pair independently with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    stochastic_block_model(&[n], p, 0.0, seed)
}

/// Blocks of the given sizes over consecutive ids; pairs inside a block
/// connect with probability `p_in`, pairs across blocks with `p_out`.
pub fn stochastic_block_model(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
        }
    }
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = block.len();
    let mut rng = stream_rng(seed, streams::RANDOM_GRAPH);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts_near_expectation() {
        let g = stochastic_block_model(&[150, 150], 0.08, 0.01, 1).unwrap();
        let expected = 2.0 * 150.0 * 149.0 / 2.0 * 0.08 + 150.0 * 150.0 * 0.01;
        assert!((g.num_edges() as f64 - expected).abs() < 4.0 * expected.sqrt());
        let inside = g.edges().iter().filter(|&&(u, v)| (u < 150) == (v < 150)).count();
        assert!(inside as f64 > 0.8 * g.num_edges() as f64);
        assert_eq!(erdos_renyi(10, 1.0, 0).unwrap().num_edges(), 45);
        assert_eq!(erdos_renyi(10, 0.5, 3).unwrap(), erdos_renyi(10, 0.5, 3).unwrap());
    }
}
