//! Structural statistics of undirected graphs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub fn max_degree(g: &Graph) -> usize {
    (0..g.num_nodes()).map(|u| g.degree(u)).max().unwrap_or(0)
}

/// Degree assortativity: Pearson correlation of the endpoint degrees over
/// both orientations of every edge. `None` when the degrees have no variance.
pub fn assortativity(g: &Graph) -> Result<Option<f64>> {
    if g.num_edges() == 0 {
        return Err(Error::InvalidArgument("assortativity of an edgeless graph".into()));
    }
    // exact integer moments; both marginals are identical
    let (mut s1, mut s2, mut sxy) = (0i128, 0i128, 0i128);
    for &(u, v) in g.edges() {
        let (du, dv) = (g.degree(u) as i128, g.degree(v) as i128);
        s1 += du + dv;
        s2 += du * du + dv * dv;
        sxy += 2 * du * dv;
    }
    let m = 2 * g.num_edges() as i128;
    let var = m * s2 - s1 * s1;
    if var == 0 {
        return Ok(None);
    }
    let cov = m * sxy - s1 * s1;
    Ok(Some(cov as f64 / var as f64))
}

/// Triangles through each node (each triangle counted once per corner).
pub fn node_triangles(g: &Graph) -> Vec<u64> {
    let mut per_node = vec![0u64; g.num_nodes()];
    for &(u, v) in g.edges() {
        // common neighbours w > v, so each triangle u < v < w is seen once
        let (a, b) = (g.neighbors(u), g.neighbors(v));
        let (mut i, mut j) = (a.partition_point(|&w| w <= v), b.partition_point(|&w| w <= v));
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    per_node[u] += 1;
                    per_node[v] += 1;
                    per_node[a[i]] += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    per_node
}

pub fn triangle_count(g: &Graph) -> u64 {
    node_triangles(g).iter().sum::<u64>() / 3
}

/// Paths of length two, `Σ_v C(d_v, 2)`.
pub fn wedge_count(g: &Graph) -> u64 {
    (0..g.num_nodes())
        .map(|u| {
            let d = g.degree(u) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

/// Global transitivity `3·triangles / wedges`, 0 without wedges.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let wedges = wedge_count(g);
    if wedges == 0 {
        0.0
    } else {
        3.0 * triangle_count(g) as f64 / wedges as f64
    }
}

/// Mean of per-node local clustering; nodes of degree < 2 contribute 0.
pub fn mean_local_clustering(g: &Graph) -> f64 {
    if g.num_nodes() == 0 {
        return 0.0;
    }
    let tri = node_triangles(g);
    let total: f64 = (0..g.num_nodes())
        .map(|u| {
            let d = g.degree(u) as f64;
            if d < 2.0 {
                0.0
            } else {
                2.0 * tri[u] as f64 / (d * (d - 1.0))
            }
        })
        .sum();
    total / g.num_nodes() as f64
}

/// Continuous power-law fit of the degree sequence with `x_min` fixed at the
/// smallest positive degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// `f64::INFINITY` when the degree sequence is constant.
    #[serde(with = "crate::serde_ext::real")]
    pub exponent: f64,
    pub x_min: usize,
    pub nodes_used: usize,
    pub isolated_excluded: usize,
}

/// `α = 1 + n / Σ ln(d_i / (d_min - 1/2))` over nodes of degree ≥ 1.
pub fn power_law_exponent(g: &Graph) -> Result<PowerLawFit> {
    let degrees: Vec<usize> = g.degrees().into_iter().filter(|&d| d > 0).collect();
    let isolated = g.num_nodes() - degrees.len();
    let Some(&x_min) = degrees.iter().min() else {
        return Err(Error::InvalidArgument("power-law fit of an edgeless graph".into()));
    };
    let constant = degrees.iter().all(|&d| d == x_min);
    let exponent = if constant {
        f64::INFINITY
    } else {
        power_law_mle(&degrees, x_min)
    };
    Ok(PowerLawFit {
        exponent,
        x_min,
        nodes_used: degrees.len(),
        isolated_excluded: isolated,
    })
}

pub(crate) fn power_law_mle(degrees: &[usize], x_min: usize) -> f64 {
    let shift = x_min as f64 - 0.5;
    let s: f64 = degrees.iter().map(|&d| (d as f64 / shift).ln()).sum();
    if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 + degrees.len() as f64 / s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLengths {
    /// Mean over connected unordered pairs.
    pub mean: f64,
    pub connected_pairs: u64,
    /// Fraction of unordered node pairs with no connecting path.
    pub disconnected_fraction: f64,
}

/// Characteristic path length by breadth-first search from every node.
pub fn characteristic_path_length(g: &Graph) -> Result<PathLengths> {
    let n = g.num_nodes();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let (mut total, mut pairs) = (0u64, 0u64);
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                    if v > s {
                        total += u64::from(dist[v]);
                        pairs += 1;
                    }
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::InvalidArgument("no connected node pairs".into()));
    }
    let all_pairs = (n as u64) * (n as u64 - 1) / 2;
    Ok(PathLengths {
        mean: total as f64 / pairs as f64,
        connected_pairs: pairs,
        disconnected_fraction: 1.0 - pairs as f64 / all_pairs as f64,
    })
}

/// `|E_generated ∩ E_original| / |E_original|`.
pub fn edge_overlap(generated: &Graph, original: &Graph) -> f64 {
    if original.num_edges() == 0 {
        return 0.0;
    }
    let shared = original
        .edges()
        .iter()
        .filter(|&&(u, v)| generated.has_edge(u, v))
        .count();
    shared as f64 / original.num_edges() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn degrees() {
        assert_eq!(max_degree(&complete(4)), 3);
        assert_eq!(max_degree(&star(5)), 5);
        assert_eq!(max_degree(&Graph::from_edges(3, []).unwrap()), 0);
    }

    #[test]
    fn assortativity_cases() {
        for leaves in 2..7 {
            assert_relative_eq!(assortativity(&star(leaves)).unwrap().unwrap(), -1.0);
        }
        assert_eq!(assortativity(&complete(4)).unwrap(), None);
        assert!(assortativity(&Graph::from_edges(3, []).unwrap()).is_err());
    }

    #[test]
    fn triangles() {
        assert_eq!(triangle_count(&complete(3)), 1);
        assert_eq!(triangle_count(&complete(5)), 10);
        assert_eq!(triangle_count(&path(4)), 0);
    }

    #[test]
    fn clustering() {
        assert_relative_eq!(clustering_coefficient(&complete(5)), 1.0);
        assert_eq!(clustering_coefficient(&star(4)), 0.0);
        assert_relative_eq!(mean_local_clustering(&complete(5)), 1.0);
        // triangle with a pendant: 3 triangles·1 / wedges (1+1+3+0)
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_relative_eq!(clustering_coefficient(&g), 3.0 / 5.0);
    }

    #[test]
    fn power_law() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        let mut d = g.degrees();
        d.sort();
        assert_eq!(d, vec![1, 1, 2, 2, 4]);
        let fit = power_law_exponent(&g).unwrap();
        let expect = 1.0 + 5.0 / (2.0 * 2f64.ln() + 2.0 * 4f64.ln() + 8f64.ln());
        assert_relative_eq!(fit.exponent, expect, max_relative = 1e-12);

        let direct = power_law_mle(&[1, 1, 2, 4], 1);
        assert_relative_eq!(direct, 1.0 + 4.0 / (2f64.ln() * 2.0 + 4f64.ln() + 8f64.ln()));
        assert_relative_eq!(direct, 1.8244, epsilon = 1e-4);

        assert!(power_law_exponent(&complete(4)).unwrap().exponent.is_infinite());
        let with_isolated = Graph::from_edges(6, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(power_law_exponent(&with_isolated).unwrap().isolated_excluded, 3);
    }

    #[test]
    fn path_lengths() {
        let p = characteristic_path_length(&path(3)).unwrap();
        assert_relative_eq!(p.mean, 4.0 / 3.0);
        assert_eq!(p.disconnected_fraction, 0.0);
        assert_relative_eq!(characteristic_path_length(&complete(4)).unwrap().mean, 1.0);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let p = characteristic_path_length(&split).unwrap();
        assert_relative_eq!(p.mean, 1.0);
        assert_relative_eq!(p.disconnected_fraction, 4.0 / 6.0);
        assert!(characteristic_path_length(&Graph::from_edges(3, []).unwrap()).is_err());
    }

    #[test]
    fn overlap() {
        let g = complete(4);
        assert_eq!(edge_overlap(&g, &g), 1.0);
        let a = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let b = Graph::from_edges(4, [(0, 2), (1, 3)]).unwrap();
        assert_eq!(edge_overlap(&a, &b), 0.0);
        let original = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let half = Graph::from_edges(5, [(0, 1), (2, 3), (0, 4), (1, 3)]).unwrap();
        assert_eq!(edge_overlap(&half, &original), 0.5);
    }
}
