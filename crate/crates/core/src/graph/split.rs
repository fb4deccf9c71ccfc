use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{format_edge_list, format_pairs, normalize, parse_edge_list, parse_pairs, Edge, Graph};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Train/validation partition of a connected graph's edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSplit {
    pub train: Graph,
    pub validation_edges: Vec<Edge>,
    pub validation_non_edges: Vec<Edge>,
    pub seed: u64,
    pub fraction: f64,
}

/// Sidecar metadata written next to the three split edge lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fraction: f64,
    pub num_nodes: usize,
    pub train_edges: usize,
    pub validation_edges: usize,
    /// A random spanning tree of the input was excluded from validation
    /// selection so the training graph stays connected.
    pub connectivity_protected: bool,
}

const TRAIN_FILE: &str = "train.txt";
const VAL_EDGES_FILE: &str = "validation_edges.txt";
const VAL_NON_EDGES_FILE: &str = "validation_non_edges.txt";
const MANIFEST_FILE: &str = "split.json";

/// Holds out `round(fraction * |E|)` edges plus as many non-edges.
///
/// The training graph is kept connected by drawing a uniform spanning tree
/// (Wilson's algorithm) and only selecting validation edges outside it.
pub fn split_edges(g: &Graph, fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if !g.is_connected() {
        return Err(Error::InvalidArgument(
            "split requires a connected graph; extract the largest component first".into(),
        ));
    }
    let num_edges = g.num_edges();
    let requested = (fraction * num_edges as f64).round() as usize;
    if requested == 0 {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} of {num_edges} edges rounds to zero validation edges"
        )));
    }
    let max_feasible = num_edges + 1 - g.num_nodes();
    if requested > max_feasible {
        return Err(Error::SplitInfeasible {
            requested,
            max_feasible,
            max_fraction: max_feasible as f64 / num_edges as f64,
        });
    }
    let n = g.num_nodes();
    let complement = n * (n - 1) / 2 - num_edges;
    if requested > complement {
        return Err(Error::InvalidArgument(format!(
            "only {complement} non-edges exist, cannot sample {requested}"
        )));
    }

    let mut rng = stream_rng(seed, streams::SPLIT);
    let tree: HashSet<Edge> = uniform_spanning_tree(g, &mut rng).into_iter().collect();
    let candidates: Vec<Edge> = g.edges().iter().copied().filter(|e| !tree.contains(e)).collect();
    let mut held_out: Vec<Edge> = index::sample(&mut rng, candidates.len(), requested)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    held_out.sort_unstable();
    let held: HashSet<Edge> = held_out.iter().copied().collect();
    let train_edges: Vec<Edge> = g.edges().iter().copied().filter(|e| !held.contains(e)).collect();

    let mut non_edges = sample_non_edges(g, requested, complement, &mut rng);
    non_edges.sort_unstable();

    let train = Graph::from_sorted_unique(n, train_edges);
    debug_assert!(train.is_connected());
    Ok(EdgeSplit {
        train,
        validation_edges: held_out,
        validation_non_edges: non_edges,
        seed,
        fraction,
    })
}

/// Wilson's loop-erased random walk construction.
fn uniform_spanning_tree(g: &Graph, rng: &mut impl Rng) -> Vec<Edge> {
    let n = g.num_nodes();
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    let root = rng.random_range(0..n);
    in_tree[root] = true;
    let mut tree = Vec::with_capacity(n - 1);
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nbrs = g.neighbors(u);
            next[u] = nbrs[rng.random_range(0..nbrs.len())];
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            tree.push(normalize(u, next[u]));
            u = next[u];
        }
    }
    tree
}

fn sample_non_edges(g: &Graph, k: usize, complement: usize, rng: &mut impl Rng) -> Vec<Edge> {
    let n = g.num_nodes();
    // dense graphs: enumerate the complement rather than reject
    if complement <= 4 * k {
        let mut all: Vec<Edge> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        all.shuffle(rng);
        all.truncate(k);
        return all;
    }
    let mut chosen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let e = normalize(u, v);
        if chosen.insert(e) {
            out.push(e);
        }
    }
    out
}

impl EdgeSplit {
    pub fn manifest(&self) -> SplitManifest {
        SplitManifest {
            seed: self.seed,
            fraction: self.fraction,
            num_nodes: self.train.num_nodes(),
            train_edges: self.train.num_edges(),
            validation_edges: self.validation_edges.len(),
            connectivity_protected: true,
        }
    }

    /// Writes three edge lists and a JSON manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(path, e))
        };
        write(TRAIN_FILE, format_edge_list(&self.train))?;
        write(VAL_EDGES_FILE, format_pairs(&self.validation_edges))?;
        write(VAL_NON_EDGES_FILE, format_pairs(&self.validation_non_edges))?;
        write(MANIFEST_FILE, serde_json::to_string_pretty(&self.manifest())?)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| Error::io(path, e))
        };
        let manifest: SplitManifest = serde_json::from_str(&read(MANIFEST_FILE)?)?;
        let train = parse_edge_list(&read(TRAIN_FILE)?)?.graph;
        let pairs = |name: &str| -> Result<Vec<Edge>> {
            Ok(parse_pairs(&read(name)?)?
                .into_iter()
                .map(|(u, v)| normalize(u, v))
                .collect())
        };
        let split = EdgeSplit {
            validation_edges: pairs(VAL_EDGES_FILE)?,
            validation_non_edges: pairs(VAL_NON_EDGES_FILE)?,
            train,
            seed: manifest.seed,
            fraction: manifest.fraction,
        };
        if split.train.num_nodes() != manifest.num_nodes || split.validation_edges.len() != manifest.validation_edges {
            return Err(Error::InvalidArgument(format!(
                "split files in {} disagree with their manifest",
                dir.display()
            )));
        }
        Ok(split)
    }
}
