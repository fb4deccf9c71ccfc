//! Validation AUC and average precision of a score matrix. Here the scores
//! count how often two nodes are the two ends of a random walk on the
//! training graph, so held-out edges can only score through shared
//! neighborhoods.
//!
//! cargo run --release --example link_prediction

use dp_graphgen::assembler::{count_edges, sequences_to_pairs, symmetrize};
use dp_graphgen::evaluation::{average_precision, link_prediction, roc_auc};
use dp_graphgen::graph::{largest_connected_component, sample_random_walks, split_edges, stochastic_block_model};

fn main() -> dp_graphgen::Result<()> {
    println!("AUC of (0.9, 0.4) vs (0.5, 0.1): {}", roc_auc(&[0.9, 0.4], &[0.5, 0.1]));
    println!(
        "AP of [1+, 0.5-, 0.2+]: {:.4}",
        average_precision(&[(1.0, true), (0.5, false), (0.2, true)])
    );

    let g = largest_connected_component(&stochastic_block_model(&[150, 150], 0.085, 0.005, 7)?)?.graph;
    let split = split_edges(&g, 0.15, 7)?;
    for length in [2, 3, 4, 6] {
        let walks = sample_random_walks(&split.train, length, 200_000, 7, 0)?;
        let ends: Vec<Vec<usize>> = walks.iter().map(|w| vec![w[0], w[length - 1]]).collect();
        let scores = symmetrize(&count_edges(&sequences_to_pairs(&ends), g.num_nodes())?);
        let lp = link_prediction(&scores, &split);
        println!("walks of length {length}: AUC {:.4}, AP {:.4}", lp.auc, lp.ap);
    }
    Ok(())
}
