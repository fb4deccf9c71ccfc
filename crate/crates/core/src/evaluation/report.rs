use serde::{Deserialize, Serialize};

use super::link::link_prediction;
use super::stats::*;
use crate::assembler::ScoreMatrix;
use crate::error::Result;
use crate::graph::{EdgeSplit, Graph};
use crate::serde_ext::format_real;

/// Where a report came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the effective configuration.
    pub config_hash: String,
    pub seed: u64,
    /// `"private"`, `"non-private"` or `"baseline"`.
    pub label: String,
    /// Definitions and deviations a reader needs to interpret the numbers.
    pub notes: Vec<String>,
}

/// Statistics of one assembled graph.
///
/// Sentinels are written as strings: `"undefined"` for assortativity of a
/// degree-regular graph, `"inf"` for a constant degree sequence's power-law
/// exponent and for the privacy loss of non-private training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub max_degree: usize,
    #[serde(with = "crate::serde_ext::optional_real")]
    pub assortativity: Option<f64>,
    pub triangle_count: u64,
    #[serde(with = "crate::serde_ext::real")]
    pub power_law_exponent: f64,
    pub clustering_coefficient: f64,
    pub characteristic_path_length: f64,
    pub edge_overlap: f64,
    pub auc: f64,
    pub ap: f64,
    pub isolated_nodes: usize,
    #[serde(with = "crate::serde_ext::real")]
    pub epsilon_at_eval: f64,
    pub mean_local_clustering: f64,
    pub disconnected_pair_fraction: f64,
    pub power_law_x_min: usize,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub provenance: Provenance,
}

const CSV_COLUMNS: [&str; 16] = [
    "max_degree",
    "assortativity",
    "triangle_count",
    "power_law_exponent",
    "clustering_coefficient",
    "characteristic_path_length",
    "edge_overlap",
    "auc",
    "ap",
    "isolated_nodes",
    "epsilon_at_eval",
    "mean_local_clustering",
    "disconnected_pair_fraction",
    "num_nodes",
    "num_edges",
    "seed",
];

impl EvaluationReport {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        [
            self.max_degree.to_string(),
            format_real(self.assortativity.unwrap_or(f64::NAN)),
            self.triangle_count.to_string(),
            format_real(self.power_law_exponent),
            format_real(self.clustering_coefficient),
            format_real(self.characteristic_path_length),
            format_real(self.edge_overlap),
            format_real(self.auc),
            format_real(self.ap),
            self.isolated_nodes.to_string(),
            format_real(self.epsilon_at_eval),
            format_real(self.mean_local_clustering),
            format_real(self.disconnected_pair_fraction),
            self.num_nodes.to_string(),
            self.num_edges.to_string(),
            self.provenance.seed.to_string(),
        ]
        .join(",")
    }
}

/// Evaluates an assembled graph against the graph it imitates.
///
/// `scores` is the symmetrized count matrix the graph was assembled from;
/// link prediction uses it directly rather than the sampled graph.
pub fn evaluate(
    generated: &Graph,
    original: &Graph,
    scores: &ScoreMatrix,
    split: &EdgeSplit,
    epsilon: f64,
    provenance: Provenance,
) -> Result<EvaluationReport> {
    let fit = power_law_exponent(generated)?;
    let paths = characteristic_path_length(generated)?;
    let lp = link_prediction(scores, split);
    Ok(EvaluationReport {
        max_degree: max_degree(generated),
        assortativity: assortativity(generated)?,
        triangle_count: triangle_count(generated),
        power_law_exponent: fit.exponent,
        clustering_coefficient: clustering_coefficient(generated),
        characteristic_path_length: paths.mean,
        edge_overlap: edge_overlap(generated, original),
        auc: lp.auc,
        ap: lp.ap,
        isolated_nodes: generated.isolated_nodes(),
        epsilon_at_eval: epsilon,
        mean_local_clustering: mean_local_clustering(generated),
        disconnected_pair_fraction: paths.disconnected_fraction,
        power_law_x_min: fit.x_min,
        num_nodes: generated.num_nodes(),
        num_edges: generated.num_edges(),
        provenance,
    })
}

/// Notes attached to every report describing how the statistics are defined.
pub fn definition_notes() -> Vec<String> {
    vec![
        "clustering_coefficient is global transitivity; mean_local_clustering is the per-node average".into(),
        "power_law_exponent is the continuous MLE with x_min fixed at the minimum positive degree".into(),
        "characteristic_path_length averages over connected pairs only".into(),
        "validation split protects a random spanning tree so the training graph stays connected".into(),
    ]
}
