//! Graph statistics, edge overlap and link-prediction scoring.

mod link;
mod report;
mod stats;

pub use link::{average_precision, link_prediction, roc_auc, LinkPrediction};
pub use report::{definition_notes, evaluate, EvaluationReport, Provenance};
pub use stats::{
    assortativity, characteristic_path_length, clustering_coefficient, edge_overlap, max_degree, mean_local_clustering,
    node_triangles, power_law_exponent, triangle_count, wedge_count, PathLengths, PowerLawFit,
};
