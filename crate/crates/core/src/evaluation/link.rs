//! Link prediction scored by the generated-edge count matrix.

use serde::{Deserialize, Serialize};

use crate::assembler::ScoreMatrix;
use crate::graph::{Edge, EdgeSplit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkPrediction {
    pub auc: f64,
    pub ap: f64,
}

/// Area under the ROC curve via the rank-sum statistic; tied scores get
/// their average rank, i.e. each positive/negative tie counts 1/2.
pub fn roc_auc(positives: &[f64], negatives: &[f64]) -> f64 {
    if positives.is_empty() || negatives.is_empty() {
        return f64::NAN;
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += mean_rank * all[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    (rank_sum - np * (np + 1.0) / 2.0) / (np * nn)
}

/// Mean precision at the rank of each positive, scores descending. `scored`
/// must already be in the desired tie-break order for equal scores.
pub fn average_precision(scored: &[(f64, bool)]) -> f64 {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    // stable sort keeps the caller's tie order
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    let (mut hits, mut sum) = (0usize, 0.0);
    for (rank, &idx) in order.iter().enumerate() {
        if scored[idx].1 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        f64::NAN
    } else {
        sum / hits as f64
    }
}

/// Scores each validation edge and frozen non-edge `(i, j)` by `s_ij`.
///
/// AP ties are broken by ascending `(i, j)`.
pub fn link_prediction(sm: &ScoreMatrix, split: &EdgeSplit) -> LinkPrediction {
    let score = |&(i, j): &Edge| sm.get(i, j).max(sm.get(j, i)) as f64;
    let pos: Vec<f64> = split.validation_edges.iter().map(score).collect();
    let neg: Vec<f64> = split.validation_non_edges.iter().map(score).collect();
    let mut labelled: Vec<(Edge, f64, bool)> = split
        .validation_edges
        .iter()
        .zip(&pos)
        .map(|(&e, &s)| (e, s, true))
        .chain(
            split
                .validation_non_edges
                .iter()
                .zip(&neg)
                .map(|(&e, &s)| (e, s, false)),
        )
        .collect();
    labelled.sort_by_key(|x| x.0);
    let scored: Vec<(f64, bool)> = labelled.iter().map(|x| (x.1, x.2)).collect();
    LinkPrediction {
        auc: roc_auc(&pos, &neg),
        ap: average_precision(&scored),
    }
}
