//! Brute-force reference scorer for small graphs.
//!
//! Every ordered pair of eligible vertices that is not a training edge is
//! scored directly from its materialized neighbor sets, the zero bucket is
//! counted pair by pair, and the curves come from the quadratic
//! all-thresholds-against-all-thresholds aggregation. None of this shares
//! the engine's path accumulation or the evaluator's prefix sums.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{Bucket, Counts, EdgeSet, EngineError, ThresholdHistogram};
use crate::graph::{Graph, VertexId};
use crate::scores::{self, ScoreError, ScoreKind, ScoreSpec, Weighting};

pub const DEFAULT_VERTEX_CAP: usize = 500;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle refuses graphs with more than {cap} vertices (got {vertices})")]
    TooLarge { vertices: usize, cap: usize },
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Histogram(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScore {
    pub source: VertexId,
    pub target: VertexId,
    pub score: f64,
    pub positive: bool,
}

/// Curves recomputed threshold by threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveCurves {
    /// `(threshold, cumulative tp, cumulative fp)` by descending threshold.
    pub cumulative: Vec<(f64, u64, u64)>,
    pub pr_points: Vec<(f64, f64)>,
    pub roc_points: Vec<(f64, f64)>,
    pub aupr: f64,
    pub auroc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Every candidate pair, in `(source, target)` order.
    pub scores: Vec<PairScore>,
    pub histogram: ThresholdHistogram,
    /// `None` when either class is empty.
    pub curves: Option<NaiveCurves>,
}

/// Score of `x → y` computed from the set definitions.
pub fn score_pair(g: &Graph, x: VertexId, y: VertexId, spec: &ScoreSpec) -> Result<f64, ScoreError> {
    let gamma = |v| g.undirected_neighbors(v);
    let gamma_degree = |z| g.undirected_neighbors(z).len();
    Ok(match spec.kind {
        ScoreKind::Cn => scores::score_cn(gamma(x), gamma(y)),
        ScoreKind::Aa => {
            scores::score_aa(&scores::intersection(gamma(x), gamma(y)), gamma_degree, spec.log_base)?
        }
        ScoreKind::Ra => scores::score_ra(&scores::intersection(gamma(x), gamma(y)), gamma_degree)?,
        ScoreKind::Jaccard => scores::score_jaccard(gamma(x), gamma(y)),
        ScoreKind::Ded => scores::score_ded(
            g.out_neighbors(x),
            g.in_neighbors(y),
            Weighting::Proportional,
            spec.log_base,
        ),
        ScoreKind::Ind => scores::score_ind(
            g.in_neighbors(x),
            g.in_neighbors(y),
            Weighting::Proportional,
            spec.log_base,
        ),
        ScoreKind::Inf | ScoreKind::InfLog | ScoreKind::InfLogKd => {
            scores::score_inf_family(g.out_neighbors(x), g.in_neighbors(x), g.in_neighbors(y), spec)?
        }
    })
}

/// Scores every candidate pair of `g` with `cap = DEFAULT_VERTEX_CAP`.
pub fn oracle_score_all(g: &Graph, spec: &ScoreSpec, test: &EdgeSet) -> Result<OracleResult, OracleError> {
    oracle_score_all_capped(g, spec, test, DEFAULT_VERTEX_CAP)
}

pub fn oracle_score_all_capped(
    g: &Graph,
    spec: &ScoreSpec,
    test: &EdgeSet,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    let n = g.vertex_count();
    if n > cap {
        return Err(OracleError::TooLarge { vertices: n, cap });
    }
    let eligible: Vec<VertexId> =
        (0..n as VertexId).filter(|&v| !g.out_neighbors(v).is_empty() || !g.in_neighbors(v).is_empty()).collect();

    let mut pairs = Vec::new();
    for &x in &eligible {
        for &y in &eligible {
            if x == y || g.has_edge(x, y) {
                continue;
            }
            pairs.push(PairScore {
                source: x,
                target: y,
                score: score_pair(g, x, y, spec)?,
                positive: test.contains(x, y),
            });
        }
    }

    let mut tally: BTreeMap<u64, Counts> = BTreeMap::new();
    let mut zero = Counts::default();
    for p in &pairs {
        let slot = if p.score == 0.0 { &mut zero } else { tally.entry(p.score.to_bits()).or_default() };
        if p.positive {
            slot.tp += 1;
        } else {
            slot.fp += 1;
        }
    }
    let positives = pairs.iter().filter(|p| p.positive).count() as u64;
    let negatives = pairs.len() as u64 - positives;
    let mut buckets: Vec<Bucket> =
        tally.into_iter().map(|(bits, counts)| Bucket { score: f64::from_bits(bits), counts }).collect();
    buckets.reverse();
    let histogram = ThresholdHistogram { buckets, zero, positives_total: positives, negatives_total: negatives };
    histogram.check_conservation()?;

    let curves = (positives > 0 && negatives > 0).then(|| naive_curves(&pairs, positives, negatives));
    Ok(OracleResult { scores: pairs, histogram, curves })
}

/// For every distinct score `t`, sums tp/fp over every distinct score `≥ t`.
fn naive_curves(pairs: &[PairScore], positives: u64, negatives: u64) -> NaiveCurves {
    let mut per_value: Vec<(f64, u64, u64)> = Vec::new();
    for p in pairs {
        match per_value.iter_mut().find(|(s, _, _)| s.to_bits() == p.score.to_bits()) {
            Some(entry) => {
                if p.positive {
                    entry.1 += 1
                } else {
                    entry.2 += 1
                }
            }
            None => per_value.push((p.score, p.positive as u64, !p.positive as u64)),
        }
    }

    let mut cumulative = Vec::with_capacity(per_value.len());
    for &(sim1, _, _) in &per_value {
        let (mut tp, mut fp) = (0u64, 0u64);
        for &(sim2, tp2, fp2) in &per_value {
            if sim2 >= sim1 {
                tp += tp2;
                fp += fp2;
            }
        }
        cumulative.push((sim1, tp, fp));
    }
    cumulative.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut pr_points = Vec::new();
    let mut roc_points = Vec::new();
    for &(_, tp, fp) in &cumulative {
        pr_points.push((tp as f64 / positives as f64, tp as f64 / (tp + fp) as f64));
        roc_points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }

    let mut aupr = 0.0;
    let mut last_recall = 0.0;
    for &(recall, precision) in &pr_points {
        aupr += precision * (recall - last_recall);
        last_recall = recall;
    }
    let mut auroc = 0.0;
    let mut last = (0.0, 0.0);
    for &(fpr, tpr) in &roc_points {
        auroc += (fpr - last.0) * (tpr + last.1) / 2.0;
        last = (fpr, tpr);
    }
    NaiveCurves { cumulative, pr_points, roc_points, aupr, auroc }
}
