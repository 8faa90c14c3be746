//! Train/test splits and exact precision-recall / ROC evaluation.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{EdgeSet, ThresholdHistogram};
use crate::graph::{Edge, Graph, VertexId};

pub const DEFAULT_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split fraction must lie strictly between 0 and 1, got {0}")]
    Fraction(f64),
    #[error("a fraction of {fraction} of {edges} edges samples no test edge")]
    EmptySample { fraction: f64, edges: usize },
    #[error("histogram has no positives; precision-recall is undefined")]
    NoPositives,
    #[error("histogram has no negatives; the false positive rate is undefined")]
    NoNegatives,
    #[error("histogram is inconsistent: {0}")]
    Histogram(#[from] crate::engine::EngineError),
    #[error("curve points are not sorted by ascending {0}")]
    Unsorted(&'static str),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("split file line {line}: {message}")]
    SplitFile { line: usize, message: String },
}

/// A held-out test set and the training graph left behind.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSplit {
    pub train: Graph,
    /// Retained positives, sorted.
    pub test_edges: Vec<Edge>,
    /// Sampled edges with an endpoint left without any training edge. They
    /// are neither scored nor counted.
    pub dropped_test_edges: Vec<Edge>,
    pub seed: u64,
    pub fraction: f64,
}

impl EdgeSplit {
    pub fn test_set(&self) -> EdgeSet {
        EdgeSet::new(self.train.vertex_count(), self.test_edges.iter().copied())
    }

    pub fn sampled(&self) -> usize {
        self.test_edges.len() + self.dropped_test_edges.len()
    }

    /// Writes the split as `seed`, `fraction`, `test u v` and `dropped u v`
    /// records, using vertex labels when the graph has them.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# linkpred edge split")?;
        writeln!(w, "seed {}", self.seed)?;
        writeln!(w, "fraction {:?}", self.fraction)?;
        for &(u, v) in &self.test_edges {
            writeln!(w, "test {} {}", self.train.display_vertex(u), self.train.display_vertex(v))?;
        }
        for &(u, v) in &self.dropped_test_edges {
            writeln!(w, "dropped {} {}", self.train.display_vertex(u), self.train.display_vertex(v))?;
        }
        w.flush()
    }

    /// Rebuilds a split of `original` from a file written by [`EdgeSplit::write`].
    pub fn read<R: BufRead>(original: &Graph, r: R) -> Result<Self, EvalError> {
        let index: Option<HashMap<&str, VertexId>> = original
            .labels()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.as_str(), i as VertexId)).collect());
        let resolve = |tok: &str, line: usize| -> Result<VertexId, EvalError> {
            let id = match &index {
                Some(map) => map.get(tok).copied(),
                None => tok.parse::<VertexId>().ok().filter(|&v| (v as usize) < original.vertex_count()),
            };
            id.ok_or_else(|| EvalError::SplitFile { line, message: format!("unknown vertex `{tok}`") })
        };
        let mut seed = None;
        let mut fraction = None;
        let mut test = Vec::new();
        let mut dropped = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let bad = |message: &str| EvalError::SplitFile { line: lineno, message: message.to_owned() };
            match fields[..] {
                ["seed", s] => seed = Some(s.parse().map_err(|_| bad("bad seed"))?),
                ["fraction", f] => fraction = Some(f.parse().map_err(|_| bad("bad fraction"))?),
                [kind @ ("test" | "dropped"), u, v] => {
                    let e = (resolve(u, lineno)?, resolve(v, lineno)?);
                    if !original.has_edge(e.0, e.1) {
                        return Err(bad("edge is not in the graph"));
                    }
                    if kind == "test" { test.push(e) } else { dropped.push(e) }
                }
                _ => return Err(bad("unrecognised record")),
            }
        }
        let missing = |what: &str| EvalError::SplitFile { line: 0, message: format!("missing `{what}` record") };
        let seed = seed.ok_or_else(|| missing("seed"))?;
        let fraction: f64 = fraction.ok_or_else(|| missing("fraction"))?;
        let removed: BTreeSet<Edge> = test.iter().chain(&dropped).copied().collect();
        let train = original.without_edges(&removed);
        test.sort_unstable();
        dropped.sort_unstable();
        Ok(Self { train, test_edges: test, dropped_test_edges: dropped, seed, fraction })
    }
}

/// Holds out `⌊fraction·|E|⌋` edges chosen uniformly without replacement.
/// Held-out edges with an endpoint that has no remaining training edge are
/// moved to `dropped_test_edges`.
pub fn split_edges(g: &Graph, fraction: f64, seed: u64) -> Result<EdgeSplit, EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::Fraction(fraction));
    }
    let edges: Vec<Edge> = g.edges().collect();
    let count = (fraction * edges.len() as f64).floor() as usize;
    if count == 0 {
        return Err(EvalError::EmptySample { fraction, edges: edges.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: BTreeSet<Edge> =
        rand::seq::index::sample(&mut rng, edges.len(), count).into_iter().map(|i| edges[i]).collect();
    let train = g.without_edges(&sampled);
    let (test_edges, dropped_test_edges) = sampled
        .into_iter()
        .partition(|&(u, v)| train.total_degree(u) > 0 && train.total_degree(v) > 0);
    Ok(EdgeSplit { train, test_edges, dropped_test_edges, seed, fraction })
}

/// Cumulative counts and rates at one threshold: every candidate scoring at
/// least `threshold` is predicted positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    pub precision: f64,
    pub recall: f64,
    pub fpr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    /// One point per distinct score, by descending threshold; the last one is
    /// the zero bucket when it is non-empty.
    pub points: Vec<CurvePoint>,
    pub aupr: f64,
    pub auroc: f64,
    pub positives_total: u64,
    pub negatives_total: u64,
}

impl EvaluationReport {
    /// `(recall, precision)` by ascending recall.
    pub fn pr_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.recall, p.precision)).collect()
    }

    /// `(fpr, tpr)` by ascending fpr.
    pub fn roc_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.fpr, p.recall)).collect()
    }

    pub fn write_pr_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "recall,precision")?;
        for p in &self.points {
            writeln!(w, "{:?},{:?}", p.recall, p.precision)?;
        }
        w.flush()
    }

    pub fn write_roc_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "fpr,tpr")?;
        for p in &self.points {
            writeln!(w, "{:?},{:?}", p.fpr, p.recall)?;
        }
        w.flush()
    }
}

/// Turns a histogram into PR and ROC curves by one descending prefix sum.
pub fn build_curves(h: &ThresholdHistogram) -> Result<EvaluationReport, EvalError> {
    h.check_conservation()?;
    let (pos, neg) = (h.positives_total, h.negatives_total);
    if pos == 0 {
        return Err(EvalError::NoPositives);
    }
    if neg == 0 {
        return Err(EvalError::NoNegatives);
    }
    let zero = (h.zero.total() > 0).then_some((0.0, h.zero));
    let mut points = Vec::with_capacity(h.buckets.len() + 1);
    let (mut tp, mut fp) = (0u64, 0u64);
    for (threshold, counts) in h.buckets.iter().map(|b| (b.score, b.counts)).chain(zero) {
        tp += counts.tp;
        fp += counts.fp;
        points.push(CurvePoint {
            threshold,
            tp,
            fp,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / pos as f64,
            fpr: fp as f64 / neg as f64,
        });
    }
    let pr: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    let roc: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.recall)).collect();
    Ok(EvaluationReport {
        aupr: area_under_pr(&pr)?,
        auroc: area_under_roc(&roc)?,
        points,
        positives_total: pos,
        negatives_total: neg,
    })
}

/// Step integral `Σ precision_i · (recall_i − recall_{i−1})`, with the curve
/// starting at recall 0. Points are `(recall, precision)`.
pub fn area_under_pr(points: &[(f64, f64)]) -> Result<f64, EvalError> {
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for &(recall, precision) in points {
        if recall < prev_recall {
            return Err(EvalError::Unsorted("recall"));
        }
        area += precision * (recall - prev_recall);
        prev_recall = recall;
    }
    Ok(area)
}

/// Trapezoidal area under `(fpr, tpr)` points, starting from `(0, 0)`.
pub fn area_under_roc(points: &[(f64, f64)]) -> Result<f64, EvalError> {
    let mut area = 0.0;
    let (mut x0, mut y0) = (0.0, 0.0);
    for &(x, y) in points {
        if x < x0 || y < y0 {
            return Err(EvalError::Unsorted("false positive rate"));
        }
        area += (x - x0) * (y + y0) / 2.0;
        (x0, y0) = (x, y);
    }
    Ok(area)
}
