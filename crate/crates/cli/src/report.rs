//! Per-score summary records and cross-score comparison.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// One scored run, written as `summary.json` next to its curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub score: String,
    pub k: f64,
    pub log_base: String,
    pub graph: String,
    pub seed: u64,
    pub fraction: f64,
    pub train_vertices: usize,
    pub train_edges: usize,
    pub eligible_vertices: usize,
    pub test_edges: usize,
    pub dropped_test_edges: usize,
    pub positives: u64,
    pub negatives: u64,
    pub explicit_candidates: u64,
    pub distinct_scores: usize,
    pub aupr: f64,
    pub auroc: f64,
    pub threads: usize,
    pub chunk_size: usize,
    pub wall_seconds: f64,
}

impl Summary {
    pub const CSV_HEADER: &'static str = "score,k,log_base,seed,fraction,positives,negatives,aupr,auroc,threads,chunk_size,wall_seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.5},{:.5},{},{},{:.3}",
            self.score,
            self.k,
            self.log_base,
            self.seed,
            self.fraction,
            self.positives,
            self.negatives,
            self.aupr,
            self.auroc,
            self.threads,
            self.chunk_size,
            self.wall_seconds
        )
    }

    fn split_key(&self) -> (&str, u64, u64, usize, u64, u64) {
        (&self.graph, self.seed, self.fraction.to_bits(), self.test_edges, self.positives, self.negatives)
    }
}

/// AUPR of every score and the pairwise improvement table.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub scores: Vec<(String, f64)>,
    /// `improvement[i][j]` is the percentage by which score `i` improves on
    /// score `j`.
    pub improvement: Vec<Vec<f64>>,
}

/// `(a / b − 1) · 100`.
pub fn improvement_percent(a: f64, b: f64) -> f64 {
    (a / b - 1.0) * 100.0
}

/// Ranks reports by AUPR. All reports must come from the same split.
pub fn compare_reports(reports: &[Summary]) -> Result<Comparison> {
    if reports.len() < 2 {
        bail!("need at least two reports to compare, got {}", reports.len());
    }
    let key = reports[0].split_key();
    for r in &reports[1..] {
        if r.split_key() != key {
            bail!(
                "reports `{}` and `{}` were evaluated on different splits (graph, seed, fraction or class counts differ)",
                reports[0].score,
                r.score
            );
        }
    }
    let mut ranked: Vec<&Summary> = reports.iter().collect();
    ranked.sort_by(|a, b| b.aupr.total_cmp(&a.aupr));
    let scores: Vec<(String, f64)> = ranked.iter().map(|r| (r.score.clone(), r.aupr)).collect();
    let improvement = scores
        .iter()
        .map(|(_, a)| scores.iter().map(|(_, b)| improvement_percent(*a, *b)).collect())
        .collect();
    Ok(Comparison { scores, improvement })
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "score,aupr")?;
        for (name, _) in &self.scores {
            write!(w, ",vs_{name}")?;
        }
        writeln!(w)?;
        for ((name, aupr), row) in self.scores.iter().zip(&self.improvement) {
            write!(w, "{name},{aupr:.5}")?;
            for pct in row {
                write!(w, ",{pct:.2}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn table(&self) -> String {
        let width = self.scores.iter().map(|(n, _)| n.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}  {:>8}", "score", "AUPR");
        for (name, _) in &self.scores {
            let _ = write!(out, "  {:>width$}", format!("vs {name}"), width = width + 3);
        }
        out.push('\n');
        for ((name, aupr), row) in self.scores.iter().zip(&self.improvement) {
            let _ = write!(out, "{name:<width$}  {aupr:>8.5}");
            for pct in row {
                let _ = write!(out, "  {:>width$}", format!("{pct:+.2}%"), width = width + 3);
            }
            out.push('\n');
        }
        out
    }
}
