//! Exhaustive scoring of every missing edge.
//!
//! For each source vertex `n1` the engine walks all 2-hop paths
//! `n1 → n2 → n3`, accumulating per-target evidence in dense scratch arrays,
//! then turns every reached target into a score and folds it straight into a
//! per-worker [`ThresholdHistogram`]. Candidate scores are never stored.
//!
//! Path orientations:
//!
//! * undirected scores walk `Γ(n1) → Γ(n2)`;
//! * the deductive term walks `A(n1) → A(n2)` (paths `n1 → z → y`);
//! * the inductive term walks `D(n1) → A(n2)` (paths `n1 ← z → y`).
//!
//! Candidates never reached by a path score 0. They are not enumerated: the
//! zero bucket is completed from [`universe_stats`].
//!
//! Source vertices are handed out in fixed-size chunks from a shared atomic
//! counter, so idle workers pull the next chunk on demand. Each worker owns
//! its histograms; they are merged once at the end. Counts are integers keyed
//! by the exact bit pattern of the score, so the result does not depend on the
//! worker count, the chunk size, or which worker processed which chunk.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::thread;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::graph::{Edge, Graph, VertexId};
use crate::scores::{self, ScoreSpec};

pub const DEFAULT_CHUNK_SIZE: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("test edge ({0}, {1}) is also a training edge")]
    TestEdgeInTraining(VertexId, VertexId),
    #[error("test edge ({0}, {1}) has an endpoint with no training edges")]
    IneligibleTestEndpoint(VertexId, VertexId),
    #[error("test edge ({0}, {1}) is a self-loop")]
    TestSelfLoop(VertexId, VertexId),
    #[error("test edge ({u}, {v}) is outside a graph of {vertex_count} vertices")]
    TestEdgeOutOfRange { u: VertexId, v: VertexId, vertex_count: usize },
    #[error("chunk size must be at least 1")]
    ZeroChunkSize,
    #[error("at least one score must be requested")]
    NoScores,
    #[error("histogram for `{score}` exceeded the cap of {cap} distinct score values")]
    TooManyBuckets { score: String, cap: usize },
    #[error("counter overflow while merging histograms")]
    CountOverflow,
    #[error("histogram conservation violated: {0}")]
    Conservation(String),
    #[error("worker thread panicked")]
    WorkerPanic,
}

/// A set of directed edges indexed by source, used for O(log d) membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl EdgeSet {
    /// Builds the set over vertices `0..vertex_count`. Duplicates collapse.
    /// Panics if an endpoint is out of range.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let sorted: BTreeSet<Edge> = edges.into_iter().collect();
        let mut offsets = vec![0usize; vertex_count + 1];
        for &(u, v) in &sorted {
            assert!((u as usize) < vertex_count && (v as usize) < vertex_count, "edge out of range");
            offsets[u as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = sorted.iter().map(|&(_, v)| v).collect();
        Self { offsets, targets }
    }

    pub fn empty(vertex_count: usize) -> Self {
        Self::new(vertex_count, std::iter::empty())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn targets(&self, u: VertexId) -> &[VertexId] {
        let u = u as usize;
        if u >= self.vertex_count() {
            return &[];
        }
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn contains(&self, u: VertexId, v: VertexId) -> bool {
        self.targets(u).binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.vertex_count() as VertexId)
            .flat_map(move |u| self.targets(u).iter().map(move |&v| (u, v)))
    }
}

/// The vertices that may appear in a candidate edge and the number of
/// candidate ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateUniverse {
    /// `eligible[v]` iff `v` has at least one training edge.
    pub eligible: Vec<bool>,
    pub eligible_count: usize,
    /// `m·(m−1) − |E_train|`: ordered pairs of distinct eligible vertices that
    /// are not training edges.
    pub universe_size: u64,
}

impl CandidateUniverse {
    pub fn is_eligible(&self, v: VertexId) -> bool {
        self.eligible.get(v as usize).copied().unwrap_or(false)
    }
}

/// Candidate-universe accounting for a training graph.
///
/// Every training edge joins two eligible vertices, so all of them are
/// subtracted. The test set does not change the universe: held-out positives
/// are candidates like any other non-edge.
pub fn universe_stats(g: &Graph, _test: &EdgeSet) -> CandidateUniverse {
    let eligible: Vec<bool> =
        (0..g.vertex_count() as VertexId).map(|v| g.total_degree(v) > 0).collect();
    let m = eligible.iter().filter(|&&e| e).count() as u64;
    let pairs = m * m.saturating_sub(1);
    CandidateUniverse {
        eligible,
        eligible_count: m as usize,
        universe_size: pairs - g.edge_count() as u64,
    }
}

/// True-positive and false-positive counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
}

impl Counts {
    fn checked_add(self, other: Counts) -> Option<Counts> {
        Some(Counts { tp: self.tp.checked_add(other.tp)?, fp: self.fp.checked_add(other.fp)? })
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bucket {
    pub score: f64,
    pub counts: Counts,
}

/// Per-distinct-score tallies of true and false positives over the whole
/// candidate universe.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdHistogram {
    /// Non-zero scores, strictly descending.
    pub buckets: Vec<Bucket>,
    /// Every candidate scoring exactly 0.
    pub zero: Counts,
    pub positives_total: u64,
    pub negatives_total: u64,
}

impl ThresholdHistogram {
    /// Builds a histogram from explicit non-zero tallies (any order, distinct
    /// keys) and fills the zero bucket from the class totals.
    pub fn from_nonzero(
        mut buckets: Vec<Bucket>,
        positives_total: u64,
        negatives_total: u64,
    ) -> Result<Self, EngineError> {
        buckets.sort_by(|a, b| b.score.total_cmp(&a.score));
        let mut explicit = Counts::default();
        for b in &buckets {
            explicit = explicit.checked_add(b.counts).ok_or(EngineError::CountOverflow)?;
        }
        let zero = Counts {
            tp: positives_total.checked_sub(explicit.tp).ok_or_else(|| {
                EngineError::Conservation(format!(
                    "{} explicit true positives exceed {} positives",
                    explicit.tp, positives_total
                ))
            })?,
            fp: negatives_total.checked_sub(explicit.fp).ok_or_else(|| {
                EngineError::Conservation(format!(
                    "{} explicit false positives exceed {} negatives",
                    explicit.fp, negatives_total
                ))
            })?,
        };
        let h = Self { buckets, zero, positives_total, negatives_total };
        h.check_conservation()?;
        Ok(h)
    }

    pub fn check_conservation(&self) -> Result<(), EngineError> {
        let mut sum = self.zero;
        for (i, b) in self.buckets.iter().enumerate() {
            if !(b.score > 0.0 && b.score.is_finite()) {
                return Err(EngineError::Conservation(format!("bucket score {} is not positive", b.score)));
            }
            if b.counts.total() == 0 {
                return Err(EngineError::Conservation(format!("bucket {} is empty", b.score)));
            }
            if i > 0 && self.buckets[i - 1].score <= b.score {
                return Err(EngineError::Conservation("buckets not strictly descending".into()));
            }
            sum = sum.checked_add(b.counts).ok_or(EngineError::CountOverflow)?;
        }
        if sum.tp != self.positives_total || sum.fp != self.negatives_total {
            return Err(EngineError::Conservation(format!(
                "tallies ({}, {}) do not match totals ({}, {})",
                sum.tp, sum.fp, self.positives_total, self.negatives_total
            )));
        }
        Ok(())
    }

    /// Writes `score tp fp` lines by descending score, then `zero tp fp` and
    /// `total positives negatives` trailer lines. Scores use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# score tp fp")?;
        for b in &self.buckets {
            writeln!(w, "{:?} {} {}", b.score, b.counts.tp, b.counts.fp)?;
        }
        writeln!(w, "zero {} {}", self.zero.tp, self.zero.fp)?;
        writeln!(w, "total {} {}", self.positives_total, self.negatives_total)?;
        w.flush()
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self, DumpError> {
        let mut buckets = Vec::new();
        let mut zero = None;
        let mut total = None;
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || DumpError::Parse(idx + 1);
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [head, a, b] = fields[..] else { return Err(bad()) };
            let a: u64 = a.parse().map_err(|_| bad())?;
            let b: u64 = b.parse().map_err(|_| bad())?;
            match head {
                "zero" => zero = Some(Counts { tp: a, fp: b }),
                "total" => total = Some((a, b)),
                s => {
                    let score: f64 = s.parse().map_err(|_| bad())?;
                    buckets.push(Bucket { score, counts: Counts { tp: a, fp: b } });
                }
            }
        }
        let (zero, (positives_total, negatives_total)) =
            zero.zip(total).ok_or(DumpError::MissingTrailer)?;
        let h = Self { buckets, zero, positives_total, negatives_total };
        h.check_conservation()?;
        Ok(h)
    }
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed histogram line {0}")]
    Parse(usize),
    #[error("histogram dump lacks its `zero` or `total` line")]
    MissingTrailer,
    #[error(transparent)]
    Invalid(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub threads: usize,
    pub chunk_size: usize,
    /// Hard cap on distinct non-zero score values per histogram.
    pub max_buckets: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            threads: thread::available_parallelism().map_or(1, |n| n.get()),
            chunk_size: DEFAULT_CHUNK_SIZE,
            max_buckets: None,
        }
    }
}

impl EngineConfig {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size;
        self
    }
}

/// Work accounting for one engine invocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub sources_scored: u64,
    /// Sources with no training edges.
    pub sources_skipped: u64,
    /// Candidates reached by at least one 2-hop path.
    pub explicit_candidates: u64,
    pub threads: usize,
    pub chunk_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiRun {
    /// One histogram per requested spec, in request order.
    pub histograms: Vec<ThresholdHistogram>,
    pub universe: CandidateUniverse,
    pub stats: RunStats,
}

type LocalHistogram = FxHashMap<u64, Counts>;

/// Non-zero tallies produced by one source vertex.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VertexContribution {
    /// `(score, counts)` pairs sorted by descending score.
    pub buckets: Vec<Bucket>,
    /// Candidates `(n1, y)` reached by at least one path, including those
    /// whose score evaluates to 0.
    pub explicit_candidates: u64,
    /// True when `n1` has no training edges and was not scored.
    pub skipped: bool,
}

/// Which accumulators a set of specs needs, and where each spec reads from.
struct Plan {
    specs: Vec<ScoreSpec>,
    undirected: bool,
    ded: bool,
    ind: bool,
    /// For AA/RA specs: index into the float accumulators.
    float_slot: Vec<Option<usize>>,
}

impl Plan {
    fn new(specs: &[ScoreSpec]) -> Self {
        let mut float_slot = Vec::with_capacity(specs.len());
        let mut slots = 0;
        for s in specs {
            if matches!(s.kind, scores::ScoreKind::Aa | scores::ScoreKind::Ra) {
                float_slot.push(Some(slots));
                slots += 1;
            } else {
                float_slot.push(None);
            }
        }
        Self {
            specs: specs.to_vec(),
            undirected: specs.iter().any(|s| s.kind.is_undirected()),
            ded: specs.iter().any(|s| s.kind.uses_ded()),
            ind: specs.iter().any(|s| s.kind.uses_ind()),
            float_slot,
        }
    }

    fn float_slots(&self) -> usize {
        self.float_slot.iter().flatten().count()
    }
}

/// Per-worker scratch space, sized to the vertex count and reset sparsely.
struct Scratch {
    touched: Vec<VertexId>,
    seen: Vec<u32>,
    out_mark: Vec<u32>,
    test_mark: Vec<u32>,
    common: Vec<u32>,
    ded: Vec<u32>,
    ind: Vec<u32>,
    sums: Vec<Vec<f64>>,
    terms: Vec<f64>,
}

impl Scratch {
    fn new(n: usize, plan: &Plan) -> Self {
        let sized = |on: bool| if on { vec![0u32; n] } else { Vec::new() };
        Self {
            touched: Vec::new(),
            seen: vec![0; n],
            out_mark: vec![0; n],
            test_mark: vec![0; n],
            common: sized(plan.undirected),
            ded: sized(plan.ded),
            ind: sized(plan.ind),
            sums: (0..plan.float_slots()).map(|_| vec![0.0; n]).collect(),
            terms: vec![0.0; plan.float_slots()],
        }
    }

    #[inline]
    fn touch(&mut self, y: VertexId, stamp: u32) {
        let s = &mut self.seen[y as usize];
        if *s != stamp {
            *s = stamp;
            self.touched.push(y);
        }
    }
}

/// Scores every candidate `(n1, y)` reachable by a 2-hop path and folds the
/// non-zero ones into `hists` (one per spec). Returns the number of
/// explicitly reached candidates.
fn score_source(
    g: &Graph,
    n1: VertexId,
    plan: &Plan,
    test: &EdgeSet,
    scratch: &mut Scratch,
    hists: &mut [LocalHistogram],
) -> u64 {
    // Stamps are n1 + 1 so that the zero-initialised arrays mean "unset".
    let stamp = n1 + 1;
    scratch.touched.clear();

    if plan.undirected {
        let gamma = g.undirected();
        for &z in gamma.row(n1) {
            let deg = gamma.degree(z);
            // z's only neighbor is n1 itself: no candidate through z.
            if deg < 2 {
                continue;
            }
            for (i, spec) in plan.specs.iter().enumerate() {
                if let Some(slot) = plan.float_slot[i] {
                    scratch.terms[slot] = match spec.kind {
                        scores::ScoreKind::Aa => scores::aa_term(deg, spec.log_base),
                        _ => scores::ra_term(deg),
                    };
                }
            }
            for &y in gamma.row(z) {
                scratch.touch(y, stamp);
                scratch.common[y as usize] += 1;
                for (slot, sums) in scratch.sums.iter_mut().enumerate() {
                    sums[y as usize] += scratch.terms[slot];
                }
            }
        }
    }
    if plan.ded {
        for &z in g.out_neighbors(n1) {
            for &y in g.out_neighbors(z) {
                scratch.touch(y, stamp);
                scratch.ded[y as usize] += 1;
            }
        }
    }
    if plan.ind {
        for &z in g.in_neighbors(n1) {
            for &y in g.out_neighbors(z) {
                scratch.touch(y, stamp);
                scratch.ind[y as usize] += 1;
            }
        }
    }

    for &y in g.out_neighbors(n1) {
        scratch.out_mark[y as usize] = stamp;
    }
    for &y in test.targets(n1) {
        scratch.test_mark[y as usize] = stamp;
    }

    let gamma_len = if plan.undirected { g.undirected().degree(n1) } else { 0 };
    let out_len = g.out_degree(n1);
    let in_len = g.in_degree(n1);
    let mut explicit = 0u64;

    for idx in 0..scratch.touched.len() {
        let y = scratch.touched[idx];
        let yi = y as usize;
        if y != n1 && scratch.out_mark[yi] != stamp {
            explicit += 1;
            let positive = scratch.test_mark[yi] == stamp;
            for (i, spec) in plan.specs.iter().enumerate() {
                let score = match spec.kind {
                    scores::ScoreKind::Cn => scratch.common[yi] as f64,
                    scores::ScoreKind::Jaccard => scores::jaccard_from_counts(
                        scratch.common[yi] as usize,
                        gamma_len,
                        g.undirected().degree(y),
                    ),
                    scores::ScoreKind::Aa | scores::ScoreKind::Ra => {
                        scratch.sums[plan.float_slot[i].expect("float slot")][yi]
                    }
                    _ => scores::hierarchical_from_counts(
                        spec,
                        if plan.ded { scratch.ded[yi] as usize } else { 0 },
                        out_len,
                        if plan.ind { scratch.ind[yi] as usize } else { 0 },
                        in_len,
                    ),
                };
                if score != 0.0 {
                    let c = hists[i].entry(score.to_bits()).or_default();
                    if positive {
                        c.tp += 1;
                    } else {
                        c.fp += 1;
                    }
                }
            }
        }
        if plan.undirected {
            scratch.common[yi] = 0;
        }
        if plan.ded {
            scratch.ded[yi] = 0;
        }
        if plan.ind {
            scratch.ind[yi] = 0;
        }
        for sums in &mut scratch.sums {
            sums[yi] = 0.0;
        }
    }
    explicit
}

fn validate_test(g: &Graph, test: &EdgeSet, universe: &CandidateUniverse) -> Result<(), EngineError> {
    for (u, v) in test.iter() {
        if u as usize >= g.vertex_count() || v as usize >= g.vertex_count() {
            return Err(EngineError::TestEdgeOutOfRange { u, v, vertex_count: g.vertex_count() });
        }
        if u == v {
            return Err(EngineError::TestSelfLoop(u, v));
        }
        if g.has_edge(u, v) {
            return Err(EngineError::TestEdgeInTraining(u, v));
        }
        if !universe.is_eligible(u) || !universe.is_eligible(v) {
            return Err(EngineError::IneligibleTestEndpoint(u, v));
        }
    }
    Ok(())
}

/// The contribution of a single source vertex for one spec.
pub fn score_from_vertex(
    g: &Graph,
    n1: VertexId,
    spec: &ScoreSpec,
    test: &EdgeSet,
) -> VertexContribution {
    if g.total_degree(n1) == 0 {
        return VertexContribution { skipped: true, ..Default::default() };
    }
    let plan = Plan::new(std::slice::from_ref(spec));
    let mut scratch = Scratch::new(g.vertex_count(), &plan);
    let mut hist = vec![LocalHistogram::default()];
    let explicit = score_source(g, n1, &plan, test, &mut scratch, &mut hist);
    let mut buckets: Vec<Bucket> = hist
        .pop()
        .expect("one histogram")
        .into_iter()
        .map(|(bits, counts)| Bucket { score: f64::from_bits(bits), counts })
        .collect();
    buckets.sort_by(|a, b| b.score.total_cmp(&a.score));
    VertexContribution { buckets, explicit_candidates: explicit, skipped: false }
}

struct WorkerOutput {
    hists: Vec<LocalHistogram>,
    scored: u64,
    skipped: u64,
    explicit: u64,
}

/// Scores the whole candidate universe for one spec.
pub fn score_all(
    g: &Graph,
    spec: &ScoreSpec,
    test: &EdgeSet,
    config: &EngineConfig,
) -> Result<ThresholdHistogram, EngineError> {
    let mut run = score_all_multi(g, std::slice::from_ref(spec), test, config)?;
    Ok(run.histograms.pop().expect("one histogram"))
}

/// Scores the whole candidate universe for several specs, sharing path
/// traversals between them. Each histogram equals the one [`score_all`]
/// produces for that spec alone.
pub fn score_all_multi(
    g: &Graph,
    specs: &[ScoreSpec],
    test: &EdgeSet,
    config: &EngineConfig,
) -> Result<MultiRun, EngineError> {
    if specs.is_empty() {
        return Err(EngineError::NoScores);
    }
    if config.chunk_size == 0 {
        return Err(EngineError::ZeroChunkSize);
    }
    let universe = universe_stats(g, test);
    validate_test(g, test, &universe)?;
    let plan = Plan::new(specs);
    if plan.undirected {
        g.undirected();
    }

    let n = g.vertex_count();
    let threads = config.threads.max(1);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);

    let worker = || -> Result<WorkerOutput, EngineError> {
        let mut scratch = Scratch::new(n, &plan);
        let mut out = WorkerOutput {
            hists: vec![LocalHistogram::default(); specs.len()],
            scored: 0,
            skipped: 0,
            explicit: 0,
        };
        loop {
            let start = next.fetch_add(config.chunk_size, Ordering::Relaxed);
            if start >= n || abort.load(Ordering::Relaxed) {
                break;
            }
            let end = (start + config.chunk_size).min(n);
            for v in start..end {
                let v = v as VertexId;
                if !universe.eligible[v as usize] {
                    out.skipped += 1;
                    continue;
                }
                out.scored += 1;
                out.explicit += score_source(g, v, &plan, test, &mut scratch, &mut out.hists);
            }
            if let Some(cap) = config.max_buckets {
                if let Some(i) = out.hists.iter().position(|h| h.len() > cap) {
                    abort.store(true, Ordering::Relaxed);
                    return Err(EngineError::TooManyBuckets { score: specs[i].to_string(), cap });
                }
            }
        }
        Ok(out)
    };

    let outputs: Vec<Result<WorkerOutput, EngineError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..threads).map(|_| s.spawn(worker)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Err(EngineError::WorkerPanic)))
            .collect()
    });

    let mut merged = vec![LocalHistogram::default(); specs.len()];
    let mut stats = RunStats { threads, chunk_size: config.chunk_size, ..Default::default() };
    for out in outputs {
        let out = out?;
        stats.sources_scored += out.scored;
        stats.sources_skipped += out.skipped;
        stats.explicit_candidates += out.explicit;
        for (into, from) in merged.iter_mut().zip(out.hists) {
            if into.is_empty() {
                *into = from;
                continue;
            }
            for (bits, c) in from {
                let e = into.entry(bits).or_default();
                *e = e.checked_add(c).ok_or(EngineError::CountOverflow)?;
            }
        }
    }

    let positives = test.len() as u64;
    let negatives = universe.universe_size.checked_sub(positives).ok_or_else(|| {
        EngineError::Conservation("more positives than candidates".into())
    })?;
    let mut histograms = Vec::with_capacity(specs.len());
    for (spec, hist) in specs.iter().zip(merged) {
        if let Some(cap) = config.max_buckets {
            if hist.len() > cap {
                return Err(EngineError::TooManyBuckets { score: spec.to_string(), cap });
            }
        }
        let buckets = hist
            .into_iter()
            .map(|(bits, counts)| Bucket { score: f64::from_bits(bits), counts })
            .collect();
        histograms.push(ThresholdHistogram::from_nonzero(buckets, positives, negatives)?);
    }
    Ok(MultiRun { histograms, universe, stats })
}
