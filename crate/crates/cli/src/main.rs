//! `linkpred`: load a graph, hold out a test set, score every missing edge
//! and write precision-recall / ROC results.

mod report;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use linkpred::engine::{score_all_multi, EngineConfig, DEFAULT_CHUNK_SIZE};
use linkpred::eval::{build_curves, split_edges, EdgeSplit, DEFAULT_FRACTION};
use linkpred::graph::{load_edge_list, EdgeListFormat};
use linkpred::scores::{LogBase, ScoreKind, ScoreSpec};

use report::{compare_reports, Summary};

#[derive(Parser)]
#[command(name = "linkpred", version, about = "Exhaustive link prediction with exact precision-recall evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a graph, score every candidate edge and write curves.
    Run(RunConfig),
    /// Rank previously written summary.json files by AUPR.
    Compare {
        /// summary.json files from runs on the same split.
        #[arg(required = true, num_args = 2..)]
        summaries: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Edge list: one `source target` pair per line, `#` comments.
    #[arg(long, env = "LINKPRED_GRAPH")]
    graph: PathBuf,
    /// Vertex id format: `int` (SNAP-style integers) or `token`.
    #[arg(long, env = "LINKPRED_FORMAT", default_value = "int")]
    format: EdgeListFormat,
    /// Comma-separated scores: cn, aa, ra, jaccard, ded, ind, inf, inf_log,
    /// inf_log_kd (optionally inf_log_kd:k=<real>).
    #[arg(long, env = "LINKPRED_SCORE", value_delimiter = ',', default_value = "cn,aa,ra,inf_log_kd")]
    score: Vec<String>,
    /// Deductive multiplier for inf_log_kd scores given without an explicit k.
    #[arg(long, env = "LINKPRED_K", default_value_t = ScoreSpec::DEFAULT_K)]
    k: f64,
    /// Logarithm base: `e` or a number greater than 1.
    #[arg(long, env = "LINKPRED_LOG_BASE", default_value = "e")]
    log_base: LogBase,
    /// Fraction of edges held out as positives.
    #[arg(long, env = "LINKPRED_SPLIT_FRACTION", default_value_t = DEFAULT_FRACTION)]
    split_fraction: f64,
    #[arg(long, env = "LINKPRED_SEED", default_value_t = 1)]
    seed: u64,
    /// Reuse this split if the file exists; otherwise write the new split here.
    #[arg(long, env = "LINKPRED_SPLIT_FILE")]
    split_file: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "LINKPRED_THREADS")]
    threads: Option<usize>,
    /// Source vertices per scheduling chunk.
    #[arg(long, env = "LINKPRED_CHUNK_SIZE", default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    /// Fail if any score produces more distinct values than this.
    #[arg(long, env = "LINKPRED_MAX_BUCKETS")]
    max_buckets: Option<usize>,
    #[arg(long, env = "LINKPRED_OUT", default_value = "linkpred-out")]
    out: PathBuf,
}

impl RunConfig {
    fn specs(&self) -> Result<Vec<ScoreSpec>> {
        let mut specs: Vec<ScoreSpec> = Vec::new();
        for token in &self.score {
            let mut spec: ScoreSpec = token.parse()?;
            let bare = !token.contains(':') && !token.eq_ignore_ascii_case("inf_log_2d");
            if spec.kind == ScoreKind::InfLogKd && bare {
                spec = spec.with_k(self.k)?;
            }
            spec = spec.with_log_base(self.log_base);
            if specs.contains(&spec) {
                bail!("score `{spec}` requested twice");
            }
            specs.push(spec);
        }
        if specs.is_empty() {
            bail!("no scores requested");
        }
        Ok(specs)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn score_dir_name(spec: &ScoreSpec) -> String {
    spec.to_string().replace([':', '='], "_")
}

fn run_experiment(cfg: &RunConfig) -> Result<Vec<Summary>> {
    let specs = cfg.specs()?;
    if cfg.chunk_size == 0 {
        bail!("--chunk-size must be at least 1");
    }
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;

    let file = File::open(&cfg.graph).with_context(|| format!("opening {}", cfg.graph.display()))?;
    let (graph, stats) = load_edge_list(BufReader::new(file), cfg.format)
        .with_context(|| format!("reading {}", cfg.graph.display()))?;
    eprintln!(
        "loaded {}: {} vertices, {} edges ({} read, {} duplicates and {} self-loops dropped)",
        cfg.graph.display(),
        graph.vertex_count(),
        graph.edge_count(),
        stats.raw_edges,
        stats.duplicate_edges,
        stats.self_loops
    );

    let split = match &cfg.split_file {
        Some(path) if path.exists() => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let split = EdgeSplit::read(&graph, BufReader::new(f))
                .with_context(|| format!("reading split {}", path.display()))?;
            eprintln!("reusing split {} (seed {}, fraction {})", path.display(), split.seed, split.fraction);
            split
        }
        _ => {
            let split = split_edges(&graph, cfg.split_fraction, cfg.seed)?;
            if let Some(path) = &cfg.split_file {
                split.write(create(path)?)?;
            }
            split
        }
    };
    split.write(create(&cfg.out.join("split.txt"))?)?;
    eprintln!(
        "split: {} test edges, {} dropped (disconnected endpoint), {} training edges",
        split.test_edges.len(),
        split.dropped_test_edges.len(),
        split.train.edge_count()
    );

    let test = split.test_set();
    let engine = EngineConfig {
        threads: cfg.threads.unwrap_or_else(|| EngineConfig::default().threads).max(1),
        chunk_size: cfg.chunk_size,
        max_buckets: cfg.max_buckets,
    };

    let mut summaries = Vec::new();
    for spec in &specs {
        let start = Instant::now();
        let run = score_all_multi(&split.train, std::slice::from_ref(spec), &test, &engine)
            .with_context(|| format!("scoring {spec}"))?;
        let wall = start.elapsed().as_secs_f64();
        let hist = &run.histograms[0];
        let curves = build_curves(hist).with_context(|| format!("evaluating {spec}"))?;

        let dir = cfg.out.join(score_dir_name(spec));
        fs::create_dir_all(&dir)?;
        hist.write_dump(create(&dir.join("histogram.txt"))?)?;
        curves.write_pr_csv(create(&dir.join("pr.csv"))?)?;
        curves.write_roc_csv(create(&dir.join("roc.csv"))?)?;

        let summary = Summary {
            score: spec.to_string(),
            k: spec.k,
            log_base: spec.log_base.to_string(),
            graph: cfg.graph.display().to_string(),
            seed: split.seed,
            fraction: split.fraction,
            train_vertices: split.train.vertex_count(),
            train_edges: split.train.edge_count(),
            eligible_vertices: run.universe.eligible_count,
            test_edges: split.test_edges.len(),
            dropped_test_edges: split.dropped_test_edges.len(),
            positives: hist.positives_total,
            negatives: hist.negatives_total,
            explicit_candidates: run.stats.explicit_candidates,
            distinct_scores: hist.buckets.len(),
            aupr: curves.aupr,
            auroc: curves.auroc,
            threads: run.stats.threads,
            chunk_size: run.stats.chunk_size,
            wall_seconds: wall,
        };
        serde_json::to_writer_pretty(create(&dir.join("summary.json"))?, &summary)?;
        eprintln!("{spec}: AUPR {:.5}, AUROC {:.5}, {wall:.2}s", summary.aupr, summary.auroc);
        summaries.push(summary);
    }

    let mut csv = String::from(Summary::CSV_HEADER);
    csv.push('\n');
    for s in &summaries {
        csv.push_str(&s.csv_row());
        csv.push('\n');
    }
    fs::write(cfg.out.join("summary.csv"), csv)?;

    if summaries.len() >= 2 {
        let cmp = compare_reports(&summaries)?;
        cmp.write_csv(create(&cfg.out.join("comparison.csv"))?)?;
        print!("{}", cmp.table());
    } else {
        println!("{}", summaries[0].csv_row());
    }
    Ok(summaries)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(cfg) => {
            run_experiment(&cfg)?;
        }
        Command::Compare { summaries } => {
            let reports = summaries
                .iter()
                .map(|p| -> Result<Summary> {
                    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            print!("{}", compare_reports(&reports)?.table());
        }
    }
    Ok(())
}
