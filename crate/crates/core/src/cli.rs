//! The `linkcomm` command-line tool.
//!
//! Exit status is 0 on success, 1 when the fit ends with edges of zero
//! expected multiplicity (the result is still written), and 2 for usage and
//! input errors.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    parse_grid, read_ground_truth_for, run_benchmark_sweep, score, write_table, GroundTruth, SweepAxis, SweepSpec,
};
use crate::error::{Error, Result};
use crate::fast::{run_fast_em, ColorDegrees, PruneConfig};
use crate::graph::{largest_component, read_edge_list, write_edge_list, Graph, LoadOptions};
use crate::membership::{
    edge_colors, extract_cover, read_results, save_results, write_results, Cover, ResultDocument, RunMetadata,
    RunSettings,
};
use crate::naive::{run_em, EmConfig};
use crate::nonoverlap::{block_edge_colors, run_nonoverlap, write_partition, BlockParams, NonoverlapConfig, Partition};
use crate::restarts::run_restarts;

#[derive(Debug, Parser)]
#[command(name = "linkcomm", version, about = "Overlapping and nonoverlapping community detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit overlapping communities and write the result document.
    Detect(DetectArgs),
    /// Fit, round and refine a hard partition.
    Nonoverlap(NonoverlapArgs),
    /// Score synthetic two-community networks along one parameter.
    Bench(BenchArgs),
    /// Compare a result with known communities.
    Score(ScoreArgs),
    /// Normalize an edge list, optionally keeping the largest component.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Edge list: `u v [count]` per line.
    pub input: PathBuf,
    /// Read lines as arcs and merge reciprocal pairs.
    #[arg(long)]
    pub symmetrize: bool,
    /// Integer vertex ids starting at this value instead of free-form labels.
    #[arg(long)]
    pub index_base: Option<u64>,
    /// Keep only the largest connected component.
    #[arg(long)]
    pub lcc: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Number of communities.
    #[arg(short = 'k', long = "communities")]
    pub k: usize,
    /// Random starts; the best likelihood wins.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, env = "LINKCOMM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "LINKCOMM_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Bit-stable results: sequential sweeps and no timing in the document.
    #[arg(long)]
    pub deterministic: bool,
    /// Pruning threshold for color degrees.
    #[arg(long, default_value_t = 0.001)]
    pub delta: f64,
    /// Keep sweeping edges whose endpoints have a single color each.
    #[arg(long)]
    pub no_freeze: bool,
    /// Convergence tolerance (color-degree change, or relative likelihood
    /// change with --naive).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iterations: usize,
    /// Result document path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Use the reference EM that stores every edge posterior.
    #[arg(long)]
    pub naive: bool,
}

#[derive(Debug, Clone, Args)]
pub struct NonoverlapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Fit a full mixing matrix instead of the diagonal model.
    #[arg(long)]
    pub general: bool,
    /// Skip the vertex-move refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Also write `label community` lines here.
    #[arg(long)]
    pub partition_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// degree-k, balance-x/y or overlap-z.
    #[arg(long)]
    pub axis: String,
    /// Grid values, `a,b,c` or `start:stop:step`; a default grid otherwise.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Expected degree when not on the axis.
    #[arg(long, default_value_t = 10.0)]
    pub degree: f64,
    /// Overlap size when not on the axis.
    #[arg(long, default_value_t = 500)]
    pub overlap: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, env = "LINKCOMM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "LINKCOMM_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value_t = 0.001)]
    pub delta: f64,
    /// Table path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    /// Known communities: `label community...` lines or a result document.
    pub truth: PathBuf,
    /// Detected communities, in either of the same formats.
    pub result: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output edge list; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("linkcomm: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command; returns the exit status.
pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Nonoverlap(args) => cmd_nonoverlap(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Score(args) => cmd_score(args),
        Command::Convert(args) => cmd_convert(args),
    }
}

fn load_graph(args: &InputArgs) -> Result<Graph> {
    let options = LoadOptions {
        symmetrize: args.symmetrize,
        index_base: args.index_base,
    };
    let g = read_edge_list(&args.input, &options)?;
    if args.lcc {
        Ok(largest_component(&g)?.0)
    } else {
        Ok(g)
    }
}

fn resolve_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
}

fn em_config(fit: &FitArgs, naive: bool) -> Result<EmConfig> {
    let mut em = EmConfig {
        max_iterations: fit.max_iterations,
        threads: resolve_threads(fit.threads),
        deterministic: fit.deterministic,
        ..EmConfig::default()
    };
    if let Some(tol) = fit.tolerance {
        if naive {
            em.ll_tolerance = tol;
        } else {
            em.k_tolerance = tol;
        }
    }
    em.validate()?;
    Ok(em)
}

fn prune_config(fit: &FitArgs) -> Result<PruneConfig> {
    let prune = PruneConfig {
        delta: fit.delta,
        freeze_edges: !fit.no_freeze,
    };
    prune.validate()?;
    Ok(prune)
}

fn settings(mode: &str, input: &InputArgs, fit: &FitArgs, em: &EmConfig, restarts: usize, pruned: bool) -> RunSettings {
    RunSettings {
        mode: mode.to_string(),
        input: Some(input.input.display().to_string()),
        k: fit.k,
        restarts,
        delta: pruned.then_some(fit.delta),
        freeze_edges: pruned.then_some(!fit.no_freeze),
        tolerance: if mode == "detect-naive" { em.ll_tolerance } else { em.k_tolerance },
        max_iterations: em.max_iterations,
        threads: em.threads,
        deterministic: em.deterministic,
        largest_component: input.lcc,
    }
}

fn emit(doc: &ResultDocument, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => save_results(doc, path),
        None => write_results(doc, io::stdout().lock()),
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("the number of communities must be at least 1".into()));
    }
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<u8> {
    let fit = &args.fit;
    check_k(fit.k)?;
    let restarts = fit.restarts.unwrap_or(100);
    let em = em_config(fit, args.naive)?;
    let prune = prune_config(fit)?;
    let g = load_graph(&args.input)?;
    let total_iterations = AtomicUsize::new(0);
    let start = Instant::now();
    let (degrees, ll, iterations, seed) = if args.naive {
        let sweep = run_restarts(
            restarts,
            fit.seed,
            em.threads,
            |s| {
                let run = run_em(&g, fit.k, &em, s)?;
                total_iterations.fetch_add(run.iterations, Ordering::Relaxed);
                Ok(run)
            },
            |r| r.log_likelihood,
        )?;
        let best = sweep.best;
        (ColorDegrees::from_params(&best.params), best.log_likelihood, best.iterations, best.seed)
    } else {
        let sweep = run_restarts(
            restarts,
            fit.seed,
            em.threads,
            |s| {
                let run = run_fast_em(&g, fit.k, &em, &prune, s)?;
                total_iterations.fetch_add(run.iterations, Ordering::Relaxed);
                Ok(run)
            },
            |r| r.log_likelihood,
        )?;
        let best = sweep.best;
        (best.degrees, best.log_likelihood, best.iterations, best.seed)
    };
    let seconds = start.elapsed().as_secs_f64();
    let cover = extract_cover(&g, &degrees)?;
    let coloring = edge_colors(&g, &degrees, &degrees.totals())?;
    let mode = if args.naive { "detect-naive" } else { "detect" };
    let meta = RunMetadata {
        config: settings(mode, &args.input, fit, &em, restarts, !args.naive),
        likelihood: ll,
        iterations,
        seconds: (!em.deterministic).then_some(seconds),
        seed,
    };
    let doc = ResultDocument::build(&g, &cover, &coloring, meta)?;
    emit(&doc, fit.output.as_deref())?;
    eprintln!(
        "log-likelihood {ll:.6}  iterations {} (best run {iterations})  seconds {seconds:.3}",
        total_iterations.load(Ordering::Relaxed)
    );
    eprintln!(
        "{} vertices in overlaps, {} unassigned",
        cover.overlap().len(),
        cover.unassigned().len()
    );
    Ok(if ll.is_finite() { 0 } else { 1 })
}

/// Cover view of a partition, with soft memberships as fractions.
fn partition_cover(g: &Graph, part: &Partition, params: &BlockParams) -> Result<Cover> {
    let communities = part.labels().iter().map(|r| r.iter().copied().collect()).collect();
    let fractions = (0..g.n()).map(|i| params.soft_membership(i)).collect();
    let isolated = (0..g.n()).map(|i| g.is_isolated(i)).collect();
    Cover::from_parts(part.k(), communities, fractions, isolated)
}

fn cmd_nonoverlap(args: &NonoverlapArgs) -> Result<u8> {
    let fit = &args.fit;
    check_k(fit.k)?;
    let restarts = fit.restarts.unwrap_or(10);
    let em = em_config(fit, args.general)?;
    let cfg = NonoverlapConfig {
        em: em.clone(),
        prune: prune_config(fit)?,
        general: args.general,
        refine: !args.no_refine,
        restarts,
    };
    let g = load_graph(&args.input)?;
    let start = Instant::now();
    let sweep = run_nonoverlap(&g, fit.k, &cfg, fit.seed)?;
    let seconds = start.elapsed().as_secs_f64();
    let best = sweep.best;
    let cover = partition_cover(&g, &best.partition, &best.params)?;
    let coloring = block_edge_colors(&g, &best.params)?;
    let mut config = settings("nonoverlap", &args.input, fit, &em, restarts, !args.general);
    if args.general {
        config.mode = "nonoverlap-general".into();
        config.tolerance = em.ll_tolerance;
    }
    let meta = RunMetadata {
        config,
        likelihood: best.log_likelihood,
        iterations: best.iterations,
        seconds: (!em.deterministic).then_some(seconds),
        seed: best.seed,
    };
    let doc = ResultDocument::build(&g, &cover, &coloring, meta)?;
    emit(&doc, fit.output.as_deref())?;
    if let Some(path) = &args.partition_out {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        write_partition(&g, &best.partition, &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))?;
    }
    eprintln!(
        "blockmodel log-likelihood {:.6}  (rounded {:.6}, {} moves)  fit log-likelihood {:.6}  seconds {seconds:.3}",
        best.log_likelihood,
        best.rounded_log_likelihood,
        best.moves.len(),
        best.em_log_likelihood
    );
    Ok(if best.em_log_likelihood.is_finite() { 0 } else { 1 })
}

fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let axis: SweepAxis = args.axis.parse()?;
    let prune = PruneConfig {
        delta: args.delta,
        ..PruneConfig::default()
    };
    prune.validate()?;
    let spec = SweepSpec {
        axis,
        grid: match &args.grid {
            Some(text) => parse_grid(text)?,
            None => axis.default_grid(),
        },
        n: args.n,
        degree: args.degree,
        overlap: args.overlap,
        reps: args.reps,
        restarts: args.restarts,
        seed: args.seed,
        em: EmConfig::default(),
        prune,
        threads: resolve_threads(args.threads),
    };
    let start = Instant::now();
    let rows = run_benchmark_sweep(&spec)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = BufWriter::new(file);
            write_table(&rows, &mut out)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        None => write_table(&rows, io::stdout().lock()).map_err(|e| Error::io("<stdout>", e))?,
    }
    eprintln!("{} rows in {:.3} seconds", rows.len(), start.elapsed().as_secs_f64());
    Ok(0)
}

/// Labels and per-vertex community names from a result document or from
/// `label community...` lines.
fn read_memberships(path: &Path) -> Result<(Vec<String>, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        let doc = read_results(path)?;
        let labels = doc.vertices.iter().map(|v| v.label.clone()).collect();
        let mut lines = String::new();
        for v in &doc.vertices {
            lines.push_str(&v.label);
            if v.communities.is_empty() {
                lines.push_str(" -");
            }
            for c in &v.communities {
                lines.push_str(&format!(" {c}"));
            }
            lines.push('\n');
        }
        Ok((labels, lines))
    } else {
        let mut seen = HashMap::new();
        let mut labels = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let label = line.split_whitespace().next().expect("nonempty line");
            if seen.insert(label.to_string(), ()).is_none() {
                labels.push(label.to_string());
            }
        }
        Ok((labels, text))
    }
}

fn cmd_score(args: &ScoreArgs) -> Result<u8> {
    let (labels, detected_text) = read_memberships(&args.result)?;
    let (_, truth_text) = read_memberships(&args.truth)?;
    let truth = read_ground_truth_for(&truth_text, &labels)?;
    let detected = read_ground_truth_for(&detected_text, &labels)?;
    let cover = Cover::from_memberships(detected.k(), detected.memberships().to_vec())?;
    let s = score(&truth, &cover);
    report_score(&truth, &s);
    Ok(0)
}

fn report_score(truth: &GroundTruth, s: &crate::bench::Score) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "vertices {}", truth.n());
    let _ = writeln!(out, "fraction-correct {:.6}", s.fraction_correct);
    let _ = writeln!(out, "jaccard {:.6}", s.jaccard);
    match s.nmi {
        Some(nmi) => {
            let _ = writeln!(out, "nmi {nmi:.6}");
        }
        None => {
            let _ = writeln!(out, "nmi n/a");
        }
    }
    let _ = writeln!(out, "variant-nmi {:.6}", s.variant_nmi);
}

fn cmd_convert(args: &ConvertArgs) -> Result<u8> {
    let g = load_graph(&args.input)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = BufWriter::new(file);
            write_edge_list(&g, &mut out)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        None => write_edge_list(&g, io::stdout().lock()).map_err(|e| Error::io("<stdout>", e))?,
    }
    eprintln!("{} vertices, {} edges", g.n(), g.m());
    Ok(0)
}
