use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use linkevo::archive::Archive;
use linkevo::checkpoint::save_checkpoint;
use linkevo::config::RunFile;
use linkevo::exec::{Pool, WORKERS_ENV};
use linkevo::metrics::MetricsLog;
use linkevo::server::{self, parse_dims};
use linkevo::svg;
use linkevo_core::descriptors::DescriptorSpace;
use linkevo_core::evolve::{self, Algorithm, IterationRecord, RunConfig};
use linkevo_core::fitness::{fitness_fp, fitness_fsl, FitnessKind, TargetPointSet};
use linkevo_core::prototyping::{build_sheet, downsample, BuildSheet};
use linkevo_core::{EncodingConfig, Genome};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "linkevo", version, about = "Evolve, inspect and build planar leg linkages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolutionary search and write an archive.
    Evolve(EvolveArgs),
    /// Simulate one genome and draw it.
    Simulate(SimulateArgs),
    /// Render repertoire maps.
    Map {
        #[command(subcommand)]
        command: MapCommand,
    },
    /// Brick parts list for one archived linkage.
    Buildsheet(BuildsheetArgs),
    /// Serve archives over HTTP.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum MapCommand {
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ea,
    Nsga2,
    Me,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitnessArg {
    Fp,
    Fsl,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Wh,
    Lis,
    St,
    Au,
}

#[derive(Args)]
struct EvolveArgs {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<AlgoArg>,
    #[arg(long)]
    fitness: Option<FitnessArg>,
    #[arg(long)]
    space: Option<SpaceArg>,
    /// Total evaluations, including the initial batch.
    #[arg(long, conflicts_with = "iterations")]
    budget: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Crank steps per revolution.
    #[arg(long)]
    steps: Option<usize>,
    /// Target point CSV (x,y,set).
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Archive to write.
    #[arg(long)]
    out: PathBuf,
    /// Metrics log; defaults to `<out stem>.metrics.jsonl`.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON genome: a bare genome, an archive record, or
    /// `{"genome": ..., "encoding": ...}`.
    #[arg(long)]
    genome: PathBuf,
    #[arg(long, default_value_t = 72)]
    steps: usize,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Crank step drawn in the SVG (first feasible step by default).
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    targets: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderMode {
    Heatmap,
    Paths,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, value_enum)]
    mode: RenderMode,
    #[arg(long, default_value_t = 5)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    cols: usize,
    /// Grid dimensions shown along columns and rows.
    #[arg(long, default_value = "0,1")]
    dims: String,
    /// SVG output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildsheetArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Display cell `ROW,COL` of the downsampled map.
    #[arg(long, conflicts_with = "index", required_unless_present = "index")]
    cell: Option<String>,
    /// Raw archive cell index instead of a display cell.
    #[arg(long)]
    index: Option<usize>,
    #[arg(long, default_value_t = 8.0)]
    pitch: f64,
    #[arg(long, default_value_t = 5)]
    rows: usize,
    #[arg(long, default_value_t = 5)]
    cols: usize,
    #[arg(long, default_value = "0,1")]
    dims: String,
    /// Print the JSON document served by the HTTP API.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    archive_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Evolve(a) => evolve_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Map { command: MapCommand::Render(a) } => render_cmd(a),
        Command::Buildsheet(a) => buildsheet_cmd(a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}.{suffix}.jsonl"))
}

fn run_config(a: &EvolveArgs) -> Result<RunConfig> {
    let base = match &a.config {
        Some(p) => RunFile::load(p)?,
        None => RunFile::default(),
    };
    let flags = RunFile {
        algorithm: a.algo.map(|x| match x {
            AlgoArg::Ea => Algorithm::Ea,
            AlgoArg::Nsga2 => Algorithm::Nsga2,
            AlgoArg::Me => Algorithm::MapElites,
        }),
        fitness: a.fitness.map(|x| match x {
            FitnessArg::Fp => FitnessKind::Fp,
            FitnessArg::Fsl => FitnessKind::Fsl,
        }),
        space: a.space.map(|x| match x {
            SpaceArg::Wh => DescriptorSpace::Wh,
            SpaceArg::Lis => DescriptorSpace::Lis,
            SpaceArg::St => DescriptorSpace::St,
            SpaceArg::Au => DescriptorSpace::Au,
        }),
        budget: a.budget,
        iterations: a.iterations,
        seed: a.seed,
        batch_size: a.batch_size,
        steps: a.steps,
        targets: a.targets.clone(),
        ..RunFile::default()
    };
    Ok(base.merge(flags).to_config()?)
}

fn evolve_cmd(a: EvolveArgs) -> Result<()> {
    let cfg = run_config(&a)?;
    let pool = Pool::from_env()?;
    log::info!(
        "{} / {} on {} evaluations, seed {}, {} workers (set {WORKERS_ENV} to change)",
        cfg.algorithm.name(),
        cfg.fitness.name(),
        cfg.evaluations(),
        cfg.seed,
        pool.workers()
    );
    let metrics_path = a.metrics.clone().unwrap_or_else(|| sibling(&a.out, "metrics"));
    let mut metrics = MetricsLog::create(&metrics_path)?;
    let mut failure = None;
    let mut observe = |r: &IterationRecord| {
        log::info!(
            "iteration {} evaluations {} best {}{}",
            r.iteration,
            r.evaluations,
            r.best_fitness.map_or("-".into(), |f| format!("{f:.4}")),
            r.coverage.map_or(String::new(), |c| format!(" coverage {c:.4}"))
        );
        if failure.is_none() {
            failure = metrics.append(r).err();
        }
    };
    let archive = match cfg.algorithm {
        Algorithm::Ea => {
            let r = evolve::run_ea_observed(&cfg, &pool, |rec, _| observe(rec));
            Archive::from_population(&r.meta, &r.population)
        }
        Algorithm::Nsga2 => {
            let r = evolve::run_nsga2_observed(&cfg, &pool, |rec, _| observe(rec));
            Archive::from_population(&r.meta, &r.population)
        }
        Algorithm::MapElites => {
            let r = evolve::run_map_elites_observed(&cfg, &pool, |rec, _| observe(rec));
            let checkpoint = match &r.autoencoder {
                Some(ae) => {
                    let path = sibling(&a.out, "ae");
                    save_checkpoint(ae, &path)?;
                    Some(path.file_name().unwrap().to_string_lossy().into_owned())
                }
                None => None,
            };
            Archive::from_repertoire(&r.repertoire, checkpoint)
        }
    };
    if let Some(e) = failure {
        return Err(e.into());
    }
    archive.save(&a.out)?;
    log::info!("wrote {} records to {} and metrics to {}", archive.records.len(), a.out.display(), metrics_path.display());
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GenomeFile {
    Wrapped { genome: Genome, encoding: Option<EncodingConfig> },
    Bare(Genome),
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    if !(3..=server::MAX_STEPS).contains(&a.steps) {
        bail!("--steps must be in 3..={}", server::MAX_STEPS);
    }
    let text = fs::read_to_string(&a.genome).with_context(|| format!("reading {}", a.genome.display()))?;
    let (genome, encoding) = match serde_json::from_str(&text).with_context(|| format!("parsing {}", a.genome.display()))? {
        GenomeFile::Wrapped { genome, encoding } => (genome, encoding.unwrap_or_default()),
        GenomeFile::Bare(g) => (g, EncodingConfig::default()),
    };
    genome.validate(&encoding)?;
    let targets = match &a.targets {
        Some(p) => linkevo::targets::load_targets(p)?,
        None => TargetPointSet::default(),
    };
    let linkage = genome.decode(&encoding);
    let trace = linkage.solve(a.steps);
    let (fp, fsl) = (fitness_fp(&trace, &targets), fitness_fsl(&trace));
    let report = serde_json::json!({
        "steps": a.steps,
        "error_count": trace.error_count,
        "foot_index": trace.foot_index,
        "fitness": { "fp": fp, "fsl": fsl },
        "summary": evolve::PathSummary::of(&trace),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = &a.svg {
        let caption = format!("F_p {fp:.3}   F_sl {fsl:.3}   errors {}/{}", trace.error_count, a.steps);
        fs::write(path, svg::linkage(&linkage, &trace, a.step, &caption)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn dims_arg(s: &str) -> Result<(usize, usize)> {
    parse_dims(Some(s)).map_err(|e| anyhow::anyhow!(e.message))
}

fn axis_labels(archive: &Archive, dims: (usize, usize)) -> (String, String) {
    let names: &[&str] = match archive.header.run.space {
        Some(DescriptorSpace::Wh) => &["width (mm)", "height (mm)"],
        Some(DescriptorSpace::Lis) => &["mean beam length (mm)", "lift (mm)"],
        Some(DescriptorSpace::St) => &["mean beam length (mm)", "longest static-to-foot path", "contributing nodes", "moving fraction"],
        _ => &[],
    };
    let label = |d: usize| names.get(d).map_or_else(|| format!("dimension {d}"), |s| s.to_string());
    (label(dims.0), label(dims.1))
}

fn render_cmd(a: RenderArgs) -> Result<()> {
    let archive = Archive::load(&a.archive)?;
    let rep = archive.to_repertoire()?;
    let dims = dims_arg(&a.dims)?;
    let map = downsample(&rep, a.rows, a.cols, dims)?;
    let (x, y) = axis_labels(&archive, dims);
    let doc = match a.mode {
        RenderMode::Heatmap => svg::heatmap(&map, rep.fitness_kind(), (&x, &y)),
        RenderMode::Paths => svg::paths(&map, (&x, &y)),
    };
    match &a.out {
        Some(p) => fs::write(p, doc).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(doc.as_bytes())?,
    }
    Ok(())
}

fn buildsheet_cmd(a: BuildsheetArgs) -> Result<()> {
    let archive = Archive::load(&a.archive)?;
    let cell = match (&a.cell, a.index) {
        (_, Some(i)) => i,
        (Some(rc), None) => {
            let (row, col) = dims_arg(rc).context("--cell must be ROW,COL")?;
            let rep = archive.to_repertoire()?;
            let map = downsample(&rep, a.rows, a.cols, dims_arg(&a.dims)?)?;
            if row >= a.rows || col >= a.cols {
                bail!("display cell {row},{col} outside the {}x{} map", a.rows, a.cols);
            }
            map.get(row, col).with_context(|| format!("display cell {row},{col} is empty"))?.source_cell
        }
        (None, None) => unreachable!("clap requires --cell or --index"),
    };
    let rec = archive.record(cell).with_context(|| format!("archive has no individual in cell {cell}"))?;
    let sheet = build_sheet(&archive.evaluation(rec), a.pitch, &archive.header.run)?;
    if a.json {
        println!("{}", serde_json::to_string(&sheet)?);
    } else {
        print!("{}", sheet_text(cell, &sheet));
    }
    Ok(())
}

fn sheet_text(cell: usize, s: &BuildSheet) -> String {
    let mut out = format!("cell {cell}, pitch {} mm\n\n beam  nodes    evolved   snapped  holes\n", s.pitch);
    for b in &s.beams {
        out += &format!("{:>5}  {:>2}-{:<2}  {:>9.2} {:>9.1}  {:>5}\n", b.index, b.a, b.b, b.evolved_length, b.snapped_length, b.holes);
    }
    out += &format!(
        "\nfitness evolved {:.4} ({} errors), snapped {:.4} ({} errors), change {:+.4}\n",
        s.evolved_fitness,
        s.evolved_error_count,
        s.snapped_fitness,
        s.snapped_error_count,
        s.fitness_delta()
    );
    if s.infeasible {
        out += "WARNING: the snapped linkage cannot complete any crank step\n";
    }
    out
}

fn serve_cmd(a: ServeArgs) -> Result<()> {
    if !a.archive_dir.is_dir() {
        bail!("{} is not a directory", a.archive_dir.display());
    }
    let workers = linkevo::exec::workers_from_env()?;
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if workers > 0 {
        rt.worker_threads(workers);
    }
    rt.enable_all().build()?.block_on(server::serve(a.archive_dir, SocketAddr::new(a.host, a.port)))?;
    Ok(())
}
