//! Command-line front end: generate graphs, run sampling studies, estimate
//! sizes, drive config-file sweeps, and check the centrality identity.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use netsize::graph::{self, Graph, GraphSpec};
use netsize::harness::{self, ExperimentConfig};
use netsize::routing::{run_study_opts, StudyOptions, TraceStudy};
use netsize::{centrality, estimators};

#[derive(Parser)]
#[command(
    name = "netsize",
    version,
    about = "Simulate traceroute-style sampling of networks and estimate true network size"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph and write it as an edge list.
    Gen(GenArgs),
    /// Run one sampling study and report (or dump) what it observed.
    Study(StudyArgs),
    /// Run one sampling study and print size estimates.
    Estimate(EstimateArgs),
    /// Run the multi-setting experiment sweep described by a config file.
    Sweep(SweepArgs),
    /// Compare true discovery against within-sample discovery at matched
    /// probe fractions (the resampling estimator's core assumption).
    ValidateScaling(ConfigArgs),
    /// Betweenness profile and the path-length/betweenness size identity.
    Centrality(CentralityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Erdős–Rényi with a given average degree (largest component kept).
    Er,
    /// Preferential attachment with m edges per arriving vertex.
    Ba,
}

#[derive(Args)]
struct GenArgs {
    /// Graph family to sample.
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of vertices to draw (the kept component may be smaller).
    #[arg(long)]
    n: usize,
    /// Average degree (er only).
    #[arg(long)]
    avg_degree: Option<f64>,
    /// Edges per arriving vertex (ba only).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge-list path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProbeArgs {
    /// Edge-list file with the graph to probe.
    #[arg(long)]
    graph: PathBuf,
    /// Number of trace sources.
    #[arg(long, default_value_t = 1)]
    sources: usize,
    /// Number of trace targets.
    #[arg(long)]
    targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    /// Also merge source-to-source traces into the sample.
    #[arg(long)]
    source_paths: bool,
    /// Write the full trace dump here instead of just printing counts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    /// Skip the resampling estimator (the slow one).
    #[arg(long)]
    skip_resampling: bool,
    /// Resamples per evaluation once the search has narrowed.
    #[arg(long, default_value_t = 80)]
    max_batch: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Write rows here (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the per-setting summary table.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Study(args) => study(args),
        Command::Estimate(args) => estimate(args),
        Command::Sweep(args) => sweep(args),
        Command::ValidateScaling(args) => validate_scaling(args),
        Command::Centrality(args) => centrality_report(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = match args.kind {
        Kind::Er => {
            let avg_degree = args
                .avg_degree
                .context("--kind er needs --avg-degree")?;
            if args.m.is_some() {
                bail!("--m only applies to --kind ba");
            }
            GraphSpec::Er { n: args.n, avg_degree, seed: args.seed }
        }
        Kind::Ba => {
            let m = args.m.context("--kind ba needs --m")?;
            if args.avg_degree.is_some() {
                bail!("--avg-degree only applies to --kind er");
            }
            GraphSpec::Ba { n: args.n, m, seed: args.seed }
        }
    };
    let g = spec.build()?;
    g.save_edge_list(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} vertices, {} edges to {}",
        g.num_vertices(),
        g.num_edges(),
        args.out.display()
    );
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    if !path.exists() {
        bail!("graph file not found: {}", path.display());
    }
    let loaded = graph::load_edge_list(path)
        .with_context(|| format!("loading {}", path.display()))?;
    if loaded.graph.num_vertices() < loaded.raw_vertex_count {
        eprintln!(
            "note: kept the largest component: {} of {} vertices",
            loaded.graph.num_vertices(),
            loaded.raw_vertex_count
        );
    }
    Ok(loaded.graph)
}

fn run_probe(probe: &ProbeArgs, opts: StudyOptions) -> Result<(Graph, TraceStudy)> {
    let g = load_graph(&probe.graph)?;
    let study = run_study_opts(&g, probe.sources, probe.targets, probe.seed, opts)?;
    Ok((g, study))
}

fn study(args: StudyArgs) -> Result<()> {
    let opts = StudyOptions {
        keep_paths: args.out.is_some(),
        include_source_paths: args.source_paths,
    };
    let (g, study) = run_probe(&args.probe, opts)?;
    println!("graph vertices: {}", g.num_vertices());
    println!("graph edges: {}", g.num_edges());
    println!("observed vertices: {}", study.num_sampled_vertices());
    println!("observed edges: {}", study.num_sampled_edges());
    if let Some(path) = args.out {
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        study.write_trace_dump(&mut w)?;
        w.flush()?;
        println!("trace dump written to {}", path.display());
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let (g, study) = run_probe(&args.probe, StudyOptions::default())?;
    let rs_opts = (!args.skip_resampling).then(|| estimators::ResamplingOptions {
        max_batch: args.max_batch.max(1),
        seed: args.probe.seed,
        ..Default::default()
    });
    let report = estimators::EstimateReport::compute(&study, rs_opts.as_ref())?;

    println!("graph vertices: {}", g.num_vertices());
    println!("observed vertices: {}", report.observed_vertices);
    println!("observed edges: {}", report.observed_edges);
    println!("exclusive targets: {}", report.stats.num_exclusive_targets);
    println!("mean held-out size: {}", report.stats.mean_reduced_size);
    println!("leave-one-out estimate: {:.2}", report.leave_one_out);
    println!("leave-one-out approximation: {:.2}", report.leave_one_out_approx);
    if let Some(rs) = &report.resampling {
        println!(
            "resampling estimate: {:.2} (targets {}, iterations {}, residual {:.4})",
            rs.estimate, rs.resampled_targets, rs.iterations, rs.residual
        );
        if rs.degenerate {
            println!("note: resampling balance was degenerate; estimate clamped at the sample");
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    if !path.exists() {
        bail!("config not found: {}", path.display());
    }
    ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let config = load_config(&args.config.config)?;
    let rows = harness::run_sweep(&config)?;
    let destination = args.out.clone().or_else(|| config.output.clone());
    match &destination {
        Some(path) => {
            harness::save_csv(&rows, path)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", harness::csv_string(&rows)),
    }
    if args.summary {
        let summary = harness::summarize(&rows)?;
        print!("{}", harness::format_summary(&summary));
    }
    Ok(())
}

fn validate_scaling(args: ConfigArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let rows = harness::validate_scaling(&config)?;
    print!("{}", harness::format_scaling(&rows));
    Ok(())
}

#[derive(Args)]
struct CentralityArgs {
    /// Edge-list file to profile.
    #[arg(long)]
    graph: PathBuf,
    /// Write per-vertex `id,degree,betweenness` CSV here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn centrality_report(args: CentralityArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let identity = centrality::check_size_identity(&g)?;
    println!("vertices: {}", identity.num_vertices);
    println!("avg path length: {}", identity.avg_path_length);
    println!(
        "identity check: lhs={} rhs={}",
        identity.sum_betweenness, identity.identity_rhs
    );
    match identity.n_from_identity {
        Some(n) => println!("size from identity: {n}"),
        None => println!("size from identity: undefined (every pair is adjacent)"),
    }

    if let Some(path) = args.dump {
        let profile = centrality::profile(&g)?;
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(w, "vertex,degree,betweenness")?;
        for (v, b) in profile.betweenness.iter().enumerate() {
            writeln!(w, "{v},{},{b}", g.degree(v as u32))?;
        }
        w.flush()?;
        println!("profile written to {}", path.display());
    }
    Ok(())
}
