//! Command-line workbench: instance generation, annealing experiments,
//! exact small-size dynamics, verification suites, and histogram export.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! configuration, argument, or I/O problems.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qanneal::harness::verify::{self, VerifyLevel};
use qanneal::harness::{
    histogram, run_experiment, success_probs_from_csv, ExperimentConfig, ExperimentReport,
    GroundTruth, Method,
};
use qanneal::ising::{format as ising_format, IsingInstance};
use qanneal::quantum::bound::theorem2_bound;
use qanneal::sa::{CoolingKind, CoolingSchedule, DEFAULT_COOLING_SCALE, DEFAULT_TEMPERATURE_FLOOR};
use qanneal::sqa::SqaSchedule;
use qanneal::topology::{chimera_graph, random_instance, read_mask_file, ChimeraSpec};
use qanneal::{seeding, Error};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qanneal", about = "Ising annealing workbench", version)]
struct Cli {
    /// Worker threads for experiment runs (0 = all available).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random +-1 instances on a Chimera-style graph.
    Gen(GenArgs),
    /// Classical simulated annealing over an instance batch.
    Sa(AnnealArgs),
    /// Path-integral simulated quantum annealing over an instance batch.
    Sqa(AnnealArgs),
    /// Exact Schrodinger dynamics and measurement success probabilities.
    ExactQa(ExactArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
    /// Histogram the success probabilities of an existing report.
    Hist(HistArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Grid rows.
    #[arg(long, default_value_t = 1)]
    rows: usize,
    /// Grid columns.
    #[arg(long, default_value_t = 1)]
    cols: usize,
    /// Half-cell size.
    #[arg(long, default_value_t = 4)]
    shore: usize,
    /// Mask file of disabled vertex indices (one per line).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Number of instances.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed; instance k uses a seed derived from (seed, k).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the generated .ising files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    InverseK,
    InverseLogK,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroundTruthArg {
    BruteForce,
    SaProtocol,
    Provided,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct AnnealArgs {
    /// Instance files or directories of .ising files.
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Annealing runs per instance.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Sweeps per run.
    #[arg(long, default_value_t = 10_000)]
    sweeps: usize,
    /// Trotter slices (SQA only).
    #[arg(long, default_value_t = 30)]
    tau: usize,
    /// Physical temperature (SQA only).
    #[arg(long, default_value_t = 0.1)]
    temperature: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cooling shape (SA only).
    #[arg(long, value_enum, default_value_t = ScheduleArg::InverseLogK)]
    schedule: ScheduleArg,
    /// Cooling scale constant c.
    #[arg(long, default_value_t = DEFAULT_COOLING_SCALE)]
    cooling_scale: f64,
    /// Temperature floor.
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE_FLOOR)]
    cooling_floor: f64,
    /// Ground-truth strategy.
    #[arg(long, value_enum, default_value_t = GroundTruthArg::BruteForce)]
    ground_truth: GroundTruthArg,
    /// JSON file mapping instance id to ground energy (with `provided`).
    #[arg(long)]
    ground_file: Option<PathBuf>,
    /// Sweep grid for the sa-protocol ground truth, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100000,500000,1000000")]
    gt_grid: Vec<usize>,
    /// Repeats per grid entry for the sa-protocol ground truth.
    #[arg(long, default_value_t = 10)]
    gt_repeats: usize,
    /// Histogram bins in the report.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Total anneal time.
    #[arg(long, default_value_t = 10.0)]
    tf: f64,
    /// Unitary integration steps.
    #[arg(long, default_value_t = 4_000)]
    steps: usize,
    /// Also evaluate the success-probability lower bound on this grid.
    #[arg(long)]
    with_bound: bool,
    /// Bound grid resolution.
    #[arg(long, default_value_t = 256)]
    u_grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// fast: desk-scale caps (b <= 4, M <= 32); full: acceptance sizes.
    #[arg(long, default_value = "fast")]
    level: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the structured JSON report (checks plus bound reports) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HistArgs {
    /// Report file (.csv with a success_prob column, or .json report).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Sa(args) => cmd_anneal(Method::Sa, args),
        Command::Sqa(args) => cmd_anneal(Method::Sqa, args),
        Command::ExactQa(args) => cmd_exact(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Hist(args) => cmd_hist(args),
    }
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let mut spec = ChimeraSpec::new(args.rows, args.cols, args.shore);
    if let Some(path) = &args.mask {
        spec = spec.with_mask(read_mask_file(path)?);
    }
    let graph = chimera_graph(&spec)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for k in 0..args.count {
        let inst = random_instance(graph.b, &graph.edges, seeding::instance_seed(args.seed, k as u64))?;
        let path = args
            .out_dir
            .join(format!("chimera_{}v_s{}_i{k:04}.ising", graph.b, args.seed));
        ising_format::write_file(&inst, &path)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn load_instances(paths: &[PathBuf]) -> anyhow::Result<Vec<IsingInstance>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "ising"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        anyhow::bail!("no instance files found");
    }
    files
        .iter()
        .map(|f| Ok(ising_format::read_file(f)?))
        .collect()
}

fn write_or_print(text: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_anneal(method: Method, args: AnnealArgs) -> anyhow::Result<ExitCode> {
    let instances = load_instances(&args.instances)?;
    let mut cfg = ExperimentConfig::new(method);
    cfg.runs_per_instance = args.runs;
    cfg.sweeps = args.sweeps;
    cfg.tau = args.tau;
    cfg.master_seed = args.seed;
    cfg.histogram_bins = args.bins;
    cfg.schedule = {
        let mut s = SqaSchedule::dw_default();
        s.temperature = args.temperature;
        s
    };
    let kind = match args.schedule {
        ScheduleArg::InverseK => CoolingKind::InverseK,
        ScheduleArg::InverseLogK => CoolingKind::InverseLogK,
        ScheduleArg::Linear => CoolingKind::Linear,
    };
    cfg.cooling = CoolingSchedule::new(kind, args.cooling_scale, args.cooling_floor)?;
    cfg.ground_truth = match args.ground_truth {
        GroundTruthArg::BruteForce => GroundTruth::BruteForce,
        GroundTruthArg::SaProtocol => GroundTruth::SaProtocol {
            grid: args.gt_grid.clone(),
            repeats: args.gt_repeats,
        },
        GroundTruthArg::Provided => {
            let path = args.ground_file.as_ref().ok_or_else(|| {
                Error::Config("--ground-truth provided needs --ground-file".into())
            })?;
            let map: std::collections::HashMap<String, f64> =
                serde_json::from_str(&std::fs::read_to_string(path)?)?;
            GroundTruth::Provided(map)
        }
    };
    let report = run_experiment(&cfg, &instances)?;
    emit_report(&report, args.format, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn emit_report(
    report: &ExperimentReport,
    format: FormatArg,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let text = match format {
        FormatArg::Csv => report.to_csv(),
        FormatArg::Json => report.to_json()? + "\n",
    };
    write_or_print(&text, out)
}

#[derive(Serialize)]
struct ExactOutput {
    report: ExperimentReport,
    bounds: Vec<verify::BoundEntry>,
}

fn cmd_exact(args: ExactArgs) -> anyhow::Result<ExitCode> {
    let instances = load_instances(&args.instances)?;
    let mut cfg = ExperimentConfig::new(Method::ExactQa);
    cfg.t_f = args.tf;
    cfg.steps = args.steps;
    cfg.master_seed = args.seed;
    cfg.histogram_bins = args.bins;
    let report = run_experiment(&cfg, &instances)?;
    if args.with_bound {
        let mut bounds = Vec::new();
        for inst in &instances {
            let b = theorem2_bound(inst, &cfg.schedule, args.tf, args.u_grid)?;
            bounds.push(verify::BoundEntry {
                instance: inst.id().to_string(),
                t_f: args.tf,
                report: b,
            });
        }
        let out = ExactOutput { report, bounds };
        write_or_print(&(serde_json::to_string_pretty(&out)? + "\n"), &args.out)?;
    } else {
        emit_report(&report, args.format, &args.out)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyOutput {
    report: verify::VerificationReport,
    bound_reports: Vec<verify::BoundEntry>,
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let level = match args.level.as_str() {
        "fast" => VerifyLevel::Fast,
        "full" => VerifyLevel::Full,
        other => anyhow::bail!("unknown level `{other}` (use fast or full)"),
    };
    let report = verify::verify_all(level, args.seed);
    print!("{}", report.render());
    let (bound_reports, _) = match level {
        VerifyLevel::Fast => verify::bound_report_sweep(&[1.0, 10.0, 100.0], 32),
        VerifyLevel::Full => verify::bound_report_sweep(&[1.0, 10.0, 100.0], 256),
    };
    if let Some(path) = &args.out {
        let payload = VerifyOutput {
            report: report.clone(),
            bound_reports,
        };
        std::fs::write(path, serde_json::to_string_pretty(&payload)? + "\n")?;
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_hist(args: HistArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)?;
    let probs = if args
        .input
        .extension()
        .is_some_and(|e| e == "json")
    {
        let report: ExperimentReport = serde_json::from_str(&text)?;
        report.success_probs()
    } else {
        success_probs_from_csv(&text)?
    };
    let hist = histogram(&probs, args.bins)?;
    let out_text = match args.format {
        FormatArg::Csv => {
            let mut s = String::from("bin_lo,bin_hi,count\n");
            for (i, c) in hist.counts.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", hist.edges[i], hist.edges[i + 1], c));
            }
            s
        }
        FormatArg::Json => serde_json::to_string_pretty(&hist)? + "\n",
    };
    write_or_print(&out_text, &args.out)?;
    Ok(ExitCode::SUCCESS)
}
