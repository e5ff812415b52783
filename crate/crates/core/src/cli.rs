//! The `obench` command line.
//!
//! Exit codes: 0 on success, 1 when an operation fails on its data, 2 on
//! usage errors. Logs go to stderr; results go to files or stdout.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::eval::{evaluate, EvalOptions};
use crate::grid::{latlon_deg2m, read_grid, read_track, write_grid, write_track, GeoData, GriddedField};
use crate::obs::{simulate_over, Constellation, NoiseSpec};
use crate::patcher::{reconstruct, PatchLayout, PatchSpec, Patcher, WeightMode};
use crate::physvars::{derive, DerivedVar};
use crate::pipeline::{parse_config, run_gulfstream_osse, run_pipeline, Context, PRESETS};
use crate::spectral::{parse_reports, render_report, ReportFormat};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "obench", version, about = "Benchmark toolkit for gridded sea surface height fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a recipe file or a bundled preset.
    Pipeline(PipelineArgs),
    /// Score a study field against a reference and write a report.
    Eval(EvalArgs),
    /// Compute a physical variable from sea surface height.
    Derive(DeriveArgs),
    /// Patch extraction and reconstruction.
    #[command(subcommand)]
    Patch(PatchCommand),
    /// Sample a field along simulated satellite tracks.
    Simulate(SimulateArgs),
    /// Leaderboard utilities.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["config", "preset"]))]
struct PipelineArgs {
    /// Recipe file (YAML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for presets.
    #[arg(long, default_value = "obench-out")]
    workdir: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    study: PathBuf,
    /// Along-track truth for the along-track score.
    #[arg(long)]
    track: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    #[arg(long, default_value = "OSSE")]
    experiment: String,
    #[arg(long)]
    algorithm: Option<String>,
}

#[derive(Debug, Args)]
struct DeriveArgs {
    #[arg(long)]
    var: DerivedVar,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum PatchCommand {
    /// Print the patch layout of a field as JSON.
    Info {
        /// Patch spec: a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Write patches as grid files named `patch_NNNNNN.obg`.
    Extract {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        /// Only these indices (default: all).
        #[arg(long, value_delimiter = ',')]
        index: Vec<usize>,
    },
    /// Reassemble patch files onto the grid of `--like`.
    Reconstruct {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        like: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "uniform")]
        weight: WeightMode,
        #[arg(required = true)]
        patches: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Preset constellation (nadir-4sat, swot-like) or a JSON pattern file.
    #[arg(long, default_value = "nadir-4sat")]
    pattern: String,
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Concatenate JSON reports and render them.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

/// Sizes the global thread pool from `OBENCH_THREADS`.
fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("OBENCH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("OBENCH_THREADS must be a positive integer, got `{raw}`"))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("thread pool already initialized");
    }
    Ok(())
}

fn load_spec(arg: &str) -> Result<PatchSpec> {
    if arg.trim_start().starts_with('{') {
        PatchSpec::from_json(arg)
    } else {
        PatchSpec::from_json(&fs::read_to_string(arg)?)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pipeline(args) => run_pipeline_cmd(args),
        Command::Eval(args) => {
            let reference = read_grid(&args.reference)?;
            let study = read_grid(&args.study)?;
            let algorithm = args.algorithm.unwrap_or_else(|| stem(&args.study));
            let mut opts = EvalOptions::new(args.experiment, algorithm);
            if let Some(track) = &args.track {
                opts.track = Some(read_track(track)?);
            }
            let eval = evaluate(&reference, &study, &opts)?;
            fs::write(&args.out, render_report(&[eval.report], args.format)?)?;
            Ok(())
        }
        Command::Derive(args) => {
            let field = read_grid(&args.input)?.validate_latlon()?;
            let field = if field.lat().is_degrees() { latlon_deg2m(&field)? } else { field };
            write_grid(&derive(&field, args.var)?, &args.out)
        }
        Command::Patch(cmd) => run_patch(cmd),
        Command::Simulate(args) => {
            let field = read_grid(&args.reference)?.validate_latlon()?;
            let constellation = match Constellation::preset(&args.pattern) {
                Some(c) => c,
                None => Constellation::from_json(&fs::read_to_string(&args.pattern)?)?,
            };
            let sampled = simulate_over(&field, &constellation, NoiseSpec::gaussian(args.noise_std, args.seed)?)?;
            log::info!("{} samples, {} dropped", sampled.track.len(), sampled.dropped);
            write_track(&sampled.track, &args.out)
        }
        Command::Report(ReportCommand::Merge { inputs, out, format }) => {
            let mut reports = Vec::new();
            for path in &inputs {
                reports.extend(parse_reports(&fs::read_to_string(path)?)?);
            }
            let text = render_report(&reports, format)?;
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn run_pipeline_cmd(args: PipelineArgs) -> Result<()> {
    if let Some(path) = args.config {
        let cfg = parse_config(&fs::read_to_string(&path)?)?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let (_, manifest) = run_pipeline(&cfg, &Context::new(base))?;
        if let Some(v) = manifest.steps.iter().rev().find_map(|s| s.value.as_ref()) {
            println!("{v}");
        }
        return Ok(());
    }
    let preset = args.preset.unwrap_or_default();
    match preset.as_str() {
        "gulfstream-osse" => {
            let outcome = run_gulfstream_osse(&args.workdir)?;
            log::info!("max daily coverage {:.4}", outcome.max_coverage());
            print!("{}", render_report(&outcome.reports, ReportFormat::Markdown)?);
            Ok(())
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown preset `{other}`; known presets: {}",
            PRESETS.join(", ")
        ))),
    }
}

fn run_patch(cmd: PatchCommand) -> Result<()> {
    match cmd {
        PatchCommand::Info { spec, input } => {
            let field = read_grid(&input)?;
            let layout = PatchLayout::new(&load_spec(&spec)?, field.shape())?;
            let info = serde_json::json!({
                "shape": layout.shape(),
                "patch": layout.patch_shape(),
                "stride": layout.strides(),
                "counts": layout.counts(),
                "count": layout.len(),
            });
            println!("{info}");
            Ok(())
        }
        PatchCommand::Extract { spec, input, outdir, index } => {
            let field = read_grid(&input)?;
            let patcher = Patcher::new(&field, &load_spec(&spec)?)?;
            let indices: Vec<usize> = if index.is_empty() { (0..patcher.len()).collect() } else { index };
            fs::create_dir_all(&outdir)?;
            for i in indices {
                let view = patcher.get(i)?;
                let axes = crate::grid::GridAxes::new(field.epoch(), view.time, view.lat, view.lon)?;
                let patch = GriddedField::new(field.var(), field.units(), axes, view.data)?
                    .with_attrs(field.attrs().clone())
                    .with_attr("patch_index", i.to_string());
                write_grid(&patch, outdir.join(format!("patch_{i:06}.obg")))?;
            }
            Ok(())
        }
        PatchCommand::Reconstruct { spec, like, out, weight, patches } => {
            let template = read_grid(&like)?;
            let layout = PatchLayout::new(&load_spec(&spec)?, template.shape())?;
            let mut items = Vec::with_capacity(patches.len());
            for path in &patches {
                let p = read_grid(path)?;
                let index = p
                    .attrs()
                    .get("patch_index")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::parse(path.display().to_string(), "missing `patch_index` attribute"))?;
                items.push((index, p.into_data()));
            }
            write_grid(&reconstruct(&layout, template.axes(), &template, &items, weight)?, &out)
        }
    }
}
