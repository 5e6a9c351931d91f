//! `voxskel` command-line front end.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voxskel_core::benchmark::{self, Algorithm};
use voxskel_core::census::{census_report, run_census, CensusMode, CensusReport};
use voxskel_core::diff::{learn_skeleton_demo, sample_relaxed, LearnConfig, NoiseParams};
use voxskel_core::io::{read_volume, write_volume, Volume};
use voxskel_core::peel::{skeletonize_traced, Iterations, PeelConfig};
use voxskel_core::shapes::{make_shape, ShapeKind, ShapeSpec};
use voxskel_core::{betti_numbers, Detector, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "voxskel",
    version,
    about = "Topology-preserving voxel skeletonization",
    args_override_self = true
)]
struct Cli {
    /// Seed for every random draw of the command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON file supplying default flags; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Thin a volume to its skeleton.
    Skeletonize(SkeletonizeArgs),
    /// Print Betti numbers and Euler characteristic as JSON.
    Verify(VerifyArgs),
    /// Classify 26-neighborhood configurations with all three classifiers.
    Census(CensusArgs),
    /// Learn an input volume whose skeleton matches a target.
    DemoLearn(DemoLearnArgs),
    /// Compare skeletonization algorithms over a corpus of volumes.
    Benchmark(BenchmarkArgs),
    /// Write a synthetic test shape.
    MakeShape(MakeShapeArgs),
    /// Write the synthetic benchmark corpus.
    MakeCorpus(MakeCorpusArgs),
}

#[derive(Debug, Args)]
struct SkeletonizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "boolean")]
    detector: Detector,
    /// Outer iterations, or `auto` to run until nothing changes.
    #[arg(long, default_value = "auto", value_parser = Iterations::parse)]
    iters: Iterations,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    keep_endpoints: bool,
    /// Noise scale used to binarize probability (f32) inputs.
    #[arg(long, default_value_t = 0.33)]
    beta: f64,
    /// Temperature used to binarize probability (f32) inputs.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Full,
    Sampled,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Number of draws in sampled mode.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long, default_value_t = 64)]
    shards: usize,
    /// First configuration code of the evaluated range.
    #[arg(long)]
    start: Option<u32>,
    /// One past the last configuration code of the evaluated range.
    #[arg(long)]
    end: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DemoLearnArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0.33)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = LearnConfig::default().steps)]
    steps: usize,
    #[arg(long, default_value_t = LearnConfig::default().lr)]
    lr: f64,
    /// Outer peeling iterations per forward pass.
    #[arg(long, default_value_t = LearnConfig::default().iterations)]
    iters: usize,
    #[arg(long, default_value = "boolean")]
    detector: Detector,
    /// CSV loss trace (`step,loss`).
    #[arg(long)]
    out: PathBuf,
    /// Optional path for the learned probability volume.
    #[arg(long)]
    learned: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "boolean,euler,morphological_baseline"
    )]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MakeShapeArgs {
    #[arg(long)]
    kind: ShapeKind,
    #[arg(long)]
    output: PathBuf,
    /// Line length.
    #[arg(long)]
    length: Option<usize>,
    /// Box extent as `nx,ny,nz`.
    #[arg(long, value_parser = parse_extent)]
    extent: Option<[usize; 3]>,
    /// Torus ring radius.
    #[arg(long)]
    major: Option<f64>,
    /// Torus tube radius.
    #[arg(long)]
    minor: Option<f64>,
    /// Shell outer radius.
    #[arg(long)]
    outer: Option<f64>,
    /// Shell thickness.
    #[arg(long)]
    thickness: Option<f64>,
    /// Blob grid side.
    #[arg(long)]
    size: Option<usize>,
    /// Blob smoothing radius.
    #[arg(long)]
    smoothing: Option<usize>,
    /// Blob foreground fraction.
    #[arg(long)]
    fill: Option<f64>,
}

#[derive(Debug, Args)]
struct MakeCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    blobs: usize,
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::merge_config(raw) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report(&Error::Domain("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global thread pool is configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn parse_extent(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[usize; 3]>::try_from(parts)
        .map_err(|p| format!("expected three values nx,ny,nz, got {}", p.len()))
}

fn report(e: &Error) -> ExitCode {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error[{}]: {msg}", e.kind());
    ExitCode::from(1)
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Skeletonize(a) => skeletonize_cmd(a, seed),
        Command::Verify(a) => {
            let v = read_volume(&a.input)?.into_binary(&a.input)?;
            println!(
                "{}",
                serde_json::to_string(&betti_numbers(&v)).expect("report serializes")
            );
            Ok(())
        }
        Command::Census(a) => census_cmd(a, seed),
        Command::DemoLearn(a) => demo_learn_cmd(a, seed),
        Command::Benchmark(a) => {
            let corpus = benchmark::read_corpus(&a.corpus)?;
            let rows = benchmark::run_benchmark(&corpus, &a.algorithms)?;
            benchmark::write_csv(&rows, &a.out)
        }
        Command::MakeShape(a) => make_shape_cmd(a, seed),
        Command::MakeCorpus(a) => {
            benchmark::write_corpus(&benchmark::synthetic_corpus(a.blobs, seed), &a.out)
        }
    }
}

fn skeletonize_cmd(a: SkeletonizeArgs, seed: u64) -> Result<()> {
    let v = match read_volume(&a.input)? {
        Volume::Binary(v) => v,
        Volume::Probability(p) => sample_relaxed(&p, &NoiseParams::new(a.beta, a.tau, seed)?)?.hard,
    };
    let cfg = PeelConfig::new(a.detector, a.iters).with_endpoints(a.keep_endpoints);
    let (skeleton, trace) = skeletonize_traced(&v, &cfg);
    write_volume(&Volume::Binary(skeleton.clone()), &a.output)?;
    println!(
        "{{\"input_points\":{},\"points\":{},\"outer_iterations\":{}}}",
        v.count(),
        skeleton.count(),
        trace.outer_iterations
    );
    Ok(())
}

fn census_cmd(a: CensusArgs, seed: u64) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Full => CensusMode::Full,
        ModeArg::Sampled => CensusMode::Sampled { n: a.n, seed },
    };
    let range = match (a.start, a.end) {
        (None, None) => None,
        (s, e) => Some(s.unwrap_or(0)..e.unwrap_or(voxskel_core::NeighborhoodConfig::COUNT)),
    };
    let result = run_census(mode, range, a.shards)?;
    if let Some(out) = &a.out {
        census_report(&result, out)?;
    }
    let text =
        serde_json::to_string_pretty(&CensusReport::from(&result)).expect("report serializes");
    println!("{text}");
    Ok(())
}

fn demo_learn_cmd(a: DemoLearnArgs, seed: u64) -> Result<()> {
    let target = read_volume(&a.target)?.into_binary(&a.target)?;
    let np = NoiseParams::new(a.beta, a.tau, seed)?;
    let cfg = LearnConfig {
        steps: a.steps,
        lr: a.lr,
        iterations: a.iters,
        detector: a.detector,
        ..LearnConfig::default()
    };
    let outcome = learn_skeleton_demo(&target, &np, &cfg)?;
    let mut csv = String::from("step,loss\n");
    for (step, loss) in outcome.losses.iter().enumerate() {
        writeln!(csv, "{step},{loss}").expect("writing to a string");
    }
    write_file(&a.out, &csv)?;
    if let Some(path) = &a.learned {
        write_volume(&Volume::Probability(outcome.learned), path)?;
    }
    let first = outcome.losses.first().copied().unwrap_or(0.0);
    let last = outcome.losses.last().copied().unwrap_or(0.0);
    println!(
        "{{\"initial_loss\":{first},\"final_loss\":{last},\"steps\":{}}}",
        a.steps
    );
    Ok(())
}

fn make_shape_cmd(a: MakeShapeArgs, seed: u64) -> Result<()> {
    let spec = match ShapeSpec::default_for(a.kind) {
        ShapeSpec::Line { length } => ShapeSpec::Line {
            length: a.length.unwrap_or(length),
        },
        ShapeSpec::SolidBox { extent } => ShapeSpec::SolidBox {
            extent: a.extent.unwrap_or(extent),
        },
        ShapeSpec::ThickTorus { major, minor } => ShapeSpec::ThickTorus {
            major: a.major.unwrap_or(major),
            minor: a.minor.unwrap_or(minor),
        },
        ShapeSpec::HollowShell { outer, thickness } => ShapeSpec::HollowShell {
            outer: a.outer.unwrap_or(outer),
            thickness: a.thickness.unwrap_or(thickness),
        },
        ShapeSpec::RandomBlob {
            size,
            smoothing,
            fill,
        } => ShapeSpec::RandomBlob {
            size: a.size.unwrap_or(size),
            smoothing: a.smoothing.unwrap_or(smoothing),
            fill: a.fill.unwrap_or(fill),
        },
    };
    let v = make_shape(&spec, seed)?;
    write_volume(&Volume::Binary(v.clone()), &a.output)?;
    println!(
        "{}",
        serde_json::to_string(&betti_numbers(&v)).expect("report serializes")
    );
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
