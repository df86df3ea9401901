use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acl_bench::batch::{run_batch, BatchSpec};
use acl_bench::hp::{apply_flags, apply_table, load_table, HpFlag};
use acl_bench::results::{format_comparison, load_groups, results_root, write_comparison, write_run};
use acl_bench::svg::{render_curves, render_stumps, render_terrain};
use acl_bench::{weights, BenchError, BenchResult};
use acl_core::harness::{make_test_set, permitted_teachers, Challenge, ChallengeConfig, RunOptions};
use acl_core::procgen::{generate_stumps, generate_terrain, CppnWeights, TerrainSpec, ThetaSpace, DEFAULT_SMOOTHING};
use acl_core::stats::compare_runs;
use acl_core::student::Embodiment;
use acl_core::teacher::{EkLevel, HyperParams, TeacherKind};
use acl_core::AclError;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Automatic curriculum learning teachers against synthetic students.
#[derive(Parser)]
#[command(name = "acl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one teacher on one challenge for one seed.
    Run(RunArgs),
    /// Run several teachers over many seeds in parallel.
    Batch(BatchArgs),
    /// Welch's t-test of every teacher against a baseline.
    Compare(CompareArgs),
    /// Write a challenge's fixed test set as JSON.
    Testset(TestsetArgs),
    /// Plot mastery curves with standard-error bands.
    Plot(PlotArgs),
    /// Generate a Parkour track.
    Terrain(TerrainArgs),
    /// Generate a Stump Tracks track.
    Stumps(StumpArgs),
    /// Write the CPPN weights file for a seed.
    Weights(WeightsArgs),
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[arg(long)]
    challenge: Challenge,
    #[arg(long, default_value = "none")]
    ek: EkLevel,
    /// Training budget in episodes.
    #[arg(long, default_value_t = acl_core::harness::DEFAULT_BUDGET)]
    episodes: u64,
    /// Episodes between evaluations (challenge default when omitted).
    #[arg(long)]
    eval_every: Option<u64>,
    /// Hyperparameter override, `key=value` or `teacher.key=value`.
    #[arg(long = "hp", value_name = "KEY=VALUE")]
    hp: Vec<HpFlag>,
    /// JSON table of overrides, `{"adr": {"t_H": 180}}`.
    #[arg(long)]
    hp_file: Option<PathBuf>,
    /// Also write every training episode of the student.
    #[arg(long)]
    trajectory: bool,
    /// Output root (default `$ACL_RESULTS_DIR`, else `results`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> BenchResult<ChallengeConfig> {
        let base = ChallengeConfig::new(self.challenge);
        let every = self.eval_every.unwrap_or(base.eval_every);
        let cfg = base.with_budget(self.episodes, every);
        cfg.validate()?;
        Ok(cfg)
    }

    fn hyper_params(&self, teachers: &[TeacherKind]) -> BenchResult<HyperParams> {
        let mut hp = HyperParams::default();
        if let Some(path) = &self.hp_file {
            apply_table(&mut hp, &load_table(path)?)?;
        }
        apply_flags(&mut hp, teachers, &self.hp)?;
        Ok(hp)
    }

    fn options(&self) -> RunOptions {
        RunOptions { record_trajectory: self.trajectory, ..RunOptions::default() }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    teacher: TeacherKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Comma-separated teachers (default: every teacher the EK level permits).
    #[arg(long, value_delimiter = ',')]
    teachers: Vec<TeacherKind>,
    /// Number of seeds (challenge default when omitted).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Worker threads (all cores when omitted).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Result directories or seed files of one challenge and EK level.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, default_value = "random")]
    baseline: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestsetArgs {
    #[arg(long)]
    challenge: Challenge,
    /// Embodiment whose niche the Parkour test set covers.
    #[arg(long)]
    embodiment: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    svg: PathBuf,
    #[arg(long, default_value = "% mastered test tasks")]
    title: String,
}

#[derive(Args)]
struct TerrainArgs {
    /// Generation parameters `θ1,θ2,θ3`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Creeper mean height and spacing, `μ,Δ`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.0])]
    creepers: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    water: f64,
    #[arg(long, default_value = "medium")]
    space: String,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    smoothing: f64,
    /// Seed of the creeper heights.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CPPN weights file (seed-42 weights when omitted).
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct StumpArgs {
    #[arg(long, allow_hyphen_values = true)]
    height: f64,
    #[arg(long)]
    spacing: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long, default_value_t = acl_core::procgen::CANONICAL_CPPN_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn write_text(path: &Path, text: &str) -> BenchResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn run(args: RunArgs) -> BenchResult<()> {
    let cfg = args.exp.config()?;
    let hp = args.exp.hyper_params(&[args.teacher])?;
    let spec = BatchSpec {
        config: cfg,
        teachers: vec![args.teacher],
        ek: args.exp.ek,
        seeds: vec![args.seed],
        hp,
        options: args.exp.options(),
    };
    let out = spec.run_one(args.teacher, args.seed)?;
    let files = write_run(&results_root(args.exp.out.as_deref()), &out)?;
    let last = out.records.last().expect("evaluated at least once");
    println!(
        "{} on {} ({} EK), seed {}: {:.1}% mastered after {} episodes",
        args.teacher, last.challenge, last.ek, last.seed, last.pct_mastered, last.episode
    );
    println!("wrote {}", files.records.display());
    Ok(())
}

fn batch(args: BatchArgs) -> BenchResult<()> {
    let mut cfg = args.exp.config()?;
    if let Some(n) = args.seeds {
        cfg.seeds = n;
    }
    cfg.validate()?;
    let teachers = if args.teachers.is_empty() { permitted_teachers(args.exp.ek) } else { args.teachers.clone() };
    let hp = args.exp.hyper_params(&teachers)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| BenchError::Argument(e.to_string()))?;
    }
    let seeds = (args.first_seed..args.first_seed + cfg.seeds as u64).collect();
    let spec = BatchSpec { config: cfg, teachers, ek: args.exp.ek, seeds, hp, options: args.exp.options() };
    let root = results_root(args.exp.out.as_deref());
    let (rows, summary) = run_batch(&spec, &root, |out| {
        let last = out.records.last().expect("evaluated at least once");
        eprintln!("{:>10} seed {:>3}: {:5.1}%", last.teacher.name(), last.seed, last.pct_mastered);
    })?;
    println!("{} runs; summary in {}", rows.len(), summary.display());
    Ok(())
}

fn compare(args: CompareArgs) -> BenchResult<()> {
    let groups = load_groups(&args.paths)?;
    let table = compare_runs(&groups, &args.baseline)?;
    print!("{}", format_comparison(&table));
    if let Some(out) = &args.out {
        write_comparison(out, &table)?;
    }
    Ok(())
}

fn parse_embodiment(name: &str) -> BenchResult<Embodiment> {
    serde_json::from_value(serde_json::Value::String(name.replace('-', "_")))
        .map_err(|_| BenchError::Argument(format!("unknown embodiment `{name}`")))
}

fn testset(args: TestsetArgs) -> BenchResult<()> {
    let emb = match &args.embodiment {
        Some(e) => parse_embodiment(e)?,
        None if args.challenge == Challenge::Parkour => Embodiment::WalkerType,
        None => Embodiment::Default,
    };
    let tasks: Vec<Vec<f64>> = make_test_set(args.challenge, emb).into_iter().map(|t| t.0).collect();
    let text = to_json(&tasks);
    match &args.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn plot(args: PlotArgs) -> BenchResult<()> {
    let groups = load_groups(&args.inputs)?;
    write_text(&args.svg, &render_curves(&groups, &args.title))
}

fn terrain(args: TerrainArgs) -> BenchResult<()> {
    let space = ThetaSpace::parse(&args.space)
        .ok_or_else(|| BenchError::Argument(format!("space must be easy, medium or hard, got `{}`", args.space)))?;
    let theta: [f64; 3] = args
        .theta
        .as_slice()
        .try_into()
        .map_err(|_| BenchError::Argument("--theta takes three comma-separated values".into()))?;
    if args.creepers.len() != 2 {
        return Err(BenchError::Argument("--creepers takes `height,spacing`".into()));
    }
    for (d, (t, (lo, hi))) in theta.iter().zip(space.bounds()).enumerate() {
        if !(lo..=hi).contains(t) {
            return Err(AclError::OutsideSpace { dim: d, value: *t }.into());
        }
    }
    let mut spec = TerrainSpec::new(theta, args.creepers[0], args.creepers[1], args.water);
    spec.smoothing = args.smoothing;
    let w = match &args.weights {
        Some(p) => weights::read_file(p)?,
        None => CppnWeights::canonical(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let t = generate_terrain(&spec, &w, &mut rng)?;
    if let Some(p) = &args.json {
        write_text(p, &to_json(&t))?;
    }
    if let Some(p) = &args.svg {
        write_text(p, &render_terrain(&spec, &t))?;
    }
    println!("min clearance {:.3}, water at {:.3}, {} creepers", t.min_clearance(), t.water_y, t.creepers.len());
    Ok(())
}

fn stumps(args: StumpArgs) -> BenchResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let track = generate_stumps(args.height, args.spacing, true, &mut rng)?;
    if let Some(p) = &args.json {
        write_text(p, &to_json(&track))?;
    }
    if let Some(p) = &args.svg {
        write_text(p, &render_stumps(&track))?;
    }
    println!("{} stumps", track.stumps.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Batch(a) => batch(a),
        Command::Compare(a) => compare(a),
        Command::Testset(a) => testset(a),
        Command::Plot(a) => plot(a),
        Command::Terrain(a) => terrain(a),
        Command::Stumps(a) => stumps(a),
        Command::Weights(a) => weights::write_file(&a.out, &CppnWeights::init(a.seed)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
