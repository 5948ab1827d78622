use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use msmcts::harness::{render_svg, run_suite, write_outputs, Difficulty, SuiteConfig, CSV_HEADER};
use msmcts::{generate_scene, plan, validate_plan, PlanFile, Scene, SceneConfig, SearchBudget};

#[derive(Parser)]
#[command(name = "msmcts", version, about = "Object rearrangement planning in a front-opening workspace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scene and write it as JSON.
    Gen(GenArgs),
    /// Plan a scene and write the plan as JSON (optionally an SVG trace).
    Plan(PlanArgs),
    /// Run a benchmark suite and write metrics.csv and cases.jsonl.
    Bench(BenchArgs),
    /// Replay a plan against a scene; exits 0 when valid, 1 otherwise.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct PlannerArgs {
    /// Per-run wall-clock limit in seconds; 0 disables it.
    #[arg(long = "timeout-s", default_value_t = 30.0)]
    timeout_s: f64,
    /// Maximum buffer regions proposed per expansion.
    #[arg(long, default_value_t = 5)]
    expansion_width: usize,
    /// UCB exploration constant.
    #[arg(long, default_value_t = 1.414)]
    ucb_c: f64,
    /// Iteration cap per stage.
    #[arg(long, default_value_t = 20_000)]
    max_iterations: usize,
}

impl PlannerArgs {
    fn budget(&self, seed: u64) -> SearchBudget {
        SearchBudget {
            max_iterations: self.max_iterations,
            wall_clock_limit: (self.timeout_s > 0.0).then(|| Duration::from_secs_f64(self.timeout_s)),
            expansion_width: self.expansion_width,
            exploration_constant: self.ucb_c,
            seed,
            ..SearchBudget::default()
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    objects: usize,
    #[arg(long, default_value_t = 1.0)]
    grid_res: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// Scene JSON.
    scene: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the scene's grid resolution.
    #[arg(long)]
    grid_res: Option<f64>,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Plan JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG trace here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// easy | medium | hard | all
    #[arg(long, default_value = "all")]
    difficulty: Difficulty,
    #[arg(long, default_value_t = 80)]
    cases: usize,
    /// Base seed; case i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force a fixed object count for every case.
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    grid_res: f64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    scene: PathBuf,
    plan: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let cfg = SceneConfig {
        n_objects: args.objects,
        grid_resolution: args.grid_res,
        rng_seed: args.seed,
        ..SceneConfig::default()
    };
    let scene = generate_scene(&cfg)?;
    write_or_print(args.out.as_deref(), &scene.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn plan_cmd(args: PlanArgs) -> Result<ExitCode> {
    let mut scene = Scene::from_json(&read(&args.scene)?)?;
    if let Some(res) = args.grid_res {
        let mut file = msmcts::SceneFile::from(&scene);
        file.grid_resolution = res;
        scene = file.into_scene()?;
    }
    let report = plan(&scene, &args.planner.budget(args.seed));
    let Some(p) = report.plan else {
        eprintln!(
            "planning failed after {:.2}s: {:?}",
            report.wall_time, report.failure_kind
        );
        return Ok(ExitCode::from(1));
    };
    let file = PlanFile::new(&p, report.wall_time);
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&file)?)?;
    if let Some(svg_path) = &args.svg {
        let svg = render_svg(&scene, &p)?;
        fs::write(svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
    }
    eprintln!(
        "{} steps, displacement {:.3}, {:.3}s",
        p.steps, p.total_displacement, report.wall_time
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    if args.cases == 0 {
        bail!("--cases must be at least 1");
    }
    let mut cfg = SuiteConfig::new(args.difficulty, args.cases, args.seed);
    cfg.scene.grid_resolution = args.grid_res;
    cfg.budget = args.planner.budget(args.seed);
    cfg.threads = args.threads;
    if let Some(n) = args.objects {
        for level in &mut cfg.levels {
            level.object_counts = vec![n];
        }
    }
    let result = run_suite(&cfg)?;
    write_outputs(&args.out, &result)?;
    println!("{CSV_HEADER}");
    for row in &result.rows {
        println!("{}", row.csv_line());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let scene = Scene::from_json(&read(&args.scene)?)?;
    let file: PlanFile = serde_json::from_str(&read(&args.plan)?)
        .with_context(|| format!("parsing {}", args.plan.display()))?;
    let report = validate_plan(&scene, &file.into_plan());
    if report.valid {
        println!("valid");
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "invalid at step {}: {}",
            report.failing_step.unwrap_or_default(),
            report.reason.unwrap_or_default()
        );
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Plan(a) => plan_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
