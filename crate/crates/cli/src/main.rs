//! `duallqr` command-line harness.
//!
//! Exit codes: 0 on success, 2 for configuration and input errors, 3 when the
//! numerics fail (singular covariances and the like).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use duallqr::demos::{load_set, save_set, synth_demos, SynthSpec};
use duallqr::harness::{
    self, load_rows, save_rows, select_best, selection_condition, AmplitudeLevel, Condition, EpisodeKey, SweepPlan,
};
use duallqr::metrics::{evaluate, REQUIRED_ACCURACY};
use duallqr::mixture::{fit_demo_set, load_model, save_model, EmOptions, EmSummary, ModelFile, DEFAULT_COMPONENTS};
use duallqr::sim::{run_episode, Axis};
use duallqr::{prepare, CostSpec, JointGmm, Method, SystemModel};

#[derive(Parser, Debug)]
#[command(
    name = "duallqr",
    version,
    about = "Fit task-parameterized models and benchmark LQR grasping controllers"
)]
struct Cli {
    /// TOML file with sweep plan fields; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic demonstration dataset.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Fit a two-frame mixture model to a dataset.
    Fit {
        /// Dataset directory.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_COMPONENTS)]
        components: usize,
        /// Resample demonstrations to this many steps first.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run one episode and write its log.
    Run(RunArgs),
    /// Run the benchmark grid and write one CSV row per episode.
    Sweep(SweepArgs),
    /// Summary table and plots from a sweep CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Highest control cost per method that reaches the accuracy threshold.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = REQUIRED_ACCURACY)]
        threshold: f64,
        /// Condition applied to every method, e.g. `static` or `orientation:high`.
        /// Each method's own default condition is used when omitted.
        #[arg(long)]
        condition: Option<String>,
    },
}

/// Episode timing flags shared by `run` and `sweep`.
#[derive(Args, Debug)]
struct Timing {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    freq: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    latency_ticks: Option<usize>,
}

impl Timing {
    fn apply(&self, plan: &mut SweepPlan) {
        if let Some(v) = self.dt {
            plan.dt = v;
        }
        if let Some(v) = self.horizon {
            plan.horizon = v;
        }
        if let Some(v) = self.freq {
            plan.frequency = v;
        }
        if let Some(v) = self.decay {
            plan.decay = v;
        }
        if let Some(v) = self.latency_ticks {
            plan.latency_ticks = v;
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    model: PathBuf,
    /// Episode log CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "DualLQR")]
    method: Method,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    /// Oscillating axis; omit for a static target.
    #[arg(long)]
    axis: Option<Axis>,
    /// Level name (low, medium, high) or a value in meters or radians.
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long, default_value_t = 0)]
    goal_index: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    timing: Timing,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    /// Result CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    axis: Vec<Axis>,
    /// Moving amplitude levels.
    #[arg(long, value_delimiter = ',')]
    amplitude: Vec<AmplitudeLevel>,
    /// Restrict the goal list to these indices.
    #[arg(long, value_delimiter = ',')]
    goal_index: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Skip the static-target condition.
    #[arg(long)]
    no_static: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    timing: Timing,
}

fn load_plan(path: Option<&Path>) -> anyhow::Result<SweepPlan> {
    let Some(path) = path else {
        return Ok(harness::default_plan());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let plan = toml::from_str(&text).map_err(|e| duallqr::Error::Parse {
        path: path.to_path_buf(),
        line: None,
        message: e.to_string(),
    })?;
    Ok(plan)
}

fn load_joint(path: &Path) -> anyhow::Result<JointGmm> {
    let file = load_model(path).with_context(|| format!("loading model {}", path.display()))?;
    Ok(file.to_model()?)
}

fn parse_condition(s: &str) -> anyhow::Result<Condition> {
    if s.eq_ignore_ascii_case("static") || s.eq_ignore_ascii_case("none") {
        return Ok(Condition::Static);
    }
    let Some((kind, level)) = s.split_once(':') else {
        bail!(duallqr::Error::InvalidArgument(format!(
            "condition {s:?} is not `static` or `<kind>:<level>`"
        )));
    };
    let level: AmplitudeLevel = level.parse()?;
    match kind.to_ascii_lowercase().as_str() {
        "orientation" => Ok(Condition::Orientation(level)),
        "position" => Ok(Condition::Position(level)),
        _ => bail!(duallqr::Error::InvalidArgument(format!(
            "unknown condition kind {kind:?}"
        ))),
    }
}

fn write_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn cmd_gen(out: &Path, seed: u64, count: usize, horizon: Option<usize>) -> anyhow::Result<()> {
    let mut spec = SynthSpec::default();
    if let Some(h) = horizon {
        spec.horizon = h;
    }
    let set = synth_demos(count, seed, &spec)?;
    save_set(&set, out)?;
    println!(
        "wrote {} demonstrations of {} steps to {}",
        set.len(),
        set.horizon(),
        out.display()
    );
    Ok(())
}

fn cmd_fit(data: &Path, out: &Path, seed: u64, k: usize, horizon: Option<usize>) -> anyhow::Result<()> {
    let set = load_set(data, horizon).with_context(|| format!("loading dataset {}", data.display()))?;
    let fit = fit_demo_set(&set, k, seed, &EmOptions::default())?;
    let em = EmSummary {
        seed,
        iterations: fit.iterations,
        converged: fit.converged,
        log_likelihood: fit.log_likelihood.last().copied().unwrap_or(f64::NAN),
    };
    write_parent(out)?;
    save_model(&ModelFile::from_model(&fit.model, set.fingerprint(), Some(em)), out)?;
    println!(
        "fitted {k} components in {} iterations, wrote {}",
        fit.iterations,
        out.display()
    );
    Ok(())
}

fn cmd_run(config: Option<&Path>, args: &RunArgs) -> anyhow::Result<()> {
    let mut plan = load_plan(config)?;
    args.timing.apply(&mut plan);
    plan.validate()?;
    if args.goal_index >= plan.goals.len() {
        bail!(duallqr::Error::InvalidArgument(format!(
            "goal index {} outside 0..{}",
            args.goal_index,
            plan.goals.len()
        )));
    }
    let joint = load_joint(&args.model)?;
    let pc = prepare(
        args.method,
        &joint,
        CostSpec::new(args.rho)?,
        SystemModel::new(plan.dt)?,
        plan.horizon,
    )?;

    let (level, value) = match args.amplitude.as_deref() {
        None => (AmplitudeLevel::High, None),
        Some(s) => match s.parse::<AmplitudeLevel>() {
            Ok(l) => (l, None),
            Err(_) => (
                AmplitudeLevel::High,
                Some(s.parse::<f64>().map_err(|_| {
                    duallqr::Error::InvalidArgument(format!("amplitude {s:?} is neither a level nor a number"))
                })?),
            ),
        },
    };
    let key = EpisodeKey {
        method: args.method,
        rho: args.rho,
        axis: args.axis,
        level: if args.axis.is_some() {
            level
        } else {
            AmplitudeLevel::None
        },
        goal_id: args.goal_index,
        seed: args.seed,
    };
    let mut config = plan.episode_config(&key);
    if let (Some(v), Some(_)) = (value, args.axis) {
        config.oscillation.amplitude = v;
    }
    let log = run_episode(&pc, &config)?;
    write_parent(&args.out)?;
    log.save_csv(&args.out)?;
    let m = evaluate(&log, &plan.limits)?;
    println!(
        "accuracy {:.3} over {} approach ticks, translation {:.3} m, rotation {:.3} rad, grasp {}",
        m.accuracy,
        m.approach_ticks,
        m.translation,
        m.rotation,
        m.grasp_time.map_or("none".to_string(), |t| format!("at {t:.2} s"))
    );
    Ok(())
}

fn cmd_sweep(config: Option<&Path>, args: &SweepArgs) -> anyhow::Result<()> {
    let mut plan = load_plan(config)?;
    args.timing.apply(&mut plan);
    if !args.method.is_empty() {
        plan.methods = args.method.clone();
    }
    if !args.rho.is_empty() {
        plan.rhos = args.rho.clone();
    }
    if !args.axis.is_empty() {
        plan.axes = args.axis.clone();
    }
    if !args.amplitude.is_empty() {
        plan.levels = args.amplitude.clone();
    }
    if !args.seed.is_empty() {
        plan.seeds = args.seed.clone();
    }
    if args.no_static {
        plan.include_static = false;
    }
    if !args.goal_index.is_empty() {
        plan.goals = args
            .goal_index
            .iter()
            .map(|&i| {
                plan.goals.get(i).copied().ok_or_else(|| {
                    duallqr::Error::InvalidArgument(format!("goal index {i} outside 0..{}", plan.goals.len()))
                })
            })
            .collect::<Result<_, _>>()?;
    }
    plan.validate()?;
    let joint = load_joint(&args.model)?;
    if joint.frames() != 2 {
        bail!(duallqr::Error::Unsupported(format!(
            "model has {} frames, sweeps need 2",
            joint.frames()
        )));
    }
    log::info!("running {} episodes", plan.episodes().len());
    let rows = harness::sweep(&plan, &joint, args.threads)?;
    write_parent(&args.out)?;
    save_rows(&rows, &args.out)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_report(input: &Path, out: &Path) -> anyhow::Result<()> {
    let rows = load_rows(input).with_context(|| format!("reading {}", input.display()))?;
    let table = harness::report(&rows, out)?;
    print!("{table}");
    Ok(())
}

fn cmd_select(input: &Path, threshold: f64, condition: Option<&str>) -> anyhow::Result<()> {
    let rows = load_rows(input).with_context(|| format!("reading {}", input.display()))?;
    let fixed = condition.map(parse_condition).transpose()?;
    let cond = |m: Method| fixed.unwrap_or_else(|| selection_condition(m));
    let picks: BTreeMap<Method, Option<f64>> = select_best(&rows, threshold, cond)?;
    for (m, rho) in picks {
        let shown = rho.map_or("none".to_string(), |r| format!("{r}"));
        println!("{m}\t{}\trho={shown}", cond(m).label());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<duallqr::Error>()) {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Gen {
            out,
            seed,
            count,
            horizon,
        } => cmd_gen(out, *seed, *count, *horizon),
        Command::Fit {
            data,
            out,
            seed,
            components,
            horizon,
        } => cmd_fit(data, out, *seed, *components, *horizon),
        Command::Run(args) => cmd_run(config, args),
        Command::Sweep(args) => cmd_sweep(config, args),
        Command::Report { input, out } => cmd_report(input, out),
        Command::Select {
            input,
            threshold,
            condition,
        } => cmd_select(input, *threshold, condition.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
