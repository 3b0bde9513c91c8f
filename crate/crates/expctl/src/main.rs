use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expctl::compare::write_compare_csv;
use expctl::config::parse_initial;
use expctl::run::spec_from_manifest;
use expctl::{
    compare, config, read_throughput_csv, recipes, run, Axis, ExpError, ExperimentSpec, Method, Range, RunOutput,
    Series, SimSettings, Sweep, TransientEvent, TransientSettings,
};
use swarm_throughput::sim::InitialCondition;
use swarm_throughput::{ModelParams, PeerPolicy, PublisherPolicy};

#[derive(Parser)]
#[command(name = "expctl", version, about = "Throughput experiments for closed peer-to-peer swarms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact throughput from the Markov chain.
    Markov(Scenario),
    /// Large-population throughput from the queueing approximation.
    Queueing(Scenario),
    /// Throughput estimated by simulation.
    Simulate(Scenario),
    /// Closed-form throughput limit.
    Bound(Scenario),
    /// Distribution of one-club entry or exit times, by simulation.
    Transient {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "enter")]
        event: TransientEvent,
        #[arg(long, default_value_t = 0.9)]
        fraction: f64,
        /// Report times as `from:to:step`.
        #[arg(long, default_value = "0:100:1")]
        grid: Range,
    },
    /// Run an experiment file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment, writing one CSV and manifest per curve.
    Recipe {
        name: Option<String>,
        /// List the built-in experiments.
        #[arg(long)]
        list: bool,
        /// Print the experiment files instead of running them.
        #[arg(long)]
        show: bool,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
    /// Join two throughput curves on their sweep axis.
    Compare {
        /// Experiment file or throughput CSV.
        a: PathBuf,
        /// Experiment file or throughput CSV.
        b: PathBuf,
        /// Join axis; required when both inputs are CSV tables.
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat the run recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail unless the output equals the recorded CSV byte for byte.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Args)]
struct Scenario {
    #[arg(long, default_value_t = 3)]
    blocks: usize,
    #[arg(long, default_value_t = 10)]
    peers: u32,
    #[arg(long, default_value_t = 1.0)]
    publisher_capacity: f64,
    #[arg(long, default_value_t = 1.0)]
    peer_rate: f64,
    /// Upload rate of peers missing one block; defaults to the peer rate.
    #[arg(long)]
    endgame_rate: Option<f64>,
    #[arg(long, default_value = "RP_RUB")]
    publisher_policy: PublisherPolicy,
    #[arg(long, default_value = "RP_RUB")]
    peer_policy: PeerPolicy,
    #[arg(long)]
    shield_newcomers: bool,
    /// Rate at which finished peers leave; `inf` for immediate departure.
    #[arg(long, default_value_t = f64::INFINITY)]
    linger_rate: f64,
    /// `axis:from:to:step` with axis one of N, K, U, mu_prime_inverse, gamma.
    #[arg(long)]
    sweep: Option<Sweep>,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    #[arg(long, default_value_t = 1000.0)]
    horizon: f64,
    #[arg(long, default_value_t = 100.0)]
    warmup: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// `all_empty`, `one_club` or a state such as `k=3; {}=4; {1,2}=6`.
    #[arg(long, value_parser = parse_initial)]
    initial: Option<InitialCondition>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the experiment file for these options and exit.
    #[arg(long)]
    print_config: bool,
}

impl Scenario {
    fn spec(&self, method: Method) -> ExperimentSpec {
        let params = ModelParams {
            blocks: self.blocks,
            peers: self.peers,
            publisher_capacity: self.publisher_capacity,
            peer_rate: self.peer_rate,
            endgame_rate: self.endgame_rate.unwrap_or(self.peer_rate),
            publisher_policy: self.publisher_policy,
            peer_policy: self.peer_policy,
            shield_newcomers: self.shield_newcomers,
            linger_rate: self.linger_rate,
        };
        ExperimentSpec {
            sweep: self.sweep,
            sim: SimSettings {
                seed: self.rng_seed,
                horizon: self.horizon,
                warmup: self.warmup,
                replications: self.replications,
                initial: self.initial.clone(),
            },
            output: self.out.as_ref().map(|p| p.display().to_string()),
            ..ExperimentSpec::new(method, params)
        }
    }
}

fn read(path: &Path) -> Result<String, ExpError> {
    std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))
}

fn load_spec(path: &Path) -> Result<ExperimentSpec, ExpError> {
    config::parse(&read(path)?).map_err(|e| match e {
        ExpError::Config { line, field, message } => {
            ExpError::Config { line, field: format!("{}: {field}", path.display()), message }
        }
        other => other,
    })
}

/// Writes the table to `out` (with a manifest) or to stdout.
fn emit(output: &RunOutput, out: Option<&Path>) -> Result<u8, ExpError> {
    for (point, error) in output.failures() {
        eprintln!("point {}: {error}", point.index);
    }
    if let Some(curve) = output.population_curve() {
        eprintln!("peak {:.6} at N = {}, plateau (lambda_s) {:.6}", curve.peak, curve.peak_population, curve.plateau);
    }
    match out {
        Some(path) => {
            let manifest = output.write(path)?;
            eprintln!("wrote {} and {}", path.display(), manifest.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            output.table().write_csv(&mut stdout)?;
            stdout.flush().map_err(|e| ExpError::io("<stdout>", e))?;
        }
    }
    Ok(output.exit_code())
}

fn run_spec(spec: &ExperimentSpec, out: Option<&Path>) -> Result<u8, ExpError> {
    let output = run(spec)?;
    emit(&output, out)
}

fn scenario(s: &Scenario, spec: ExperimentSpec) -> Result<u8, ExpError> {
    if s.print_config {
        spec.validate()?;
        print!("{}", config::render(&spec));
        return Ok(0);
    }
    run_spec(&spec, s.out.as_deref())
}

fn series(path: &Path, axis: Option<Axis>) -> Result<Series, ExpError> {
    if path.extension().is_some_and(|e| e == "csv") {
        let axis = axis.ok_or_else(|| ExpError::spec("axis", "comparing CSV tables needs --axis"))?;
        let file = std::fs::File::open(path).map_err(|e| ExpError::io(path, e))?;
        return Ok(Series { axis, rows: read_throughput_csv(file)? });
    }
    let spec = load_spec(path)?;
    let sweep_axis = spec
        .sweep
        .map(|s| s.axis)
        .ok_or_else(|| ExpError::spec("sweep", format!("{} has no sweep to join on", path.display())))?;
    if let Some(axis) = axis.filter(|a| *a != sweep_axis) {
        return Err(ExpError::AxisMismatch { left: axis.to_string(), right: sweep_axis.to_string() });
    }
    Series::new(sweep_axis, run(&spec)?.table())
}

fn execute(command: Command) -> Result<u8, ExpError> {
    match command {
        Command::Markov(s) => scenario(&s, s.spec(Method::Markov)),
        Command::Queueing(s) => scenario(&s, s.spec(Method::Queueing)),
        Command::Simulate(s) => scenario(&s, s.spec(Method::Simulate)),
        Command::Bound(s) => scenario(&s, s.spec(Method::Bound)),
        Command::Transient { scenario: s, event, fraction, grid } => {
            let mut spec = s.spec(Method::Transient);
            spec.transient = Some(TransientSettings { event, fraction, grid });
            scenario(&s, spec)
        }
        Command::Run { config, out } => {
            let spec = load_spec(&config)?;
            let out = out.or_else(|| spec.output.as_ref().map(PathBuf::from));
            run_spec(&spec, out.as_deref())
        }
        Command::Recipe { name, list, show, out_dir } => {
            let Some(name) = name.filter(|_| !list) else {
                for r in recipes::RECIPES {
                    println!("{:<6} {}", r.name, r.description);
                }
                return Ok(0);
            };
            let recipe = recipes::find(&name)?;
            if show {
                for (curve, text) in recipe.curves {
                    println!("# --- {}/{curve}\n{text}", recipe.name);
                }
                return Ok(0);
            }
            let mut code = 0;
            for (curve, spec) in recipe.specs()? {
                let path = out_dir.join(recipe.name).join(format!("{curve}.csv"));
                eprintln!("{}/{curve}: {} points", recipe.name, spec.points().len());
                code = code.max(run_spec(&spec, Some(&path))?);
            }
            Ok(code)
        }
        Command::Compare { a, b, axis, out } => {
            let rows = compare(&series(&a, axis)?, &series(&b, axis)?)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| ExpError::io(&path, e))?;
                    write_compare_csv(&rows, file)?;
                }
                None => write_compare_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Replay { manifest, out, check } => {
            let spec = spec_from_manifest(&read(&manifest)?)?;
            let output = run(&spec)?;
            if check {
                let recorded = manifest.with_extension("").with_extension("csv");
                let expected = read(&recorded)?;
                if output.table().to_csv_string() != expected {
                    eprintln!("replay differs from {}", recorded.display());
                    return Ok(4);
                }
                eprintln!("replay matches {}", recorded.display());
            }
            emit(&output, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
