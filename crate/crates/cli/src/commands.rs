use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cmaoe_core::bench::{median_time_ratio, run_experiment, write_csv, ExperimentConfig};
use cmaoe_core::domains::{Domain, GenSpec, Instance, SizeParams};
use cmaoe_core::rational::{parse_rational, JsonRational};
use cmaoe_core::session::{AskRequest, Session};
use cmaoe_core::solver::{BranchingRule, SolutionReport};
use cmaoe_core::{solve, Model, SolveParams, Variant};

use crate::server;

pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "CMAOE_PORT";

#[derive(Debug, Parser)]
#[command(name = "cmaoe", version, about = "Contrastive explanations for multi-agent optimization problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance or copy out a shipped fixture.
    Gen(GenArgs),
    /// Solve an instance (or a raw model) to optimality.
    Solve(SolveArgs),
    /// List the questions that can be asked about a solution.
    Questions(QuestionsArgs),
    /// Ask why a variable is not 1 and print the explanation.
    Ask(AskArgs),
    /// Run a benchmark experiment and write CSV.
    Bench(BenchArgs),
    /// Serve the HTTP/JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Solver time limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long, value_enum, default_value = "solution-first")]
    pub branching: Branching,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Branching {
    SolutionFirst,
    MaxObjective,
}

impl SolverFlags {
    pub fn params(&self) -> SolveParams {
        let branching = match self.branching {
            Branching::SolutionFirst => BranchingRule::SolutionFirst,
            Branching::MaxObjective => BranchingRule::MaxObjective,
        };
        SolveParams { time_limit: self.time_limit, node_limit: self.node_limit, branching, ..SolveParams::default() }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub domain: Domain,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shipped fixture name; overrides seed and size flags.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub tasks: Option<usize>,
    #[arg(long)]
    pub tables: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub vehicles: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct QuestionsArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
}

#[derive(Debug, Args)]
pub struct AskArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
    /// Variable name, e.g. "x[Alice][bed]".
    #[arg(long = "var")]
    pub variable: String,
    #[arg(long, default_value = "q")]
    pub variant: VariantFlag,
    /// Custom weights; both or neither.
    #[arg(long, requires = "beta", value_parser = rational_arg)]
    pub alpha: Option<JsonRational>,
    #[arg(long, requires = "alpha", value_parser = rational_arg)]
    pub beta: Option<JsonRational>,
    /// Write the full JSON response here; the rendered text goes to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum VariantFlag {
    Q,
    C,
}

fn rational_arg(text: &str) -> Result<JsonRational, String> {
    parse_rational(text).map(JsonRational)
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub domain: Domain,
    /// Experiment config JSON; its domain is replaced by --domain.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listening port; the CMAOE_PORT environment variable takes precedence.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory for persisted session files.
    #[arg(long, default_value = "sessions")]
    pub data_dir: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
}

impl ServeArgs {
    pub fn port(&self, env: Option<&str>) -> Result<u16> {
        match env {
            Some(v) => v.trim().parse().with_context(|| format!("{PORT_ENV}={v:?} is not a port number")),
            None => Ok(self.port.unwrap_or(DEFAULT_PORT)),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

/// Input of `solve`: a domain instance or a raw model.
enum Problem {
    Instance(Instance),
    Model(Model),
}

fn read_problem(path: &Path) -> Result<Problem> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("variables").is_some() {
        let model = serde_json::from_value(value).with_context(|| format!("{} is not a valid model", path.display()))?;
        return Ok(Problem::Model(model));
    }
    let instance =
        serde_json::from_value(value).with_context(|| format!("{} is not a valid instance", path.display()))?;
    Ok(Problem::Instance(instance))
}

fn read_session(instance: &Path, solution: &Path, params: &SolveParams) -> Result<Session> {
    let instance: Instance = read_json(instance)?;
    let (model, _) = instance.build()?;
    let report: SolutionReport = read_json(solution)?;
    let result = report.into_result(&model)?;
    Ok(Session::from_solution(instance, result, params)?)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => {
            let size = SizeParams {
                agents: args.agents,
                items: args.items,
                tasks: args.tasks,
                tables: args.tables,
                points: args.points,
                vehicles: args.vehicles,
            };
            let spec = GenSpec { domain: args.domain, size, seed: args.seed, fixture: args.fixture };
            let instance = spec.realize()?;
            emit(args.output.as_deref(), &serde_json::to_string_pretty(&instance)?)
        }
        Command::Solve(args) => {
            let model = match read_problem(&args.instance)? {
                Problem::Instance(i) => i.build()?.0,
                Problem::Model(m) => m,
            };
            let result = solve(&model, &args.solver.params())?;
            let report = result.report(&model);
            eprintln!("{:?}, objective {}", report.status, report.objective_text().unwrap_or_else(|| "none".into()));
            emit(args.output.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::Questions(args) => {
            let session = read_session(&args.instance, &args.solution, &SolveParams::default())?;
            emit(None, &serde_json::to_string_pretty(&session.questions())?)
        }
        Command::Ask(args) => {
            let session = read_session(&args.instance, &args.solution, &args.solver.params())?;
            let variant = match args.variant {
                VariantFlag::Q => Variant::Q,
                VariantFlag::C => Variant::C,
            };
            let request = AskRequest { variable: args.variable, variant: Some(variant), alpha: args.alpha, beta: args.beta };
            let response = session.answer(&request, std::time::Instant::now())?;
            if let Some(path) = &args.output {
                emit(Some(path), &serde_json::to_string_pretty(&response)?)?;
            }
            emit(None, &response.rendered.text)
        }
        Command::Bench(args) => {
            let mut config = match &args.config {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    ExperimentConfig::from_json(&text)?
                }
                None => ExperimentConfig::for_domain(args.domain),
            };
            if config.domain != args.domain {
                let explicit_sizes = args.config.is_some() && config.sizes != cmaoe_core::bench::default_ladder(config.domain);
                config.domain = args.domain;
                if !explicit_sizes {
                    config.sizes = cmaoe_core::bench::default_ladder(args.domain);
                }
            }
            let records = run_experiment(&config)?;
            match &args.out {
                Some(path) => write_csv(&records, fs::File::create(path)?)?,
                None => write_csv(&records, io::stdout().lock())?,
            }
            match median_time_ratio(&records) {
                Some(r) => eprintln!("{} records, median t_explain/t_solve {r:.3}", records.len()),
                None => eprintln!("{} records, no optimal records", records.len()),
            }
            Ok(())
        }
        Command::Serve(args) => {
            let port = args.port(std::env::var(PORT_ENV).ok().as_deref())?;
            if args.solver.time_limit <= 0.0 {
                bail!("time limit must be positive");
            }
            let state = server::AppState::new(args.data_dir.clone(), args.solver.params());
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(SocketAddr::new(args.host, port), state))
        }
    }
}
