use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use subgrad::cli::{corpus_run, run_scenario, run_scenario_value, Overrides, Report, Scenario, ScenarioKind};
use subgrad::polykernel::{parse_rational, set_limits, Limits, NormSpec, Rational, RationalVector};

#[derive(Parser)]
#[command(name = "subgrad", version, about = "Exact Dini-Hadamard subdifferential calculus for PA and DC functions")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Seed for every sampling probe.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// l1, linf or l2approx:<k>.
    #[arg(long, global = true, value_parser = parse_norm)]
    norm: Option<NormSpec>,
    #[arg(long, global = true, value_parser = parse_q)]
    eps: Option<Rational>,
    #[arg(long, global = true, value_parser = parse_q)]
    eta: Option<Rational>,
    /// Comma separated rationals, e.g. `0,1/2`.
    #[arg(long, global = true, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<RationalVector>,
    #[arg(long, global = true)]
    max_dim: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dini-Hadamard ε-subdifferential of a DC function.
    Subdiff {
        #[arg(long = "function", alias = "dc")]
        function: PathBuf,
        /// `erosion` or `polar`.
        #[arg(long)]
        route: Option<String>,
    },
    /// Star-difference A ⊖* B of two polyhedra.
    Stardiff {
        #[arg(long = "A", alias = "a")]
        a: PathBuf,
        #[arg(long = "B", alias = "b")]
        b: PathBuf,
    },
    /// Checks one calculus claim.
    Check {
        #[arg(long)]
        claim: String,
        /// DC or PA convex function; the first summand for the sum rule.
        #[arg(long = "dc", alias = "function", alias = "f")]
        function: PathBuf,
        /// Second summand for the sum rule.
        #[arg(long)]
        g: Option<PathBuf>,
        /// Comma separated μ values for the intersection formula.
        #[arg(long)]
        mu: Option<String>,
        /// Comma separated η values for the stationarity corollary.
        #[arg(long)]
        etas: Option<String>,
    },
    /// Certifies blunt minimality for a cone-constrained DC problem.
    Certify {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Runs a sampling probe.
    Probe {
        /// calmness, dini, regularity, membership, gap or blunt.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        subgradient: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Regularity mode: convex, starshaped or directional.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Runs one scenario file.
    Run { scenario: PathBuf },
    /// Runs every scenario in a directory.
    Corpus {
        dir: PathBuf,
        /// Glob on file names, e.g. `rem*.json`.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn parse_norm(s: &str) -> Result<NormSpec, String> {
    s.parse().map_err(|e: subgrad::Error| e.to_string())
}

fn parse_q(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<RationalVector, String> {
    RationalVector::parse_list(s).map_err(|e| e.to_string())
}

fn path_value(p: &PathBuf) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

fn list_value(s: &Option<String>) -> Option<Vec<Value>> {
    s.as_ref().map(|s| s.split(',').map(|x| Value::String(x.trim().to_string())).collect())
}

fn scenario_for(cmd: &Command) -> Option<Scenario> {
    let sc = match cmd {
        Command::Subdiff { function, route } => Scenario {
            function: Some(path_value(function)),
            mode: route.clone(),
            ..Scenario::new(ScenarioKind::Subdiff)
        },
        Command::Stardiff { a, b } => Scenario {
            set_a: Some(path_value(a)),
            set_b: Some(path_value(b)),
            ..Scenario::new(ScenarioKind::Stardiff)
        },
        Command::Check { claim, function, g, mu, etas } => Scenario {
            claim: Some(claim.clone()),
            function: Some(path_value(function)),
            g: g.as_ref().map(path_value),
            mu: list_value(mu),
            etas: list_value(etas),
            ..Scenario::new(ScenarioKind::Check)
        },
        Command::Certify { problem } => {
            Scenario { problem: Some(path_value(problem)), ..Scenario::new(ScenarioKind::Certify) }
        }
        Command::Probe { kind, function, problem, direction, subgradient, alpha, mode } => Scenario {
            claim: Some(kind.clone()),
            function: function.as_ref().map(path_value),
            problem: problem.as_ref().map(path_value),
            direction: direction.clone().map(Value::String),
            subgradient: subgradient.clone().map(Value::String),
            alpha: alpha.clone().map(Value::String),
            mode: mode.clone(),
            ..Scenario::new(ScenarioKind::Probe)
        },
        Command::Run { .. } | Command::Corpus { .. } => return None,
    };
    Some(sc)
}

fn write_json(path: &Option<PathBuf>, text: &str) -> bool {
    if let Some(p) = path {
        if let Err(e) = std::fs::write(p, format!("{text}\n")) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return false;
        }
    }
    true
}

fn emit(report: &Report, json: &Option<PathBuf>) -> u8 {
    print!("{}", report.text);
    if !write_json(json, &report.to_json_string()) {
        return 3;
    }
    report.exit_code as u8
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; --help and --version are not.
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let g = &cli.global;
    let mut lim = Limits::from_env();
    if let Some(d) = g.max_dim {
        lim.max_dim = d;
    }
    set_limits(lim);
    let ov = Overrides {
        seed: g.seed,
        norm: g.norm,
        eps: g.eps.clone(),
        eta: g.eta.clone(),
        point: g.point.clone(),
        max_dim: g.max_dim,
    };
    let code = match &cli.command {
        Command::Run { scenario } => emit(&run_scenario(scenario, &ov), &g.json),
        Command::Corpus { dir, filter } => match corpus_run(dir, filter.as_deref(), &ov) {
            Ok(summary) => {
                print!("{}", summary.table());
                if write_json(&g.json, &summary.to_json_string()) {
                    summary.exit_code() as u8
                } else {
                    3
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                3
            }
        },
        cmd => {
            let sc = scenario_for(cmd).expect("single-scenario command");
            let name = match cmd {
                Command::Subdiff { .. } => "subdiff",
                Command::Stardiff { .. } => "stardiff",
                Command::Check { .. } => "check",
                Command::Certify { .. } => "certify",
                _ => "probe",
            };
            emit(&run_scenario_value(&sc, std::path::Path::new("."), name, &ov), &g.json)
        }
    };
    ExitCode::from(code)
}
