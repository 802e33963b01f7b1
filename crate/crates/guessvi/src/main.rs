use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use guessvi::bench::{parse_bench_spec, resolve_seed, run_bench, write_csv};
use guessvi::explicit::{parse_model, serialize_model};
use guessvi::generators::{gen_random, gen_slow_mc, gen_slow_mdp};
use guessvi::model::{Model, ModelKind, ObjectiveKind, StateKind};
use guessvi::oracle::exact_mdp_value;
use guessvi::solve::{solve, Algo, SolveOptions};

/// Certified value iteration for Markov chains and MDPs.
#[derive(Parser)]
#[command(name = "guessvi", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the value vector of a model file.
    Solve(SolveArgs),
    /// Print exact values from the enumeration oracle.
    Oracle(OracleArgs),
    /// Generate a model and print it in the explicit format.
    Gen(GenArgs),
    /// Run a benchmark specification and emit CSV rows.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Model file in the explicit format.
    #[arg(long)]
    model: PathBuf,
    /// Algorithm: vi, ivi, or gvi.
    #[arg(long)]
    algo: String,
    /// Additive approximation error.
    #[arg(long)]
    epsilon: f64,
    /// Random-walk rounds when picking a state to guess.
    #[arg(long, default_value_t = 10)]
    k1: u64,
    /// Iteration limit per guess verification.
    #[arg(long, default_value_t = 100)]
    k2: u64,
    /// Restart verifications from the trivial bounds instead of reusing the
    /// current ones.
    #[arg(long)]
    conservative_bounds: bool,
    /// Skip end-component collapsing (only safe if the model has no end
    /// component outside the targets).
    #[arg(long)]
    no_collapse_mecs: bool,
    /// Per-run timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Print the per-state bounds, not just the summary.
    #[arg(long)]
    values: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
}

#[derive(Subcommand)]
enum GenFamily {
    /// Slow chain: n probabilistic states that advance with probability p.
    SlowMc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The hard MDP with a constant number of partition classes.
    SlowMdp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random model where every state reaches a target.
    Random {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        branch: usize,
        /// Comma-separated probability grid rows are drawn from.
        #[arg(long, default_value = "0.1,0.25,0.5,1.0")]
        probs: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark specification file.
    #[arg(long)]
    spec: PathBuf,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated epsilon grid overriding the spec, for precision
    /// sweeps.
    #[arg(long)]
    epsilons: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits with status 2 by default, which is reserved for
            // timeouts here
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read_model(path: &PathBuf) -> Result<Model, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print_out(text);
            Ok(())
        }
    }
}

/// Write to stdout, exiting quietly if the downstream pipe has closed.
fn print_out(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).is_err() || stdout.flush().is_err() {
        std::process::exit(0);
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve(args) => {
            let model = read_model(&args.model)?;
            let algo = Algo::parse(&args.algo)
                .ok_or_else(|| format!("unknown algorithm `{}`", args.algo))?;
            let mut opts = SolveOptions::new(algo, args.epsilon);
            opts.k1 = args.k1;
            opts.k2 = args.k2;
            opts.conservative_bounds = args.conservative_bounds;
            opts.collapse_mecs = !args.no_collapse_mecs;
            opts.timeout = args.timeout.map(Duration::from_secs_f64);
            let outcome = solve(&model, &opts).map_err(|e| e.to_string())?;
            let report = &outcome.report;
            let mut text = format!(
                "algorithm={} states={} epsilon={} converged={} width={} updates={} sweeps={} time_s={:.6}\n",
                report.algorithm,
                model.num_states(),
                args.epsilon,
                report.converged,
                report.bounds.width(),
                report.bellman_updates,
                report.sweeps,
                report.wall_time.as_secs_f64(),
            );
            if args.values {
                for s in 0..model.num_states() {
                    text.push_str(&format!(
                        "state {s}: [{}, {}]\n",
                        report.bounds.lower[s], report.bounds.upper[s]
                    ));
                }
            }
            print_out(&text);
            Ok(if report.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Oracle(args) => {
            let model = read_model(&args.model)?;
            let sol = exact_mdp_value(&model).map_err(|e| e.to_string())?;
            let mut text = format!("residual={}\n", sol.residual);
            let strategy = sol.strategy.as_ref();
            for s in 0..model.num_states() {
                let choice = match (model.kind_of[s], strategy) {
                    (StateKind::Decision, Some(sigma)) if model.successors(s).len() > 1 => {
                        format!("  choose -> {}", sigma.choice[s])
                    }
                    _ => String::new(),
                };
                text.push_str(&format!("state {s}: {}{}\n", sol.values[s], choice));
            }
            print_out(&text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen(args) => {
            let (model, out) = match args.family {
                GenFamily::SlowMc { n, p, out } => (gen_slow_mc(n, p), out),
                GenFamily::SlowMdp { n, out } => (gen_slow_mdp(n), out),
                GenFamily::Random {
                    kind,
                    objective,
                    n,
                    branch,
                    probs,
                    seed,
                    out,
                } => {
                    let kind = match kind.as_str() {
                        "mc" => ModelKind::Mc,
                        "mdp" => ModelKind::Mdp,
                        other => return Err(format!("unknown kind `{other}`")),
                    };
                    let objective = match objective.as_str() {
                        "reach" => ObjectiveKind::Reach,
                        "ssp" => ObjectiveKind::Ssp,
                        other => return Err(format!("unknown objective `{other}`")),
                    };
                    let grid: Vec<f64> = probs
                        .split(',')
                        .map(|p| {
                            p.trim()
                                .parse::<f64>()
                                .map_err(|_| format!("bad probability `{p}`"))
                        })
                        .collect::<Result<_, _>>()?;
                    let seed = resolve_seed(seed);
                    (gen_random(kind, objective, n, branch, &grid, seed), out)
                }
            };
            emit(&serialize_model(&model), out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(args) => {
            let text = std::fs::read_to_string(&args.spec)
                .map_err(|e| format!("cannot read {}: {e}", args.spec.display()))?;
            let mut spec = parse_bench_spec(&text).map_err(|e| e.to_string())?;
            if let Some(grid) = args.epsilons {
                spec.epsilons = grid
                    .split(',')
                    .map(|e| {
                        e.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad epsilon `{e}`"))
                    })
                    .collect::<Result<_, _>>()?;
            }
            let rows = run_bench(&spec).map_err(|e| e.to_string())?;
            let timed_out = rows.iter().any(|r| r.timed_out);
            emit(&write_csv(&rows), args.out)?;
            Ok(if timed_out {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}
