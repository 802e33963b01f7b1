//! Benchmark runner: a line-oriented run specification, deterministic
//! execution, and plot-ready CSV output.
//!
//! Run specifications are `key = value` lines; `instance` may repeat:
//!
//! ```text
//! algos = vi,ivi,gvi
//! epsilons = 1e-3,1e-6
//! seed = 7
//! timeout_s = 30
//! oracle = true
//! instance = slow-mc n=12 p=0.5
//! instance = slow-mdp n=4
//! instance = random kind=mdp objective=reach n=15 branch=3 seed=3
//! instance = file models/example.gvi
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use crate::explicit::{parse_model, ExplicitError};
use crate::generators::{gen_random, gen_slow_mc, gen_slow_mdp};
use crate::model::{Model, ModelKind, ObjectiveKind};
use crate::oracle::exact_mdp_value;
use crate::solve::{solve, Algo, SolveFailure, SolveOptions};

/// Exact CSV header emitted by [`write_csv`].
pub const CSV_HEADER: &str =
    "instance,algorithm,epsilon,bellman_updates,wall_time_s,final_width,oracle_error,seed";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bench spec line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("instance {name}: {source}")]
    Run { name: String, source: SolveFailure },
    #[error("cannot read model file {path}: {message}")]
    File { path: String, message: String },
    #[error("model file {path}: {source}")]
    Parse { path: String, source: ExplicitError },
}

fn spec_err(line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Spec {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub enum InstanceSpec {
    SlowMc {
        n: usize,
        p: f64,
    },
    SlowMdp {
        n: usize,
    },
    Random {
        kind: ModelKind,
        objective: ObjectiveKind,
        n: usize,
        branch: usize,
        seed: Option<u64>,
    },
    File {
        path: String,
    },
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub instances: Vec<InstanceSpec>,
    pub algos: Vec<Algo>,
    pub epsilons: Vec<f64>,
    pub seed: Option<u64>,
    pub timeout_s: Option<f64>,
    pub oracle: bool,
}

/// One measurement cell.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: &'static str,
    pub epsilon: f64,
    pub bellman_updates: u64,
    pub wall_time_s: f64,
    pub final_width: f64,
    pub oracle_error: Option<f64>,
    pub seed: u64,
    pub converged: bool,
    pub timed_out: bool,
}

/// Parse a bench run specification.
pub fn parse_bench_spec(text: &str) -> Result<BenchSpec, BenchError> {
    let mut spec = BenchSpec {
        instances: Vec::new(),
        algos: vec![Algo::Vi, Algo::Ivi, Algo::Gvi],
        epsilons: vec![1e-3],
        seed: None,
        timeout_s: None,
        oracle: false,
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| spec_err(line_no, "expected `key = value`"))?;
        match key {
            "algos" => {
                spec.algos = value
                    .split(',')
                    .map(|a| {
                        Algo::parse(a.trim())
                            .ok_or_else(|| spec_err(line_no, format!("unknown algorithm `{a}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "epsilon" | "epsilons" => {
                spec.epsilons = value
                    .split(',')
                    .map(|e| {
                        e.trim()
                            .parse::<f64>()
                            .map_err(|_| spec_err(line_no, format!("bad epsilon `{e}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "seed" => {
                spec.seed = Some(
                    value
                        .parse()
                        .map_err(|_| spec_err(line_no, format!("bad seed `{value}`")))?,
                );
            }
            "timeout_s" => {
                spec.timeout_s = Some(
                    value
                        .parse()
                        .map_err(|_| spec_err(line_no, format!("bad timeout `{value}`")))?,
                );
            }
            "oracle" => {
                spec.oracle = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(spec_err(line_no, "oracle must be true or false")),
                };
            }
            "instance" => spec.instances.push(parse_instance(line_no, value)?),
            other => return Err(spec_err(line_no, format!("unknown key `{other}`"))),
        }
    }
    if spec.instances.is_empty() {
        return Err(spec_err(text.lines().count(), "no instances given"));
    }
    Ok(spec)
}

fn parse_instance(line_no: usize, value: &str) -> Result<InstanceSpec, BenchError> {
    let mut words = value.split_whitespace();
    let head = words
        .next()
        .ok_or_else(|| spec_err(line_no, "empty instance"))?;
    if head == "file" {
        let path: Vec<&str> = words.collect();
        if path.len() != 1 {
            return Err(spec_err(line_no, "expected `file <path>`"));
        }
        return Ok(InstanceSpec::File {
            path: path[0].to_string(),
        });
    }
    let mut args = BTreeMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| spec_err(line_no, format!("expected key=value, got `{w}`")))?;
        args.insert(k.to_string(), v.to_string());
    }
    let get_usize = |args: &BTreeMap<String, String>, key: &str| -> Result<usize, BenchError> {
        args.get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| spec_err(line_no, format!("instance needs `{key}=<count>`")))
    };
    match head {
        "slow-mc" => {
            let n = get_usize(&args, "n")?;
            let p = args
                .get("p")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| spec_err(line_no, "slow-mc needs `p=<prob>`"))?;
            Ok(InstanceSpec::SlowMc { n, p })
        }
        "slow-mdp" => Ok(InstanceSpec::SlowMdp {
            n: get_usize(&args, "n")?,
        }),
        "random" => {
            let kind = match args.get("kind").map(String::as_str) {
                Some("mc") => ModelKind::Mc,
                Some("mdp") => ModelKind::Mdp,
                _ => return Err(spec_err(line_no, "random needs `kind=mc|mdp`")),
            };
            let objective = match args.get("objective").map(String::as_str) {
                Some("reach") => ObjectiveKind::Reach,
                Some("ssp") => ObjectiveKind::Ssp,
                _ => return Err(spec_err(line_no, "random needs `objective=reach|ssp`")),
            };
            let n = get_usize(&args, "n")?;
            let branch = get_usize(&args, "branch")?;
            let seed = match args.get("seed") {
                Some(v) => Some(
                    v.parse()
                        .map_err(|_| spec_err(line_no, format!("bad seed `{v}`")))?,
                ),
                None => None,
            };
            Ok(InstanceSpec::Random {
                kind,
                objective,
                n,
                branch,
                seed,
            })
        }
        other => Err(spec_err(
            line_no,
            format!("unknown instance family `{other}`"),
        )),
    }
}

/// Default probability grid for `random` bench instances.
const BENCH_PROB_GRID: [f64; 4] = [0.1, 0.25, 0.5, 1.0];

fn instance_name(spec: &InstanceSpec, seed: u64) -> String {
    match spec {
        InstanceSpec::SlowMc { n, p } => format!("slow-mc-n{n}-p{p}"),
        InstanceSpec::SlowMdp { n } => format!("slow-mdp-n{n}"),
        InstanceSpec::Random {
            kind,
            objective,
            n,
            branch,
            ..
        } => {
            let k = if *kind == ModelKind::Mc { "mc" } else { "mdp" };
            let o = if *objective == ObjectiveKind::Reach {
                "reach"
            } else {
                "ssp"
            };
            format!("random-{k}-{o}-n{n}-b{branch}-s{seed}")
        }
        InstanceSpec::File { path } => std::path::Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.clone()),
    }
}

fn build_instance(
    spec: &InstanceSpec,
    base_seed: u64,
    index: usize,
) -> Result<(String, Model, u64), BenchError> {
    let seed = match spec {
        InstanceSpec::Random { seed, .. } => seed.unwrap_or(base_seed.wrapping_add(index as u64)),
        _ => base_seed,
    };
    let model = match spec {
        InstanceSpec::SlowMc { n, p } => gen_slow_mc(*n, *p),
        InstanceSpec::SlowMdp { n } => gen_slow_mdp(*n),
        InstanceSpec::Random {
            kind,
            objective,
            n,
            branch,
            ..
        } => gen_random(*kind, *objective, *n, *branch, &BENCH_PROB_GRID, seed),
        InstanceSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| BenchError::File {
                path: path.clone(),
                message: e.to_string(),
            })?;
            parse_model(&text).map_err(|e| BenchError::Parse {
                path: path.clone(),
                source: e,
            })?
        }
    };
    Ok((instance_name(spec, seed), model, seed))
}

/// Seed used when neither the spec nor `GUESSVI_SEED` provides one.
pub const DEFAULT_SEED: u64 = 0;

/// Resolve the base seed: an explicit spec seed wins, then the
/// `GUESSVI_SEED` environment variable, then [`DEFAULT_SEED`].
pub fn resolve_seed(spec_seed: Option<u64>) -> u64 {
    spec_seed
        .or_else(|| {
            std::env::var("GUESSVI_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED)
}

/// Run every (instance, algorithm, epsilon) cell of the spec.
///
/// Rows come back sorted by instance, algorithm, and epsilon, independent of
/// execution order; timed-out cells are flagged on the row, never dropped.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, BenchError> {
    let base_seed = resolve_seed(spec.seed);
    let mut rows = Vec::new();
    for (index, inst) in spec.instances.iter().enumerate() {
        let (name, model, seed) = build_instance(inst, base_seed, index)?;
        let oracle_values = if spec.oracle {
            exact_mdp_value(&model).ok().map(|sol| sol.values)
        } else {
            None
        };
        for &epsilon in &spec.epsilons {
            for &algo in &spec.algos {
                let mut opts = SolveOptions::new(algo, epsilon);
                opts.timeout = spec.timeout_s.map(Duration::from_secs_f64);
                let outcome = solve(&model, &opts).map_err(|e| BenchError::Run {
                    name: name.clone(),
                    source: e,
                })?;
                let report = outcome.report;
                let oracle_error = oracle_values.as_ref().map(|vals| {
                    report
                        .bounds
                        .midpoint()
                        .iter()
                        .zip(vals)
                        .map(|(m, v)| (m - v).abs())
                        .fold(0.0, f64::max)
                });
                rows.push(BenchRow {
                    instance: name.clone(),
                    algorithm: algo.name(),
                    epsilon,
                    bellman_updates: report.bellman_updates,
                    wall_time_s: report.wall_time.as_secs_f64(),
                    final_width: report.bounds.width(),
                    oracle_error,
                    seed,
                    converged: report.converged,
                    timed_out: outcome.timed_out,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.instance
            .cmp(&b.instance)
            .then_with(|| a.algorithm.cmp(b.algorithm))
            .then_with(|| a.epsilon.total_cmp(&b.epsilon))
    });
    Ok(rows)
}

/// Render rows as CSV under the fixed, versioned schema. Absent oracle
/// errors are written as `NA`.
pub fn write_csv(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for row in rows {
        let oracle = match row.oracle_error {
            Some(e) => format!("{e}"),
            None => "NA".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{}",
            row.instance,
            row.algorithm,
            row.epsilon,
            row.bellman_updates,
            row.wall_time_s,
            row.final_width,
            oracle,
            row.seed
        );
    }
    out
}

/// Drop the wall-time column, the only field excluded from the determinism
/// contract.
pub fn csv_without_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            if fields.len() > 4 {
                fields.remove(4);
            }
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = "\
# two instances, two algorithms
algos = ivi,gvi
epsilon = 1e-3
seed = 5
instance = slow-mc n=6 p=0.5
instance = random kind=mc objective=reach n=10 branch=2
";

    #[test]
    fn parses_spec() {
        let spec = parse_bench_spec(SPEC).unwrap();
        assert_eq!(spec.algos, vec![Algo::Ivi, Algo::Gvi]);
        assert_eq!(spec.instances.len(), 2);
        assert_eq!(spec.seed, Some(5));
    }

    #[test]
    fn two_by_two_yields_four_rows() {
        let spec = parse_bench_spec(SPEC).unwrap();
        let rows = run_bench(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.converged);
            assert!(row.final_width <= 1e-3);
        }
    }

    #[test]
    fn same_seed_is_deterministic_modulo_wall_time() {
        let spec = parse_bench_spec(SPEC).unwrap();
        let a = write_csv(&run_bench(&spec).unwrap());
        let b = write_csv(&run_bench(&spec).unwrap());
        assert_eq!(csv_without_wall_time(&a), csv_without_wall_time(&b));
    }

    #[test]
    fn csv_headers_are_fixed() {
        let spec = parse_bench_spec(SPEC).unwrap();
        let csv = write_csv(&run_bench(&spec).unwrap());
        assert!(csv.starts_with(
            "instance,algorithm,epsilon,bellman_updates,wall_time_s,final_width,oracle_error,seed\n"
        ));
    }

    #[test]
    fn slow_chain_rows_favor_guessing() {
        let spec =
            parse_bench_spec("algos = ivi,gvi\nepsilon = 1e-3\ninstance = slow-mc n=12 p=0.5\n")
                .unwrap();
        let rows = run_bench(&spec).unwrap();
        let updates = |algo: &str| {
            rows.iter()
                .find(|r| r.algorithm == algo)
                .map(|r| r.bellman_updates)
                .unwrap()
        };
        assert!(updates("gvi") < updates("ivi"));
    }

    #[test]
    fn rejects_unknown_key() {
        let err = parse_bench_spec("bogus = 1\ninstance = slow-mdp n=2\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }
}
