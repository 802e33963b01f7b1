//! Run a benchmark specification in memory and print the CSV rows, including
//! the epsilon grid used for precision-dependency studies.
//!
//! ```bash
//! cargo run --example benchmark
//! ```

use guessvi::bench::{parse_bench_spec, run_bench, write_csv};

const SPEC: &str = "\
algos = vi,ivi,gvi
# epsilon grid: how does each algorithm scale as precision tightens
epsilons = 1e-2,1e-3,1e-4
seed = 1
oracle = true
instance = slow-mc n=10 p=0.5
instance = slow-mdp n=3
instance = random kind=mdp objective=reach n=12 branch=2
";

fn main() {
    let spec = parse_bench_spec(SPEC).expect("spec");
    let rows = run_bench(&spec).expect("bench");
    print!("{}", write_csv(&rows));
    eprintln!(
        "\n# {} rows; oracle_error is the midpoint error against the enumeration oracle",
        rows.len()
    );
    eprintln!("# note the vi rows: converged fast, final_width small, oracle_error large");
}
