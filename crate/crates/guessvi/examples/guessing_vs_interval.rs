//! Compare the Bellman-update bill of interval iteration against guessing
//! value iteration on slow chains of growing length.
//!
//! Guessing pins the value of a well-connected state, which turns the chain
//! into fast-mixing reduced models; the speedup grows with the chain.
//!
//! ```bash
//! cargo run --example guessing_vs_interval
//! ```

use guessvi::generators::gen_slow_mc;
use guessvi::solve::{solve, Algo, SolveOptions};

fn main() {
    let epsilon = 1e-3;
    println!("epsilon = {epsilon}\n");
    println!(
        "{:>6}  {:>14}  {:>14}  {:>8}",
        "chain", "ivi updates", "gvi updates", "ratio"
    );
    for n in [6usize, 8, 10, 12, 14] {
        let model = gen_slow_mc(n, 0.5);
        let ivi = solve(&model, &SolveOptions::new(Algo::Ivi, epsilon))
            .expect("ivi")
            .report;
        let gvi = solve(&model, &SolveOptions::new(Algo::Gvi, epsilon))
            .expect("gvi")
            .report;
        assert!(ivi.converged && gvi.converged);
        println!(
            "{:>6}  {:>14}  {:>14}  {:>8.1}",
            n,
            ivi.bellman_updates,
            gvi.bellman_updates,
            ivi.bellman_updates as f64 / gvi.bellman_updates as f64
        );
    }
}
