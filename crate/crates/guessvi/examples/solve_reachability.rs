//! Build a small MDP in code and approximate its reachability values with
//! guessing value iteration.
//!
//! ```bash
//! cargo run --example solve_reachability
//! ```

use guessvi::model::{build_model, ModelKind, ObjectiveKind, StateKind};
use guessvi::solve::{solve, Algo, SolveOptions};

fn main() {
    // A controller at state 0 chooses between a risky route (state 1) and a
    // safe route (state 2); state 3 pays 1, state 4 pays nothing.
    let model = build_model(
        ModelKind::Mdp,
        ObjectiveKind::Reach,
        vec![
            (StateKind::Decision, vec![(1, 1.0), (2, 1.0)]),
            (StateKind::Probabilistic, vec![(3, 0.9), (4, 0.1)]),
            (StateKind::Probabilistic, vec![(3, 0.6), (4, 0.4)]),
            (StateKind::Decision, vec![(3, 1.0)]),
            (StateKind::Decision, vec![(4, 1.0)]),
        ],
        vec![(3, 1.0), (4, 0.0)],
        vec![],
    );

    let outcome = solve(&model, &SolveOptions::new(Algo::Gvi, 1e-6)).expect("solve");
    let report = &outcome.report;
    println!(
        "converged={} width={:.2e} bellman_updates={}",
        report.converged,
        report.bounds.width(),
        report.bellman_updates
    );
    for s in 0..model.num_states() {
        println!(
            "state {s}: value in [{:.8}, {:.8}]",
            report.bounds.lower[s], report.bounds.upper[s]
        );
    }
    // the risky route wins: value(0) = 0.9
}
