//! Which states get guessed: the level-cutting selection on long chains and
//! its two guarantees, at most `9 sqrt(n)` picks and at most `sqrt(n)`
//! remaining levels.
//!
//! ```bash
//! cargo run --example mark_to_guess
//! ```

use guessvi::generators::gen_slow_mc;
use guessvi::graph::{compute_levels, mark_to_guess};

fn main() {
    println!(
        "{:>8}  {:>8}  {:>8}  {:>10}  {:>10}",
        "states", "levels", "picked", "9*sqrt(n)", "new levels"
    );
    for n in [25usize, 100, 400, 1600, 6400] {
        let model = gen_slow_mc(n, 0.5);
        let before = compute_levels(&model).k;
        let picks = mark_to_guess(&model);
        let mut reduced = model.clone();
        for &s in &picks.states {
            reduced = reduced.reduce(s, 0.0).expect("reduce");
        }
        let after = compute_levels(&reduced).k;
        println!(
            "{:>8}  {:>8}  {:>8}  {:>10.1}  {:>10}",
            model.num_states(),
            before,
            picks.states.len(),
            9.0 * (model.num_states() as f64).sqrt(),
            after,
        );
    }
    println!("\nfirst picks on the 400-chain: {:?}", {
        let picks = mark_to_guess(&gen_slow_mc(400, 0.5));
        picks.states.into_iter().take(8).collect::<Vec<_>>()
    });
}
