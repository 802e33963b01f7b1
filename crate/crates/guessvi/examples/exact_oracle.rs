//! Exact ground truth by strategy enumeration: values, an optimal strategy,
//! and the linear-solve residual on the hard MDP family.
//!
//! ```bash
//! cargo run --example exact_oracle
//! ```

use guessvi::generators::{gen_slow_mdp, SlowMdpLayout};
use guessvi::model::StateKind;
use guessvi::oracle::{exact_mdp_value, optimal_levels};

fn main() {
    let n = 4;
    let model = gen_slow_mdp(n);
    let lay = SlowMdpLayout::new(n);
    let sol = exact_mdp_value(&model).expect("enumeration oracle");
    let sigma = sol.strategy.clone().expect("optimal strategy");

    println!(
        "hard MDP with {n} chain pairs (residual {:.1e})\n",
        sol.residual
    );
    for s in 0..model.num_states() {
        let label = if s == lay.target {
            "target".to_string()
        } else if s == lay.sink {
            "sink".to_string()
        } else if s == lay.coin {
            "coin".to_string()
        } else if s % 2 == 0 {
            format!("decision {}", s / 2)
        } else {
            format!("chance {}", s / 2)
        };
        let choice = if model.kind_of[s] == StateKind::Decision && model.successors(s).len() > 1 {
            format!("   optimal choice -> state {}", sigma.choice[s])
        } else {
            String::new()
        };
        println!("{label:>12}: value {:.6}{choice}", sol.values[s]);
    }

    // the optimal strategy walks the whole chain, so its induced levels grow
    // with n even though the partition of the MDP has four classes
    let levels = optimal_levels(&model).expect("levels");
    println!("\nlevels of the optimal induced chain: {}", levels.k);
}
