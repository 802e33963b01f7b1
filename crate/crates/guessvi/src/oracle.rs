//! Independent ground truth: exact Markov-chain values by direct linear
//! solving in extended precision, exact MDP values by positional-strategy
//! enumeration, and level extraction for optimal strategies.
//!
//! Nothing here shares code with the iterative solvers; the oracle exists so
//! that the solvers can be judged against an independent computation path.

use thiserror::Error;

use crate::dd::Dd;
use crate::graph::{compute_levels, Levels};
use crate::model::{Model, ModelError, ObjectiveKind, StateId, StateKind, Strategy};

/// Largest state space the dense elimination accepts.
pub const ORACLE_STATE_LIMIT: usize = 10_000;

/// Positional-strategy enumeration budget.
pub const STRATEGY_BUDGET: u64 = 1_000_000;

/// Tolerance at which a strategy's induced values must match the pointwise
/// optimum for it to be reported as optimal.
const STRATEGY_MATCH_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("model has {n} states, oracle accepts at most {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("state {state}: decision state with several successors is not a Markov chain")]
    NotAChain { state: StateId },
    #[error("singular linear system; unique-fixpoint preconditions violated")]
    Singular,
    #[error("state {state} has infinite SSP value")]
    InfiniteSspValue { state: StateId },
    #[error("strategy space of size {size} exceeds the enumeration budget {budget}")]
    EnumerationBudget { size: u64, budget: u64 },
    #[error("no positional strategy attains the pointwise optimum")]
    NoOptimalStrategy,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exact values, the witnessing strategy for MDPs, and the largest residual
/// of the solved linear systems.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub values: Vec<f64>,
    pub strategy: Option<Strategy>,
    pub residual: f64,
}

struct ChainSolution {
    values: Vec<f64>,
    residual: f64,
}

/// Backward reachability over the labeled graph: which states have a path
/// into `seeds`.
fn can_reach(model: &Model, seeds: &[bool]) -> Vec<bool> {
    let n = model.num_states();
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for &t in model.successors(s) {
            if t != s {
                preds[t].push(s);
            }
        }
    }
    let mut reach = seeds.to_vec();
    let mut queue: Vec<StateId> = (0..n).filter(|&s| reach[s]).collect();
    while let Some(s) = queue.pop() {
        for &p in &preds[s] {
            if !reach[p] {
                reach[p] = true;
                queue.push(p);
            }
        }
    }
    reach
}

/// Exact values of a Markov chain via partial-pivoted Gaussian elimination
/// in double-double precision.
///
/// For reachability, states that cannot reach the target set are pinned to
/// value zero before solving, which keeps the remaining system nonsingular.
/// For SSP, any state that fails to reach the targets almost surely makes the
/// value infinite and is rejected.
pub fn exact_mc_value(model: &Model) -> Result<ExactSolution, OracleError> {
    let n = model.num_states();
    if n > ORACLE_STATE_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: ORACLE_STATE_LIMIT,
        });
    }
    if let Some(s) =
        (0..n).find(|&s| model.kind_of[s] == StateKind::Decision && model.successors(s).len() != 1)
    {
        return Err(OracleError::NotAChain { state: s });
    }
    let sol = solve_chain(model, false)?;
    Ok(ExactSolution {
        values: sol.values,
        strategy: None,
        residual: sol.residual,
    })
}

fn solve_chain(model: &Model, allow_infinite: bool) -> Result<ChainSolution, OracleError> {
    let n = model.num_states();
    let reaches_target = can_reach(model, &model.objective.is_target);

    // pinned[s] = Some(exact value fixed before solving)
    let mut pinned: Vec<Option<f64>> = vec![None; n];
    for s in 0..n {
        if model.is_target(s) {
            pinned[s] = Some(model.weight(s));
        }
    }
    match model.objective.kind {
        ObjectiveKind::Reach => {
            for s in 0..n {
                if !reaches_target[s] && pinned[s].is_none() {
                    pinned[s] = Some(0.0);
                }
            }
        }
        ObjectiveKind::Ssp => {
            // infinite exactly where some zero-value state is reachable
            let zero: Vec<bool> = (0..n).map(|s| !reaches_target[s]).collect();
            let doomed = forward_closure(model, &zero);
            if let Some(s) = (0..n).find(|&s| doomed[s] && pinned[s].is_none()) {
                if !allow_infinite {
                    return Err(OracleError::InfiniteSspValue { state: s });
                }
                for s in 0..n {
                    if doomed[s] && pinned[s].is_none() {
                        pinned[s] = Some(f64::INFINITY);
                    }
                }
            }
        }
    }

    let free: Vec<StateId> = (0..n).filter(|&s| pinned[s].is_none()).collect();
    let index_of: Vec<Option<usize>> = {
        let mut ix = vec![None; n];
        for (i, &s) in free.iter().enumerate() {
            ix[s] = Some(i);
        }
        ix
    };
    let m = free.len();
    let mut a: Vec<Vec<Dd>> = vec![vec![Dd::ZERO; m]; m];
    let mut b: Vec<Dd> = vec![Dd::ZERO; m];
    for (row, &s) in free.iter().enumerate() {
        a[row][row] = Dd::new(1.0);
        if model.objective.kind == ObjectiveKind::Ssp {
            b[row] = b[row].add(Dd::new(model.weight(s)));
        }
        for (edge, &t) in model.successors(s).iter().enumerate() {
            let p = match model.kind_of[s] {
                StateKind::Probabilistic => model.probs(s)[edge],
                StateKind::Decision => 1.0,
            };
            match index_of[t] {
                Some(col) => a[row][col] = a[row][col].sub(Dd::new(p)),
                None => {
                    let v = pinned[t].expect("non-free states are pinned");
                    debug_assert!(v.is_finite(), "free states never feed on infinite values");
                    b[row] = b[row].add(Dd::new(p).mul_f64(v));
                }
            }
        }
    }
    let x = solve_linear(&mut a, &mut b)?;

    let mut values = vec![0.0; n];
    let mut exact: Vec<Dd> = vec![Dd::ZERO; n];
    for s in 0..n {
        match pinned[s] {
            Some(v) => {
                values[s] = v;
                exact[s] = Dd::new(v);
            }
            None => {
                let v = x[index_of[s].unwrap()];
                values[s] = v.to_f64();
                exact[s] = v;
            }
        }
    }

    // residual of the original fixpoint equations at the solved vector
    let mut residual = 0.0f64;
    for &s in &free {
        let mut rhs = if model.objective.kind == ObjectiveKind::Ssp {
            Dd::new(model.weight(s))
        } else {
            Dd::ZERO
        };
        for (edge, &t) in model.successors(s).iter().enumerate() {
            let p = match model.kind_of[s] {
                StateKind::Probabilistic => model.probs(s)[edge],
                StateKind::Decision => 1.0,
            };
            rhs = rhs.add(exact[t].mul_f64(p));
        }
        residual = residual.max(exact[s].sub(rhs).to_f64().abs());
    }
    Ok(ChainSolution { values, residual })
}

/// Forward closure: states from which some seed state is reachable.
fn forward_closure(model: &Model, seeds: &[bool]) -> Vec<bool> {
    let n = model.num_states();
    let mut hit = seeds.to_vec();
    // fixed-point over reversed edges of the reachability relation
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !hit[s] && model.successors(s).iter().any(|&t| hit[t]) {
                hit[s] = true;
                changed = true;
            }
        }
    }
    hit
}

fn solve_linear(a: &mut [Vec<Dd>], b: &mut [Dd]) -> Result<Vec<Dd>, OracleError> {
    let m = b.len();
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r][col].abs_hi() > a[piv][col].abs_hi() {
                piv = r;
            }
        }
        if a[piv][col].abs_hi() < 1e-300 {
            return Err(OracleError::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].div(a[col][col]);
            a[r][col] = Dd::ZERO;
            for c in col + 1..m {
                if !a[col][c].is_zero() {
                    a[r][c] = a[r][c].sub(factor.mul(a[col][c]));
                }
            }
            b[r] = b[r].sub(factor.mul(b[col]));
        }
    }
    let mut x = vec![Dd::ZERO; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for c in row + 1..m {
            if !a[row][c].is_zero() {
                acc = acc.sub(a[row][c].mul(x[c]));
            }
        }
        x[row] = acc.div(a[row][row]);
    }
    Ok(x)
}

/// Decision states with a real choice, in increasing id order.
fn choice_points(model: &Model) -> Vec<StateId> {
    (0..model.num_states())
        .filter(|&s| model.kind_of[s] == StateKind::Decision && model.successors(s).len() > 1)
        .collect()
}

fn strategy_from_odometer(model: &Model, points: &[StateId], odo: &[usize]) -> Strategy {
    let mut choice: Vec<StateId> = (0..model.num_states())
        .map(|s| model.successors(s)[0])
        .collect();
    for (i, &s) in points.iter().enumerate() {
        choice[s] = model.successors(s)[odo[i]];
    }
    Strategy { choice }
}

fn advance_odometer(model: &Model, points: &[StateId], odo: &mut [usize]) -> bool {
    for i in (0..points.len()).rev() {
        odo[i] += 1;
        if odo[i] < model.successors(points[i]).len() {
            return true;
        }
        odo[i] = 0;
    }
    false
}

/// Exact MDP values by enumerating every positional strategy, solving each
/// induced chain exactly, and reducing pointwise (max for reachability, min
/// for SSP). Also returns the first enumerated strategy whose induced values
/// attain the optimum.
pub fn exact_mdp_value(model: &Model) -> Result<ExactSolution, OracleError> {
    let n = model.num_states();
    if n > ORACLE_STATE_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: ORACLE_STATE_LIMIT,
        });
    }
    let points = choice_points(model);
    let mut size: u64 = 1;
    for &s in &points {
        size = size.saturating_mul(model.successors(s).len() as u64);
        if size > STRATEGY_BUDGET {
            return Err(OracleError::EnumerationBudget {
                size,
                budget: STRATEGY_BUDGET,
            });
        }
    }

    let maximize = model.objective.kind == ObjectiveKind::Reach;
    let mut opt: Vec<f64> = vec![
        if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        n
    ];
    let mut odo = vec![0usize; points.len()];
    loop {
        let sigma = strategy_from_odometer(model, &points, &odo);
        let induced = model.induced_mc(&sigma)?;
        let sol = solve_chain(&induced, true)?;
        for s in 0..n {
            opt[s] = if maximize {
                opt[s].max(sol.values[s])
            } else {
                opt[s].min(sol.values[s])
            };
        }
        if !advance_odometer(model, &points, &mut odo) {
            break;
        }
    }
    if let Some(s) = opt.iter().position(|v| !v.is_finite()) {
        return Err(OracleError::InfiniteSspValue { state: s });
    }

    // second pass: first strategy matching the pointwise optimum
    let mut odo = vec![0usize; points.len()];
    loop {
        let sigma = strategy_from_odometer(model, &points, &odo);
        let induced = model.induced_mc(&sigma)?;
        let sol = solve_chain(&induced, true)?;
        let deviation = sol
            .values
            .iter()
            .zip(&opt)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if deviation <= STRATEGY_MATCH_TOLERANCE {
            return Ok(ExactSolution {
                values: sol.values,
                strategy: Some(sigma),
                residual: sol.residual,
            });
        }
        if !advance_odometer(model, &points, &mut odo) {
            return Err(OracleError::NoOptimalStrategy);
        }
    }
}

/// Levels of the chain induced by the oracle's optimal strategy.
pub fn optimal_levels(model: &Model) -> Result<Levels, OracleError> {
    let sol = exact_mdp_value(model)?;
    let sigma = sol
        .strategy
        .expect("exact_mdp_value always returns a strategy");
    let induced = model.induced_mc(&sigma)?;
    Ok(compute_levels(&induced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_slow_mc, gen_slow_mdp, SlowMdpLayout};
    use crate::model::{build_model, ModelKind};
    use crate::vi::bellman_sweep;

    #[test]
    fn one_equation_reach() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Probabilistic, vec![(1, 0.3), (2, 0.7)]),
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(1, 1.0), (2, 0.0)],
            vec![],
        );
        let sol = exact_mc_value(&m).unwrap();
        assert!((sol.values[0] - 0.3).abs() < 1e-14);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn ssp_chain_sums_costs_including_target() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Ssp,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(2, 1.0)],
            vec![1.0, 1.0, 1.0],
        );
        let sol = exact_mc_value(&m).unwrap();
        assert_eq!(sol.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn slow_chain_values_are_all_ones() {
        // n = 2 by hand: v0 = p v1 + (1-p) v0 and v1 = p + (1-p) v0 force
        // v0 = v1 = 1 for every p in (0, 1)
        for (n, p) in [(2, 0.9), (3, 0.5), (6, 0.5)] {
            let m = gen_slow_mc(n, p);
            let sol = exact_mc_value(&m).unwrap();
            for s in 0..n {
                assert!((sol.values[s] - 1.0).abs() < 1e-12, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn ssp_rejects_unreachable_state() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Ssp,
            vec![
                (StateKind::Decision, vec![(0, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(2, 1.0)],
            vec![1.0, 1.0, 1.0],
        );
        assert!(matches!(
            exact_mc_value(&m),
            Err(OracleError::InfiniteSspValue { state: 0 })
        ));
    }

    #[test]
    fn reduced_value_propagates_through_a_chain() {
        // 0 -> 1 -> t; freezing state 1 at 0.2 makes state 0 worth 0.2
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(2, 1.0)],
            vec![],
        );
        let sol = exact_mc_value(&m.reduce(1, 0.2).unwrap()).unwrap();
        assert!((sol.values[0] - 0.2).abs() < 1e-15);
        assert_eq!(sol.values[1], 0.2);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        // 21 binary decision states: 2^21 positional strategies
        let n = 21;
        let mut rows = Vec::new();
        for _ in 0..n {
            rows.push((StateKind::Decision, vec![(n, 1.0), (n + 1, 1.0)]));
        }
        rows.push((StateKind::Decision, vec![(n, 1.0)]));
        rows.push((StateKind::Decision, vec![(n + 1, 1.0)]));
        let m = build_model(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            rows,
            vec![(n, 1.0), (n + 1, 0.0)],
            vec![],
        );
        assert!(matches!(
            exact_mdp_value(&m),
            Err(OracleError::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn no_enumerated_strategy_beats_the_returned_values() {
        let m = gen_slow_mdp(2);
        let sol = exact_mdp_value(&m).unwrap();
        let points = choice_points(&m);
        let mut odo = vec![0usize; points.len()];
        loop {
            let sigma = strategy_from_odometer(&m, &points, &odo);
            let induced = m.induced_mc(&sigma).unwrap();
            let vals = solve_chain(&induced, true).unwrap().values;
            for s in 0..m.num_states() {
                assert!(vals[s] <= sol.values[s] + 1e-10, "state {s}");
            }
            if !advance_odometer(&m, &points, &mut odo) {
                break;
            }
        }
    }

    #[test]
    fn mdp_picks_better_successor() {
        let m = build_model(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0), (2, 1.0)]),
                (StateKind::Probabilistic, vec![(3, 0.2), (4, 0.8)]),
                (StateKind::Probabilistic, vec![(3, 0.9), (4, 0.1)]),
                (StateKind::Decision, vec![(3, 1.0)]),
                (StateKind::Decision, vec![(4, 1.0)]),
            ],
            vec![(3, 1.0), (4, 0.0)],
            vec![],
        );
        let sol = exact_mdp_value(&m).unwrap();
        assert!((sol.values[0] - 0.9).abs() < 1e-12);
        assert_eq!(sol.strategy.unwrap().choice[0], 2);
    }

    #[test]
    fn mdp_oracle_on_mc_matches_chain_oracle() {
        let m = gen_slow_mc(5, 0.4);
        let a = exact_mc_value(&m).unwrap();
        let b = exact_mdp_value(&m).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn slow_mdp_coin_is_half_and_chain_is_one() {
        let m = gen_slow_mdp(3);
        let lay = SlowMdpLayout::new(3);
        let sol = exact_mdp_value(&m).unwrap();
        assert!((sol.values[lay.coin] - 0.5).abs() < 1e-12);
        for i in 0..3 {
            assert!((sol.values[lay.decision(i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_vector_is_a_bellman_fixpoint() {
        let m = gen_slow_mdp(2);
        let sol = exact_mdp_value(&m).unwrap();
        let swept = bellman_sweep(&m, &sol.values);
        for s in 0..m.num_states() {
            assert!((swept[s] - sol.values[s]).abs() <= 1e-9, "state {s}");
        }
    }

    #[test]
    fn optimal_levels_of_mc_match_compute_levels() {
        let m = gen_slow_mc(4, 0.5);
        let levels = optimal_levels(&m).unwrap();
        assert_eq!(levels, compute_levels(&m));
    }

    #[test]
    fn optimal_levels_grow_with_slow_chain_length() {
        let k3 = optimal_levels(&gen_slow_mdp(3)).unwrap().k;
        let k5 = optimal_levels(&gen_slow_mdp(5)).unwrap().k;
        assert!(k5 > k3);
        assert_eq!(k3, 6);
    }

    /// Iterative level assignment in the style of the prior partition:
    /// probabilistic states sit one above their lowest designated successor,
    /// decision states join the highest level among their successors once
    /// all of them are designated.
    fn prior_style_levels(model: &Model) -> Vec<usize> {
        let n = model.num_states();
        let mut level = vec![usize::MAX; n];
        for s in 0..n {
            if model.is_target(s) {
                level[s] = 0;
            }
        }
        loop {
            let mut changed = false;
            for s in 0..n {
                if level[s] != usize::MAX {
                    continue;
                }
                let succ_levels: Vec<usize> =
                    model.successors(s).iter().map(|&t| level[t]).collect();
                match model.kind_of[s] {
                    StateKind::Probabilistic => {
                        if let Some(&m) = succ_levels.iter().filter(|&&l| l != usize::MAX).min() {
                            level[s] = m + 1;
                            changed = true;
                        }
                    }
                    StateKind::Decision => {
                        if succ_levels.iter().all(|&l| l != usize::MAX) {
                            level[s] = *succ_levels.iter().max().unwrap();
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return level;
            }
        }
    }

    #[test]
    fn optimal_strategy_shortcut_beats_prior_style_levels() {
        // state 0 chooses between a one-step detour (state 1) and a four-step
        // probabilistic chain (states 3..=6); state 2 funnels into the
        // choice. Every value is one, the enumeration oracle settles the tie
        // on the shortcut, and the induced chain has fewer levels than the
        // prior-style assignment, which drags state 0 up to the chain's
        // level and state 2 one above it.
        let m = build_model(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0), (3, 1.0)]),
                (StateKind::Probabilistic, vec![(7, 1.0)]),
                (StateKind::Probabilistic, vec![(0, 1.0)]),
                (StateKind::Probabilistic, vec![(4, 1.0)]),
                (StateKind::Probabilistic, vec![(5, 1.0)]),
                (StateKind::Probabilistic, vec![(6, 1.0)]),
                (StateKind::Probabilistic, vec![(7, 1.0)]),
                (StateKind::Decision, vec![(7, 1.0)]),
            ],
            vec![(7, 1.0)],
            vec![],
        );
        let sol = exact_mdp_value(&m).unwrap();
        assert_eq!(
            sol.strategy.as_ref().unwrap().choice[0],
            1,
            "tie resolves to the shortcut"
        );
        let k_opt = optimal_levels(&m).unwrap().k;
        let prior = prior_style_levels(&m);
        let k_prior = *prior.iter().max().unwrap();
        assert_eq!(k_opt, 4);
        assert_eq!(k_prior, 5);
        assert!(k_opt < k_prior);
    }
}
