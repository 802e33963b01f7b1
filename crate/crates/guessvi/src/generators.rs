//! Instance generators: the two hard-instance families and a seeded random
//! corpus generator.

use crate::model::{build_model, Model, ModelKind, ObjectiveKind, StateId, StateKind};

/// SplitMix64, used for every seeded generator so that output is a pure
/// function of the seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` (`bound` must be nonzero).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// The classic slow chain: `n` transient probabilistic states where state `i`
/// advances toward the target with probability `p` and falls back to the
/// state furthest from the target with probability `1 - p`. Every transient
/// state has reachability value one, yet plain VI converges geometrically
/// slowly in `n`.
///
/// States `0..n` are the chain (state 0 furthest from the target), state `n`
/// is the target with weight 1.
pub fn gen_slow_mc(n: usize, p: f64) -> Model {
    assert!(n >= 2, "chain length must be at least 2");
    assert!(p > 0.0 && p < 1.0, "advance probability must be in (0, 1)");
    let target = n;
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..n {
        // state 0's fallback is a self-loop
        rows.push((StateKind::Probabilistic, vec![(0, 1.0 - p), (i + 1, p)]));
    }
    rows.push((StateKind::Decision, vec![(target, 1.0)]));
    let m = build_model(
        ModelKind::Mc,
        ObjectiveKind::Reach,
        rows,
        vec![(target, 1.0)],
        vec![],
    );
    debug_assert_eq!(m.validate(), Ok(()));
    m
}

/// Layout of [`gen_slow_mdp`], for tests and examples that need to address
/// specific states.
#[derive(Debug, Clone, Copy)]
pub struct SlowMdpLayout {
    pub n: usize,
    pub target: StateId,
    pub sink: StateId,
    pub coin: StateId,
}

impl SlowMdpLayout {
    pub fn new(n: usize) -> Self {
        SlowMdpLayout {
            n,
            target: 2 * n,
            sink: 2 * n + 1,
            coin: 2 * n + 2,
        }
    }

    /// Decision state at chain position `i` (0-based, position 0 furthest
    /// from the target).
    pub fn decision(&self, i: usize) -> StateId {
        2 * i
    }

    /// Probabilistic state following decision state `i`.
    pub fn probabilistic(&self, i: usize) -> StateId {
        2 * i + 1
    }
}

/// The hard MDP family: a long alternating chain of decision and
/// probabilistic states where probabilistic states either advance toward the
/// target or fall back to the decision state furthest from it, plus a sink
/// and a coin state that reaches the target and the sink with equal
/// probability. Every decision state may also jump to the coin state, which
/// keeps the number of partition classes constant while the optimal value of
/// all chain states stays one.
///
/// Probabilistic states branch uniformly over their outgoing edges.
pub fn gen_slow_mdp(n: usize) -> Model {
    assert!(n >= 2, "chain length must be at least 2 pairs");
    let lay = SlowMdpLayout::new(n);
    let mut rows: Vec<(StateKind, Vec<(StateId, f64)>)> =
        vec![(StateKind::Decision, vec![]); 2 * n + 3];
    for i in 0..n {
        let d = lay.decision(i);
        let p = lay.probabilistic(i);
        let next = if i + 1 < n {
            lay.decision(i + 1)
        } else {
            lay.target
        };
        rows[d] = (StateKind::Decision, vec![(p, 1.0), (lay.coin, 1.0)]);
        rows[p] = (
            StateKind::Probabilistic,
            vec![(lay.decision(0), 0.5), (next, 0.5)],
        );
    }
    rows[lay.target] = (StateKind::Decision, vec![(lay.target, 1.0)]);
    rows[lay.sink] = (StateKind::Decision, vec![(lay.sink, 1.0)]);
    rows[lay.coin] = (
        StateKind::Probabilistic,
        vec![(lay.target, 0.5), (lay.sink, 0.5)],
    );
    let m = build_model(
        ModelKind::Mdp,
        ObjectiveKind::Reach,
        rows,
        vec![(lay.target, 1.0)],
        vec![],
    );
    debug_assert_eq!(m.validate(), Ok(()));
    m
}

/// The strategy on [`gen_slow_mdp`] that always advances along the chain.
pub fn slow_mdp_advance_strategy(n: usize) -> crate::model::Strategy {
    let lay = SlowMdpLayout::new(n);
    let mut choice = vec![0; 2 * n + 3];
    for i in 0..n {
        choice[lay.decision(i)] = lay.probabilistic(i);
    }
    choice[lay.target] = lay.target;
    choice[lay.sink] = lay.sink;
    crate::model::Strategy { choice }
}

/// A validated random model, deterministic in the seed.
///
/// Every state can reach a target (resampled until true), targets are
/// absorbing, probability rows are drawn from `prob_grid` and normalized.
pub fn gen_random(
    kind: ModelKind,
    objective: ObjectiveKind,
    n: usize,
    branch: usize,
    prob_grid: &[f64],
    seed: u64,
) -> Model {
    assert!(n >= 2, "need at least two states");
    assert!(branch >= 1, "branch must be at least 1");
    assert!(!prob_grid.is_empty() && prob_grid.iter().all(|&p| p > 0.0));
    let mut round = 0u64;
    loop {
        let mut rng = SplitMix64::new(seed ^ round.wrapping_mul(0x9e3779b97f4a7c15));
        round += 1;
        let num_targets = 1 + if n >= 8 { rng.below(2) } else { 0 };
        // targets at the tail of the state space
        let first_target = n - num_targets;
        let mut rows: Vec<(StateKind, Vec<(StateId, f64)>)> = Vec::with_capacity(n);
        for s in 0..first_target {
            let decision = match kind {
                ModelKind::Mdp => rng.chance(2, 5),
                ModelKind::Mc => rng.chance(1, 5),
            };
            let width_cap = if decision && kind == ModelKind::Mc {
                1
            } else {
                branch.min(n - 1)
            };
            let width = 1 + rng.below(width_cap);
            let mut succs: Vec<StateId> = Vec::with_capacity(width);
            while succs.len() < width {
                let t = rng.below(n);
                if t != s && !succs.contains(&t) {
                    succs.push(t);
                }
            }
            succs.sort_unstable();
            if decision {
                rows.push((
                    StateKind::Decision,
                    succs.into_iter().map(|t| (t, 1.0)).collect(),
                ));
            } else {
                let weights: Vec<f64> = (0..succs.len()).map(|_| *rng.pick(prob_grid)).collect();
                let total: f64 = weights.iter().sum();
                rows.push((
                    StateKind::Probabilistic,
                    succs
                        .into_iter()
                        .zip(weights)
                        .map(|(t, w)| (t, w / total))
                        .collect(),
                ));
            }
        }
        for s in first_target..n {
            rows.push((StateKind::Decision, vec![(s, 1.0)]));
        }
        let target_weights: Vec<(StateId, f64)> = (first_target..n)
            .map(|s| {
                let w = match objective {
                    ObjectiveKind::Reach => *rng.pick(&[0.25, 0.5, 0.75, 1.0]),
                    ObjectiveKind::Ssp => *rng.pick(&[0.5, 1.0, 1.5, 2.0]),
                };
                (s, w)
            })
            .collect();
        let costs = match objective {
            ObjectiveKind::Ssp => (0..n).map(|_| *rng.pick(&[0.5, 1.0, 1.5, 2.0])).collect(),
            ObjectiveKind::Reach => vec![],
        };
        let model = build_model(kind, objective, rows, target_weights, costs);
        if model.validate().is_ok() && all_reach_target(&model) {
            return model;
        }
    }
}

fn all_reach_target(model: &Model) -> bool {
    let n = model.num_states();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in 0..n {
        for &t in model.successors(s) {
            preds[t].push(s);
        }
    }
    let mut reached = vec![false; n];
    let mut queue: Vec<StateId> = model.objective.targets().collect();
    for &t in &queue {
        reached[t] = true;
    }
    while let Some(s) = queue.pop() {
        for &p in &preds[s] {
            if !reached[p] {
                reached[p] = true;
                queue.push(p);
            }
        }
    }
    reached.iter().all(|&r| r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slow_mc_structure() {
        let m = gen_slow_mc(3, 0.5);
        assert_eq!(m.num_states(), 4);
        assert_eq!(m.validate(), Ok(()));
        assert_eq!(m.successors(1), &[0, 2]);
        assert!(m.is_target(3));
    }

    #[test]
    fn slow_mdp_structure() {
        let m = gen_slow_mdp(3);
        let lay = SlowMdpLayout::new(3);
        assert_eq!(m.num_states(), 9);
        assert_eq!(m.validate(), Ok(()));
        assert_eq!(m.successors(lay.coin), &[lay.target, lay.sink]);
        assert_eq!(
            m.successors(lay.decision(1)),
            &[lay.probabilistic(1), lay.coin]
        );
        assert_eq!(
            m.successors(lay.probabilistic(2)),
            &[lay.decision(0), lay.target]
        );
    }

    #[test]
    fn random_model_validates() {
        let m = gen_random(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            10,
            3,
            &[0.2, 0.5, 1.0],
            1,
        );
        assert_eq!(m.validate(), Ok(()));
        assert!(all_reach_target(&m));
    }

    #[test]
    fn random_model_is_seed_deterministic() {
        let a = gen_random(ModelKind::Mdp, ObjectiveKind::Ssp, 12, 3, &[0.25, 0.5], 7);
        let b = gen_random(ModelKind::Mdp, ObjectiveKind::Ssp, 12, 3, &[0.25, 0.5], 7);
        assert_eq!(a, b);
        assert_eq!(
            crate::explicit::serialize_model(&a),
            crate::explicit::serialize_model(&b)
        );
    }

    #[test]
    fn advance_strategy_induces_the_classic_slow_chain() {
        let n = 4;
        let m = gen_slow_mdp(n);
        let lay = SlowMdpLayout::new(n);
        let mc = m.induced_mc(&slow_mdp_advance_strategy(n)).unwrap();
        assert_eq!(mc.kind, crate::model::ModelKind::Mc);
        assert_eq!(mc.validate(), Ok(()));
        for i in 0..n {
            // each decision state advances, each probabilistic state either
            // advances or falls back to the front of the chain
            assert_eq!(mc.successors(lay.decision(i)), &[lay.probabilistic(i)]);
            let next = if i + 1 < n {
                lay.decision(i + 1)
            } else {
                lay.target
            };
            assert_eq!(
                mc.successors(lay.probabilistic(i)),
                &[lay.decision(0), next]
            );
        }
    }
}
