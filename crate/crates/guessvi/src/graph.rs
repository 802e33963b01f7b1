//! Discrete graph preprocessing: levels, qualitative reachability, MEC
//! collapsing, the MDP partition, initial bound vectors, and the selection of
//! states to guess.
//!
//! Everything here is purely graph-theoretical: no transition probability is
//! ever inspected beyond its support.

use thiserror::Error;

use crate::model::{Model, ModelKind, Objective, ObjectiveKind, StateId, StateKind};
use crate::vi::Bounds;

/// Partition of states by shortest distance to the target set.
///
/// Level 0 holds the targets and every state that cannot reach them; a state
/// in level `i >= 1` has an edge into level `i - 1` and no edge into any
/// level below that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    pub level_of: Vec<usize>,
    /// Number of nonzero levels, i.e. the largest assigned level.
    pub k: usize,
    /// All states in level 0.
    pub zero_class: Vec<StateId>,
}

/// Ordered partition `S_0 .. S_K` of a collapsed MDP where every
/// probabilistic state in `S_k` has an edge into an earlier class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpPartition {
    pub class_of: Vec<usize>,
    /// Number of classes, `K + 1`.
    pub num_classes: usize,
}

/// States whose values will be guessed, outermost cut first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GuessSet {
    pub states: Vec<StateId>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("state {state} cannot reach the target set, SSP value would be infinite")]
    SspUnreachable { state: StateId },
    #[error("state {state} never received a partition class")]
    Unpartitioned { state: StateId },
}

fn reverse_adjacency(model: &Model) -> Vec<Vec<StateId>> {
    let mut preds = vec![Vec::new(); model.num_states()];
    for s in 0..model.num_states() {
        for &t in model.successors(s) {
            if t != s {
                preds[t].push(s);
            }
        }
    }
    preds
}

/// Backward BFS distances from an arbitrary target mask.
fn levels_from_targets(model: &Model, is_target: &[bool]) -> Levels {
    levels_bfs(&reverse_adjacency(model), is_target)
}

fn levels_bfs(preds: &[Vec<StateId>], is_target: &[bool]) -> Levels {
    let n = is_target.len();
    let mut level_of = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if is_target[s] {
            level_of[s] = 0;
            queue.push_back(s);
        }
    }
    let mut k = 0;
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if level_of[p] == usize::MAX {
                level_of[p] = level_of[s] + 1;
                k = k.max(level_of[p]);
                queue.push_back(p);
            }
        }
    }
    // states that cannot reach a target join level 0
    let mut zero_class = Vec::new();
    for s in 0..n {
        if level_of[s] == usize::MAX {
            level_of[s] = 0;
        }
        if level_of[s] == 0 {
            zero_class.push(s);
        }
    }
    Levels {
        level_of,
        k,
        zero_class,
    }
}

/// Level partition of a validated model: backward BFS from the target set
/// over reversed edges.
pub fn compute_levels(model: &Model) -> Levels {
    levels_from_targets(model, &model.objective.is_target)
}

/// States with no path to the target set in the labeled graph.
///
/// For reachability semantics these are exactly the value-zero states.
pub fn qualitative_zero(model: &Model) -> Vec<StateId> {
    let levels = levels_from_targets(model, &model.objective.is_target);
    levels
        .zero_class
        .iter()
        .copied()
        .filter(|&s| !model.is_target(s))
        .collect()
}

/// Initial lower and upper bound vectors bracketing the value.
///
/// Targets are pinned to their weight. For reachability, non-targets start
/// at `(0, w_max)`. For SSP they start at `(w_min, c_max (k+1) / p_min^k)`
/// where `c_max` is the largest per-state cost and `k` the number of levels;
/// SSP requires every state to reach the target set.
pub fn initial_vectors(model: &Model, levels: &Levels) -> Result<Bounds, GraphError> {
    let n = model.num_states();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let (lo, hi) = match model.objective.kind {
        ObjectiveKind::Reach => (0.0, model.objective.w_max()),
        ObjectiveKind::Ssp => {
            if let Some(&s) = levels.zero_class.iter().find(|&&s| !model.is_target(s)) {
                return Err(GraphError::SspUnreachable { state: s });
            }
            let c_max = model.objective.weight.iter().cloned().fold(0.0, f64::max);
            let p_min = model.min_transition_prob();
            let k = levels.k as f64;
            (model.objective.w_min(), c_max * (k + 1.0) / p_min.powf(k))
        }
    };
    for s in 0..n {
        if model.is_target(s) {
            lower[s] = model.weight(s);
            upper[s] = model.weight(s);
        } else {
            lower[s] = lo;
            upper[s] = hi;
        }
    }
    Ok(Bounds { lower, upper })
}

/// Tarjan's strongly connected components of the subgraph induced by `alive`,
/// returned in reverse topological order.
fn sccs(model: &Model, alive: &[bool]) -> Vec<Vec<StateId>> {
    let n = model.num_states();
    struct Frame {
        v: StateId,
        edge: usize,
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<StateId> = Vec::new();
    let mut next_index = 0usize;
    let mut comps = Vec::new();
    for root in 0..n {
        if !alive[root] || index[root] != usize::MAX {
            continue;
        }
        let mut frames = vec![Frame { v: root, edge: 0 }];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(frame) = frames.last_mut() {
            let v = frame.v;
            if frame.edge < model.successors(v).len() {
                let w = model.successors(v)[frame.edge];
                frame.edge += 1;
                if !alive[w] || w == v {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push(Frame { v: w, edge: 0 });
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
                let done = frames.pop().expect("frame stack underflow").v;
                if let Some(parent) = frames.last() {
                    low[parent.v] = low[parent.v].min(low[done]);
                }
            }
        }
    }
    comps
}

/// Maximal end components of the subgraph induced by `alive`: iteratively
/// drop probabilistic states whose support leaves their SCC, then keep the
/// closed components that contain a cycle.
fn max_end_components(model: &Model, alive: &[bool]) -> Vec<Vec<StateId>> {
    let mut alive = alive.to_vec();
    loop {
        let comps = sccs(model, &alive);
        let n = model.num_states();
        let mut comp_of = vec![usize::MAX; n];
        for (c, comp) in comps.iter().enumerate() {
            for &s in comp {
                comp_of[s] = c;
            }
        }
        let mut removed = false;
        for s in 0..n {
            if alive[s] && model.kind_of[s] == StateKind::Probabilistic {
                let escapes = model
                    .successors(s)
                    .iter()
                    .any(|&t| !alive[t] || comp_of[t] != comp_of[s]);
                if escapes {
                    alive[s] = false;
                    removed = true;
                }
            }
        }
        if removed {
            continue;
        }
        // remaining SCCs are closed for probabilistic states; keep those
        // that actually contain a cycle
        return comps
            .into_iter()
            .filter(|comp| comp.len() >= 2 || model.successors(comp[0]).contains(&comp[0]))
            .collect();
    }
}

/// Output of [`collapse_mecs`].
#[derive(Debug, Clone)]
pub struct Collapsed {
    pub model: Model,
    /// Old state id to new state id.
    pub map: Vec<StateId>,
    /// New id of the weight-zero sink.
    pub zero_sink: StateId,
    /// New id of the weight-`w_max` sink.
    pub max_sink: StateId,
}

/// Rewrite a reachability model so that the Bellman update has a unique
/// fixpoint, preserving every state's value.
///
/// Fresh targets of weight `w_max` and `0` are introduced, the original
/// targets are rewired onto them proportionally to their weight, the
/// qualitative value-zero class is folded into the zero sink, and every
/// remaining maximal end component is merged into a single decision state
/// carrying the union of the exit choices.
pub fn collapse_mecs(model: &Model) -> Collapsed {
    assert_eq!(
        model.objective.kind,
        ObjectiveKind::Reach,
        "MEC collapsing applies to reachability objectives"
    );
    let n = model.num_states();
    let w_max = model.objective.w_max();

    // rewired edges: every old target branches to the two fresh sinks
    // (ids n and n + 1) proportionally to its weight
    let hi = n;
    let lo = n + 1;
    let mut succs: Vec<Vec<StateId>> = model.successors.clone();
    let mut probs: Vec<Vec<f64>> = model.probs.clone();
    let mut kinds: Vec<StateKind> = model.kind_of.clone();
    for s in 0..n {
        if model.is_target(s) {
            let w = model.weight(s);
            if w_max > 0.0 && w >= w_max {
                succs[s] = vec![hi];
                probs[s] = vec![1.0];
            } else if w <= 0.0 || w_max <= 0.0 {
                succs[s] = vec![lo];
                probs[s] = vec![1.0];
            } else {
                succs[s] = vec![hi, lo];
                probs[s] = vec![w / w_max, 1.0 - w / w_max];
            }
            kinds[s] = StateKind::Probabilistic;
        }
    }
    succs.push(vec![hi]);
    probs.push(Vec::new());
    kinds.push(StateKind::Decision);
    succs.push(vec![lo]);
    probs.push(Vec::new());
    kinds.push(StateKind::Decision);
    let total = n + 2;

    // value-zero class: no path to the w_max sink
    let mut preds = vec![Vec::new(); total];
    for s in 0..total {
        for &t in &succs[s] {
            if t != s {
                preds[t].push(s);
            }
        }
    }
    let mut reaches_hi = vec![false; total];
    reaches_hi[hi] = true;
    let mut queue = vec![hi];
    while let Some(s) = queue.pop() {
        for &p in &preds[s] {
            if !reaches_hi[p] {
                reaches_hi[p] = true;
                queue.push(p);
            }
        }
    }

    // MECs among the surviving interior states
    let interim = Model {
        kind: ModelKind::Mdp,
        kind_of: kinds.clone(),
        successors: succs.clone(),
        probs: probs.clone(),
        objective: Objective::new(
            ObjectiveKind::Reach,
            (0..total).map(|s| s == hi || s == lo).collect(),
            (0..total)
                .map(|s| if s == hi { w_max } else { 0.0 })
                .collect(),
        ),
    };
    let alive: Vec<bool> = (0..total)
        .map(|s| reaches_hi[s] && s != hi && s != lo)
        .collect();
    let mecs = max_end_components(&interim, &alive);
    let mut mec_of = vec![usize::MAX; total];
    for (c, comp) in mecs.iter().enumerate() {
        for &s in comp {
            mec_of[s] = c;
        }
    }

    // new ids: surviving plain states in order, then one per MEC, then sinks
    let mut new_id = vec![usize::MAX; total];
    let mut count = 0;
    for s in 0..total {
        if s != hi && s != lo && reaches_hi[s] && mec_of[s] == usize::MAX {
            new_id[s] = count;
            count += 1;
        }
    }
    let mut mec_id = Vec::with_capacity(mecs.len());
    for comp in &mecs {
        mec_id.push(count);
        for &s in comp {
            new_id[s] = count;
        }
        count += 1;
    }
    let zero_sink = count;
    let max_sink = count + 1;
    for s in 0..total {
        if !reaches_hi[s] {
            new_id[s] = zero_sink;
        }
    }
    new_id[hi] = max_sink;
    let new_total = count + 2;

    let mut out_kinds = vec![StateKind::Decision; new_total];
    let mut out_succs: Vec<Vec<StateId>> = vec![Vec::new(); new_total];
    let mut out_probs: Vec<Vec<f64>> = vec![Vec::new(); new_total];
    for s in 0..total {
        if s == hi || s == lo || !reaches_hi[s] || mec_of[s] != usize::MAX {
            continue;
        }
        let id = new_id[s];
        out_kinds[id] = kinds[s];
        match kinds[s] {
            StateKind::Probabilistic => {
                // merge parallel edges produced by folding
                let mut acc: Vec<(StateId, f64)> = Vec::new();
                for (i, &t) in succs[s].iter().enumerate() {
                    let nt = new_id[t];
                    match acc.iter_mut().find(|(u, _)| *u == nt) {
                        Some((_, p)) => *p += probs[s][i],
                        None => acc.push((nt, probs[s][i])),
                    }
                }
                acc.sort_by_key(|&(t, _)| t);
                out_succs[id] = acc.iter().map(|&(t, _)| t).collect();
                out_probs[id] = acc.iter().map(|&(_, p)| p).collect();
            }
            StateKind::Decision => {
                let mut ts: Vec<StateId> = succs[s].iter().map(|&t| new_id[t]).collect();
                ts.sort_unstable();
                ts.dedup();
                out_succs[id] = ts;
            }
        }
    }
    // each MEC becomes a decision state over the union of its exit choices
    for (c, comp) in mecs.iter().enumerate() {
        let id = mec_id[c];
        let mut exits: Vec<StateId> = Vec::new();
        for &s in comp {
            if kinds[s] == StateKind::Decision {
                for &t in &succs[s] {
                    if mec_of[t] != c {
                        exits.push(new_id[t]);
                    }
                }
            }
        }
        exits.sort_unstable();
        exits.dedup();
        debug_assert!(!exits.is_empty(), "a surviving MEC must have an exit");
        out_kinds[id] = StateKind::Decision;
        out_succs[id] = exits;
    }
    out_succs[zero_sink] = vec![zero_sink];
    out_succs[max_sink] = vec![max_sink];

    let is_target: Vec<bool> = (0..new_total)
        .map(|s| s == zero_sink || s == max_sink)
        .collect();
    let weight: Vec<f64> = (0..new_total)
        .map(|s| if s == max_sink { w_max } else { 0.0 })
        .collect();
    let any_branching_decision = out_kinds
        .iter()
        .zip(&out_succs)
        .any(|(k, ss)| *k == StateKind::Decision && ss.len() > 1);
    let out = Model {
        kind: if any_branching_decision {
            ModelKind::Mdp
        } else {
            model.kind
        },
        kind_of: out_kinds,
        successors: out_succs,
        probs: out_probs,
        objective: Objective::new(ObjectiveKind::Reach, is_target, weight),
    };
    debug_assert_eq!(out.validate(), Ok(()));
    let map = (0..n).map(|s| new_id[s]).collect();
    Collapsed {
        model: out,
        map,
        zero_sink,
        max_sink,
    }
}

/// Partition of a collapsed MDP: BFS peeling from the target set over the
/// labeled graph. Targets form class 0 and every state joins the first class
/// with an edge into an earlier one, so probabilistic states always have a
/// transition into a previous class.
pub fn mdp_partition(model: &Model) -> Result<MdpPartition, GraphError> {
    let levels = compute_levels(model);
    for &s in &levels.zero_class {
        if !model.is_target(s) {
            return Err(GraphError::Unpartitioned { state: s });
        }
    }
    Ok(MdpPartition {
        class_of: levels.level_of.clone(),
        num_classes: levels.k + 1,
    })
}

/// Pick the states to guess: repeatedly cut the cheapest level in the middle
/// third of the level range until at most `sqrt(|S|)` levels remain.
///
/// Within the eligible range, the level with the fewest states wins and ties
/// break toward the smallest level index; states of the chosen level are
/// emitted in increasing id order.
pub fn mark_to_guess(model: &Model) -> GuessSet {
    let n = model.num_states();
    let threshold = (n as f64).sqrt();
    let preds = reverse_adjacency(model);
    let mut is_target = model.objective.is_target.clone();
    let mut picked = Vec::new();
    loop {
        let levels = levels_bfs(&preds, &is_target);
        let k = levels.k;
        if (k as f64) <= threshold {
            return GuessSet { states: picked };
        }
        let lo = (k as f64 / 3.0).ceil() as usize;
        let hi = (2.0 * k as f64 / 3.0).floor() as usize;
        let mut sizes = vec![0usize; k + 1];
        for s in 0..n {
            sizes[levels.level_of[s]] += 1;
        }
        let mut best = lo;
        for level in lo..=hi {
            if sizes[level] < sizes[best] {
                best = level;
            }
        }
        for s in 0..n {
            if levels.level_of[s] == best && !is_target[s] {
                is_target[s] = true;
                picked.push(s);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_random, gen_slow_mc, gen_slow_mdp, SlowMdpLayout};
    use crate::model::{build_model, ModelKind, ObjectiveKind, StateKind};

    fn chain(len: usize) -> Model {
        // 0 -> 1 -> ... -> len, all edges deterministic, last state target
        let mut rows = Vec::new();
        for i in 0..len {
            rows.push((StateKind::Decision, vec![(i + 1, 1.0)]));
        }
        rows.push((StateKind::Decision, vec![(len, 1.0)]));
        build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            rows,
            vec![(len, 1.0)],
            vec![],
        )
    }

    #[test]
    fn levels_of_simple_chain() {
        // t <- a <- b
        let m = chain(2);
        let levels = compute_levels(&m);
        assert_eq!(levels.level_of, vec![2, 1, 0]);
        assert_eq!(levels.k, 2);
        assert_eq!(levels.zero_class, vec![2]);
    }

    #[test]
    fn isolated_sink_sits_in_zero_class() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(1, 1.0)],
            vec![],
        );
        let levels = compute_levels(&m);
        assert_eq!(levels.level_of[2], 0);
        assert!(levels.zero_class.contains(&2));
        assert_eq!(qualitative_zero(&m), vec![2]);
    }

    #[test]
    fn slow_chain_has_n_levels() {
        for n in [2, 5, 9] {
            let m = gen_slow_mc(n, 0.5);
            let levels = compute_levels(&m);
            assert_eq!(levels.k, n);
            // n + 1 level classes in total
            let distinct: std::collections::BTreeSet<_> = levels.level_of.iter().collect();
            assert_eq!(distinct.len(), n + 1);
        }
    }

    #[test]
    fn qualitative_zero_empty_when_all_reach() {
        let m = gen_random(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            14,
            3,
            &[0.25, 0.5, 1.0],
            3,
        );
        assert!(qualitative_zero(&m).is_empty());
    }

    #[test]
    fn initial_vectors_reach() {
        let m = gen_slow_mc(4, 0.5);
        let b = initial_vectors(&m, &compute_levels(&m)).unwrap();
        assert_eq!(b.lower[0], 0.0);
        assert_eq!(b.upper[0], 1.0);
        assert_eq!(b.lower[4], 1.0);
        assert_eq!(b.upper[4], 1.0);
    }

    #[test]
    fn initial_vectors_ssp_formula() {
        // two-level chain, unit costs, p_min = 1/2: upper = 1 * 3 / 0.25 = 12
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Ssp,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Probabilistic, vec![(0, 0.5), (2, 0.5)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(2, 1.0)],
            vec![1.0, 1.0, 1.0],
        );
        let levels = compute_levels(&m);
        assert_eq!(levels.k, 2);
        let b = initial_vectors(&m, &levels).unwrap();
        assert_eq!(b.lower[0], 1.0);
        assert_eq!(b.upper[0], 12.0);
    }

    #[test]
    fn initial_vectors_pin_target_weight() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(1, 1.0)]),
            ],
            vec![(1, 0.4)],
            vec![],
        );
        let b = initial_vectors(&m, &compute_levels(&m)).unwrap();
        assert_eq!((b.lower[1], b.upper[1]), (0.4, 0.4));
    }

    #[test]
    fn initial_vectors_reject_unreachable_ssp() {
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Ssp,
            vec![
                (StateKind::Decision, vec![(0, 1.0)]),
                (StateKind::Decision, vec![(1, 1.0)]),
            ],
            vec![(1, 1.0)],
            vec![1.0, 1.0],
        );
        assert!(matches!(
            initial_vectors(&m, &compute_levels(&m)),
            Err(GraphError::SspUnreachable { state: 0 })
        ));
    }

    #[test]
    fn collapse_folds_decision_self_loop() {
        // transient decision state with a self-loop and an exit edge
        let m = build_model(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(0, 1.0), (1, 1.0)]),
                (StateKind::Decision, vec![(1, 1.0)]),
            ],
            vec![(1, 1.0)],
            vec![],
        );
        let c = collapse_mecs(&m);
        let img = c.map[0];
        // the self-loop is gone, the exit to the rewired target remains
        assert_eq!(c.model.successors(img), &[c.map[1]]);
        assert_eq!(c.model.validate(), Ok(()));
    }

    #[test]
    fn collapse_adds_exactly_two_sinks_to_mec_free_mdp() {
        let m = gen_slow_mc(4, 0.5);
        let c = collapse_mecs(&m);
        assert_eq!(c.model.num_states(), m.num_states() + 2);
        assert_eq!(c.model.validate(), Ok(()));
        assert!(c.model.is_target(c.zero_sink));
        assert!(c.model.is_target(c.max_sink));
        assert_eq!(c.model.weight(c.max_sink), 1.0);
        assert_eq!(c.model.weight(c.zero_sink), 0.0);
    }

    #[test]
    fn collapse_merges_two_state_cycle() {
        // a <-> b decision cycle with one exit to the target
        let m = build_model(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(0, 1.0), (2, 1.0)]),
                (StateKind::Decision, vec![(2, 1.0)]),
            ],
            vec![(2, 1.0)],
            vec![],
        );
        let c = collapse_mecs(&m);
        assert_eq!(c.map[0], c.map[1]);
        let merged = c.map[0];
        assert_eq!(c.model.successors(merged), &[c.map[2]]);
    }

    #[test]
    fn partition_of_slow_mdp_has_four_classes() {
        for n in [2, 3, 5, 8] {
            let c = collapse_mecs(&gen_slow_mdp(n));
            let part = mdp_partition(&c.model).unwrap();
            assert_eq!(part.num_classes, 4, "n = {n}");
            let lay = SlowMdpLayout::new(n);
            assert_eq!(part.class_of[c.map[lay.coin]], 1);
            assert_eq!(part.class_of[c.map[lay.decision(0)]], 2);
            if n >= 2 {
                assert_eq!(part.class_of[c.map[lay.probabilistic(0)]], 3);
            }
        }
    }

    #[test]
    fn partition_of_mc_matches_levels() {
        let m = gen_slow_mc(5, 0.5);
        let c = collapse_mecs(&m);
        let part = mdp_partition(&c.model).unwrap();
        let levels = compute_levels(&c.model);
        assert_eq!(part.class_of, levels.level_of);
        assert_eq!(part.num_classes, levels.k + 1);
    }

    #[test]
    fn partition_single_probabilistic_state() {
        // already MEC-free with no zero states, so no collapse is needed
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Probabilistic, vec![(1, 1.0)]),
                (StateKind::Decision, vec![(1, 1.0)]),
            ],
            vec![(1, 1.0)],
            vec![],
        );
        let part = mdp_partition(&m).unwrap();
        assert_eq!(part.num_classes, 2);
    }

    #[test]
    fn partition_rejects_states_outside_every_class() {
        // the sink cannot reach the target, so this input was not collapsed
        let m = gen_slow_mdp(2);
        assert!(matches!(
            mdp_partition(&m),
            Err(GraphError::Unpartitioned { .. })
        ));
    }

    #[test]
    fn mark_to_guess_base_case_returns_empty() {
        // 9 states, 3 levels: k = 3 <= sqrt(9)
        let m = build_model(
            ModelKind::Mc,
            ObjectiveKind::Reach,
            vec![
                (StateKind::Decision, vec![(2, 1.0)]),
                (StateKind::Decision, vec![(3, 1.0)]),
                (StateKind::Decision, vec![(5, 1.0)]),
                (StateKind::Decision, vec![(6, 1.0)]),
                (StateKind::Decision, vec![(7, 1.0)]),
                (StateKind::Decision, vec![(8, 1.0)]),
                (StateKind::Decision, vec![(8, 1.0)]),
                (StateKind::Decision, vec![(8, 1.0)]),
                (StateKind::Decision, vec![(8, 1.0)]),
            ],
            vec![(8, 1.0)],
            vec![],
        );
        assert_eq!(compute_levels(&m).k, 3);
        assert_eq!(mark_to_guess(&m), GuessSet::default());
    }

    #[test]
    fn mark_to_guess_first_pick_on_pure_chain() {
        // 16 transient chain states, 16 levels; the eligible range is
        // [ceil(16/3), floor(32/3)] = [6, 10], all singletons, ties break to
        // level 6, which is the state at distance 6 from the target.
        let m = chain(16);
        let picks = mark_to_guess(&m);
        assert_eq!(picks.states[0], 10);
    }

    #[test]
    fn mark_to_guess_bounds_on_slow_chain() {
        let m = gen_slow_mc(400, 0.5);
        let picks = mark_to_guess(&m);
        assert!(picks.states.len() <= 180, "|I| = {}", picks.states.len());
        let mut is_target = m.objective.is_target.clone();
        for &s in &picks.states {
            is_target[s] = true;
        }
        let levels = levels_from_targets(&m, &is_target);
        assert!(levels.k <= 20, "k = {}", levels.k);
    }
}
