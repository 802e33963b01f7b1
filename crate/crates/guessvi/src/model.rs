//! Explicit-state models: Markov chains and Markov decision processes.
//!
//! A [`Model`] is a finite state space split into decision and probabilistic
//! states, a sparse successor list per state, transition probabilities on
//! probabilistic rows, and an [`Objective`] (weighted reachability or
//! stochastic shortest path). Models are immutable after validation and safe
//! to share across threads.

use thiserror::Error;

/// State index into a model's state space.
pub type StateId = usize;

/// Row-sum tolerance for probabilistic transition rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// The controller picks the successor.
    Decision,
    /// The successor is drawn from the row distribution.
    Probabilistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Every decision state has exactly one successor.
    Mc,
    Mdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Weighted reachability: maximize the expected weight of the first
    /// target reached, zero if no target is ever reached.
    Reach,
    /// Stochastic shortest path: minimize the expected sum of per-state
    /// costs until (and including) the reached target.
    Ssp,
}

/// Target set and weight annotation for a model.
///
/// For `Reach`, `weight` is meaningful on targets only (zero elsewhere).
/// For `Ssp`, `weight` is a strictly positive cost for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub is_target: Vec<bool>,
    pub weight: Vec<f64>,
    w_min: f64,
    w_max: f64,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, is_target: Vec<bool>, weight: Vec<f64>) -> Self {
        let (w_min, w_max) = target_weight_range(&is_target, &weight);
        Objective {
            kind,
            is_target,
            weight,
            w_min,
            w_max,
        }
    }

    /// Minimum weight over the target set.
    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    /// Maximum weight over the target set.
    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Target state ids in increasing order.
    pub fn targets(&self) -> impl Iterator<Item = StateId> + '_ {
        self.is_target
            .iter()
            .enumerate()
            .filter(|(_, t)| **t)
            .map(|(s, _)| s)
    }

    pub fn num_targets(&self) -> usize {
        self.is_target.iter().filter(|t| **t).count()
    }
}

fn target_weight_range(is_target: &[bool], weight: &[f64]) -> (f64, f64) {
    let mut w_min = f64::INFINITY;
    let mut w_max = 0.0f64;
    for (s, &t) in is_target.iter().enumerate() {
        if t {
            w_min = w_min.min(weight[s]);
            w_max = w_max.max(weight[s]);
        }
    }
    (w_min, w_max)
}

/// A positional strategy: one successor choice per decision state.
///
/// Entries at probabilistic states are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub choice: Vec<StateId>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state {state}: empty successor list")]
    EmptySuccessors { state: StateId },
    #[error("state {state}: probability row sums to {sum}, expected 1")]
    RowSum { state: StateId, sum: f64 },
    #[error("state {state}: listed transition probability is not positive")]
    NonPositiveProbability { state: StateId },
    #[error("state {state}: probability row length {probs} does not match {succs} successors")]
    RowLengthMismatch {
        state: StateId,
        probs: usize,
        succs: usize,
    },
    #[error("state {state}: non-absorbing target")]
    NonAbsorbingTarget { state: StateId },
    #[error("state {state}: SSP weight must be strictly positive")]
    NonPositiveSspWeight { state: StateId },
    #[error("state {state}: decision state with {count} successors in a model tagged MC")]
    BranchingMcDecision { state: StateId, count: usize },
    #[error("state {state}: reachability weight must be nonnegative")]
    NegativeWeight { state: StateId },
    #[error("state {state}: successor {succ} out of range (model has {num_states} states)")]
    SuccessorOutOfRange {
        state: StateId,
        succ: StateId,
        num_states: usize,
    },
    #[error("state {state}: duplicate successor {succ}")]
    DuplicateSuccessor { state: StateId, succ: StateId },
    #[error("model has no target states")]
    NoTargets,
    #[error("state {state} is already a target")]
    AlreadyTarget { state: StateId },
    #[error("strategy picks {choice} at state {state}, which is not a successor")]
    InvalidChoice { state: StateId, choice: StateId },
}

/// An explicit-state MC or MDP together with its objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub kind_of: Vec<StateKind>,
    /// Successor ids per state, in listed order.
    pub successors: Vec<Vec<StateId>>,
    /// Probabilities aligned with `successors`; empty for decision states.
    pub probs: Vec<Vec<f64>>,
    pub objective: Objective,
}

impl Model {
    pub fn num_states(&self) -> usize {
        self.kind_of.len()
    }

    pub fn is_target(&self, s: StateId) -> bool {
        self.objective.is_target[s]
    }

    pub fn weight(&self, s: StateId) -> f64 {
        self.objective.weight[s]
    }

    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.successors[s]
    }

    pub fn probs(&self, s: StateId) -> &[f64] {
        &self.probs[s]
    }

    /// Check every structural invariant; `Ok(())` iff the model is well formed.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_states();
        if self.objective.num_targets() == 0 {
            return Err(ModelError::NoTargets);
        }
        for s in 0..n {
            let succs = &self.successors[s];
            if succs.is_empty() {
                return Err(ModelError::EmptySuccessors { state: s });
            }
            for &s2 in succs {
                if s2 >= n {
                    return Err(ModelError::SuccessorOutOfRange {
                        state: s,
                        succ: s2,
                        num_states: n,
                    });
                }
            }
            let mut seen = succs.clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(ModelError::DuplicateSuccessor {
                        state: s,
                        succ: w[0],
                    });
                }
            }
            match self.kind_of[s] {
                StateKind::Probabilistic => {
                    let probs = &self.probs[s];
                    if probs.len() != succs.len() {
                        return Err(ModelError::RowLengthMismatch {
                            state: s,
                            probs: probs.len(),
                            succs: succs.len(),
                        });
                    }
                    if probs.iter().any(|&p| p <= 0.0) {
                        return Err(ModelError::NonPositiveProbability { state: s });
                    }
                    let sum: f64 = probs.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        return Err(ModelError::RowSum { state: s, sum });
                    }
                }
                StateKind::Decision => {
                    if !self.probs[s].is_empty() {
                        return Err(ModelError::RowLengthMismatch {
                            state: s,
                            probs: self.probs[s].len(),
                            succs: succs.len(),
                        });
                    }
                    if self.kind == ModelKind::Mc && succs.len() != 1 {
                        return Err(ModelError::BranchingMcDecision {
                            state: s,
                            count: succs.len(),
                        });
                    }
                }
            }
            if self.is_target(s) && self.successors[s] != [s] {
                return Err(ModelError::NonAbsorbingTarget { state: s });
            }
            match self.objective.kind {
                ObjectiveKind::Ssp => {
                    if self.objective.weight[s] <= 0.0 {
                        return Err(ModelError::NonPositiveSspWeight { state: s });
                    }
                }
                ObjectiveKind::Reach => {
                    if self.objective.weight[s] < 0.0 {
                        return Err(ModelError::NegativeWeight { state: s });
                    }
                }
            }
        }
        let (w_min, w_max) = target_weight_range(&self.objective.is_target, &self.objective.weight);
        debug_assert_eq!(w_min, self.objective.w_min());
        debug_assert_eq!(w_max, self.objective.w_max());
        Ok(())
    }

    /// Smallest listed transition probability; 1 for a model without
    /// probabilistic states.
    pub fn min_transition_prob(&self) -> f64 {
        let mut p = 1.0f64;
        for row in &self.probs {
            for &q in row {
                p = p.min(q);
            }
        }
        p
    }

    /// The model with `s` turned into an absorbing target of weight `guess`.
    ///
    /// The original model is untouched; `s` must not already be a target.
    pub fn reduce(&self, s: StateId, guess: f64) -> Result<Model, ModelError> {
        if self.is_target(s) {
            return Err(ModelError::AlreadyTarget { state: s });
        }
        let mut out = self.clone();
        out.kind_of[s] = StateKind::Decision;
        out.successors[s] = vec![s];
        out.probs[s] = Vec::new();
        out.objective.is_target[s] = true;
        out.objective.weight[s] = guess;
        out.objective = Objective::new(
            out.objective.kind,
            out.objective.is_target,
            out.objective.weight,
        );
        Ok(out)
    }

    /// The Markov chain obtained by fixing a strategy: every decision state
    /// keeps only the chosen successor, probabilistic rows are untouched.
    pub fn induced_mc(&self, strategy: &Strategy) -> Result<Model, ModelError> {
        let mut out = self.clone();
        for s in 0..self.num_states() {
            if self.kind_of[s] == StateKind::Decision {
                let pick = strategy.choice[s];
                if !self.successors[s].contains(&pick) {
                    return Err(ModelError::InvalidChoice {
                        state: s,
                        choice: pick,
                    });
                }
                out.successors[s] = vec![pick];
            }
        }
        out.kind = ModelKind::Mc;
        Ok(out)
    }
}

/// Convenience constructor used throughout the tests and generators.
///
/// `rows` gives, per state, its kind and successor list; probabilistic rows
/// carry `(successor, probability)` pairs. Targets are `(state, weight)`.
/// For SSP, `costs` must assign a positive cost to every non-target state.
pub fn build_model(
    kind: ModelKind,
    objective: ObjectiveKind,
    rows: Vec<(StateKind, Vec<(StateId, f64)>)>,
    targets: Vec<(StateId, f64)>,
    costs: Vec<f64>,
) -> Model {
    let n = rows.len();
    let mut kind_of = Vec::with_capacity(n);
    let mut successors = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    for (k, row) in rows {
        kind_of.push(k);
        successors.push(row.iter().map(|&(s, _)| s).collect());
        match k {
            StateKind::Probabilistic => probs.push(row.iter().map(|&(_, p)| p).collect()),
            StateKind::Decision => probs.push(Vec::new()),
        }
    }
    let mut is_target = vec![false; n];
    let mut weight = if objective == ObjectiveKind::Ssp {
        costs
    } else {
        vec![0.0; n]
    };
    weight.resize(n, 0.0);
    for (s, w) in targets {
        is_target[s] = true;
        weight[s] = w;
    }
    Model {
        kind,
        kind_of,
        successors,
        probs,
        objective: Objective::new(objective, is_target, weight),
    }
}
