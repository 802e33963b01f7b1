//! Bellman operators and the two baseline solvers: plain value iteration and
//! interval iteration with certified two-sided bounds.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{Model, ObjectiveKind, StateId, StateKind};

/// Per-state value assignment. Targets stay pinned to their weight under
/// every operator in this module.
pub type ValueVector = Vec<f64>;

/// Paired lower and upper value vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: ValueVector,
    pub upper: ValueVector,
}

impl Bounds {
    /// Supremum-norm width of the interval vector.
    pub fn width(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max)
    }

    /// Midpoint vector, the usual point estimate reported to callers.
    pub fn midpoint(&self) -> ValueVector {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn is_ordered(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(l, u)| l <= u)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("lower bound exceeds upper bound at state {state}")]
    InvalidBounds { state: StateId },
    #[error("no state with a positive interval width")]
    AllIntervalsZero,
    #[error("guess recursion exceeded the configured depth limit of {limit}")]
    DepthExceeded { limit: usize },
}

/// Result of one solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub bounds: Bounds,
    /// Number of single-state Bellman evaluations performed.
    pub bellman_updates: u64,
    /// Solver iterations; one simultaneous lower/upper step for interval
    /// methods, one vector sweep for plain VI.
    pub sweeps: u64,
    pub wall_time: Duration,
    pub algorithm: &'static str,
    /// Whether the requested epsilon was certifiably reached (for plain VI:
    /// whether the uncertified stopping criterion fired).
    pub converged: bool,
}

/// One Bellman evaluation at state `s` reading from `v`; targets are left
/// unchanged.
pub fn bellman_update_state(model: &Model, v: &[f64], s: StateId) -> f64 {
    if model.is_target(s) {
        return v[s];
    }
    let succs = model.successors(s);
    match (model.objective.kind, model.kind_of[s]) {
        (ObjectiveKind::Reach, StateKind::Decision) => succs
            .iter()
            .map(|&t| v[t])
            .fold(f64::NEG_INFINITY, f64::max),
        (ObjectiveKind::Reach, StateKind::Probabilistic) => succs
            .iter()
            .zip(model.probs(s))
            .map(|(&t, &p)| p * v[t])
            .sum(),
        (ObjectiveKind::Ssp, StateKind::Decision) => {
            model.weight(s) + succs.iter().map(|&t| v[t]).fold(f64::INFINITY, f64::min)
        }
        (ObjectiveKind::Ssp, StateKind::Probabilistic) => {
            let expected: f64 = succs
                .iter()
                .zip(model.probs(s))
                .map(|(&t, &p)| p * v[t])
                .sum();
            model.weight(s) + expected
        }
    }
}

/// Jacobi sweep: every non-target state is updated from the previous vector.
pub fn bellman_sweep(model: &Model, v: &[f64]) -> ValueVector {
    (0..model.num_states())
        .map(|s| bellman_update_state(model, v, s))
        .collect()
}

pub(crate) fn non_target_count(model: &Model) -> u64 {
    (model.num_states() - model.objective.num_targets()) as u64
}

/// Update counters threaded through every solver.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Stats {
    pub updates: u64,
    pub sweeps: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunCtl {
    pub deadline: Option<Instant>,
    pub max_sweeps: u64,
}

impl RunCtl {
    pub fn unbounded() -> Self {
        RunCtl {
            deadline: None,
            max_sweeps: u64::MAX,
        }
    }

    pub fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

pub(crate) enum IviStop {
    Converged,
    Budget,
    TimedOut,
    /// Neither vector moved a single bit; further sweeps are no-ops.
    Stalled,
}

/// Dual monotone iteration core shared by [`interval_iteration`] and the
/// guessing solvers. Lower entries are clamped nondecreasing and upper
/// entries nonincreasing, which keeps floating-point noise from breaking
/// monotonicity.
pub(crate) fn ivi_core(
    model: &Model,
    bounds: &mut Bounds,
    epsilon: f64,
    ctl: RunCtl,
    stats: &mut Stats,
) -> IviStop {
    let per_sweep = 2 * non_target_count(model);
    let mut iterations = 0u64;
    loop {
        if bounds.width() <= epsilon {
            return IviStop::Converged;
        }
        if iterations >= ctl.max_sweeps {
            return IviStop::Budget;
        }
        if ctl.timed_out() {
            return IviStop::TimedOut;
        }
        let mut moved = false;
        let new_lower = bellman_sweep(model, &bounds.lower);
        let new_upper = bellman_sweep(model, &bounds.upper);
        for s in 0..model.num_states() {
            let l = new_lower[s].max(bounds.lower[s]);
            let u = new_upper[s].min(bounds.upper[s]);
            if l != bounds.lower[s] || u != bounds.upper[s] {
                moved = true;
            }
            bounds.lower[s] = l;
            bounds.upper[s] = u;
        }
        stats.updates += per_sweep;
        stats.sweeps += 1;
        iterations += 1;
        if !moved {
            return IviStop::Stalled;
        }
    }
}

/// Interval iteration from bracketing start bounds.
///
/// Runs simultaneous lower and upper value iteration until the interval is
/// uniformly below `epsilon` or `budget` iterations are spent. Requires the
/// Bellman update to have a unique fixpoint and `b0` to bracket the value.
pub fn interval_iteration(
    model: &Model,
    b0: &Bounds,
    epsilon: f64,
    budget: u64,
) -> Result<SolveReport, SolveError> {
    if let Some(s) = (0..model.num_states()).find(|&s| b0.lower[s] > b0.upper[s]) {
        return Err(SolveError::InvalidBounds { state: s });
    }
    let start = Instant::now();
    let mut bounds = b0.clone();
    let mut stats = Stats::default();
    let ctl = RunCtl {
        deadline: None,
        max_sweeps: budget,
    };
    let stop = ivi_core(model, &mut bounds, epsilon, ctl, &mut stats);
    let converged = match stop {
        IviStop::Converged => true,
        IviStop::Stalled => bounds.width() <= epsilon,
        _ => false,
    };
    Ok(SolveReport {
        bounds,
        bellman_updates: stats.updates,
        sweeps: stats.sweeps,
        wall_time: start.elapsed(),
        algorithm: "ivi",
        converged,
    })
}

/// Plain value iteration from a single start vector with the classic
/// uncertified stopping rule `max |v_{i+1} - v_i| <= epsilon`.
///
/// The report's bounds hold the last two iterates; they are successive VI
/// vectors, not certified value bounds.
pub fn value_iteration(model: &Model, v0: &[f64], epsilon: f64, budget: u64) -> SolveReport {
    let mut stats = Stats::default();
    let ctl = RunCtl {
        deadline: None,
        max_sweeps: budget,
    };
    value_iteration_ctl(model, v0, epsilon, ctl, &mut stats)
}

pub(crate) fn value_iteration_ctl(
    model: &Model,
    v0: &[f64],
    epsilon: f64,
    ctl: RunCtl,
    stats: &mut Stats,
) -> SolveReport {
    let start = Instant::now();
    let per_sweep = non_target_count(model);
    let mut prev = v0.to_vec();
    let mut last = v0.to_vec();
    let mut converged = per_sweep == 0;
    while !converged && stats.sweeps < ctl.max_sweeps && !ctl.timed_out() {
        let next = bellman_sweep(model, &last);
        stats.updates += per_sweep;
        stats.sweeps += 1;
        let delta = last
            .iter()
            .zip(&next)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        prev = std::mem::replace(&mut last, next);
        if delta <= epsilon {
            converged = true;
            break;
        }
    }
    let bounds = Bounds {
        lower: prev.iter().zip(&last).map(|(a, b)| a.min(*b)).collect(),
        upper: prev.iter().zip(&last).map(|(a, b)| a.max(*b)).collect(),
    };
    SolveReport {
        bounds,
        bellman_updates: stats.updates,
        sweeps: stats.sweeps,
        wall_time: start.elapsed(),
        algorithm: "vi",
        converged,
    }
}
