//! Guessing Value Iteration: verification of guessed state values through
//! one-sided Bellman tests, the recursive guessing-set solver for Markov
//! chains, and the practical pick-and-verify solver for MDPs.
//!
//! A guess `gamma` at state `s` turns the model into the reduced model where
//! `s` is a target of weight `gamma`. Solving the reduced model and applying
//! a single Bellman update at `s` on the original model tells on which side
//! of the true value the guess lies; certified sides become new bounds.

use std::time::Instant;

use thiserror::Error;

use crate::graph::{compute_levels, initial_vectors, mark_to_guess, GraphError, GuessSet};
use crate::model::{Model, ModelError, ObjectiveKind, StateId, StateKind};
use crate::vi::{
    bellman_sweep, bellman_update_state, ivi_core, non_target_count, Bounds, RunCtl, SolveError,
    SolveReport, Stats,
};

/// Default multiplicative-slack floor guarding `p_min^{|S|}` underflow.
pub const DEFAULT_SLACK_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuessError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid guess configuration: {0}")]
    BadConfig(&'static str),
}

/// Tuning knobs for the guessing solvers.
#[derive(Debug, Clone)]
pub struct GuessConfig {
    pub epsilon: f64,
    /// Random-walk rounds when picking the state to guess.
    pub k1: u64,
    /// Iteration limit per verification attempt.
    pub k2: u64,
    /// Lower bound substituted for `p_min^{|S|}` when it underflows.
    pub slack_floor: f64,
    /// Recursion depth limit for reduced-model solves.
    pub max_depth: usize,
    /// Restart every verification from the trivial initial vectors instead
    /// of reusing the caller's bounds.
    pub conservative_bounds: bool,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig {
            epsilon: 1e-3,
            k1: 10,
            k2: 100,
            slack_floor: DEFAULT_SLACK_FLOOR,
            max_depth: 64,
            conservative_bounds: false,
        }
    }
}

impl GuessConfig {
    pub fn validate(&self) -> Result<(), GuessError> {
        if !(self.epsilon > 0.0) {
            return Err(GuessError::BadConfig("epsilon must be positive"));
        }
        if self.k1 < 1 || self.k2 < 1 {
            return Err(GuessError::BadConfig("K1 and K2 must be at least 1"));
        }
        if !(self.slack_floor > 0.0 && self.slack_floor <= 1.0) {
            return Err(GuessError::BadConfig("slack floor must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Outcome of verifying a guess `gamma` at a state.
#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    /// The reduced-model bounds closed; after widening by `epsilon / 2` they
    /// bracket the original value everywhere.
    BoundsFound {
        lower: Vec<f64>,
        upper: Vec<f64>,
        iterations: u64,
    },
    /// `gamma` is a certified lower bound of the value at the guessed state
    /// and `lower` bounds the original value vector from below.
    LowerCertified { lower: Vec<f64>, iterations: u64 },
    /// Mirror image of `LowerCertified`.
    UpperCertified { upper: Vec<f64>, iterations: u64 },
    /// Iteration limit reached without a certificate.
    Inconclusive { lower: Vec<f64>, upper: Vec<f64> },
}

/// Sign information from a single Bellman update against a reduced-model
/// bound vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignCheck {
    /// The updated guess rose: the true value exceeds the guess.
    Above,
    /// The updated guess fell: the true value is below the guess.
    Below,
    /// The update moved by at most `slack * epsilon`; the value lies within
    /// `radius` of the guess in the certified direction.
    Tight { radius: f64 },
}

/// Multiplicative slack `p_min^{|S|}` computed in log space, floored against
/// underflow; when the exact quantity is unrepresentable a looser practical
/// slack proportional to `epsilon` is used instead.
pub fn effective_slack(model: &Model, epsilon: f64, slack_floor: f64) -> f64 {
    let n = model.num_states() as f64;
    let p_min = model.min_transition_prob();
    let log_slack = n * p_min.ln();
    if log_slack.abs() > 700.0 {
        1e-9 * epsilon
    } else {
        log_slack.exp().max(slack_floor)
    }
}

/// One-update sign test: `f` must bound the value of the reduced model
/// `model[s = gamma]` (from below for `Above` to certify, from above for
/// `Below`). Within `slack * epsilon` of a fixpoint the test answers
/// `Tight` with the certified radius instead of a side.
pub fn guess_sign_check(
    model: &Model,
    s: StateId,
    gamma: f64,
    f: &[f64],
    epsilon: f64,
) -> SignCheck {
    let slack = effective_slack(model, epsilon, DEFAULT_SLACK_FLOOR);
    let updated = bellman_update_state(model, f, s);
    if (updated - gamma).abs() <= slack * epsilon {
        SignCheck::Tight {
            radius: (updated - gamma).abs() / slack,
        }
    } else if updated > gamma {
        SignCheck::Above
    } else {
        SignCheck::Below
    }
}

fn clamped_lower_sweep(model: &Model, v: &[f64], stats: &mut Stats) -> Vec<f64> {
    let swept = bellman_sweep(model, v);
    stats.updates += non_target_count(model);
    stats.sweeps += 1;
    swept.iter().zip(v).map(|(a, b)| a.max(*b)).collect()
}

fn clamped_upper_sweep(model: &Model, v: &[f64], stats: &mut Stats) -> Vec<f64> {
    let swept = bellman_sweep(model, v);
    stats.updates += non_target_count(model);
    stats.sweeps += 1;
    swept.iter().zip(v).map(|(a, b)| a.min(*b)).collect()
}

/// Shift all non-target entries of `v` (relative to `model`'s target set) by
/// `amount`, clamping lower shifts at the trivial floor.
fn widened(model: &Model, v: &[f64], amount: f64) -> Vec<f64> {
    let floor = if amount < 0.0 {
        match model.objective.kind {
            ObjectiveKind::Reach => 0.0,
            ObjectiveKind::Ssp => model.objective.w_min(),
        }
    } else {
        f64::NEG_INFINITY
    };
    v.iter()
        .enumerate()
        .map(|(s, &x)| {
            if model.is_target(s) {
                x
            } else {
                (x + amount).max(floor)
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn verify_inner(
    model: &Model,
    lower: &[f64],
    upper: &[f64],
    s: StateId,
    gamma: f64,
    epsilon: f64,
    k_limit: u64,
    slack: f64,
    conservative: bool,
    stats: &mut Stats,
    ctl: RunCtl,
) -> Result<VerifyOutcome, GuessError> {
    let reduced = model.reduce(s, gamma)?;
    let (mut l, mut u) = if conservative {
        let levels = compute_levels(&reduced);
        let b0 = initial_vectors(&reduced, &levels)?;
        (b0.lower, b0.upper)
    } else {
        let mut l = lower.to_vec();
        let mut u = upper.to_vec();
        l[s] = gamma;
        u[s] = gamma;
        (l, u)
    };
    let close_threshold = epsilon * slack / (2.0 * (1.0 + slack));
    for k in 1..=k_limit {
        let new_l = clamped_lower_sweep(&reduced, &l, stats);
        let new_u = clamped_upper_sweep(&reduced, &u, stats);
        let moved = new_l != l || new_u != u;
        l = new_l;
        u = new_u;
        // certificates come first: the widened-bounds exit is only sound
        // when neither one-sided test succeeds at the same iterate
        stats.updates += 1;
        if gamma <= bellman_update_state(model, &l, s) {
            return Ok(VerifyOutcome::LowerCertified {
                lower: l,
                iterations: k,
            });
        }
        stats.updates += 1;
        if bellman_update_state(model, &u, s) <= gamma {
            return Ok(VerifyOutcome::UpperCertified {
                upper: u,
                iterations: k,
            });
        }
        let width = l.iter().zip(&u).map(|(a, b)| b - a).fold(0.0, f64::max);
        if width <= close_threshold {
            return Ok(VerifyOutcome::BoundsFound {
                lower: widened(model, &l, -epsilon / 2.0),
                upper: widened(model, &u, epsilon / 2.0),
                iterations: k,
            });
        }
        if !moved || ctl.timed_out() {
            break;
        }
    }
    Ok(VerifyOutcome::Inconclusive { lower: l, upper: u })
}

/// Attempt to verify the guess `gamma` at state `s` within `k_limit`
/// iterations of dual value iteration on the reduced model.
///
/// The caller's bounds are reused as warm starts with the entry at `s`
/// overwritten by the guess; certifications are decided by single Bellman
/// updates on the original model, so they stay sound regardless of the warm
/// start.
pub fn verify_guess(
    model: &Model,
    bounds: &Bounds,
    s: StateId,
    gamma: f64,
    epsilon: f64,
    k_limit: u64,
) -> Result<VerifyOutcome, GuessError> {
    let slack = effective_slack(model, epsilon, DEFAULT_SLACK_FLOOR);
    let mut stats = Stats::default();
    verify_inner(
        model,
        &bounds.lower,
        &bounds.upper,
        s,
        gamma,
        epsilon,
        k_limit,
        slack,
        false,
        &mut stats,
        RunCtl::unbounded(),
    )
}

/// Choose the state to guess: propagate the current interval widths along
/// the edges for `k1` rounds (probabilistic edges weighted by probability,
/// decision edges uniformly) and return the non-target state that
/// accumulated the most weight, ties breaking to the smallest id.
pub fn pick_state(model: &Model, bounds: &Bounds, k1: u64) -> Result<StateId, SolveError> {
    let n = model.num_states();
    let mut w: Vec<f64> = (0..n).map(|s| bounds.upper[s] - bounds.lower[s]).collect();
    if (0..n).all(|s| model.is_target(s) || w[s] <= 0.0) {
        return Err(SolveError::AllIntervalsZero);
    }
    let mut eta = vec![0.0; n];
    for _ in 0..k1 {
        let mut next = vec![0.0; n];
        for s in 0..n {
            if w[s] == 0.0 {
                continue;
            }
            match model.kind_of[s] {
                StateKind::Probabilistic => {
                    for (&t, &p) in model.successors(s).iter().zip(model.probs(s)) {
                        next[t] += p * w[s];
                    }
                }
                StateKind::Decision => {
                    let share = w[s] / model.successors(s).len() as f64;
                    for &t in model.successors(s) {
                        next[t] += share;
                    }
                }
            }
        }
        w = next;
        for s in 0..n {
            eta[s] += w[s];
        }
    }
    let mut best = None;
    for s in 0..n {
        if model.is_target(s) {
            continue;
        }
        match best {
            None => best = Some(s),
            Some(b) if eta[s] > eta[b] => best = Some(s),
            _ => {}
        }
    }
    best.ok_or(SolveError::AllIntervalsZero)
}

/// Practical Guessing Value Iteration.
///
/// Repeatedly picks a state, guesses the midpoint of its interval, and tries
/// to verify the guess; certified sides tighten one bound while the other is
/// advanced by ordinary sweeps, and unresolved guesses recurse into the
/// reduced model at a finer precision. Requires a preprocessed model (MECs
/// collapsed for reachability, target reachable from everywhere for SSP) and
/// bracketing start bounds.
pub fn pick_verify(
    model: &Model,
    b0: &Bounds,
    cfg: &GuessConfig,
) -> Result<SolveReport, GuessError> {
    pick_verify_ctl(model, b0, cfg, RunCtl::unbounded())
}

pub(crate) fn pick_verify_ctl(
    model: &Model,
    b0: &Bounds,
    cfg: &GuessConfig,
    ctl: RunCtl,
) -> Result<SolveReport, GuessError> {
    cfg.validate()?;
    if let Some(s) = (0..model.num_states()).find(|&s| b0.lower[s] > b0.upper[s]) {
        return Err(SolveError::InvalidBounds { state: s }.into());
    }
    let start = Instant::now();
    let mut stats = Stats::default();
    let (lower, upper) = pick_verify_rec(
        model,
        b0.lower.clone(),
        b0.upper.clone(),
        cfg.epsilon,
        cfg,
        0,
        &mut stats,
        ctl,
    )?;
    let bounds = Bounds { lower, upper };
    let converged = bounds.width() <= cfg.epsilon;
    Ok(SolveReport {
        bounds,
        bellman_updates: stats.updates,
        sweeps: stats.sweeps,
        wall_time: start.elapsed(),
        algorithm: "gvi",
        converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn pick_verify_rec(
    model: &Model,
    mut lower: Vec<f64>,
    mut upper: Vec<f64>,
    epsilon: f64,
    cfg: &GuessConfig,
    depth: usize,
    stats: &mut Stats,
    ctl: RunCtl,
) -> Result<(Vec<f64>, Vec<f64>), GuessError> {
    if depth > cfg.max_depth {
        return Err(SolveError::DepthExceeded {
            limit: cfg.max_depth,
        }
        .into());
    }
    let slack = effective_slack(model, epsilon, cfg.slack_floor);
    loop {
        let width = lower
            .iter()
            .zip(&upper)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        if width <= epsilon || ctl.timed_out() {
            return Ok((lower, upper));
        }
        let snapshot = (lower.clone(), upper.clone());
        let s = pick_state(
            model,
            &Bounds {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            cfg.k1,
        )?;
        let gamma = 0.5 * (lower[s] + upper[s]);
        let outcome = verify_inner(
            model,
            &lower,
            &upper,
            s,
            gamma,
            epsilon,
            cfg.k2,
            slack,
            cfg.conservative_bounds,
            stats,
            ctl,
        )?;
        match outcome {
            VerifyOutcome::BoundsFound {
                lower: l, upper: u, ..
            } => {
                return Ok((l, u));
            }
            VerifyOutcome::LowerCertified {
                lower: l,
                iterations,
            } => {
                lower = l;
                for _ in 0..iterations {
                    upper = clamped_upper_sweep(model, &upper, stats);
                }
            }
            VerifyOutcome::UpperCertified {
                upper: u,
                iterations,
            } => {
                upper = u;
                for _ in 0..iterations {
                    lower = clamped_lower_sweep(model, &lower, stats);
                }
            }
            VerifyOutcome::Inconclusive { lower: l, upper: u } => {
                let reduced = model.reduce(s, gamma)?;
                let finer = epsilon * slack / (4.0 + 6.0 * slack);
                debug_assert!(finer < epsilon || !(epsilon > 0.0));
                let (l2, u2) = pick_verify_rec(&reduced, l, u, finer, cfg, depth + 1, stats, ctl)?;
                // one further verification step against the original model
                let second =
                    verify_inner(model, &l2, &u2, s, gamma, 0.0, 1, slack, false, stats, ctl)?;
                match second {
                    VerifyOutcome::LowerCertified {
                        lower: l3,
                        iterations,
                    } => {
                        lower = l3;
                        for _ in 0..iterations {
                            upper = clamped_upper_sweep(model, &upper, stats);
                        }
                    }
                    VerifyOutcome::UpperCertified {
                        upper: u3,
                        iterations,
                    } => {
                        upper = u3;
                        for _ in 0..iterations {
                            lower = clamped_lower_sweep(model, &lower, stats);
                        }
                    }
                    _ => {
                        // the guess was approximately correct
                        let margin = (1.0 + slack) * epsilon / (4.0 + 6.0 * slack);
                        lower = widened(model, &l2, -margin);
                        upper = widened(model, &u2, margin);
                    }
                }
            }
        }
        // fully stalled iterations cannot improve; return the best effort
        if lower == snapshot.0 && upper == snapshot.1 {
            return Ok((lower, upper));
        }
    }
}

/// The recursive guessing-set solver for Markov chains.
///
/// With an empty set this is exactly interval iteration. Otherwise the first
/// guessed state is resolved by binary search: each probe solves the reduced
/// model at a finer precision and a single Bellman update on the original
/// model decides the side of the guess. The closing solves at the final
/// bracket endpoints produce the returned bounds.
pub fn solve_with_guessing_set(
    model: &Model,
    epsilon: f64,
    guesses: &GuessSet,
) -> Result<SolveReport, GuessError> {
    let cfg = GuessConfig {
        epsilon,
        ..GuessConfig::default()
    };
    cfg.validate()?;
    let start = Instant::now();
    let mut stats = Stats::default();
    let mut max_loop = 0u64;
    let bounds = solve_with_set_rec(
        model,
        epsilon,
        &guesses.states,
        &cfg,
        0,
        &mut stats,
        &mut max_loop,
        RunCtl::unbounded(),
    )?;
    let converged = bounds.width() <= epsilon;
    Ok(SolveReport {
        bounds,
        bellman_updates: stats.updates,
        sweeps: stats.sweeps,
        wall_time: start.elapsed(),
        algorithm: "guessing-set",
        converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_with_set_rec(
    model: &Model,
    epsilon: f64,
    picks: &[StateId],
    cfg: &GuessConfig,
    depth: usize,
    stats: &mut Stats,
    max_loop: &mut u64,
    ctl: RunCtl,
) -> Result<Bounds, GuessError> {
    if depth > cfg.max_depth {
        return Err(SolveError::DepthExceeded {
            limit: cfg.max_depth,
        }
        .into());
    }
    let levels = compute_levels(model);
    let b0 = initial_vectors(model, &levels)?;
    if picks.is_empty() {
        let mut bounds = b0;
        ivi_core(model, &mut bounds, epsilon, ctl, stats);
        return Ok(bounds);
    }
    let s = picks[0];
    let rest = &picks[1..];
    let slack = effective_slack(model, epsilon, cfg.slack_floor);
    let finer = epsilon * slack / 4.0;
    debug_assert!(finer < epsilon || !(epsilon > 0.0));
    let mut lo = b0.lower[s];
    let mut hi = b0.upper[s];
    let mut iterations = 0u64;
    while hi - lo > epsilon / 2.0 {
        iterations += 1;
        let gamma = 0.5 * (lo + hi);
        let reduced = model.reduce(s, gamma)?;
        let probe =
            solve_with_set_rec(&reduced, finer, rest, cfg, depth + 1, stats, max_loop, ctl)?;
        stats.updates += 1;
        if gamma < bellman_update_state(model, &probe.lower, s) {
            lo = gamma;
        } else {
            stats.updates += 1;
            if gamma > bellman_update_state(model, &probe.upper, s) {
                hi = gamma;
            } else {
                // the guess was approximately correct
                lo = (gamma - epsilon / 4.0).max(b0.lower[s]);
                hi = (gamma + epsilon / 4.0).min(b0.upper[s]);
            }
        }
        if ctl.timed_out() {
            break;
        }
    }
    *max_loop = (*max_loop).max(iterations);
    let low_solve = solve_with_set_rec(
        &model.reduce(s, lo)?,
        epsilon / 4.0,
        rest,
        cfg,
        depth + 1,
        stats,
        max_loop,
        ctl,
    )?;
    let high_solve = solve_with_set_rec(
        &model.reduce(s, hi)?,
        epsilon / 4.0,
        rest,
        cfg,
        depth + 1,
        stats,
        max_loop,
        ctl,
    )?;
    Ok(Bounds {
        lower: low_solve.lower,
        upper: high_solve.upper,
    })
}

/// Approximate a Markov chain's value vector: select the guessing set, then
/// run the guessing-set solver.
pub fn solve_mc(model: &Model, epsilon: f64) -> Result<SolveReport, GuessError> {
    let guesses = mark_to_guess(model);
    solve_with_guessing_set(model, epsilon, &guesses)
}
