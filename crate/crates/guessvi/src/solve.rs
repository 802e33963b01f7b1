//! End-to-end solving: preprocessing, algorithm dispatch, and mapping the
//! results back onto the original state space.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::{collapse_mecs, compute_levels, initial_vectors, qualitative_zero, GraphError};
use crate::guess::{pick_verify_ctl, GuessConfig, GuessError};
use crate::model::{Model, ModelError, ObjectiveKind};
use crate::vi::{ivi_core, Bounds, IviStop, RunCtl, SolveError, SolveReport, Stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Vi,
    Ivi,
    Gvi,
}

impl Algo {
    pub fn parse(name: &str) -> Option<Algo> {
        match name {
            "vi" => Some(Algo::Vi),
            "ivi" => Some(Algo::Ivi),
            "gvi" => Some(Algo::Gvi),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::Vi => "vi",
            Algo::Ivi => "ivi",
            Algo::Gvi => "gvi",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub algo: Algo,
    pub epsilon: f64,
    pub k1: u64,
    pub k2: u64,
    pub conservative_bounds: bool,
    /// Collapse maximal end components before solving reachability models.
    pub collapse_mecs: bool,
    pub timeout: Option<Duration>,
    /// Iteration budget for vi and ivi.
    pub budget: u64,
}

impl SolveOptions {
    pub fn new(algo: Algo, epsilon: f64) -> Self {
        SolveOptions {
            algo,
            epsilon,
            k1: 10,
            k2: 100,
            conservative_bounds: false,
            collapse_mecs: true,
            timeout: None,
            budget: u64::MAX,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveFailure {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Guess(#[from] GuessError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A solver report over the original state space plus timeout information.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub timed_out: bool,
}

/// Validate, preprocess, solve, and pull values back to the input states.
pub fn solve(model: &Model, opts: &SolveOptions) -> Result<SolveOutcome, SolveFailure> {
    model.validate()?;
    let deadline = opts.timeout.map(|t| Instant::now() + t);
    let ctl = RunCtl {
        deadline,
        max_sweeps: opts.budget,
    };

    // preprocessing establishes the unique-fixpoint preconditions
    let (work, map): (Model, Option<Vec<usize>>) = match model.objective.kind {
        ObjectiveKind::Reach if opts.collapse_mecs => {
            let c = collapse_mecs(model);
            (c.model, Some(c.map))
        }
        ObjectiveKind::Reach => (model.clone(), None),
        ObjectiveKind::Ssp => {
            if let Some(&s) = qualitative_zero(model).first() {
                return Err(GraphError::SspUnreachable { state: s }.into());
            }
            (model.clone(), None)
        }
    };
    let levels = compute_levels(&work);
    let b0 = initial_vectors(&work, &levels)?;

    let start = Instant::now();
    let mut report = match opts.algo {
        Algo::Vi => {
            let mut stats = Stats::default();
            crate::vi::value_iteration_ctl(&work, &b0.lower, opts.epsilon, ctl, &mut stats)
        }
        Algo::Ivi => {
            let mut bounds = b0.clone();
            let mut stats = Stats::default();
            let stop = ivi_core(&work, &mut bounds, opts.epsilon, ctl, &mut stats);
            let converged = match stop {
                IviStop::Converged => true,
                IviStop::Stalled => bounds.width() <= opts.epsilon,
                _ => false,
            };
            SolveReport {
                bounds,
                bellman_updates: stats.updates,
                sweeps: stats.sweeps,
                wall_time: start.elapsed(),
                algorithm: "ivi",
                converged,
            }
        }
        Algo::Gvi => {
            let cfg = GuessConfig {
                epsilon: opts.epsilon,
                k1: opts.k1,
                k2: opts.k2,
                conservative_bounds: opts.conservative_bounds,
                ..GuessConfig::default()
            };
            pick_verify_ctl(&work, &b0, &cfg, ctl)?
        }
    };
    report.wall_time = start.elapsed();

    if let Some(map) = map {
        report.bounds = Bounds {
            lower: map.iter().map(|&img| report.bounds.lower[img]).collect(),
            upper: map.iter().map(|&img| report.bounds.upper[img]).collect(),
        };
    }
    let timed_out = !report.converged && deadline.is_some_and(|d| Instant::now() >= d);
    Ok(SolveOutcome { report, timed_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_random, gen_slow_mdp, SlowMdpLayout};
    use crate::model::{ModelKind, ObjectiveKind};
    use crate::oracle::exact_mdp_value;

    #[test]
    fn gvi_pipeline_maps_values_back() {
        let m = gen_slow_mdp(3);
        let lay = SlowMdpLayout::new(3);
        let out = solve(&m, &SolveOptions::new(Algo::Gvi, 1e-4)).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.report.bounds.lower.len(), m.num_states());
        let mid = |s: usize| 0.5 * (out.report.bounds.lower[s] + out.report.bounds.upper[s]);
        assert!((mid(lay.coin) - 0.5).abs() <= 1e-4);
        assert!((mid(lay.sink) - 0.0).abs() <= 1e-4);
        assert!((mid(lay.decision(0)) - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn ivi_pipeline_brackets_oracle_on_random_mdp() {
        let m = gen_random(
            ModelKind::Mdp,
            ObjectiveKind::Reach,
            12,
            3,
            &[0.25, 0.5, 1.0],
            42,
        );
        let oracle = exact_mdp_value(&m).unwrap();
        let out = solve(&m, &SolveOptions::new(Algo::Ivi, 1e-6)).unwrap();
        assert!(out.report.converged);
        for s in 0..m.num_states() {
            assert!(
                out.report.bounds.lower[s] <= oracle.values[s] + 1e-9,
                "state {s}"
            );
            assert!(
                out.report.bounds.upper[s] >= oracle.values[s] - 1e-9,
                "state {s}"
            );
        }
    }

    #[test]
    fn timeout_reports_flagged_outcome() {
        let m = crate::generators::gen_slow_mc(24, 0.5);
        let mut opts = SolveOptions::new(Algo::Ivi, 1e-12);
        opts.timeout = Some(Duration::from_millis(1));
        let out = solve(&m, &opts).unwrap();
        if !out.report.converged {
            assert!(out.timed_out);
        }
    }
}
