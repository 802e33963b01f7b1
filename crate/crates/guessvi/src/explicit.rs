//! Line-oriented explicit model format.
//!
//! ```text
//! # comment
//! MODEL mc|mdp
//! OBJECTIVE reach|ssp
//! STATES n
//! KIND i p            # probabilistic; decision is the default
//! EDGE i j [prob]     # prob mandatory iff state i is probabilistic
//! TARGET i weight     # targets are implicitly absorbing
//! COST i w            # SSP only, one per non-target state
//! ```
//!
//! Probabilities are decimal literals parsed to doubles; serialization uses
//! the shortest round-tripping decimal form, so parse after serialize
//! reproduces the model bit for bit.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Model, ModelError, ModelKind, Objective, ObjectiveKind, StateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplicitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{message}")]
    Structure { message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> ExplicitError {
    ExplicitError::Syntax {
        line,
        message: message.into(),
    }
}

fn structure(message: impl Into<String>) -> ExplicitError {
    ExplicitError::Structure {
        message: message.into(),
    }
}

struct Header {
    kind: ModelKind,
    objective: ObjectiveKind,
    num_states: usize,
}

/// Parse and validate a model from the explicit format.
pub fn parse_model(text: &str) -> Result<Model, ExplicitError> {
    let mut header: (Option<ModelKind>, Option<ObjectiveKind>, Option<usize>) = (None, None, None);
    let mut kinds: Vec<Option<StateKind>> = Vec::new();
    let mut edges: Vec<Vec<(usize, Option<f64>)>> = Vec::new();
    let mut targets: Vec<Option<f64>> = Vec::new();
    let mut costs: Vec<Option<f64>> = Vec::new();

    let mut full: Option<Header> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match keyword {
            "MODEL" => {
                let kind = match rest.as_slice() {
                    ["mc"] => ModelKind::Mc,
                    ["mdp"] => ModelKind::Mdp,
                    _ => return Err(syntax(line_no, "expected `MODEL mc` or `MODEL mdp`")),
                };
                header.0 = Some(kind);
            }
            "OBJECTIVE" => {
                let objective = match rest.as_slice() {
                    ["reach"] => ObjectiveKind::Reach,
                    ["ssp"] => ObjectiveKind::Ssp,
                    _ => {
                        return Err(syntax(
                            line_no,
                            "expected `OBJECTIVE reach` or `OBJECTIVE ssp`",
                        ))
                    }
                };
                header.1 = Some(objective);
            }
            "STATES" => {
                let n = rest
                    .first()
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|_| rest.len() == 1)
                    .ok_or_else(|| syntax(line_no, "expected `STATES <count>`"))?;
                header.2 = Some(n);
                kinds = vec![None; n];
                edges = vec![Vec::new(); n];
                targets = vec![None; n];
                costs = vec![None; n];
            }
            "KIND" | "EDGE" | "TARGET" | "COST" => {
                if full.is_none() {
                    match header {
                        (Some(kind), Some(objective), Some(num_states)) => {
                            full = Some(Header {
                                kind,
                                objective,
                                num_states,
                            });
                        }
                        _ => {
                            return Err(syntax(
                                line_no,
                                "MODEL, OBJECTIVE and STATES must come before state lines",
                            ))
                        }
                    }
                }
                let h = full.as_ref().unwrap();
                let state = rest
                    .first()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| {
                        syntax(line_no, format!("expected a state id after {keyword}"))
                    })?;
                if state >= h.num_states {
                    return Err(syntax(
                        line_no,
                        format!(
                            "state {state} out of range, model has {} states",
                            h.num_states
                        ),
                    ));
                }
                match keyword {
                    "KIND" => {
                        let k = match rest.as_slice() {
                            [_, "d"] => StateKind::Decision,
                            [_, "p"] => StateKind::Probabilistic,
                            _ => return Err(syntax(line_no, "expected `KIND <state> d|p`")),
                        };
                        kinds[state] = Some(k);
                    }
                    "EDGE" => {
                        let dest = rest
                            .get(1)
                            .and_then(|t| t.parse::<usize>().ok())
                            .ok_or_else(|| syntax(line_no, "expected `EDGE <from> <to> [prob]`"))?;
                        if dest >= h.num_states {
                            return Err(syntax(line_no, format!("state {dest} out of range")));
                        }
                        let prob = match rest.len() {
                            2 => None,
                            3 => Some(rest[2].parse::<f64>().map_err(|_| {
                                syntax(line_no, format!("bad probability `{}`", rest[2]))
                            })?),
                            _ => return Err(syntax(line_no, "expected `EDGE <from> <to> [prob]`")),
                        };
                        edges[state].push((dest, prob));
                    }
                    "TARGET" => {
                        let weight = rest
                            .get(1)
                            .filter(|_| rest.len() == 2)
                            .and_then(|t| t.parse::<f64>().ok())
                            .ok_or_else(|| syntax(line_no, "expected `TARGET <state> <weight>`"))?;
                        targets[state] = Some(weight);
                    }
                    "COST" => {
                        if h.objective != ObjectiveKind::Ssp {
                            return Err(syntax(
                                line_no,
                                "COST lines are only valid for OBJECTIVE ssp",
                            ));
                        }
                        let cost = rest
                            .get(1)
                            .filter(|_| rest.len() == 2)
                            .and_then(|t| t.parse::<f64>().ok())
                            .ok_or_else(|| syntax(line_no, "expected `COST <state> <cost>`"))?;
                        costs[state] = Some(cost);
                    }
                    _ => unreachable!(),
                }
            }
            other => return Err(syntax(line_no, format!("unknown keyword `{other}`"))),
        }
    }

    let h = match (full, header) {
        (Some(h), _) => h,
        (None, (Some(kind), Some(objective), Some(num_states))) => Header {
            kind,
            objective,
            num_states,
        },
        _ => return Err(syntax(text.lines().count(), "incomplete header")),
    };

    let n = h.num_states;
    let mut kind_of = Vec::with_capacity(n);
    let mut successors = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    let mut weight = vec![0.0; n];
    let mut is_target = vec![false; n];
    for s in 0..n {
        if let Some(w) = targets[s] {
            if !edges[s].is_empty() && edges[s] != [(s, None)] {
                return Err(structure(format!(
                    "state {s}: targets are implicitly absorbing, drop its EDGE lines"
                )));
            }
            if kinds[s] == Some(StateKind::Probabilistic) {
                return Err(structure(format!(
                    "state {s}: a target cannot be probabilistic"
                )));
            }
            if costs[s].is_some() {
                return Err(structure(format!(
                    "state {s}: use the TARGET weight, not COST, on targets"
                )));
            }
            is_target[s] = true;
            weight[s] = w;
            kind_of.push(StateKind::Decision);
            successors.push(vec![s]);
            probs.push(Vec::new());
            continue;
        }
        let kind = kinds[s].unwrap_or(StateKind::Decision);
        kind_of.push(kind);
        let mut row_succ = Vec::with_capacity(edges[s].len());
        let mut row_prob = Vec::with_capacity(edges[s].len());
        for &(dest, p) in &edges[s] {
            row_succ.push(dest);
            match (kind, p) {
                (StateKind::Decision, Some(_)) => {
                    return Err(structure(format!("state {s}: prob on decision edge")));
                }
                (StateKind::Probabilistic, None) => {
                    return Err(structure(format!(
                        "state {s}: probabilistic edge needs a probability"
                    )));
                }
                (StateKind::Probabilistic, Some(q)) => row_prob.push(q),
                (StateKind::Decision, None) => {}
            }
        }
        successors.push(row_succ);
        probs.push(row_prob);
        if h.objective == ObjectiveKind::Ssp {
            match costs[s] {
                Some(c) => weight[s] = c,
                None => {
                    return Err(structure(format!(
                        "state {s}: SSP models need a COST for every non-target state"
                    )));
                }
            }
        }
    }
    let model = Model {
        kind: h.kind,
        kind_of,
        successors,
        probs,
        objective: Objective::new(h.objective, is_target, weight),
    };
    model.validate()?;
    Ok(model)
}

/// Canonical serialization; `parse_model` of the output reproduces the model
/// exactly.
pub fn serialize_model(model: &Model) -> String {
    let mut out = String::new();
    let kind = match model.kind {
        ModelKind::Mc => "mc",
        ModelKind::Mdp => "mdp",
    };
    let objective = match model.objective.kind {
        ObjectiveKind::Reach => "reach",
        ObjectiveKind::Ssp => "ssp",
    };
    let _ = writeln!(out, "MODEL {kind}");
    let _ = writeln!(out, "OBJECTIVE {objective}");
    let _ = writeln!(out, "STATES {}", model.num_states());
    for s in 0..model.num_states() {
        if !model.is_target(s) && model.kind_of[s] == StateKind::Probabilistic {
            let _ = writeln!(out, "KIND {s} p");
        }
    }
    for s in 0..model.num_states() {
        if model.is_target(s) {
            continue;
        }
        match model.kind_of[s] {
            StateKind::Decision => {
                for &t in model.successors(s) {
                    let _ = writeln!(out, "EDGE {s} {t}");
                }
            }
            StateKind::Probabilistic => {
                for (&t, &p) in model.successors(s).iter().zip(model.probs(s)) {
                    let _ = writeln!(out, "EDGE {s} {t} {p}");
                }
            }
        }
    }
    for s in 0..model.num_states() {
        if model.is_target(s) {
            let _ = writeln!(out, "TARGET {s} {}", model.weight(s));
        }
    }
    if model.objective.kind == ObjectiveKind::Ssp {
        for s in 0..model.num_states() {
            if !model.is_target(s) {
                let _ = writeln!(out, "COST {s} {}", model.weight(s));
            }
        }
    }
    out
}
