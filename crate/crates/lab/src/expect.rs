//! `--expect` assertions over the outcome table of a run.
//!
//! Outcomes are `label → value` strings: verdicts (`converges`, `diverges`,
//! `unknown`), diagnostic verdicts and `true`/`false` flags. A token is either
//! `LABEL=VALUE` or a shorthand:
//!
//! | token | meaning |
//! |---|---|
//! | `admissible` / `not-admissible` | `admissible=true` / `false` |
//! | `weak-admissible` | `weak-admissible=true` |
//! | `t21` | `T21=converges` |
//! | `full-divergent` | `W1-full=diverges` |
//! | `ae-consistent` | `ae=consistent-with-convergence` |
//! | `meaningful` / `not-meaningful` | `meaningful-regime=true` / `false` |
//! | `theorem-regime` | `theorem-regime=true` |
//! | `bound-holds` | `bound-holds=true` |
//! | `registry` | every verdict registered for `--example` |
//!
//! The value `not-divergent` accepts `converges` and `unknown`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{config, Result};

pub type Outcomes = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectCheck {
    pub token: String,
    pub label: String,
    pub wanted: String,
    pub got: String,
    pub ok: bool,
}

fn shorthand(token: &str) -> Option<(&'static str, &'static str)> {
    Some(match token {
        "admissible" => ("admissible", "true"),
        "not-admissible" => ("admissible", "false"),
        "weak-admissible" => ("weak-admissible", "true"),
        "t21" => ("T21", "converges"),
        "full-divergent" => ("W1-full", "diverges"),
        "ae-consistent" => ("ae", "consistent-with-convergence"),
        "meaningful" => ("meaningful-regime", "true"),
        "not-meaningful" => ("meaningful-regime", "false"),
        "theorem-regime" => ("theorem-regime", "true"),
        "bound-holds" => ("bound-holds", "true"),
        _ => return None,
    })
}

fn matches(wanted: &str, got: &str) -> bool {
    match wanted {
        "not-divergent" => got == "converges" || got == "unknown",
        w => w == got,
    }
}

/// Splits comma-joined tokens.
pub fn tokens(raw: &[String]) -> Vec<String> {
    raw.iter().flat_map(|t| t.split(',')).map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

pub fn evaluate(raw: &[String], outcomes: &Outcomes, registry: Option<&[(String, String)]>) -> Result<Vec<ExpectCheck>> {
    let mut out = Vec::new();
    for token in tokens(raw) {
        let pairs: Vec<(String, String)> = if token == "registry" {
            registry.ok_or_else(|| config("`--expect registry` needs `--example`"))?.to_vec()
        } else if let Some((l, v)) = shorthand(&token) {
            vec![(l.to_string(), v.to_string())]
        } else if let Some((l, v)) = token.split_once('=') {
            vec![(l.trim().to_string(), v.trim().to_string())]
        } else {
            return Err(config(format!("unknown expectation `{token}`")));
        };
        for (label, wanted) in pairs {
            let got = outcomes
                .get(&label)
                .ok_or_else(|| config(format!("expectation `{token}` refers to `{label}`, which this run does not compute")))?
                .clone();
            out.push(ExpectCheck { ok: matches(&wanted, &got), token: token.clone(), label, wanted, got });
        }
    }
    Ok(out)
}
