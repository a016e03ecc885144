//! Registered examples: fully instantiated weights, schedules and the
//! conditions to check, with the verdicts each one is known to have.

use std::collections::BTreeMap;

use wslln_core::{GapSeq, Schedule, WeightExpr, WeightSeq};

use crate::config::RunConfig;
use crate::error::{LabError, Result};

pub const IDS: [&str; 9] = ["E0", "E1", "E2", "E3", "E4", "E5", "E6", "E7", "EwA"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl Params {
    /// Defaults for `id`, overridden by whatever the config sets.
    pub fn resolve(id: &str, cfg: &RunConfig) -> Params {
        let p = cfg.p.unwrap_or(2.0);
        let beta = cfg.beta.unwrap_or(0.5);
        let default_delta = match id {
            "E7" => 2.0,
            _ => 0.8 * (p - 1.0) * beta / p,
        };
        let default_eps = match id {
            "E4" => 1.0,
            _ => 0.5,
        };
        Params {
            p,
            beta,
            delta: cfg.delta.unwrap_or(default_delta),
            gamma: cfg.gamma.unwrap_or(1.0),
            alpha: cfg.alpha.unwrap_or(1.0),
            eps: cfg.eps.unwrap_or(default_eps),
        }
    }

    pub fn to_map(self) -> BTreeMap<String, f64> {
        [("p", self.p), ("beta", self.beta), ("delta", self.delta), ("gamma", self.gamma), ("alpha", self.alpha), ("eps", self.eps)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum Condition {
    /// (W1) and (W2) with the instance's `ξ`.
    Weak,
    /// (W3) and (W4).
    Admissible,
    /// `Σ_n (G_n/W_n)^p` over every `n`.
    Full,
    T21,
    T72,
    /// Uses `--beta`.
    T73,
    /// Uses `--modulation`.
    T322,
    Rrr,
    E01,
    Ew3,
    /// Uses `--alpha` in `(0, 1)`.
    Rt1,
    /// (T21) for another `W`, reported under `label`.
    T21With { label: String, w: WeightSeq },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub params: Params,
    pub g: WeightSeq,
    pub w: WeightSeq,
    pub schedule: Schedule,
    pub xi: Option<GapSeq>,
    pub conditions: Vec<Condition>,
    /// `(label, outcome)` in the `--expect` vocabulary.
    pub expected: Vec<(String, String)>,
    pub description: String,
}

fn seq(e: WeightExpr) -> Result<WeightSeq> {
    Ok(WeightSeq::from_expr(e)?)
}

fn exp(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// `(ln n)^{β+1/p} (lnln n)^γ`.
fn log_weight(pr: &Params) -> WeightExpr {
    WeightExpr::new(1.0, 0.0, pr.beta + 1.0 / pr.p, pr.gamma)
}

const ADMISSIBLE: [(&str, &str); 2] = [("W3", "converges"), ("W4", "converges")];

pub fn instantiate(id: &str, cfg: &RunConfig) -> Result<Instance> {
    let pr = Params::resolve(id, cfg);
    let (p, beta, delta) = (pr.p, pr.beta, pr.delta);
    let power = |a: f64| WeightExpr::power(a);
    if matches!(id, "E3" | "E6") && beta >= 1.0 {
        return Err(LabError::Precondition(format!(
            "{id} needs beta < 1: at beta = {beta} the weight n^(1-beta)/ln^alpha n does not increase to infinity"
        )));
    }
    let mut inst = match id {
        "E0" => {
            let g = log_weight(&pr);
            Instance {
                id: id.into(),
                params: pr,
                g: seq(g)?,
                w: seq(g.mul(&power(1.0 / p)))?,
                schedule: Schedule::Superexp,
                xi: Some(GapSeq::AtSchedule(power(1.0 / p))),
                conditions: vec![Condition::Weak, Condition::E01, Condition::Full],
                expected: exp(&[("W1", "converges"), ("W2", "converges"), ("E01a", "converges"), ("E01b", "converges"), ("W1-full", "diverges")]),
                description: "G = (ln n)^(beta+1/p) (lnln n)^gamma, W = n^(1/p) G, n_k = k^k, xi_k = n_k^(1/p)".into(),
            }
        }
        "E1" | "E5" => Instance {
            id: id.into(),
            params: pr,
            g: seq(power(1.0 - beta))?,
            w: seq(power(1.0 - delta))?,
            schedule: Schedule::power(1.0 / beta)?,
            xi: None,
            conditions: if id == "E1" {
                vec![Condition::Admissible]
            } else {
                vec![Condition::Admissible, Condition::T21, Condition::Rrr]
            },
            expected: expected_for(id, &pr),
            description: "G = n^(1-beta), W = n^(1-delta), n_k = floor(k^(1/beta)) + 1".into(),
        },
        "E2" => Instance {
            id: id.into(),
            params: pr,
            g: seq(WeightExpr::new(1.0, 1.0 - beta, pr.gamma, 0.0))?,
            w: seq(WeightExpr::new(1.0, 1.0 - delta, pr.gamma, 0.0))?,
            schedule: Schedule::power(1.0 / beta)?,
            xi: None,
            conditions: vec![Condition::Admissible],
            expected: expected_for(id, &pr),
            description: "G = n^(1-beta) ln^gamma n, W = n^(1-delta) ln^gamma n, n_k = floor(k^(1/beta)) + 1".into(),
        },
        "E3" | "E6" => Instance {
            id: id.into(),
            params: pr,
            g: seq(WeightExpr::new(1.0, 1.0 - beta, -pr.alpha, 0.0))?,
            w: seq(WeightExpr::new(1.0, 1.0 - delta, -pr.alpha, 0.0))?,
            schedule: Schedule::power(1.0 / beta)?,
            xi: None,
            conditions: if id == "E3" {
                vec![Condition::Admissible]
            } else {
                vec![Condition::Admissible, Condition::T21, Condition::Rrr]
            },
            expected: expected_for(id, &pr),
            description: "R = n^(1-beta) / ln^alpha n, U = n^(1-delta) / ln^alpha n, n_k = floor(k^(1/beta)) + 1".into(),
        },
        "E4" => {
            let g = if pr.eps >= 1.0 { log_weight(&pr).mul(&power(1.0 / p)) } else { power(3.0) };
            let g = seq(g)?;
            let w = seq(g.expr().expect("symbolic").powf(pr.eps + 1.0))?;
            Instance {
                id: id.into(),
                params: pr,
                schedule: Schedule::greedy(&g)?,
                g,
                w,
                xi: None,
                conditions: vec![Condition::Ew3, Condition::Admissible],
                expected: exp(&[("EW3", "converges"), ADMISSIBLE[0], ADMISSIBLE[1]]),
                description: "W = G^(eps+1), n_(k+1) = floor(G(n_k)) + n_k + 1; G = n^(1/p) (ln n)^(beta+1/p) (lnln n)^gamma at eps = 1, else G = n^3".into(),
            }
        }
        "E7" => {
            let g = log_weight(&pr);
            let r = 1.0 / pr.alpha;
            let w1 = seq(g.mul(&power(1.0 / p)))?;
            Instance {
                id: id.into(),
                params: pr,
                g: seq(g)?,
                w: seq(g.mul(&power(delta / p)))?,
                schedule: Schedule::power(r)?,
                xi: None,
                conditions: vec![Condition::Admissible, Condition::T21, Condition::T21With { label: "T21-delta1".into(), w: w1 }],
                expected: expected_for(id, &pr),
                description: "G = (ln n)^(beta+1/p) (lnln n)^gamma, W = n^(delta/p) G, n_m = floor(m^(1/alpha)) + 1".into(),
            }
        }
        "EwA" => {
            let eps = pr.eps;
            let g = WeightSeq::from_fn("sqrt(n(n+1)/2)", 1, |n| {
                let n = n as f64;
                (n * (n + 1.0) / 2.0).sqrt()
            })?;
            let w = WeightSeq::from_fn(format!("n^{} sqrt(n(n+1))", (1.0 + eps) / 4.0), 1, move |n| {
                let n = n as f64;
                n.powf((1.0 + eps) / 4.0) * (n * (n + 1.0)).sqrt()
            })?;
            Instance {
                id: id.into(),
                params: pr,
                xi: Some(GapSeq::Increment(g.clone())),
                g,
                w,
                schedule: Schedule::exact_power(2)?,
                conditions: vec![Condition::Weak, Condition::T21],
                expected: exp(&[("W1", "not-divergent"), ("W2", "not-divergent"), ("T21", "not-divergent")]),
                description: "G_n^2 = n(n+1)/2, W = n^((1+eps)/4) sqrt(n(n+1)), n_m = m^2, xi_m = G(n_(m+1)) - G(n_m)".into(),
            }
        }
        other => return Err(LabError::UnknownExample(other.to_string())),
    };
    if let Some(text) = &cfg.g {
        inst.g = WeightSeq::parse(text)?;
    }
    if let Some(text) = &cfg.w {
        inst.w = crate::specs::weight_with(text, &inst.g)?;
    }
    if let Some(text) = &cfg.schedule {
        inst.schedule = crate::specs::schedule(text, &inst.g)?;
    }
    if let Some(text) = &cfg.xi {
        inst.xi = Some(crate::specs::xi(text, &inst.g)?);
    }
    Ok(inst)
}

/// Verdicts of the power-type examples: admissible iff `δ < (p−1)β/p`,
/// otherwise both (W3) and (W4) fail.
fn expected_for(id: &str, pr: &Params) -> Vec<(String, String)> {
    let verdict = |ok: bool| if ok { "converges" } else { "diverges" };
    let mut out = if id == "E7" {
        // G/W = n^{-δ/p}; the gap term is m^{p(r-1) - rδ} times a convergent log factor.
        let r = 1.0 / pr.alpha;
        exp(&[("W3", verdict(r * pr.delta > 1.0 + 1e-12)), ("W4", verdict(r * pr.delta - pr.p * (r - 1.0) >= 1.0 - 1e-12))])
    } else if id == "E4" || pr.delta < (pr.p - 1.0) * pr.beta / pr.p - 1e-12 {
        exp(&ADMISSIBLE)
    } else if id == "E2" && pr.delta <= (pr.p - 1.0) * pr.beta / pr.p + 1e-12 {
        // At the boundary the gap term is k^{-1} ln^{-γp} k.
        exp(&[("W3", "diverges"), ("W4", verdict(pr.gamma * pr.p > 1.0))])
    } else {
        exp(&[("W3", "diverges"), ("W4", "diverges")])
    };
    if matches!(id, "E5" | "E6" | "E7") {
        out.extend(exp(&[("T21", "converges"), ("RRR", "diverges")]).into_iter().filter(|(l, _)| id != "E7" || l == "T21"));
    }
    if id == "E7" {
        out.push(("T21-delta1".into(), "converges".into()));
    }
    out
}

impl Condition {
    pub fn parse(name: &str) -> Result<Condition> {
        Ok(match name.trim().to_ascii_lowercase().as_str() {
            "weak" | "w1w2" => Condition::Weak,
            "admissible" | "w3w4" => Condition::Admissible,
            "full" => Condition::Full,
            "t21" => Condition::T21,
            "t72" => Condition::T72,
            "t73" => Condition::T73,
            "t322" => Condition::T322,
            "rrr" => Condition::Rrr,
            "e01" => Condition::E01,
            "ew3" => Condition::Ew3,
            "1rt1" | "rt1" => Condition::Rt1,
            other => return Err(crate::error::config(format!("unknown condition `{other}`"))),
        })
    }
}

/// One line per example for `list-examples`.
pub fn listing() -> Result<Vec<String>> {
    let cfg = RunConfig::new("list-examples");
    IDS.iter()
        .map(|id| {
            let inst = instantiate(id, &cfg)?;
            let exp: Vec<String> = inst.expected.iter().map(|(l, v)| format!("{l}={v}")).collect();
            Ok(format!("{id:<4} {}\n     defaults: {:?}\n     expects: {}", inst.description, inst.params, exp.join(" ")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_instantiates() {
        let cfg = RunConfig::new("check");
        for id in IDS {
            let inst = instantiate(id, &cfg).unwrap();
            assert!(!inst.expected.is_empty(), "{id}");
        }
        assert!(matches!(instantiate("E9", &cfg), Err(LabError::UnknownExample(_))));
    }

    #[test]
    fn boundary_delta_expects_failure() {
        let mut cfg = RunConfig::new("check");
        cfg.delta = Some(0.25);
        let inst = instantiate("E1", &cfg).unwrap();
        assert!(inst.expected.contains(&("W4".to_string(), "diverges".to_string())));
        cfg.delta = Some(0.125);
        cfg.beta = Some(0.25);
        let e2 = instantiate("E2", &cfg).unwrap();
        assert!(e2.expected.contains(&("W3".to_string(), "diverges".to_string())));
        assert!(e2.expected.contains(&("W4".to_string(), "converges".to_string())));
        let e4 = instantiate("E4", &cfg).unwrap();
        assert!(e4.expected.contains(&("W4".to_string(), "converges".to_string())));
    }

    #[test]
    fn ewa_weights_match_closed_forms() {
        let inst = instantiate("EwA", &RunConfig::new("slln")).unwrap();
        assert!((inst.g.value(2).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((inst.w.value(2).unwrap() - 6f64.sqrt() * 8f64.powf(0.125)).abs() < 1e-14);
    }
}
