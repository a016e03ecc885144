//! Summability conditions: exact verdicts from the Bertrand table plus
//! partial-sum diagnostics on a fixed truncation ladder.
//!
//! Verdicts are symbolic whenever the general term has a power–log class.
//! For schedules without a symbolic composition (geometric, explicit, greedy)
//! a one-sided comparison is used: if `g` is eventually decreasing then
//! `g(n_k) ≤ g(k)`, so `Σ g(k) < ∞` forces `Σ g(n_k) < ∞`. Anything else is
//! reported as `unknown` with the numeric evidence attached.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bertrand;
use crate::error::{invalid, Error, Result};
use crate::math::{self, KahanSum};
use crate::modulation::{IncrementClass, ModulationSeq};
use crate::schedule::{asymptotic_class, GapSeq, Schedule};
use crate::weight::{WeightExpr, WeightSeq};

pub const STANDARD_LADDER: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const EXTENDED_LADDER: [u64; 6] = [100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000];

/// Relative growth below which the heuristic claims convergence.
pub const CONVERGENCE_SLACK: f64 = 1e-3;
/// Dyadic-block ratio at or above which the heuristic claims divergence.
pub const BLOCK_RATIO_FLOOR: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionKind {
    W1,
    W2,
    W3,
    W4,
    T21,
    T73,
    T322,
    E01a,
    E01b,
    EW3,
    RT1gamma,
    #[serde(rename = "RRR-divergence")]
    Rrr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictSource {
    Symbolic,
    NumericHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicClaim {
    Converges,
    Diverges,
    Inconclusive,
}

impl HeuristicClaim {
    /// Whether the numeric claim says the opposite of a verdict.
    pub fn contradicts(self, v: Verdict) -> bool {
        matches!(
            (self, v),
            (HeuristicClaim::Converges, Verdict::Diverges) | (HeuristicClaim::Diverges, Verdict::Converges)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub kind: ConditionKind,
    pub params: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub verdict_source: VerdictSource,
    pub heuristic: HeuristicClaim,
    pub partial_sums: Vec<(u64, f64)>,
    /// `(a, b, c)` of the general term, or of a dominating series when
    /// `class_exact` is false.
    pub class: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub superexp: f64,
    pub class_scale: Option<f64>,
    pub class_exact: bool,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub zero_series: bool,
    pub tail_bound: Option<f64>,
    pub value: Option<f64>,
    pub meaningful_regime: Option<bool>,
    /// First and last summation index.
    pub range: (u64, u64),
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl AdmissibilityReport {
    pub fn converges(&self) -> bool {
        self.verdict == Verdict::Converges
    }

    pub fn class_expr(&self) -> Option<WeightExpr> {
        let exps = self.class?;
        Some(WeightExpr { scale: self.class_scale.unwrap_or(1.0), exps, superexp: self.superexp })
    }

    /// Symbolic convergence must come from a class inside the Bertrand region.
    pub fn is_consistent(&self) -> bool {
        let sums_ok = self.partial_sums.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        let class_ok = match (self.verdict, self.verdict_source) {
            (Verdict::Converges, VerdictSource::Symbolic) => {
                self.zero_series || self.class_expr().is_some_and(|c| bertrand::converges(&c))
            }
            (Verdict::Diverges, VerdictSource::Symbolic) => {
                self.class_exact && self.class_expr().is_some_and(|c| !bertrand::converges(&c))
            }
            _ => true,
        };
        sums_ok && class_ok
    }

    pub fn final_sum(&self) -> f64 {
        self.partial_sums.last().map_or(0.0, |p| p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symbolic {
    Zero,
    /// The term is asymptotically equivalent to the class up to constants.
    Exact(WeightExpr),
    /// The term is eventually bounded by a constant times the class.
    Dominated(WeightExpr),
    Unavailable,
}

fn composed(expr: WeightExpr, sched: &Schedule) -> Symbolic {
    match asymptotic_class(&expr, sched) {
        Ok(c) => Symbolic::Exact(c),
        Err(Error::NumericOnly(_)) if expr.superexp == 0.0 => dominated_by(expr),
        Err(_) => Symbolic::Unavailable,
    }
}

fn dominated_by(g: WeightExpr) -> Symbolic {
    if bertrand::converges(&g) {
        Symbolic::Dominated(g)
    } else {
        Symbolic::Unavailable
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

struct Partial {
    sums: Vec<(u64, f64)>,
    /// `(j, Σ_{2^j ≤ k < 2^{j+1}} term_k)` over complete dyadic blocks.
    blocks: Vec<(u32, f64)>,
    ratio_max: f64,
}

fn accumulate(first: u64, last: u64, ladder: &[u64], class: Option<&WeightExpr>, mut term: impl FnMut(u64) -> Result<f64>) -> Result<Partial> {
    let mut acc = KahanSum::new();
    let mut sums = Vec::new();
    let mut blocks = Vec::new();
    let mut rungs = ladder.iter().copied().filter(|&k| k >= first && k <= last).peekable();
    let mut block = KahanSum::new();
    let mut block_id = 63 - first.leading_zeros();
    let mut block_complete = first.is_power_of_two();
    let mut ratio_max: f64 = 0.0;
    let decade = last / 10;
    for j in first..=last {
        let id = 63 - j.leading_zeros();
        if id != block_id {
            if block_complete {
                blocks.push((block_id, block.value()));
            }
            block = KahanSum::new();
            block_id = id;
            block_complete = true;
        }
        let t = term(j)?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Precondition(alloc::format!("term {t} at index {j} is not a nonnegative real")));
        }
        acc.add(t);
        block.add(t);
        if j >= decade {
            if let Some(c) = class {
                let cv = c.value_at(j as f64);
                if cv > 0.0 && cv.is_finite() {
                    ratio_max = ratio_max.max(t / cv);
                }
            }
        }
        if rungs.peek() == Some(&j) {
            rungs.next();
            sums.push((j, acc.value()));
        }
    }
    if block_complete && (last + 1).is_power_of_two() {
        blocks.push((block_id, block.value()));
    }
    if sums.last().map(|s| s.0) != Some(last) {
        sums.push((last, acc.value()));
    }
    Ok(Partial { sums, blocks, ratio_max })
}

/// Limit of the dyadic block ratio, from the last three ratios fitted by a
/// quadratic in `1/j`. Exact for `n^a ln^b n` with `b ∈ {0, 1, 2}` up to
/// `O(j^{-2})` corrections of the block sums.
fn block_ratio_limit(blocks: &[(u32, f64)]) -> f64 {
    let tail = &blocks[blocks.len() - 4..];
    let pts: Vec<(f64, f64)> = tail.windows(2).map(|w| (1.0 / w[1].0 as f64, w[1].1 / w[0].1)).collect();
    let mut limit = 0.0;
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        let mut l = yi;
        for (k, &(xk, _)) in pts.iter().enumerate() {
            if k != i {
                l *= xk / (xk - xi);
            }
        }
        limit += l;
    }
    limit
}

fn heuristic(sums: &[(u64, f64)], blocks: &[(u32, f64)]) -> HeuristicClaim {
    let Some(&(k_last, s_last)) = sums.last() else {
        return HeuristicClaim::Inconclusive;
    };
    if s_last == 0.0 {
        return HeuristicClaim::Converges;
    }
    if let Some(&(_, s_ref)) = sums.iter().rev().find(|s| s.0.saturating_mul(100) <= k_last) {
        if s_ref > 0.0 && s_last - s_ref < CONVERGENCE_SLACK * s_ref {
            return HeuristicClaim::Converges;
        }
    }
    if blocks.len() >= 4 {
        let tail = &blocks[blocks.len() - 4..];
        if tail.iter().all(|b| b.1 > 0.0)
            && tail.windows(2).all(|w| w[1].1 / w[0].1 >= BLOCK_RATIO_FLOOR)
            && block_ratio_limit(blocks) >= BLOCK_RATIO_FLOOR
        {
            return HeuristicClaim::Diverges;
        }
    }
    HeuristicClaim::Inconclusive
}

fn evaluate(
    kind: ConditionKind,
    params: BTreeMap<String, f64>,
    range: (u64, u64),
    ladder: &[u64],
    symbolic: Symbolic,
    term: impl FnMut(u64) -> Result<f64>,
) -> Result<AdmissibilityReport> {
    let (first, last) = range;
    if last < first {
        return Err(Error::Precondition(alloc::format!("empty summation range {first}..={last}")));
    }
    let class = match &symbolic {
        Symbolic::Exact(c) | Symbolic::Dominated(c) => Some(*c),
        _ => None,
    };
    let partial = accumulate(first, last, ladder, class.as_ref(), term)?;
    let heuristic = heuristic(&partial.sums, &partial.blocks);
    let (verdict, source) = match &symbolic {
        Symbolic::Zero => (Verdict::Converges, VerdictSource::Symbolic),
        Symbolic::Exact(c) if bertrand::converges(c) => (Verdict::Converges, VerdictSource::Symbolic),
        Symbolic::Exact(_) => (Verdict::Diverges, VerdictSource::Symbolic),
        Symbolic::Dominated(c) if bertrand::converges(c) => (Verdict::Converges, VerdictSource::Symbolic),
        _ => (Verdict::Unknown, VerdictSource::NumericHeuristic),
    };
    let tail_bound = match (&symbolic, verdict) {
        (Symbolic::Zero, _) => Some(0.0),
        (Symbolic::Exact(c) | Symbolic::Dominated(c), Verdict::Converges) if partial.ratio_max > 0.0 => {
            bertrand::tail_bound(&c.scaled(partial.ratio_max * (1.0 + 1e-12)), last)
        }
        _ => None,
    };
    Ok(AdmissibilityReport {
        kind,
        params,
        verdict,
        verdict_source: source,
        heuristic,
        partial_sums: partial.sums,
        class: class.map(|c| c.exps),
        superexp: class.map_or(0.0, |c| c.superexp),
        class_scale: class.map(|c| c.scale),
        class_exact: matches!(symbolic, Symbolic::Exact(_) | Symbolic::Zero),
        zero_series: symbolic == Symbolic::Zero,
        tail_bound,
        value: None,
        meaningful_regime: None,
        range,
    })
}

fn ladder_max(ladder: &[u64]) -> Result<u64> {
    ladder.iter().copied().max().ok_or(Error::Empty("truncation ladder"))
}

/// Schedule entries and the summation window `k_first..=k_last`.
fn schedule_window(sched: &Schedule, n_start: u64, kmax: u64, need_next: bool) -> Result<(Vec<u64>, u64, u64)> {
    let entries = sched.materialize(kmax + 1)?;
    let k_first = entries
        .iter()
        .position(|&n| n >= n_start)
        .ok_or_else(|| Error::Precondition(alloc::format!("schedule never reaches the start index {n_start}")))?
        as u64
        + 1;
    let avail = entries.len() as u64 - need_next as u64;
    let k_last = avail.min(kmax);
    if k_last < k_first {
        return Err(Error::Precondition("schedule window is empty".into()));
    }
    Ok((entries, k_first, k_last))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", "must exceed 1"));
    }
    Ok(())
}

fn ratio_expr(num: &WeightSeq, den: &WeightSeq) -> Option<WeightExpr> {
    Some(num.expr()?.div(den.expr()?))
}

/// Conditions (W1) and (W2).
pub fn check_weak_admissible(
    w: &WeightSeq,
    g: &WeightSeq,
    sched: &Schedule,
    xi: &GapSeq,
    p: f64,
    ladder: &[u64],
) -> Result<(AdmissibilityReport, AdmissibilityReport)> {
    pair_reports(w, g, sched, xi, p, ladder, (ConditionKind::W1, ConditionKind::W2))
}

/// Conditions (W3) and (W4): (W1)–(W2) with the derived gaps.
pub fn check_admissible(
    w: &WeightSeq,
    g: &WeightSeq,
    sched: &Schedule,
    p: f64,
    ladder: &[u64],
) -> Result<(AdmissibilityReport, AdmissibilityReport)> {
    pair_reports(w, g, sched, &GapSeq::Derived, p, ladder, (ConditionKind::W3, ConditionKind::W4))
}

fn pair_reports(
    w: &WeightSeq,
    g: &WeightSeq,
    sched: &Schedule,
    xi: &GapSeq,
    p: f64,
    ladder: &[u64],
    kinds: (ConditionKind, ConditionKind),
) -> Result<(AdmissibilityReport, AdmissibilityReport)> {
    check_p(p)?;
    let kmax = ladder_max(ladder)?;
    let n_start = w.n0().max(g.n0());
    let need_next = matches!(xi, GapSeq::Derived | GapSeq::Increment(_));
    let (entries, k_first, k_last) = schedule_window(sched, n_start, kmax, false)?;

    let sym1 = ratio_expr(g, w).map_or(Symbolic::Unavailable, |r| composed(r.powf(p), sched));
    let first = evaluate(kinds.0, params(&[("p", p)]), (k_first, k_last), ladder, sym1, |k| {
        let n = entries[(k - 1) as usize];
        Ok(math::powf(g.value(n)? / w.value(n)?, p))
    })?;

    let k_last2 = if need_next { k_last.min(entries.len() as u64 - 1) } else { k_last };
    if k_last2 < k_first {
        return Err(Error::Precondition("schedule too short for derived gaps".into()));
    }
    let gaps = xi.values(&entries, k_last2 as usize)?;
    let sym2 = gap_symbolic(xi, w, sched, p);
    let second = evaluate(kinds.1, params(&[("p", p)]), (k_first, k_last2), ladder, sym2, |k| {
        let n = entries[(k - 1) as usize];
        Ok(math::powf(gaps[(k - 1) as usize] / w.value(n)?, p))
    })?;
    Ok((first, second))
}

fn gap_symbolic(xi: &GapSeq, w: &WeightSeq, sched: &Schedule, p: f64) -> Symbolic {
    let Some(we) = w.expr() else {
        return Symbolic::Unavailable;
    };
    match xi {
        GapSeq::Derived => match sched {
            Schedule::Power { .. } | Schedule::Superexp => match (sched.gap_class(), asymptotic_class(we, sched)) {
                (Ok(gc), Ok(wc)) => Symbolic::Exact(gc.div(&wc).powf(p)),
                _ => Symbolic::Unavailable,
            },
            // ξ_k = ⌊G(n_k)⌋ + 1 ≤ 2 G(n_k) since G ≥ 1 on the schedule.
            Schedule::Greedy { weight, .. } => dominated_by(weight.scaled(2.0).div(we).powf(p)),
            // ξ_k ≤ (q − 1) q^k + 1 ≤ q n_k.
            Schedule::Geometric { q } => dominated_by(WeightExpr::new(*q, 1.0, 0.0, 0.0).div(we).powf(p)),
            Schedule::Explicit { .. } => Symbolic::Unavailable,
        },
        GapSeq::AtSchedule(e) => composed(e.div(we).powf(p), sched),
        GapSeq::Increment(_) | GapSeq::Explicit(_) => Symbolic::Unavailable,
    }
}

/// Class of `1 − W_n/W_{n+1}` from the leading logarithmic derivative of `W`.
fn log_derivative_class(w: &WeightExpr) -> Option<Option<WeightExpr>> {
    if w.superexp != 0.0 {
        return None;
    }
    let [a, b, c] = w.exps;
    let tol = bertrand::EXPONENT_TOL;
    let lead = |coef: f64, exps: [f64; 3]| {
        if coef > 0.0 {
            Some(Some(WeightExpr { scale: coef, exps, superexp: 0.0 }))
        } else {
            None
        }
    };
    if a.abs() > tol {
        lead(a, [-1.0, 0.0, 0.0])
    } else if b.abs() > tol {
        lead(b, [-1.0, -1.0, 0.0])
    } else if c.abs() > tol {
        lead(c, [-1.0, -1.0, -1.0])
    } else {
        Some(None)
    }
}

/// Condition (T21): `Σ (G_n/W_n)(1 − W_n/W_{n+1})`.
pub fn check_t21(g: &WeightSeq, w: &WeightSeq, ladder: &[u64]) -> Result<AdmissibilityReport> {
    let sym = match (g.expr(), w.expr()) {
        (Some(ge), Some(we)) => t21_symbolic(ge, we),
        _ => Symbolic::Unavailable,
    };
    t21_with(g, w, ladder, sym, params(&[]))
}

fn t21_symbolic(ge: &WeightExpr, we: &WeightExpr) -> Symbolic {
    match log_derivative_class(we) {
        Some(Some(d)) => Symbolic::Exact(ge.div(we).mul(&d)),
        Some(None) => Symbolic::Zero,
        None => Symbolic::Unavailable,
    }
}

fn t21_with(g: &WeightSeq, w: &WeightSeq, ladder: &[u64], sym: Symbolic, params: BTreeMap<String, f64>) -> Result<AdmissibilityReport> {
    let first = g.n0().max(w.n0());
    let last = ladder_max(ladder)?;
    evaluate(ConditionKind::T21, params, (first, last), ladder, sym, |n| t21_term(g, w, n))
}

/// One term of (T21).
pub fn t21_term(g: &WeightSeq, w: &WeightSeq, n: u64) -> Result<f64> {
    let wn = w.value(n)?;
    let wn1 = w.value(n + 1)?;
    Ok(g.value(n)? / wn * ((wn1 - wn) / wn1))
}

/// Condition (T72): (T21) with `G_{n,1}` in place of `G_n`.
pub fn check_t72(g: &WeightSeq, w: &WeightSeq, ladder: &[u64]) -> Result<AdmissibilityReport> {
    let last = ladder_max(ladder)?;
    let twisted = g.twisted_seq(1.0, last + 1)?;
    let sym = match (g.expr().and_then(|e| twisted_class(e, 1.0)), w.expr()) {
        (Some(ge), Some(we)) => t21_symbolic(&ge, we),
        _ => Symbolic::Unavailable,
    };
    t21_with(&twisted, w, ladder, sym, params(&[("twisted_r", 1.0)]))
}

/// Class of `n ↦ G_{n,r}`.
pub fn twisted_class(g: &WeightExpr, r: f64) -> Option<WeightExpr> {
    if g.superexp != 0.0 || r == 0.0 {
        return None;
    }
    let [a, b, c] = g.exps;
    let tol = bertrand::EXPONENT_TOL;
    if a > tol {
        // Σ_{k<n} G_k/k ≍ G_n / a
        Some(g.scaled(1.0 / r.abs() + 1.0 / a))
    } else if a.abs() <= tol && b > -1.0 + tol {
        Some(WeightExpr { scale: g.scale / (b + 1.0), exps: [0.0, b + 1.0, c], superexp: 0.0 })
    } else {
        None
    }
}

/// Condition (T73): `Σ 1/(k^β W_k)`.
pub fn check_t73(w: &WeightSeq, beta: f64, ladder: &[u64]) -> Result<AdmissibilityReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", "must be positive"));
    }
    let sym = w.expr().map_or(Symbolic::Unavailable, |we| Symbolic::Exact(we.recip().mul(&WeightExpr::power(-beta))));
    let last = ladder_max(ladder)?;
    evaluate(ConditionKind::T73, params(&[("beta", beta)]), (w.n0(), last), ladder, sym, |k| {
        Ok(1.0 / (math::powf(k as f64, beta) * w.value(k)?))
    })
}

/// Condition (T322): `Σ |a_k − a_{k+1}| G_k/W_k`.
pub fn check_t322(a: &ModulationSeq, sched: &Schedule, g: &WeightSeq, w: &WeightSeq, ladder: &[u64]) -> Result<AdmissibilityReport> {
    let last = ladder_max(ladder)?;
    let first = g.n0().max(w.n0());
    let entries = sched.materialize(last + 1)?;
    let last = last.min(entries.len() as u64 - 1);
    let sym = match a.increment_class(sched) {
        Some(IncrementClass::Zero) => Symbolic::Zero,
        Some(IncrementClass::Class(c)) => ratio_expr(g, w).map_or(Symbolic::Unavailable, |r| Symbolic::Exact(c.mul(&r))),
        None => Symbolic::Unavailable,
    };
    evaluate(ConditionKind::T322, params(&[]), (first, last), ladder, sym, |k| {
        let i = (k - 1) as usize;
        let d = (a.value(k, entries[i]) - a.value(k + 1, entries[i + 1])).norm();
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(d * g.value(k)? / w.value(k)?)
    })
}

/// The divergence condition `Σ G_k/W_k = ∞`. The meaningful regime is divergence.
pub fn check_rrr(g: &WeightSeq, w: &WeightSeq, ladder: &[u64]) -> Result<AdmissibilityReport> {
    let sym = ratio_expr(g, w).map_or(Symbolic::Unavailable, Symbolic::Exact);
    let last = ladder_max(ladder)?;
    let mut r = evaluate(ConditionKind::Rrr, params(&[]), (g.n0().max(w.n0()), last), ladder, sym, |k| {
        Ok(g.value(k)? / w.value(k)?)
    })?;
    r.meaningful_regime = match r.verdict {
        Verdict::Diverges => Some(true),
        Verdict::Converges => Some(false),
        Verdict::Unknown => None,
    };
    Ok(r)
}

/// Condition (1RT1): `γ = Σ n_k^α / G_k²`, also reporting the truncated value.
pub fn check_1rt1(g: &WeightSeq, sched: &Schedule, alpha: f64, ladder: &[u64]) -> Result<AdmissibilityReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1)"));
    }
    let kmax = ladder_max(ladder)?;
    let entries = sched.materialize(kmax)?;
    let first = g.n0();
    let last = kmax.min(entries.len() as u64);
    let sym = match (asymptotic_class(&WeightExpr::power(alpha), sched), g.expr()) {
        (Ok(c), Some(ge)) => Symbolic::Exact(c.mul(&ge.powf(-2.0))),
        _ => Symbolic::Unavailable,
    };
    let mut r = evaluate(ConditionKind::RT1gamma, params(&[("alpha", alpha)]), (first, last), ladder, sym, |k| {
        let gk = g.value(k)?;
        Ok(math::powf(entries[(k - 1) as usize] as f64, alpha) / (gk * gk))
    })?;
    r.value = Some(r.final_sum());
    Ok(r)
}

/// Condition (E01): `Σ 1/n_k` and `Σ G_{n_k}^{-p}`.
pub fn check_e01(g: &WeightSeq, sched: &Schedule, p: f64, ladder: &[u64]) -> Result<(AdmissibilityReport, AdmissibilityReport)> {
    check_p(p)?;
    let kmax = ladder_max(ladder)?;
    let (entries, k_first, k_last) = schedule_window(sched, g.n0(), kmax, false)?;
    let a = evaluate(
        ConditionKind::E01a,
        params(&[]),
        (k_first, k_last),
        ladder,
        composed(WeightExpr::power(-1.0), sched),
        |k| Ok(1.0 / entries[(k - 1) as usize] as f64),
    )?;
    let sym = g.expr().map_or(Symbolic::Unavailable, |ge| composed(ge.powf(-p), sched));
    let b = evaluate(ConditionKind::E01b, params(&[("p", p)]), (k_first, k_last), ladder, sym, |k| {
        Ok(math::powf(g.value(entries[(k - 1) as usize])?, -p))
    })?;
    Ok((a, b))
}

/// Condition (EW3): `Σ G_k^{-pε}`.
pub fn check_ew3(g: &WeightSeq, p: f64, eps: f64, ladder: &[u64]) -> Result<AdmissibilityReport> {
    check_p(p)?;
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let sym = g.expr().map_or(Symbolic::Unavailable, |ge| Symbolic::Exact(ge.powf(-p * eps)));
    let last = ladder_max(ladder)?;
    evaluate(ConditionKind::EW3, params(&[("p", p), ("eps", eps)]), (g.n0(), last), ladder, sym, |k| {
        Ok(math::powf(g.value(k)?, -p * eps))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Turn;

    const SMALL: [u64; 3] = [100, 1_000, 10_000];

    fn ws(s: &str) -> WeightSeq {
        WeightSeq::parse(s).unwrap()
    }

    #[test]
    fn e0_weak_admissible_and_full_sum_diverges() {
        let (p, beta, gamma) = (2.0, 0.5, 1.0);
        let g = WeightSeq::from_expr(WeightExpr::new(1.0, 0.0, beta + 1.0 / p, gamma)).unwrap();
        let w = WeightSeq::from_expr(g.expr().unwrap().mul(&WeightExpr::power(1.0 / p))).unwrap();
        let xi = GapSeq::AtSchedule(WeightExpr::power(1.0 / p));
        let (w1, w2) = check_weak_admissible(&w, &g, &Schedule::Superexp, &xi, p, &STANDARD_LADDER).unwrap();
        assert_eq!(w1.verdict, Verdict::Converges);
        assert_eq!(w2.verdict, Verdict::Converges);
        assert_eq!(w1.verdict_source, VerdictSource::Symbolic);
        assert!(w1.range.1 <= 15);

        let (full, _) = check_weak_admissible(&w, &g, &Schedule::identity(), &xi, p, &STANDARD_LADDER).unwrap();
        assert_eq!(full.verdict, Verdict::Diverges);
        assert!(!full.heuristic.contradicts(full.verdict));
    }

    #[test]
    fn equal_weights_diverge() {
        let g = ws("n^0.5");
        let (w3, _) = check_admissible(&g, &g, &Schedule::power(2.0).unwrap(), 2.0, &SMALL).unwrap();
        assert_eq!(w3.verdict, Verdict::Diverges);
        assert_eq!(w3.heuristic, HeuristicClaim::Diverges);
    }

    #[test]
    fn e1_and_boundary() {
        let (p, beta) = (2.0, 0.5);
        let g = WeightSeq::from_expr(WeightExpr::power(1.0 - beta)).unwrap();
        let sched = Schedule::power(1.0 / beta).unwrap();
        let delta = 0.8 * (p - 1.0) * beta / p;
        let w = WeightSeq::from_expr(WeightExpr::power(1.0 - delta)).unwrap();
        let (w3, w4) = check_admissible(&w, &g, &sched, p, &SMALL).unwrap();
        assert!(w3.converges() && w4.converges());
        assert!(w3.is_consistent() && w4.is_consistent());

        let delta = (p - 1.0) * beta / p;
        let w = WeightSeq::from_expr(WeightExpr::power(1.0 - delta)).unwrap();
        let (_, w4) = check_admissible(&w, &g, &sched, p, &SMALL).unwrap();
        assert_eq!(w4.verdict, Verdict::Diverges);
        assert!((w4.class.unwrap()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn t21_e5_domination() {
        let (beta, delta) = (0.5, 0.2);
        let g = WeightSeq::from_expr(WeightExpr::power(1.0 - beta)).unwrap();
        let w = WeightSeq::from_expr(WeightExpr::power(1.0 - delta)).unwrap();
        let r = check_t21(&g, &w, &SMALL).unwrap();
        assert_eq!(r.verdict, Verdict::Converges);
        let bound = |k: u64| (1.0 - delta) * math::powf(k as f64, -(1.0 + beta - delta));
        assert!((bound(100) - 0.8 * 10f64.powf(-2.6)).abs() < 1e-15);
        assert!((bound(100) - 2.0095e-3).abs() < 1e-7);
        for k in g.n0()..=100_000 {
            assert!(t21_term(&g, &w, k).unwrap() <= bound(k));
        }
    }

    #[test]
    fn t73_examples() {
        assert_eq!(check_t73(&ws("n"), 1.0, &SMALL).unwrap().verdict, Verdict::Converges);
        let r = check_t73(&ws("ln(n)*lnln(n)"), 1.0, &STANDARD_LADDER).unwrap();
        assert_eq!(r.verdict, Verdict::Diverges);
        assert_eq!(r.class.unwrap(), [-1.0, -1.0, -1.0]);
        assert!(!r.heuristic.contradicts(r.verdict));
        let one = WeightSeq::with_start(WeightExpr::one(), 1).unwrap();
        assert_eq!(check_t73(&one, 0.5, &SMALL).unwrap().verdict, Verdict::Diverges);
    }

    #[test]
    fn t322_examples() {
        let g = ws("n^0.5");
        let w = ws("n");
        let id = Schedule::identity();
        let r = check_t322(&ModulationSeq::Constant { c: num_complex::Complex64::new(2.0, 1.0) }, &id, &g, &w, &SMALL).unwrap();
        assert!(r.zero_series && r.converges() && r.final_sum() == 0.0);

        let rot = ModulationSeq::Character { lambda: Turn::rational(1, 5) };
        let r = check_t322(&rot, &id, &g, &w, &SMALL).unwrap();
        let rr = check_rrr(&g, &w, &SMALL).unwrap();
        assert_eq!(r.verdict, rr.verdict);

        let r = check_t322(&ModulationSeq::PowerLaw { e: -1.0 }, &id, &g, &w, &SMALL).unwrap();
        assert_eq!(r.verdict, Verdict::Converges);
        assert_eq!(r.class.unwrap(), [-2.5, 0.0, 0.0]);
    }

    #[test]
    fn rrr_examples() {
        let (beta, delta) = (0.5, 0.2);
        let g = WeightSeq::from_expr(WeightExpr::power(1.0 - beta)).unwrap();
        let w = WeightSeq::from_expr(WeightExpr::power(1.0 - delta)).unwrap();
        assert_eq!(check_rrr(&g, &w, &SMALL).unwrap().meaningful_regime, Some(true));
        let w = WeightSeq::from_expr(g.expr().unwrap().mul(&WeightExpr::power(2.0))).unwrap();
        assert_eq!(check_rrr(&g, &w, &SMALL).unwrap().meaningful_regime, Some(false));
        assert_eq!(check_rrr(&g, &g, &SMALL).unwrap().verdict, Verdict::Diverges);
    }

    #[test]
    fn rt1_gamma() {
        let g = WeightSeq::with_start(WeightExpr::power(1.0), 1).unwrap();
        let r = check_1rt1(&g, &Schedule::identity(), 0.5, &STANDARD_LADDER).unwrap();
        assert_eq!(r.verdict, Verdict::Converges);
        let zeta = 2.612_375_348_685_488;
        let v = r.value.unwrap();
        let t = r.tail_bound.unwrap();
        assert!(v <= zeta && zeta <= v + t, "{v} {t}");

        let g = WeightSeq::with_start(WeightExpr::power(0.5), 1).unwrap();
        assert_eq!(check_1rt1(&g, &Schedule::identity(), 0.5, &SMALL).unwrap().verdict, Verdict::Diverges);

        let g = WeightSeq::with_start(WeightExpr::power(2.0), 1).unwrap();
        let r = check_1rt1(&g, &Schedule::exact_power(2).unwrap(), 0.9, &SMALL).unwrap();
        assert!((r.class.unwrap()[0] + 2.2).abs() < 1e-12);
        assert!(r.converges());
        assert!(check_1rt1(&g, &Schedule::identity(), 1.0, &SMALL).is_err());
    }

    #[test]
    fn greedy_schedule_uses_comparison() {
        let g = WeightSeq::with_start(WeightExpr::power(3.0), 1).unwrap();
        let w = WeightSeq::with_start(WeightExpr::power(3.0 * 1.25), 1).unwrap();
        let sched = Schedule::greedy(&g).unwrap();
        let (w3, w4) = check_admissible(&w, &g, &sched, 2.0, &SMALL).unwrap();
        assert!(w3.converges() && w4.converges());
        assert!(!w3.class_exact);
    }

    #[test]
    fn heuristic_rules() {
        let sums = [(100, 1.0), (10_000, 1.0005)];
        assert_eq!(heuristic(&sums, &[]), HeuristicClaim::Converges);
        let dyadic = |f: &dyn Fn(f64) -> f64| -> Vec<(u32, f64)> { (10..14).map(|j| (j, f(j as f64))).collect() };
        let flat = dyadic(&|_| 1.0);
        assert_eq!(heuristic(&[(100, 1.0), (10_000, 2.0)], &flat), HeuristicClaim::Diverges);
        let halving = dyadic(&|j| 0.5f64.powf(j));
        assert_eq!(heuristic(&[(100, 1.0), (10_000, 2.0)], &halving), HeuristicClaim::Inconclusive);
        // Σ ln² n / n keeps diverging; n^-1.2 ln² n grows blockwise up to j ≈ 14 but converges.
        let log_div = dyadic(&|j| j * j);
        assert_eq!(heuristic(&[(100, 1.0), (10_000, 2.0)], &log_div), HeuristicClaim::Diverges);
        let log_conv = dyadic(&|j| 2f64.powf(-0.2 * j) * j * j);
        assert!(log_conv.windows(2).all(|w| w[1].1 > w[0].1));
        assert_eq!(heuristic(&[(100, 1.0), (10_000, 2.0)], &log_conv), HeuristicClaim::Inconclusive);
    }
}
