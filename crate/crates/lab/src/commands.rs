//! `check`, `slln`, `hilbert`, `random` and `list-examples`. Each command is a
//! pure function of its [`RunConfig`] returning a [`Report`]; nothing touches
//! the file system until the caller writes [`Report::output`].

use serde::Serialize;
use wslln_core::admissibility::{self as adm, EXTENDED_LADDER, STANDARD_LADDER};
use wslln_core::circle;
use wslln_core::fields::{Characters, FieldSeq, Stored, Zero};
use wslln_core::math::Turn;
use wslln_core::stochastics::{self, AeDiagnostic, HilbertSetup, RandomModulation, ScalarFn};
use wslln_core::trace::TransformTrace;
use wslln_core::transforms;
use wslln_core::{
    AdmissibilityReport, Complex64, GapSeq, HeuristicClaim, ModulationSeq, SampleSpace, Schedule, Verdict, VectorField, WeightSeq,
};

use crate::config::RunConfig;
use crate::error::{config, LabError, Result};
use crate::expect::{self, ExpectCheck, Outcomes};
use crate::fft::FftEvaluator;
use crate::opspec::{MatrixSpec, OperatorSpec, SpaceSpec, TurnSpec};
use crate::output::{value_hash, RunOutput};
use crate::registry::{self, Condition, Instance};
use crate::{par, specs};

#[derive(Debug, Clone)]
pub struct Report {
    pub output: RunOutput,
    pub outcomes: Outcomes,
    pub expectations: Vec<ExpectCheck>,
    /// Human-readable summary for stdout.
    pub lines: Vec<String>,
    /// Printed to stderr.
    pub warnings: Vec<String>,
    registry: Option<Vec<(String, String)>>,
}

impl Report {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            output: RunOutput::new(cfg),
            outcomes: Outcomes::new(),
            expectations: Vec::new(),
            lines: Vec::new(),
            warnings: Vec::new(),
            registry: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.expectations.iter().any(|e| !e.ok)
    }

    fn set(&mut self, label: &str, value: impl ToString) {
        self.outcomes.insert(label.to_string(), value.to_string());
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let mut r = match cfg.command.as_str() {
        "check" => check(cfg)?,
        "slln" => slln(cfg)?,
        "hilbert" => hilbert(cfg)?,
        "random" => random(cfg)?,
        "list-examples" => list_examples(cfg)?,
        other => return Err(config(format!("unknown command `{other}`"))),
    };
    r.expectations = expect::evaluate(&cfg.expect, &r.outcomes, r.registry.as_deref())?;
    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'a str,
        outcomes: &'a Outcomes,
        expectations: &'a [ExpectCheck],
        warnings: &'a [String],
    }
    let summary = Summary { command: &cfg.command, outcomes: &r.outcomes, expectations: &r.expectations, warnings: &r.warnings };
    r.output.json("summary", "summary", &summary)?;
    Ok(r)
}

/// [`run`] inside a pool of `cfg.threads` workers, or the global pool.
pub fn run_with_threads(cfg: &RunConfig) -> Result<Report> {
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| config(format!("cannot build a pool of {t} threads: {e}")))?
            .install(|| run(cfg)),
        None => run(cfg),
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Converges => "converges",
        Verdict::Diverges => "diverges",
        Verdict::Unknown => "unknown",
    }
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

struct Resolved {
    inst: Option<Instance>,
    g: WeightSeq,
    w: WeightSeq,
    schedule: Schedule,
    xi: Option<GapSeq>,
    p: f64,
}

/// Weights from `--example`, or from `--G`/`--W`, or from `fallback`.
fn resolve(cfg: &RunConfig, fallback: Option<&str>) -> Result<Resolved> {
    let id = cfg.example.as_deref().or(if cfg.g.is_none() && cfg.w.is_none() { fallback } else { None });
    if let Some(id) = id {
        let inst = registry::instantiate(id, cfg)?;
        return Ok(Resolved {
            g: inst.g.clone(),
            w: inst.w.clone(),
            schedule: inst.schedule.clone(),
            xi: inst.xi.clone(),
            p: inst.params.p,
            inst: Some(inst),
        });
    }
    let g_text = cfg.g.as_deref().ok_or_else(|| config("give `--example` or both `--G` and `--W`"))?;
    let w_text = cfg.w.as_deref().ok_or_else(|| config("give `--example` or both `--G` and `--W`"))?;
    let (g, w) = specs::weight_pair(g_text, w_text)?;
    let schedule = cfg.schedule.as_deref().map(|s| specs::schedule(s, &g)).transpose()?.unwrap_or_else(Schedule::identity);
    let xi = cfg.xi.as_deref().map(|s| specs::xi(s, &g)).transpose()?;
    Ok(Resolved { g, w, schedule, xi, p: cfg.p.unwrap_or(2.0), inst: None })
}

fn ladder_or(cfg: &RunConfig, default: Vec<u64>) -> Result<Vec<u64>> {
    let l = cfg.ladder.clone().unwrap_or(default);
    specs::validate_ladder(&l)?;
    Ok(l)
}

fn pow2_upto(lo: u32, n: u64) -> Vec<u64> {
    specs::pow2_ladder(lo, 63 - n.max(1).leading_zeros())
}

/// The same weight started at `n = 1`.
fn from_one(g: &WeightSeq) -> Result<WeightSeq> {
    if g.n0() == 1 {
        return Ok(g.clone());
    }
    match g.expr() {
        Some(e) => Ok(WeightSeq::with_start(*e, 1)?),
        None => Err(LabError::Precondition(format!("weight `{}` must start at n = 1", g.name()))),
    }
}

fn short(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{r}")
}

/// Compact weight name for summaries: `n^0.8 ln^1`.
pub fn pretty(w: &WeightSeq) -> String {
    let Some(e) = w.expr() else { return w.name() };
    let mut parts = Vec::new();
    if e.scale != 1.0 {
        parts.push(short(e.scale));
    }
    for (exp, base) in e.exps.iter().zip(["n", "ln n", "lnln n"]) {
        if *exp != 0.0 {
            parts.push(match (*exp == 1.0, base == "n") {
                (true, _) => base.to_string(),
                (false, true) => format!("n^{}", short(*exp)),
                (false, false) => format!("({base})^{}", short(*exp)),
            });
        }
    }
    if e.superexp != 0.0 {
        parts.push(format!("k^({}k)", short(e.superexp)));
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

fn consistent(r: &AdmissibilityReport) -> bool {
    r.is_consistent() && !r.heuristic.contradicts(r.verdict)
}

// ---------------------------------------------------------------- check

fn check(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, None)?;
    let ladder = ladder_or(cfg, if cfg.extended { EXTENDED_LADDER.to_vec() } else { STANDARD_LADDER.to_vec() })?;
    let (g, w, p) = (&res.g, &res.w, res.p);
    let mut conds: Vec<Condition> = if !cfg.conditions.is_empty() {
        cfg.conditions.iter().flat_map(|c| c.split(',')).filter(|c| !c.trim().is_empty()).map(Condition::parse).collect::<Result<_>>()?
    } else if let Some(inst) = &res.inst {
        inst.conditions.clone()
    } else if res.xi.is_some() {
        vec![Condition::Weak]
    } else {
        vec![Condition::Admissible]
    };
    if cfg.full_sequence && !conds.iter().any(|c| matches!(c, Condition::Full)) {
        conds.push(Condition::Full);
    }
    let params = res.inst.as_ref().map(|i| i.params);
    let eps = params.map_or(cfg.eps.unwrap_or(0.5), |p| p.eps);

    let mut reports: Vec<(String, AdmissibilityReport)> = Vec::new();
    for c in &conds {
        match c {
            Condition::Weak => {
                let xi = res.xi.clone().unwrap_or(GapSeq::Derived);
                let (a, b) = adm::check_weak_admissible(w, g, &res.schedule, &xi, p, &ladder)?;
                reports.extend([("W1".into(), a), ("W2".into(), b)]);
            }
            Condition::Admissible => {
                let (a, b) = adm::check_admissible(w, g, &res.schedule, p, &ladder)?;
                reports.extend([("W3".into(), a), ("W4".into(), b)]);
            }
            Condition::Full => {
                let (a, _) = adm::check_admissible(w, g, &Schedule::identity(), p, &ladder)?;
                reports.push(("W1-full".into(), a));
            }
            Condition::T21 => reports.push(("T21".into(), adm::check_t21(g, w, &ladder)?)),
            Condition::T72 => reports.push(("T72".into(), adm::check_t72(g, w, &ladder)?)),
            Condition::T73 => {
                let beta = cfg.beta.ok_or_else(|| config("condition t73 needs `--beta`"))?;
                reports.push(("T73".into(), adm::check_t73(w, beta, &ladder)?));
            }
            Condition::T322 => {
                let text = cfg.modulation.as_deref().ok_or_else(|| config("condition t322 needs `--modulation`"))?;
                let a = specs::modulation(text, cfg.seed)?;
                reports.push(("T322".into(), adm::check_t322(&a, &res.schedule, g, w, &ladder)?));
            }
            Condition::Rrr => reports.push(("RRR".into(), adm::check_rrr(g, w, &ladder)?)),
            Condition::E01 => {
                let (a, b) = adm::check_e01(g, &res.schedule, p, &ladder)?;
                reports.extend([("E01a".into(), a), ("E01b".into(), b)]);
            }
            Condition::Ew3 => reports.push(("EW3".into(), adm::check_ew3(g, p, eps, &ladder)?)),
            Condition::Rt1 => {
                let alpha = cfg.alpha.unwrap_or(0.5);
                reports.push(("RT1gamma".into(), adm::check_1rt1(g, &res.schedule, alpha, &ladder)?));
            }
            Condition::T21With { label, w: w2 } => reports.push((label.clone(), adm::check_t21(g, w2, &ladder)?)),
        }
    }

    let mut r = Report::new(cfg);
    let mut all_consistent = true;
    for (label, rep) in &reports {
        r.set(label, verdict_str(rep.verdict));
        if !consistent(rep) {
            all_consistent = false;
            r.warnings.push(format!("{label}: numeric diagnostics contradict the {} verdict", verdict_str(rep.verdict)));
        }
        let class = rep.class.map_or("-".to_string(), |c| format!("n^{} ln^{} lnln^{}", short(c[0]), short(c[1]), short(c[2])));
        r.lines.push(format!(
            "{label:<10} {:<10} source={:<17} heuristic={:<12} class={class}",
            verdict_str(rep.verdict),
            kebab(&rep.verdict_source),
            kebab(&rep.heuristic)
        ));
        r.output.json(&format!("check_{label}"), "admissibility-report", rep)?;
    }
    for (x, y, label) in [("W3", "W4", "admissible"), ("W1", "W2", "weak-admissible")] {
        let both = match (r.outcomes.get(x), r.outcomes.get(y)) {
            (Some(a), Some(b)) => Some(a == "converges" && b == "converges"),
            _ => None,
        };
        if let Some(v) = both {
            r.set(label, v);
        }
    }
    r.set("numeric-consistent", all_consistent);

    #[derive(Serialize)]
    struct CheckSummary {
        example: Option<String>,
        params: Option<std::collections::BTreeMap<String, f64>>,
        p: f64,
        g: String,
        w: String,
        schedule: Schedule,
        ladder: Vec<u64>,
        conditions: Vec<String>,
    }
    let summary = CheckSummary {
        example: res.inst.as_ref().map(|i| i.id.clone()),
        params: params.map(|p| p.to_map()),
        p,
        g: pretty(g),
        w: pretty(w),
        schedule: res.schedule.clone(),
        ladder,
        conditions: reports.iter().map(|(l, _)| l.clone()).collect(),
    };
    r.output.json("check", "check-summary", &summary)?;
    r.registry = res.inst.map(|i| i.expected);
    Ok(r)
}

// ---------------------------------------------------------------- slln

/// `term_n` of (T21) against `c·n^{−(5+ε)/4}` for `n ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EwaBound {
    pub eps: f64,
    pub n_max: u64,
    pub literal_constant: f64,
    pub literal_worst_ratio: f64,
    pub literal_worst_at: u64,
    pub literal_holds: bool,
    /// `(5+ε)/(4√2)`, the limit of `term_n · n^{(5+ε)/4}`.
    pub sharp_constant: f64,
    pub sharp_worst_ratio: f64,
    pub sharp_holds: bool,
}

pub fn ewa_bound(g: &WeightSeq, w: &WeightSeq, eps: f64, n_max: u64) -> Result<EwaBound> {
    let literal = (1.0 + eps) / 4.0;
    let sharp = (5.0 + eps) / (4.0 * std::f64::consts::SQRT_2);
    let (mut worst, mut at, mut worst_sharp) = (0.0f64, 0u64, 0.0f64);
    for n in g.n0().max(w.n0())..=n_max {
        let decay = (n as f64).powf(-(5.0 + eps) / 4.0);
        let term = adm::t21_term(g, w, n)?;
        let ratio = term / (literal * decay);
        if ratio > worst {
            worst = ratio;
            at = n;
        }
        worst_sharp = worst_sharp.max(term / (sharp * decay));
    }
    Ok(EwaBound {
        eps,
        n_max,
        literal_constant: literal,
        literal_worst_ratio: worst,
        literal_worst_at: at,
        literal_holds: worst <= 1.0,
        sharp_constant: sharp,
        sharp_worst_ratio: worst_sharp,
        sharp_holds: worst_sharp <= 1.0,
    })
}

fn field_seq(kind: &str, space: SampleSpace, dim: usize, count: u64, seed: u64) -> Result<Box<dyn FieldSeq + Send + Sync>> {
    Ok(match kind {
        "characters" => Box::new(Characters::sqrt_k(space, dim)?),
        "unit-characters" => Box::new(Characters::new(space, dim, 0.0)?),
        "random" => Box::new(Stored::random(space, dim, count as usize, seed)?),
        "zero" => Box::new(Zero { space, dim }),
        other => return Err(config(format!("unknown field `{other}`; use characters, unit-characters, random or zero"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCheck {
    pub grid: usize,
    pub n_max: u64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_n |‖S_n‖₂/G_n − 1|`.
    pub max_deviation: f64,
}

fn slln(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, None)?;
    let (g, w, p) = (&res.g, &res.w, res.p);
    let n_max = cfg.n_max.unwrap_or(8192);
    let ladder = ladder_or(cfg, pow2_upto(6, n_max))?;
    if *ladder.last().unwrap() > n_max {
        return Err(config(format!("ladder exceeds n-max = {n_max}")));
    }
    if ladder[0] < w.n0() {
        return Err(config(format!("ladder starts below the start index {} of W", w.n0())));
    }
    let dim = cfg.dim.unwrap_or(1);
    let points = cfg.points.unwrap_or(256);
    let kind = cfg.field.as_deref().unwrap_or("characters");
    let random = kind == "random";
    let (trace_space, norm_space) = if random {
        let s = SampleSpace::Finite { m: points };
        (s.clone(), s)
    } else {
        let m = cfg.grid.unwrap_or((n_max as usize + 1).next_power_of_two());
        (SampleSpace::CircleMc { count: points, seed: cfg.seed }, SampleSpace::CircleGrid { points: m })
    };

    let fseq = field_seq(kind, trace_space, dim, n_max, cfg.seed)?;
    let mut trace = TransformTrace::new(p);
    let mut s = VectorField::zeros(fseq.space().clone(), dim);
    let mut q = s.clone();
    let mut snaps = Vec::with_capacity(ladder.len());
    let mut next = ladder.iter().peekable();
    let one = Complex64::new(1.0, 0.0);
    for k in 1..=n_max {
        if !fseq.is_zero() {
            fseq.add_to(k, one, &mut s)?;
            if k >= w.n0() {
                fseq.add_to(k, Complex64::new(1.0 / w.value(k)?, 0.0), &mut q)?;
            }
        }
        if next.peek() == Some(&&k) {
            next.next();
            trace.record(k, Some(&s.scaled(Complex64::new(1.0 / w.value(k)?, 0.0))), Some(&q), None)?;
            snaps.push(q.clone());
        }
    }
    let diag = stochastics::ae_convergence_diag(&stochastics::field_gaps(&snaps), &ladder)?;

    let norm_fseq = if random { fseq } else { field_seq(kind, norm_space.clone(), dim, n_max, cfg.seed)? };
    let norms = par::partial_sum_norms(norm_fseq.as_ref(), n_max)?;
    let (mut lo, mut hi, mut dev) = (f64::INFINITY, 0.0f64, 0.0f64);
    for n in g.n0()..=n_max {
        let ratio = norms[n as usize - 1] / g.value(n)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        dev = dev.max((ratio - 1.0).abs());
    }
    let norm_check = NormCheck { grid: norm_space.len(), n_max, min_ratio: lo, max_ratio: hi, max_deviation: dev };

    let std_ladder = ladder_or(&RunConfig::default(), STANDARD_LADDER.to_vec())?;
    let t21 = adm::check_t21(g, w, &std_ladder)?;
    let rrr = adm::check_rrr(g, w, &std_ladder)?;
    let meaningful = rrr.meaningful_regime.unwrap_or(rrr.heuristic == HeuristicClaim::Diverges);
    let ewa = match &res.inst {
        Some(i) if i.id == "EwA" => Some(ewa_bound(g, w, i.params.eps, 10_000)?),
        _ => None,
    };

    let mut r = Report::new(cfg);
    r.set("ae", kebab(&diag.verdict));
    r.set("meaningful-regime", meaningful);
    r.set("T21", verdict_str(t21.verdict));
    r.set("RRR", verdict_str(rrr.verdict));
    r.set("normalized-norm-unit", dev <= 1e-10);
    if let Some(b) = &ewa {
        r.set("ewa-literal-bound", b.literal_holds);
        r.set("ewa-sharp-bound", b.sharp_holds);
        if !b.literal_holds {
            r.warnings.push(format!(
                "the literal EwA per-term bound ((1+eps)/4) n^-(5+eps)/4 fails: worst ratio {:.4} at n = {}; the sharp constant {:.4} {}",
                b.literal_worst_ratio,
                b.literal_worst_at,
                b.sharp_constant,
                if b.sharp_holds { "holds" } else { "fails too" }
            ));
        }
    }
    if !meaningful {
        r.warnings.push("Σ G_k/W_k converges: the averages tend to zero trivially (meaningful regime off)".into());
    }
    r.lines.push(format!("weights      G = {}, W = {}", pretty(g), pretty(w)));
    r.lines.push(format!("‖S_n‖/G_n    in [{lo:.12}, {hi:.12}] for n ≤ {n_max}"));
    r.lines.push(format!("ae           {} (slope {:?})", kebab(&diag.verdict), diag.slope));
    r.lines.push(format!("T21          {}; meaningful regime {}", verdict_str(t21.verdict), meaningful));

    r.output.csv("slln_trace", &[("meaningful_regime", meaningful.to_string()), ("field", kind.to_string())], &trace.to_csv());
    #[derive(Serialize)]
    struct SllnSummary<'a> {
        example: Option<&'a str>,
        g: String,
        w: String,
        field: &'a str,
        meaningful_regime: bool,
        normalized_norm: &'a NormCheck,
        ewa_bound: Option<&'a EwaBound>,
    }
    let summary = SllnSummary {
        example: res.inst.as_ref().map(|i| i.id.as_str()),
        g: pretty(g),
        w: pretty(w),
        field: kind,
        meaningful_regime: meaningful,
        normalized_norm: &norm_check,
        ewa_bound: ewa.as_ref(),
    };
    r.output.json("slln", "slln-summary", &summary)?;
    r.output.json("ae_diagnostic", "ae-diagnostic", &diag)?;
    r.output.json("slln_T21", "admissibility-report", &t21)?;
    r.output.json("slln_RRR", "admissibility-report", &rrr)?;
    Ok(r)
}

// ---------------------------------------------------------------- hilbert

fn entries_for(cfg: &RunConfig, g: &WeightSeq, n: u64) -> Result<(Schedule, Vec<u64>)> {
    let sched = cfg.schedule.as_deref().map(|s| specs::schedule(s, g)).transpose()?.unwrap_or_else(Schedule::identity);
    let entries = sched.materialize(n)?;
    if (entries.len() as u64) < n {
        return Err(config(format!("the schedule has only {} entries below its cap; n-max is {n}", entries.len())));
    }
    Ok((sched, entries))
}

fn operator_or(cfg: &RunConfig, default: OperatorSpec) -> OperatorSpec {
    cfg.operator.clone().unwrap_or(default)
}

/// `K` measured over `n ≤ N` on `m` grid points.
fn measure(cfg: &RunConfig, terms: &[(u64, Complex64)], g: &WeightSeq, m: usize) -> Result<circle::KMeasure> {
    let gv: Vec<f64> = (1..=terms.len() as u64).map(|k| g.value(k)).collect::<Result<_, _>>()?;
    Ok(circle::measure_k(terms, &gv, m, cfg.allow_coarse)?)
}

fn hilbert(cfg: &RunConfig) -> Result<Report> {
    match cfg.check.as_deref().unwrap_or("trace") {
        "trace" => hilbert_trace(cfg),
        "t41" => hilbert_t41(cfg),
        "t44" => hilbert_t44(cfg),
        "opnorm" => hilbert_opnorm(cfg),
        other => Err(config(format!("unknown hilbert check `{other}`; use trace, t41, t44 or opnorm"))),
    }
}

fn hilbert_trace(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, Some("E5"))?;
    let n_max = cfg.n_max.unwrap_or(4096);
    let ladder = ladder_or(cfg, pow2_upto(6, n_max))?;
    let n_max = n_max.max(*ladder.last().unwrap());
    let (_, entries) = entries_for(cfg, &res.g, n_max)?;
    let a = specs::modulation(cfg.modulation.as_deref().unwrap_or("ones"), cfg.seed)?;
    let spec = operator_or(
        cfg,
        OperatorSpec::Rotation { theta: TurnSpec::Rational([1, 8]), space: SpaceSpec::Circle { points: 1024 }, dim: 1 },
    );
    let mut op = spec.build()?.op;
    op.prepare(*entries.iter().max().unwrap_or(&1));
    let f = match cfg.field.as_deref().unwrap_or("coboundary") {
        "coboundary" => {
            let h = VectorField::random(op.space.clone(), op.dim, cfg.seed);
            h.sub(&op.apply(&h)?)
        }
        "random" => VectorField::random(op.space.clone(), op.dim, cfg.seed),
        "zero" => VectorField::zeros(op.space.clone(), op.dim),
        other => return Err(config(format!("unknown hilbert field `{other}`; use coboundary, random or zero"))),
    };
    let mut trace = TransformTrace::new(res.p);
    transforms::damped_series(&a, &op, &entries, &res.w, 0.0, &f, n_max, Some((&mut trace, &ladder)))?;
    let sums: Vec<VectorField> =
        ladder.iter().map(|&n| transforms::hilbert_partial(&a, &op, &entries, &res.w, &f, n)).collect::<Result<_, _>>()?;
    let diag: AeDiagnostic = stochastics::ae_convergence_diag(&stochastics::field_gaps(&sums), &ladder)?;

    let m = par::grid_for(entries[n_max as usize - 1], cfg.grid);
    let fft = FftEvaluator;
    for row in trace.rows.iter_mut() {
        let terms = circle::poly_terms(&a, &entries[..row.n as usize]);
        row.sup_circle = Some(circle::sup_circle(&fft, &terms, m, cfg.allow_coarse)?.lower_bound);
    }

    let mut r = Report::new(cfg);
    r.set("ae", kebab(&diag.verdict));
    r.set("zero", a.is_zero() || f.is_zero());
    r.lines.push(format!("Σ a_k T^(n_k) f / W_k, W = {}, n ≤ {n_max}", pretty(&res.w)));
    r.lines.push(format!("ae           {} (slope {:?})", kebab(&diag.verdict), diag.slope));
    r.output.csv("hilbert_trace", &[("operator", kebab_kind(&spec))], &trace.to_csv());
    r.output.json("ae_diagnostic", "ae-diagnostic", &diag)?;
    Ok(r)
}

fn kebab_kind(spec: &OperatorSpec) -> String {
    serde_json::to_value(spec).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default()
}

fn hilbert_t41(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, Some("E5"))?;
    let g = from_one(&res.g)?;
    let n = cfg.n_max.unwrap_or(512);
    let (_, entries) = entries_for(cfg, &g, n)?;
    let a = specs::modulation(cfg.modulation.as_deref().unwrap_or("ones"), cfg.seed)?;
    let terms = circle::poly_terms(&a, &entries[..n as usize]);
    let m = par::grid_for(entries[n as usize - 1], cfg.grid);
    let count = cfg.lambdas.unwrap_or(256);
    if count == 0 || m % count != 0 {
        return Err(config(format!("{count} λ-points do not divide the {m}-point grid")));
    }
    let km = measure(cfg, &terms, &g, m)?;
    let rs = cfg.r.map_or(vec![0.5, 1.0, 2.0], |r| vec![r]);
    let lambdas: Vec<Turn> = (0..count as u64).map(|j| Turn::rational(j, count as u64)).collect();
    let rep = transforms::twisted_bound_check(&terms, &g, km.k, &rs, &lambdas, 1e-6)?;

    let mut r = Report::new(cfg);
    r.set("bound-holds", rep.holds);
    r.lines.push(format!("K = {:.6} (n = {}, grid {m}); worst ratio {:.6} at {:?}", km.k, km.at_n, rep.worst_ratio, rep.worst_at));
    r.output.json("hilbert_t41", "twisted-bound-report", &rep)?;
    r.output.json("k_measure", "k-measure", &km)?;
    Ok(r)
}

fn hilbert_t44(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, Some("E5"))?;
    let g = from_one(&res.g)?;
    let n = cfg.n_max.unwrap_or(256);
    let p = cfg.p.unwrap_or(1.5);
    let (_, entries) = entries_for(cfg, &g, n)?;
    let a = specs::modulation(cfg.modulation.as_deref().unwrap_or("ones"), cfg.seed)?;
    let spec = operator_or(cfg, OperatorSpec::Markov { matrix: None, m: Some(8), seed: Some(cfg.seed), dim: 1 });
    let mut op = spec.build()?.op;
    op.prepare(*entries.iter().max().unwrap_or(&1));
    let terms = circle::poly_terms(&a, &entries[..n as usize]);
    let m = par::grid_for(entries[n as usize - 1], cfg.grid);
    let km = measure(cfg, &terms, &g, m)?;
    let gv: Vec<f64> = (1..=n).map(|k| g.value(k)).collect::<Result<_, _>>()?;
    let fields: Vec<VectorField> =
        (0..cfg.fields.unwrap_or(20) as u64).map(|i| VectorField::random(op.space.clone(), op.dim, cfg.seed.wrapping_add(i))).collect();
    let rep = transforms::interpolation_bound_check(&terms, &op, &gv, km.k, p, &fields, 1e-8)?;
    let a_sup = a.sup_norm(&entries[..n as usize]);
    let gn = gv[n as usize - 1];
    let endpoints = (
        transforms::interpolation_bound(n, a_sup, km.k, gn, 2.0) == km.k * gn,
        transforms::interpolation_bound(n, a_sup, km.k, gn, 1.0) == n as f64 * a_sup,
    );

    let mut r = Report::new(cfg);
    r.set("bound-holds", rep.holds);
    r.set("endpoints-exact", endpoints.0 && endpoints.1);
    r.lines.push(format!("p = {p}, K = {:.6}; worst ratio {:.6} at {:?}", km.k, rep.worst_ratio, rep.worst_at));
    r.output.json("hilbert_t44", "interpolation-report", &rep)?;
    r.output.json("k_measure", "k-measure", &km)?;
    Ok(r)
}

fn hilbert_opnorm(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, Some("E5"))?;
    let g = from_one(&res.g)?;
    let ladder = ladder_or(cfg, specs::pow2_ladder(5, 12))?;
    let n = *ladder.last().unwrap();
    let (_, entries) = entries_for(cfg, &g, n)?;
    let a = specs::modulation(cfg.modulation.as_deref().unwrap_or("power:-0.5"), cfg.seed)?;
    let spec = operator_or(
        cfg,
        OperatorSpec::Matrix { matrix: MatrixSpec::Spectral { seed: cfg.seed, dim: cfg.dim.unwrap_or(6) }, space: SpaceSpec::Finite { m: 1 } },
    );
    let mat = spec.build()?.matrix.ok_or_else(|| config("the opnorm check needs a matrix or markov operator"))?;
    let terms = circle::poly_terms(&a, &entries[..n as usize]);
    let m = par::grid_for(entries[n as usize - 1], cfg.grid);
    let km = measure(cfg, &terms, &g, m)?;
    let rep = transforms::opnorm_series(&a, &mat, &entries, &g, &res.w, &ladder, km.k, 1e-9)?;

    let mut r = Report::new(cfg);
    r.set("monotone", rep.monotone);
    r.set("bounded", rep.bounded);
    r.set("bound-holds", rep.monotone && rep.bounded);
    r.lines.push(format!("K = {:.6}; {:>6} {:>6} {:>12} {:>12}", km.k, "j", "n", "gap", "bound"));
    for pr in &rep.pairs {
        r.lines.push(format!("{:>19} {:>6} {:>12.4e} {:>12.4e}", pr.j, pr.n, pr.gap, pr.bound));
    }
    let mut csv = String::from("j,n,gap,bound\n");
    for pr in &rep.pairs {
        csv.push_str(&format!("{},{},{:e},{:e}\n", pr.j, pr.n, pr.gap, pr.bound));
    }
    r.output.csv("opnorm_table", &[], &csv);
    r.output.json("hilbert_opnorm", "opnorm-report", &rep)?;
    r.output.json("k_measure", "k-measure", &km)?;
    Ok(r)
}

// ---------------------------------------------------------------- random

const NOT_REGIME: &str = "NOT IN THE THEOREM REGIME: preconditions fail; results carry no theorem label";

fn gate(cfg: &RunConfig, r: &mut Report, passes: bool, what: &str) -> Result<()> {
    if !passes {
        if !cfg.no_regime_check {
            return Err(LabError::Precondition(format!("{what} fails; rerun with --no-regime-check to compute anyway")));
        }
        r.warnings.push(format!("{NOT_REGIME} ({what})"));
    }
    r.set("theorem-regime", passes);
    Ok(())
}

fn random(cfg: &RunConfig) -> Result<Report> {
    match cfg.check.as_deref().unwrap_or("sup") {
        "sup" => random_sup(cfg),
        "hilbert" => random_hilbert(cfg),
        other => Err(config(format!("unknown random statistic `{other}`; use sup or hilbert"))),
    }
}

fn random_sup(cfg: &RunConfig) -> Result<Report> {
    let law = specs::law(cfg.law.as_deref().unwrap_or("rademacher"))?;
    let rm = RandomModulation::new(law, cfg.seed);
    let g = WeightSeq::parse(cfg.g.as_deref().unwrap_or("n"))?;
    let g = from_one(&g).unwrap_or(g);
    let n_max = cfg.n_max.unwrap_or(4096);
    let ladder = ladder_or(cfg, pow2_upto(6, n_max))?;
    let n_max = *ladder.last().unwrap();
    let (sched, entries) = entries_for(cfg, &g, n_max)?;
    let alpha = cfg.alpha.unwrap_or(0.5);
    let regime = adm::check_1rt1(&g, &sched, alpha, &STANDARD_LADDER)?;
    let mut r = Report::new(cfg);
    gate(cfg, &mut r, regime.converges(), "condition (1RT1)")?;

    let m = par::grid_for(entries[n_max as usize - 1], cfg.grid);
    let (mut est, samples) = par::sup_stat(&rm, &g, &entries, &ladder, m, cfg.samples.unwrap_or(64), cfg.allow_coarse)?;
    est.theorem_regime = regime.converges();
    est.report_hashes = vec![value_hash(&regime)?];
    est.config_hash = Some(r.output.hash.clone());
    let q = &est.ladder_q95;
    let stable = match q.len() {
        0 | 1 => true,
        l => q[l - 2] == q[l - 1] || (q[l - 1] - q[l - 2]).abs() < 0.1 * q[l - 2].abs(),
    };
    r.set("q95-stable", stable);

    let mut csv = String::from("n,q95_running_sup,q95_series_sup\n");
    for (i, n) in ladder.iter().enumerate() {
        let mut col: Vec<f64> = samples.iter().map(|s| s.series_sup[i]).collect();
        col.sort_by(f64::total_cmp);
        csv.push_str(&format!("{n},{:e},{:e}\n", q[i], stochastics::quantile(&col, 0.95)));
    }
    r.lines.push(format!("sup statistic over {} samples: mean {:.6}, max {:.6}; q95 by ladder {:?}", est.samples, est.mean, est.max, q));
    r.output.csv("random_sup", &[("theorem_regime", est.theorem_regime.to_string())], &csv);
    r.output.json("random_sup", "mc-estimate", &est)?;
    r.output.json("regime_RT1gamma", "admissibility-report", &regime)?;
    Ok(r)
}

fn scalar_fn(text: &str) -> Result<ScalarFn> {
    match text.split_once(':') {
        None if text.trim() == "one" => Ok(ScalarFn::One),
        Some(("character", m)) => Ok(ScalarFn::Character { m: m.trim().parse().map_err(|_| config(format!("bad character index `{m}`")))? }),
        _ => Err(config(format!("unknown h `{text}`; use one or character:M"))),
    }
}

fn random_hilbert(cfg: &RunConfig) -> Result<Report> {
    let res = resolve(cfg, Some("E5"))?;
    let (admissible, t21) = {
        let (a, b) = adm::check_admissible(&res.w, &res.g, &res.schedule, 2.0, &STANDARD_LADDER)?;
        (vec![a, b], adm::check_t21(&res.g, &res.w, &STANDARD_LADDER)?)
    };
    let passes = admissible.iter().all(|r| r.converges()) && t21.converges();
    let mut r = Report::new(cfg);
    gate(cfg, &mut r, passes, "W ∈ W_2(G) with (T21)")?;

    let spec = operator_or(
        cfg,
        OperatorSpec::Skew {
            base: crate::opspec::BaseSpec::Rotation { theta: TurnSpec::Rational([1, 8]) },
            fibers: crate::opspec::FibersSpec::RandomPerAtom { seed: cfg.seed, dim: 2, norm: 0.95 },
            space: SpaceSpec::Circle { points: 64 },
        },
    );
    let cocycle = spec.cocycle()?;
    let space_len = cocycle.space.len();
    let d = cocycle.dim();
    let ladder = ladder_or(cfg, specs::pow2_ladder(6, 13))?;
    let n_max = *ladder.last().unwrap();
    let entries = Schedule::identity().materialize(n_max)?;
    let h = scalar_fn(cfg.h.as_deref().unwrap_or("one"))?;
    let mut gvec = vec![Complex64::new(0.0, 0.0); d];
    gvec[0] = Complex64::new(1.0, 0.0);
    let a = match (&cfg.law, &cfg.modulation) {
        (Some(l), _) => ModulationSeq::Random { law: RandomModulation::new(specs::law(l)?, cfg.seed), sample: 0 },
        (None, Some(m)) => specs::modulation(m, cfg.seed)?,
        (None, None) => specs::modulation("rademacher", cfg.seed)?,
    };
    let is_random = matches!(a, ModulationSeq::Random { .. });
    let samples = cfg.samples.unwrap_or(if is_random { 64 } else { 1 });
    let points = cfg.points.unwrap_or(space_len.min(256));
    if cocycle.space.is_indexed() && points > space_len {
        return Err(config(format!("{points} points requested from a space of {space_len}")));
    }
    let setup = HilbertSetup { cocycle, h, g: gvec, entries, w: res.w.clone(), ladder: ladder.clone() };
    let (mut est, traces) = par::random_hilbert(&setup, &a, samples, points, cfg.seed)?;
    est.theorem_regime = passes;
    est.report_hashes = admissible.iter().chain(std::iter::once(&t21)).map(value_hash).collect::<Result<_>>()?;
    est.config_hash = Some(r.output.hash.clone());
    let diag = est.diagnostic.clone().expect("hilbert estimates carry a diagnostic");
    r.set("ae", kebab(&diag.verdict));

    let mut csv = String::from("n,max_gap\n");
    for (n, gap) in ladder[1..].iter().zip(&diag.gaps) {
        csv.push_str(&format!("{n},{gap:e}\n"));
    }
    r.lines.push(format!(
        "L2(mu) norm of the maximal function over {} samples x {} points: mean {:.6}, max {:.6}; ae {}",
        est.samples,
        traces.len(),
        est.mean,
        est.max,
        kebab(&diag.verdict)
    ));
    r.output.csv("random_hilbert_gaps", &[("theorem_regime", passes.to_string())], &csv);
    r.output.json("random_hilbert", "mc-estimate", &est)?;
    for (label, rep) in [("W3", &admissible[0]), ("W4", &admissible[1]), ("T21", &t21)] {
        r.output.json(&format!("regime_{label}"), "admissibility-report", rep)?;
    }
    Ok(r)
}

// ---------------------------------------------------------------- list-examples

fn list_examples(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new(cfg);
    r.lines = registry::listing()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: &str) -> RunConfig {
        RunConfig::new(command)
    }

    #[test]
    fn check_e1_is_admissible_and_equal_weights_are_not() {
        let mut c = cfg("check");
        c.example = Some("E1".into());
        c.expect = vec!["admissible".into(), "registry".into()];
        let r = run(&c).unwrap();
        assert!(!r.failed(), "{:?}", r.expectations);

        let mut c = cfg("check");
        c.g = Some("n".into());
        c.w = Some("n".into());
        c.expect = vec!["admissible".into()];
        assert!(run(&c).unwrap().failed());
    }

    #[test]
    fn e0_full_sequence_diverges() {
        let mut c = cfg("check");
        c.example = Some("E0".into());
        c.full_sequence = true;
        let r = run(&c).unwrap();
        assert_eq!(r.outcomes["W1-full"], "diverges");
        assert_eq!(r.outcomes["weak-admissible"], "true");
    }

    #[test]
    fn rrr_degenerate_regime_is_flagged() {
        let mut c = cfg("slln");
        c.g = Some("n^0.5".into());
        c.w = Some("n^2*<G>".into());
        c.n_max = Some(256);
        c.points = Some(16);
        c.expect = vec!["not-meaningful".into()];
        let r = run(&c).unwrap();
        assert!(!r.failed());
        assert!(r.output.files["slln_trace.csv"].lines().next().unwrap().contains("meaningful_regime=false"));
    }

    #[test]
    fn zero_fields_and_modulations_give_zero_outputs() {
        let mut c = cfg("slln");
        c.example = Some("E5".into());
        c.field = Some("zero".into());
        c.n_max = Some(256);
        let r = run(&c).unwrap();
        let csv = &r.output.files["slln_trace.csv"];
        for line in csv.lines().skip(2) {
            assert!(line.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{line}");
        }
        let mut c = cfg("hilbert");
        c.modulation = Some("zero".into());
        c.n_max = Some(256);
        let r = run(&c).unwrap();
        assert_eq!(r.outcomes["zero"], "true");
        assert_eq!(r.outcomes["ae"], "consistent-with-convergence");
    }

    #[test]
    fn random_refuses_outside_the_regime() {
        let mut c = cfg("random");
        c.g = Some("n^0.5".into());
        c.n_max = Some(128);
        c.samples = Some(4);
        assert!(matches!(run(&c), Err(LabError::Precondition(_))));
        c.no_regime_check = true;
        let r = run(&c).unwrap();
        assert_eq!(r.outcomes["theorem-regime"], "false");
        assert!(r.warnings.iter().any(|w| w.contains("NOT IN THE THEOREM REGIME")));
    }

    #[test]
    fn zero_law_gives_zero_statistic() {
        let mut c = cfg("random");
        c.law = Some("zero".into());
        c.n_max = Some(128);
        c.samples = Some(3);
        let r = run(&c).unwrap();
        let est = r.output.get_json("random_sup").unwrap();
        assert_eq!(est["data"]["max"], 0.0);
    }
}
