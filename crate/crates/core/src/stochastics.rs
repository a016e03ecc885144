//! Random modulations with counter-based streams, Monte Carlo estimates,
//! the random-cocycle Hilbert transform and the Cauchy-gap diagnostic.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circle::{self, CircleEvaluator};
use crate::error::{invalid, Error, Result};
use crate::math::{self, KahanSum, Turn};
use crate::modulation::ModulationSeq;
use crate::operators::{Cocycle, Point, VectorField};
use crate::weight::WeightSeq;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Words reserved per index `k` in a sample stream.
const WORDS_PER_INDEX: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Rademacher,
    Gaussian,
    ComplexGaussian,
    /// Always zero; a test double.
    Zero,
}

/// `f_k(y)`: independent symmetric variables keyed by `(seed, y, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomModulation {
    pub law: Law,
    pub seed: u64,
    /// Pairs samples `2j, 2j+1` on one stream with opposite signs.
    #[serde(default)]
    pub antithetic: bool,
}

impl RandomModulation {
    pub fn new(law: Law, seed: u64) -> Self {
        Self { law, seed, antithetic: false }
    }

    pub fn with_antithetic(mut self) -> Self {
        self.antithetic = true;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.law == Law::Zero
    }

    fn stream(&self, y: u64) -> (u64, f64) {
        if self.antithetic {
            (y / 2, if y % 2 == 1 { -1.0 } else { 1.0 })
        } else {
            (y, 1.0)
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, k: u64) -> Complex64 {
        rng.set_word_pos((k as u128) << WORDS_PER_INDEX);
        match self.law {
            Law::Zero => ZERO,
            Law::Rademacher => Complex64::new(if rng.next_u32() & 1 == 1 { 1.0 } else { -1.0 }, 0.0),
            Law::Gaussian => Complex64::new(StandardNormal.sample(rng), 0.0),
            Law::ComplexGaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn value(&self, y: u64, k: u64) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        let (stream, sign) = self.stream(y);
        self.draw(&mut self.rng(stream), k) * sign
    }

    /// `f_1(y), …, f_n(y)`.
    pub fn path(&self, y: u64, n: u64) -> Vec<Complex64> {
        if self.is_zero() {
            return vec![ZERO; n as usize];
        }
        let (stream, sign) = self.stream(y);
        let mut rng = self.rng(stream);
        (1..=n).map(|k| self.draw(&mut rng, k) * sign).collect()
    }
}

impl ModulationSeq {
    /// The same modulation with every random component fixed to sample `y`.
    pub fn for_sample(&self, y: u64) -> ModulationSeq {
        match self {
            ModulationSeq::Random { law, .. } => ModulationSeq::Random { law: *law, sample: y },
            ModulationSeq::Rotated { inner, lambda } => inner.for_sample(y).rotated(*lambda),
            ModulationSeq::Twisted { inner, r } => inner.for_sample(y).twisted(*r),
            other => other.clone(),
        }
    }

    /// `a_1, …, a_n` for sample `y`; random paths are drawn in one stream.
    pub fn sample_values(&self, y: u64, entries: &[u64]) -> Vec<Complex64> {
        match self {
            ModulationSeq::Random { law, .. } => law.path(y, entries.len() as u64),
            _ => self.for_sample(y).values(entries),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AeVerdict {
    ConsistentWithConvergence,
    Inconsistent,
    Indeterminate,
}

/// Fitted log-log slopes above `−SLOPE_TOL` count as no decay.
pub const SLOPE_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeDiagnostic {
    pub ladder: Vec<u64>,
    /// `gaps[i]`: max over points of `|Q_{L[i+1]} − Q_{L[i]}|`.
    pub gaps: Vec<f64>,
    pub slope: Option<f64>,
    pub verdict: AeVerdict,
}

/// Least-squares slope of `ln gap` against `ln L[i+1]`.
fn fit_slope(gaps: &[f64], ladder: &[u64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        gaps.iter().zip(&ladder[1..]).filter(|(g, _)| **g > 0.0).map(|(g, n)| (math::ln(*n as f64), math::ln(*g))).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Cauchy-gap decay verdict for partial sums observed along a ladder.
pub fn ae_convergence_diag(gaps: &[f64], ladder: &[u64]) -> Result<AeDiagnostic> {
    if ladder.len() != gaps.len() + 1 {
        return Err(Error::LengthMismatch { expected: ladder.len().saturating_sub(1), found: gaps.len() });
    }
    let slope = fit_slope(gaps, ladder);
    let verdict = if gaps.iter().all(|&g| g == 0.0) {
        AeVerdict::ConsistentWithConvergence
    } else if slope.is_some_and(|s| s >= -SLOPE_TOL) {
        AeVerdict::Inconsistent
    } else if gaps.len() >= 3 && gaps[gaps.len() - 3..].windows(2).all(|w| w[1] < w[0]) && slope.is_some_and(|s| s < -SLOPE_TOL) {
        AeVerdict::ConsistentWithConvergence
    } else {
        AeVerdict::Indeterminate
    };
    Ok(AeDiagnostic { ladder: ladder.to_vec(), gaps: gaps.to_vec(), slope, verdict })
}

/// Max over points of the pointwise gap between consecutive fields.
pub fn field_gaps(fields: &[VectorField]) -> Vec<f64> {
    fields
        .windows(2)
        .map(|w| w[1].sub(&w[0]).pointwise_norms().into_iter().fold(0.0, f64::max))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub statistic: String,
    pub values: Vec<f64>,
    pub samples: u64,
    pub mean: f64,
    pub p: f64,
    pub moment_p: f64,
    pub max: f64,
    pub seed: u64,
    /// `(q, value)` empirical quantiles.
    pub quantiles: Vec<(f64, f64)>,
    pub theorem_regime: bool,
    pub report_hashes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<u64>,
    /// 0.95-quantile of the running statistic at each ladder entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder_q95: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<AeDiagnostic>,
}

pub const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = math::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl MCEstimate {
    pub fn new(statistic: impl Into<String>, values: Vec<f64>, seed: u64, p: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("samples"));
        }
        let n = values.len() as f64;
        let mean = values.iter().copied().collect::<KahanSum>().value() / n;
        let moment_p = values.iter().map(|v| math::powf(v.abs(), p)).collect::<KahanSum>().value() / n;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILES.iter().map(|&q| (q, quantile(&sorted, q))).collect();
        Ok(Self {
            statistic: statistic.into(),
            samples: values.len() as u64,
            values,
            mean,
            p,
            moment_p,
            max,
            seed,
            quantiles,
            theorem_regime: false,
            report_hashes: Vec::new(),
            config_hash: None,
            ladder: Vec::new(),
            ladder_q95: Vec::new(),
            diagnostic: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupSample {
    pub y: u64,
    /// `sup_{m ≤ n} max_λ |ψ_m(λ)|/G_m` over ladder entries `m ≤ n`.
    pub running_sup: Vec<f64>,
    /// `max_λ |Σ_{k≤n} f_k(y) λ^{n_k}/G_k|` at each ladder entry.
    pub series_sup: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn sup_stat_sample(
    law: &RandomModulation,
    y: u64,
    g: &WeightSeq,
    entries: &[u64],
    ladder: &[u64],
    m: usize,
    eval: &dyn CircleEvaluator,
    allow_coarse: bool,
) -> Result<SupSample> {
    let n_max = *ladder.last().ok_or(Error::Empty("ladder"))?;
    if n_max as usize > entries.len() {
        return Err(Error::LengthMismatch { expected: n_max as usize, found: entries.len() });
    }
    if ladder[0] < g.n0() {
        return Err(Error::BelowStart { index: ladder[0], start: g.n0() });
    }
    circle::check_grid(m, entries[n_max as usize - 1], allow_coarse)?;
    let path = law.path(y, n_max);
    let mut running_sup = Vec::with_capacity(ladder.len());
    let mut series_sup = Vec::with_capacity(ladder.len());
    let mut best: f64 = 0.0;
    for &n in ladder {
        let n_us = n as usize;
        let terms: Vec<(u64, Complex64)> = entries[..n_us].iter().zip(&path).map(|(&e, &c)| (e, c)).collect();
        let gn = g.value(n)?;
        let sup = if law.is_zero() { 0.0 } else { max_abs(&eval.eval_grid(&terms, m)) / gn };
        best = best.max(sup);
        running_sup.push(best);
        let series: Vec<(u64, Complex64)> = (g.n0()..=n)
            .map(|k| g.value(k).map(|gk| (entries[k as usize - 1], path[k as usize - 1] / gk)))
            .collect::<Result<_>>()?;
        series_sup.push(if law.is_zero() { 0.0 } else { max_abs(&eval.eval_grid(&series, m)) });
    }
    Ok(SupSample { y, running_sup, series_sup })
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| f64::max(m, z.norm()))
}

pub fn summarize_sup(samples: &[SupSample], ladder: &[u64], seed: u64) -> Result<MCEstimate> {
    let values: Vec<f64> = samples.iter().map(|s| *s.running_sup.last().unwrap_or(&0.0)).collect();
    let mut est = MCEstimate::new("sup_n max_lambda |psi_n|/G_n", values, seed, 2.0)?;
    est.ladder = ladder.to_vec();
    est.ladder_q95 = (0..ladder.len())
        .map(|i| {
            let mut col: Vec<f64> = samples.iter().map(|s| s.running_sup[i]).collect();
            col.sort_by(f64::total_cmp);
            quantile(&col, 0.95)
        })
        .collect();
    Ok(est)
}

/// Serial driver: one [`SupSample`] per `y = 0..samples`, then [`summarize_sup`].
#[allow(clippy::too_many_arguments)]
pub fn random_sup_stat(
    law: &RandomModulation,
    g: &WeightSeq,
    entries: &[u64],
    ladder: &[u64],
    m: usize,
    samples: u64,
    eval: &dyn CircleEvaluator,
    allow_coarse: bool,
) -> Result<MCEstimate> {
    if samples == 0 {
        return Err(Error::Empty("samples"));
    }
    let all: Vec<SupSample> =
        (0..samples).map(|y| sup_stat_sample(law, y, g, entries, ladder, m, eval, allow_coarse)).collect::<Result<_>>()?;
    summarize_sup(&all, ladder, law.seed)
}

/// A scalar function `h` on the base space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFn {
    One,
    /// `h(x) = e^{2πi m x}`.
    Character { m: i64 },
    /// One value per atom or grid point.
    Table { values: Vec<Complex64> },
}

impl ScalarFn {
    pub fn at(&self, c: &Cocycle, p: Point) -> Complex64 {
        match self {
            ScalarFn::One => Complex64::new(1.0, 0.0),
            ScalarFn::Character { m } => {
                let x = c.coordinate(p);
                if let (Point::Atom(i), crate::operators::SampleSpace::CircleGrid { points }) = (p, &c.space) {
                    let n = *points as i128;
                    let r = ((*m as i128 * i as i128) % n + n) % n;
                    return Turn::rational(r as u64, n as u64).to_complex();
                }
                math::cis_turns(math::frac(*m as f64 * x))
            }
            ScalarFn::Table { values } => match p {
                Point::Atom(i) => values[i],
                Point::Circle(_) => Complex64::new(f64::NAN, f64::NAN),
            },
        }
    }
}

/// Inputs of `Σ_k f_k(y) h(α^{n_k}ω) T_ω⋯T_{α^{n_k−1}ω} g / W_k`.
#[derive(Debug, Clone)]
pub struct HilbertSetup {
    pub cocycle: Cocycle,
    pub h: ScalarFn,
    pub g: Vec<Complex64>,
    pub entries: Vec<u64>,
    pub w: WeightSeq,
    pub ladder: Vec<u64>,
}

impl HilbertSetup {
    pub fn validate(&self) -> Result<()> {
        if self.g.len() != self.cocycle.dim() {
            return Err(Error::LengthMismatch { expected: self.cocycle.dim(), found: self.g.len() });
        }
        if self.ladder.is_empty() || self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("ladder", "must be nonempty and strictly increasing"));
        }
        if *self.ladder.last().unwrap() as usize > self.entries.len() {
            return Err(Error::LengthMismatch { expected: *self.ladder.last().unwrap() as usize, found: self.entries.len() });
        }
        if let ScalarFn::Table { values } = &self.h {
            if !self.cocycle.space.is_indexed() || values.len() != self.cocycle.space.len() {
                return Err(Error::LengthMismatch { expected: self.cocycle.space.len(), found: values.len() });
            }
        }
        Ok(())
    }

    pub fn n_max(&self) -> u64 {
        *self.ladder.last().unwrap_or(&0)
    }

    /// `coeffs[y][k-1] = a_k(y)`, computed once for every point `ω`.
    pub fn coefficients(&self, a: &ModulationSeq, samples: u64) -> Vec<Vec<Complex64>> {
        let entries = &self.entries[..self.n_max() as usize];
        (0..samples).map(|y| a.sample_values(y, entries)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTrace {
    pub omega: usize,
    /// Per sample: partial sums at the ladder entries, `ladder × d` row-major.
    pub sums: Vec<Vec<Complex64>>,
    /// Per sample: `max_n ‖partial sum‖` over all `n ≤ n_max`.
    pub running_max: Vec<f64>,
}

/// All samples at one base point `ω` (index into the cocycle's space).
pub fn random_hilbert_point(setup: &HilbertSetup, coeffs: &[Vec<Complex64>], omega: usize) -> Result<PointTrace> {
    let c = &setup.cocycle;
    let d = c.dim();
    let samples = coeffs.len();
    let k0 = setup.w.n0().max(1);
    let mut p = c.start(omega);
    let mut prod = crate::linalg::CMatrix::identity(d);
    let mut steps = 0u64;
    let mut v = vec![ZERO; d];
    let mut sums = vec![vec![ZERO; d]; samples];
    let mut out = vec![Vec::with_capacity(setup.ladder.len() * d); samples];
    let mut running_max = vec![0.0f64; samples];
    let mut li = 0;
    for k in 1..=setup.n_max() {
        let nk = setup.entries[k as usize - 1];
        if k >= k0 {
            while steps < nk {
                prod = prod.mul(c.fiber(p));
                p = c.step(p);
                steps += 1;
            }
            prod.mul_vec(&setup.g, &mut v);
            let scale = setup.h.at(c, p) / setup.w.value(k)?;
            for z in v.iter_mut() {
                *z *= scale;
            }
            for (y, s) in sums.iter_mut().enumerate() {
                let a = coeffs[y][k as usize - 1];
                if a != ZERO {
                    for (sj, vj) in s.iter_mut().zip(&v) {
                        *sj += a * vj;
                    }
                }
                let norm = math::sqrt(s.iter().map(|z| z.norm_sqr()).sum());
                if norm > running_max[y] {
                    running_max[y] = norm;
                }
            }
        }
        if li < setup.ladder.len() && setup.ladder[li] == k {
            for (o, s) in out.iter_mut().zip(&sums) {
                o.extend_from_slice(s);
            }
            li += 1;
        }
    }
    Ok(PointTrace { omega, sums: out, running_max })
}

/// Reduces point traces (in `ω` order) to an estimate of the maximal
/// function's `L₂(μ)` norm per sample, with Cauchy gaps over all `(y, ω)`.
pub fn summarize_hilbert(setup: &HilbertSetup, traces: &[PointTrace], seed: u64) -> Result<MCEstimate> {
    let first = traces.first().ok_or(Error::Empty("points"))?;
    let samples = first.running_max.len();
    let d = setup.cocycle.dim();
    let nl = setup.ladder.len();
    let values: Vec<f64> = (0..samples)
        .map(|y| {
            let s: KahanSum = traces.iter().map(|t| t.running_max[y] * t.running_max[y]).collect();
            math::sqrt(s.value() / traces.len() as f64)
        })
        .collect();
    let mut gaps = vec![0.0f64; nl.saturating_sub(1)];
    for t in traces {
        for s in &t.sums {
            for (i, gap) in gaps.iter_mut().enumerate() {
                let a = &s[i * d..(i + 1) * d];
                let b = &s[(i + 1) * d..(i + 2) * d];
                let g = math::sqrt(a.iter().zip(b).map(|(x, y)| (y - x).norm_sqr()).sum());
                *gap = gap.max(g);
            }
        }
    }
    let mut est = MCEstimate::new("L2(mu) norm of max_n |partial sum|", values, seed, 2.0)?;
    est.ladder = setup.ladder.clone();
    est.diagnostic = Some(ae_convergence_diag(&gaps, &setup.ladder)?);
    Ok(est)
}

/// Serial driver over `ω = 0..points`.
pub fn random_hilbert(setup: &HilbertSetup, a: &ModulationSeq, samples: u64, points: usize, seed: u64) -> Result<MCEstimate> {
    setup.validate()?;
    if samples == 0 {
        return Err(Error::Empty("samples"));
    }
    let coeffs = setup.coefficients(a, samples);
    let traces: Vec<PointTrace> = (0..points).map(|w| random_hilbert_point(setup, &coeffs, w)).collect::<Result<_>>()?;
    summarize_hilbert(setup, &traces, seed)
}
