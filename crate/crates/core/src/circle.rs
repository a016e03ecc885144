//! Trigonometric polynomials `ψ(λ) = Σ c_k λ^{e_k}` on the unit circle:
//! grid evaluation, grid suprema with local refinement, and the measured
//! constant `K = sup_n sup_λ |ψ_n(λ)| / G_n`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{self, ComplexKahan, Turn};
use crate::modulation::ModulationSeq;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Oversampling factor of the grid rule `M ≥ 4·deg`.
pub const OVERSAMPLING: u64 = 4;

/// Evaluates `Σ c_k e^{2πi e_k j / M}` for `j = 0..M`.
pub trait CircleEvaluator {
    fn eval_grid(&self, terms: &[(u64, Complex64)], m: usize) -> Vec<Complex64>;
}

/// `O(M·n)` evaluation with an exact twiddle table.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectEvaluator;

pub fn twiddles(m: usize) -> Vec<Complex64> {
    (0..m as u64).map(|j| Turn::rational(j, m as u64).to_complex()).collect()
}

impl CircleEvaluator for DirectEvaluator {
    fn eval_grid(&self, terms: &[(u64, Complex64)], m: usize) -> Vec<Complex64> {
        let tw = twiddles(m);
        let mm = m as u64;
        let reduced: Vec<(u64, Complex64)> = terms.iter().filter(|t| t.1 != ZERO).map(|&(e, c)| (e % mm, c)).collect();
        (0..mm)
            .map(|j| {
                let mut acc = ComplexKahan::new();
                for &(e, c) in &reduced {
                    acc.add(c * tw[((e as u128 * j as u128) % mm as u128) as usize]);
                }
                acc.value()
            })
            .collect()
    }
}

/// `(a_k, n_k)` pairs for `k = 1..=entries.len()`.
pub fn poly_terms(a: &ModulationSeq, entries: &[u64]) -> Vec<(u64, Complex64)> {
    entries.iter().zip(a.values(entries)).map(|(&n, c)| (n, c)).collect()
}

/// `ψ(t) = Σ c_k e^{2πi e_k t}` at a real turn `t`.
pub fn eval_at(terms: &[(u64, Complex64)], t: f64) -> Complex64 {
    let mut acc = ComplexKahan::new();
    for &(e, c) in terms {
        if c != ZERO {
            acc.add(c * Turn::Real(t).pow(e));
        }
    }
    acc.value()
}

/// Smallest admissible grid for a polynomial of the given degree.
pub fn required_grid(degree: u64) -> u64 {
    OVERSAMPLING.saturating_mul(degree.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupCircle {
    /// Maximum of `|ψ|` over the grid: a certified lower bound for the sup.
    pub lower_bound: f64,
    /// Grid argmax, as a turn.
    pub argmax: f64,
    /// After golden-section refinement; never below `lower_bound`.
    pub heuristic: f64,
    pub heuristic_argmax: f64,
    pub grid: usize,
}

pub fn check_grid(m: usize, degree: u64, allow_coarse: bool) -> Result<()> {
    if m == 0 {
        return Err(invalid("grid", "must be positive"));
    }
    let need = required_grid(degree);
    if (m as u64) < need && !allow_coarse {
        return Err(Error::GridTooCoarse { grid: m, required: need });
    }
    Ok(())
}

/// `sup_{|λ|=1} |Σ c_k λ^{e_k}|` on an `m`-point grid with one local refinement.
pub fn sup_circle(eval: &dyn CircleEvaluator, terms: &[(u64, Complex64)], m: usize, allow_coarse: bool) -> Result<SupCircle> {
    let degree = terms.iter().map(|t| t.0).max().unwrap_or(0);
    check_grid(m, degree, allow_coarse)?;
    if terms.iter().all(|t| t.1 == ZERO) {
        return Ok(SupCircle { lower_bound: 0.0, argmax: 0.0, heuristic: 0.0, heuristic_argmax: 0.0, grid: m });
    }
    let values = eval.eval_grid(terms, m);
    let (j, lower) = values.iter().map(|z| z.norm()).enumerate().fold((0, -1.0), |best, (j, v)| if v > best.1 { (j, v) } else { best });
    let argmax = j as f64 / m as f64;
    let h = 1.0 / m as f64;
    let (t, v) = golden_max(|t| eval_at(terms, t).norm(), argmax - h, argmax + h, 80);
    let (heuristic, heuristic_argmax) = if v > lower { (v, math::frac(t)) } else { (lower, argmax) };
    Ok(SupCircle { lower_bound: lower, argmax, heuristic, heuristic_argmax, grid: m })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeasure {
    pub k: f64,
    /// Index `n` and grid turn where the maximum is attained.
    pub at_n: u64,
    pub at_turn: f64,
    pub grid: usize,
}

/// `max_{1 ≤ n ≤ N} max_j |ψ_n(j/M)| / G_n` with `ψ_n = Σ_{k ≤ n} c_k λ^{e_k}`.
///
/// `g[k-1]` is `G_k`; `terms.len() = g.len() = N`. Polynomials are grown
/// incrementally over the grid, so every partial sum is seen.
pub fn measure_k(terms: &[(u64, Complex64)], g: &[f64], m: usize, allow_coarse: bool) -> Result<KMeasure> {
    if terms.len() != g.len() {
        return Err(Error::LengthMismatch { expected: terms.len(), found: g.len() });
    }
    if terms.is_empty() {
        return Err(Error::Empty("terms"));
    }
    let degree = terms.iter().map(|t| t.0).max().unwrap_or(0);
    check_grid(m, degree, allow_coarse)?;
    let tw = twiddles(m);
    let mm = m as u64;
    let mut psi = vec![ZERO; m];
    let mut best = KMeasure { k: 0.0, at_n: 1, at_turn: 0.0, grid: m };
    for (i, (&(e, c), &gn)) in terms.iter().zip(g).enumerate() {
        if c != ZERO {
            let e = e % mm;
            for (j, z) in psi.iter_mut().enumerate() {
                *z += c * tw[((e as u128 * j as u128) % mm as u128) as usize];
            }
        }
        for (j, z) in psi.iter().enumerate() {
            let v = z.norm() / gn;
            if v > best.k {
                best = KMeasure { k: v, at_n: i as u64 + 1, at_turn: j as f64 / m as f64, grid: m };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: u64) -> Vec<(u64, Complex64)> {
        (1..=n).map(|k| (k, Complex64::new(1.0, 0.0))).collect()
    }

    #[test]
    fn all_ones_peak_at_one() {
        let s = sup_circle(&DirectEvaluator, &ones(16), 64, false).unwrap();
        assert!((s.lower_bound - 16.0).abs() < 1e-12);
        assert_eq!(s.argmax, 0.0);
        assert!(s.heuristic >= s.lower_bound);
    }

    #[test]
    fn single_term_is_flat() {
        let t = [(5u64, Complex64::new(0.6, -0.8))];
        let s = sup_circle(&DirectEvaluator, &t, 32, false).unwrap();
        assert!((s.lower_bound - 1.0).abs() < 1e-15);
        assert!((s.heuristic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_rejected_unless_allowed() {
        assert!(matches!(sup_circle(&DirectEvaluator, &ones(16), 63, false), Err(Error::GridTooCoarse { required: 64, .. })));
        assert!(sup_circle(&DirectEvaluator, &ones(16), 8, true).is_ok());
    }

    #[test]
    fn chirp_matches_dense_scan() {
        let a = ModulationSeq::Chirp { theta: 0.3 };
        let entries: Vec<u64> = (1..=64).collect();
        let terms = poly_terms(&a, &entries);
        let s = sup_circle(&DirectEvaluator, &terms, 256, false).unwrap();
        let scan = (0..1_000_000).map(|j| eval_at(&terms, j as f64 / 1e6).norm()).fold(0.0, f64::max);
        assert!(s.heuristic >= s.lower_bound);
        assert!((s.heuristic - scan).abs() <= 1e-6 * scan, "{} vs {scan}", s.heuristic);
    }

    #[test]
    fn grid_matches_pointwise_evaluation() {
        let terms: Vec<(u64, Complex64)> = (1..=20).map(|k| (k * k, Complex64::new(1.0 / k as f64, 0.5))).collect();
        let m = 2048;
        let grid = DirectEvaluator.eval_grid(&terms, m);
        for j in [0usize, 1, 17, 1000, 2047] {
            assert!((grid[j] - eval_at(&terms, j as f64 / m as f64)).norm() < 1e-11);
        }
    }

    #[test]
    fn k_for_ones_over_n_is_one() {
        let n = 64;
        let g: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let k = measure_k(&ones(n), &g, 256, false).unwrap();
        assert!((k.k - 1.0).abs() < 1e-14);
    }
}
