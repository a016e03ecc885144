//! The function `σ(t) = 2(Σ_k sin²(n_k t/2)/G_k²)^{1/2}`, its equimeasurable
//! rearrangement and the logarithmic integral `I(σ)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bertrand;
use crate::error::{invalid, Error, Result};
use crate::math::{self, KahanSum};
use crate::weight::WeightSeq;

/// Smallest accepted `t`-grid.
pub const MIN_T_GRID: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBracket {
    pub t: f64,
    /// The truncated sum.
    pub lower: f64,
    /// Adds the tail bound of `Σ_{k>N} 1/G_k²`; absent without a symbolic class.
    pub upper: Option<f64>,
}

fn inv_g2(g: &WeightSeq, n: u64) -> Result<Vec<f64>> {
    (g.n0()..=n).map(|k| g.value(k).map(|v| 1.0 / (v * v))).collect()
}

fn tail_of_inverse_square(g: &WeightSeq, n: u64) -> Option<f64> {
    let class = g.expr()?.powf(-2.0);
    bertrand::tail_bound(&class, n)
}

/// `σ(t)` truncated at `k ≤ N`, with the upper bracket.
pub fn sigma_of_t(g: &WeightSeq, entries: &[u64], t: f64, n: u64) -> Result<SigmaBracket> {
    if (n as usize) > entries.len() {
        return Err(Error::LengthMismatch { expected: n as usize, found: entries.len() });
    }
    let w = inv_g2(g, n)?;
    let mut acc = KahanSum::new();
    for (i, k) in (g.n0()..=n).enumerate() {
        let s = math::sin(entries[k as usize - 1] as f64 * t / 2.0);
        acc.add(s * s * w[i]);
    }
    let lower = 2.0 * math::sqrt(acc.value());
    let upper = tail_of_inverse_square(g, n).map(|tail| 2.0 * math::sqrt(acc.value() + tail));
    Ok(SigmaBracket { t, lower, upper })
}

/// `σ` at `t_j = 2πj/M`, `j = 0..M`. The phase `n_k t_j / 2 = π (n_k j mod M)/M`
/// is reduced exactly, so `sin²` comes from a table.
pub fn sigma_on_grid(g: &WeightSeq, entries: &[u64], m: usize, n: u64) -> Result<Vec<SigmaBracket>> {
    sigma_grid_range(g, entries, m, n, 0..m)
}

/// [`sigma_on_grid`] restricted to the indices `js`.
pub fn sigma_grid_range(g: &WeightSeq, entries: &[u64], m: usize, n: u64, js: core::ops::Range<usize>) -> Result<Vec<SigmaBracket>> {
    if m < 2 {
        return Err(invalid("grid", "needs at least two points"));
    }
    if (n as usize) > entries.len() {
        return Err(Error::LengthMismatch { expected: n as usize, found: entries.len() });
    }
    if js.end > m {
        return Err(Error::LengthMismatch { expected: m, found: js.end });
    }
    let w = inv_g2(g, n)?;
    let mm = m as u64;
    let table: Vec<f64> = (0..m)
        .map(|i| {
            let s = math::sin(PI * i as f64 / m as f64);
            s * s
        })
        .collect();
    let reduced: Vec<u64> = (g.n0()..=n).map(|k| entries[k as usize - 1] % mm).collect();
    let tail = tail_of_inverse_square(g, n);
    let small = mm <= u32::MAX as u64;
    Ok(js
        .map(|j| {
            let mut acc = KahanSum::new();
            for (e, wk) in reduced.iter().zip(&w) {
                let idx = if small { (*e * j as u64) % mm } else { ((*e as u128 * j as u128) % mm as u128) as u64 };
                acc.add(table[idx as usize] * wk);
            }
            let s = acc.value();
            SigmaBracket {
                t: 2.0 * PI * j as f64 / m as f64,
                lower: 2.0 * math::sqrt(s),
                upper: tail.map(|tl| 2.0 * math::sqrt(s + tl)),
            }
        })
        .collect())
}

/// `2^{1−α/2} |t|^{α/2} √γ`.
pub fn sigma_bound(t: f64, alpha: f64, gamma: f64) -> f64 {
    math::powf(2.0, 1.0 - alpha / 2.0) * math::powf(t.abs(), alpha / 2.0) * math::sqrt(gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rearrangement {
    /// `σ̄` on the cells `[ih, (i+1)h)`, `h = 2π/M`, nondecreasing.
    pub values: Vec<f64>,
    pub cell: f64,
    /// `I(σ)`; `None` when the integral diverges at `s = 0`.
    pub integral: Option<f64>,
}

/// `∫_a^b ds / (s √ln(8π/s)) = 2(√ln(8π/a) − √ln(8π/b))` for `0 < a < b ≤ 2π`.
fn log_weight_integral(a: f64, b: f64) -> f64 {
    let c = 8.0 * PI;
    2.0 * (math::sqrt(math::ln(c / a)) - math::sqrt(math::ln(c / b)))
}

/// The equimeasurable rearrangement of equispaced samples of `σ` on
/// `[0, 2π)` and the exact integral of the resulting step function
/// against `ds / (s √ln(8π/s))`.
pub fn rearrangement_and_i(samples: &[f64]) -> Result<Rearrangement> {
    if samples.len() < MIN_T_GRID {
        return Err(invalid("samples", alloc::format!("need at least {MIN_T_GRID} grid points")));
    }
    if samples.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("samples", "σ must be finite and nonnegative"));
    }
    let mut values = samples.to_vec();
    values.sort_by(f64::total_cmp);
    let h = 2.0 * PI / values.len() as f64;
    let integral = if values[0] > 0.0 {
        None
    } else {
        let mut acc = KahanSum::new();
        for (i, &v) in values.iter().enumerate().skip(1) {
            if v != 0.0 {
                let a = i as f64 * h;
                let b = if i + 1 == values.len() { 2.0 * PI } else { (i + 1) as f64 * h };
                acc.add(v * log_weight_integral(a, b));
            }
        }
        Some(acc.value())
    };
    Ok(Rearrangement { values, cell: h, integral })
}

/// `2^{1−α/2}√γ ∫_0^{2π} s^{α/2−1} (ln 8π/s)^{−1/2} ds` in closed form.
pub fn i_majorant(alpha: f64, gamma: f64) -> f64 {
    let c = math::powf(2.0, 1.0 - alpha / 2.0) * math::sqrt(gamma);
    let integral = math::powf(8.0 * PI, alpha / 2.0) * math::sqrt(2.0 * PI / alpha) * math::erfc(math::sqrt(alpha * math::ln(4.0) / 2.0));
    c * integral
}

/// The same majorant by the trapezoid rule after `s = 8π e^{−u²}`, which
/// turns the integrand into `2 (8π)^{α/2} e^{−αu²/2}` on `[√ln 4, ∞)`.
pub fn i_majorant_quadrature(alpha: f64, gamma: f64, nodes: usize) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    if nodes < 2 {
        return Err(invalid("nodes", "need at least two nodes"));
    }
    let lo = math::sqrt(math::ln(4.0));
    // Dropped tail below 1e-8 of the whole.
    let hi = lo + math::sqrt(2.0 * 30.0 / alpha);
    let f = |u: f64| 2.0 * math::powf(8.0 * PI, alpha / 2.0) * math::exp(-alpha * u * u / 2.0);
    let h = (hi - lo) / (nodes - 1) as f64;
    let mut acc = KahanSum::new();
    for i in 0..nodes {
        let wt = if i == 0 || i + 1 == nodes { 0.5 } else { 1.0 };
        acc.add(wt * f(lo + i as f64 * h));
    }
    Ok(math::powf(2.0, 1.0 - alpha / 2.0) * math::sqrt(gamma) * acc.value() * h)
}
