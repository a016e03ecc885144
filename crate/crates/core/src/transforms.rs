//! Weighted averages, weighted series in direct and Abel form, modulated
//! polynomials, one-sided Hilbert-transform partial sums and the numeric
//! bound checks built on them.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::FieldSeq;
use crate::linalg::{CMatrix, PowerCache};
use crate::math::{self, ComplexKahan, KahanSum, Turn};
use crate::modulation::ModulationSeq;
use crate::operators::{LinearOperator, VectorField};
use crate::trace::TransformTrace;
use crate::weight::WeightSeq;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `S_n = Σ_{k=1}^n f_k`.
pub fn partial_sum(fseq: &dyn FieldSeq, n: u64) -> Result<VectorField> {
    let mut s = VectorField::zeros(fseq.space().clone(), fseq.dim());
    if !fseq.is_zero() {
        for k in 1..=n {
            fseq.add_to(k, ONE, &mut s)?;
        }
    }
    Ok(s)
}

/// `(1/W_n) Σ_{k=1}^n f_k`.
pub fn weighted_average(fseq: &dyn FieldSeq, w: &WeightSeq, n: u64) -> Result<VectorField> {
    let wn = w.value(n)?;
    Ok(partial_sum(fseq, n)?.scaled(re(1.0 / wn)))
}

/// Streams `S_n/W_n` for `n = 1, 2, …` and records the requested indices.
pub fn average_trace(fseq: &dyn FieldSeq, w: &WeightSeq, record_at: &[u64], p: f64) -> Result<TransformTrace> {
    let mut trace = TransformTrace::new(p);
    let mut s = VectorField::zeros(fseq.space().clone(), fseq.dim());
    let last = record_at.last().copied().unwrap_or(0);
    let mut next = record_at.iter().peekable();
    for n in 1..=last {
        if !fseq.is_zero() {
            fseq.add_to(n, ONE, &mut s)?;
        }
        if next.peek() == Some(&&n) {
            next.next();
            if n >= w.n0() {
                trace.record(n, Some(&s.scaled(re(1.0 / w.value(n)?))), None, None)?;
            }
        }
    }
    Ok(trace)
}

/// `(Σ_{k=n0}^n f_k/W_k, S'_n/W_n + Σ_{k=n0}^{n-1}(1/W_k − 1/W_{k+1}) S'_k)`
/// with `S'_k = Σ_{j=n0}^k f_j`.
pub fn weighted_series(fseq: &dyn FieldSeq, w: &WeightSeq, n: u64) -> Result<(VectorField, VectorField)> {
    let n0 = w.n0();
    if n < n0 {
        return Err(Error::BelowStart { index: n, start: n0 });
    }
    let zero = VectorField::zeros(fseq.space().clone(), fseq.dim());
    if fseq.is_zero() {
        return Ok((zero.clone(), zero));
    }
    let mut direct = zero.clone();
    let mut s = zero.clone();
    let mut abel = zero;
    for k in n0..=n {
        let wk = w.value(k)?;
        fseq.add_to(k, re(1.0 / wk), &mut direct)?;
        fseq.add_to(k, ONE, &mut s)?;
        if k < n {
            let d = 1.0 / wk - 1.0 / w.value(k + 1)?;
            abel.axpy(re(d), &s);
        }
    }
    abel.axpy(re(1.0 / w.value(n)?), &s);
    Ok((direct, abel))
}

/// `ψ_n(λ) = Σ_{k ≤ n} a_k λ^{n_k}` with compensated accumulation.
pub fn modulated_poly(a: &ModulationSeq, entries: &[u64], n: usize, lambda: Turn) -> Result<Complex64> {
    if n > entries.len() {
        return Err(Error::LengthMismatch { expected: n, found: entries.len() });
    }
    let mut acc = ComplexKahan::new();
    for (i, &nk) in entries[..n].iter().enumerate() {
        acc.add(a.value(i as u64 + 1, nk) * lambda.pow(nk));
    }
    Ok(acc.value())
}

fn require_flags(t: &LinearOperator) -> Result<()> {
    if t.is_admissible_for_transforms() {
        Ok(())
    } else {
        Err(Error::MissingFlag("contraction or power-bounded"))
    }
}

/// `Σ_{k=k0}^n a_k T^{n_k} f / (k^{βt} W_k)`, `k0 = max(1, n0(W))`.
///
/// With `record_at` the partial sums at those indices are traced.
#[allow(clippy::too_many_arguments)]
pub fn damped_series(
    a: &ModulationSeq,
    t: &LinearOperator,
    entries: &[u64],
    w: &WeightSeq,
    beta_t: f64,
    f: &VectorField,
    n: u64,
    mut trace: Option<(&mut TransformTrace, &[u64])>,
) -> Result<VectorField> {
    require_flags(t)?;
    if n as usize > entries.len() {
        return Err(Error::LengthMismatch { expected: n as usize, found: entries.len() });
    }
    let mut out = VectorField::zeros(f.space.clone(), f.dim);
    if a.is_zero() || f.is_zero() {
        if let Some((tr, at)) = trace.as_mut() {
            for &m in at.iter().filter(|&&m| m <= n) {
                tr.record(m, None, Some(&out), None)?;
            }
        }
        return Ok(out);
    }
    let k0 = w.n0().max(1);
    let mut cur = f.clone();
    let mut power = 0u64;
    let mut next = trace.as_ref().map(|(_, at)| at.iter().copied().peekable());
    for k in 1..=n {
        if k >= k0 {
            let nk = entries[k as usize - 1];
            cur = t.apply_power(nk - power, &cur)?;
            power = nk;
            let damp = if beta_t == 0.0 { 1.0 } else { math::powf(k as f64, -beta_t) };
            let c = a.value(k, nk) * re(damp / w.value(k)?);
            out.axpy(c, &cur);
        }
        if let (Some(it), Some((tr, _))) = (next.as_mut(), trace.as_mut()) {
            while it.peek().is_some_and(|&m| m < k) {
                it.next();
            }
            if it.peek() == Some(&k) {
                it.next();
                tr.record(k, None, Some(&out), None)?;
            }
        }
    }
    Ok(out)
}

/// `Σ_{k ≤ n} a_k T^{n_k} f / W_k`.
pub fn hilbert_partial(a: &ModulationSeq, t: &LinearOperator, entries: &[u64], w: &WeightSeq, f: &VectorField, n: u64) -> Result<VectorField> {
    damped_series(a, t, entries, w, 0.0, f, n, None)
}

/// The series damped by `k^{−βt}`; `t = (2−p)/p` in the interpolation regime.
#[allow(clippy::too_many_arguments)]
pub fn phi_series(
    a: &ModulationSeq,
    t_op: &LinearOperator,
    entries: &[u64],
    w: &WeightSeq,
    beta: f64,
    t: f64,
    f: &VectorField,
    n: u64,
) -> Result<VectorField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("t", "must lie in [0, 1]"));
    }
    damped_series(a, t_op, entries, w, beta * t, f, n, None)
}

/// `t = (2−p)/p`.
pub fn interpolation_t(p: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(invalid("p", "must lie in (1, 2]"));
    }
    Ok((2.0 - p) / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistedBoundReport {
    pub k: f64,
    pub worst_ratio: f64,
    /// `(n, r, λ turn)` of the worst ratio.
    pub worst_at: (u64, f64, f64),
    /// Per `r`: the worst ratio over `λ` at the final `n`.
    pub final_ratio_by_r: Vec<(f64, f64)>,
    pub checked: u64,
    pub holds: bool,
}

/// Checks `|Σ_{k≤n} a_k k^{ir} λ^{n_k}| ≤ |r|·K·G_{n,r}` on all `(n, r, λ)`.
///
/// `G` must start at `n0 = 1`; `terms[k-1] = (n_k, a_k)`.
pub fn twisted_bound_check(
    terms: &[(u64, Complex64)],
    g: &WeightSeq,
    k: f64,
    rs: &[f64],
    lambdas: &[Turn],
    tolerance: f64,
) -> Result<TwistedBoundReport> {
    if g.n0() != 1 {
        return Err(Error::Precondition("the twisted weight needs G to start at n = 1".into()));
    }
    let n_max = terms.len() as u64;
    let mut g = g.clone();
    g.materialize(n_max)?;
    let mut report = TwistedBoundReport {
        k,
        worst_ratio: 0.0,
        worst_at: (1, rs.first().copied().unwrap_or(1.0), 0.0),
        final_ratio_by_r: Vec::new(),
        checked: 0,
        holds: true,
    };
    for &r in rs {
        let rhs: Vec<f64> = (1..=n_max).map(|n| g.twisted(r, n).map(|v| r.abs() * k * v)).collect::<Result<_>>()?;
        let twists: Vec<Complex64> = (1..=n_max).map(|j| ModulationSeq::PowerTwist { r }.value(j, j)).collect();
        let mut final_worst: f64 = 0.0;
        for lam in lambdas {
            let mut acc = ComplexKahan::new();
            for (i, &(nk, ak)) in terms.iter().enumerate() {
                if ak != ZERO {
                    acc.add(ak * twists[i] * lam.pow(nk));
                }
                let ratio = acc.value().norm() / rhs[i];
                report.checked += 1;
                if ratio > report.worst_ratio {
                    report.worst_ratio = ratio;
                    report.worst_at = (i as u64 + 1, r, lam.as_f64());
                }
                if i + 1 == terms.len() {
                    final_worst = final_worst.max(ratio);
                }
            }
        }
        report.final_ratio_by_r.push((r, final_worst));
    }
    report.holds = report.worst_ratio <= 1.0 + tolerance;
    Ok(report)
}

/// `(n‖a‖_∞)^{(2−p)/p} (K G_n)^{2(p−1)/p}`; a factor whose exponent is zero
/// is omitted, so `p = 2` gives `K G_n` and `p = 1` gives `n‖a‖_∞`.
pub fn interpolation_bound(n: u64, a_sup: f64, k: f64, g_n: f64, p: f64) -> f64 {
    let e1 = (2.0 - p) / p;
    let e2 = 2.0 * (p - 1.0) / p;
    let mut b = 1.0;
    if e1 != 0.0 {
        b *= math::powf(n as f64 * a_sup, e1);
    }
    if e2 != 0.0 {
        b *= math::powf(k * g_n, e2);
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub p: f64,
    pub k: f64,
    pub worst_ratio: f64,
    /// `(field index, n)` of the worst ratio.
    pub worst_at: (usize, u64),
    pub checked: u64,
    pub holds: bool,
}

/// Checks `‖Σ_{k≤n} a_k T^{n_k} f‖_p ≤ bound(n)·‖f‖_p` for a Dunford–Schwartz `T`.
///
/// `terms[k-1] = (n_k, a_k)` and `g[k-1] = G_k`.
pub fn interpolation_bound_check(
    terms: &[(u64, Complex64)],
    t: &LinearOperator,
    g: &[f64],
    k: f64,
    p: f64,
    fields: &[VectorField],
    tolerance: f64,
) -> Result<InterpolationReport> {
    if !t.flags.dunford_schwartz {
        return Err(Error::MissingFlag("Dunford-Schwartz"));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(invalid("p", "must lie in (1, 2]"));
    }
    if g.len() != terms.len() {
        return Err(Error::LengthMismatch { expected: terms.len(), found: g.len() });
    }
    let mut a_sup = vec![0.0; terms.len()];
    let mut m: f64 = 0.0;
    for (i, t) in terms.iter().enumerate() {
        m = m.max(t.1.norm());
        a_sup[i] = m;
    }
    let mut report = InterpolationReport { p, k, worst_ratio: 0.0, worst_at: (0, 1), checked: 0, holds: true };
    for (fi, f) in fields.iter().enumerate() {
        let fnorm = f.norm_p(p);
        if fnorm == 0.0 {
            continue;
        }
        let mut cur = f.clone();
        let mut power = 0;
        let mut sum = VectorField::zeros(f.space.clone(), f.dim);
        for (i, &(nk, ak)) in terms.iter().enumerate() {
            cur = t.apply_power(nk - power, &cur)?;
            power = nk;
            sum.axpy(ak, &cur);
            let n = i as u64 + 1;
            let bound = interpolation_bound(n, a_sup[i], k, g[i], p);
            let ratio = sum.norm_p(p) / (bound * fnorm);
            report.checked += 1;
            if ratio > report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_at = (fi, n);
            }
        }
    }
    report.holds = report.worst_ratio <= 1.0 + tolerance;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormPair {
    pub j: u64,
    pub n: u64,
    pub gap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormReport {
    pub ladder: Vec<u64>,
    /// `‖Σ_{k≤n} a_k A^{n_k}/W_k‖` at each ladder entry.
    pub partial_norms: Vec<f64>,
    /// Gaps between consecutive ladder entries.
    pub consecutive_gaps: Vec<f64>,
    pub pairs: Vec<OpnormPair>,
    pub monotone: bool,
    pub bounded: bool,
    pub k: f64,
}

/// Operator-norm Cauchy table of `Σ a_k A^{n_k}/W_k` along a ladder, with the
/// bound `gap(j,n) ≤ K Σ_{k=j}^{n-1}(G_k/W_k)(1 − W_k/W_{k+1}) + ‖P_j‖/W_j + ‖P_n‖/W_n`
/// where `P_m = Σ_{k≤m} a_k A^{n_k}` and `‖P_m‖ ≤ K G_m`.
#[allow(clippy::too_many_arguments)]
pub fn opnorm_series(
    a: &ModulationSeq,
    mat: &CMatrix,
    entries: &[u64],
    g: &WeightSeq,
    w: &WeightSeq,
    ladder: &[u64],
    k: f64,
    tolerance: f64,
) -> Result<OpnormReport> {
    if !mat.is_contraction() {
        return Err(Error::MissingFlag("contraction"));
    }
    if ladder.windows(2).any(|p| p[1] <= p[0]) || ladder.is_empty() {
        return Err(invalid("ladder", "must be nonempty and strictly increasing"));
    }
    let n_max = *ladder.last().unwrap();
    if n_max as usize > entries.len() {
        return Err(Error::LengthMismatch { expected: n_max as usize, found: entries.len() });
    }
    let k0 = g.n0().max(w.n0()).max(1);
    if ladder[0] < k0 {
        return Err(Error::BelowStart { index: ladder[0], start: k0 });
    }
    let d = mat.dim();
    let mut cache = PowerCache::new(mat);
    let mut pow = CMatrix::identity(d);
    let mut power = 0u64;
    let mut p_unweighted = CMatrix::zeros(d);
    let mut s = CMatrix::zeros(d);
    let mut sums = Vec::new();
    let mut p_norms = Vec::new();
    let mut tail_prefix = vec![0.0; n_max as usize + 1];
    let mut tail = KahanSum::new();
    let mut li = 0;
    for kk in k0..=n_max {
        let nk = entries[kk as usize - 1];
        pow = pow.mul(&cache.power(nk - power));
        power = nk;
        let ak = a.value(kk, nk);
        if ak != ZERO {
            p_unweighted.add_scaled(&pow, ak);
            s.add_scaled(&pow, ak / w.value(kk)?);
        }
        let (gk, wk, wk1) = (g.value(kk)?, w.value(kk)?, w.value(kk + 1)?);
        tail_prefix[kk as usize] = tail.value();
        tail.add((gk / wk) * (1.0 - wk / wk1));
        if li < ladder.len() && ladder[li] == kk {
            sums.push(s.clone());
            p_norms.push(p_unweighted.operator_norm() / wk);
            li += 1;
        }
    }
    // tail_prefix[m] = Σ_{k=k0}^{m-1}.
    let tail_between = |j: u64, n: u64| tail_prefix[n as usize] - tail_prefix[j as usize];
    let partial_norms: Vec<f64> = sums.iter().map(|m| m.operator_norm()).collect();
    let mut pairs = Vec::new();
    let mut bounded = true;
    for i in 0..ladder.len() {
        for j in i + 1..ladder.len() {
            let gap = sums[j].sub(&sums[i]).operator_norm();
            let bound = k * tail_between(ladder[i], ladder[j]).max(0.0) + p_norms[i] + p_norms[j];
            bounded &= gap <= bound * (1.0 + tolerance);
            pairs.push(OpnormPair { j: ladder[i], n: ladder[j], gap, bound });
        }
    }
    let consecutive_gaps: Vec<f64> = (0..ladder.len().saturating_sub(1)).map(|i| sums[i + 1].sub(&sums[i]).operator_norm()).collect();
    let monotone = consecutive_gaps.windows(2).all(|p| p[1] < p[0]) || consecutive_gaps.iter().all(|&x| x == 0.0);
    Ok(OpnormReport { ladder: ladder.to_vec(), partial_norms, consecutive_gaps, pairs, monotone, bounded, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Constant, Stored, Zero};
    use crate::operators::SampleSpace;
    use crate::weight::WeightExpr;

    fn w_n() -> WeightSeq {
        WeightSeq::with_start(WeightExpr::power(1.0), 1).unwrap()
    }

    #[test]
    fn averages_of_constants() {
        let space = SampleSpace::Finite { m: 4 };
        let g = VectorField::random(space.clone(), 2, 3);
        let avg = weighted_average(&Constant(g.clone()), &w_n(), 37).unwrap();
        assert!(avg.sub(&g).norm2() < 1e-14);
        let z = weighted_average(&Zero { space, dim: 2 }, &w_n(), 10).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn abel_form_base_case_and_agreement() {
        let space = SampleSpace::Finite { m: 5 };
        let fs = Stored::random(space, 3, 50, 11).unwrap();
        let w = w_n();
        let (d, a) = weighted_series(&fs, &w, 1).unwrap();
        assert_eq!(d, fs.field(1).unwrap());
        assert!(a.sub(&d).norm2() == 0.0);
        let (d, a) = weighted_series(&fs, &w, 50).unwrap();
        assert!(a.sub(&d).norm2() <= 1e-12 * d.norm2());
    }

    #[test]
    fn modulated_polynomials() {
        let id: Vec<u64> = (1..=10).collect();
        let ones = ModulationSeq::ones();
        assert!((modulated_poly(&ones, &id, 7, Turn::rational(0, 1)).unwrap() - re(7.0)).norm() < 1e-15);
        assert!(modulated_poly(&ones, &id, 3, Turn::rational(1, 3)).unwrap().norm() < 1e-15);
        let alt = ModulationSeq::alternating();
        assert!((modulated_poly(&alt, &id, 5, Turn::rational(1, 2)).unwrap() - re(5.0)).norm() < 1e-15);
    }

    #[test]
    fn hilbert_scalar_reduction_and_linearity() {
        let space = SampleSpace::Finite { m: 3 };
        let t = LinearOperator::identity(space.clone(), 2).unwrap();
        let f = VectorField::random(space, 2, 5);
        let entries: Vec<u64> = (1..=40).collect();
        let w = w_n();
        let h = hilbert_partial(&ModulationSeq::ones(), &t, &entries, &w, &f, 40).unwrap();
        let scalar: f64 = (1..=40).map(|k| 1.0 / k as f64).sum();
        assert!(h.sub(&f.scaled(re(scalar))).norm2() < 1e-13);
        let zero = hilbert_partial(&ModulationSeq::zero(), &t, &entries, &w, &f, 40).unwrap();
        assert!(zero.is_zero());
        let two = hilbert_partial(&ModulationSeq::Constant { c: re(2.0) }, &t, &entries, &w, &f, 40).unwrap();
        assert_eq!(two, h.scaled(re(2.0)));
    }

    #[test]
    fn phi_series_reductions() {
        let space = SampleSpace::Finite { m: 4 };
        let mat = CMatrix::random_with_norm(2, 4, 0.9);
        let t = LinearOperator::matrix(mat, space.clone()).unwrap();
        let f = VectorField::random(space, 2, 6);
        let entries: Vec<u64> = (1..=30).map(|k| k * k).collect();
        let w = w_n();
        let a = ModulationSeq::Chirp { theta: 0.3 };
        let h = hilbert_partial(&a, &t, &entries, &w, &f, 30).unwrap();
        assert_eq!(phi_series(&a, &t, &entries, &w, 0.7, 0.0, &f, 30).unwrap(), h);
        assert!((interpolation_t(1.5).unwrap() - 1.0 / 3.0).abs() < 1e-16);

        // t = 1: termwise domination by Σ 1/(k^β W_k).
        let beta = 0.5;
        let phi = phi_series(&a, &t, &entries, &w, beta, 1.0, &f, 30).unwrap();
        let s: f64 = (1..=30).map(|k| 1.0 / (math::powf(k as f64, beta) * k as f64)).sum();
        assert!(phi.norm2() <= f.norm2() * s);
    }

    #[test]
    fn interpolation_endpoints() {
        assert_eq!(interpolation_bound(10, 1.0, 1.5, 4.0, 2.0), 6.0);
        assert_eq!(interpolation_bound(10, 0.5, 1.5, 4.0, 1.0), 5.0);
    }

    #[test]
    fn identity_opnorm_gaps_are_scalar_tails() {
        let entries: Vec<u64> = (1..=64).collect();
        let w = WeightSeq::with_start(WeightExpr::power(0.8), 1).unwrap();
        let g = WeightSeq::with_start(WeightExpr::power(0.5), 1).unwrap();
        let r = opnorm_series(&ModulationSeq::ones(), &CMatrix::identity(3), &entries, &g, &w, &[8, 16, 32, 64], 1.0, 1e-12).unwrap();
        for p in &r.pairs {
            let want: f64 = (p.j + 1..=p.n).map(|k| math::powf(k as f64, -0.8)).sum();
            assert!((p.gap - want).abs() < 1e-12 * want);
        }
        let z = opnorm_series(&ModulationSeq::zero(), &CMatrix::identity(3), &entries, &g, &w, &[8, 16], 1.0, 1e-12).unwrap();
        assert!(z.pairs.iter().all(|p| p.gap == 0.0));
    }
}
