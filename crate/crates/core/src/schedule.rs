//! Index schedules `{n_k}` and gap sequences `{ξ_k}`.
//!
//! Positions are 1-based: `nth(1)` is `n_1`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::weight::{WeightExpr, WeightSeq};

/// Entries above this bound are never produced.
pub const CAP: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// `n_k = ⌊k^r⌋ + 1`.
    #[default]
    FloorPlusOne,
    /// `n_k = k^r` for integer `r`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Power {
        r: f64,
        #[serde(default)]
        rounding: Rounding,
    },
    /// `n_k = k^k`.
    Superexp,
    /// `n_k = ⌊q^k⌋ + 1`.
    Geometric { q: f64 },
    Explicit { entries: Vec<u64> },
    /// `n_1 = start`, `n_{k+1} = ⌊G(n_k)⌋ + n_k + 1`.
    Greedy { weight: WeightExpr, start: u64 },
}

impl Schedule {
    pub fn power(r: f64) -> Result<Self> {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(invalid("r", "power schedules need a finite exponent r ≥ 1"));
        }
        Ok(Schedule::Power { r, rounding: Rounding::FloorPlusOne })
    }

    pub fn exact_power(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(invalid("r", "exact power schedules need r ≥ 1"));
        }
        Ok(Schedule::Power { r: r as f64, rounding: Rounding::Exact })
    }

    /// The identity schedule `n_k = k`.
    pub fn identity() -> Self {
        Schedule::Power { r: 1.0, rounding: Rounding::Exact }
    }

    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(invalid("q", "geometric ratio must exceed 1"));
        }
        Ok(Schedule::Geometric { q })
    }

    pub fn explicit(entries: Vec<u64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("explicit schedule"));
        }
        if entries[0] == 0 {
            return Err(invalid("entries", "schedule entries must be positive"));
        }
        for (i, w) in entries.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NotIncreasing(i as u64 + 2));
            }
        }
        Ok(Schedule::Explicit { entries })
    }

    /// The greedy schedule of a weight, started at its `n0`.
    pub fn greedy(g: &WeightSeq) -> Result<Self> {
        let weight = *g.expr().ok_or(Error::NumericOnly("greedy schedules need a symbolic weight"))?;
        Ok(Schedule::Greedy { weight, start: g.n0() })
    }

    /// `n_k` for `k ≥ 1`.
    pub fn nth(&self, k: u64) -> Result<u64> {
        if k == 0 {
            return Err(invalid("k", "schedule positions start at 1"));
        }
        let v = match self {
            Schedule::Power { r, rounding } => power_entry(*r, *rounding, k)?,
            Schedule::Superexp => {
                let k32 = u32::try_from(k).map_err(|_| Error::ScheduleOverflow(k))?;
                k.checked_pow(k32).ok_or(Error::ScheduleOverflow(k))?
            }
            Schedule::Geometric { q } => {
                let x = math::powf(*q, k as f64);
                if !(x < CAP as f64) {
                    return Err(Error::ScheduleOverflow(k));
                }
                math::floor(x) as u64 + 1
            }
            Schedule::Explicit { entries } => *entries
                .get((k - 1) as usize)
                .ok_or(Error::LengthMismatch { expected: k as usize, found: entries.len() })?,
            Schedule::Greedy { .. } => {
                let v = self.materialize(k)?;
                if (v.len() as u64) < k {
                    return Err(Error::ScheduleOverflow(k));
                }
                v[(k - 1) as usize]
            }
        };
        if v > CAP {
            return Err(Error::ScheduleOverflow(k));
        }
        Ok(v)
    }

    /// `n_1, …, n_{kmax}`, stopping early at the first entry that would exceed
    /// [`CAP`] (or at the end of an explicit list).
    pub fn materialize(&self, kmax: u64) -> Result<Vec<u64>> {
        let mut out: Vec<u64> = Vec::with_capacity(kmax.min(1 << 20) as usize);
        match self {
            Schedule::Explicit { entries } => {
                out.extend(entries.iter().take(kmax as usize).copied().take_while(|&v| v <= CAP));
            }
            Schedule::Greedy { weight, start } => {
                if kmax == 0 {
                    return Ok(out);
                }
                let mut n = *start;
                out.push(n);
                while (out.len() as u64) < kmax {
                    let g = weight.value_at(n as f64);
                    if !(g.is_finite() && g >= 0.0) || g >= CAP as f64 {
                        break;
                    }
                    let next = (math::floor(g) as u64).checked_add(n).and_then(|x| x.checked_add(1));
                    match next {
                        Some(m) if m <= CAP => {
                            out.push(m);
                            n = m;
                        }
                        _ => break,
                    }
                }
            }
            _ => {
                for k in 1..=kmax {
                    match self.nth(k) {
                        Ok(v) => {
                            if let Some(&prev) = out.last() {
                                if v <= prev {
                                    return Err(Error::NotIncreasing(k));
                                }
                            }
                            out.push(v);
                        }
                        Err(Error::ScheduleOverflow(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(out)
    }

    /// Whether [`Schedule::class_of`] can compose expressions symbolically.
    pub fn is_symbolic(&self) -> bool {
        matches!(self, Schedule::Power { .. } | Schedule::Superexp)
    }

    /// Power–log class of `k ↦ expr(n_k)`.
    pub fn class_of(&self, expr: &WeightExpr) -> Result<WeightExpr> {
        asymptotic_class(expr, self)
    }

    /// Power–log class of the derived gaps `n_{k+1} − n_k`.
    pub fn gap_class(&self) -> Result<WeightExpr> {
        match self {
            Schedule::Power { r, .. } => {
                if *r == 1.0 {
                    Ok(WeightExpr::one())
                } else {
                    Ok(WeightExpr::new(*r, r - 1.0, 0.0, 0.0))
                }
            }
            // (k+1)^{k+1} − k^k ≍ e·k·k^k
            Schedule::Superexp => Ok(WeightExpr { scale: core::f64::consts::E, exps: [1.0, 0.0, 0.0], superexp: 1.0 }),
            _ => Err(Error::NumericOnly("gap class needs a power or k^k schedule")),
        }
    }
}

fn power_entry(r: f64, rounding: Rounding, k: u64) -> Result<u64> {
    let integral = r == math::floor(r) && r <= 64.0;
    match rounding {
        Rounding::Exact => {
            if !integral {
                return Err(invalid("r", "exact rounding needs an integer exponent"));
            }
            k.checked_pow(r as u32).ok_or(Error::ScheduleOverflow(k))
        }
        Rounding::FloorPlusOne => {
            if integral {
                k.checked_pow(r as u32).and_then(|x| x.checked_add(1)).ok_or(Error::ScheduleOverflow(k))
            } else {
                let x = math::powf(k as f64, r);
                if !(x < CAP as f64) {
                    return Err(Error::ScheduleOverflow(k));
                }
                Ok(math::floor(x) as u64 + 1)
            }
        }
    }
}

/// Power–log class of `k ↦ expr(n_k)`.
///
/// For `n_k ≍ k^r` the exponents map as `(a, b, c) ↦ (r·a, b, c)` and the
/// scale picks up `r^b`. For `n_k = k^k` the result carries `k^{a·k}` with
/// `ln n_k = k ln k` and `lnln n_k ≍ ln k`.
pub fn asymptotic_class(expr: &WeightExpr, sched: &Schedule) -> Result<WeightExpr> {
    if expr.superexp != 0.0 {
        return Err(Error::NumericOnly("expression already carries a k^k factor"));
    }
    let [a, b, c] = expr.exps;
    match sched {
        Schedule::Power { r, .. } => {
            let scale = if b == 0.0 { expr.scale } else { expr.scale * math::powf(*r, b) };
            Ok(WeightExpr { scale, exps: [r * a, b, c], superexp: 0.0 })
        }
        Schedule::Superexp => Ok(WeightExpr { scale: expr.scale, exps: [b, b + c, 0.0], superexp: a }),
        _ => Err(Error::NumericOnly("schedule kind has no symbolic composition")),
    }
}

/// The auxiliary sequence `{ξ_k}` of condition (W2).
#[derive(Debug, Clone)]
pub enum GapSeq {
    /// `ξ_k = n_{k+1} − n_k`.
    Derived,
    /// `ξ_k = e(n_k)`.
    AtSchedule(WeightExpr),
    /// `ξ_k = G(n_{k+1}) − G(n_k)`.
    Increment(WeightSeq),
    Explicit(Vec<f64>),
}

impl GapSeq {
    /// `ξ_1, …, ξ_K` for the first `K` schedule positions. `entries` must hold
    /// `K + 1` values in derived and increment mode.
    pub fn values(&self, entries: &[u64], count: usize) -> Result<Vec<f64>> {
        let need_next = matches!(self, GapSeq::Derived | GapSeq::Increment(_));
        let avail = if need_next { entries.len().saturating_sub(1) } else { entries.len() };
        if count > avail {
            return Err(Error::LengthMismatch { expected: count + need_next as usize, found: entries.len() });
        }
        let out: Vec<f64> = match self {
            GapSeq::Derived => entries.windows(2).take(count).map(|w| (w[1] - w[0]) as f64).collect(),
            GapSeq::AtSchedule(e) => entries[..count].iter().map(|&n| e.value_at(n as f64)).collect(),
            GapSeq::Increment(g) => {
                let mut out = Vec::with_capacity(count);
                for w in entries.windows(2).take(count) {
                    out.push(g.value(w[1])? - g.value(w[0])?);
                }
                out
            }
            GapSeq::Explicit(xs) => {
                if xs.len() < count {
                    return Err(Error::LengthMismatch { expected: count, found: xs.len() });
                }
                xs[..count].to_vec()
            }
        };
        if let Some(i) = out.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid("xi", alloc::format!("gap {} at position {} is not positive", out[i], i + 1)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rounding() {
        let s = Schedule::power(2.0).unwrap();
        assert_eq!(s.materialize(4).unwrap(), [2, 5, 10, 17]);
        let s = Schedule::power(1.5).unwrap();
        assert_eq!(s.nth(4).unwrap(), 9);
        assert_eq!(s.nth(10).unwrap(), 32);
        assert_eq!(Schedule::exact_power(2).unwrap().materialize(3).unwrap(), [1, 4, 9]);
        assert!(Schedule::power(0.5).is_err());
    }

    #[test]
    fn superexp_caps_before_overflow() {
        let v = Schedule::Superexp.materialize(100).unwrap();
        assert_eq!(&v[..4], &[1, 4, 27, 256]);
        assert_eq!(v.len(), 15);
        assert!(*v.last().unwrap() <= CAP);
    }

    #[test]
    fn greedy_recurrence() {
        let g = WeightSeq::with_start(WeightExpr::power(0.5), 1).unwrap();
        let s = Schedule::greedy(&g).unwrap();
        // 1 -> 1+1+1 = 3 -> floor(sqrt 3)=1 -> 5 -> 2 -> 8
        assert_eq!(s.materialize(4).unwrap(), [1, 3, 5, 8]);
    }

    #[test]
    fn explicit_must_increase() {
        assert!(matches!(Schedule::explicit(alloc::vec![1, 3, 3]), Err(Error::NotIncreasing(3))));
        assert!(Schedule::explicit(alloc::vec![]).is_err());
    }

    #[test]
    fn class_examples() {
        let beta = 0.25;
        let e = WeightExpr::power(1.0 - beta);
        let s = Schedule::power(1.0 / beta).unwrap();
        let c = asymptotic_class(&e, &s).unwrap();
        assert!((c.a() - (1.0 - beta) / beta).abs() < 1e-15);
        let k = 1000u64;
        let ratio = e.value_at(s.nth(k).unwrap() as f64) / c.value_at(k as f64);
        assert!((ratio - 1.0).abs() < 1e-2);

        let c = asymptotic_class(&WeightExpr::new(1.0, 0.0, 1.0, 0.0), &Schedule::power(3.0).unwrap()).unwrap();
        assert_eq!(c.exps, [0.0, 1.0, 0.0]);
        assert_eq!(c.scale, 3.0);

        let p = 2.0;
        let gamma = 1.0;
        let g = WeightExpr::new(1.0, 0.0, beta + 1.0 / p, gamma);
        let c = asymptotic_class(&g, &Schedule::Superexp).unwrap();
        assert_eq!(c.exps, [beta + 1.0 / p, beta + 1.0 / p + gamma, 0.0]);
        assert_eq!(c.superexp, 0.0);

        assert!(matches!(asymptotic_class(&g, &Schedule::geometric(2.0).unwrap()), Err(Error::NumericOnly(_))));
    }

    #[test]
    fn gaps() {
        let s = Schedule::power(2.0).unwrap();
        let e = s.materialize(5).unwrap();
        assert_eq!(GapSeq::Derived.values(&e, 4).unwrap(), [3.0, 5.0, 7.0, 9.0]);
        assert!(matches!(GapSeq::Derived.values(&e, 5), Err(Error::LengthMismatch { .. })));
        assert!(matches!(GapSeq::Explicit(alloc::vec![1.0, 2.0]).values(&e, 3), Err(Error::LengthMismatch { .. })));
    }
}
