//! Bounded coefficient sequences `{a_k}`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math::{self, Turn};
use crate::schedule::{Rounding, Schedule};
use crate::stochastics::RandomModulation;
use crate::weight::WeightExpr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModulationSeq {
    Constant { c: Complex64 },
    /// `a_k = λ^{n_k}`.
    Rotation { lambda: Turn },
    /// `a_k = λ^k`.
    Character { lambda: Turn },
    /// `a_k = e^{2πi θ k²}`.
    Chirp { theta: f64 },
    /// `a_k = k^{ir}`.
    PowerTwist { r: f64 },
    /// `a_k = k^e` with `e ≤ 0`.
    PowerLaw { e: f64 },
    Explicit { values: Vec<Complex64> },
    /// One sample path `y` of a random modulation.
    Random { law: RandomModulation, sample: u64 },
    /// `a_k λ^{n_k}`.
    Rotated { inner: Box<ModulationSeq>, lambda: Turn },
    /// `a_k k^{ir}`.
    Twisted { inner: Box<ModulationSeq>, r: f64 },
}

/// Class of `|a_k − a_{k+1}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncrementClass {
    Zero,
    Class(WeightExpr),
}

impl ModulationSeq {
    pub fn zero() -> Self {
        ModulationSeq::Constant { c: Complex64::new(0.0, 0.0) }
    }

    pub fn ones() -> Self {
        ModulationSeq::Constant { c: Complex64::new(1.0, 0.0) }
    }

    pub fn alternating() -> Self {
        ModulationSeq::Character { lambda: Turn::rational(1, 2) }
    }

    pub fn rotated(self, lambda: Turn) -> Self {
        ModulationSeq::Rotated { inner: Box::new(self), lambda }
    }

    pub fn twisted(self, r: f64) -> Self {
        ModulationSeq::Twisted { inner: Box::new(self), r }
    }

    /// `a_k` at position `k ≥ 1` whose schedule entry is `n_k`.
    pub fn value(&self, k: u64, n_k: u64) -> Complex64 {
        match self {
            ModulationSeq::Constant { c } => *c,
            ModulationSeq::Rotation { lambda } => lambda.pow(n_k),
            ModulationSeq::Character { lambda } => lambda.pow(k),
            ModulationSeq::Chirp { theta } => {
                let k2 = (k as f64) * (k as f64);
                math::cis_turns(math::frac(theta * k2))
            }
            ModulationSeq::PowerTwist { r } => twist(k, *r),
            ModulationSeq::PowerLaw { e } => Complex64::new(math::powf(k as f64, *e), 0.0),
            ModulationSeq::Explicit { values } => values.get((k - 1) as usize).copied().unwrap_or_default(),
            ModulationSeq::Random { law, sample } => law.value(*sample, k),
            ModulationSeq::Rotated { inner, lambda } => inner.value(k, n_k) * lambda.pow(n_k),
            ModulationSeq::Twisted { inner, r } => inner.value(k, n_k) * twist(k, *r),
        }
    }

    /// `a_1, …, a_K` along schedule entries.
    pub fn values(&self, entries: &[u64]) -> Vec<Complex64> {
        entries.iter().enumerate().map(|(i, &n)| self.value(i as u64 + 1, n)).collect()
    }

    /// Whether every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        match self {
            ModulationSeq::Constant { c } => *c == Complex64::new(0.0, 0.0),
            ModulationSeq::Explicit { values } => values.iter().all(|z| *z == Complex64::new(0.0, 0.0)),
            ModulationSeq::Random { law, .. } => law.is_zero(),
            ModulationSeq::Rotated { inner, .. } | ModulationSeq::Twisted { inner, .. } => inner.is_zero(),
            _ => false,
        }
    }

    /// `max_{k ≤ K} |a_k|` over the given entries.
    pub fn sup_norm(&self, entries: &[u64]) -> f64 {
        match self {
            ModulationSeq::Constant { c } => c.norm(),
            ModulationSeq::Rotation { .. }
            | ModulationSeq::Character { .. }
            | ModulationSeq::Chirp { .. }
            | ModulationSeq::PowerTwist { .. } => 1.0,
            _ => self.values(entries).iter().fold(0.0, |m, z| f64::max(m, z.norm())),
        }
    }

    /// Power–log class of `|a_k − a_{k+1}|` when known in closed form.
    pub fn increment_class(&self, sched: &Schedule) -> Option<IncrementClass> {
        if self.is_zero() {
            return Some(IncrementClass::Zero);
        }
        let unit_step = |lambda: &Turn| {
            let d = (Complex64::new(1.0, 0.0) - lambda.to_complex()).norm();
            if lambda.as_f64() == 0.0 {
                IncrementClass::Zero
            } else {
                IncrementClass::Class(WeightExpr::new(d, 0.0, 0.0, 0.0))
            }
        };
        match self {
            ModulationSeq::Constant { .. } => Some(IncrementClass::Zero),
            ModulationSeq::Character { lambda } => Some(unit_step(lambda)),
            ModulationSeq::Rotation { lambda } => match sched {
                Schedule::Power { r, rounding: Rounding::Exact | Rounding::FloorPlusOne } if *r == 1.0 => {
                    Some(unit_step(lambda))
                }
                _ if lambda.as_f64() == 0.0 => Some(IncrementClass::Zero),
                _ => None,
            },
            ModulationSeq::PowerTwist { r } => Some(if *r == 0.0 {
                IncrementClass::Zero
            } else {
                IncrementClass::Class(WeightExpr::new(r.abs(), -1.0, 0.0, 0.0))
            }),
            ModulationSeq::PowerLaw { e } => Some(if *e == 0.0 {
                IncrementClass::Zero
            } else {
                IncrementClass::Class(WeightExpr::new(e.abs(), e - 1.0, 0.0, 0.0))
            }),
            ModulationSeq::Explicit { values } => {
                if values.windows(2).all(|w| w[0] == w[1]) {
                    Some(IncrementClass::Zero)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

fn twist(k: u64, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let phase = r * math::ln(k as f64);
    Complex64::new(math::cos(phase), math::sin(phase))
}
