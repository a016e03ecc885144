//! Weight expressions and weight sequences.
//!
//! A [`WeightExpr`] is a power–log monomial `scale · n^a · (ln n)^b · (lnln n)^c`.
//! The same type doubles as an asymptotic class in the summation index `k`
//! once composed with a schedule, in which case `superexp` may carry an extra
//! `k^{s·k}` factor.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{self, KahanSum};
use crate::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    N = 0,
    Ln = 1,
    LnLn = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightExpr {
    pub scale: f64,
    /// Exponents of `n`, `ln n`, `lnln n`.
    pub exps: [f64; 3],
    /// Exponent `s` of an extra `k^{s·k}` factor (classes of `k^k` schedules).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub superexp: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Default for WeightExpr {
    fn default() -> Self {
        Self::one()
    }
}

impl WeightExpr {
    pub const fn one() -> Self {
        Self { scale: 1.0, exps: [0.0; 3], superexp: 0.0 }
    }

    pub const fn new(scale: f64, a: f64, b: f64, c: f64) -> Self {
        Self { scale, exps: [a, b, c], superexp: 0.0 }
    }

    pub const fn power(a: f64) -> Self {
        Self::new(1.0, a, 0.0, 0.0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_weight(text)
    }

    pub fn a(&self) -> f64 {
        self.exps[0]
    }

    pub fn b(&self) -> f64 {
        self.exps[1]
    }

    pub fn c(&self) -> f64 {
        self.exps[2]
    }

    pub fn is_constant(&self) -> bool {
        self.exps == [0.0; 3] && self.superexp == 0.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            scale: self.scale * other.scale,
            exps: [self.exps[0] + other.exps[0], self.exps[1] + other.exps[1], self.exps[2] + other.exps[2]],
            superexp: self.superexp + other.superexp,
        }
    }

    pub fn recip(&self) -> Self {
        Self { scale: 1.0 / self.scale, exps: self.exps.map(|e| -e), superexp: -self.superexp }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn powf(&self, p: f64) -> Self {
        Self { scale: math::powf(self.scale, p), exps: self.exps.map(|e| e * p), superexp: self.superexp * p }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { scale: self.scale * factor, ..*self }
    }

    /// Value at a real argument. Factors with exponent zero are skipped, so
    /// `ln` and `lnln` are only evaluated when they occur.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut v = self.scale;
        let [a, b, c] = self.exps;
        if a != 0.0 {
            v *= math::powf(x, a);
        }
        if b != 0.0 || c != 0.0 {
            let l = math::ln(x);
            if b != 0.0 {
                v *= math::powf(l, b);
            }
            if c != 0.0 {
                v *= math::powf(math::ln(l), c);
            }
        }
        if self.superexp != 0.0 {
            v *= math::powf(x, self.superexp * x);
        }
        v
    }

    /// `ln` of the value, for magnitudes that overflow `f64`.
    pub fn ln_value_at(&self, x: f64) -> f64 {
        let mut v = math::ln(self.scale);
        let [a, b, c] = self.exps;
        let lx = math::ln(x);
        if a != 0.0 {
            v += a * lx;
        }
        if b != 0.0 {
            v += b * math::ln(lx);
        }
        if c != 0.0 {
            v += c * math::ln(math::ln(lx));
        }
        if self.superexp != 0.0 {
            v += self.superexp * x * lx;
        }
        v
    }

    /// Lexicographic sign of the growth exponents: `-1` for eventually
    /// decreasing, `1` for eventually increasing, `0` for constant.
    pub fn growth_sign(&self) -> i32 {
        let lead = [self.superexp, self.exps[0], self.exps[1], self.exps[2]]
            .into_iter()
            .find(|&e| e.abs() > crate::bertrand::EXPONENT_TOL)
            .unwrap_or(0.0);
        if lead > 0.0 {
            1
        } else if lead < 0.0 {
            -1
        } else {
            0
        }
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.16e} * n^{:.16e} * ln(n)^{:.16e} * lnln(n)^{:.16e}",
            self.scale, self.exps[0], self.exps[1], self.exps[2]
        )?;
        if self.superexp != 0.0 {
            write!(f, " * k^({:.16e}*k)", self.superexp)?;
        }
        Ok(())
    }
}

impl core::str::FromStr for WeightExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_weight(s)
    }
}

type WeightFn = dyn Fn(u64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Formula {
    Expr(WeightExpr),
    Custom { name: String, f: Arc<WeightFn> },
}

/// Largest index the memo table is allowed to grow to.
pub const MEMO_LIMIT: u64 = 1 << 24;

/// Default lookahead window of the start-index rule.
pub const START_LOOKAHEAD: u64 = 64;

const START_SEARCH_LIMIT: u64 = 1 << 20;

/// A weight `{G_n}_{n ≥ n0}`: positive, nondecreasing, with `G_{n0} ≥ 1`.
#[derive(Clone)]
pub struct WeightSeq {
    formula: Formula,
    n0: u64,
    memo: Vec<f64>,
    /// `prefix[i] = Σ_{k=n0}^{n0+i-1} G_k / k`.
    prefix: Vec<f64>,
    acc: KahanSum,
}

impl fmt::Debug for WeightSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSeq")
            .field("formula", &self.name())
            .field("n0", &self.n0)
            .field("materialized", &self.memo.len())
            .finish()
    }
}

impl WeightSeq {
    /// Weight from an expression with the default start-index rule.
    pub fn from_expr(expr: WeightExpr) -> Result<Self> {
        let n0 = default_start(&|n| expr.value_at(n as f64), &expr.to_string())?;
        Ok(Self::raw(Formula::Expr(expr), n0))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_expr(parse::parse_weight(text)?)
    }

    /// Weight from an expression with an explicit start index.
    pub fn with_start(expr: WeightExpr, n0: u64) -> Result<Self> {
        let s = Self::raw(Formula::Expr(expr), n0);
        s.check_start()?;
        Ok(s)
    }

    /// Weight given by an arbitrary formula. It is treated numerically only.
    pub fn from_fn(name: impl Into<String>, n0: u64, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let s = Self::raw(Formula::Custom { name: name.into(), f: Arc::new(f) }, n0);
        s.check_start()?;
        Ok(s)
    }

    /// Like [`WeightSeq::from_fn`] with the default start-index rule.
    pub fn from_fn_auto(name: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        let n0 = default_start(&f, &name)?;
        Ok(Self::raw(Formula::Custom { name, f: Arc::new(f) }, n0))
    }

    fn raw(formula: Formula, n0: u64) -> Self {
        Self { formula, n0: n0.max(1), memo: Vec::new(), prefix: alloc::vec![0.0], acc: KahanSum::new() }
    }

    fn check_start(&self) -> Result<()> {
        let v = self.compute(self.n0);
        if !(v.is_finite() && v >= 1.0) {
            return Err(invalid("n0", alloc::format!("weight value {v} at n0 = {} is below 1", self.n0)));
        }
        Ok(())
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn expr(&self) -> Option<&WeightExpr> {
        match &self.formula {
            Formula::Expr(e) => Some(e),
            Formula::Custom { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.formula {
            Formula::Expr(e) => e.to_string(),
            Formula::Custom { name, .. } => name.clone(),
        }
    }

    fn compute(&self, n: u64) -> f64 {
        match &self.formula {
            Formula::Expr(e) => e.value_at(n as f64),
            Formula::Custom { f, .. } => f(n),
        }
    }

    /// Number of materialized values, starting at `n0`.
    pub fn materialized(&self) -> u64 {
        self.memo.len() as u64
    }

    /// `G_n`. Pure; reads the memo when the index is materialized.
    pub fn value(&self, n: u64) -> Result<f64> {
        if n < self.n0 {
            return Err(Error::BelowStart { index: n, start: self.n0 });
        }
        let i = (n - self.n0) as usize;
        Ok(match self.memo.get(i) {
            Some(&v) => v,
            None => self.compute(n),
        })
    }

    /// `G_n` with memoization.
    pub fn eval(&mut self, n: u64) -> Result<f64> {
        if n < self.n0 {
            return Err(Error::BelowStart { index: n, start: self.n0 });
        }
        if n <= MEMO_LIMIT {
            self.materialize(n)?;
        }
        self.value(n)
    }

    /// Extends the memo table through index `upto`, auditing monotonicity.
    pub fn materialize(&mut self, upto: u64) -> Result<()> {
        if upto > MEMO_LIMIT {
            return Err(invalid("upto", alloc::format!("{upto} exceeds the memo limit {MEMO_LIMIT}")));
        }
        let have = self.n0 + self.memo.len() as u64;
        if upto < have {
            return Ok(());
        }
        self.memo.reserve((upto + 1 - have) as usize);
        self.prefix.reserve((upto + 1 - have) as usize);
        for n in have..=upto {
            let v = self.compute(n);
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid("weight", alloc::format!("value {v} at index {n} is not a positive real")));
            }
            if let Some(&prev) = self.memo.last() {
                if v < prev {
                    return Err(Error::NotMonotone { index: n, previous: n - 1 });
                }
            }
            self.memo.push(v);
            self.acc.add(v / n as f64);
            self.prefix.push(self.acc.value());
        }
        Ok(())
    }

    /// `Σ_{k=n0}^{n-1} G_k / k`.
    pub fn prefix_sum(&mut self, n: u64) -> Result<f64> {
        if n < self.n0 {
            return Err(Error::BelowStart { index: n, start: self.n0 });
        }
        if n > self.n0 {
            self.materialize(n - 1)?;
        }
        Ok(self.prefix[(n - self.n0) as usize])
    }

    /// `G_{n,r} = G_n/|r| + Σ_{k=n0}^{n-1} G_k/k`.
    pub fn twisted(&mut self, r: f64, n: u64) -> Result<f64> {
        if r == 0.0 || !r.is_finite() {
            return Err(invalid("r", "must be a nonzero finite real"));
        }
        let s = self.prefix_sum(n)?;
        let g = self.eval(n)?;
        Ok(g / r.abs() + s)
    }

    /// The weight `n ↦ G_{n,r}` as a sequence in its own right.
    pub fn twisted_seq(&self, r: f64, upto: u64) -> Result<WeightSeq> {
        if r == 0.0 || !r.is_finite() {
            return Err(invalid("r", "must be a nonzero finite real"));
        }
        let mut base = self.clone();
        base.materialize(upto)?;
        let table: Vec<f64> =
            (self.n0..=upto).map(|n| base.memo[(n - self.n0) as usize] / r.abs() + base.prefix[(n - self.n0) as usize]).collect();
        let table = Arc::new(table);
        let n0 = self.n0;
        let fallback = Box::new(self.clone());
        let name = alloc::format!("G_(n,{r}) of {}", self.name());
        WeightSeq::from_fn(name, n0, move |n| match table.get((n - n0) as usize) {
            Some(&v) => v,
            None => {
                // Beyond the table: recompute the prefix on the fly.
                let mut acc = KahanSum::new();
                for k in n0..n {
                    acc.add(fallback.compute(k) / k as f64);
                }
                fallback.compute(n) / r.abs() + acc.value()
            }
        })
    }

    /// `G_n^{(p)} = G_n^{2(p-1)/p} · n^{(2-p)/p}` for `1 < p ≤ 2`.
    pub fn interpolated(&self, p: f64, n: u64) -> Result<f64> {
        let (eg, en) = interpolation_exponents(p)?;
        let g = self.value(n)?;
        Ok(interpolate_value(g, n, eg, en))
    }

    /// The interpolated weight as a sequence; symbolic when `self` is.
    pub fn interpolated_seq(&self, p: f64) -> Result<WeightSeq> {
        let (eg, en) = interpolation_exponents(p)?;
        let formula = match &self.formula {
            Formula::Expr(e) => Formula::Expr(e.powf(eg).mul(&WeightExpr::power(en))),
            Formula::Custom { name, f } => {
                let f = f.clone();
                Formula::Custom {
                    name: alloc::format!("({name})^({p})"),
                    f: Arc::new(move |n| interpolate_value(f(n), n, eg, en)),
                }
            }
        };
        let s = Self::raw(formula, self.n0);
        s.check_start()?;
        Ok(s)
    }

    /// The weight `(1/δ)·W_n`, with `n0` advanced until the value is at least 1.
    pub fn scaled(&self, delta: f64) -> Result<WeightSeq> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be a positive finite real"));
        }
        if delta == 1.0 {
            return Ok(self.clone());
        }
        let formula = match &self.formula {
            Formula::Expr(e) => Formula::Expr(e.scaled(1.0 / delta)),
            Formula::Custom { name, f } => {
                let f = f.clone();
                Formula::Custom { name: alloc::format!("({name})/{delta}"), f: Arc::new(move |n| f(n) / delta) }
            }
        };
        let mut s = Self::raw(formula, self.n0);
        let limit = self.n0.saturating_add(START_SEARCH_LIMIT);
        while s.compute(s.n0) < 1.0 {
            s.n0 += 1;
            if s.n0 > limit {
                return Err(Error::NoStartIndex(s.name()));
            }
        }
        Ok(s)
    }
}

fn interpolation_exponents(p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(invalid("p", "must lie in (1, 2]"));
    }
    Ok((2.0 * (p - 1.0) / p, (2.0 - p) / p))
}

fn interpolate_value(g: f64, n: u64, eg: f64, en: f64) -> f64 {
    let mut v = if eg == 1.0 { g } else { math::powf(g, eg) };
    if en != 0.0 {
        v *= math::powf(n as f64, en);
    }
    v
}

/// Smallest `n ≥ 3` at which the formula is at least 1 and nondecreasing over
/// the next [`START_LOOKAHEAD`] indices.
fn default_start(f: &dyn Fn(u64) -> f64, name: &str) -> Result<u64> {
    let ok = |n: u64| {
        let v = f(n);
        v.is_finite() && v > 0.0
    };
    let mut n = 3;
    while n <= START_SEARCH_LIMIT {
        let v = f(n);
        if !(ok(n) && v >= 1.0) {
            n += 1;
            continue;
        }
        let mut prev = v;
        let mut bad = None;
        for j in 1..=START_LOOKAHEAD {
            let w = f(n + j);
            if !(w.is_finite() && w >= prev) {
                bad = Some(n + j);
                break;
            }
            prev = w;
        }
        match bad {
            None => return Ok(n),
            Some(m) => n = m,
        }
    }
    Err(Error::NoStartIndex(name.to_string()))
}
