//! Convergence of Bertrand series `Σ k^a (ln k)^b (lnln k)^c` and integral
//! tail bounds for them.

use crate::math;
use crate::weight::WeightExpr;

/// Exponents closer than this to a boundary value count as equal to it.
pub const EXPONENT_TOL: f64 = 1e-12;

fn lt(x: f64, y: f64) -> bool {
    x < y - EXPONENT_TOL
}

fn eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= EXPONENT_TOL
}

/// Whether `Σ_k class(k)` converges.
pub fn converges(class: &WeightExpr) -> bool {
    if lt(class.superexp, 0.0) {
        return true;
    }
    if !eq(class.superexp, 0.0) {
        return false;
    }
    bertrand(class.exps)
}

/// The Bertrand table: `a < −1`, or `a = −1 ∧ b < −1`, or `a = b = −1 ∧ c < −1`.
pub fn bertrand([a, b, c]: [f64; 3]) -> bool {
    lt(a, -1.0) || (eq(a, -1.0) && (lt(b, -1.0) || (eq(b, -1.0) && lt(c, -1.0))))
}

/// An upper bound for `Σ_{j>K} class(j)`, available when the class has
/// `a < −1` and no `k^k` factor.
///
/// Writes the term as `x^{a+ε} h(x)` with `h(x) = x^{-ε} (ln x)^b (lnln x)^c`
/// nonincreasing on `[K, ∞)`, then integrates `x^{a+ε}`.
pub fn tail_bound(class: &WeightExpr, k: u64) -> Option<f64> {
    if class.superexp != 0.0 {
        return None;
    }
    let [a, b, c] = class.exps;
    if !lt(a, -1.0) {
        return None;
    }
    let x = k as f64;
    let lx = math::ln(x);
    if (b != 0.0 || c != 0.0) && lx <= 1.0 {
        return None;
    }
    let llx = math::ln(lx);
    let mut eps = 0.0;
    if b > 0.0 {
        eps += b / lx;
    }
    if c != 0.0 {
        if llx <= 0.0 {
            return None;
        }
        if c > 0.0 {
            eps += c / (lx * llx);
        }
    }
    let e = a + eps + 1.0;
    if e >= 0.0 {
        return None;
    }
    let mut h = class.scale * math::powf(x, -eps);
    if b != 0.0 {
        h *= math::powf(lx, b);
    }
    if c != 0.0 {
        h *= math::powf(llx, c);
    }
    Some(h * math::powf(x, e) / -e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::KahanSum;

    #[test]
    fn table() {
        assert!(bertrand([-2.0, 0.0, 0.0]));
        assert!(!bertrand([-1.0, 0.0, 0.0]));
        assert!(bertrand([-1.0, -1.5, 0.0]));
        assert!(!bertrand([-1.0, -1.0, -1.0]));
        assert!(bertrand([-1.0, -1.0, -1.01]));
        assert!(!bertrand([-0.5, -10.0, -10.0]));
        assert!(bertrand([-1.0 + 1e-14, -2.0, 0.0]));
    }

    #[test]
    fn superexp_dominates() {
        let c = WeightExpr { scale: 1.0, exps: [5.0, 5.0, 0.0], superexp: -0.5 };
        assert!(converges(&c));
        let c = WeightExpr { scale: 1.0, exps: [-5.0, 0.0, 0.0], superexp: 0.1 };
        assert!(!converges(&c));
    }

    #[test]
    fn tail_bound_dominates_truncated_tail() {
        for (exps, k) in [([-1.5, 0.0, 0.0], 100u64), ([-2.0, 1.0, 0.0], 50), ([-1.3, 2.0, 1.0], 100_000), ([-3.0, -1.0, 0.5], 100)] {
            let class = WeightExpr { scale: 1.0, exps, superexp: 0.0 };
            let bound = tail_bound(&class, k).unwrap();
            let tail: KahanSum = (k + 1..k + 2_000_000).map(|j| class.value_at(j as f64)).collect();
            assert!(tail.value() <= bound, "{exps:?}: {} > {bound}", tail.value());
        }
        // ζ(1.5) tail at 10⁶ is about 2/√10⁶.
        let b = tail_bound(&WeightExpr::power(-1.5), 1_000_000).unwrap();
        assert!((b - 2e-3).abs() < 1e-12);
        assert!(tail_bound(&WeightExpr::power(-1.0), 10).is_none());
    }
}
