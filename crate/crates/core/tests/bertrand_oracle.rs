//! The Bertrand table against a numeric integral oracle.
//!
//! With `x = exp(exp(t))` the term `x^a (ln x)^b (lnln x)^c dx` becomes
//! `φ(t) dt`, `ln φ(t) = (a+1)e^t + (b+1)t + c ln t`. Block integrals of `φ`
//! over `[T, 2T]` and `[2T, 4T]` are computed by Simpson's rule in log space;
//! a shrinking block means the series converges.

use proptest::prelude::*;
use wslln_core::bertrand::bertrand;

fn ln_phi([a, b, c]: [f64; 3], t: f64) -> f64 {
    (a + 1.0) * t.exp() + (b + 1.0) * t + c * t.ln()
}

fn ln_block(e: [f64; 3], lo: f64, hi: f64) -> f64 {
    let n = 2000;
    let h = (hi - lo) / n as f64;
    let logs: Vec<f64> = (0..=n)
        .map(|i| {
            let w: f64 = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w.ln() + ln_phi(e, lo + i as f64 * h)
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln() + (h / 3.0).ln()
}

fn numeric_converges(e: [f64; 3]) -> bool {
    let t = 64.0;
    ln_block(e, 2.0 * t, 4.0 * t) < ln_block(e, t, 2.0 * t)
}

fn near_boundary() -> impl Strategy<Value = [f64; 3]> {
    let offset = prop_oneof![-0.5..-0.05f64, 0.05..0.5f64];
    (0usize..3, offset, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(level, s, u, v)| match level {
        0 => [-1.0 + s, u, v],
        1 => [-1.0, -1.0 + s, u],
        _ => [-1.0, -1.0, -1.0 + s],
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn table_matches_block_growth(e in near_boundary()) {
        prop_assert_eq!(bertrand(e), numeric_converges(e), "exponents {:?}", e);
    }
}

#[test]
fn oracle_sanity() {
    assert!(numeric_converges([-2.0, 0.0, 0.0]));
    assert!(!numeric_converges([-1.0, 0.0, 0.0]));
    assert!(numeric_converges([-1.0, -1.0, -1.2]));
    assert!(!numeric_converges([-1.0, -1.0, -0.8]));
}
