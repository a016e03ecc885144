//! FFT-backed circle evaluation.

use std::cell::RefCell;

use rustfft::FftPlanner;
use wslln_core::circle::CircleEvaluator;
use wslln_core::Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Bins `c` at `e mod M`, then one unnormalized inverse FFT gives
/// `Σ c e^{2πi e j/M}` at every `j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FftEvaluator;

impl CircleEvaluator for FftEvaluator {
    fn eval_grid(&self, terms: &[(u64, Complex64)], m: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let mm = m as u64;
        for &(e, c) in terms {
            buf[(e % mm) as usize] += c;
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m));
        fft.process(&mut buf);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wslln_core::circle::DirectEvaluator;

    #[test]
    fn matches_direct_sums() {
        let terms: Vec<(u64, Complex64)> =
            (1..=300u64).map(|k| (k * k + 3, Complex64::new((k as f64).sin(), 1.0 / k as f64))).collect();
        for m in [1024usize, 1000, 4096] {
            let fast = FftEvaluator.eval_grid(&terms, m);
            let slow = DirectEvaluator.eval_grid(&terms, m);
            let scale: f64 = terms.iter().map(|t| t.1.norm()).sum();
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12 * scale, "M = {m}: {err:e}");
        }
    }
}
