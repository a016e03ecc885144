//! Rayon drivers. Work items are independent and `collect` keeps item
//! order, so every reduction runs in the same order at any thread count.

use rayon::prelude::*;
use wslln_core::circle;
use wslln_core::fields::FieldSeq;
use wslln_core::sigma::{self, SigmaBracket};
use wslln_core::stochastics::{self, HilbertSetup, MCEstimate, PointTrace, RandomModulation, SupSample};
use wslln_core::{Complex64, ModulationSeq, VectorField, WeightSeq};

use crate::error::Result;
use crate::fft::FftEvaluator;

/// Grid indices per parallel chunk; fixed so chunk boundaries never depend
/// on the pool size.
pub const CHUNK: usize = 512;

#[allow(clippy::too_many_arguments)]
pub fn sup_stat(
    law: &RandomModulation,
    g: &WeightSeq,
    entries: &[u64],
    ladder: &[u64],
    m: usize,
    samples: u64,
    allow_coarse: bool,
) -> Result<(MCEstimate, Vec<SupSample>)> {
    if samples == 0 {
        return Err(wslln_core::Error::Empty("samples").into());
    }
    let all: Vec<SupSample> = (0..samples)
        .into_par_iter()
        .map(|y| stochastics::sup_stat_sample(law, y, g, entries, ladder, m, &FftEvaluator, allow_coarse))
        .collect::<Result<_, _>>()?;
    Ok((stochastics::summarize_sup(&all, ladder, law.seed)?, all))
}

pub fn random_hilbert(setup: &HilbertSetup, a: &ModulationSeq, samples: u64, points: usize, seed: u64) -> Result<(MCEstimate, Vec<PointTrace>)> {
    setup.validate()?;
    if samples == 0 {
        return Err(wslln_core::Error::Empty("samples").into());
    }
    let entries = &setup.entries[..setup.n_max() as usize];
    let coeffs: Vec<Vec<Complex64>> = (0..samples).into_par_iter().map(|y| a.sample_values(y, entries)).collect();
    let traces: Vec<PointTrace> =
        (0..points).into_par_iter().map(|w| stochastics::random_hilbert_point(setup, &coeffs, w)).collect::<Result<_, _>>()?;
    Ok((stochastics::summarize_hilbert(setup, &traces, seed)?, traces))
}

pub fn sigma_grid(g: &WeightSeq, entries: &[u64], m: usize, n: u64) -> Result<Vec<SigmaBracket>> {
    let chunks: Vec<Vec<SigmaBracket>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| sigma::sigma_grid_range(g, entries, m, n, c * CHUNK..((c + 1) * CHUNK).min(m)))
        .collect::<Result<_, _>>()?;
    Ok(chunks.concat())
}

/// `‖S_n‖_2` for every `n ≤ n_max`, `S_n = Σ_{k ≤ n} f_k`.
pub fn partial_sum_norms(fseq: &dyn FieldSeq, n_max: u64) -> Result<Vec<f64>> {
    let mut s = VectorField::zeros(fseq.space().clone(), fseq.dim());
    let mut out = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        fseq.add_to(k, Complex64::new(1.0, 0.0), &mut s)?;
        out.push(s.norm2());
    }
    Ok(out)
}

/// The requested grid, or the oversampled power of two for `degree`.
pub fn grid_for(degree: u64, requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| circle::required_grid(degree).next_power_of_two() as usize)
}
