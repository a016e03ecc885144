//! Small dense complex matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    /// Entries with independent standard complex Gaussian parts.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self { n, data }
    }

    /// A random matrix rescaled to operator norm `target`.
    pub fn random_with_norm(n: usize, seed: u64, target: f64) -> Self {
        let m = Self::random(n, seed);
        let s = target / m.operator_norm();
        m.scale(Complex64::new(s, 0.0))
    }

    /// Gram–Schmidt on the columns of [`CMatrix::random`].
    pub fn random_unitary(n: usize, seed: u64) -> Self {
        let m = Self::random(n, seed);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|i| m[(i, j)]).collect();
            for _ in 0..2 {
                for q in &cols {
                    let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= dot * qi;
                    }
                }
            }
            let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        let mut out = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            for (i, z) in c.iter().enumerate() {
                out[(i, j)] = *z;
            }
        }
        out
    }

    /// `U diag(d) U*` with a random unitary `U`.
    pub fn unitarily_diagonal(d: &[Complex64], seed: u64) -> Self {
        let u = Self::random_unitary(d.len(), seed);
        u.mul(&Self::diag(d)).mul(&u.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = ZERO;
            for j in 0..n {
                acc += row[j] * v[j];
            }
            out[i] = acc;
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| f64::max(m, (a - b).norm()))
    }

    /// Spectral norm by power iteration on `AᴴA`.
    pub fn operator_norm(&self) -> f64 {
        let n = self.n;
        if n == 0 || self.data.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        let b = self.adjoint().mul(self);
        // Deterministic start with no special alignment.
        let mut v: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * math::sqrt(i as f64 + 1.0))).collect();
        normalize(&mut v);
        let mut w = vec![ZERO; n];
        let mut lambda = 0.0;
        let mut stable = 0;
        for _ in 0..200_000 {
            b.mul_vec(&v, &mut w);
            let next: f64 = v.iter().zip(&w).map(|(a, c)| (a.conj() * c).re).sum();
            let nw = normalize(&mut w);
            core::mem::swap(&mut v, &mut w);
            if nw == 0.0 {
                return 0.0;
            }
            if (next - lambda).abs() <= 1e-14 * next {
                stable += 1;
                if stable >= 3 {
                    lambda = next;
                    break;
                }
            } else {
                stable = 0;
            }
            lambda = next;
        }
        math::sqrt(lambda.max(0.0))
    }

    pub fn is_contraction(&self) -> bool {
        self.operator_norm() <= 1.0 + 1e-12
    }
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Binary power ladder `A, A², A⁴, …`. Products are formed in ascending
/// order of the set bits of the exponent.
#[derive(Debug, Clone)]
pub struct PowerCache {
    ladder: Vec<CMatrix>,
}

impl PowerCache {
    pub fn new(a: &CMatrix) -> Self {
        Self { ladder: vec![a.clone()] }
    }

    pub fn base(&self) -> &CMatrix {
        &self.ladder[0]
    }

    fn ensure(&mut self, bits: usize) {
        while self.ladder.len() < bits {
            let last = self.ladder.last().expect("ladder is never empty");
            let sq = last.mul(last);
            self.ladder.push(sq);
        }
    }

    /// Makes `power`/`apply` available for exponents below `2^bits`.
    pub fn prepare(&mut self, max_exponent: u64) {
        let bits = (64 - max_exponent.leading_zeros()) as usize;
        self.ensure(bits.max(1));
    }

    pub fn power(&mut self, e: u64) -> CMatrix {
        self.prepare(e);
        self.power_ready(e)
    }

    pub fn covers(&self, e: u64) -> bool {
        (64 - e.leading_zeros()) as usize <= self.ladder.len()
    }

    /// `A^e`; the ladder must already cover `e`.
    pub fn power_ready(&self, e: u64) -> CMatrix {
        let mut out = CMatrix::identity(self.ladder[0].dim());
        let mut bit = 0;
        let mut rest = e;
        while rest > 0 {
            if rest & 1 == 1 {
                out = out.mul(&self.ladder[bit]);
            }
            rest >>= 1;
            bit += 1;
        }
        out
    }

    /// `A^e v` without forming the power.
    pub fn apply_ready(&self, e: u64, v: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(v);
        let mut tmp = v.to_vec();
        let mut bit = 0;
        let mut rest = e;
        while rest > 0 {
            if rest & 1 == 1 {
                self.ladder[bit].mul_vec(out, &mut tmp);
                out.copy_from_slice(&tmp);
            }
            rest >>= 1;
            bit += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = CMatrix::random_unitary(6, 11);
        assert!(u.adjoint().mul(&u).max_abs_diff(&CMatrix::identity(6)) < 1e-13);
        let d = [c(1.0), c(0.5), Complex64::new(0.0, 0.9)];
        let a = CMatrix::unitarily_diagonal(&d, 3);
        assert!((a.operator_norm() - 1.0).abs() < 1e-10);
        assert!(a.mul(&a.adjoint()).max_abs_diff(&a.adjoint().mul(&a)) < 1e-13);
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert!((CMatrix::identity(4).operator_norm() - 1.0).abs() < 1e-14);
        assert!((CMatrix::diag(&[c(0.3), c(-0.7)]).operator_norm() - 0.7).abs() < 1e-14);
        assert_eq!(CMatrix::zeros(3).operator_norm(), 0.0);
    }

    #[test]
    fn norm_matches_svd_oracle() {
        for seed in 0..10 {
            let m = CMatrix::random(5, seed);
            let dm = nalgebra::DMatrix::from_fn(5, 5, |i, j| {
                let z = m[(i, j)];
                nalgebra::Complex::new(z.re, z.im)
            });
            let svd = dm.svd(false, false);
            let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let ours = m.operator_norm();
            assert!((ours - top).abs() <= 1e-8 * top, "seed {seed}: {ours} vs {top}");
        }
    }

    #[test]
    fn power_cache_matches_repeated_products() {
        let a = CMatrix::random_with_norm(4, 7, 0.9);
        let mut cache = PowerCache::new(&a);
        let mut direct = CMatrix::identity(4);
        for n in 0..=16u64 {
            let p = cache.power(n);
            let scale = direct.frobenius().max(1e-300);
            assert!(p.max_abs_diff(&direct) <= 1e-12 * scale, "n = {n}");
            direct = direct.mul(&a);
        }
    }
}
