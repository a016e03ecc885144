//! Indexed families of vector fields `{f_k}_{k ≥ 1}` fed to the averaging
//! and series machinery.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circle;
use crate::error::{Error, Result};
use crate::math::{self, Turn};
use crate::operators::{SampleSpace, VectorField};

pub trait FieldSeq {
    fn space(&self) -> &SampleSpace;
    fn dim(&self) -> usize;

    /// `acc += c · f_k`.
    fn add_to(&self, k: u64, c: Complex64, acc: &mut VectorField) -> Result<()>;

    fn is_zero(&self) -> bool {
        false
    }

    fn field(&self, k: u64) -> Result<VectorField> {
        let mut out = VectorField::zeros(self.space().clone(), self.dim());
        self.add_to(k, Complex64::new(1.0, 0.0), &mut out)?;
        Ok(out)
    }
}

/// `f_k(x) = k^s e^{2πi k x} e_1`. Orthogonal with `‖f_k‖₂ = k^s` on a grid
/// of `M > k` points and on the circle itself.
#[derive(Debug, Clone)]
pub struct Characters {
    space: SampleSpace,
    dim: usize,
    amplitude: f64,
    coords: Vec<f64>,
    twiddles: Vec<Complex64>,
}

impl Characters {
    pub fn new(space: SampleSpace, dim: usize, amplitude: f64) -> Result<Self> {
        space.validate()?;
        if !space.is_circle() {
            return Err(Error::Incompatible("characters live on the circle".into()));
        }
        if dim == 0 {
            return Err(Error::Empty("dim"));
        }
        let coords = space.coordinates();
        let twiddles = match space {
            SampleSpace::CircleGrid { points } => circle::twiddles(points),
            _ => Vec::new(),
        };
        Ok(Self { space, dim, amplitude, coords, twiddles })
    }

    /// The orthogonal family `√k e^{2πikx}`.
    pub fn sqrt_k(space: SampleSpace, dim: usize) -> Result<Self> {
        Self::new(space, dim, 0.5)
    }
}

impl FieldSeq for Characters {
    fn space(&self) -> &SampleSpace {
        &self.space
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn add_to(&self, k: u64, c: Complex64, acc: &mut VectorField) -> Result<()> {
        let s = c * if self.amplitude == 0.0 { 1.0 } else { math::powf(k as f64, self.amplitude) };
        match self.space {
            SampleSpace::CircleGrid { points } => {
                let m = points as u64;
                let kr = k % m;
                for j in 0..points {
                    let idx = if m <= u32::MAX as u64 { (kr * j as u64) % m } else { ((kr as u128 * j as u128) % m as u128) as u64 };
                    acc.at_mut(j)[0] += s * self.twiddles[idx as usize];
                }
            }
            _ => {
                for (j, &x) in self.coords.iter().enumerate() {
                    acc.at_mut(j)[0] += s * Turn::Real(x).pow(k);
                }
            }
        }
        Ok(())
    }
}

/// `f_k = fields[k-1]`.
#[derive(Debug, Clone)]
pub struct Stored {
    fields: Vec<VectorField>,
}

impl Stored {
    pub fn new(fields: Vec<VectorField>) -> Result<Self> {
        let first = fields.first().ok_or(Error::Empty("fields"))?;
        for f in &fields[1..] {
            f.check_compatible(first)?;
        }
        Ok(Self { fields })
    }

    /// `count` independent Gaussian fields; field `k` uses seed `seed + k`.
    pub fn random(space: SampleSpace, dim: usize, count: usize, seed: u64) -> Result<Self> {
        Self::new((1..=count as u64).map(|k| VectorField::random(space.clone(), dim, seed.wrapping_add(k))).collect())
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

impl FieldSeq for Stored {
    fn space(&self) -> &SampleSpace {
        &self.fields[0].space
    }

    fn dim(&self) -> usize {
        self.fields[0].dim
    }

    fn add_to(&self, k: u64, c: Complex64, acc: &mut VectorField) -> Result<()> {
        let f = k.checked_sub(1).and_then(|i| self.fields.get(i as usize)).ok_or_else(|| {
            Error::Precondition(alloc::format!("f_{k} is undefined; {} fields are stored", self.fields.len()))
        })?;
        acc.axpy(c, f);
        Ok(())
    }
}

/// `f_k = g` for every `k`.
#[derive(Debug, Clone)]
pub struct Constant(pub VectorField);

impl FieldSeq for Constant {
    fn space(&self) -> &SampleSpace {
        &self.0.space
    }

    fn dim(&self) -> usize {
        self.0.dim
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn add_to(&self, _k: u64, c: Complex64, acc: &mut VectorField) -> Result<()> {
        acc.axpy(c, &self.0);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Zero {
    pub space: SampleSpace,
    pub dim: usize,
}

impl FieldSeq for Zero {
    fn space(&self) -> &SampleSpace {
        &self.space
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn is_zero(&self) -> bool {
        true
    }

    fn add_to(&self, _k: u64, _c: Complex64, _acc: &mut VectorField) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characters_are_orthogonal_on_the_grid() {
        let space = SampleSpace::CircleGrid { points: 64 };
        let ch = Characters::sqrt_k(space.clone(), 2).unwrap();
        let f3 = ch.field(3).unwrap();
        let f5 = ch.field(5).unwrap();
        assert!((f3.norm2() - math::sqrt(3.0)).abs() < 1e-14);
        let inner: Complex64 = f3.data.chunks(2).zip(f5.data.chunks(2)).map(|(a, b)| a[0] * b[0].conj()).sum();
        assert!(inner.norm() < 1e-12);
    }

    #[test]
    fn stored_rejects_out_of_range() {
        let s = Stored::random(SampleSpace::Finite { m: 3 }, 2, 4, 9).unwrap();
        assert!(s.field(4).is_ok());
        assert!(s.field(5).is_err());
        assert!(s.field(0).is_err());
    }
}
