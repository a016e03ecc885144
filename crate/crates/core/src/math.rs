//! Scalar helpers: `libm`-backed elementary functions, compensated
//! accumulators and exact-turn phases on the unit circle.

use core::f64::consts::PI;
use core::ops::AddAssign;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const TAU: f64 = 2.0 * PI;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `e^{2πi t}`.
#[inline]
pub fn cis_turns(t: f64) -> Complex64 {
    let (s, c) = libm::sincos(TAU * t);
    Complex64::new(c, s)
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - floor(x);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for KahanSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex numbers (real and imaginary parts separately).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexKahan {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahan {
    pub const fn new() -> Self {
        Self { re: KahanSum::new(), im: KahanSum::new() }
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// A point of the unit circle, `λ = e^{2πi t}`, stored as a turn so that
/// powers `λ^n` stay exact for rational turns `j/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Turn {
    /// `t = num / den` with `0 <= num < den`.
    Rational { num: u64, den: u64 },
    Real(f64),
}

impl Turn {
    pub fn rational(num: u64, den: u64) -> Self {
        assert!(den > 0, "turn denominator must be positive");
        Turn::Rational { num: num % den, den }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Turn::Real(frac(libm::atan2(z.im, z.re) / TAU))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Turn::Rational { num, den } => num as f64 / den as f64,
            Turn::Real(t) => frac(t),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.pow(1)
    }

    /// `λ^n`; exact integer reduction for rational turns.
    pub fn pow(&self, n: u64) -> Complex64 {
        match *self {
            Turn::Rational { num, den } => {
                let r = ((n as u128 % den as u128) * num as u128 % den as u128) as u64;
                cis_turns(r as f64 / den as f64)
            }
            Turn::Real(t) => cis_turns(frac(n as f64 * t)),
        }
    }

    /// The turn of `λ^n` (used for orbits of rotations).
    pub fn times(&self, n: u64) -> Turn {
        match *self {
            Turn::Rational { num, den } => {
                Turn::Rational { num: ((n as u128 % den as u128) * num as u128 % den as u128) as u64, den }
            }
            Turn::Real(t) => Turn::Real(frac(n as f64 * t)),
        }
    }
}
