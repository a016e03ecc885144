//! Sample spaces, measure-preserving maps, vector-valued fields and the
//! operators acting on them.
//!
//! A field is a table of vectors in `ℂ^d`, one per grid point or atom, so
//! `L_p(μ; ℂ^d)` is realized with the uniform probability on the points.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, PowerCache};
use crate::math::{self, Turn};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SampleSpace {
    /// Uniform probability on `m` atoms.
    Finite { m: usize },
    /// Lebesgue measure on `[0, 1)` sampled at `x_i = i / points`.
    CircleGrid { points: usize },
    /// Lebesgue measure on `[0, 1)` sampled at seeded uniform points.
    CircleMc { count: usize, seed: u64 },
}

impl SampleSpace {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SampleSpace::Finite { m } if m < 1 => Err(invalid("m", "finite spaces need at least one atom")),
            SampleSpace::CircleGrid { points } if points < 2 => Err(invalid("points", "circle grids need at least two points")),
            SampleSpace::CircleMc { count, .. } if count < 1 => Err(invalid("count", "need at least one sample point")),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            SampleSpace::Finite { m } => m,
            SampleSpace::CircleGrid { points } => points,
            SampleSpace::CircleMc { count, .. } => count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_circle(&self) -> bool {
        !matches!(self, SampleSpace::Finite { .. })
    }

    /// Whether points are permuted by index maps (grid or atoms).
    pub fn is_indexed(&self) -> bool {
        !matches!(self, SampleSpace::CircleMc { .. })
    }

    /// Circle coordinates in turns (`[0, 1)`); atoms map to `i / m`.
    pub fn coordinates(&self) -> Vec<f64> {
        match *self {
            SampleSpace::Finite { m } => (0..m).map(|i| i as f64 / m as f64).collect(),
            SampleSpace::CircleGrid { points } => (0..points).map(|i| i as f64 / points as f64).collect(),
            SampleSpace::CircleMc { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count).map(|_| StandardUniform.sample(&mut rng)).collect()
            }
        }
    }

    pub fn point(&self, i: usize) -> Point {
        match self {
            SampleSpace::CircleMc { .. } => Point::Circle(self.coordinates()[i]),
            _ => Point::Atom(i),
        }
    }
}

/// A location in a sample space: an atom/grid index or a circle coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Atom(usize),
    Circle(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transformation {
    Identity,
    /// `x ↦ x + θ mod 1`.
    Rotation { theta: Turn },
    /// `x ↦ 2x mod 1`.
    Doubling,
    /// `i ↦ pi[i]` on atoms (0-based).
    Permutation { pi: Vec<usize> },
}

impl Transformation {
    /// The induced map on indices of a grid or finite space.
    pub fn index_map(&self, space: &SampleSpace) -> Result<Vec<usize>> {
        self.power_map(space, 1)
    }

    /// The index map of the `n`-fold composition.
    pub fn power_map(&self, space: &SampleSpace, n: u64) -> Result<Vec<usize>> {
        if !space.is_indexed() {
            return Err(Error::Incompatible("index maps need a grid or finite space".to_string()));
        }
        let size = space.len();
        match self {
            Transformation::Identity => Ok((0..size).collect()),
            Transformation::Rotation { theta } => {
                let shift = grid_shift(theta, size)?;
                let s = ((shift as u128 * n as u128) % size as u128) as usize;
                Ok((0..size).map(|i| (i + s) % size).collect())
            }
            Transformation::Doubling => {
                if !space.is_circle() {
                    return Err(Error::Incompatible("the doubling map acts on the circle".to_string()));
                }
                let f = mod_pow(2, n, size as u64);
                Ok((0..size).map(|i| ((i as u128 * f as u128) % size as u128) as usize).collect())
            }
            Transformation::Permutation { pi } => {
                if pi.len() != size {
                    return Err(Error::LengthMismatch { expected: size, found: pi.len() });
                }
                let mut seen = vec![false; size];
                for &j in pi {
                    if j >= size || core::mem::replace(&mut seen[j], true) {
                        return Err(invalid("pi", "not a permutation"));
                    }
                }
                Ok(compose_power(pi, n))
            }
        }
    }

    /// One step of the map at a point.
    pub fn step(&self, space: &SampleSpace, p: Point, map: Option<&[usize]>) -> Result<Point> {
        match p {
            Point::Atom(i) => {
                let m = map.ok_or_else(|| Error::Incompatible("atom step without an index map".to_string()))?;
                Ok(Point::Atom(m[i]))
            }
            Point::Circle(x) => match self {
                Transformation::Identity => Ok(p),
                Transformation::Rotation { theta } => Ok(Point::Circle(math::frac(x + theta.as_f64()))),
                Transformation::Doubling => Ok(Point::Circle(math::frac(2.0 * x))),
                Transformation::Permutation { .. } => {
                    let _ = space;
                    Err(Error::Incompatible("permutations act on atoms only".to_string()))
                }
            },
        }
    }

    /// Pushforward of the uniform weights equals the uniform weights.
    pub fn is_measure_preserving(&self, space: &SampleSpace) -> Result<bool> {
        if !space.is_indexed() {
            return Ok(matches!(self, Transformation::Identity | Transformation::Rotation { .. } | Transformation::Doubling));
        }
        let map = self.index_map(space)?;
        let mut hits = vec![0u32; map.len()];
        for &j in &map {
            hits[j] += 1;
        }
        Ok(hits.iter().all(|&h| h == 1))
    }
}

fn grid_shift(theta: &Turn, size: usize) -> Result<usize> {
    match *theta {
        Turn::Rational { num, den } if size as u64 % den == 0 => Ok((num * (size as u64 / den)) as usize),
        Turn::Real(t) => {
            let s = t * size as f64;
            if s == math::floor(s) {
                Ok((s as usize) % size)
            } else {
                Err(Error::Incompatible("rotation angle is not a multiple of the grid spacing".to_string()))
            }
        }
        _ => Err(Error::Incompatible("rotation angle is not a multiple of the grid spacing".to_string())),
    }
}

fn mod_pow(base: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1 % m;
    let mut b = base % m;
    while e > 0 {
        if e & 1 == 1 {
            out = ((out as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    out
}

fn compose_power(map: &[usize], mut n: u64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..map.len()).collect();
    let mut sq = map.to_vec();
    while n > 0 {
        if n & 1 == 1 {
            out = out.iter().map(|&i| sq[i]).collect();
        }
        sq = sq.iter().map(|&i| sq[i]).collect();
        n >>= 1;
    }
    out
}

/// Vectors in `ℂ^d` attached to every point of a sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub space: SampleSpace,
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl VectorField {
    pub fn zeros(space: SampleSpace, dim: usize) -> Self {
        let n = space.len() * dim;
        Self { space, dim, data: vec![ZERO; n] }
    }

    pub fn from_fn(space: SampleSpace, dim: usize, mut f: impl FnMut(usize, &mut [Complex64])) -> Self {
        let mut out = Self::zeros(space, dim);
        for (i, chunk) in out.data.chunks_mut(dim).enumerate() {
            f(i, chunk);
        }
        out
    }

    /// `h(x)·g` for a scalar table `h` and a fixed vector `g`.
    pub fn rank_one(space: SampleSpace, h: &[Complex64], g: &[Complex64]) -> Self {
        Self::from_fn(space, g.len(), |i, out| {
            for (o, gj) in out.iter_mut().zip(g) {
                *o = h[i] * gj;
            }
        })
    }

    /// Independent complex Gaussian entries.
    pub fn random(space: SampleSpace, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(space, dim, |_, out| {
            for z in out.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *z = Complex64::new(re, im);
            }
        })
    }

    pub fn points(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn at(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn at_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.space != other.space || self.dim != other.dim {
            return Err(Error::Incompatible("fields live on different spaces or dimensions".to_string()));
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c·other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    /// Euclidean norm of the vector at each point.
    pub fn pointwise_norms(&self) -> Vec<f64> {
        self.data.chunks(self.dim).map(|c| math::sqrt(c.iter().map(|z| z.norm_sqr()).sum())).collect()
    }

    /// `‖f‖_p = ((1/N) Σ_i ‖f(x_i)‖^p)^{1/p}`.
    pub fn norm_p(&self, p: f64) -> f64 {
        let n = self.points();
        if n == 0 {
            return 0.0;
        }
        let norms = self.pointwise_norms();
        if p == 2.0 {
            let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
            return math::sqrt(s / n as f64);
        }
        if p.is_infinite() {
            return norms.iter().fold(0.0, |m, &x| f64::max(m, x));
        }
        let s: f64 = norms.iter().map(|&x| math::powf(x, p)).sum();
        math::powf(s / n as f64, 1.0 / p)
    }

    pub fn norm2(&self) -> f64 {
        self.norm_p(2.0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }
}

/// Operator-valued function `ω ↦ T_ω` over a base transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Fibers {
    Constant { matrix: CMatrix },
    /// One matrix per atom or grid point.
    PerAtom { matrices: Vec<CMatrix> },
    /// `T_x = matrices[i]` for `x ∈ [breaks[i], breaks[i+1])`, `breaks[0] = 0`.
    Step { breaks: Vec<f64>, matrices: Vec<CMatrix> },
}

#[derive(Debug, Clone)]
pub struct Cocycle {
    pub base: Transformation,
    pub space: SampleSpace,
    pub fibers: Fibers,
    map: Option<Vec<usize>>,
    coords: Vec<f64>,
    dim: usize,
}

impl Cocycle {
    pub fn new(base: Transformation, space: SampleSpace, fibers: Fibers) -> Result<Self> {
        space.validate()?;
        let mats: Vec<&CMatrix> = match &fibers {
            Fibers::Constant { matrix } => vec![matrix],
            Fibers::PerAtom { matrices } => {
                if !space.is_indexed() || matrices.len() != space.len() {
                    return Err(Error::LengthMismatch { expected: space.len(), found: matrices.len() });
                }
                matrices.iter().collect()
            }
            Fibers::Step { breaks, matrices } => {
                if breaks.len() != matrices.len() || breaks.first() != Some(&0.0) || breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("breaks", "step fibers need increasing breakpoints starting at 0"));
                }
                matrices.iter().collect()
            }
        };
        let dim = mats.first().map(|m| m.dim()).ok_or(Error::Empty("fibers"))?;
        if mats.iter().any(|m| m.dim() != dim) {
            return Err(Error::Incompatible("fiber dimensions differ".to_string()));
        }
        if !mats.iter().all(|m| m.is_contraction()) {
            return Err(Error::MissingFlag("every fiber must be a contraction"));
        }
        let map = if space.is_indexed() { Some(base.index_map(&space)?) } else { None };
        let coords = space.coordinates();
        Ok(Self { base, space, fibers, map, coords, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_map(&self) -> Option<&[usize]> {
        self.map.as_deref()
    }

    pub fn start(&self, i: usize) -> Point {
        if self.space.is_indexed() {
            Point::Atom(i)
        } else {
            Point::Circle(self.coords[i])
        }
    }

    pub fn step(&self, p: Point) -> Point {
        self.base.step(&self.space, p, self.map.as_deref()).expect("cocycle points are compatible with the base map")
    }

    pub fn coordinate(&self, p: Point) -> f64 {
        match p {
            Point::Atom(i) => self.coords[i],
            Point::Circle(x) => x,
        }
    }

    pub fn fiber(&self, p: Point) -> &CMatrix {
        match &self.fibers {
            Fibers::Constant { matrix } => matrix,
            Fibers::PerAtom { matrices } => match p {
                Point::Atom(i) => &matrices[i],
                Point::Circle(_) => unreachable!("per-atom fibers are only built on indexed spaces"),
            },
            Fibers::Step { breaks, matrices } => {
                let x = self.coordinate(p);
                let i = breaks.partition_point(|&b| b <= x).saturating_sub(1);
                &matrices[i]
            }
        }
    }

    /// `T_ω T_{αω} ⋯ T_{α^{n−1}ω}`.
    pub fn product(&self, omega: Point, n: u64) -> CMatrix {
        let mut out = CMatrix::identity(self.dim);
        let mut p = omega;
        for _ in 0..n {
            out = out.mul(self.fiber(p));
            p = self.step(p);
        }
        out
    }

    /// `α^n ω`.
    pub fn advance(&self, omega: Point, n: u64) -> Point {
        let mut p = omega;
        for _ in 0..n {
            p = self.step(p);
        }
        p
    }
}

#[derive(Debug, Clone)]
pub enum OperatorKind {
    Koopman(Transformation),
    /// `(Af)(x) = A f(x)`.
    Matrix(CMatrix),
    /// `(Pf)(i) = Σ_j P_ij f(j)` on a finite space.
    Markov(CMatrix),
    /// `(𝒯f)(ω) = T_ω f(αω)`.
    Skew(Cocycle),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorFlags {
    pub contraction: bool,
    /// `max_{n ≤ horizon} ‖T^n‖` when audited.
    pub power_bound: Option<f64>,
    pub audit_horizon: u64,
    pub dunford_schwartz: bool,
    pub measure_preserving: Option<bool>,
}

/// Default horizon of the power-bound audit.
pub const AUDIT_HORIZON: u64 = 256;

#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub kind: OperatorKind,
    pub space: SampleSpace,
    pub dim: usize,
    pub flags: OperatorFlags,
    cache: Option<PowerCache>,
    map: Option<Vec<usize>>,
}

impl LinearOperator {
    pub fn koopman(t: Transformation, space: SampleSpace, dim: usize) -> Result<Self> {
        space.validate()?;
        let map = t.index_map(&space)?;
        let mp = t.is_measure_preserving(&space)?;
        let flags = OperatorFlags {
            contraction: mp,
            power_bound: if mp { Some(1.0) } else { None },
            audit_horizon: 0,
            dunford_schwartz: mp,
            measure_preserving: Some(mp),
        };
        Ok(Self { kind: OperatorKind::Koopman(t), space, dim, flags, cache: None, map: Some(map) })
    }

    pub fn matrix(a: CMatrix, space: SampleSpace) -> Result<Self> {
        space.validate()?;
        let dim = a.dim();
        let norm = a.operator_norm();
        let flags = OperatorFlags {
            contraction: norm <= 1.0 + 1e-12,
            power_bound: Some(audit_power_bound(&a, AUDIT_HORIZON)),
            audit_horizon: AUDIT_HORIZON,
            dunford_schwartz: false,
            measure_preserving: None,
        };
        let cache = PowerCache::new(&a);
        Ok(Self { kind: OperatorKind::Matrix(a), space, dim, flags, cache: Some(cache), map: None })
    }

    pub fn markov(p: CMatrix, dim: usize) -> Result<Self> {
        let m = p.dim();
        for i in 0..m {
            for j in 0..m {
                let z = p[(i, j)];
                if z.im != 0.0 || z.re < 0.0 {
                    return Err(invalid("markov", "entries must be nonnegative reals"));
                }
            }
        }
        let row_ok = (0..m).all(|i| ((0..m).map(|j| p[(i, j)].re).sum::<f64>() - 1.0).abs() <= 1e-12);
        let col_ok = (0..m).all(|j| ((0..m).map(|i| p[(i, j)].re).sum::<f64>() - 1.0).abs() <= 1e-12);
        if !row_ok && !col_ok {
            return Err(invalid("markov", "matrix is neither row- nor column-stochastic"));
        }
        let ds = row_ok && col_ok;
        let contraction = ds || p.operator_norm() <= 1.0 + 1e-12;
        let flags = OperatorFlags {
            contraction,
            power_bound: Some(audit_power_bound(&p, AUDIT_HORIZON)),
            audit_horizon: AUDIT_HORIZON,
            dunford_schwartz: ds,
            measure_preserving: None,
        };
        let cache = PowerCache::new(&p);
        Ok(Self { kind: OperatorKind::Markov(p), space: SampleSpace::Finite { m }, dim, flags, cache: Some(cache), map: None })
    }

    pub fn skew(c: Cocycle) -> Result<Self> {
        if !c.space.is_indexed() {
            return Err(Error::Incompatible("skew operators act on grid or finite spaces".to_string()));
        }
        let mp = c.base.is_measure_preserving(&c.space)?;
        let flags = OperatorFlags {
            contraction: mp,
            power_bound: if mp { Some(1.0) } else { None },
            audit_horizon: 0,
            dunford_schwartz: false,
            measure_preserving: Some(mp),
        };
        let map = c.index_map().map(|m| m.to_vec());
        Ok(Self { space: c.space.clone(), dim: c.dim(), kind: OperatorKind::Skew(c), flags, cache: None, map })
    }

    pub fn identity(space: SampleSpace, dim: usize) -> Result<Self> {
        Self::matrix(CMatrix::identity(dim), space)
    }

    pub fn is_admissible_for_transforms(&self) -> bool {
        self.flags.contraction || self.flags.power_bound.is_some_and(|b| b.is_finite())
    }

    /// Prepares cached powers for exponents up to `max_exponent`.
    pub fn prepare(&mut self, max_exponent: u64) {
        if let Some(c) = &mut self.cache {
            c.prepare(max_exponent);
        }
    }

    fn check(&self, f: &VectorField) -> Result<()> {
        if f.space != self.space || f.dim != self.dim {
            return Err(Error::Incompatible("field and operator live on different spaces or dimensions".to_string()));
        }
        Ok(())
    }

    pub fn apply(&self, f: &VectorField) -> Result<VectorField> {
        self.apply_power(1, f)
    }

    /// `T^n f`.
    pub fn apply_power(&self, n: u64, f: &VectorField) -> Result<VectorField> {
        self.check(f)?;
        if n == 0 {
            return Ok(f.clone());
        }
        let d = self.dim;
        match &self.kind {
            OperatorKind::Koopman(t) => {
                let map = if n == 1 { self.map.clone().expect("koopman operators carry an index map") } else { t.power_map(&self.space, n)? };
                Ok(VectorField::from_fn(self.space.clone(), d, |i, out| out.copy_from_slice(f.at(map[i]))))
            }
            OperatorKind::Matrix(a) => {
                let local;
                let cache = match &self.cache {
                    Some(c) if c.covers(n) => c,
                    _ => {
                        let mut c = PowerCache::new(a);
                        c.prepare(n);
                        local = c;
                        &local
                    }
                };
                let mut out = VectorField::zeros(self.space.clone(), d);
                for i in 0..f.points() {
                    cache.apply_ready(n, f.at(i), out.at_mut(i));
                }
                Ok(out)
            }
            OperatorKind::Markov(p) => {
                let local;
                let cache = match &self.cache {
                    Some(c) if c.covers(n) => c,
                    _ => {
                        let mut c = PowerCache::new(p);
                        c.prepare(n);
                        local = c;
                        &local
                    }
                };
                let m = f.points();
                let mut out = VectorField::zeros(self.space.clone(), d);
                let mut col = vec![ZERO; m];
                let mut res = vec![ZERO; m];
                for c in 0..d {
                    for i in 0..m {
                        col[i] = f.at(i)[c];
                    }
                    cache.apply_ready(n, &col, &mut res);
                    for i in 0..m {
                        out.at_mut(i)[c] = res[i];
                    }
                }
                Ok(out)
            }
            OperatorKind::Skew(c) => {
                let map = c.base.power_map(&self.space, n)?;
                let mut tmp = vec![ZERO; d];
                Ok(VectorField::from_fn(self.space.clone(), d, |i, out| {
                    let prod = c.product(Point::Atom(i), n);
                    prod.mul_vec(f.at(map[i]), &mut tmp);
                    out.copy_from_slice(&tmp);
                }))
            }
        }
    }
}

/// `max_{1 ≤ n ≤ horizon} ‖A^n‖`, a finite audit rather than a proof.
pub fn audit_power_bound(a: &CMatrix, horizon: u64) -> f64 {
    let mut p = CMatrix::identity(a.dim());
    let mut worst: f64 = 1.0;
    for _ in 0..horizon {
        p = p.mul(a);
        worst = worst.max(p.operator_norm());
        if !worst.is_finite() {
            break;
        }
    }
    worst
}
