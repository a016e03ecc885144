//! Operator descriptions in JSON:
//! `{kind, theta|matrix|pi|fibers, space: {kind, m|M}, seed}`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wslln_core::math::Turn;
use wslln_core::operators::Fibers;
use wslln_core::{CMatrix, Cocycle, Complex64, LinearOperator, SampleSpace, Transformation};

use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Finite {
        m: usize,
    },
    Circle {
        #[serde(rename = "M")]
        points: usize,
    },
    CircleMc {
        count: usize,
        seed: u64,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> SampleSpace {
        match *self {
            SpaceSpec::Finite { m } => SampleSpace::Finite { m },
            SpaceSpec::Circle { points } => SampleSpace::CircleGrid { points },
            SpaceSpec::CircleMc { count, seed } => SampleSpace::CircleMc { count, seed },
        }
    }
}

/// A turn as `[num, den]` or a real number of turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnSpec {
    Rational([u64; 2]),
    Real(f64),
}

impl TurnSpec {
    pub fn build(&self) -> Result<Turn> {
        match *self {
            TurnSpec::Rational([_, 0]) => Err(config("turn denominator is zero")),
            TurnSpec::Rational([n, d]) => Ok(Turn::rational(n, d)),
            TurnSpec::Real(t) => Ok(Turn::Real(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// Explicit rows, a seeded normal matrix `U diag(eigenvalues) U*`, a seeded
/// random matrix of a given norm, or a seeded [`spectral_contraction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<Entry>>),
    Normal { seed: u64, eigenvalues: Vec<Entry> },
    Random { seed: u64, dim: usize, norm: f64 },
    Spectral { seed: u64, dim: usize },
}

fn entry(e: &Entry) -> Complex64 {
    match *e {
        Entry::Real(x) => Complex64::new(x, 0.0),
        Entry::Complex([re, im]) => Complex64::new(re, im),
    }
}

impl MatrixSpec {
    pub fn build(&self) -> Result<CMatrix> {
        match self {
            MatrixSpec::Rows(rows) => {
                let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(entry).collect()).collect();
                Ok(CMatrix::from_rows(&rows)?)
            }
            MatrixSpec::Normal { seed, eigenvalues } => {
                let d: Vec<Complex64> = eigenvalues.iter().map(entry).collect();
                Ok(CMatrix::unitarily_diagonal(&d, *seed))
            }
            MatrixSpec::Random { seed, dim, norm } => Ok(CMatrix::random_with_norm(*dim, *seed, *norm)),
            MatrixSpec::Spectral { seed, dim } => Ok(spectral_contraction(*dim, *seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseSpec {
    Identity,
    Rotation { theta: TurnSpec },
    Doubling,
    Permutation { pi: Vec<usize> },
}

impl BaseSpec {
    pub fn build(&self) -> Result<Transformation> {
        Ok(match self {
            BaseSpec::Identity => Transformation::Identity,
            BaseSpec::Rotation { theta } => Transformation::Rotation { theta: theta.build()? },
            BaseSpec::Doubling => Transformation::Doubling,
            BaseSpec::Permutation { pi } => Transformation::Permutation { pi: pi.clone() },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FibersSpec {
    Constant { matrix: MatrixSpec },
    PerAtom { matrices: Vec<MatrixSpec> },
    /// One seeded random matrix of norm `norm` per atom, seeds `seed + i`.
    RandomPerAtom { seed: u64, dim: usize, norm: f64 },
    Step { breaks: Vec<f64>, matrices: Vec<MatrixSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Rotation {
        theta: TurnSpec,
        space: SpaceSpec,
        #[serde(default = "one")]
        dim: usize,
    },
    Doubling {
        space: SpaceSpec,
        #[serde(default = "one")]
        dim: usize,
    },
    Permutation {
        pi: Vec<usize>,
        #[serde(default = "one")]
        dim: usize,
    },
    Matrix {
        matrix: MatrixSpec,
        space: SpaceSpec,
    },
    /// Explicit stochastic rows, or with `seed` a random doubly stochastic
    /// `m × m` matrix mixing `m` random permutations.
    Markov {
        #[serde(default)]
        matrix: Option<MatrixSpec>,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "one")]
        dim: usize,
    },
    Skew {
        base: BaseSpec,
        fibers: FibersSpec,
        space: SpaceSpec,
    },
}

fn one() -> usize {
    1
}

/// A built operator plus the pieces some checks need directly.
#[derive(Debug, Clone)]
pub struct BuiltOperator {
    pub op: LinearOperator,
    pub matrix: Option<CMatrix>,
    pub cocycle: Option<Cocycle>,
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn shuffle(rng: &mut ChaCha8Rng, m: usize) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        pi.swap(i, j);
    }
    pi
}

/// `U diag(1, ρ_2 e^{2πiθ_2}, …) U*` with `ρ_j ∈ [0.5, 1)`, `θ_j` uniform
/// and `U` a seeded random unitary. A normal contraction whose eigenvalue 1
/// keeps operator-norm tails from underflowing.
pub fn spectral_contraction(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let mut d = vec![Complex64::new(1.0, 0.0)];
    for _ in 1..dim {
        let rho = 0.5 + 0.5 * unit(&mut rng);
        let theta = unit(&mut rng);
        d.push(Complex64::from_polar(rho.min(0.999), std::f64::consts::TAU * theta));
    }
    CMatrix::unitarily_diagonal(&d, seed)
}

/// `Σ_i w_i P_{π_i}` with `m` seeded permutations and weights summing to 1.
pub fn random_doubly_stochastic(m: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..m).map(|_| 0.05 + unit(&mut rng)).collect();
    let total: f64 = weights.iter().sum();
    let mut out = CMatrix::zeros(m);
    for w in &weights {
        let pi = shuffle(&mut rng, m);
        for (i, &j) in pi.iter().enumerate() {
            out[(i, j)] += Complex64::new(w / total, 0.0);
        }
    }
    out
}

impl OperatorSpec {
    pub fn build(&self) -> Result<BuiltOperator> {
        let plain = |op| BuiltOperator { op, matrix: None, cocycle: None };
        Ok(match self {
            OperatorSpec::Rotation { theta, space, dim } => {
                plain(LinearOperator::koopman(Transformation::Rotation { theta: theta.build()? }, space.build(), *dim)?)
            }
            OperatorSpec::Doubling { space, dim } => plain(LinearOperator::koopman(Transformation::Doubling, space.build(), *dim)?),
            OperatorSpec::Permutation { pi, dim } => plain(LinearOperator::koopman(
                Transformation::Permutation { pi: pi.clone() },
                SampleSpace::Finite { m: pi.len() },
                *dim,
            )?),
            OperatorSpec::Matrix { matrix, space } => {
                let a = matrix.build()?;
                BuiltOperator { op: LinearOperator::matrix(a.clone(), space.build())?, matrix: Some(a), cocycle: None }
            }
            OperatorSpec::Markov { matrix, m, seed, dim } => {
                let p = match (matrix, m, seed) {
                    (Some(mat), None, None) => mat.build()?,
                    (None, Some(m), Some(seed)) => random_doubly_stochastic(*m, *seed),
                    _ => return Err(config("markov operators take either `matrix` or both `m` and `seed`")),
                };
                BuiltOperator { op: LinearOperator::markov(p.clone(), *dim)?, matrix: Some(p), cocycle: None }
            }
            OperatorSpec::Skew { base, fibers, space } => {
                let space = space.build();
                let fibers = match fibers {
                    FibersSpec::Constant { matrix } => Fibers::Constant { matrix: matrix.build()? },
                    FibersSpec::PerAtom { matrices } => {
                        Fibers::PerAtom { matrices: matrices.iter().map(|m| m.build()).collect::<Result<_>>()? }
                    }
                    FibersSpec::RandomPerAtom { seed, dim, norm } => Fibers::PerAtom {
                        matrices: (0..space.len() as u64).map(|i| CMatrix::random_with_norm(*dim, seed + i, *norm)).collect(),
                    },
                    FibersSpec::Step { breaks, matrices } => Fibers::Step {
                        breaks: breaks.clone(),
                        matrices: matrices.iter().map(|m| m.build()).collect::<Result<_>>()?,
                    },
                };
                let c = Cocycle::new(base.build()?, space, fibers)?;
                BuiltOperator { op: LinearOperator::skew(c.clone())?, matrix: None, cocycle: Some(c) }
            }
        })
    }

    /// The operator as a cocycle: skew products as given, Koopman operators
    /// with identity fibers, matrices over the identity base.
    pub fn cocycle(&self) -> Result<Cocycle> {
        let id = |dim: usize| Fibers::Constant { matrix: CMatrix::identity(dim) };
        Ok(match self {
            OperatorSpec::Skew { .. } => self.build()?.cocycle.expect("skew operators carry a cocycle"),
            OperatorSpec::Rotation { theta, space, dim } => {
                Cocycle::new(Transformation::Rotation { theta: theta.build()? }, space.build(), id(*dim))?
            }
            OperatorSpec::Doubling { space, dim } => Cocycle::new(Transformation::Doubling, space.build(), id(*dim))?,
            OperatorSpec::Permutation { pi, dim } => {
                Cocycle::new(Transformation::Permutation { pi: pi.clone() }, SampleSpace::Finite { m: pi.len() }, id(*dim))?
            }
            OperatorSpec::Matrix { matrix, space } => {
                Cocycle::new(Transformation::Identity, space.build(), Fibers::Constant { matrix: matrix.build()? })?
            }
            OperatorSpec::Markov { .. } => return Err(config("markov operators have no cocycle form")),
        })
    }

    /// Inline JSON (starting with `{`) or a path to a JSON file.
    pub fn parse_arg(text: &str) -> Result<Self> {
        let body = if text.trim_start().starts_with('{') {
            text.to_string()
        } else {
            std::fs::read_to_string(text).map_err(|e| crate::error::LabError::io(text, e))?
        };
        Ok(serde_json::from_str(&body)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_shapes() {
        let r = OperatorSpec::parse_arg(r#"{"kind":"rotation","theta":[1,8],"space":{"kind":"circle","M":64}}"#).unwrap();
        assert!(r.build().unwrap().op.flags.contraction);
        let m = OperatorSpec::parse_arg(r#"{"kind":"matrix","matrix":[[0.5,[0,0.5]],[0,1]],"space":{"kind":"finite","m":3}}"#).unwrap();
        assert_eq!(m.build().unwrap().op.dim, 2);
        let s = OperatorSpec::parse_arg(
            r#"{"kind":"skew","base":{"kind":"permutation","pi":[1,0]},"fibers":{"kind":"random-per-atom","seed":3,"dim":2,"norm":0.9},"space":{"kind":"finite","m":2}}"#,
        )
        .unwrap();
        assert!(s.build().unwrap().cocycle.is_some());
        assert!(OperatorSpec::parse_arg(r#"{"kind":"rotation","theta":[1,8]}"#).is_err());
    }

    #[test]
    fn spectral_contractions_are_normal_with_norm_one() {
        let a = spectral_contraction(6, 11);
        assert!((a.operator_norm() - 1.0).abs() < 1e-10);
        assert!(a.mul(&a.adjoint()).max_abs_diff(&a.adjoint().mul(&a)) < 1e-12);
        let spec = OperatorSpec::parse_arg(r#"{"kind":"matrix","matrix":{"seed":11,"dim":6},"space":{"kind":"finite","m":1}}"#).unwrap();
        assert_eq!(spec.build().unwrap().matrix.unwrap(), a);
        let rot = OperatorSpec::parse_arg(r#"{"kind":"rotation","theta":[1,4],"space":{"kind":"circle","M":8}}"#).unwrap();
        assert_eq!(rot.cocycle().unwrap().dim(), 1);
    }

    #[test]
    fn random_markov_is_doubly_stochastic() {
        let p = random_doubly_stochastic(8, 5);
        for i in 0..8 {
            let row: f64 = (0..8).map(|j| p[(i, j)].re).sum();
            let col: f64 = (0..8).map(|j| p[(j, i)].re).sum();
            assert!((row - 1.0).abs() < 1e-14 && (col - 1.0).abs() < 1e-14);
        }
        let op = LinearOperator::markov(p, 1).unwrap();
        assert!(op.flags.dunford_schwartz);
    }
}
