//! Admissible-weight calculus and the numerical machinery behind weighted
//! strong laws of large numbers and weighted one-sided ergodic Hilbert
//! transforms.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: no IO, no threads, no clocks. The `wslln`
//! companion crate adds parallel drivers, FFT-backed circle evaluation,
//! file formats and the command-line front end.
//!
//! Module map:
//!
//! * [`weight`] and [`schedule`]: weight expressions, weight sequences,
//!   index schedules and gap sequences.
//! * [`bertrand`] and [`admissibility`]: exact convergence verdicts for
//!   power–log series plus numeric partial-sum diagnostics.
//! * [`linalg`] and [`operators`]: small dense complex matrices, Koopman,
//!   Markov and cocycle operators acting on vector-valued fields.
//! * [`transforms`]: weighted averages, Abel-summed series, modulated
//!   polynomials, Hilbert-transform partial sums and the bound checks.
//! * [`stochastics`]: random modulations, Monte Carlo estimates and the
//!   a.e.-convergence diagnostic.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod admissibility;
pub mod bertrand;
pub mod circle;
mod error;
pub mod fields;
pub mod linalg;
pub mod math;
pub mod modulation;
pub mod operators;
pub mod parse;
pub mod schedule;
pub mod sigma;
pub mod stochastics;
pub mod trace;
pub mod transforms;
pub mod weight;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use admissibility::{AdmissibilityReport, ConditionKind, HeuristicClaim, Verdict, VerdictSource};
pub use linalg::CMatrix;
pub use modulation::ModulationSeq;
pub use operators::{Cocycle, LinearOperator, SampleSpace, Transformation, VectorField};
pub use schedule::{GapSeq, Schedule};
pub use weight::{WeightExpr, WeightSeq};
