//! Parallel drivers, file formats, the example registry and the command
//! layer on top of `wslln-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod expect;
pub mod fft;
pub mod opspec;
pub mod output;
pub mod par;
pub mod registry;
pub mod specs;

pub use wslln_core as core;
