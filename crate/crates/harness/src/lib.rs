//! Experiment harness for the IMM variants: the `imm` command line, trial
//! orchestration, guarantee checks, the stopping-time bias probe and SVG
//! plots.

pub mod bias;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod plot;
pub mod stats;
pub mod verify;
