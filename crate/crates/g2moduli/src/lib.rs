//! Configuration, batch drivers, file formats and figures for the
//! `g2moduli` command-line tool.
//!
//! The numerics live in [`g2moduli_core`]; this crate adds everything that
//! touches the filesystem or spawns threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod portrait;
pub mod report;
pub mod run;
pub mod verify;

pub use config::RunConfig;
