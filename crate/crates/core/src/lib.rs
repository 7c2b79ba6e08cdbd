//! Variational toolkit for critical Schrödinger equations with vanishing or
//! coercive power-law potentials.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod grids;
pub mod output;
pub mod problem;
pub mod solve;
pub mod verify;

pub use error::{Error, Result};
