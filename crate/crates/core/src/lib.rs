// SPDX-License-Identifier: Apache-2.0

//! Randomized-benchmarking decay parameters and gate-set circuit fidelity
//! under gate-dependent Markovian noise.

pub mod channel;
pub mod clifford;
pub mod correct;
pub mod error;
pub mod figures;
pub mod noise;
pub mod rb;
pub mod twirl;

pub use error::{Error, Result};
