//! Analog Ising solvers in the coherent-Ising-machine family.
//!
//! The crate contains:
//!
//! * [`instances`]: coupling matrices, SK generation, G-set parsing, energies
//!   and an exhaustive ground-state oracle for small problems.
//! * [`solvers`]: Euler-integrated amplitude dynamics (chaotic amplitude
//!   control, chaotic feedback control, separated feedback control), the
//!   linear/tanh feedback baselines and a discrete simulated bifurcation
//!   machine.
//! * [`sde`]: truncated-Wigner noisy counterparts of the three feedback
//!   solvers, integrated with Euler–Maruyama.
//! * [`metrics`]: success probability, time-to-solution, fits and chaos
//!   diagnostics.
//! * [`energy`]: optical energy-to-solution model.
//! * [`batch`]: deterministic, worker-count independent batch execution.
//! * [`presets`]: shipped parameter sets.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod batch;
pub mod energy;
pub mod error;
pub mod instances;
pub mod metrics;
pub mod presets;
pub mod rng;
pub mod schedule;
pub mod sde;
pub mod solvers;

pub use error::{Error, Result};
pub use instances::{CouplingMatrix, GroundTruth, SpinConfig};
pub use schedule::{Param, Ramp, Schedule};
pub use solvers::{SolverParams, SolverState, Trajectory, Variant};
