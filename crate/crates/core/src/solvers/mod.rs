//! Deterministic amplitude dynamics.
//!
//! All CIM variants are integrated with explicit Euler steps of size `dt`:
//!
//! | variant  | signal update (rate)                                   | auxiliary update                 |
//! |----------|--------------------------------------------------------|----------------------------------|
//! | `Cac`    | `-x³ + (p-1)x - e·ξΣJx`                                | `-β e (x² - α)`                  |
//! | `Cfc`    | `-x³ + (p-1)x - z`, `z = e·ξΣJx`                       | `-β e (z² - α)`                  |
//! | `Sfc`    | `-x³ + (p-1)x - tanh(c z) - k(z - e)`, `z = ξΣJx`      | `-β (e - z)`                     |
//! | `Linear` | `-x³ + (p-1)x - ξΣJx`                                  | none                             |
//! | `Tanh`   | `-x³ + (p-1)x - tanh(c ξΣJx)`                          | none                             |
//!
//! `Dsbm` is the discrete simulated bifurcation machine: a momentum `y`
//! driven by `-(1-a)x - c·ξ_sbm·ΣJ sign(x)`, a position update with the new
//! momentum and fully inelastic walls at `|x| = 1`.

mod engine;
pub(crate) mod kernels;
mod tracker;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::CouplingMatrix;
use crate::rng::TrajectoryRng;
use crate::schedule::{Schedule, StepParams};

pub use engine::{run_lockstep, run_trajectory, run_trajectory_with, Member, RunOptions, Trajectory};
pub use kernels::{CAC_X_FACTOR, CFC_E_FLOOR, CFC_X_BOUND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cac,
    Cfc,
    Sfc,
    Linear,
    Tanh,
    Dsbm,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Cac,
        Variant::Cfc,
        Variant::Sfc,
        Variant::Linear,
        Variant::Tanh,
        Variant::Dsbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cac => "cac",
            Variant::Cfc => "cfc",
            Variant::Sfc => "sfc",
            Variant::Linear => "linear",
            Variant::Tanh => "tanh",
            Variant::Dsbm => "dsbm",
        }
    }

    /// Standard deviation of the Gaussian initial amplitudes (half-width of
    /// the uniform draw for `Dsbm`).
    pub fn default_init_std(self) -> f64 {
        match self {
            Variant::Cac => 1e-4,
            _ => 0.1,
        }
    }

    /// Initial error amplitude.
    pub fn initial_error(self) -> f64 {
        match self {
            Variant::Cac | Variant::Cfc => 1.0,
            _ => 0.0,
        }
    }

    /// Whether a truncated-Wigner counterpart exists.
    pub fn has_noisy_model(self) -> bool {
        matches!(self, Variant::Cac | Variant::Cfc | Variant::Sfc)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant `{s}`")))
    }
}

/// Full parameter vector of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub variant: Variant,
    pub schedule: Schedule,
    /// Amplitude restriction (CAC: `|x| ≤ 1.5√α`; CFC: `|x| ≤ 1.5`, `e ≥ 0.01`).
    pub clamp: bool,
    pub init_std: f64,
    /// `ξ_sbm = sbm_coupling_scale · ξ` for the bifurcation machine.
    pub sbm_coupling_scale: f64,
}

impl SolverParams {
    pub fn new(variant: Variant, schedule: Schedule) -> Self {
        Self {
            variant,
            schedule,
            clamp: true,
            init_std: variant.default_init_std(),
            sbm_coupling_scale: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("init_std must be >= 0, got {}", self.init_std)));
        }
        if !(self.sbm_coupling_scale > 0.0 && self.sbm_coupling_scale.is_finite()) {
            return Err(Error::InvalidParameter("sbm_coupling_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.schedule = self.schedule.scaled_to(n_steps);
        self
    }
}

/// Per-trajectory amplitudes.
///
/// `z` holds the mutual-coupling signal of the last step; `y` is the momentum
/// of the bifurcation machine and is zero for the other variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub step: usize,
}

impl SolverState {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            e: vec![0.0; n],
            y: vec![0.0; n],
            z: vec![0.0; n],
            step: 0,
        }
    }

    /// Builds a state from explicit amplitudes with the variant's default `e`.
    pub fn from_amplitudes(variant: Variant, x: Vec<f64>) -> Self {
        let n = x.len();
        Self {
            x,
            e: vec![variant.initial_error(); n],
            y: vec![0.0; n],
            z: vec![0.0; n],
            step: 0,
        }
    }

    /// Random initial condition drawn from `rng`.
    pub fn initial(params: &SolverParams, n: usize, rng: &mut TrajectoryRng) -> Self {
        let std = params.init_std;
        let x = match params.variant {
            Variant::Dsbm => (0..n).map(|_| rng.random_range(-1.0..=1.0) * std).collect(),
            _ => {
                let normal = Normal::new(0.0, std).expect("finite std");
                (0..n).map(|_| normal.sample(rng)).collect()
            }
        };
        Self::from_amplitudes(params.variant, x)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.e).chain(&self.y).all(|v| v.is_finite())
    }

    fn check_dims(&self, j: &CouplingMatrix) -> Result<()> {
        if self.n() != j.n() || self.e.len() != j.n() || self.y.len() != j.n() || self.z.len() != j.n() {
            return Err(Error::DimensionMismatch { expected: j.n(), got: self.n() });
        }
        Ok(())
    }
}

/// Advances `state` by one step of `params.variant`.
pub fn step(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    state.check_dims(j)?;
    let s = state.step;
    if s >= params.schedule.n_steps {
        return Err(Error::StepOutOfRange { step: s, n_steps: params.schedule.n_steps });
    }
    let sp = params.schedule.at(s);
    let mut input = vec![0.0; j.n()];
    let mut field = vec![0.0; j.n()];
    kernels::fill_input(params.variant, &state.x, &mut input);
    j.mul_vec(&input, &mut field);
    kernels::advance(state, &field, j.xi(), &sp, params);
    state.step += 1;
    if !state.is_finite() {
        return Err(Error::Divergence { step: s });
    }
    Ok(())
}

fn step_as(variant: Variant, state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    if params.variant == variant {
        step(state, j, params)
    } else {
        let mut p = params.clone();
        p.variant = variant;
        step(state, j, &p)
    }
}

/// Chaotic amplitude control step.
pub fn step_cac(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Cac, state, j, params)
}

/// Chaotic feedback control step.
pub fn step_cfc(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Cfc, state, j, params)
}

/// Separated feedback control step.
pub fn step_sfc(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Sfc, state, j, params)
}

/// Linear feedback baseline step.
pub fn step_linear_baseline(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Linear, state, j, params)
}

/// Tanh feedback baseline step.
pub fn step_tanh_baseline(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Tanh, state, j, params)
}

/// Discrete simulated bifurcation step.
pub fn step_dsbm(state: &mut SolverState, j: &CouplingMatrix, params: &SolverParams) -> Result<()> {
    step_as(Variant::Dsbm, state, j, params)
}

/// Instantaneous rates of the continuous CIM variants (no clamping).
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub dx: Vec<f64>,
    pub de: Vec<f64>,
}

impl Rates {
    pub fn max_abs(&self) -> f64 {
        self.dx.iter().chain(&self.de).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Right-hand sides of the ODE at `state` under parameters `sp`.
///
/// Not defined for `Dsbm`, which is a discrete map.
pub fn rates(variant: Variant, state: &SolverState, j: &CouplingMatrix, sp: &StepParams) -> Result<Rates> {
    state.check_dims(j)?;
    let n = j.n();
    let mut field = vec![0.0; n];
    j.mul_vec(&state.x, &mut field);
    let xi = j.xi();
    let mut dx = vec![0.0; n];
    let mut de = vec![0.0; n];
    for i in 0..n {
        let (x, e, f) = (state.x[i], state.e[i], xi * field[i]);
        (dx[i], de[i]) = match variant {
            Variant::Cac => {
                let r = kernels::cac_rates(x, e, f, sp);
                (r.0, r.1)
            }
            Variant::Cfc => {
                let r = kernels::cfc_rates(x, e, f, sp);
                (r.0, r.1)
            }
            Variant::Sfc => {
                let r = kernels::sfc_rates(x, e, e, f, sp);
                (r.0, r.1)
            }
            Variant::Linear => (kernels::linear_rate(x, f, sp), 0.0),
            Variant::Tanh => (kernels::tanh_rate(x, f, sp), 0.0),
            Variant::Dsbm => {
                return Err(Error::InvalidParameter("the bifurcation machine has no continuous rates".into()))
            }
        };
    }
    Ok(Rates { dx, de })
}
