//! Lockstep trajectory runner shared by the deterministic and noisy solvers.
//!
//! Trajectories in one call advance together so each row of `J` is read
//! once per step for the whole group. Per-trajectory arithmetic never depends
//! on the group composition, so a trajectory gives bit-identical results
//! alone or in any batch.

use super::kernels;
use super::tracker::EnergyTracker;
use super::{SolverParams, SolverState};
use crate::error::{Error, Result};
use crate::instances::{ising_energy, CouplingMatrix, SpinConfig};
use crate::rng;
use crate::sde::{self, NoiseParams, NoiseStream};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Evaluate the Ising energy of `sign(x)` after every step. When off,
    /// only the final configuration is read out.
    pub track_energy: bool,
    /// Step counts at which to record a copy of `x` (0 = initial state).
    pub checkpoints: Vec<usize>,
    /// Keep the energy after every step (requires `track_energy`).
    pub energy_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { track_energy: true, checkpoints: Vec::new(), energy_trace: false }
    }
}

impl RunOptions {
    pub fn final_readout() -> Self {
        Self { track_energy: false, ..Self::default() }
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub final_state: SolverState,
    pub best_energy: f64,
    /// Step count after which `best_energy` was first observed.
    pub best_step: usize,
    pub best_config: SpinConfig,
    pub final_energy: f64,
    pub final_is_best: bool,
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub energy_trace: Vec<f64>,
}

/// One trajectory's starting state and, for noisy runs, its noise stream.
#[derive(Debug, Clone)]
pub struct Member {
    pub state: SolverState,
    pub noise: Option<NoiseStream>,
}

impl Member {
    /// Random initial state from `seed`; noise stream derived from the same
    /// seed and `noise.rng_seed` so initial states do not depend on noise.
    pub fn seeded(params: &SolverParams, n: usize, seed: u64, noise: Option<&NoiseParams>) -> Self {
        let mut init = rng::stream(seed);
        let state = SolverState::initial(params, n, &mut init);
        let noise = noise.map(|np| NoiseStream::new(rng::noise_seed(seed, np.rng_seed)));
        Self { state, noise }
    }

    pub fn from_state(state: SolverState) -> Self {
        Self { state, noise: None }
    }
}

struct Slot {
    member: Member,
    tracker: Option<EnergyTracker>,
    failed: Option<usize>,
    snapshots: Vec<(usize, Vec<f64>)>,
    trace: Vec<f64>,
    e_tilde: Vec<f64>,
}

fn validate(params: &SolverParams, j: &CouplingMatrix, noise: Option<&NoiseParams>) -> Result<()> {
    params.validate()?;
    if let Some(np) = noise {
        np.validate()?;
        if !params.variant.has_noisy_model() {
            return Err(Error::InvalidParameter(format!(
                "variant `{}` has no noisy model",
                params.variant
            )));
        }
    }
    if j.n() == 0 {
        return Err(Error::InvalidSize { n: 0, reason: "empty instance" });
    }
    Ok(())
}

/// Runs every member for the full schedule in lockstep.
///
/// The outer error reports invalid configuration; each inner result reports
/// that trajectory's divergence, if any.
pub fn run_lockstep(
    params: &SolverParams,
    j: &CouplingMatrix,
    members: Vec<Member>,
    noise: Option<&NoiseParams>,
    opts: &RunOptions,
) -> Result<Vec<Result<Trajectory>>> {
    validate(params, j, noise)?;
    let n = j.n();
    let count = members.len();
    let mut checkpoints = opts.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let wants = |k: usize| checkpoints.binary_search(&k).is_ok();

    let mut slots = Vec::with_capacity(count);
    for mut member in members {
        if member.state.n() != n
            || member.state.e.len() != n
            || member.state.y.len() != n
            || member.state.z.len() != n
        {
            return Err(Error::DimensionMismatch { expected: n, got: member.state.n() });
        }
        if noise.is_some() && member.noise.is_none() {
            return Err(Error::InvalidParameter("noisy run needs a noise stream per member".into()));
        }
        member.state.step = 0;
        let tracker = opts.track_energy.then(|| EnergyTracker::new(j, &member.state.x, 0));
        let mut snapshots = Vec::new();
        if wants(0) {
            snapshots.push((0, member.state.x.clone()));
        }
        let mut trace = Vec::new();
        if opts.energy_trace {
            if let Some(t) = &tracker {
                trace.reserve(params.schedule.n_steps + 1);
                trace.push(t.energy());
            }
        }
        let failed = (!member.state.is_finite()).then_some(0);
        slots.push(Slot { member, tracker, failed, snapshots, trace, e_tilde: vec![0.0; n] });
    }

    let mut inputs = vec![0.0; count * n];
    let mut fields = vec![0.0; count * n];
    let xi = j.xi();
    let n_steps = params.schedule.n_steps;

    for s in 0..n_steps {
        if slots.iter().all(|sl| sl.failed.is_some()) {
            break;
        }
        let sp = params.schedule.at(s);
        for (b, slot) in slots.iter_mut().enumerate() {
            let input = &mut inputs[b * n..(b + 1) * n];
            if slot.failed.is_some() {
                input.fill(0.0);
                continue;
            }
            match (noise, slot.member.noise.as_mut()) {
                (Some(np), Some(stream)) => {
                    sde::infer_inputs(&slot.member.state, np, stream, input, &mut slot.e_tilde);
                }
                _ => kernels::fill_input(params.variant, &slot.member.state.x, input),
            }
        }
        j.mul_batch(&inputs, &mut fields, count);
        for (b, slot) in slots.iter_mut().enumerate() {
            if slot.failed.is_some() {
                continue;
            }
            let field = &fields[b * n..(b + 1) * n];
            let state = &mut slot.member.state;
            match (noise, slot.member.noise.as_mut()) {
                (Some(np), Some(stream)) => {
                    let x_tilde = &inputs[b * n..(b + 1) * n];
                    sde::advance_noisy(state, field, x_tilde, &slot.e_tilde, xi, &sp, params, np, stream);
                }
                _ => kernels::advance(state, field, xi, &sp, params),
            }
            state.step = s + 1;
            if !state.is_finite() {
                slot.failed = Some(s);
                continue;
            }
            if let Some(t) = slot.tracker.as_mut() {
                let e = t.observe(j, &state.x, s + 1);
                if opts.energy_trace {
                    slot.trace.push(e);
                }
            }
            if wants(s + 1) {
                slot.snapshots.push((s + 1, state.x.clone()));
            }
        }
    }

    slots
        .into_iter()
        .map(|slot| {
            if let Some(step) = slot.failed {
                return Ok(Err(Error::Divergence { step }));
            }
            let state = slot.member.state;
            let final_config = SpinConfig::from_amplitudes(&state.x);
            let final_energy = ising_energy(j, &final_config)?;
            let (best_energy, best_step, best_config) = match slot.tracker {
                Some(t) => {
                    let cfg = SpinConfig::new(t.best_config)?;
                    let exact = ising_energy(j, &cfg)?;
                    if final_energy < exact {
                        (final_energy, state.step, final_config.clone())
                    } else {
                        (exact, t.best_step, cfg)
                    }
                }
                None => (final_energy, state.step, final_config.clone()),
            };
            Ok(Ok(Trajectory {
                final_is_best: final_energy <= best_energy,
                final_state: state,
                best_energy,
                best_step,
                best_config,
                final_energy,
                snapshots: slot.snapshots,
                energy_trace: slot.trace,
            }))
        })
        .collect()
}

/// Runs one trajectory from an explicit starting member.
pub fn run_trajectory_with(
    params: &SolverParams,
    j: &CouplingMatrix,
    member: Member,
    noise: Option<&NoiseParams>,
    opts: &RunOptions,
) -> Result<Trajectory> {
    run_lockstep(params, j, vec![member], noise, opts)?
        .pop()
        .expect("one member in, one trajectory out")
}

/// Deterministic trajectory from a random initial state seeded by `seed`.
pub fn run_trajectory(params: &SolverParams, j: &CouplingMatrix, seed: u64) -> Result<Trajectory> {
    let member = Member::seeded(params, j.n(), seed, None);
    run_trajectory_with(params, j, member, None, &RunOptions::default())
}
