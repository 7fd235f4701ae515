//! Browser bindings: amplitude traces, perturbation spreading and the
//! energy-to-solution model.
//!
//! The `*_impl` functions hold the logic and run natively; the exported
//! wrappers only convert errors for JavaScript.

use cim_core::energy::{energy_report, EnergyParams};
use cim_core::instances::sk_random;
use cim_core::metrics::{perturbation_correlation, tts};
use cim_core::presets;
use cim_core::solvers::{run_lockstep, Member, RunOptions};
use wasm_bindgen::prelude::*;

/// Largest instance the page may request.
pub const MAX_SPINS: usize = 400;

/// Presets offered by the page, one per line as `name\tsteps\tdescription`.
#[wasm_bindgen]
pub fn preset_list() -> String {
    presets::catalog()
        .iter()
        .map(|p| format!("{}\t{}\t{}", p.name, p.params.schedule.n_steps, p.description))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Amplitudes of one trajectory sampled every `stride` steps, with the
/// Ising energy of `sign(x)` after every step.
#[wasm_bindgen]
pub struct Traces {
    n: usize,
    steps: Vec<usize>,
    x: Vec<f64>,
    energy: Vec<f64>,
    best: f64,
}

#[wasm_bindgen]
impl Traces {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sampled step indices.
    pub fn steps(&self) -> Vec<u32> {
        self.steps.iter().map(|&s| s as u32).collect()
    }

    /// Row-major `steps().length × n` amplitudes.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn energy(&self) -> Vec<f64> {
        self.energy.clone()
    }

    /// Lowest energy visited.
    pub fn best_energy(&self) -> f64 {
        self.best
    }
}

fn check_size(n: usize) -> Result<(), String> {
    if !(2..=MAX_SPINS).contains(&n) {
        return Err(format!("n must lie in [2, {MAX_SPINS}], got {n}"));
    }
    Ok(())
}

pub fn traces_impl(preset: &str, n: usize, instance_seed: u32, seed: u32, stride: usize) -> Result<Traces, String> {
    check_size(n)?;
    let params = presets::preset(preset).map_err(|e| e.to_string())?;
    let j = sk_random(n, u64::from(instance_seed)).map_err(|e| e.to_string())?;
    let stride = stride.max(1);
    let total = params.schedule.n_steps;
    let mut checkpoints: Vec<usize> = (0..=total).step_by(stride).collect();
    if checkpoints.last() != Some(&total) {
        checkpoints.push(total);
    }
    let opts = RunOptions { track_energy: true, checkpoints, energy_trace: true };
    let member = Member::seeded(&params, n, u64::from(seed), None);
    let t = run_lockstep(&params, &j, vec![member], None, &opts)
        .map_err(|e| e.to_string())?
        .pop()
        .expect("one member")
        .map_err(|e| e.to_string())?;
    let steps = t.snapshots.iter().map(|s| s.0).collect();
    let x = t.snapshots.into_iter().flat_map(|s| s.1).collect();
    Ok(Traces { n, steps, x, energy: t.energy_trace, best: t.best_energy })
}

#[wasm_bindgen]
pub fn amplitude_traces(preset: &str, n: usize, instance_seed: u32, seed: u32, stride: usize) -> Result<Traces, JsError> {
    traces_impl(preset, n, instance_seed, seed, stride).map_err(|e| JsError::new(&e))
}

/// Mean Pearson correlation between unperturbed and perturbed runs at
/// `points` evenly spaced steps; undefined entries are NaN. The first
/// `points` values are the steps, the next `points` the correlations.
pub fn correlation_impl(preset: &str, n: usize, instance_seed: u32, seeds: u32, perturb: f64, points: usize) -> Result<Vec<f64>, String> {
    check_size(n)?;
    if seeds == 0 || points < 2 {
        return Err("need at least one seed and two points".into());
    }
    let params = presets::preset(preset).map_err(|e| e.to_string())?;
    let j = sk_random(n, u64::from(instance_seed)).map_err(|e| e.to_string())?;
    let total = params.schedule.n_steps;
    let checkpoints: Vec<usize> = (0..points).map(|k| k * total / (points - 1)).collect();
    let mut sums = vec![0.0; points];
    let mut counts = vec![0usize; points];
    for s in 0..seeds {
        let r = perturbation_correlation(&params, &j, u64::from(s), perturb, &checkpoints).map_err(|e| e.to_string())?;
        for (k, (_, v)) in r.into_iter().enumerate() {
            if let Some(v) = v {
                sums[k] += v;
                counts[k] += 1;
            }
        }
    }
    let means = sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 });
    Ok(checkpoints.iter().map(|&c| c as f64).chain(means).collect())
}

#[wasm_bindgen]
pub fn correlation_curve(preset: &str, n: usize, instance_seed: u32, seeds: u32, perturb: f64, points: usize) -> Result<Vec<f64>, JsError> {
    correlation_impl(preset, n, instance_seed, seeds, perturb, points).map_err(|e| JsError::new(&e))
}

/// `[tts_steps, e_main, e_correction, e_factory, e_total]` for a success
/// probability over `steps` steps at `n` spins and saturation `g_sq`.
pub fn energy_impl(ps: f64, steps: f64, n: usize, g_sq: f64) -> Result<Vec<f64>, String> {
    let mvm = tts(ps, steps).map_err(|e| e.to_string())?;
    if !mvm.is_finite() {
        return Ok(vec![mvm, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY]);
    }
    let params = EnergyParams { g_sq, ..EnergyParams::default() };
    let r = energy_report(mvm, n, &params).map_err(|e| e.to_string())?;
    Ok(vec![mvm, r.e_main, r.e_correction, r.e_factory, r.e_total])
}

#[wasm_bindgen]
pub fn energy_to_solution(ps: f64, steps: f64, n: usize, g_sq: f64) -> Result<Vec<f64>, JsError> {
    energy_impl(ps, steps, n, g_sq).map_err(|e| JsError::new(&e))
}
