//! Study drivers. Every driver returns rows in a fixed order that depends
//! only on the configuration, never on the worker count.

use anyhow::{bail, Context};
use cim_core::batch::{run_instances, with_pool, BatchSpec};
use cim_core::energy::{e_main, energy_report, optimal_g_sq, EnergyParams};
use cim_core::instances::{brute_force_ground, cut_value, parse_gset, sk_random};
use cim_core::metrics::{
    final_state_ground_fraction, median, percentiles, perturbation_correlation, scaling_fit, tts_report, BatchResult,
    Outcome,
};
use cim_core::rng::derive_seed;
use cim_core::sde::NoiseParams;
use cim_core::solvers::{run_lockstep, Member, RunOptions};
use cim_core::{CouplingMatrix, SolverParams};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Command, RunConfig, TargetMode, BRUTE_FORCE_LIMIT};
use crate::output::{opt_num, Row};

/// Percentiles reported across instances.
const SUMMARY_QUANTILES: [(f64, &str); 5] = [(0.1, "p10"), (0.25, "p25"), (0.5, "median"), (0.75, "p75"), (0.9, "p90")];

pub struct Instance {
    pub id: u64,
    pub name: String,
    pub j: CouplingMatrix,
}

pub fn load_instances(cfg: &RunConfig) -> anyhow::Result<Vec<Instance>> {
    let mut out = Vec::new();
    for path in &cfg.instances.files {
        let full = cfg.base_dir.join(path);
        let text = std::fs::read_to_string(&full).with_context(|| format!("reading instance {}", full.display()))?;
        let j = parse_gset(&text).with_context(|| format!("parsing instance {}", full.display()))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push(Instance { id: out.len() as u64, name, j });
    }
    if let Some(sk) = &cfg.instances.sk {
        for &n in &sk.sizes {
            for k in 0..sk.count {
                let j = sk_random(n, derive_seed(sk.seed, n as u64, k as u64))?;
                out.push(Instance { id: out.len() as u64, name: format!("sk-{n}-{k}"), j });
            }
        }
    }
    Ok(out)
}

/// Runs the configured study.
pub fn run(cfg: &RunConfig) -> anyhow::Result<Vec<Row>> {
    cfg.validate()?;
    match cfg.command {
        Command::Solve | Command::Bench | Command::Scale => run_benchmark(cfg),
        Command::NoiseSweep => run_noise_sweep(cfg),
        Command::Chaos => run_chaos(cfg),
        Command::Energy => run_energy(cfg),
    }
}

/// Full resolved parameter vector of one solver run.
pub fn param_columns(cfg: &RunConfig, label: &str, p: &SolverParams, noise: Option<&NoiseParams>) -> Row {
    let s = &p.schedule;
    let mut r = Row::default();
    r.push("solver", label);
    r.push("variant", p.variant.name());
    r.push("n_steps", s.n_steps);
    r.num("dt", s.dt);
    r.push("t_ramp", s.t_ramp);
    r.push("t_plateau", s.t_plateau);
    for (name, ramp) in [("p", s.p), ("alpha", s.alpha), ("beta", s.beta), ("c", s.c), ("k", s.k)] {
        r.num(&format!("{name}_start"), ramp.start);
        r.num(&format!("{name}_end"), ramp.end);
    }
    r.push("clamp", p.clamp);
    r.num("init_std", p.init_std);
    r.num("sbm_coupling_scale", p.sbm_coupling_scale);
    r.push("trajectories", cfg.trajectories);
    r.push("master_seed", cfg.master_seed);
    r.push("track_energy", cfg.track_energy);
    r.push("g_sq", opt_num(noise.map(|n| n.g_sq)));
    r.push("r_b", opt_num(noise.map(|n| n.r_b)));
    r.push("noise_seed", noise.map(|n| Value::from(n.rng_seed)).unwrap_or(Value::Null));
    r
}

fn batch_spec(cfg: &RunConfig, params: &SolverParams, noise: Option<&NoiseParams>) -> BatchSpec {
    BatchSpec {
        params: params.clone(),
        noise: noise.copied(),
        trajectories: cfg.trajectories,
        master_seed: cfg.master_seed,
        track_energy: cfg.track_energy,
        workers: cfg.workers,
    }
}

fn run_all(cfg: &RunConfig, instances: &[Instance], params: &SolverParams, noise: Option<&NoiseParams>) -> anyhow::Result<Vec<Vec<Outcome>>> {
    let pairs: Vec<(u64, &CouplingMatrix)> = instances.iter().map(|i| (i.id, &i.j)).collect();
    Ok(run_instances(&pairs, &batch_spec(cfg, params, noise))?)
}

/// Target energy and its provenance for each instance; `runs[s][k]` holds
/// the outcomes of run `s` on instance `k`.
fn targets(cfg: &RunConfig, instances: &[Instance], runs: &[&Vec<Vec<Outcome>>]) -> anyhow::Result<Vec<(f64, &'static str)>> {
    instances
        .iter()
        .enumerate()
        .map(|(k, inst)| {
            let best_found = || runs.iter().flat_map(|r| r[k].iter().map(|o| o.best_energy)).fold(f64::INFINITY, f64::min);
            let exact = || -> anyhow::Result<(f64, &'static str)> {
                Ok((brute_force_ground(&inst.j).with_context(|| format!("target for {}", inst.name))?.energy, "brute-force"))
            };
            match cfg.target {
                TargetMode::BruteForce => exact(),
                TargetMode::Auto if inst.j.n() <= BRUTE_FORCE_LIMIT => exact(),
                _ => Ok((best_found(), "best-found")),
            }
        })
        .collect()
}

/// Per-instance success statistics.
struct Measured {
    row: Row,
    tts: f64,
    ps: f64,
    successes: usize,
    final_hits: usize,
}

fn measure(outcomes: &[Outcome], target: f64, steps: usize) -> anyhow::Result<Measured> {
    let mut row = Row::default();
    let diverged = outcomes.iter().filter(|o| o.diverged_at.is_some()).count();
    let best = outcomes.iter().map(|o| o.best_energy).fold(f64::INFINITY, f64::min);
    row.num("target", target);
    row.num("best_found", best);
    if !target.is_finite() {
        for key in ["hits", "ps", "ps_low", "ps_high", "tts_steps", "mvm_to_solution", "final_state_ground_fraction"] {
            row.push(key, Value::Null);
        }
        row.push("diverged", diverged);
        return Ok(Measured { row, tts: f64::INFINITY, ps: 0.0, successes: 0, final_hits: 0 });
    }
    let batch = BatchResult::from_outcomes("", outcomes, target, steps);
    let rep = tts_report(&batch)?;
    let fsg = final_state_ground_fraction(&batch).ok();
    row.push("hits", rep.hits);
    row.num("ps", rep.ps);
    row.num("ps_low", rep.ps_low);
    row.num("ps_high", rep.ps_high);
    row.num("tts_steps", rep.tts_steps);
    row.num("mvm_to_solution", rep.mvm_to_solution);
    row.push("final_state_ground_fraction", opt_num(fsg));
    row.push("diverged", diverged);
    let successes = rep.hits;
    let final_hits = batch.first_hit_steps.iter().zip(&batch.final_in_target).filter(|(h, f)| h.is_some() && **f).count();
    Ok(Measured { row, tts: rep.tts_steps, ps: rep.ps, successes, final_hits })
}

fn quantile_columns(row: &mut Row, prefix: &str, values: &[f64]) -> anyhow::Result<()> {
    let qs: Vec<f64> = SUMMARY_QUANTILES.iter().map(|q| q.0).collect();
    let vals = percentiles(values, &qs)?;
    for ((_, name), v) in SUMMARY_QUANTILES.iter().zip(vals) {
        row.num(&format!("{prefix}_{name}"), v);
    }
    Ok(())
}

/// Best configuration of the lowest-energy trajectory, re-run from its seed.
fn best_witness(
    cfg: &RunConfig,
    inst: &Instance,
    params: &SolverParams,
    noise: Option<&NoiseParams>,
    outcomes: &[Outcome],
) -> anyhow::Result<Option<(String, f64)>> {
    let Some((t, _)) = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.best_energy.is_finite())
        .min_by(|a, b| a.1.best_energy.total_cmp(&b.1.best_energy))
    else {
        return Ok(None);
    };
    let member = Member::seeded(params, inst.j.n(), derive_seed(cfg.master_seed, inst.id, t as u64), noise);
    let opts = RunOptions { track_energy: cfg.track_energy, ..RunOptions::default() };
    let traj = run_lockstep(params, &inst.j, vec![member], noise, &opts)?
        .pop()
        .expect("one member")?;
    let spins: String = traj.best_config.spins().iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
    Ok(Some((spins, cut_value(&inst.j, &traj.best_config)?)))
}

fn run_benchmark(cfg: &RunConfig) -> anyhow::Result<Vec<Row>> {
    let instances = load_instances(cfg)?;
    let solvers = cfg.resolved_solvers()?;
    let noise = cfg.noise_params().first().copied();
    let runs: Vec<Vec<Vec<Outcome>>> = solvers
        .iter()
        .map(|(_, p)| run_all(cfg, &instances, p, noise.as_ref()))
        .collect::<anyhow::Result<_>>()?;
    let targets = targets(cfg, &instances, &runs.iter().collect::<Vec<_>>())?;
    let mut rows = Vec::new();
    // (solver, n) -> per-instance measurements, in first-seen order.
    let mut groups: Vec<(usize, usize, Vec<Measured>)> = Vec::new();
    for (s, (label, params)) in solvers.iter().enumerate() {
        let prefix = param_columns(cfg, label, params, noise.as_ref());
        for (k, inst) in instances.iter().enumerate() {
            let (target, source) = targets[k];
            let m = measure(&runs[s][k], target, params.schedule.n_steps)?;
            let mut row = Row::new("instance");
            row.push("command", cfg.command.name());
            row.push("instance", inst.name.as_str());
            row.push("n", inst.j.n());
            row.extend(&prefix);
            row.push("target_source", source);
            row.extend(&m.row);
            if cfg.command == Command::Solve {
                match best_witness(cfg, inst, params, noise.as_ref(), &runs[s][k])? {
                    Some((spins, cut)) => {
                        row.num("best_cut", cut);
                        row.push("best_spins", spins);
                    }
                    None => {
                        row.push("best_cut", Value::Null);
                        row.push("best_spins", Value::Null);
                    }
                }
            }
            rows.push(row);
            let key = if cfg.command == Command::Scale { inst.j.n() } else { 0 };
            match groups.iter_mut().find(|g| g.0 == s && g.1 == key) {
                Some(g) => g.2.push(m),
                None => groups.push((s, key, vec![m])),
            }
        }
    }
    if cfg.command == Command::Solve {
        return Ok(rows);
    }
    let mut fit_points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); solvers.len()];
    for (s, n, ms) in &groups {
        let (label, params) = &solvers[*s];
        let mut row = Row::new("summary");
        row.push("command", cfg.command.name());
        row.push("instances", ms.len());
        if cfg.command == Command::Scale {
            row.push("n", *n);
        }
        row.extend(&param_columns(cfg, label, params, noise.as_ref()));
        let tts: Vec<f64> = ms.iter().map(|m| m.tts).collect();
        row.num("mean_ps", ms.iter().map(|m| m.ps).sum::<f64>() / ms.len() as f64);
        quantile_columns(&mut row, "tts", &tts)?;
        quantile_columns(&mut row, "mvm", &tts)?;
        let successes: usize = ms.iter().map(|m| m.successes).sum();
        let finals: usize = ms.iter().map(|m| m.final_hits).sum();
        row.push("final_state_ground_fraction", opt_num((successes > 0).then(|| finals as f64 / successes as f64)));
        let med = median(&tts)?;
        if med.is_finite() {
            fit_points[*s].push((*n as f64, med));
        }
        rows.push(row);
    }
    if cfg.command == Command::Scale {
        for (s, (label, params)) in solvers.iter().enumerate() {
            let mut row = Row::new("fit");
            row.push("command", cfg.command.name());
            row.extend(&param_columns(cfg, label, params, noise.as_ref()));
            row.push("sizes", fit_points[s].len());
            match scaling_fit(&fit_points[s]) {
                Ok(fit) => {
                    row.num("a", fit.a);
                    row.num("b", fit.b);
                    row.num("r_squared", fit.r_squared);
                }
                Err(_) => {
                    row.push("a", Value::Null);
                    row.push("b", Value::Null);
                    row.push("r_squared", Value::Null);
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn run_noise_sweep(cfg: &RunConfig) -> anyhow::Result<Vec<Row>> {
    let instances = load_instances(cfg)?;
    let solvers = cfg.resolved_solvers()?;
    let mut levels: Vec<Option<NoiseParams>> = Vec::new();
    if cfg.noise.as_ref().is_some_and(|n| n.include_deterministic) {
        levels.push(None);
    }
    levels.extend(cfg.noise_params().into_iter().map(Some));
    // runs[s][l][k]
    let runs: Vec<Vec<Vec<Vec<Outcome>>>> = solvers
        .iter()
        .map(|(_, p)| levels.iter().map(|l| run_all(cfg, &instances, p, l.as_ref())).collect::<anyhow::Result<_>>())
        .collect::<anyhow::Result<_>>()?;
    let flat: Vec<&Vec<Vec<Outcome>>> = runs.iter().flatten().collect();
    let targets = targets(cfg, &instances, &flat)?;
    let uniform_n = instances.first().map(|i| i.j.n()).filter(|&n| instances.iter().all(|i| i.j.n() == n));
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (s, (label, params)) in solvers.iter().enumerate() {
        let mut baseline_ps = None;
        let mut sweep: Vec<(f64, f64)> = Vec::new();
        for (l, level) in levels.iter().enumerate() {
            let prefix = param_columns(cfg, label, params, level.as_ref());
            let mut ms = Vec::new();
            for (k, inst) in instances.iter().enumerate() {
                let m = measure(&runs[s][l][k], targets[k].0, params.schedule.n_steps)?;
                let mut row = Row::new("instance");
                row.push("command", cfg.command.name());
                row.push("instance", inst.name.as_str());
                row.push("n", inst.j.n());
                row.extend(&prefix);
                row.push("target_source", targets[k].1);
                row.extend(&m.row);
                rows.push(row);
                ms.push(m);
            }
            let mean_ps = ms.iter().map(|m| m.ps).sum::<f64>() / ms.len() as f64;
            let baseline = *baseline_ps.get_or_insert(mean_ps);
            let tts: Vec<f64> = ms.iter().map(|m| m.tts).collect();
            let med = median(&tts)?;
            let mut row = Row::new("summary");
            row.push("command", cfg.command.name());
            row.push("instances", ms.len());
            row.extend(&prefix);
            row.num("mean_ps", mean_ps);
            row.num("retained_fraction", if baseline > 0.0 { mean_ps / baseline } else { f64::NAN });
            quantile_columns(&mut row, "mvm", &tts)?;
            let e = match (level, uniform_n) {
                (Some(np), Some(n)) if med.is_finite() => {
                    let ep = EnergyParams { g_sq: np.g_sq, ..cfg.energy.params };
                    ep.validate()?;
                    sweep.push((np.g_sq, med));
                    e_main(med, n, &ep)
                }
                _ => f64::NAN,
            };
            row.num("median_e_main", e);
            summaries.push(row);
        }
        if let (Some(n), false) = (uniform_n, sweep.is_empty()) {
            let grid: Vec<f64> = sweep.iter().map(|p| p.0).collect();
            let lookup = |g: f64| Ok(sweep.iter().find(|p| p.0 == g).map(|p| p.1).unwrap_or(f64::INFINITY));
            if let Ok((best, _)) = optimal_g_sq(&grid, n, &cfg.energy.params, lookup) {
                let mut row = Row::new("optimum");
                row.push("command", cfg.command.name());
                row.push("solver", label.as_str());
                row.push("n", n);
                row.num("g_sq", best.g_sq);
                row.num("median_mvm", best.median_mvm);
                row.num("median_e_main", best.median_e_main);
                summaries.push(row);
            }
        }
    }
    rows.extend(summaries);
    Ok(rows)
}

fn run_chaos(cfg: &RunConfig) -> anyhow::Result<Vec<Row>> {
    let instances = load_instances(cfg)?;
    let solvers = cfg.resolved_solvers()?;
    let chaos = &cfg.chaos;
    let tasks: Vec<(usize, usize, u64)> = (0..solvers.len())
        .flat_map(|s| (0..instances.len()).flat_map(move |k| (0..chaos.seeds as u64).map(move |t| (s, k, t))))
        .collect();
    let work = |&(s, k, t): &(usize, usize, u64)| {
        let inst = &instances[k];
        perturbation_correlation(&solvers[s].1, &inst.j, derive_seed(cfg.master_seed, inst.id, t), chaos.perturb_std, &chaos.checkpoints)
    };
    let results: Vec<_> = if cfg.workers == 1 {
        tasks.iter().map(work).collect()
    } else {
        with_pool(cfg.workers, || tasks.par_iter().map(work).collect())?
    };
    let mut rows = Vec::new();
    for (s, (label, params)) in solvers.iter().enumerate() {
        let prefix = param_columns(cfg, label, params, None);
        for (k, inst) in instances.iter().enumerate() {
            let per_seed: Vec<&Vec<(usize, Option<f64>)>> = tasks
                .iter()
                .zip(&results)
                .filter(|(t, _)| t.0 == s && t.1 == k)
                .map(|(_, r)| r.as_ref().map_err(|e| anyhow::anyhow!("{e}")))
                .collect::<anyhow::Result<_>>()?;
            for (c, &step) in chaos.checkpoints.iter().enumerate() {
                let rs: Vec<f64> = per_seed.iter().filter_map(|r| r[c].1).collect();
                let mut row = Row::new("checkpoint");
                row.push("command", cfg.command.name());
                row.push("instance", inst.name.as_str());
                row.push("n", inst.j.n());
                row.extend(&prefix);
                row.num("perturb_std", chaos.perturb_std);
                row.push("seeds", chaos.seeds);
                row.push("step", step);
                row.push("defined", rs.len());
                let mean = |f: fn(f64) -> f64| if rs.is_empty() { f64::NAN } else { rs.iter().map(|&r| f(r)).sum::<f64>() / rs.len() as f64 };
                row.num("mean_r", mean(|r| r));
                row.num("mean_abs_r", mean(f64::abs));
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn run_energy(cfg: &RunConfig) -> anyhow::Result<Vec<Row>> {
    let e = &cfg.energy;
    let mut rows = Vec::new();
    for &n in &e.n {
        for &mvm in &e.mvm {
            for &g in &e.g_sq {
                let params = EnergyParams { g_sq: g, ..e.params };
                let rep = energy_report(mvm, n, &params)?;
                let mut row = Row::new("energy");
                row.push("command", cfg.command.name());
                row.push("n", n);
                row.num("mvm", mvm);
                for (k, v) in [
                    ("g_sq", params.g_sq),
                    ("photon_energy", params.photon_energy),
                    ("roundtrip_dt", params.roundtrip_dt),
                    ("small_signal_pulse", params.small_signal_pulse),
                    ("high_gain_pulse", params.high_gain_pulse),
                    ("comb_power", params.comb_power),
                    ("psa_10db_power", params.psa_10db_power),
                    ("psa_50db_power", params.psa_50db_power),
                    ("eom_power", params.eom_power),
                    ("always_on_eoms", params.always_on_eoms),
                    ("pulse_period", params.pulse_period),
                    ("gpu_power", params.gpu_power),
                ] {
                    row.num(k, v);
                }
                row.push("gpu_seconds_per_mvm", opt_num(params.gpu_seconds_per_mvm));
                row.num("e_main", rep.e_main);
                row.num("e_correction", rep.e_correction);
                row.num("e_factory", rep.e_factory);
                row.num("e_total", rep.e_total);
                row.num("e_correction_approx", rep.e_correction_approx);
                row.num("e_factory_approx", rep.e_factory_approx);
                row.push("e_gpu", opt_num(rep.e_gpu));
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        bail!("energy grid is empty");
    }
    Ok(rows)
}
