//! Success statistics, time-to-solution, fits and chaos diagnostics.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::error::{Error, Result};
use crate::instances::{ising_energy, CouplingMatrix, SpinConfig};
use crate::rng;
use crate::solvers::{run_lockstep, Member, RunOptions, SolverParams, SolverState, Trajectory};

/// Success threshold of the restart formula.
pub const TARGET_CONFIDENCE: f64 = 0.99;

/// `1 - TARGET_CONFIDENCE`, written out to avoid the rounding of the subtraction.
const TARGET_MISS: f64 = 0.01;

/// Compact per-trajectory record kept by batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub best_energy: f64,
    pub best_step: usize,
    pub final_energy: f64,
    /// Step at which the trajectory became non-finite.
    pub diverged_at: Option<usize>,
}

impl Outcome {
    pub fn diverged(step: usize) -> Self {
        Self {
            best_energy: f64::INFINITY,
            best_step: 0,
            final_energy: f64::INFINITY,
            diverged_at: Some(step),
        }
    }
}

impl From<&Result<Trajectory>> for Outcome {
    fn from(r: &Result<Trajectory>) -> Self {
        match r {
            Ok(t) => Self {
                best_energy: t.best_energy,
                best_step: t.best_step,
                final_energy: t.final_energy,
                diverged_at: None,
            },
            Err(Error::Divergence { step }) => Self::diverged(*step),
            Err(_) => Self::diverged(0),
        }
    }
}

/// Trajectory outcomes of one instance measured against a target energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub instance: String,
    pub best_energies: Vec<f64>,
    pub first_hit_steps: Vec<Option<usize>>,
    pub final_in_target: Vec<bool>,
    pub target: f64,
    pub steps: usize,
}

/// Energies within this distance of the target count as hits.
fn hit_tolerance(target: f64) -> f64 {
    1e-9 * target.abs().max(1.0)
}

impl BatchResult {
    pub fn from_outcomes(instance: impl Into<String>, outcomes: &[Outcome], target: f64, steps: usize) -> Self {
        let tol = hit_tolerance(target);
        Self {
            instance: instance.into(),
            best_energies: outcomes.iter().map(|o| o.best_energy).collect(),
            first_hit_steps: outcomes
                .iter()
                .map(|o| (o.best_energy <= target + tol).then_some(o.best_step))
                .collect(),
            final_in_target: outcomes.iter().map(|o| o.final_energy <= target + tol).collect(),
            target,
            steps,
        }
    }

    pub fn trajectories(&self) -> usize {
        self.best_energies.len()
    }

    pub fn hits(&self) -> usize {
        self.first_hit_steps.iter().filter(|h| h.is_some()).count()
    }

    pub fn best_found(&self) -> f64 {
        self.best_energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtsReport {
    pub ps: f64,
    pub tts_steps: f64,
    pub mvm_to_solution: f64,
    /// 95% Wilson interval of `ps`.
    pub ps_low: f64,
    pub ps_high: f64,
    pub hits: usize,
    pub trajectories: usize,
}

pub fn success_probability(batch: &BatchResult) -> Result<f64> {
    if batch.trajectories() == 0 {
        return Err(Error::Empty("batch"));
    }
    Ok(batch.hits() as f64 / batch.trajectories() as f64)
}

/// Expected steps to reach the target with 99% confidence under restarts.
pub fn tts(ps: f64, steps: f64) -> Result<f64> {
    if !(steps > 0.0) {
        return Err(Error::InvalidParameter(format!("steps must be positive, got {steps}")));
    }
    if !(0.0..=1.0).contains(&ps) {
        return Err(Error::InvalidParameter(format!("ps must lie in [0, 1], got {ps}")));
    }
    Ok(if ps == 0.0 {
        f64::INFINITY
    } else if ps >= TARGET_CONFIDENCE {
        steps
    } else {
        steps * TARGET_MISS.ln() / (1.0 - ps).ln()
    })
}

/// One MVM per integration step, so MVM-to-solution equals TTS in steps.
pub fn mvm_to_solution(report: &TtsReport) -> f64 {
    report.tts_steps
}

/// Wilson score interval for `hits` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Empty("trials"));
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // The exact interval always contains p; clamping absorbs rounding at p = 0 or 1.
    Ok(((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0)))
}

pub fn tts_report(batch: &BatchResult) -> Result<TtsReport> {
    let ps = success_probability(batch)?;
    let tts_steps = tts(ps, batch.steps as f64)?;
    let (ps_low, ps_high) = wilson_interval(batch.hits(), batch.trajectories(), 1.959_963_984_540_054)?;
    Ok(TtsReport {
        ps,
        tts_steps,
        mvm_to_solution: tts_steps,
        ps_low,
        ps_high,
        hits: batch.hits(),
        trajectories: batch.trajectories(),
    })
}

/// Linear-interpolation quantiles; `+∞` sorts last.
pub fn percentiles(values: &[f64], qs: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN in percentile input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    qs.iter()
        .map(|&q| {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidParameter(format!("quantile {q} outside [0, 1]")));
            }
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            let (a, b) = (sorted[lo], sorted[hi]);
            Ok(if frac == 0.0 || a == b {
                a
            } else if b.is_infinite() || a.is_infinite() {
                if frac < 1.0 && a.is_infinite() {
                    a
                } else {
                    b
                }
            } else {
                a + (b - a) * frac
            })
        })
        .collect()
}

pub fn median(values: &[f64]) -> Result<f64> {
    Ok(percentiles(values, &[0.5])?[0])
}

/// `TTS ≈ A · B^√n`, fitted as a line in `(√n, ln TTS)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("scaling fit needs at least two points".into()));
    }
    if points.iter().any(|&(n, t)| !(n > 0.0 && t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("scaling fit needs positive n and finite positive tts".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, r_squared) = linear_fit(&xs, &ys)?;
    Ok(ScalingFit { a: intercept.exp(), b: slope.exp(), r_squared })
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, R²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all predictor values are equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    Ok((intercept, slope, r_squared(ss_res, ss_tot)))
}

fn r_squared(ss_res: f64, ss_tot: f64) -> f64 {
    if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    /// Finite values used in the fit.
    pub fitted: usize,
    /// Infinite values excluded from the fit (never-solved instances).
    pub excluded: usize,
}

impl LognormalFit {
    /// Predicted number of instances still unsolved after `m` steps,
    /// counting excluded instances as never solved.
    pub fn unsolved_after(&self, m: f64) -> f64 {
        let solved_fraction = if m <= 0.0 {
            0.0
        } else if self.sigma == 0.0 {
            if m.ln() >= self.mu {
                1.0
            } else {
                0.0
            }
        } else {
            let dist = NormalDist::new(self.mu, self.sigma).expect("positive sigma");
            dist.cdf(m.ln())
        };
        self.fitted as f64 * (1.0 - solved_fraction) + self.excluded as f64
    }
}

/// Fits `ln t ~ N(mu, sigma²)` (population standard deviation).
pub fn lognormal_fit(values: &[f64]) -> Result<LognormalFit> {
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-normal fit needs positive values".into()));
    }
    let logs: Vec<f64> = values.iter().filter(|v| v.is_finite()).map(|v| v.ln()).collect();
    if logs.is_empty() {
        return Err(Error::Empty("finite values"));
    }
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n;
    Ok(LognormalFit {
        mu,
        sigma: var.sqrt(),
        fitted: logs.len(),
        excluded: values.len() - logs.len(),
    })
}

/// Empirical number of values strictly above `m`.
pub fn empirical_unsolved(values: &[f64], m: f64) -> usize {
    values.iter().filter(|v| **v > m).count()
}

/// Among successful trajectories, the fraction whose final configuration
/// attains the target.
pub fn final_state_ground_fraction(batch: &BatchResult) -> Result<f64> {
    let mut successes = 0usize;
    let mut final_hits = 0usize;
    for (hit, fin) in batch.first_hit_steps.iter().zip(&batch.final_in_target) {
        if hit.is_some() {
            successes += 1;
            final_hits += usize::from(*fin);
        }
    }
    if successes == 0 {
        return Err(Error::Undefined("no successful trajectories"));
    }
    Ok(final_hits as f64 / successes as f64)
}

/// Pearson correlation; `None` when either vector has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Stream offset separating the perturbation draws from the initial state.
const PERTURBATION_STREAM: u64 = 0x0070_6572_7475_7262;

/// Correlation of the amplitudes of two trajectories whose initial states
/// differ by Gaussian noise of standard deviation `perturb_std`.
///
/// The unperturbed initial state is drawn from `params.init_std`. Each
/// entry is `(step, r)`, with `r = None` when undefined.
pub fn perturbation_correlation(
    params: &SolverParams,
    j: &CouplingMatrix,
    seed: u64,
    perturb_std: f64,
    checkpoints: &[usize],
) -> Result<Vec<(usize, Option<f64>)>> {
    if !(perturb_std > 0.0 && perturb_std.is_finite()) {
        return Err(Error::InvalidParameter(format!("perturb_std must be positive, got {perturb_std}")));
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c > params.schedule.n_steps) {
        return Err(Error::StepOutOfRange { step: c, n_steps: params.schedule.n_steps });
    }
    let base = Member::seeded(params, j.n(), seed, None);
    let mut perturbed: SolverState = base.state.clone();
    let mut noise_rng = rng::stream(rng::noise_seed(seed, PERTURBATION_STREAM));
    let normal = Normal::new(0.0, perturb_std).expect("positive std");
    for x in &mut perturbed.x {
        *x += normal.sample(&mut noise_rng);
    }
    let opts = RunOptions { track_energy: false, checkpoints: checkpoints.to_vec(), energy_trace: false };
    let runs = run_lockstep(params, j, vec![base, Member::from_state(perturbed)], None, &opts)?;
    let mut runs = runs.into_iter();
    let a = runs.next().expect("two runs")?;
    let b = runs.next().expect("two runs")?;
    Ok(checkpoints
        .iter()
        .map(|&c| {
            let xa = a.snapshots.iter().find(|s| s.0 == c).map(|s| &s.1);
            let xb = b.snapshots.iter().find(|s| s.0 == c).map(|s| &s.1);
            (c, xa.zip(xb).and_then(|(xa, xb)| pearson(xa, xb)))
        })
        .collect())
}

/// Mean energy of `sign(x)` above `ground` over the second half of a run.
pub fn mean_visited_excess(params: &SolverParams, j: &CouplingMatrix, seed: u64, ground: f64) -> Result<f64> {
    let member = Member::seeded(params, j.n(), seed, None);
    let opts = RunOptions { track_energy: true, checkpoints: Vec::new(), energy_trace: true };
    let t = run_lockstep(params, j, vec![member], None, &opts)?.pop().expect("one run")?;
    let half = params.schedule.n_steps / 2;
    let window = &t.energy_trace[half + 1..];
    if window.is_empty() {
        return Err(Error::Empty("sampling window"));
    }
    Ok(window.iter().map(|e| e - ground).sum::<f64>() / window.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mean_excess: f64,
}

impl ResidualSample {
    /// Effective temperature `(1 − p)/(αβ)`.
    pub fn predictor(&self) -> f64 {
        (1.0 - self.p) / (self.alpha * self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    pub k: f64,
    pub r_squared: f64,
}

impl ResidualFit {
    pub fn predict(&self, p: f64, alpha: f64, beta: f64) -> f64 {
        self.k * (1.0 - p) / (alpha * beta)
    }
}

/// Least-squares `K` in `ΔE ≈ K(1 − p)/(αβ)` (line through the origin).
pub fn residual_energy_constant(samples: &[ResidualSample]) -> Result<ResidualFit> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    for s in samples {
        if !(s.p < 1.0 && s.alpha > 0.0 && s.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "residual sample needs p < 1, alpha > 0, beta > 0 (got p={}, alpha={}, beta={})",
                s.p, s.alpha, s.beta
            )));
        }
    }
    let suu: f64 = samples.iter().map(|s| s.predictor().powi(2)).sum();
    if !(suu > 0.0 && suu.is_finite()) {
        return Err(Error::Degenerate("predictor"));
    }
    let suy: f64 = samples.iter().map(|s| s.predictor() * s.mean_excess).sum();
    let k = suy / suu;
    let mean = samples.iter().map(|s| s.mean_excess).sum::<f64>() / samples.len() as f64;
    let ss_res: f64 = samples.iter().map(|s| (s.mean_excess - k * s.predictor()).powi(2)).sum();
    let ss_tot: f64 = samples.iter().map(|s| (s.mean_excess - mean).powi(2)).sum();
    Ok(ResidualFit { k, r_squared: r_squared(ss_res, ss_tot) })
}

fn check_len(x: &[f64], j: &CouplingMatrix) -> Result<()> {
    if x.len() != j.n() {
        return Err(Error::DimensionMismatch { expected: j.n(), got: x.len() });
    }
    Ok(())
}

/// `H(x) = Σ (x²/4 − (1−p)/2) x² + c ΣΣ J_ij x_i x_j`.
pub fn soft_cost(x: &[f64], p: f64, c: f64, j: &CouplingMatrix) -> Result<f64> {
    check_len(x, j)?;
    let mut field = vec![0.0; x.len()];
    j.mul_vec(x, &mut field);
    let local: f64 = x.iter().map(|v| (v * v / 4.0 - (1.0 - p) / 2.0) * v * v).sum();
    let coupling: f64 = x.iter().zip(&field).map(|(v, f)| v * f).sum();
    Ok(local + c * coupling)
}

/// Gradient of [`soft_cost`].
pub fn soft_cost_gradient(x: &[f64], p: f64, c: f64, j: &CouplingMatrix) -> Result<Vec<f64>> {
    check_len(x, j)?;
    let n = x.len();
    let mut row = vec![0.0; n];
    j.mul_vec(x, &mut row);
    let mut col = vec![0.0; n];
    if j.is_symmetric() {
        col.copy_from_slice(&row);
    } else {
        for i in 0..n {
            j.for_each_in_row(i, |k, w| col[k] += w * x[i]);
        }
    }
    Ok((0..n)
        .map(|i| x[i].powi(3) - (1.0 - p) * x[i] + c * (row[i] + col[i]))
        .collect())
}

/// Energy of a spin configuration read out from amplitudes.
pub fn readout_energy(j: &CouplingMatrix, x: &[f64]) -> Result<f64> {
    ising_energy(j, &SpinConfig::from_amplitudes(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(best: &[f64], fin: &[f64], target: f64) -> BatchResult {
        let outcomes: Vec<Outcome> = best
            .iter()
            .zip(fin)
            .map(|(&b, &f)| Outcome { best_energy: b, best_step: 7, final_energy: f, diverged_at: None })
            .collect();
        BatchResult::from_outcomes("t", &outcomes, target, 100)
    }

    #[test]
    fn success_probability_cases() {
        let b = batch(&[-3.0; 4], &[-3.0; 4], -3.0);
        assert_eq!(success_probability(&b).unwrap(), 1.0);
        let b = batch(&[-1.0; 4], &[-1.0; 4], -3.0);
        assert_eq!(success_probability(&b).unwrap(), 0.0);
        let b = batch(&[-3.0, -3.0, -1.0, -3.0], &[-3.0; 4], -3.0);
        assert_eq!(success_probability(&b).unwrap(), 0.75);
        assert!(success_probability(&batch(&[], &[], 0.0)).is_err());
    }

    #[test]
    fn tts_cases() {
        assert!((tts(0.5, 1000.0).unwrap() - 6643.856).abs() < 0.01);
        assert_eq!(tts(1.0, 500.0).unwrap(), 500.0);
        assert_eq!(tts(0.0, 500.0).unwrap(), f64::INFINITY);
        assert!(tts(0.5, 0.0).is_err());
    }

    #[test]
    fn mvm_identity() {
        let b = batch(&[-3.0, -1.0], &[-3.0, -1.0], -3.0);
        let r = tts_report(&b).unwrap();
        assert_eq!(mvm_to_solution(&r), r.tts_steps);
        for t in [2e5, f64::INFINITY, 500.0] {
            let r = TtsReport { tts_steps: t, mvm_to_solution: t, ..r };
            assert_eq!(mvm_to_solution(&r), t);
        }
    }

    #[test]
    fn percentile_cases() {
        assert_eq!(percentiles(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.5]).unwrap(), vec![3.0]);
        assert_eq!(percentiles(&[7.0], &[0.0, 0.3, 1.0]).unwrap(), vec![7.0; 3]);
        assert_eq!(percentiles(&[1.0, f64::INFINITY], &[0.75]).unwrap(), vec![f64::INFINITY]);
        assert_eq!(percentiles(&[f64::INFINITY, 1.0], &[0.0]).unwrap(), vec![1.0]);
        assert!(percentiles(&[], &[0.5]).is_err());
    }

    #[test]
    fn scaling_fit_exact() {
        let f = scaling_fit(&[(100.0, 10.0), (400.0, 100.0)]).unwrap();
        assert!((f.b - 10f64.powf(0.1)).abs() < 1e-12);
        assert!((f.a - 1.0).abs() < 1e-12);
        let f = scaling_fit(&[(100.0, 5.0), (400.0, 5.0), (900.0, 5.0)]).unwrap();
        assert!((f.b - 1.0).abs() < 1e-12);
        assert!(scaling_fit(&[(100.0, 5.0), (100.0, 6.0)]).is_err());
    }

    #[test]
    fn lognormal_cases() {
        let f = lognormal_fit(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(f.sigma, 0.0);
        let e = std::f64::consts::E;
        let f = lognormal_fit(&[e, e.powi(3), f64::INFINITY]).unwrap();
        assert!((f.mu - 2.0).abs() < 1e-12 && (f.sigma - 1.0).abs() < 1e-12);
        assert_eq!(f.excluded, 1);
        assert!((f.unsolved_after((2.0f64).exp()) - 2.0).abs() < 1e-12);
        assert!(lognormal_fit(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn final_state_fraction() {
        let b = batch(&[-3.0, -3.0, -3.0, -1.0], &[-3.0, -3.0, -2.0, -1.0], -3.0);
        assert!((final_state_ground_fraction(&b).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let b = batch(&[-1.0], &[-1.0], -3.0);
        assert!(matches!(final_state_ground_fraction(&b), Err(Error::Undefined(_))));
    }

    #[test]
    fn residual_constant() {
        let s = ResidualSample { p: 0.0, alpha: 1.0, beta: 1.0, mean_excess: 2.0 };
        let f = residual_energy_constant(&[s]).unwrap();
        assert_eq!(f.k, 2.0);
        assert_eq!(f.predict(0.0, 1.0, 2.0), 1.0);
        let bad = ResidualSample { p: 1.0, ..s };
        assert!(residual_energy_constant(&[bad]).is_err());
    }

    #[test]
    fn soft_cost_cases() {
        let j = CouplingMatrix::from_dense(1, vec![0.0]).unwrap();
        assert_eq!(soft_cost(&[1.0], 1.0, 1.0, &j).unwrap(), 0.25);
        let j = crate::instances::sk_random(5, 2).unwrap();
        assert_eq!(soft_cost(&[0.0; 5], 0.3, 1.0, &j).unwrap(), 0.0);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100, 1.96).unwrap();
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.39 && hi < 0.61);
        let (lo, hi) = wilson_interval(0, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }
}
