//! Truncated-Wigner stochastic variants of CAC, CFC and SFC.
//!
//! Each step first infers noisy copies `x̃ = x + σ_inf·w`, `ẽ = e + σ_inf·w`
//! of the amplitudes (one homodyne tap per pulse), feeds them to the
//! coupling and the error pump, and then integrates the amplitudes with
//! Euler–Maruyama:
//!
//! ```text
//! x ← x + drift_x·Δt + sqrt(g²(½ + x²)Δt)·w₁
//! e ← e + drift_e·Δt + sqrt(g²Δt/2)·w₂
//! ```
//!
//! The multiplicative term uses the pre-step `x`. Drifts keep the signs of
//! the deterministic dynamics, so the limit `g² → 0`, `r_b = 1` reproduces
//! the deterministic trajectories.
//!
//! Draw order per step: `n` draws for `x̃`, `n` for `ẽ`, then `(w₁, w₂)` per
//! spin in index order. Every step consumes exactly `4n` standard normals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::CouplingMatrix;
use crate::rng::{self, TrajectoryRng};
use crate::schedule::StepParams;
use crate::solvers::kernels::{cac_rates, cfc_rates, clamp_sym, floor, sfc_rates};
use crate::solvers::{SolverParams, SolverState, Variant, CAC_X_FACTOR, CFC_E_FLOOR, CFC_X_BOUND};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Saturation parameter `g²`.
    pub g_sq: f64,
    /// Extraction beamsplitter reflectivity.
    pub r_b: f64,
    pub rng_seed: u64,
}

impl NoiseParams {
    pub fn new(g_sq: f64, r_b: f64, rng_seed: u64) -> Result<Self> {
        let np = Self { g_sq, r_b, rng_seed };
        np.validate()?;
        Ok(np)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_sq > 0.0 && self.g_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!("g_sq must be positive, got {}", self.g_sq)));
        }
        if !(self.r_b > 0.0 && self.r_b <= 1.0) {
            return Err(Error::InvalidParameter(format!("r_b must lie in (0, 1], got {}", self.r_b)));
        }
        Ok(())
    }

    /// Standard deviation added by homodyne inference.
    pub fn inference_std(&self) -> f64 {
        (self.g_sq * (1.0 - self.r_b) / (4.0 * self.r_b)).sqrt()
    }

    /// Per-step standard deviation of the signal diffusion at amplitude `x`.
    pub fn signal_diffusion_std(&self, x: f64, dt: f64) -> f64 {
        (self.g_sq * (0.5 + x * x) * dt).sqrt()
    }

    /// Per-step standard deviation of the error-pulse diffusion.
    pub fn error_diffusion_std(&self, dt: f64) -> f64 {
        (self.g_sq * dt * 0.5).sqrt()
    }
}

/// Inferred amplitude of `value` given a standard-normal `draw`.
pub fn infer(value: f64, noise: &NoiseParams, draw: f64) -> f64 {
    value + noise.inference_std() * draw
}

/// Per-trajectory standard-normal source with a draw counter.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: TrajectoryRng,
    draws: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: rng::stream(seed), draws: 0 }
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

/// Noisy measurement results of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredAmplitudes {
    pub x_tilde: Vec<f64>,
    pub e_tilde: Vec<f64>,
    /// Mutual-coupling signal built from `x̃` (`ẽ`-weighted for CAC and CFC).
    pub z_tilde: Vec<f64>,
}

/// Draws `x̃` and `ẽ` for every spin.
pub(crate) fn infer_inputs(
    state: &SolverState,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
    x_tilde: &mut [f64],
    e_tilde: &mut [f64],
) {
    let s = noise.inference_std();
    for (o, x) in x_tilde.iter_mut().zip(&state.x) {
        *o = x + s * stream.normal();
    }
    for (o, e) in e_tilde.iter_mut().zip(&state.e) {
        *o = e + s * stream.normal();
    }
}

/// Euler–Maruyama update given `field = J · x̃`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance_noisy(
    state: &mut SolverState,
    field: &[f64],
    x_tilde: &[f64],
    e_tilde: &[f64],
    xi: f64,
    sp: &StepParams,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) {
    let dt = sp.dt;
    let clamp = params.clamp;
    let e_std = noise.error_diffusion_std(dt);
    let SolverState { x, e, z, .. } = state;
    for i in 0..x.len() {
        let coupling = xi * field[i];
        let (dx, de, zi) = match params.variant {
            Variant::Cac => {
                let (dx, _, zi) = cac_rates(x[i], e_tilde[i], coupling, sp);
                (dx, -sp.beta * e[i] * (x_tilde[i] * x_tilde[i] - sp.alpha), zi)
            }
            Variant::Cfc => {
                let (dx, _, zi) = cfc_rates(x[i], e_tilde[i], coupling, sp);
                (dx, -sp.beta * e[i] * (zi * zi - sp.alpha), zi)
            }
            Variant::Sfc => sfc_rates(x[i], e[i], e_tilde[i], coupling, sp),
            other => unreachable!("no noisy model for {other}"),
        };
        let wx = stream.normal();
        let we = stream.normal();
        let nx = x[i] + dx * dt + noise.signal_diffusion_std(x[i], dt) * wx;
        let ne = e[i] + de * dt + e_std * we;
        z[i] = zi;
        match params.variant {
            Variant::Cac if clamp => {
                x[i] = clamp_sym(nx, CAC_X_FACTOR * sp.alpha.sqrt());
                e[i] = ne;
            }
            Variant::Cfc if clamp => {
                x[i] = clamp_sym(nx, CFC_X_BOUND);
                e[i] = floor(ne, CFC_E_FLOOR);
            }
            _ => {
                x[i] = nx;
                e[i] = ne;
            }
        }
    }
}

/// Inferred amplitudes of `state` without advancing it.
pub fn infer_amplitudes(
    state: &SolverState,
    j: &CouplingMatrix,
    variant: Variant,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<InferredAmplitudes> {
    noise.validate()?;
    check(state, j)?;
    let n = j.n();
    let mut x_tilde = vec![0.0; n];
    let mut e_tilde = vec![0.0; n];
    infer_inputs(state, noise, stream, &mut x_tilde, &mut e_tilde);
    let mut field = vec![0.0; n];
    j.mul_vec(&x_tilde, &mut field);
    let xi = j.xi();
    let z_tilde = field
        .iter()
        .zip(&e_tilde)
        .map(|(f, et)| match variant {
            Variant::Cac | Variant::Cfc => et * (xi * f),
            _ => xi * f,
        })
        .collect();
    Ok(InferredAmplitudes { x_tilde, e_tilde, z_tilde })
}

fn check(state: &SolverState, j: &CouplingMatrix) -> Result<()> {
    let n = j.n();
    if state.x.len() != n || state.e.len() != n || state.z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state.x.len() });
    }
    Ok(())
}

/// One stochastic step of `params.variant` (CAC, CFC or SFC).
pub fn sde_step(
    state: &mut SolverState,
    j: &CouplingMatrix,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<()> {
    noise.validate()?;
    if !params.variant.has_noisy_model() {
        return Err(Error::InvalidParameter(format!("variant `{}` has no noisy model", params.variant)));
    }
    check(state, j)?;
    let s = state.step;
    if s >= params.schedule.n_steps {
        return Err(Error::StepOutOfRange { step: s, n_steps: params.schedule.n_steps });
    }
    let n = j.n();
    let sp = params.schedule.at(s);
    let mut x_tilde = vec![0.0; n];
    let mut e_tilde = vec![0.0; n];
    infer_inputs(state, noise, stream, &mut x_tilde, &mut e_tilde);
    let mut field = vec![0.0; n];
    j.mul_vec(&x_tilde, &mut field);
    advance_noisy(state, &field, &x_tilde, &e_tilde, j.xi(), &sp, params, noise, stream);
    state.step += 1;
    if !state.is_finite() {
        return Err(Error::Divergence { step: s });
    }
    Ok(())
}

fn sde_step_as(
    variant: Variant,
    state: &mut SolverState,
    j: &CouplingMatrix,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<()> {
    if params.variant == variant {
        sde_step(state, j, params, noise, stream)
    } else {
        let mut p = params.clone();
        p.variant = variant;
        sde_step(state, j, &p, noise, stream)
    }
}

pub fn sde_step_cac(
    state: &mut SolverState,
    j: &CouplingMatrix,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<()> {
    sde_step_as(Variant::Cac, state, j, params, noise, stream)
}

pub fn sde_step_cfc(
    state: &mut SolverState,
    j: &CouplingMatrix,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<()> {
    sde_step_as(Variant::Cfc, state, j, params, noise, stream)
}

pub fn sde_step_sfc(
    state: &mut SolverState,
    j: &CouplingMatrix,
    params: &SolverParams,
    noise: &NoiseParams,
    stream: &mut NoiseStream,
) -> Result<()> {
    sde_step_as(Variant::Sfc, state, j, params, noise, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::sk_random;
    use crate::schedule::{Ramp, Schedule};

    fn params(variant: Variant) -> SolverParams {
        let mut s = Schedule::full_ramp(50, 0.1);
        s.p = Ramp::linear(-1.0, 1.0);
        s.beta = Ramp::fixed(0.2);
        s.c = Ramp::fixed(2.0);
        s.k = Ramp::fixed(0.2);
        SolverParams::new(variant, s)
    }

    #[test]
    fn inference_noise_closed_forms() {
        let np = NoiseParams::new(1.0, 1.0, 0).unwrap();
        assert_eq!(infer(0.3, &np, 2.5), 0.3);
        let np = NoiseParams::new(1.0, 0.1, 0).unwrap();
        assert!((np.inference_std() - 1.5).abs() < 1e-12);
        assert!(NoiseParams::new(0.0, 0.5, 0).is_err());
        assert!(NoiseParams::new(1e-3, 0.0, 0).is_err());
        assert!(NoiseParams::new(1e-3, 1.5, 0).is_err());
    }

    #[test]
    fn diffusion_at_origin() {
        let np = NoiseParams::new(1e-2, 1.0, 0).unwrap();
        assert!((np.signal_diffusion_std(0.0, 0.1) - (1e-2f64 * 0.1 / 2.0).sqrt()).abs() < 1e-15);
        assert!((np.error_diffusion_std(0.1) - (1e-2f64 * 0.1 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn consumes_four_draws_per_spin() {
        let j = sk_random(12, 4).unwrap();
        let np = NoiseParams::new(1e-3, 0.5, 9).unwrap();
        for v in [Variant::Cac, Variant::Cfc, Variant::Sfc] {
            let p = params(v);
            let mut st = SolverState::from_amplitudes(v, vec![0.05; 12]);
            let mut stream = NoiseStream::new(1);
            for _ in 0..3 {
                sde_step(&mut st, &j, &p, &np, &mut stream).unwrap();
            }
            assert_eq!(stream.draws(), 3 * 4 * 12);
        }
    }

    #[test]
    fn cfc_pump_at_zero_signal() {
        // z̃ = 0 leaves de = βα·e per unit time.
        let j = CouplingMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let np = NoiseParams::new(1e-300, 1.0, 0).unwrap();
        let mut p = params(Variant::Cfc);
        p.schedule.alpha = Ramp::fixed(1.0);
        let mut st = SolverState::from_amplitudes(Variant::Cfc, vec![0.0, 0.0]);
        st.e = vec![0.5, 0.5];
        sde_step_cfc(&mut st, &j, &p, &np, &mut NoiseStream::new(3)).unwrap();
        let expect = 0.5 + 0.2 * 1.0 * 0.5 * 0.1;
        assert!((st.e[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_variants_without_noise_model() {
        let j = sk_random(4, 1).unwrap();
        let np = NoiseParams::new(1e-3, 1.0, 0).unwrap();
        let p = params(Variant::Tanh);
        let mut st = SolverState::from_amplitudes(Variant::Tanh, vec![0.1; 4]);
        assert!(sde_step(&mut st, &j, &p, &np, &mut NoiseStream::new(0)).is_err());
    }
}
