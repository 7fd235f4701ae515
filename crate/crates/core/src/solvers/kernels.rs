//! Per-spin right-hand sides and Euler updates.
//!
//! `field` is always the raw product `J · input` (no ξ); each kernel applies
//! its own normalization.

use super::{SolverParams, SolverState, Variant};
use crate::schedule::StepParams;

/// Bound of the CFC amplitude clamp.
pub const CFC_X_BOUND: f64 = 1.5;
/// Floor of the CFC error amplitude.
pub const CFC_E_FLOOR: f64 = 0.01;
/// CAC clamps `x` to `±CAC_X_FACTOR·sqrt(α)`.
pub const CAC_X_FACTOR: f64 = 1.5;

#[inline]
pub(crate) fn clamp_sym(v: f64, bound: f64) -> f64 {
    // NaN passes through so divergence stays detectable.
    if v > bound {
        bound
    } else if v < -bound {
        -bound
    } else {
        v
    }
}

#[inline]
pub(crate) fn floor(v: f64, lo: f64) -> f64 {
    if v < lo {
        lo
    } else {
        v
    }
}

/// `sign` with `sign(0) = 0`, used inside the bifurcation dynamics.
#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn gain(x: f64, p: f64) -> f64 {
    -x * x * x + (p - 1.0) * x
}

/// Rates `(dx/dt, de/dt, z)` for chaotic amplitude control.
#[inline]
pub(crate) fn cac_rates(x: f64, e: f64, coupling: f64, sp: &StepParams) -> (f64, f64, f64) {
    let z = e * coupling;
    (gain(x, sp.p) - z, -sp.beta * e * (x * x - sp.alpha), z)
}

/// Rates for chaotic feedback control.
#[inline]
pub(crate) fn cfc_rates(x: f64, e: f64, coupling: f64, sp: &StepParams) -> (f64, f64, f64) {
    let z = e * coupling;
    (gain(x, sp.p) - z, -sp.beta * e * (z * z - sp.alpha), z)
}

/// Rates for separated feedback control. `e_fb` is the error amplitude seen
/// by the signal (equal to `e` without measurement noise).
#[inline]
pub(crate) fn sfc_rates(x: f64, e: f64, e_fb: f64, coupling: f64, sp: &StepParams) -> (f64, f64, f64) {
    let z = coupling;
    (
        gain(x, sp.p) - (sp.c * z).tanh() - sp.k * (z - e_fb),
        -sp.beta * (e - z),
        z,
    )
}

#[inline]
pub(crate) fn linear_rate(x: f64, coupling: f64, sp: &StepParams) -> f64 {
    gain(x, sp.p) - coupling
}

#[inline]
pub(crate) fn tanh_rate(x: f64, coupling: f64, sp: &StepParams) -> f64 {
    gain(x, sp.p) - (sp.c * coupling).tanh()
}

/// Writes the vector that multiplies `J` for this variant.
pub(crate) fn fill_input(variant: Variant, x: &[f64], input: &mut [f64]) {
    match variant {
        Variant::Dsbm => {
            for (o, v) in input.iter_mut().zip(x) {
                *o = sign0(*v);
            }
        }
        _ => input.copy_from_slice(x),
    }
}

/// Pump fraction of the bifurcation machine at `step`.
#[inline]
pub(crate) fn sbm_pump(step: usize, n_steps: usize) -> f64 {
    if n_steps == 0 {
        0.0
    } else {
        step as f64 / n_steps as f64
    }
}

/// One explicit update of `state` given `field = J · input`.
pub(crate) fn advance(
    state: &mut SolverState,
    field: &[f64],
    xi: f64,
    sp: &StepParams,
    params: &SolverParams,
) {
    let dt = sp.dt;
    let clamp = params.clamp;
    let SolverState { x, e, y, z, step } = state;
    match params.variant {
        Variant::Cac => {
            let bound = CAC_X_FACTOR * sp.alpha.sqrt();
            for i in 0..x.len() {
                let (dx, de, zi) = cac_rates(x[i], e[i], xi * field[i], sp);
                z[i] = zi;
                let nx = x[i] + dx * dt;
                x[i] = if clamp { clamp_sym(nx, bound) } else { nx };
                e[i] += de * dt;
            }
        }
        Variant::Cfc => {
            for i in 0..x.len() {
                let (dx, de, zi) = cfc_rates(x[i], e[i], xi * field[i], sp);
                z[i] = zi;
                let nx = x[i] + dx * dt;
                let ne = e[i] + de * dt;
                if clamp {
                    x[i] = clamp_sym(nx, CFC_X_BOUND);
                    e[i] = floor(ne, CFC_E_FLOOR);
                } else {
                    x[i] = nx;
                    e[i] = ne;
                }
            }
        }
        Variant::Sfc => {
            for i in 0..x.len() {
                let (dx, de, zi) = sfc_rates(x[i], e[i], e[i], xi * field[i], sp);
                z[i] = zi;
                x[i] += dx * dt;
                e[i] += de * dt;
            }
        }
        Variant::Linear => {
            for i in 0..x.len() {
                let zi = xi * field[i];
                z[i] = zi;
                x[i] += linear_rate(x[i], zi, sp) * dt;
            }
        }
        Variant::Tanh => {
            for i in 0..x.len() {
                let zi = xi * field[i];
                z[i] = zi;
                x[i] += tanh_rate(x[i], zi, sp) * dt;
            }
        }
        Variant::Dsbm => {
            let a = sbm_pump(*step, params.schedule.n_steps);
            let strength = sp.c * params.sbm_coupling_scale * xi;
            for i in 0..x.len() {
                let zi = strength * field[i];
                z[i] = zi;
                y[i] += dt * (-(1.0 - a) * x[i] - zi);
                x[i] += dt * y[i];
                if x[i].abs() > 1.0 {
                    x[i] = sign0(x[i]);
                    y[i] = 0.0;
                }
            }
        }
    }
}
