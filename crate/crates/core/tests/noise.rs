use cim_core::instances::sk_random;
use cim_core::presets::preset;
use cim_core::sde::{sde_step, NoiseParams, NoiseStream};
use cim_core::solvers::{run_lockstep, step, Member, RunOptions};
use cim_core::{SolverParams, SolverState, Variant};
use proptest::prelude::*;

fn final_x(params: &SolverParams, j: &cim_core::CouplingMatrix, seed: u64, noise: Option<&NoiseParams>) -> Vec<f64> {
    let opts = RunOptions { track_energy: false, checkpoints: vec![params.schedule.n_steps], energy_trace: false };
    let member = Member::seeded(params, j.n(), seed, noise);
    let t = run_lockstep(params, j, vec![member], noise, &opts).unwrap().pop().unwrap().unwrap();
    t.snapshots[0].1.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn vanishing_noise_matches_one_deterministic_step(which in 0usize..3, n in 4usize..24, seed in any::<u64>(), at in 0usize..1000) {
        let params = preset(["cac-sk", "cfc-sk", "sfc-sk"][which]).unwrap();
        let j = sk_random(n, seed).unwrap();
        let np = NoiseParams::new(1e-30, 1.0, seed).unwrap();
        let mut det = Member::seeded(&params, n, seed, None).state;
        for _ in 0..at % params.schedule.n_steps {
            step(&mut det, &j, &params).unwrap();
        }
        let mut noisy = det.clone();
        step(&mut det, &j, &params).unwrap();
        sde_step(&mut noisy, &j, &params, &np, &mut NoiseStream::new(seed)).unwrap();
        let dev = det.x.iter().zip(&noisy.x).chain(det.e.iter().zip(&noisy.e)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(dev <= 1e-12, "deviation {}", dev);
    }

    #[test]
    fn vanishing_noise_tracks_sfc_run(n in 4usize..40, seed in any::<u64>()) {
        // SFC does not amplify small perturbations, so the whole run stays close.
        let params = preset("sfc-sk").unwrap();
        let j = sk_random(n, seed).unwrap();
        let np = NoiseParams::new(1e-30, 1.0, seed).unwrap();
        let det = final_x(&params, &j, seed, None);
        let noisy = final_x(&params, &j, seed, Some(&np));
        let dev = det.iter().zip(&noisy).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(dev <= 1e-6, "deviation {}", dev);
    }

    #[test]
    fn seeded_noise_is_reproducible(which in 0usize..3, n in 4usize..16, seed in any::<u64>(), g in 1e-4f64..1e-2) {
        let params = preset(["cac-sk", "cfc-sk", "sfc-sk"][which]).unwrap().with_steps(100);
        let j = sk_random(n, seed).unwrap();
        let np = NoiseParams::new(g, 0.1, 3).unwrap();
        prop_assert_eq!(final_x(&params, &j, seed, Some(&np)), final_x(&params, &j, seed, Some(&np)));
        let other = NoiseParams::new(g, 0.1, 4).unwrap();
        prop_assert_ne!(final_x(&params, &j, seed, Some(&np)), final_x(&params, &j, seed, Some(&other)));
    }

    #[test]
    fn diffusion_variance_is_linear_in_dt(g in 1e-6f64..1.0, x in -2.0f64..2.0, dt in 1e-3f64..1.0) {
        let np = NoiseParams::new(g, 0.5, 0).unwrap();
        let full = np.signal_diffusion_std(x, dt).powi(2);
        let half = np.signal_diffusion_std(x, dt / 2.0).powi(2);
        prop_assert!((full - 2.0 * half).abs() <= 1e-12 * full);
        prop_assert!((np.error_diffusion_std(dt).powi(2) - 2.0 * np.error_diffusion_std(dt / 2.0).powi(2)).abs() <= 1e-15);
    }
}

/// Empirical one-step variance of SFC at the origin, where the drift vanishes
/// and only diffusion moves the state.
fn origin_step_variance(dt: f64) -> f64 {
    let j = sk_random(8, 1).unwrap();
    let mut params = preset("sfc-sk").unwrap();
    params.schedule = params.schedule.with_dt(dt);
    let np = NoiseParams::new(0.01, 1.0, 0).unwrap();
    let mut samples = Vec::new();
    for seed in 0..4000u64 {
        let mut state = SolverState::from_amplitudes(Variant::Sfc, vec![0.0; 8]);
        let mut stream = NoiseStream::new(seed);
        sde_step(&mut state, &j, &params, &np, &mut stream).unwrap();
        samples.extend(state.x);
    }
    samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64
}

#[test]
fn halving_dt_halves_step_variance() {
    let (a, b) = (origin_step_variance(0.2), origin_step_variance(0.1));
    // Expected variance is g²·½·dt; 32000 samples give about 1.6% relative error.
    assert!((a - 0.01 * 0.5 * 0.2).abs() / a < 0.05, "{a}");
    assert!((a / b - 2.0).abs() < 0.1, "ratio {}", a / b);
}

#[test]
fn every_step_draws_fresh_noise() {
    let j = sk_random(10, 2).unwrap();
    let params = preset("cfc-sk").unwrap();
    let np = NoiseParams::new(1e-3, 0.1, 0).unwrap();
    let mut stream = NoiseStream::new(11);
    let mut state = SolverState::from_amplitudes(Variant::Cfc, vec![0.05; 10]);
    let mut increments = Vec::new();
    for _ in 0..3 {
        let before = state.x.clone();
        let draws = stream.draws();
        sde_step(&mut state, &j, &params, &np, &mut stream).unwrap();
        assert_eq!(stream.draws() - draws, 4 * 10);
        increments.push(state.x.iter().zip(&before).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    assert_ne!(increments[0], increments[1]);
    assert_ne!(increments[1], increments[2]);
}
