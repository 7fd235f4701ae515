use cim_core::energy::{energy_report, EnergyParams};
use cim_wasm::{correlation_impl, energy_impl, preset_list, traces_impl};

#[test]
fn preset_list_has_three_columns() {
    let list = preset_list();
    assert!(list.lines().all(|l| l.split('\t').count() == 3));
    assert!(list.lines().any(|l| l.starts_with("sfc-sk\t500\t")));
}

#[test]
fn traces_have_consistent_shapes() {
    let t = traces_impl("cfc-sk", 20, 1, 2, 7).unwrap();
    let steps = t.steps();
    assert_eq!(steps[0], 0);
    assert_eq!(*steps.last().unwrap(), 1000);
    assert_eq!(t.amplitudes().len(), steps.len() * t.n());
    assert_eq!(t.energy().len(), 1001);
    let min = t.energy().iter().copied().fold(f64::INFINITY, f64::min);
    assert!((t.best_energy() - min).abs() < 1e-9);
}

#[test]
fn correlation_starts_near_one_and_rejects_bad_input() {
    let v = correlation_impl("sfc-fixed", 50, 3, 2, 0.01, 5).unwrap();
    assert_eq!(&v[..5], &[0.0, 1000.0, 2000.0, 3000.0, 4000.0]);
    assert!(v[5] > 0.99);
    assert!(correlation_impl("sfc-fixed", 1, 3, 2, 0.01, 5).is_err());
    assert!(correlation_impl("sfc-fixed", 50, 3, 0, 0.01, 5).is_err());
    assert!(correlation_impl("nope", 50, 3, 1, 0.01, 5).is_err());
}

#[test]
fn energy_matches_core_report() {
    let v = energy_impl(0.5, 1000.0, 100, 1e-3).unwrap();
    let mvm = 1000.0 * 0.01f64.ln() / 0.5f64.ln();
    assert_eq!(v[0], mvm);
    let r = energy_report(mvm, 100, &EnergyParams { g_sq: 1e-3, ..EnergyParams::default() }).unwrap();
    assert_eq!(&v[1..], &[r.e_main, r.e_correction, r.e_factory, r.e_total]);
    assert!(energy_impl(0.0, 1000.0, 100, 1e-3).unwrap()[4].is_infinite());
    assert!(energy_impl(0.5, 1000.0, 100, -1.0).is_err());
}
