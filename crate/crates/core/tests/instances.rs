use cim_core::instances::{brute_force_ground, cut_value, ising_energy, parse_gset, sk_random, to_gset};
use cim_core::{CouplingMatrix, SpinConfig};
use proptest::prelude::*;

/// Symmetric matrix with small integer weights and a zero diagonal.
fn symmetric(max_n: usize) -> impl Strategy<Value = CouplingMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-3i32..=3, n * (n - 1) / 2).prop_map(move |upper| {
            let mut d = vec![0.0; n * n];
            let mut it = upper.into_iter();
            for i in 0..n {
                for k in (i + 1)..n {
                    let w = f64::from(it.next().unwrap());
                    d[i * n + k] = w;
                    d[k * n + i] = w;
                }
            }
            CouplingMatrix::from_dense(n, d).unwrap()
        })
    })
}

fn with_spins(max_n: usize) -> impl Strategy<Value = (CouplingMatrix, SpinConfig)> {
    symmetric(max_n).prop_flat_map(|j| {
        let n = j.n();
        (Just(j), prop::collection::vec(prop::bool::ANY, n))
            .prop_map(|(j, b)| (j, SpinConfig::new(b.into_iter().map(|s| if s { 1 } else { -1 }).collect()).unwrap()))
    })
}

fn naive_energy(j: &CouplingMatrix, s: &SpinConfig) -> f64 {
    let n = j.n();
    let sp = s.spins();
    let mut e = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                e += j.get(a, b) * f64::from(sp[a]) * f64::from(sp[b]);
            }
        }
    }
    e / 2.0
}

proptest! {
    #[test]
    fn energy_is_flip_symmetric((j, s) in with_spins(12)) {
        prop_assert_eq!(ising_energy(&j, &s).unwrap(), ising_energy(&j, &s.flipped()).unwrap());
    }

    #[test]
    fn energy_matches_double_sum((j, s) in with_spins(12)) {
        prop_assert!((ising_energy(&j, &s).unwrap() - naive_energy(&j, &s)).abs() < 1e-9);
    }

    #[test]
    fn cut_relates_to_energy((j, s) in with_spins(12)) {
        let n = j.n();
        let upper: f64 = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).map(|(a, b)| j.get(a, b)).sum();
        let expected = (upper - ising_energy(&j, &s).unwrap()) / 2.0;
        prop_assert!((cut_value(&j, &s).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn gset_round_trip(j in symmetric(14)) {
        let text = to_gset(&j).unwrap();
        let back = parse_gset(&text).unwrap();
        prop_assert_eq!(back.to_dense(), j.to_dense());
        prop_assert_eq!(parse_gset(&to_gset(&back).unwrap()).unwrap().to_dense(), j.to_dense());
    }

    #[test]
    fn xi_matches_entries(j in symmetric(14)) {
        let ss: f64 = j.to_dense().iter().map(|v| v * v).sum();
        let expected = if ss > 0.0 { (2.0 * j.n() as f64 / ss).sqrt() } else { 1.0 };
        prop_assert!((j.xi() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn sk_entries_are_unit_and_dense(n in 2usize..40, seed in any::<u64>()) {
        let j = sk_random(n, seed).unwrap();
        let d = j.to_dense();
        prop_assert_eq!(d.iter().filter(|v| **v != 0.0).count(), n * (n - 1));
        let unit = d.iter().enumerate().all(|(k, v)| if k / n == k % n { *v == 0.0 } else { v.abs() == 1.0 });
        prop_assert!(unit);
        prop_assert!(j.is_symmetric());
    }

    #[test]
    fn ground_witness_is_optimal((j, s) in with_spins(10)) {
        let g = brute_force_ground(&j).unwrap();
        prop_assert_eq!(ising_energy(&j, &g.witness).unwrap(), g.energy);
        prop_assert!(g.degeneracy >= 2);
        prop_assert!(ising_energy(&j, &s).unwrap() >= g.energy);
    }

    #[test]
    fn sparse_storage_gives_same_products(n in 12usize..40, seed in any::<u64>(), x in prop::collection::vec(-2.0f64..2.0, 40)) {
        // A ring has density 2/n < 10%, so it is stored sparse above 20 spins.
        let edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, if (seed >> (i % 64)) & 1 == 0 { 1.0 } else { -1.0 })).collect();
        let sparse = CouplingMatrix::from_edges(n, &edges).unwrap();
        let dense = CouplingMatrix::from_dense(n, sparse.to_dense()).unwrap();
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        sparse.mul_vec(&x[..n], &mut a);
        dense.mul_vec(&x[..n], &mut b);
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}

#[test]
fn duplicate_edges_are_rejected() {
    assert!(parse_gset("3 2\n1 2 1\n2 1 1\n").is_err());
}

#[test]
fn gset_indices_are_one_based() {
    let j = parse_gset("3 1\n1 3 -2\n").unwrap();
    assert_eq!(j.get(0, 2), -2.0);
    assert_eq!(j.get(2, 0), -2.0);
    assert!(parse_gset("3 1\n0 1 1\n").is_err());
}
