mod common;

use common::*;
use qreservoir::circuit::{build_layer, SubsystemLayout};
use qreservoir::engine::{
    derive_seed, run_reservoir, sampled_z_expectations, FeatureSeries, Reservoir, ReservoirConfig, Shots,
    Split, Window,
};
use qreservoir::noise::DeviceNoiseProfile;
use qreservoir::quantum::{ComplexMatrix, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(n: usize, preset: &str, shots: Shots, seed: u64) -> ReservoirConfig {
    ReservoirConfig {
        layout: SubsystemLayout::adjacent(n).unwrap(),
        scale: 2.0,
        profile: DeviceNoiseProfile::preset(preset, n).unwrap(),
        shots,
        seed,
    }
}

fn inputs(m: usize) -> Vec<f64> {
    (0..m).map(|k| 0.1 + 0.08 * (0.37 * k as f64).sin()).collect()
}

#[test]
fn exact_features_follow_the_unitary_trajectory() {
    let n = 4;
    let res = Reservoir::new(config(n, "noiseless", Shots::Exact, 0)).unwrap();
    let start = random_density(n, 21);
    let us = inputs(6);
    let features = res.run_from(&start, &us).unwrap();
    let mut rho = start.matrix().clone();
    for (t, &u) in us.iter().enumerate() {
        let layer = build_layer(u, &res.config().layout, 2.0).unwrap();
        let op = layer.gates().iter().fold(ComplexMatrix::identity(1 << n), |acc, g| {
            embed(g.matrix(), g.targets(), n).matmul(&acc).unwrap()
        });
        rho = conjugate(&op, &rho);
        for q in 0..n {
            assert!((features.row(t + 1)[q] - naive_z(&rho, q)).abs() < 1e-12);
        }
    }
}

#[test]
fn noisy_trajectory_features_are_its_z_values() {
    let res = Reservoir::new(config(4, "strong-dense", Shots::Exact, 0)).unwrap();
    let us = inputs(10);
    let traj = res.trajectory(&res.initial_state().unwrap(), &us).unwrap();
    let features = res.run(&us).unwrap();
    for (t, state) in traj.iter().enumerate() {
        state.validate(true).unwrap();
        for q in 0..4 {
            assert!((features.row(t + 1)[q] - naive_z(state.matrix(), q)).abs() < 1e-12);
        }
    }
}

#[test]
fn plus_start_without_noise_has_zero_features() {
    let f = run_reservoir(&inputs(20), &config(4, "noiseless", Shots::Exact, 0)).unwrap();
    assert!(f.values().iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn sampled_features_are_seed_deterministic_and_thread_independent() {
    let cfg = config(4, "strong-dense", Shots::Finite(512), 77);
    let us = inputs(30);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_reservoir(&us, &cfg).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a, run_reservoir(&us, &cfg).unwrap());
    let other = run_reservoir(&us, &ReservoirConfig { seed: 78, ..cfg.clone() }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn sampled_features_converge_to_exact() {
    let us = inputs(15);
    let exact = run_reservoir(&us, &config(4, "strong-dense", Shots::Exact, 0)).unwrap();
    let mut profile = DeviceNoiseProfile::preset("strong-dense", 4).unwrap();
    profile.readout_flip = (0.0, 0.0);
    let shots = 20_000u64;
    let cfg = ReservoirConfig { profile, ..config(4, "strong-dense", Shots::Finite(shots), 5) };
    let sampled = run_reservoir(&us, &cfg).unwrap();
    let bound = 5.0 / (shots as f64).sqrt();
    for (a, b) in exact.values().iter().zip(sampled.values()) {
        assert!((a - b).abs() < bound, "{a} vs {b}");
    }
}

#[test]
fn readout_flips_bias_a_known_state() {
    let state = DensityMatrix::basis_state(1, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z = sampled_z_expectations(&state, 100_000, (0.1, 0.0), &mut rng).unwrap();
    // ⟨Z⟩ = 1 − 2·P(0→1).
    assert!((z[0] - 0.8).abs() < 5.0 * (0.36f64 / 100_000.0).sqrt());
}

#[test]
fn csv_round_trip_is_exact() {
    let f = run_reservoir(&inputs(12), &config(4, "weak-sparse", Shots::Exact, 0)).unwrap();
    let back = FeatureSeries::from_csv(&f.to_csv()).unwrap();
    assert_eq!(f, back);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    f.write_csv(&path).unwrap();
    assert_eq!(FeatureSeries::from_csv(&std::fs::read_to_string(path).unwrap()).unwrap(), f);
}

#[test]
fn windows_and_splits() {
    let s = Split::NARMA;
    assert_eq!(s.train_window(), Window::new(11, 80));
    assert_eq!(s.test_window(), Window::new(81, 100));
    assert_eq!(s.total(), 100);
    let f = FeatureSeries::from_rows(&(1..=5).map(|t| vec![t as f64]).collect::<Vec<_>>()).unwrap();
    assert_eq!(f.channel(0, Window::new(2, 4)), vec![2.0, 3.0, 4.0]);
    assert!(f.slice(Window::new(4, 6)).is_err());
}

#[test]
fn derived_seeds_separate_paths() {
    let mut seen = std::collections::HashSet::new();
    for a in 0..20u64 {
        for b in 0..20u64 {
            assert!(seen.insert(derive_seed(2024, &[a, b])));
        }
    }
    assert_eq!(derive_seed(1, &[4]), derive_seed(1, &[4]));
}

#[test]
fn invalid_inputs_are_rejected() {
    let cfg = config(2, "noiseless", Shots::Exact, 0);
    assert!(run_reservoir(&[], &cfg).is_err());
    assert!(run_reservoir(&[f64::NAN], &cfg).is_err());
    assert!(Shots::parse("0").is_err());
    assert_eq!(Shots::parse("EXACT").unwrap(), Shots::Exact);
    let mismatched = ReservoirConfig { profile: DeviceNoiseProfile::noiseless(4), ..cfg };
    assert!(Reservoir::new(mismatched).is_err());
}

#[test]
fn only_amplitude_damping_breaks_the_x_flip_symmetry() {
    // X⊗n commutes with every gate, depolarizing, dephasing and ZZ, fixes
    // |+⟩⊗n and flips each Z, so those terms alone leave ⟨Z⟩ at zero.
    let mut profile = DeviceNoiseProfile::preset("strong-dense", 4).unwrap();
    profile.gamma_idle = 0.0;
    let cfg = ReservoirConfig { profile: profile.clone(), ..config(4, "strong-dense", Shots::Exact, 0) };
    let f = run_reservoir(&inputs(30), &cfg).unwrap();
    assert!(f.values().iter().all(|v| v.abs() < 1e-12));
    profile.gamma_idle = 0.01;
    let cfg = ReservoirConfig { profile, ..cfg };
    let f = run_reservoir(&inputs(30), &cfg).unwrap();
    assert!(f.values().iter().any(|v| v.abs() > 1e-3));
}
