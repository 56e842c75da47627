mod common;

use common::*;
use qreservoir::circuit::{apply_layer, build_layer, SubsystemLayout};
use qreservoir::noise::{
    amplitude_damping_channel, apply_device_noise, depolarizing_channel, load_noise_profile,
    phase_damping_channel, zz_crosstalk_gate, DeviceNoiseProfile, NoiseModel, Topology,
};
use qreservoir::quantum::{ComplexMatrix, DensityMatrix};
use qreservoir::Error;

fn profile_path(name: &str) -> String {
    format!("{}/profiles/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// `p · I/2 ⊗ Tr_q(ρ)` re-embedded at qubit `q`, by index arithmetic.
fn replace_with_mixed(rho: &ComplexMatrix, q: usize) -> ComplexMatrix {
    let d = rho.rows();
    let bit = 1 << q;
    let mut data = vec![c(0.0, 0.0); d * d];
    for r in 0..d {
        for col in 0..d {
            if (r & bit) == (col & bit) {
                let r0 = r & !bit;
                let c0 = col & !bit;
                data[r * d + col] = (rho.get(r0, c0) + rho.get(r0 | bit, c0 | bit)) * 0.5;
            }
        }
    }
    ComplexMatrix::from_vec(d, d, data).unwrap()
}

#[test]
fn depolarizing_matches_partial_trace_form() {
    let rho = random_density(3, 2);
    for p in [0.0, 0.1, 0.75, 1.0] {
        let out = rho.apply_channel(&depolarizing_channel(p, &[1]).unwrap()).unwrap();
        let expect = rho
            .matrix()
            .scale(c(1.0 - p, 0.0))
            .add(&replace_with_mixed(rho.matrix(), 1).scale(c(p, 0.0)))
            .unwrap();
        assert_close(out.matrix(), &expect, 1e-13);
    }
}

#[test]
fn two_qubit_depolarizing_on_full_register() {
    let rho = random_density(2, 4);
    let p = 0.3;
    let out = rho.apply_channel(&depolarizing_channel(p, &[0, 1]).unwrap()).unwrap();
    let expect = rho
        .matrix()
        .scale(c(1.0 - p, 0.0))
        .add(&ComplexMatrix::identity(4).scale(c(p / 4.0, 0.0)))
        .unwrap();
    assert_close(out.matrix(), &expect, 1e-13);
}

#[test]
fn damping_channels_act_as_documented() {
    let gamma = 0.3;
    let one = DensityMatrix::basis_state(1, 1).unwrap();
    let out = one.apply_channel(&amplitude_damping_channel(gamma, 0).unwrap()).unwrap();
    assert!((out.matrix().get(0, 0).re - gamma).abs() < 1e-15);
    let plus = DensityMatrix::plus_state(1).unwrap();
    let ad = plus.apply_channel(&amplitude_damping_channel(gamma, 0).unwrap()).unwrap();
    assert!((ad.matrix().get(0, 1).re - 0.5 * (1.0 - gamma).sqrt()).abs() < 1e-15);
    let pd = plus.apply_channel(&phase_damping_channel(0.36, 0).unwrap()).unwrap();
    assert!((pd.matrix().get(0, 1).re - 0.5 * 0.8).abs() < 1e-15);
    assert!((pd.matrix().get(0, 0).re - 0.5).abs() < 1e-15);
}

#[test]
fn crosstalk_is_a_zz_phase() {
    let theta = 0.4;
    let g = zz_crosstalk_gate(theta, (0, 1)).unwrap();
    let rho = DensityMatrix::plus_state(2).unwrap().apply_unitary(&g).unwrap();
    // ⟨00|ρ|01⟩ picks up e^{-iθ/2}·e^{-iθ/2} = e^{-iθ}.
    let expect = c(0.0, -theta).exp() * 0.25;
    assert!((rho.matrix().get(0, 1) - expect).norm() < 1e-15);
    assert!(rho.pauli_z_expectations().iter().all(|z| z.abs() < 1e-15));
}

#[test]
fn device_step_order_matches_manual_composition() {
    let n = 4;
    let profile = DeviceNoiseProfile::preset("strong-dense", n).unwrap();
    let layout = SubsystemLayout::adjacent(n).unwrap();
    let layer = build_layer(0.12, &layout, 2.0).unwrap();
    let rho = random_density(n, 9);

    let mut manual = rho.matrix().clone();
    for g in layer.gates() {
        manual = conjugate(&embed(g.matrix(), g.targets(), n), &manual);
        let p = if g.num_targets() == 1 { profile.p1 } else { profile.p2 };
        let ch = depolarizing_channel(p, g.targets()).unwrap();
        manual = naive_channel(&DensityMatrix::from_matrix(manual).unwrap(), &ch);
    }
    for &e in profile.topology.edges() {
        let g = zz_crosstalk_gate(profile.zz_theta, e).unwrap();
        manual = conjugate(&embed(g.matrix(), g.targets(), n), &manual);
    }
    for q in 0..n {
        for ch in [
            amplitude_damping_channel(profile.gamma_idle, q).unwrap(),
            phase_damping_channel(profile.lambda_idle, q).unwrap(),
        ] {
            manual = naive_channel(&DensityMatrix::from_matrix(manual).unwrap(), &ch);
        }
    }
    let model = NoiseModel::new(profile.clone()).unwrap();
    let mut fast = rho.clone();
    model.step(&mut fast, &layer).unwrap();
    assert_close(fast.matrix(), &manual, 1e-12);
    let via_fn = apply_device_noise(&rho, &profile, &layer).unwrap();
    assert_close(via_fn.matrix(), &manual, 1e-12);
}

#[test]
fn noiseless_profile_is_the_bare_layer() {
    let layout = SubsystemLayout::adjacent(4).unwrap();
    let layer = build_layer(0.3, &layout, 2.0).unwrap();
    let rho = random_density(4, 1);
    let out = apply_device_noise(&rho, &DeviceNoiseProfile::noiseless(4), &layer).unwrap();
    assert_close(out.matrix(), apply_layer(&rho, &layer).unwrap().matrix(), 1e-14);
}

#[test]
fn shipped_profiles_equal_presets() {
    for (file, preset) in [("strong-dense-8q.toml", "strong-dense"), ("weak-sparse-8q.toml", "weak-sparse")] {
        let loaded = DeviceNoiseProfile::load(profile_path(file)).unwrap();
        let built = DeviceNoiseProfile::preset(preset, 8).unwrap();
        let mut a = loaded.topology.edges().to_vec();
        let mut b = built.topology.edges().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b, "{file}");
        assert_eq!((loaded.p1, loaded.p2, loaded.gamma_idle, loaded.lambda_idle), (built.p1, built.p2, built.gamma_idle, built.lambda_idle));
        assert_eq!((loaded.zz_theta, loaded.readout_flip), (built.zz_theta, built.readout_flip));
    }
}

#[test]
fn profile_documents_round_trip() {
    let p = DeviceNoiseProfile::preset("weak-sparse", 6).unwrap();
    let back = DeviceNoiseProfile::from_toml_str(&p.to_toml_string()).unwrap();
    assert_eq!(p, back);
    assert_eq!(load_noise_profile("preset:noiseless", 2).unwrap(), DeviceNoiseProfile::noiseless(2));
}

#[test]
fn profile_errors_name_the_field() {
    let bad = "[gates]\np1 = 1.5\n[topology]\nnum_qubits = 2\n";
    let err = DeviceNoiseProfile::from_toml_str(bad).unwrap_err();
    assert!(err.to_string().contains("gates.p1"), "{err}");
    assert!(DeviceNoiseProfile::from_toml_str("[topology]\nnum_qubits = 2\nedges = [\"0-5\"]\n").is_err());
    assert!(DeviceNoiseProfile::from_toml_str("[gates]\np3 = 0.1\n[topology]\nnum_qubits = 2\n").is_err());
    assert!(matches!(Topology::new(3, vec![(1, 1)]), Err(Error::InvalidTopology(_))));
}
