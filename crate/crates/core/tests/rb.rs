// SPDX-License-Identifier: Apache-2.0

use rbfid::channel::{traceless_fidelity, SuperOp};
use rbfid::clifford::CliffordGroup;
use rbfid::noise::{amplitude_damping, build_noisy_gateset, depolarizing, NoiseModel};
use rbfid::rb::{fit_decay, run_rb, sequence_survival, FitConfig, RbConfig};

#[test]
fn exact_single_step_average_matches_decay_law() {
    let g = CliffordGroup::standard(2).unwrap();
    let e = amplitude_damping(0.05).unwrap().compose(&depolarizing(2, 0.97).unwrap());
    let noisy: Vec<SuperOp> = g.elements().iter().map(|x| e.compose(&x.op)).collect();
    let cfg = RbConfig::new(2, vec![1], 1, 0).unwrap();

    // Averaging independent Clifford frames turns every interior error into a
    // depolarizing channel with p = f_tr(E); the final error stays as is.
    let p = traceless_fidelity(&e, &SuperOp::identity(2)).unwrap();
    let mut rho0 = cfg.rho.clone();
    rho0.rows_mut(1, 3).fill(0.0);
    let bloch = &cfg.rho - &rho0;
    let b = cfg.mu.dot(&e.apply(&rho0));
    let a = cfg.mu.dot(&e.apply(&bloch));

    let mean = (0..g.len()).map(|i| sequence_survival(&g, &noisy, &cfg, &[i]).unwrap()).sum::<f64>() / g.len() as f64;
    assert!((mean - (a * p + b)).abs() < 1e-10, "{mean} vs {}", a * p + b);
}

#[test]
fn relabeled_gates_survive_perfectly() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::Relabel, &g).unwrap();
    let cfg = RbConfig::new(2, vec![1, 2, 4, 8, 16, 32, 64], 20, 3).unwrap();
    let table = run_rb(&g, &noisy, &cfg).unwrap();
    assert!(table.rows.iter().all(|r| (r.survival - 1.0).abs() < 1e-10));
    let fit = fit_decay(&table, &FitConfig::default()).unwrap();
    assert!((fit.p - 1.0).abs() < 1e-6, "{fit:?}");
}

#[test]
fn decay_constant_independent_of_measurement_noise() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::OverRotation { offset: 0.1, cz_offset: 0.0 }, &g).unwrap();
    let depths = vec![1, 2, 4, 8, 16, 32, 64, 128];
    let clean = RbConfig::new(2, depths.clone(), 200, 8).unwrap();
    let mut dirty = clean.clone();
    dirty.mu = depolarizing(2, 0.9).unwrap().apply(&dirty.mu);
    let fc = fit_decay(&run_rb(&g, &noisy, &clean).unwrap(), &FitConfig::default()).unwrap();
    let fd = fit_decay(&run_rb(&g, &noisy, &dirty).unwrap(), &FitConfig::default()).unwrap();
    assert!(fd.a < fc.a, "contrast should drop");
    assert!(fc.ci[2].0 <= fd.p && fd.p <= fc.ci[2].1, "{} not in {:?}", fd.p, fc.ci[2]);
    assert!(fd.ci[2].0 <= fc.p && fc.p <= fd.ci[2].1);
}

#[test]
fn two_qubit_survival_is_a_probability() {
    let g = CliffordGroup::standard(4).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::ZTilt { theta_z: 0.1, cz_offset: 0.1 }, &g).unwrap();
    let cfg = RbConfig::new(4, vec![1, 4, 16], 10, 2).unwrap();
    let table = run_rb(&g, &noisy, &cfg).unwrap();
    assert!(table.rows.iter().all(|r| (-1e-10..=1.0 + 1e-10).contains(&r.survival)));
    let ideal = build_noisy_gateset(&NoiseModel::Ideal, &g).unwrap();
    let table = run_rb(&g, &ideal, &cfg).unwrap();
    assert!(table.rows.iter().all(|r| (r.survival - 1.0).abs() < 1e-12));
}
