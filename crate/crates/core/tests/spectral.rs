// SPDX-License-Identifier: Apache-2.0

mod common;

use nalgebra::DMatrix;
use rbfid::channel::{traceless_fidelity, SuperOp, TracelessProjector};
use rbfid::clifford::CliffordGroup;
use rbfid::correct::{find_basis, perturbation_report, AscentConfig};
use rbfid::noise::{build_noisy_gateset, depolarizing, rotation, NoiseModel};
use rbfid::twirl::{build_twirl, dominant_spectrum, fidelity_curve_exact, fidelity_curve_mc};

fn cosine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

#[test]
fn order_two_error_matches_enumeration() {
    let g = CliffordGroup::standard(2).unwrap();
    for (name, model) in common::shipped_d2() {
        let noisy = build_noisy_gateset(&model, &g).unwrap();
        let t = build_twirl(&g, &noisy).unwrap();
        let s = dominant_spectrum(&t).unwrap();
        let oracle = common::enumerated_order2(&g, &noisy);
        let block = oracle.view((1, 1), (3, 3)).into_owned();
        let err = (&block - t.order_m_errors(2).right).amax();
        assert!(err < 1e-10, "{name}: {err}");
        let a2 = s.a_m(&t, 2);
        let err = (a2.view((1, 1), (3, 3)) * s.p.powi(2) - &block).amax();
        assert!(err < 1e-10, "{name}: {err}");
    }
}

#[test]
fn sandwich_eigen_operators_follow_the_error_channels() {
    for dim in [2, 4] {
        let g = CliffordGroup::standard(dim).unwrap();
        let left = depolarizing(dim, 0.99).unwrap();
        let right = if dim == 2 {
            rotation([0.2, -0.4, 1.0], 0.07).unwrap()
        } else {
            rotation([0.0, 1.0, 0.0], 0.07).unwrap().kron(&SuperOp::identity(2)).unwrap()
        };
        let noisy: Vec<SuperOp> = g.elements().iter().map(|e| left.compose(&e.op).compose(&right)).collect();
        let t = build_twirl(&g, &noisy).unwrap();
        let s = dominant_spectrum(&t).unwrap();
        let pi = TracelessProjector::new(dim).matrix();
        assert!((cosine(&s.b_inf, &(left.matrix() * &pi)) - 1.0).abs() < 1e-10);
        assert!((cosine(&s.a_inf, &(&pi * right.matrix())) - 1.0).abs() < 1e-10);
        let p = traceless_fidelity(&right.compose(&left), &SuperOp::identity(dim)).unwrap();
        assert!((s.p - p).abs() < 1e-10, "{} vs {p}", s.p);
    }
}

#[test]
fn bauer_fike_bound_on_subdominant_spectrum() {
    let g = CliffordGroup::standard(2).unwrap();
    let id = SuperOp::identity(2);
    for (name, model) in common::shipped_d2() {
        let noisy = build_noisy_gateset(&model, &g).unwrap();
        let s = dominant_spectrum(&build_twirl(&g, &noisy).unwrap()).unwrap();
        let rbar = perturbation_report(&g, &noisy, &id).unwrap().mean_infidelity;
        let sub = s.subdominant.unwrap();
        assert!(sub <= 10.0 * rbar.sqrt() + 1e-12, "{name}: {sub} vs r̄ = {rbar}");
    }
}

#[test]
fn deviation_decays_monotonically() {
    let g = CliffordGroup::standard(2).unwrap();
    let depths: Vec<usize> = (1..=64).collect();
    for (name, model) in common::shipped_d2() {
        // Far from the identity: no perturbative correction exists.
        if matches!(model, NoiseModel::Relabel | NoiseModel::Conjugation { .. }) {
            continue;
        }
        let noisy = build_noisy_gateset(&model, &g).unwrap();
        let t = build_twirl(&g, &noisy).unwrap();
        let s = dominant_spectrum(&t).unwrap();
        let u = find_basis(&t.order_m_errors(4).right, 2, &AscentConfig::default()).unwrap();
        for (tag, v) in [("I", SuperOp::identity(2)), ("U", u)] {
            let c = fidelity_curve_exact(&t, &s, &v, tag, &depths);
            for w in c.delta.windows(2).skip(1) {
                assert!(w[1].abs() <= w[0].abs() + 1e-12, "{name}/{tag}: {:?}", w);
            }
        }
    }
}

#[test]
fn update_law_and_affine_map_hold_exactly() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::OverRotation { offset: 0.1, cz_offset: 0.0 }, &g).unwrap();
    let t = build_twirl(&g, &noisy).unwrap();
    let s = dominant_spectrum(&t).unwrap();
    let depths: Vec<usize> = (0..=40).collect();
    let c = fidelity_curve_exact(&t, &s, &SuperOp::identity(2), "I", &depths);
    for m in 0..40 {
        assert!((c.fidelity[m] - (0.5 + 0.5 * c.f_tr[m])).abs() < 1e-15);
        let pred = 0.5 + s.p * (c.fidelity[m] - 0.5);
        let bound = c.delta[m].abs() * 0.5 * c.f_tr[m];
        assert!((c.fidelity[m + 1] - pred).abs() <= bound + 1e-14);
    }
}

#[test]
fn monte_carlo_curve_within_three_standard_errors() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::ZTilt { theta_z: 0.1, cz_offset: 0.0 }, &g).unwrap();
    let t = build_twirl(&g, &noisy).unwrap();
    let s = dominant_spectrum(&t).unwrap();
    let u = find_basis(&t.order_m_errors(4).right, 2, &AscentConfig::default()).unwrap();
    let depths: Vec<usize> = (0..=20).collect();
    for (tag, v) in [("I", SuperOp::identity(2)), ("U", u)] {
        let exact = fidelity_curve_exact(&t, &s, &v, tag, &depths);
        let mc = fidelity_curve_mc(&g, &noisy, &s, &v, tag, &depths, 2000, 1).unwrap();
        for (i, m) in depths.iter().enumerate() {
            let diff = (mc.fidelity[i] - exact.fidelity[i]).abs();
            assert!(diff <= 3.0 * mc.std_err[i] + 1e-12, "{tag} m={m}: {diff} vs {}", mc.std_err[i]);
        }
    }
}
