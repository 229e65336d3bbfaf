// SPDX-License-Identifier: Apache-2.0

mod common;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rbfid::channel::{infidelity, SuperOp};
use rbfid::clifford::CliffordGroup;
use rbfid::correct::{
    correction_fidelity, find_basis, gateset_fidelity, incoherence_defect, perturbation_report, polar_correct,
    sandwich_match_residual, verify_prop1, AscentConfig, ENVELOPE,
};
use rbfid::noise::{amplitude_damping, build_noisy_gateset, depolarizing, rotation, NoiseModel};
use rbfid::twirl::{build_twirl, dominant_spectrum};

fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    if theta < 1e-15 {
        return Matrix3::identity();
    }
    let n = w / theta;
    let k = Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0);
    Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
}

/// max over SO(3) of `1/2 + tr(B R)/6` by a coarse grid and a shrinking pattern search.
fn grid_oracle(block: &DMatrix<f64>) -> (f64, Matrix3<f64>) {
    let b = Matrix3::from_iterator(block.iter().copied());
    let f = |w: &Vector3<f64>| 0.5 + (b * rodrigues(w)).trace() / 6.0;
    let pi = std::f64::consts::PI;
    let steps = 24;
    let mut best = (f64::NEG_INFINITY, Vector3::zeros());
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let w = Vector3::new(i as f64, j as f64, k as f64) * (2.0 * pi / steps as f64) - Vector3::repeat(pi);
                if w.norm() <= pi {
                    let v = f(&w);
                    if v > best.0 {
                        best = (v, w);
                    }
                }
            }
        }
    }
    let mut h = 2.0 * pi / steps as f64;
    while h > 1e-10 {
        let mut moved = false;
        for axis in 0..3 {
            for s in [-1.0, 1.0] {
                let mut w = best.1;
                w[axis] += s * h;
                let v = f(&w);
                if v > best.0 {
                    best = (v, w);
                    moved = true;
                }
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    (best.0, rodrigues(&best.1))
}

#[test]
fn z_tilt_polar_matches_grid_oracle() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::ZTilt { theta_z: 0.1, cz_offset: 0.0 }, &g).unwrap();
    let block = build_twirl(&g, &noisy).unwrap().order_m_errors(4).right;
    let polar = polar_correct(&block).unwrap();
    let f_polar = correction_fidelity(&block, &polar.basis_op());
    let (f_grid, r_grid) = grid_oracle(&block);
    assert!((f_polar - f_grid).abs() < 1e-6, "{f_polar} vs {f_grid}");
    assert!(f_polar >= f_grid - 1e-12);
    let r_polar = polar.basis_op().bloch_block();
    let diff = (Matrix3::from_iterator(r_polar.iter().copied()) - r_grid).amax();
    assert!(diff < 1e-4, "{diff}");
}

#[test]
fn correction_never_lowers_fidelity() {
    let g = CliffordGroup::standard(2).unwrap();
    for (name, model) in common::shipped_d2() {
        if matches!(model, NoiseModel::Relabel | NoiseModel::Conjugation { .. }) {
            continue;
        }
        let noisy = build_noisy_gateset(&model, &g).unwrap();
        let block = build_twirl(&g, &noisy).unwrap().order_m_errors(4).right;
        let u = find_basis(&block, 2, &AscentConfig::default()).unwrap();
        let rep = verify_prop1(&g, &noisy, &u, &[1, 2, 4, 8]).unwrap();
        assert!(rep.corrected_fidelity >= rep.uncorrected_fidelity - 1e-14, "{name}");
    }
}

fn traceless(f: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (f - 1.0 / d) * d / (d - 1.0)
}

#[test]
fn maximization_hypothesis_fails_both_ways() {
    let g = CliffordGroup::standard(2).unwrap();
    let u = rotation([0.3, 0.4, 0.87], 0.1).unwrap();
    let ut = u.transpose();
    let id = SuperOp::identity(2);
    for e in [depolarizing(2, 0.99).unwrap(), amplitude_damping(0.02).unwrap()] {
        let conj: Vec<SuperOp> = g.elements().iter().map(|x| u.compose(&e).compose(&x.op).compose(&ut)).collect();
        let twisted: Vec<SuperOp> = g.elements().iter().map(|x| ut.compose(&e).compose(&x.op).compose(&ut)).collect();
        for (noisy, above) in [(conj, true), (twisted, false)] {
            let p = dominant_spectrum(&build_twirl(&g, &noisy).unwrap()).unwrap().p;
            let f1 = traceless(gateset_fidelity(&g, &noisy, &id).unwrap(), 2);
            if above {
                assert!(p >= f1, "{p} < {f1}");
            } else {
                assert!(p <= f1, "{p} > {f1}");
            }
        }
    }
}

#[test]
fn sandwich_match_condition() {
    let g = CliffordGroup::standard(2).unwrap();
    let left = depolarizing(2, 0.999).unwrap();
    let right = rotation([0.0, 0.0, 1.0], 0.05).unwrap();
    let noisy: Vec<SuperOp> = g.elements().iter().map(|e| left.compose(&e.op).compose(&right)).collect();
    let t = build_twirl(&g, &noisy).unwrap();
    let p = dominant_spectrum(&t).unwrap().p;
    let u = find_basis(&t.order_m_errors(4).right, 2, &AscentConfig::default()).unwrap();
    let res = sandwich_match_residual(&g, &left, &right, &u).unwrap();
    assert!(res <= ENVELOPE * (1.0 - p).powi(2), "{res} vs {}", (1.0 - p).powi(2));
}

#[test]
fn corrected_perturbations_carry_the_rb_infidelity() {
    let g = CliffordGroup::standard(2).unwrap();
    for model in [
        NoiseModel::ZTilt { theta_z: 0.1, cz_offset: 0.0 },
        NoiseModel::Sandwich {
            left: vec![rbfid::noise::ChannelSpec::Depolarizing { q: 0.999 }],
            right: vec![rbfid::noise::ChannelSpec::Rotation { axis: [0.0, 0.0, 1.0], angle: 0.05, qubit: None }],
        },
    ] {
        let noisy = build_noisy_gateset(&model, &g).unwrap();
        let t = build_twirl(&g, &noisy).unwrap();
        let p = dominant_spectrum(&t).unwrap().p;
        let u = find_basis(&t.order_m_errors(4).right, 2, &AscentConfig::default()).unwrap();
        let rep = perturbation_report(&g, &noisy, &u).unwrap();
        assert_eq!(rep.perturbations.len(), 24);
        let diff = (rep.mean_infidelity - (1.0 - p) / 2.0).abs();
        assert!(diff <= ENVELOPE * (1.0 - p).powi(2), "{model:?}: {diff}");
    }
}

#[test]
fn amplitude_damping_is_nearly_incoherent() {
    let ch = amplitude_damping(0.01).unwrap();
    let r = infidelity(&ch);
    let defect = incoherence_defect(&ch.bloch_block());
    assert!(defect <= 5.0 * r * r, "{defect} vs r = {r}");
    assert!(defect > 0.0);
}

#[test]
fn composite_chain_corrects_to_incoherent_error() {
    let g = CliffordGroup::standard(2).unwrap();
    let noisy = build_noisy_gateset(&NoiseModel::Composite { stages: common::composite_stages() }, &g).unwrap();
    let t = build_twirl(&g, &noisy).unwrap();
    let p = dominant_spectrum(&t).unwrap().p;
    let block = t.order_m_errors(4).right;
    let u = polar_correct(&block).unwrap().basis_op();
    let r = (1.0 - p) / 2.0;
    let defect = incoherence_defect(&(&block * u.bloch_block()));
    assert!(defect <= 5.0 * r * r, "{defect} vs r = {r}");
    assert!(incoherence_defect(&block) > 5.0 * r * r);
}
