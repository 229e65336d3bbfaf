// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use nalgebra::DMatrix;
use rbfid::channel::{SuperOp, TracelessProjector};
use rbfid::clifford::CliffordGroup;
use rbfid::noise::{Axis, ChannelSpec, NoiseModel};

/// p²A₂ built by enumerating every pair (G₁, G₂) without forming the twirl.
pub fn enumerated_order2(group: &CliffordGroup, noisy: &[SuperOp]) -> DMatrix<f64> {
    let pi = TracelessProjector::new(group.dim()).matrix();
    let n = group.len() as f64;
    let mut y = DMatrix::zeros(pi.nrows(), pi.ncols());
    for (g1, n1) in group.elements().iter().zip(noisy) {
        let inner = n1.matrix().transpose() * &pi * g1.op.matrix() * &pi;
        for (g2, n2) in group.elements().iter().zip(noisy) {
            y += n2.matrix().transpose() * &inner * g2.op.matrix() * &pi;
        }
    }
    (y / (n * n)).transpose()
}

pub fn composite_stages() -> Vec<ChannelSpec> {
    vec![
        ChannelSpec::Rotation { axis: [1.0, 0.0, 0.0], angle: 0.008, qubit: None },
        ChannelSpec::AmplitudeDamping { gamma: 0.0004, qubit: None },
        ChannelSpec::Dephasing { axis: Axis::Z, q: 0.9996, qubit: None },
        ChannelSpec::Rotation { axis: [0.3, 0.5, 0.8], angle: 0.006, qubit: None },
    ]
}

/// The single-qubit models exercised by the property checks.
pub fn shipped_d2() -> Vec<(&'static str, NoiseModel)> {
    vec![
        ("ideal", NoiseModel::Ideal),
        ("z_tilt", NoiseModel::ZTilt { theta_z: 0.1, cz_offset: 0.1 }),
        ("over_rotation", NoiseModel::OverRotation { offset: 0.1, cz_offset: 0.1 }),
        ("pulse", NoiseModel::Pulse { x_offset: 0.05, y_offset: -0.03, theta_z: 0.05, cz_offset: 0.0 }),
        ("left_depolarizing", NoiseModel::Left { channel: vec![ChannelSpec::Depolarizing { q: 0.995 }] }),
        (
            "left_amplitude_damping",
            NoiseModel::Left { channel: vec![ChannelSpec::AmplitudeDamping { gamma: 0.01, qubit: None }] },
        ),
        (
            "right_dephasing",
            NoiseModel::Right { channel: vec![ChannelSpec::Dephasing { axis: Axis::X, q: 0.99, qubit: None }] },
        ),
        (
            "sandwich",
            NoiseModel::Sandwich {
                left: vec![ChannelSpec::Depolarizing { q: 0.999 }],
                right: vec![ChannelSpec::Rotation { axis: [0.0, 0.0, 1.0], angle: 0.05, qubit: None }],
            },
        ),
        ("composite", NoiseModel::Composite { stages: composite_stages() }),
        ("conjugation", NoiseModel::Conjugation { unitary: ChannelSpec::Haar { seed: 5 } }),
        ("relabel", NoiseModel::Relabel),
    ]
}
