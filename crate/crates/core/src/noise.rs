// SPDX-License-Identifier: Apache-2.0

//! Pulses, named channels, and noisy gate-sets built from them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{paulis, unitary_to_superop, CMatrix, SuperOp, UnitaryMatrix};
use crate::clifford::{CliffordGroup, GeneratorKind};
use crate::error::{Error, Result};

/// Smallest Choi eigenvalue tolerated for a completely positive channel.
pub const CP_TOL: f64 = 1e-10;

/// A pulse `P(H, θ) = exp(iθH/2)` with Hermitian `H`.
#[derive(Clone, Debug)]
pub struct PulseSpec {
    hamiltonian: CMatrix,
    angle: f64,
}

impl PulseSpec {
    pub fn new(hamiltonian: CMatrix, angle: f64) -> Result<Self> {
        let defect = (&hamiltonian - hamiltonian.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !hamiltonian.is_square() || defect > 1e-12 {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { hamiltonian, angle })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn unitary(&self) -> UnitaryMatrix {
        let eig = self.hamiltonian.clone().symmetric_eigen();
        let phases = eig
            .eigenvalues
            .map(|l| Complex64::from_polar(1.0, self.angle * l / 2.0));
        let v = &eig.eigenvectors;
        let u = v * CMatrix::from_diagonal(&phases) * v.adjoint();
        UnitaryMatrix::new(u).expect("exponential of a Hermitian matrix is unitary")
    }
}

/// `P(h, θ) = exp(iθh/2)`.
pub fn pulse(h: &CMatrix, theta: f64) -> Result<UnitaryMatrix> {
    Ok(PulseSpec::new(h.clone(), theta)?.unitary())
}

/// Single-qubit Pauli `σ_axis` for axis index 1, 2, 3.
fn sigma(axis: usize) -> CMatrix {
    paulis()[axis].clone()
}

/// `h` acting on `qubit` (0 = first tensor factor) of a two-qubit register.
pub fn embed_operator(h: &CMatrix, qubit: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    if qubit == 0 {
        h.kronecker(&id)
    } else {
        id.kronecker(h)
    }
}

/// `σ_z¹σ_z² − σ_z¹ − σ_z²`, whose quarter pulse is CZ up to global phase.
pub fn cz_hamiltonian() -> CMatrix {
    let z = sigma(3);
    let id = CMatrix::identity(2, 2);
    z.kronecker(&z) - z.kronecker(&id) - id.kronecker(&z)
}

/// `diag(1, 1, 1, −1)`.
pub fn cz_unitary() -> UnitaryMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = Complex64::new(-1.0, 0.0);
    UnitaryMatrix::new(m).expect("diagonal of phases")
}

/// Unitary pulse on a generator's support, with angle and tilt perturbations.
fn generator_pulse(kind: GeneratorKind, dim: usize, offset: f64, theta_z: f64, cz_offset: f64) -> Result<SuperOp> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let single = |axis: usize, qubit: Option<usize>| -> Result<SuperOp> {
        let lift = |h: CMatrix| match qubit {
            Some(q) => embed_operator(&h, q),
            None => h,
        };
        let g = pulse(&lift(sigma(axis)), half_pi + offset)?;
        let u = if theta_z != 0.0 {
            &pulse(&lift(sigma(3)), theta_z)? * &g
        } else {
            g
        };
        unitary_to_superop(&u)
    };
    let qubit = |q: usize| if dim == 4 { Some(q) } else { None };
    match kind {
        GeneratorKind::X { qubit: q } => single(1, qubit(q)),
        GeneratorKind::Y { qubit: q } => single(2, qubit(q)),
        GeneratorKind::Cz => unitary_to_superop(&pulse(&cz_hamiltonian(), half_pi + cz_offset)?),
        GeneratorKind::Custom => Err(Error::Parameter(
            "generator-replacement noise needs X, Y or CZ generators".into(),
        )),
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {x} outside [0, 1]")))
    }
}

/// `q` on the traceless block.
pub fn depolarizing(dim: usize, q: f64) -> Result<SuperOp> {
    check_unit_interval("q", q)?;
    let n = dim * dim;
    let mut m = DMatrix::from_diagonal_element(n, n, q);
    m[(0, 0)] = 1.0;
    SuperOp::new(dim, m)
}

/// Bloch components orthogonal to `axis` (1 = x, 2 = y, 3 = z) are scaled by `q`.
pub fn dephasing(axis: usize, q: f64) -> Result<SuperOp> {
    check_unit_interval("q", q)?;
    if !(1..=3).contains(&axis) {
        return Err(Error::Parameter(format!("axis index {axis}")));
    }
    let mut m = DMatrix::identity(4, 4);
    for k in 1..4 {
        if k != axis {
            m[(k, k)] = q;
        }
    }
    SuperOp::new(2, m)
}

/// Relaxation towards |0⟩ with probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<SuperOp> {
    check_unit_interval("gamma", gamma)?;
    let s = (1.0 - gamma).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        1.0,   0.0, 0.0, 0.0,
        0.0,   s,   0.0, 0.0,
        0.0,   0.0, s,   0.0,
        gamma, 0.0, 0.0, 1.0 - gamma,
    ]);
    SuperOp::new(2, m)
}

/// `exp(−iφ n·σ/2)`: right-handed Bloch rotation by `angle` about `axis`.
pub fn rotation_unitary(axis: [f64; 3], angle: f64) -> Result<UnitaryMatrix> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Parameter("rotation axis is zero".into()));
    }
    let p = paulis();
    let h = (1..4).fold(CMatrix::zeros(2, 2), |acc, k| {
        acc + p[k].map(|z| z * (axis[k - 1] / norm))
    });
    pulse(&h, -angle)
}

pub fn rotation(axis: [f64; 3], angle: f64) -> Result<SuperOp> {
    unitary_to_superop(&rotation_unitary(axis, angle)?)
}

/// The relabeling `X → Y → Z → X`, a rotation by 2π/3 about (1,1,1).
pub fn axis_permutation() -> SuperOp {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = 1.0;
    m[(2, 1)] = 1.0;
    m[(3, 2)] = 1.0;
    m[(1, 3)] = 1.0;
    SuperOp::new(2, m).expect("4x4")
}

/// Place a single-qubit channel on `qubit` of a two-qubit register, or on
/// both qubits when `qubit` is `None`.
pub fn on_qubits(ch: &SuperOp, qubit: Option<usize>) -> Result<SuperOp> {
    let id = SuperOp::identity(2);
    match qubit {
        Some(0) => ch.kron(&id),
        Some(1) => id.kron(ch),
        None => ch.kron(ch),
        Some(q) => Err(Error::Parameter(format!("qubit index {q}"))),
    }
}

/// Choi matrix `Σ_jk R_jk B_kᵀ ⊗ B_j` of a transfer matrix `R`.
pub fn choi_matrix(ch: &SuperOp) -> CMatrix {
    let d = ch.dim();
    let basis = crate::channel::pauli_strings(d).expect("checked dimension");
    let s = 1.0 / d as f64;
    let mut out = CMatrix::zeros(d * d, d * d);
    for (j, bj) in basis.iter().enumerate() {
        for (k, bk) in basis.iter().enumerate() {
            let r = ch.matrix()[(j, k)];
            if r != 0.0 {
                out += bk.transpose().kronecker(bj).map(|z| z * (r * s));
            }
        }
    }
    out
}

/// Smallest eigenvalue of the Choi matrix.
pub fn min_choi_eigenvalue(ch: &SuperOp) -> f64 {
    choi_matrix(ch).symmetric_eigen().eigenvalues.min()
}

pub fn is_completely_positive(ch: &SuperOp) -> bool {
    min_choi_eigenvalue(ch) >= -CP_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }
}

/// A channel factory entry of a noise configuration.
///
/// Single-qubit entries act on `qubit` of a two-qubit register, or on both
/// qubits when `qubit` is omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Depolarizing { q: f64 },
    Dephasing { axis: Axis, q: f64, qubit: Option<usize> },
    AmplitudeDamping { gamma: f64, qubit: Option<usize> },
    Rotation { axis: [f64; 3], angle: f64, qubit: Option<usize> },
    Haar { seed: u64 },
}

impl ChannelSpec {
    pub fn realize(&self, dim: usize) -> Result<SuperOp> {
        let local = |ch: Result<SuperOp>, qubit: Option<usize>| -> Result<SuperOp> {
            let ch = ch?;
            match dim {
                2 => Ok(ch),
                4 => on_qubits(&ch, qubit),
                d => Err(Error::Dimension(d)),
            }
        };
        let ch = match *self {
            ChannelSpec::Depolarizing { q } => depolarizing(dim, q)?,
            ChannelSpec::Dephasing { axis, q, qubit } => local(dephasing(axis.index(), q), qubit)?,
            ChannelSpec::AmplitudeDamping { gamma, qubit } => local(amplitude_damping(gamma), qubit)?,
            ChannelSpec::Rotation { axis, angle, qubit } => local(rotation(axis, angle), qubit)?,
            ChannelSpec::Haar { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                unitary_to_superop(&UnitaryMatrix::haar_random(dim, &mut rng))?
            }
        };
        if !self.is_unitary() && !is_completely_positive(&ch) {
            return Err(Error::Parameter(format!("{self:?} is not completely positive")));
        }
        Ok(ch)
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self, ChannelSpec::Rotation { .. } | ChannelSpec::Haar { .. })
    }
}

/// Compose a chain of channels; the first entry is applied first.
pub fn realize_chain(chain: &[ChannelSpec], dim: usize) -> Result<SuperOp> {
    chain
        .iter()
        .try_fold(SuperOp::identity(dim), |acc, spec| Ok(spec.realize(dim)?.compose(&acc)))
}

fn default_offset() -> f64 {
    0.1
}

/// Noise model configuration. Angles are in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Ideal,
    /// Generator replacement with general pulse errors:
    /// `G̃ = P(σ_z, θ_z) · P(σ_axis, π/2 + offset)` and an over-rotated CZ.
    Pulse {
        #[serde(default)]
        x_offset: f64,
        #[serde(default)]
        y_offset: f64,
        #[serde(default)]
        theta_z: f64,
        #[serde(default)]
        cz_offset: f64,
    },
    OverRotation {
        #[serde(default = "default_offset")]
        offset: f64,
        #[serde(default = "default_offset")]
        cz_offset: f64,
    },
    ZTilt {
        #[serde(default = "default_offset")]
        theta_z: f64,
        #[serde(default = "default_offset")]
        cz_offset: f64,
    },
    /// `𝓔 𝔾`
    Left { channel: Vec<ChannelSpec> },
    /// `𝔾 𝓔`
    Right { channel: Vec<ChannelSpec> },
    /// `𝓔_L 𝔾 𝓔_R`
    Sandwich {
        left: Vec<ChannelSpec>,
        right: Vec<ChannelSpec>,
    },
    /// `𝓤 𝔾 𝓤†`
    Conjugation { unitary: ChannelSpec },
    /// Conjugation by the Pauli-axis relabeling `X → Y → Z → X`.
    Relabel,
    /// Every generator pulse followed by a chain of unitary and incoherent stages.
    Composite { stages: Vec<ChannelSpec> },
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Ideal => "ideal",
            NoiseModel::Pulse { .. } => "pulse",
            NoiseModel::OverRotation { .. } => "over_rotation",
            NoiseModel::ZTilt { .. } => "z_tilt",
            NoiseModel::Left { .. } => "left",
            NoiseModel::Right { .. } => "right",
            NoiseModel::Sandwich { .. } => "sandwich",
            NoiseModel::Conjugation { .. } => "conjugation",
            NoiseModel::Relabel => "relabel",
            NoiseModel::Composite { .. } => "composite",
        }
    }

    /// Noisy generator ops for generator-replacement models, `None` otherwise.
    fn noisy_generators(&self, group: &CliffordGroup) -> Result<Option<Vec<SuperOp>>> {
        let dim = group.dim();
        let kinds = group.generators().iter().map(|g| g.kind);
        let pulses = |x: f64, y: f64, tz: f64, cz: f64| -> Result<Vec<SuperOp>> {
            kinds
                .clone()
                .map(|k| {
                    let off = match k {
                        GeneratorKind::X { .. } => x,
                        GeneratorKind::Y { .. } => y,
                        _ => 0.0,
                    };
                    generator_pulse(k, dim, off, tz, cz)
                })
                .collect()
        };
        Ok(Some(match *self {
            NoiseModel::Pulse { x_offset, y_offset, theta_z, cz_offset } => {
                pulses(x_offset, y_offset, theta_z, cz_offset)?
            }
            NoiseModel::OverRotation { offset, cz_offset } => pulses(offset, offset, 0.0, cz_offset)?,
            NoiseModel::ZTilt { theta_z, cz_offset } => pulses(0.0, 0.0, theta_z, cz_offset)?,
            NoiseModel::Composite { ref stages } => {
                let err = realize_chain(stages, dim)?;
                group
                    .generators()
                    .iter()
                    .map(|g| err.compose(&g.op))
                    .collect()
            }
            _ => return Ok(None),
        }))
    }
}

/// Realize `model` on `group`; the result is index-aligned with the group.
pub fn build_noisy_gateset(model: &NoiseModel, group: &CliffordGroup) -> Result<Vec<SuperOp>> {
    let dim = group.dim();
    if let Some(gens) = model.noisy_generators(group)? {
        return Ok(group
            .elements()
            .par_iter()
            .map(|e| replay_word(&e.word, &gens, dim))
            .collect());
    }
    let ideal = group.elements().iter().map(|e| &e.op);
    let out = match model {
        NoiseModel::Ideal => ideal.cloned().collect(),
        NoiseModel::Left { channel } => {
            let err = realize_chain(channel, dim)?;
            ideal.map(|g| err.compose(g)).collect()
        }
        NoiseModel::Right { channel } => {
            let err = realize_chain(channel, dim)?;
            ideal.map(|g| g.compose(&err)).collect()
        }
        NoiseModel::Sandwich { left, right } => {
            let l = realize_chain(left, dim)?;
            let r = realize_chain(right, dim)?;
            ideal.map(|g| l.compose(g).compose(&r)).collect()
        }
        NoiseModel::Conjugation { unitary } => {
            if !unitary.is_unitary() {
                return Err(Error::Parameter("conjugation needs a unitary channel".into()));
            }
            let u = unitary.realize(dim)?;
            conjugate_all(group, &u)
        }
        NoiseModel::Relabel => {
            let r = match dim {
                2 => axis_permutation(),
                _ => on_qubits(&axis_permutation(), None)?,
            };
            conjugate_all(group, &r)
        }
        _ => unreachable!("generator-replacement models handled above"),
    };
    Ok(out)
}

fn conjugate_all(group: &CliffordGroup, u: &SuperOp) -> Vec<SuperOp> {
    let ut = u.transpose();
    group.elements().iter().map(|e| u.compose(&e.op).compose(&ut)).collect()
}

/// Product of generator ops along a word; the first letter is applied first.
pub fn replay_word(word: &[usize], gens: &[SuperOp], dim: usize) -> SuperOp {
    word.iter()
        .fold(SuperOp::identity(dim), |acc, &g| gens[g].compose(&acc))
}
