// SPDX-License-Identifier: Apache-2.0

//! Basis-correction unitaries.
//!
//! The targeted gate-set `U 𝔾 U†` whose circuit fidelity follows `p^m` is
//! obtained from the order-4 right error `𝓔_R^(4)`: `U` maximizes
//! `F(𝓔_R^(4) U, 𝓘)`. For one qubit this is the inverse of the rotation factor
//! in the polar decomposition `𝓔_R^(4) Π = 𝓓 𝓥 Π`; in general it is found by
//! gradient ascent over `SU(d)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    avg_gate_fidelity, infidelity, pauli_strings, unitary_to_superop, CMatrix, SuperOp, UnitaryMatrix,
};
use crate::clifford::CliffordGroup;
use crate::error::{Error, Result};
use crate::noise::{pulse, rotation_unitary};
use crate::twirl::{build_twirl, dominant_spectrum, fidelity_curve_exact, OrderErrors};

/// Envelope constant `c` in `c · (1 − p)²` checks.
pub const ENVELOPE: f64 = 10.0;

/// Polar decomposition `M = D · W` of a Bloch block and the lifted correction.
#[derive(Clone, Debug)]
pub struct PolarFactors {
    /// Positive semidefinite factor.
    pub incoherent: DMatrix<f64>,
    /// Proper orthogonal factor.
    pub rotation: DMatrix<f64>,
    /// `U = V†` lifted to SU(2); its Bloch block is `rotationᵀ`.
    pub basis: UnitaryMatrix,
}

impl PolarFactors {
    pub fn basis_op(&self) -> SuperOp {
        unitary_to_superop(&self.basis).expect("lift is unitary")
    }
}

/// Axis and angle of a proper rotation matrix.
pub fn axis_angle(r: &DMatrix<f64>) -> ([f64; 3], f64) {
    let cos = (r.trace() - 1.0) / 2.0;
    let skew = [r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]];
    let s = skew.iter().map(|x| x * x).sum::<f64>().sqrt();
    // |skew| = 2 sin φ
    let angle = (s / 2.0).atan2(cos);
    if angle < 1e-12 {
        return ([0.0, 0.0, 1.0], 0.0);
    }
    if s > 1e-6 {
        return ([skew[0] / s, skew[1] / s, skew[2] / s], angle);
    }
    // near π: R + I = 2 n nᵀ
    let k = (0..3).max_by(|&a, &b| r[(a, a)].total_cmp(&r[(b, b)])).unwrap();
    let col: Vec<f64> = (0..3).map(|i| r[(i, k)] + if i == k { 1.0 } else { 0.0 }).collect();
    let n = col.iter().map(|x| x * x).sum::<f64>().sqrt();
    ([col[0] / n, col[1] / n, col[2] / n], angle)
}

/// `SO(3) → SU(2)`: `exp(−iφ n·σ/2)` for the axis and angle of `r`.
pub fn lift_rotation(r: &DMatrix<f64>) -> Result<UnitaryMatrix> {
    let (axis, angle) = axis_angle(r);
    let u = rotation_unitary(axis, angle)?;
    let check = unitary_to_superop(&u)?.bloch_block();
    let err = (check - r).amax();
    if err > 1e-8 {
        return Err(Error::Regime(format!("SU(2) lift misses the rotation by {err:.2e}")));
    }
    Ok(u)
}

/// Polar decomposition of a single-qubit right-error block.
pub fn polar_correct(right_block: &DMatrix<f64>) -> Result<PolarFactors> {
    if right_block.shape() != (3, 3) {
        return Err(Error::Shape(format!(
            "polar correction needs a 3x3 Bloch block, got {:?}",
            right_block.shape()
        )));
    }
    let svd = right_block.clone().svd(true, true);
    let smin = svd.singular_values.min();
    if smin <= 1e-6 {
        return Err(Error::Regime(format!("right error block is near singular ({smin:.2e})")));
    }
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let rotation = u * vt;
    let det = rotation.determinant();
    if (det - 1.0).abs() > 1e-8 {
        return Err(Error::Regime(format!("rotation factor is improper (det {det:.3})")));
    }
    let incoherent = u * DMatrix::from_diagonal(&svd.singular_values) * u.transpose();
    let basis = lift_rotation(&rotation.transpose())?;
    Ok(PolarFactors { incoherent, rotation, basis })
}

/// `F(𝓔 V, 𝓘)` for a Bloch block `E` of `𝓔` and the Bloch block of `V`.
fn corrected_fidelity(dim: usize, block: &DMatrix<f64>, v_block: &DMatrix<f64>) -> f64 {
    let d = dim as f64;
    let n = (dim * dim - 1) as f64;
    1.0 / d + (d - 1.0) / d * block.dot(&v_block.transpose()) / n
}

/// `F(𝓔 V, 𝓘)` where `block` is the Bloch block of `𝓔`.
pub fn correction_fidelity(block: &DMatrix<f64>, v: &SuperOp) -> f64 {
    corrected_fidelity(v.dim(), block, &v.bloch_block())
}

/// `exp(i Σ_k θ_k P_k / 2)` over the non-identity Pauli strings.
pub fn su_exp(dim: usize, theta: &[f64]) -> Result<UnitaryMatrix> {
    let basis = pauli_strings(dim)?;
    if theta.len() != basis.len() - 1 {
        return Err(Error::Shape(format!("{} angles for SU({dim})", theta.len())));
    }
    let h = basis[1..]
        .iter()
        .zip(theta)
        .fold(CMatrix::zeros(dim, dim), |acc, (p, &t)| acc + p.map(|z| z * t));
    pulse(&h, 1.0)
}

#[derive(Clone, Copy, Debug)]
pub struct AscentConfig {
    pub fd_step: f64,
    pub learning_rate: f64,
    pub backtrack: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            learning_rate: 0.5,
            backtrack: 0.5,
            grad_tol: 1e-9,
            max_iter: 500,
            random_starts: 8,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimized {
    /// The maximizer `U` of `F(𝓔_R^(4) U, 𝓘)`.
    pub basis: UnitaryMatrix,
    pub fidelity: f64,
    pub converged: bool,
    /// 0 for the identity start, `k` for the `k`-th random start.
    pub start: usize,
    pub iterations: usize,
}

impl Optimized {
    pub fn basis_op(&self) -> SuperOp {
        unitary_to_superop(&self.basis).expect("unitary")
    }
}

struct Run {
    theta: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
}

fn ascend(dim: usize, block: &DMatrix<f64>, mut theta: Vec<f64>, cfg: &AscentConfig) -> Result<Run> {
    let objective = |th: &[f64]| -> Result<f64> {
        let v = unitary_to_superop(&su_exp(dim, th)?)?;
        Ok(corrected_fidelity(dim, block, &v.bloch_block()))
    };
    let mut value = objective(&theta)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut grad = vec![0.0; theta.len()];
        for k in 0..theta.len() {
            let mut hi = theta.clone();
            let mut lo = theta.clone();
            hi[k] += cfg.fd_step;
            lo[k] -= cfg.fd_step;
            grad[k] = (objective(&hi)? - objective(&lo)?) / (2.0 * cfg.fd_step);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut lr = cfg.learning_rate;
        let mut moved = false;
        while lr > 1e-16 {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + lr * g).collect();
            let v = objective(&trial)?;
            if v > value {
                theta = trial;
                value = v;
                moved = true;
                break;
            }
            lr *= cfg.backtrack;
        }
        if !moved {
            // finite-difference noise floor: no ascent direction left
            converged = gnorm < 1e-6;
            break;
        }
    }
    Ok(Run { theta, value, converged, iterations })
}

/// Multi-start gradient ascent of `F(𝓔 V, 𝓘)` over `V ∈ SU(d)`.
pub fn optimize_correct(right_block: &DMatrix<f64>, dim: usize, cfg: &AscentConfig) -> Result<Optimized> {
    let n = dim * dim - 1;
    if right_block.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "expected {n}x{n} Bloch block, got {:?}",
            right_block.shape()
        )));
    }
    let starts: Vec<Vec<f64>> = (0..=cfg.random_starts)
        .map(|s| {
            if s == 0 {
                vec![0.0; n]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64));
                (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
            }
        })
        .collect();
    let runs = starts
        .into_par_iter()
        .map(|th| ascend(dim, right_block, th, cfg))
        .collect::<Result<Vec<_>>>()?;
    // best value, ties to the lowest start index
    let (start, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Run)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.value >= r.value => acc,
            _ => Some((i, r)),
        })
        .expect("at least one start");
    Ok(Optimized {
        basis: su_exp(dim, &best.theta)?,
        fidelity: best.value,
        converged: best.converged,
        start,
        iterations: best.iterations,
    })
}

/// `|⟨Π, D⟩/‖Π‖² − ‖DΠ‖_F/‖Π‖_F|` for a traceless block (`Π` is the identity there).
pub fn incoherence_defect(block: &DMatrix<f64>) -> f64 {
    let n = block.nrows() as f64;
    (block.trace() / n - block.norm() / n.sqrt()).abs()
}

/// `|⟨Π, DΛ⟩/‖Π‖² − ⟨Π, D⟩⟨Π, Λ⟩/‖Π‖⁴|` on traceless blocks.
pub fn multiplicativity_residual(d: &DMatrix<f64>, lambda: &DMatrix<f64>) -> f64 {
    let n = d.nrows() as f64;
    ((d * lambda).trace() / n - d.trace() / n * lambda.trace() / n).abs()
}

/// Perturbations `δ_G = G̃ (U G U†)† − 𝓘` relative to the targeted gate-set.
#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub perturbations: Vec<SuperOp>,
    /// `r(𝓘 + 𝔼 δ_G)`
    pub mean_infidelity: f64,
}

pub fn perturbation_report(group: &CliffordGroup, noisy: &[SuperOp], basis: &SuperOp) -> Result<PerturbationReport> {
    if group.len() != noisy.len() {
        return Err(Error::Shape("noisy gate-set not aligned with group".into()));
    }
    let dim = group.dim();
    let n = dim * dim;
    let bt = basis.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let perturbations: Vec<SuperOp> = group
        .elements()
        .iter()
        .zip(noisy)
        .map(|(e, gt)| {
            let target = basis.compose(&e.op).compose(&bt);
            SuperOp::new(dim, gt.matrix() * target.matrix().transpose() - &id).expect("shape")
        })
        .collect();
    let mean = perturbations
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, d| acc + d.matrix())
        / group.len() as f64;
    let mean_infidelity = infidelity(&SuperOp::new(dim, mean + id)?);
    Ok(PerturbationReport { perturbations, mean_infidelity })
}

/// `F(G̃, U 𝔾 U†, 1)`: average gate fidelity over the gate-set.
pub fn gateset_fidelity(group: &CliffordGroup, noisy: &[SuperOp], basis: &SuperOp) -> Result<f64> {
    let bt = basis.transpose();
    let total = group
        .elements()
        .iter()
        .zip(noisy)
        .map(|(e, gt)| avg_gate_fidelity(gt, &basis.compose(&e.op).compose(&bt)))
        .sum::<Result<f64>>()?;
    Ok(total / group.len() as f64)
}

/// Outcome of checking `f_tr(G̃, U𝔾U†, m) = p^m + O((1−p)²)`.
#[derive(Clone, Debug)]
pub struct Prop1Report {
    pub p: f64,
    pub depths: Vec<usize>,
    /// `|f_tr(m) − p^m|` per depth.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `ENVELOPE · (1 − p)²`
    pub envelope: f64,
    pub within_envelope: bool,
    /// `F(𝓔_R^(4) U, 𝓘)` and the uncorrected `F(𝓔_R^(4), 𝓘)`.
    pub corrected_fidelity: f64,
    pub uncorrected_fidelity: f64,
    /// Incoherence defect of the corrected order-4 right error.
    pub incoherence: f64,
    /// Multiplicativity residual of `𝓔_R^(4) U` against `U† 𝓔_L^(4)`.
    pub multiplicativity: f64,
}

pub fn verify_prop1(group: &CliffordGroup, noisy: &[SuperOp], basis: &SuperOp, depths: &[usize]) -> Result<Prop1Report> {
    let twirl = build_twirl(group, noisy)?;
    let spectral = dominant_spectrum(&twirl)?;
    let curve = fidelity_curve_exact(&twirl, &spectral, basis, "U", depths);
    let p = spectral.p;
    let residuals: Vec<f64> = depths
        .iter()
        .zip(&curve.f_tr)
        .map(|(&m, f)| (f - p.powi(m as i32)).abs())
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let envelope = ENVELOPE * (1.0 - p).powi(2);
    let OrderErrors { right, left, .. } = twirl.order_m_errors(4);
    let vb = basis.bloch_block();
    let corrected_right = &right * &vb;
    let corrected_left = vb.transpose() * &left;
    Ok(Prop1Report {
        p,
        depths: depths.to_vec(),
        max_residual,
        within_envelope: max_residual <= envelope,
        envelope,
        residuals,
        corrected_fidelity: correction_fidelity(&right, basis),
        uncorrected_fidelity: correction_fidelity(&right, &SuperOp::identity(group.dim())),
        incoherence: incoherence_defect(&corrected_right),
        multiplicativity: multiplicativity_residual(&corrected_right, &corrected_left),
    })
}

/// `|F(𝓔_R 𝓔_L, 𝓘) − F(𝓔_L 𝔾 𝓔_R, U 𝔾 U†, 1)|` for a sandwich noise model.
pub fn sandwich_match_residual(
    group: &CliffordGroup,
    left: &SuperOp,
    right: &SuperOp,
    basis: &SuperOp,
) -> Result<f64> {
    let noisy: Vec<SuperOp> = group
        .elements()
        .iter()
        .map(|e| left.compose(&e.op).compose(right))
        .collect();
    let lhs = avg_gate_fidelity(&right.compose(left), &SuperOp::identity(group.dim()))?;
    Ok((lhs - gateset_fidelity(group, &noisy, basis)?).abs())
}

/// Whichever correction applies: polar decomposition for one qubit, gradient
/// ascent otherwise.
pub fn find_basis(right_block: &DMatrix<f64>, dim: usize, cfg: &AscentConfig) -> Result<SuperOp> {
    match dim {
        2 => Ok(polar_correct(right_block)?.basis_op()),
        _ => Ok(optimize_correct(right_block, dim, cfg)?.basis_op()),
    }
}

/// Unit rotation-vector helper used by tests and reports.
pub fn rotation_vector(r: &DMatrix<f64>) -> DVector<f64> {
    let (axis, angle) = axis_angle(r);
    DVector::from_vec(axis.iter().map(|a| a * angle).collect())
}
