// SPDX-License-Identifier: Apache-2.0

//! Twirling superchannel `T = 𝔼[G Π_tr ⊗ G̃]`, its dominant eigen-structure,
//! and exact gate-set circuit fidelities.
//!
//! With column-stacking `vec`, `T vec(X) = 𝔼 vec(G̃ X (GΠ)ᵀ)`, so
//! `vec(B_m) = (T/p)^m vec(Π)` and `vec(A_mᵀ) = (Tᵀ/p)^m vec(Π)`. The traceless
//! fidelity at basis `U` is `x̂ᵀ T^m x̂` with `x̂ = vec(UΠ)/‖Π‖`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{avg_gate_fidelity, unvec, vec, SuperOp, TracelessProjector};
use crate::clifford::CliffordGroup;
use crate::error::{Error, Result};

/// Convergence tolerance of the power iterations (relative residual).
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;

const CHUNK: usize = 64;

#[derive(Clone, Debug)]
pub struct TwirlSuperchannel {
    dim: usize,
    t: DMatrix<f64>,
}

impl TwirlSuperchannel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// Unit vector `vec(UΠ)/‖Π‖` for a unitary channel `basis`.
    pub fn basis_vector(&self, basis: &SuperOp) -> DVector<f64> {
        let norm = TracelessProjector::new(self.dim).norm_sq().sqrt();
        vec(&basis.traceless_part()) / norm
    }

    /// `vec(Π)/‖Π‖`.
    pub fn identity_vector(&self) -> DVector<f64> {
        self.basis_vector(&SuperOp::identity(self.dim))
    }

    /// Π-sandwiched order-`m` right and left errors, i.e. the traceless blocks
    /// of `𝔼[G_{m:1}ᵀ G̃_{m:1}]` and `𝔼[G̃_{m:1} G_{m:1}ᵀ]`.
    pub fn order_m_errors(&self, m: usize) -> OrderErrors {
        let n = self.dim * self.dim;
        let pi = vec(&TracelessProjector::new(self.dim).matrix());
        let tt = self.t.transpose();
        let mut left = pi.clone();
        let mut right = pi;
        for _ in 0..m {
            left = &tt * left;
            right = &self.t * right;
        }
        // vec((p^m A_m)ᵀ) and vec(p^m B_m)
        let a = unvec(&left).expect("square").transpose();
        let b = unvec(&right).expect("square");
        OrderErrors {
            m,
            right: a.view((1, 1), (n - 1, n - 1)).into_owned(),
            left: b.view((1, 1), (n - 1, n - 1)).into_owned(),
        }
    }
}

/// Traceless blocks of the order-`m` right (`𝓔_R^(m)`) and left (`𝓔_L^(m)`) errors.
#[derive(Clone, Debug)]
pub struct OrderErrors {
    pub m: usize,
    pub right: DMatrix<f64>,
    pub left: DMatrix<f64>,
}

/// Accumulate `kron(GΠ, G̃)` without materializing the Kronecker product.
fn add_kron(acc: &mut DMatrix<f64>, g: &SuperOp, noisy: &SuperOp) {
    let n = g.matrix().nrows();
    let gm = g.matrix();
    let nm = noisy.matrix();
    for j in 1..n {
        for i in 0..n {
            let a = gm[(i, j)];
            if a == 0.0 {
                continue;
            }
            for c in 0..n {
                for r in 0..n {
                    acc[(i * n + r, j * n + c)] += a * nm[(r, c)];
                }
            }
        }
    }
}

/// `T = 𝔼[G Π_tr ⊗ G̃]` over the index-aligned gate-sets.
pub fn build_twirl(group: &CliffordGroup, noisy: &[SuperOp]) -> Result<TwirlSuperchannel> {
    if group.len() != noisy.len() {
        return Err(Error::Shape(format!(
            "{} ideal gates vs {} noisy gates",
            group.len(),
            noisy.len()
        )));
    }
    let dim = group.dim();
    let nn = dim * dim * dim * dim;
    let pairs: Vec<_> = group.elements().iter().map(|e| &e.op).zip(noisy).collect();
    // fixed chunking + in-order reduction keeps the sum bitwise reproducible
    let partial: Vec<DMatrix<f64>> = pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = DMatrix::zeros(nn, nn);
            for (g, gt) in chunk {
                add_kron(&mut acc, g, gt);
            }
            acc
        })
        .collect();
    let mut t = DMatrix::zeros(nn, nn);
    for p in partial {
        t += p;
    }
    t /= group.len() as f64;
    Ok(TwirlSuperchannel { dim, t })
}

/// Power iteration from `start`. Returns the Rayleigh quotient and unit vector.
pub fn power_iteration(
    m: &DMatrix<f64>,
    start: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, DVector<f64>)> {
    let mut x = start.normalize();
    for _ in 0..max_iter {
        let y = m * &x;
        let lambda = x.dot(&y);
        let resid = (&y - &x * lambda).norm();
        let ynorm = y.norm();
        if ynorm == 0.0 {
            return Err(Error::Regime("power iteration collapsed to zero".into()));
        }
        if resid <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok((lambda, y / ynorm * lambda.signum()));
        }
        x = y / ynorm;
    }
    Err(Error::Regime(format!(
        "power iteration did not converge in {max_iter} steps"
    )))
}

/// All eigenvalues from a dense real Schur decomposition, sorted by decreasing modulus.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Some(ev)
}

/// Dominant eigen-structure of the twirl.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub dim: usize,
    /// RB decay parameter, the largest eigenvalue of `T`.
    pub p: f64,
    /// Left eigen-operator, unit Frobenius norm, `⟨Π, A∞⟩ > 0`.
    pub a_inf: DMatrix<f64>,
    /// Right eigen-operator, unit Frobenius norm, `⟨Π, B∞⟩ > 0`.
    pub b_inf: DMatrix<f64>,
    /// `vec(A∞ᵀ)`
    pub left: DVector<f64>,
    /// `vec(B∞)`
    pub right: DVector<f64>,
    /// `T − p · vec(B∞) vec(A∞ᵀ)ᵀ / ⟨A∞ᵀ, B∞⟩`
    pub delta: DMatrix<f64>,
    /// Largest modulus among the remaining eigenvalues, when a dense solve succeeded.
    pub subdominant: Option<f64>,
    /// Eigenvalue from the dense solve matching `p`.
    pub dense_p: Option<f64>,
}

/// Decomposition of the basis vector `x̂ = a·â + √(1−a²)·w` (and likewise `b`, `v`).
#[derive(Clone, Debug)]
pub struct BasisExpansion {
    pub a: f64,
    pub b: f64,
    pub w: DVector<f64>,
    pub v: DVector<f64>,
}

fn oriented_unit(m: DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let pi = TracelessProjector::new(dim).matrix();
    let s = if m.dot(&pi) < 0.0 { -1.0 } else { 1.0 };
    let norm = m.norm();
    m * (s / norm)
}

/// Dominant eigenvalue `p` and eigen-operators `A∞`, `B∞` of `T`.
///
/// Fails when the dominant eigenvalue is complex or not separated from the
/// rest of the spectrum; the perturbative analysis does not apply there.
pub fn dominant_spectrum(twirl: &TwirlSuperchannel) -> Result<SpectralData> {
    let dim = twirl.dim;
    let t = &twirl.t;
    let start = twirl.identity_vector();
    let (_, right) = power_iteration(t, &start, POWER_TOL, POWER_MAX_ITER)?;
    let (_, left) = power_iteration(&t.transpose(), &start, POWER_TOL, POWER_MAX_ITER)?;
    let overlap = left.dot(&right);
    if overlap.abs() < 1e-8 {
        return Err(Error::Regime("left and right eigenvectors are orthogonal".into()));
    }
    // two-sided Rayleigh quotient
    let p = left.dot(&(t * &right)) / overlap;

    let (dense_p, subdominant) = match dense_eigenvalues(t) {
        Some(ev) => {
            let top = ev[0];
            if top.im.abs() > 1e-8 {
                return Err(Error::Regime(format!("dominant eigenvalue {top} is complex")));
            }
            if (top.re - p).abs() > 1e-8 {
                return Err(Error::Regime(format!(
                    "power iteration found {p}, dense solve {}",
                    top.re
                )));
            }
            let second = ev.get(1).map(|z| z.norm()).unwrap_or(0.0);
            if second > top.norm() * (1.0 - 1e-6) {
                return Err(Error::Regime(format!(
                    "dominant eigenvalue {} is degenerate (next modulus {second})",
                    top.re
                )));
            }
            (Some(top.re), Some(second))
        }
        None => (None, None),
    };

    let a_inf = oriented_unit(unvec(&left)?.transpose(), dim);
    let b_inf = oriented_unit(unvec(&right)?, dim);
    let left = vec(&a_inf.transpose());
    let right = vec(&b_inf);
    let delta = t - &right * left.transpose() * (p / left.dot(&right));
    Ok(SpectralData { dim, p, a_inf, b_inf, left, right, delta, subdominant, dense_p })
}

impl SpectralData {
    /// `C(U) = (x̂·vec B∞)(vec(A∞ᵀ)·x̂) / (vec(A∞ᵀ)·vec B∞)`, independent of the
    /// eigenvector normalization.
    pub fn c_coefficient(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.right) * self.left.dot(x) / self.left.dot(&self.right)
    }

    pub fn expansion(&self, x: &DVector<f64>) -> BasisExpansion {
        let ahat = self.left.normalize();
        let bhat = self.right.normalize();
        let a = ahat.dot(x);
        let b = bhat.dot(x);
        let unit = |r: DVector<f64>| {
            let n = r.norm();
            if n > 0.0 { r / n } else { r }
        };
        BasisExpansion {
            a,
            b,
            w: unit(x - &ahat * a),
            v: unit(x - &bhat * b),
        }
    }

    /// `A_m` from `m` applications of `(T/p)ᵀ` to `vec(Π)`.
    pub fn a_m(&self, twirl: &TwirlSuperchannel, m: usize) -> DMatrix<f64> {
        let n = self.dim * self.dim;
        let e = twirl.order_m_errors(m);
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((1, 1), (n - 1, n - 1))
            .copy_from(&(e.right / self.p.powi(m as i32)));
        out
    }

    /// `B_m` from `m` applications of `T/p` to `vec(Π)`.
    pub fn b_m(&self, twirl: &TwirlSuperchannel, m: usize) -> DMatrix<f64> {
        let n = self.dim * self.dim;
        let e = twirl.order_m_errors(m);
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((1, 1), (n - 1, n - 1))
            .copy_from(&(e.left / self.p.powi(m as i32)));
        out
    }
}

/// Gate-set circuit fidelity `F(G̃, U G U†, m)` sampled over depths.
#[derive(Clone, Debug)]
pub struct FidelityCurve {
    pub dim: usize,
    pub basis_tag: String,
    pub depths: Vec<usize>,
    pub fidelity: Vec<f64>,
    pub f_tr: Vec<f64>,
    /// Monte-Carlo standard errors of `fidelity`; empty for exact curves.
    pub std_err: Vec<f64>,
    pub c: f64,
    /// `f_tr(m) − C p^m`
    pub d: Vec<f64>,
    /// `f_tr(m+1)/f_tr(m) − p`
    pub delta: Vec<f64>,
    pub p: f64,
}

fn affine(dim: usize, f_tr: f64) -> f64 {
    let d = dim as f64;
    1.0 / d + (d - 1.0) / d * f_tr
}

/// Exact curve from powers of `T` acting on `vec(UΠ)`.
pub fn fidelity_curve_exact(
    twirl: &TwirlSuperchannel,
    spectral: &SpectralData,
    basis: &SuperOp,
    basis_tag: &str,
    depths: &[usize],
) -> FidelityCurve {
    let dim = twirl.dim;
    let x = twirl.basis_vector(basis);
    let max = depths.iter().copied().max().unwrap_or(0);
    let mut ftr_all = Vec::with_capacity(max + 2);
    let mut y = x.clone();
    ftr_all.push(x.dot(&y));
    for _ in 0..=max {
        y = &twirl.t * y;
        ftr_all.push(x.dot(&y));
    }
    let p = spectral.p;
    let c = spectral.c_coefficient(&x);
    let f_tr: Vec<f64> = depths.iter().map(|&m| ftr_all[m]).collect();
    FidelityCurve {
        dim,
        basis_tag: basis_tag.to_string(),
        depths: depths.to_vec(),
        fidelity: f_tr.iter().map(|&f| affine(dim, f)).collect(),
        d: depths
            .iter()
            .map(|&m| ftr_all[m] - c * p.powi(m as i32))
            .collect(),
        delta: depths
            .iter()
            .map(|&m| ftr_all[m + 1] / ftr_all[m] - p)
            .collect(),
        f_tr,
        std_err: Vec::new(),
        c,
        p,
    }
}

/// Per-job RNG for `(seed, depth, index)`, independent of scheduling.
pub fn job_rng(seed: u64, depth: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((depth as u64) << 32) | index as u64);
    rng
}

/// Monte-Carlo estimate of `𝔼 F(G̃_{m:1}, U G_{m:1} U†)` over uniform sequences.
#[allow(clippy::too_many_arguments)]
pub fn fidelity_curve_mc(
    group: &CliffordGroup,
    noisy: &[SuperOp],
    spectral: &SpectralData,
    basis: &SuperOp,
    basis_tag: &str,
    depths: &[usize],
    samples: usize,
    seed: u64,
) -> Result<FidelityCurve> {
    if samples == 0 {
        return Err(Error::Parameter("samples must be at least 1".into()));
    }
    if group.len() != noisy.len() {
        return Err(Error::Shape("noisy gate-set not aligned with group".into()));
    }
    let dim = group.dim();
    let bt = basis.transpose();
    let mut fidelity = Vec::with_capacity(depths.len());
    let mut std_err = Vec::with_capacity(depths.len());
    for &m in depths {
        let values: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut rng = job_rng(seed, m, s);
                let mut ideal = SuperOp::identity(dim);
                let mut real = SuperOp::identity(dim);
                for _ in 0..m {
                    let g = group.random_element(&mut rng);
                    ideal = group.op(g).compose(&ideal);
                    real = noisy[g].compose(&real);
                }
                let target = basis.compose(&ideal).compose(&bt);
                avg_gate_fidelity(&real, &target).expect("same dimension")
            })
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        fidelity.push(mean);
        std_err.push((var / n).sqrt());
    }
    let d = dim as f64;
    let f_tr: Vec<f64> = fidelity.iter().map(|f| (f - 1.0 / d) * d / (d - 1.0)).collect();
    let p = spectral.p;
    let c = spectral.c_coefficient(&{
        let norm = TracelessProjector::new(dim).norm_sq().sqrt();
        vec(&basis.traceless_part()) / norm
    });
    Ok(FidelityCurve {
        dim,
        basis_tag: basis_tag.to_string(),
        depths: depths.to_vec(),
        d: depths
            .iter()
            .zip(&f_tr)
            .map(|(&m, f)| f - c * p.powi(m as i32))
            .collect(),
        delta: Vec::new(),
        fidelity,
        f_tr,
        std_err,
        c,
        p,
    })
}
