// SPDX-License-Identifier: Apache-2.0

//! Pauli-transfer (Liouville) representation of channels on one or two qubits.
//!
//! Channels are stored as real `d² × d²` matrices in the orthonormal basis
//! `{I/√d, X/√d, Y/√d, Z/√d}` (lexicographic tensor products for `d = 4`).
//! In this basis unitary channels are orthogonal matrices, the traceless
//! projector is `diag(0, 1, …, 1)`, and the adjoint of a unitary channel is its
//! transpose.

use std::ops::Mul;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Orthogonality defect above which a matrix is rejected as non-unitary.
pub const UNITARY_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unnormalized single-qubit Pauli matrices in the order `I, X, Y, Z`.
pub fn paulis() -> [CMatrix; 4] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Unnormalized Pauli strings for `d ∈ {2, 4}`; index `4a + b` holds `P_a ⊗ P_b`.
pub fn pauli_strings(dim: usize) -> Result<&'static [CMatrix]> {
    static ONE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    static TWO: OnceLock<Vec<CMatrix>> = OnceLock::new();
    match dim {
        2 => Ok(ONE.get_or_init(|| paulis().to_vec())),
        4 => Ok(TWO.get_or_init(|| {
            let p = paulis();
            let mut out = Vec::with_capacity(16);
            for a in &p {
                for b in &p {
                    out.push(a.kronecker(b));
                }
            }
            out
        })),
        d => Err(Error::Dimension(d)),
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::Dimension(d)),
    }
}

/// A `d × d` unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let defect = unitarity_defect(&m);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    /// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
    pub fn haar_random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
            let mut col = q.column_mut(j);
            col *= phase;
        }
        Self(q)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }
}

impl Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

/// Largest absolute entry of `U†U − I`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let g = m.adjoint() * m - CMatrix::identity(n, n);
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real Pauli-transfer matrix of a channel on `d`-dimensional states.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    dim: usize,
    mat: DMatrix<f64>,
}

impl SuperOp {
    pub fn new(dim: usize, mat: DMatrix<f64>) -> Result<Self> {
        check_dim(dim)?;
        let n = dim * dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Shape(format!(
                "expected {n}x{n} transfer matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self { dim, mat: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        debug_assert_eq!(self.dim, other.dim);
        SuperOp { dim: self.dim, mat: &self.mat * &other.mat }
    }

    /// Hilbert–Schmidt adjoint; equals the inverse for unitary channels.
    pub fn transpose(&self) -> SuperOp {
        SuperOp { dim: self.dim, mat: self.mat.transpose() }
    }

    /// Channel on the tensor product of the two systems.
    pub fn kron(&self, other: &SuperOp) -> Result<SuperOp> {
        SuperOp::new(self.dim * other.dim, self.mat.kronecker(&other.mat))
    }

    /// The `(d²−1) × (d²−1)` block acting on traceless operators.
    pub fn bloch_block(&self) -> DMatrix<f64> {
        let n = self.mat.nrows() - 1;
        self.mat.view((1, 1), (n, n)).into_owned()
    }

    /// `self · Π_tr`.
    pub fn traceless_part(&self) -> DMatrix<f64> {
        let mut m = self.mat.clone();
        m.column_mut(0).fill(0.0);
        m
    }

    /// Largest deviation of the first row from `e₀ᵀ`.
    pub fn trace_defect(&self) -> f64 {
        self.mat
            .row(0)
            .iter()
            .enumerate()
            .map(|(j, &x)| if j == 0 { (x - 1.0).abs() } else { x.abs() })
            .fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_defect() <= tol
    }

    /// Apply to a Pauli-coefficient vector.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.mat * v
    }
}

impl Mul for &SuperOp {
    type Output = SuperOp;

    fn mul(self, rhs: &SuperOp) -> SuperOp {
        self.compose(rhs)
    }
}

/// Transfer matrix with entries `tr(P_j u P_k u†)/d`.
pub fn unitary_to_superop(u: &UnitaryMatrix) -> Result<SuperOp> {
    let dim = u.dim();
    let basis = pauli_strings(dim)?;
    let defect = unitarity_defect(u.matrix());
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let n = dim * dim;
    let um = u.matrix();
    let ud = um.adjoint();
    let conj: Vec<CMatrix> = basis.iter().map(|p| um * p * &ud).collect();
    let mut mat = DMatrix::zeros(n, n);
    for (j, pj) in basis.iter().enumerate() {
        for (k, ck) in conj.iter().enumerate() {
            // tr(A B) = Σ_ab A_ab B_ba
            let mut acc = c(0.0, 0.0);
            for a in 0..dim {
                for b in 0..dim {
                    acc += pj[(a, b)] * ck[(b, a)];
                }
            }
            mat[(j, k)] = acc.re / dim as f64;
        }
    }
    Ok(SuperOp { dim, mat })
}

/// Projector onto traceless operators, `diag(0, 1, …, 1)` in the Pauli basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TracelessProjector {
    pub dim: usize,
}

impl TracelessProjector {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn rank(&self) -> usize {
        self.dim * self.dim - 1
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim * self.dim;
        let mut m = DMatrix::identity(n, n);
        m[(0, 0)] = 0.0;
        m
    }

    /// `‖Π_tr‖_F² = d² − 1`.
    pub fn norm_sq(&self) -> f64 {
        self.rank() as f64
    }
}

/// Column-stacking vectorization: `vec(ABC) = (Cᵀ ⊗ A) vec(B)`.
pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::Shape(format!("length {} is not a perfect square", v.len())));
    }
    Ok(DMatrix::from_column_slice(n, n, v.as_slice()))
}

/// `tr(aᵀ b)` for real matrices.
pub fn hs_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.dot(b))
}

pub fn fro_norm(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Fidelity on the traceless hyperplane, `⟨gΠ, eΠ⟩ / (d² − 1)`.
pub fn traceless_fidelity(e: &SuperOp, g: &SuperOp) -> Result<f64> {
    if e.dim != g.dim {
        return Err(Error::Shape(format!("dimension {} vs {}", e.dim, g.dim)));
    }
    let n = e.dim * e.dim;
    let mut acc = 0.0;
    for k in 1..n {
        for j in 0..n {
            acc += g.mat[(j, k)] * e.mat[(j, k)];
        }
    }
    Ok(acc / (n - 1) as f64)
}

/// Average gate fidelity `1/d + (d−1)/d · f_tr` of `e` to the target `g`.
pub fn avg_gate_fidelity(e: &SuperOp, g: &SuperOp) -> Result<f64> {
    let d = e.dim as f64;
    Ok(1.0 / d + (d - 1.0) / d * traceless_fidelity(e, g)?)
}

/// `1 − F(e, 𝓘)`.
pub fn infidelity(e: &SuperOp) -> f64 {
    1.0 - avg_gate_fidelity(e, &SuperOp::identity(e.dim)).expect("same dimension")
}

/// Pauli-coefficient vector `tr(B_k ρ)` of a Hermitian operator.
pub fn operator_to_pauli_vector(rho: &CMatrix) -> Result<DVector<f64>> {
    let dim = rho.nrows();
    let basis = pauli_strings(dim)?;
    let s = (dim as f64).sqrt();
    Ok(DVector::from_iterator(
        dim * dim,
        basis.iter().map(|p| (p * rho).trace().re / s),
    ))
}
