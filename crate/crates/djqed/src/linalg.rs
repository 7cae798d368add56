//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything here works on plain row-major `Vec<Complex64>` storage. The
//! largest Hilbert space in this crate is 3 qutrits and a 4-level cavity
//! mode (dimension 108), so dense arithmetic is fine throughout.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Elementwise tolerance for the hermiticity flag on operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `‖U†U − I‖_max` for a matrix accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on `‖ψ‖₂ − 1` for a normalized state vector.
pub const STATE_NORM_TOL: f64 = 1e-10;
/// Trace tolerance for a valid density matrix.
pub const DM_TRACE_TOL: f64 = 1e-6;
/// Elementwise hermiticity tolerance for a valid density matrix.
pub const DM_HERMITIAN_TOL: f64 = 1e-8;
/// Lower bound on density-matrix eigenvalues (RK4 does not exactly
/// preserve positivity).
pub const DM_EIGEN_TOL: f64 = -1e-8;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Square matrix with the given main diagonal.
    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix product; dimensions are a programmer invariant here.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        // i-k-j order keeps the inner loop on contiguous rows.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in self.row(i).iter().zip(v) {
                acc += a * x;
            }
            *slot = acc;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: C64) -> Self {
        let data = self.data.iter().map(|a| a * c).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Largest elementwise absolute difference against another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `max_ij |M_ij − conj(M_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.data[i * self.cols + j] - self.data[j * self.cols + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.hermiticity_error() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitize(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] =
                    (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let gram = self.dagger().mul(self);
        gram.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_error() <= tol
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + (j * other.cols + l)] =
                            a * other.data[k * other.cols + l];
                    }
                }
            }
        }
        out
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// Uses cyclic Jacobi on the real-symmetric embedding
    /// `[[Re M, -Im M], [Im M, Re M]]`, whose spectrum is that of `M` with
    /// every eigenvalue doubled.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = vec![0.0f64; 4 * n * n];
        let m = 2 * n;
        for i in 0..n {
            for j in 0..n {
                let z = self.data[i * n + j];
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[(i + n) * m + j] = z.im;
                a[i * m + (j + n)] = -z.im;
            }
        }
        let mut eig = jacobi_symmetric_eigenvalues(&mut a, m);
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // doubled spectrum: keep every other entry
        eig.into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue_hermitian(&self) -> f64 {
        self.eigenvalues_hermitian()
            .first()
            .copied()
            .expect("nonempty spectrum")
    }
}

/// Eigenvalues of a real symmetric matrix (row-major, `n × n`) by cyclic
/// Jacobi rotations. Destroys the input.
fn jacobi_symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(1.0, f64::max);
    let tol = (scale * 1e-14).powi(2) * (n * n) as f64;
    for _sweep in 0..60 {
        if off(a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps an amplitude vector, requiring `‖ψ‖₂ = 1` within tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index⟩` in a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amplitudes[i]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    /// `U|ψ⟩` without renormalization (valid for unitary `U`).
    pub fn apply(&self, u: &ComplexMatrix) -> Self {
        Self { amplitudes: u.mul_vec(&self.amplitudes) }
    }

    /// `|ψ⟩⟨ψ|` as a raw matrix.
    pub fn outer(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }
}

/// Mixed state; hermitian, unit trace, positive semidefinite within the
/// module tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validating constructor: trace within [`DM_TRACE_TOL`], hermiticity
    /// within [`DM_HERMITIAN_TOL`], minimum eigenvalue ≥ [`DM_EIGEN_TOL`].
    pub fn try_new(mat: ComplexMatrix) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch {
                expected: mat.rows(),
                got: mat.cols(),
            });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DM_TRACE_TOL || tr.im.abs() > DM_TRACE_TOL {
            return Err(Error::CorruptedState {
                detail: format!("density matrix trace {} is not 1", tr),
            });
        }
        let herm = mat.hermiticity_error();
        if herm > DM_HERMITIAN_TOL {
            return Err(Error::CorruptedState {
                detail: format!("density matrix hermiticity error {herm:.3e}"),
            });
        }
        // Positivity is checked on the symmetrized matrix; RK4 output is
        // only hermitian up to roundoff.
        let min_eig = mat.hermitize().min_eigenvalue_hermitian();
        if min_eig < DM_EIGEN_TOL {
            return Err(Error::CorruptedState {
                detail: format!("density matrix minimum eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { mat })
    }

    /// Wraps without validation; for integrator internals whose diagnostics
    /// are reported separately.
    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        assert_eq!(mat.rows(), mat.cols());
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &StateVector) -> Self {
        Self { mat: psi.outer() }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace_error(&self) -> f64 {
        (self.mat.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.mat.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.hermitize().min_eigenvalue_hermitian()
    }

    /// Real parts of the diagonal (basis populations).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat.get(i, i).re).collect()
    }
}

/// Kronecker product of two operators.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// `UρU†` for unitary `U`.
pub fn apply_unitary(u: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if u.rows() != u.cols() || u.rows() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: u.rows() });
    }
    let err = u.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::NonUnitary { deviation: err });
    }
    let out = u.mul(rho.matrix()).mul(&u.dagger());
    Ok(DensityMatrix::new_unchecked(out))
}

/// Overlap fidelity `F = √(⟨ψ|ρ|ψ⟩)` of a pure reference state with a
/// mixed state.
///
/// Radicands below `-1e-10` signal a corrupted density matrix; smaller
/// negative dips are clamped to zero.
pub fn state_fidelity(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: rho.dim() });
    }
    let v = rho.matrix().mul_vec(psi.amplitudes());
    let overlap: C64 = psi
        .amplitudes()
        .iter()
        .zip(&v)
        .map(|(a, b)| a.conj() * b)
        .sum();
    let radicand = overlap.re;
    if radicand < -1e-10 {
        return Err(Error::CorruptedState {
            detail: format!("fidelity radicand {radicand:.3e} below tolerance"),
        });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `Re tr(Mρ)`; expectation value of a hermitian operator.
pub fn expectation(m: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    assert_eq!(m.rows(), rho.rows());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..m.rows() {
        for k in 0..m.cols() {
            acc += m.get(i, k) * rho.get(k, i);
        }
    }
    acc.re
}
