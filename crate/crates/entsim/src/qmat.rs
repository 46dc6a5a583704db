//! Dense complex-matrix kernel.
//!
//! Everything in this crate manipulates small dense matrices (the protocol
//! instances are 2x2 to 6x6, tensor products up to 16x16), so the kernel is
//! deliberately simple: row-major storage, a cyclic Jacobi eigensolver for
//! Hermitian matrices, Kronecker products and partial traces with a fixed
//! (A-major, B-minor) tensor index order.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Default absolute tolerance on eigenvalues for positive semidefiniteness.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;
/// Default entrywise tolerance on `|M - M^dagger|` for hermiticity checks.
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-9;

/// Which tensor factor an operation refers to. Index order is fixed as
/// (A-index major, B-index minor): the joint basis vector `(i, j)` sits at
/// position `i * dim_b + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Hermiticity diagnostic: worst entrywise asymmetry and the smallest
/// eigenvalue of the symmetrized matrix `(M + M^dagger) / 2`.
#[derive(Debug, Clone, Copy)]
pub struct HermitianCheckReport {
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
}

/// Dense rectangular complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("matrix contains a non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows of real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| Complex::new(rows[i][j], 0.0))
    }

    /// Pauli sigma_z.
    pub fn sigma_z() -> Self {
        Self::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// Pauli sigma_x.
    pub fn sigma_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `|M - M^dagger|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M^dagger) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Kronecker product `self (x) other`, A-index major.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                for j1 in 0..self.cols {
                    for j2 in 0..other.cols {
                        data.push(self[(i1, j1)] * other[(i2, j2)]);
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    /// Partial trace of a square matrix on a `dim_a * dim_b` tensor space.
    /// `Side::A` traces out the first factor and returns a `dim_b` square
    /// matrix; `Side::B` the other way around.
    pub fn partial_trace(&self, side: Side, dim_a: usize, dim_b: usize) -> Result<Self> {
        if !self.is_square() || self.rows != dim_a * dim_b {
            return Err(Error::Dimension(format!(
                "partial trace needs a square {n}x{n} matrix, got {}x{}",
                self.rows,
                self.cols,
                n = dim_a * dim_b
            )));
        }
        let m = match side {
            Side::A => Self::from_fn(dim_b, dim_b, |j1, j2| {
                (0..dim_a).map(|i| self[(i * dim_b + j1, i * dim_b + j2)]).sum()
            }),
            Side::B => Self::from_fn(dim_a, dim_a, |i1, i2| {
                (0..dim_b).map(|j| self[(i1 * dim_b + j, i2 * dim_b + j)]).sum()
            }),
        };
        Ok(m)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex> {
        if self.cols != other.rows || other.cols != self.rows {
            return Err(Error::Dimension(format!(
                "trace-product shapes {}x{} and {}x{} do not chain to a square",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Eigenvalues and eigenvectors of the Hermitian part `(M + M^dagger)/2`,
    /// computed by cyclic Jacobi rotations. Eigenvalues come back ascending;
    /// the i-th column of the returned matrix is the i-th eigenvector.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
        }
        let mut a = self.symmetrized();
        let mut v = ComplexMatrix::identity(n);
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let stop = 1e-14 * scale;

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += 2.0 * a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g < 1e-300 {
                        a.set(p, q, Complex::new(0.0, 0.0));
                        a.set(q, p, Complex::new(0.0, 0.0));
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let phase = apq / g;
                    let tau = (aqq - app) / (2.0 * g);
                    // smaller-magnitude root of t^2 - 2*tau*t - 1 = 0
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    // unitary restricted to (p,q):
                    //   U_pp = phase*c   U_pq = -phase*s
                    //   U_qp = s         U_qq = c
                    let upp = phase * c;
                    let upq = phase * (-s);

                    // rows: U^dagger * A
                    for j in 0..n {
                        let hp = a[(p, j)];
                        let hq = a[(q, j)];
                        a.set(p, j, upp.conj() * hp + s * hq);
                        a.set(q, j, upq.conj() * hp + c * hq);
                    }
                    // columns: A * U
                    for i in 0..n {
                        let hp = a[(i, p)];
                        let hq = a[(i, q)];
                        a.set(i, p, hp * upp + hq * s);
                        a.set(i, q, hp * upq + hq * c);
                    }
                    // the rotation zeroes the (p,q) pair exactly
                    a.set(p, q, Complex::new(0.0, 0.0));
                    a.set(q, p, Complex::new(0.0, 0.0));
                    a.set(p, p, Complex::new(a[(p, p)].re, 0.0));
                    a.set(q, q, Complex::new(a[(q, q)].re, 0.0));
                    // accumulate eigenvectors: V * U
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v.set(i, p, vp * upp + vq * s);
                        v.set(i, q, vp * upq + vq * c);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
        let evals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let evecs = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok((evals, evecs))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue_hermitian(&self) -> Result<f64> {
        let (evals, _) = self.eigh()?;
        Ok(evals.first().copied().unwrap_or(0.0))
    }

    /// Positive semidefiniteness: hermitian asymmetry and the smallest
    /// eigenvalue must both be within `tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "PSD check needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.hermitian_asymmetry() > tol {
            return Ok(false);
        }
        Ok(self.min_eigenvalue_hermitian()? >= -tol)
    }

    /// Asymmetry plus minimum eigenvalue in one report.
    pub fn hermitian_check(&self) -> Result<HermitianCheckReport> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "hermiticity check needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(HermitianCheckReport {
            max_asymmetry: self.hermitian_asymmetry(),
            min_eigenvalue: self.min_eigenvalue_hermitian()?,
        })
    }

    /// PSD square root via the Jacobi eigensolver; eigenvalues clipped at 0.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let (evals, v) = self.eigh()?;
        let n = self.rows;
        // eigenvalues at rounding-noise scale are genuine zeros; taking
        // their square roots would amplify the noise by eight orders
        let cutoff = evals.last().map_or(0.0, |&top| top.max(0.0) * 1e-13);
        let mut out = Self::zeros(n, n);
        for (idx, &lam) in evals.iter().enumerate() {
            if lam <= cutoff {
                continue;
            }
            let s = lam.sqrt();
            for i in 0..n {
                for j in 0..n {
                    let add = v[(i, idx)] * v[(j, idx)].conj() * s;
                    let cur = out[(i, j)];
                    out.set(i, j, cur + add);
                }
            }
        }
        Ok(out)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix mul shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out[(i, j)];
                    out.set(i, j, cur + aik * rhs[(k, j)]);
                }
            }
        }
        out
    }
}
