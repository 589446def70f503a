//! Dense complex matrices and vectors.
//!
//! Everything here is sized for the small systems this crate deals with
//! (a handful up to a few dozen rows), so storage is a plain row-major
//! `Vec<Complex64>` and no attempt is made at blocking or BLAS dispatch.
//!
//! The spectral quantities (norms, rank, kernel, minimum-norm solves) all go
//! through one singular value decomposition in [`svd`]; eigenvalues come from
//! the Hessenberg QR iteration in [`eigen`].

mod eigen;
mod svd;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use svd::Svd;

/// Scalar field of every matrix in the crate.
pub type ComplexScalar = Complex64;

/// Default relative tolerance for rank and kernel decisions.
pub const DEFAULT_RTOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Wire format: `{"rows": R, "cols": C, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: MatrixJson) -> Result<Self> {
        let data = raw
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(raw.rows, raw.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>12.5e}{:+.5e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape {
                op: "ComplexMatrix::new",
                detail: format!("dimensions must be positive, got {rows}x{cols}"),
            });
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape {
                op: "ComplexMatrix::new",
                detail: format!(
                    "{rows}x{cols} matrix needs {} entries, got {}",
                    rows * cols,
                    entries.len()
                ),
            });
        }
        if !entries.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            data: entries,
        })
    }

    /// Builds a matrix from a list of rows of equal length.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape {
                op: "ComplexMatrix::from_rows",
                detail: "rows have different lengths".into(),
            });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Real matrix from nested rows; convenient in tests and model builders.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    pub fn row(&self, r: usize) -> ComplexVector {
        ComplexVector(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, ComplexVector::dim);
        if columns.iter().any(|v| v.dim() != rows) {
            return Err(Error::Shape {
                op: "ComplexMatrix::from_columns",
                detail: "columns have different lengths".into(),
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend(columns.iter().map(|v| v[r]));
        }
        Self::new(rows, cols, data)
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Shape {
                op,
                detail: format!("expected a square matrix, got {}x{}", self.rows, self.cols),
            })
        }
    }

    fn require_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::Shape {
                op,
                detail: format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            })
        }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape {
                op: "matmul",
                detail: format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::Shape {
                op: "mul_vec",
                detail: format!(
                    "{}x{} times vector of length {}",
                    self.rows,
                    self.cols,
                    v.dim()
                ),
            });
        }
        Ok(ComplexVector(
            (0..self.rows)
                .map(|r| {
                    self.data[r * self.cols..(r + 1) * self.cols]
                        .iter()
                        .zip(v.iter())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        ))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "add")?;
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "sub")?;
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `self + s·I`.
    pub fn shift_diagonal(&self, s: Complex64) -> Result<Self> {
        let n = self.require_square("shift_diagonal")?;
        let mut out = self.clone();
        for i in 0..n {
            out[(i, i)] += s;
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<Complex64> {
        let n = self.require_square("trace")?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// `self^k` by repeated multiplication; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Result<Self> {
        let n = self.require_square("pow")?;
        let mut out = Self::identity(n);
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// Copy of the `rows × cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Self> {
        if r0 + rows > self.rows || c0 + cols > self.cols || rows == 0 || cols == 0 {
            return Err(Error::Shape {
                op: "block",
                detail: format!(
                    "block {rows}x{cols} at ({r0},{c0}) outside {}x{}",
                    self.rows, self.cols
                ),
            });
        }
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = self[(r0 + r, c0 + c)];
            }
        }
        Ok(out)
    }

    /// Overwrites the block whose top-left corner is `(r0, c0)` with `src`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) -> Result<()> {
        if r0 + src.rows > self.rows || c0 + src.cols > self.cols {
            return Err(Error::Shape {
                op: "set_block",
                detail: format!(
                    "block {}x{} at ({r0},{c0}) outside {}x{}",
                    src.rows, src.cols, self.rows, self.cols
                ),
            });
        }
        for r in 0..src.rows {
            for c in 0..src.cols {
                self[(r0 + r, c0 + c)] = src[(r, c)];
            }
        }
        Ok(())
    }

    /// `sqrt(Σ |a_ij|²)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute value of any entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Singular value decomposition `A = U Σ V†`.
    pub fn svd(&self) -> Result<Svd> {
        Svd::new(self)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        // The Jacobi sweep cap is never reached for finite input of the sizes
        // handled here; fall back to the Frobenius norm if it ever is.
        Svd::new(self)
            .map(|s| s.singular_values.first().copied().unwrap_or(0.0))
            .unwrap_or_else(|_| self.frobenius_norm())
    }

    /// Number of singular values above `rtol · max(rows, cols) · σ_max`.
    pub fn rank(&self, rtol: f64) -> Result<usize> {
        Ok(self.svd()?.rank(rtol))
    }

    /// Unit vector spanning a one-dimensional numerical kernel.
    ///
    /// The phase is fixed so that the first component of largest modulus is
    /// real and positive.
    pub fn kernel_vector(&self, rtol: f64) -> Result<ComplexVector> {
        let svd = self.svd()?;
        let basis = svd.kernel_basis(rtol);
        if basis.len() != 1 {
            return Err(Error::Degenerate {
                expected: 1,
                found: basis.len(),
            });
        }
        let mut v = basis.into_iter().next().expect("one kernel vector");
        let norm = v.norm();
        v = v.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(v.with_fixed_phase())
    }

    /// Minimum-norm solution of `A x = b` for a consistent system.
    ///
    /// Singular values at or below the rank threshold are treated as zero.
    /// The solve is rejected when the residual exceeds
    /// `max(rtol, 64 ε) · cond · ‖b‖`, where `cond` is the condition number of
    /// the retained part of the spectrum.
    pub fn min_norm_solve(&self, b: &ComplexVector, rtol: f64) -> Result<ComplexVector> {
        if b.dim() != self.rows {
            return Err(Error::Shape {
                op: "min_norm_solve",
                detail: format!(
                    "{}x{} system with rhs of length {}",
                    self.rows,
                    self.cols,
                    b.dim()
                ),
            });
        }
        let svd = self.svd()?;
        let x = svd.pseudo_solve(b, rtol);
        let residual = self.mul_vec(&x)?.sub(b)?.norm();
        let allowance = rtol.max(64.0 * f64::EPSILON)
            * svd.retained_condition(rtol).max(1.0)
            * b.norm().max(f64::MIN_POSITIVE);
        if residual > allowance {
            return Err(Error::NoSolution {
                residual,
                allowance,
            });
        }
        Ok(x)
    }

    /// Least-squares minimum-norm solution `A⁺ b`, with no consistency check.
    pub fn least_squares(&self, b: &ComplexVector, rtol: f64) -> Result<ComplexVector> {
        if b.dim() != self.rows {
            return Err(Error::Shape {
                op: "least_squares",
                detail: format!(
                    "{}x{} system with rhs of length {}",
                    self.rows,
                    self.cols,
                    b.dim()
                ),
            });
        }
        Ok(self.svd()?.pseudo_solve(b, rtol))
    }

    /// All eigenvalues with multiplicity, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let n = self.require_square("eigenvalues")?;
        let mut values = eigen::hessenberg_qr_eigenvalues(self, 100 * n)?;
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(values)
    }
}

/// Dense complex column vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ComplexVector(Vec<Complex64>);

impl TryFrom<Vec<[f64; 2]>> for ComplexVector {
    type Error = Error;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        ComplexVector::new(
            raw.into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<ComplexVector> for Vec<[f64; 2]> {
    fn from(v: ComplexVector) -> Self {
        v.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape {
                op: "ComplexVector::new",
                detail: "vector must have positive dimension".into(),
            });
        }
        if !entries.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(ComplexVector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector(vec![ZERO; dim])
    }

    /// `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Euclidean 2-norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other, "vector add")?;
        Ok(ComplexVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other, "vector sub")?;
        Ok(ComplexVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self> {
        self.same_dim(other, "axpy")?;
        Ok(ComplexVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        ))
    }

    fn same_dim(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::Shape {
                op,
                detail: format!("lengths {} and {}", self.dim(), other.dim()),
            })
        }
    }

    /// Rotates the global phase so that the first entry whose modulus equals
    /// the largest modulus (to a relative 1e-10) becomes real and positive.
    pub fn with_fixed_phase(&self) -> Self {
        let max = self.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self
            .0
            .iter()
            .find(|z| z.norm() >= max * (1.0 - 1e-10))
            .copied()
            .expect("some entry attains the maximum");
        let phase = pivot.conj() / pivot.norm();
        let mut out = self.scale(phase);
        let i = self
            .0
            .iter()
            .position(|z| *z == pivot)
            .expect("pivot present");
        out.0[i] = Complex64::new(out.0[i].norm(), 0.0);
        out
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), other.dim());
        for (r, a) in self.0.iter().enumerate() {
            for (c, b) in other.0.iter().enumerate() {
                m[(r, c)] = a * b.conj();
            }
        }
        m
    }
}
