//! Dense complex matrices and the Hermitian newtype carried through the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cr, Scalar, C};

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C<T>>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
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

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(C::zero(), |a, b| a + b)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} applied to a length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest |a_ij - conj(a_ji)|.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs).expect("matrix product dimensions")
    }
}

/// `Σ_i conj(a_i) b_i`.
pub fn inner<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Scalar>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Orthonormal completion: Gram–Schmidt over `seed` followed by the standard
/// basis in index order. Returns `dim` orthonormal columns whose leading
/// columns span the seed vectors.
pub fn complete_basis<T: Scalar>(seed: &[Vec<C<T>>], dim: usize) -> Vec<Vec<C<T>>> {
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(dim);
    let cutoff = T::lit(1e-8);
    let candidates = seed.iter().cloned().chain((0..dim).map(|k| {
        let mut e = vec![C::zero(); dim];
        e[k] = C::one();
        e
    }));
    for mut v in candidates {
        if basis.len() == dim {
            break;
        }
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - *qi * c;
                }
            }
        }
        let n = norm(&v);
        if n > cutoff {
            basis.push(v.into_iter().map(|z| z / cr(n)).collect());
        }
    }
    basis
}

/// Dense Hermitian matrix. Entries are stored exactly Hermitian; the
/// constructor accepts inputs whose asymmetry is below the invariant tolerance.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    inner: Matrix<T>,
}

impl<T: fmt::Debug> fmt::Debug for HermitianMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.inner)
    }
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn new(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        Self::from_matrix(Matrix::from_row_major(dim, dim, entries)?)
    }

    pub fn from_matrix(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermitian_defect();
        let scale = T::one().max(m.max_abs());
        if !(defect <= T::lit(T::TOL.invariant) * scale) {
            return Err(Error::NotHermitian(defect.to_f64_lossy()));
        }
        Ok(Self::hermitize(m))
    }

    /// Projects onto the Hermitian part without validation.
    pub(crate) fn hermitize(m: Matrix<T>) -> Self {
        let n = m.rows();
        let half = T::lit(0.5);
        let out = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                cr(m[(i, i)].re)
            } else {
                (m[(i, j)] + m[(j, i)].conj()).scale(half)
            }
        });
        Self { inner: out }
    }

    pub fn from_real_fn(dim: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        Self::from_matrix(Matrix::from_fn(dim, dim, |i, j| cr(f(i, j))))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: Matrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: Matrix::identity(dim),
        }
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self {
            inner: Matrix::from_fn(n, n, |i, j| if i == j { cr(values[i]) } else { C::zero() }),
        }
    }

    /// `|v⟩⟨v|` (no normalization applied).
    pub fn projector(v: &[C<T>]) -> Self {
        let n = v.len();
        Self::hermitize(Matrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }

    pub fn entry(&self, i: usize, j: usize) -> C<T> {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> T {
        self.inner.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            inner: self.inner.scale(cr(s)),
        }
    }

    /// `⟨v|H|v⟩` (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, v: &[C<T>]) -> Result<T> {
        let hv = self.inner.apply(v)?;
        Ok(crate::linalg::inner(v, &hv).re)
    }

    /// Hilbert–Schmidt inner product `Tr[self · other]`.
    pub fn dot(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Tr[AB] with dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + (self.inner[(i, j)] * other.inner[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.inner.max_abs_diff(&other.inner)
    }

    pub fn eig(&self) -> Result<crate::eig::Eigen<T>> {
        crate::eig::eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(*self.eig()?.values.last().expect("non-empty spectrum"))
    }

    /// `U H U†` for a square `U` of matching dimension.
    pub fn conjugate_by(&self, u: &Matrix<T>) -> Result<Self> {
        let m = u.matmul(&self.inner)?.matmul(&u.adjoint())?;
        Ok(Self::hermitize(m))
    }
}

impl<T: Scalar> Add for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn add(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<T: Scalar> Sub for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn sub(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::from_row_major(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            HermitianMatrix::from_matrix(m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn rejects_non_square() {
        let m: Matrix<f64> = Matrix::zeros(2, 3);
        assert!(HermitianMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn kron_shapes_and_entries() {
        let a = Matrix::<f64>::from_fn(2, 2, |i, j| cr((i * 2 + j) as f64));
        let b = Matrix::<f64>::identity(3);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert_eq!(k[(3, 3)], cr(3.0));
        assert_eq!(k[(3, 4)], cr(0.0));
        assert_eq!(k[(4, 1)], cr(2.0));
    }

    #[test]
    fn completion_is_orthonormal_and_keeps_seed() {
        let s = 0.5f64.sqrt();
        let seed = vec![vec![cr(s), cr(0.0), cr(0.0), cr(s)]];
        let b = complete_basis(&seed, 4);
        assert_eq!(b.len(), 4);
        assert_eq!(b[0], seed[0]);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&b[i], &b[j]) - cr(want)).norm() < 1e-14);
            }
        }
    }
}
