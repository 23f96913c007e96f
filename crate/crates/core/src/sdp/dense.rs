//! Dense real square matrices used by the interior-point solver.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let row = &o.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &r) in dst.iter_mut().zip(row) {
                    *d = *d + a * r;
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, s: T, o: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&o.data) {
            *a = *a + s * b;
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in &mut self.data {
            *a = *a * s;
        }
    }

    pub fn symmetrize(&mut self) {
        let n = self.n;
        let half = T::lit(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (self.data[i * n + j] + self.data[j * n + i]) * half;
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// `Tr[Aᵀ B]`.
    pub fn dot(&self, o: &Self) -> T {
        self.data.iter().zip(&o.data).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.dot(self).sqrt()
    }

    /// Lower Cholesky factor, or `None` if the matrix is not numerically positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self.at(j, j);
            for k in 0..j {
                d = d - l.at(j, k) * l.at(j, k);
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            *l.at_mut(j, j) = d;
            for i in (j + 1)..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s = s - l.at(i, k) * l.at(j, k);
                }
                *l.at_mut(i, j) = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Self {
        let n = self.n;
        let mut inv = Self::zeros(n);
        for j in 0..n {
            *inv.at_mut(j, j) = T::one() / self.at(j, j);
            for i in (j + 1)..n {
                let mut s = T::zero();
                for k in j..i {
                    s = s + self.at(i, k) * inv.at(k, j);
                }
                *inv.at_mut(i, j) = -s / self.at(i, i);
            }
        }
        inv
    }

    /// Inverse of a positive definite matrix through its Cholesky factor.
    pub fn spd_inverse(&self) -> Option<Self> {
        let linv = self.cholesky()?.lower_inverse();
        let mut out = linv.transpose().matmul(&linv);
        out.symmetrize();
        Some(out)
    }

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), unsorted.
    pub fn sym_eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.clone();
        let scale = a.frobenius();
        if n <= 1 || scale == T::zero() {
            return (0..n).map(|i| a.at(i, i)).collect();
        }
        let stop = T::lit(1e-15) * scale;
        for _ in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off = off + a.at(i, j) * a.at(i, j);
                    }
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.at(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let tau = (a.at(q, q) - a.at(p, p)) / (T::lit(2.0) * apq);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.at(k, p);
                        let akq = a.at(k, q);
                        *a.at_mut(k, p) = c * akp - s * akq;
                        *a.at_mut(k, q) = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a.at(p, k);
                        let aqk = a.at(q, k);
                        *a.at_mut(p, k) = c * apk - s * aqk;
                        *a.at_mut(q, k) = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a.at(i, i)).collect()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.sym_eigenvalues().into_iter().fold(T::infinity(), T::min)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.sym_eigenvalues().into_iter().fold(T::neg_infinity(), T::max)
    }
}

/// Solves `L Lᵀ x = rhs` given the lower Cholesky factor.
pub(crate) fn cholesky_solve<T: Scalar>(l: &Dense<T>, rhs: &[T]) -> Vec<T> {
    let n = l.n;
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l.at(i, k) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l.at(k, i) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    y
}
