//! Deterministic Hermitian eigendecomposition.
//!
//! Cyclic complex Jacobi rotations followed by a canonicalization pass: the
//! eigenvalues are sorted descending and the eigenvectors of every
//! (near-)degenerate cluster are replaced by the Gram–Schmidt orthonormalization
//! of the standard basis vectors projected onto the cluster, taken in index
//! order. Non-degenerate vectors therefore get a fixed phase as well.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, HermitianMatrix, Matrix};
use crate::scalar::{cr, Scalar, C};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.vectors.column(k)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        Matrix::from_fn(n, n, |i, j| {
            (0..n).fold(C::zero(), |acc, k| {
                acc + v[(i, k)] * cr(self.values[k]) * v[(j, k)].conj()
            })
        })
    }
}

pub fn eig_hermitian<T: Scalar>(m: &HermitianMatrix<T>) -> Result<Eigen<T>> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::<T>::identity(n);
    let scale = a.frobenius();
    let stop = T::lit(T::TOL.jacobi) * scale;

    let mut converged = n <= 1 || scale.is_zero();
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        let off = off_diagonal(&a);
        converged = off <= stop;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    // stable sort keeps index order among exactly equal eigenvalues
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let columns: Vec<Vec<C<T>>> = order.iter().map(|&i| v.column(i)).collect();

    let columns = canonicalize(&values, columns, scale);
    Ok(Eigen {
        values,
        vectors: Matrix::from_columns(&columns),
    })
}

fn off_diagonal<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`; `a ← U† a U`, `v ← v U` with
/// `U = [[c, s e^{iφ}], [-s e^{-iφ}, c]]` on the (p, q) plane.
fn rotate<T: Scalar>(a: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r.is_zero() {
        return;
    }
    let n = a.rows();
    let phase = apq / cr(r);
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let two = T::lit(2.0);
    let tau = (aqq - app) / (two * r);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let cc = cr(c);
    let up = phase.scale(s); // s e^{iφ}
    let dn = phase.conj().scale(s); // s e^{-iφ}

    // columns: a ← a U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = cc * akp - dn * akq;
        a[(k, q)] = up * akp + cc * akq;
    }
    // rows: a ← U† a
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = cc * apk - up * aqk;
        a[(q, k)] = dn * apk + cc * aqk;
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    a[(p, p)] = cr(a[(p, p)].re);
    a[(q, q)] = cr(a[(q, q)].re);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = cc * vkp - dn * vkq;
        v[(k, q)] = up * vkp + cc * vkq;
    }
}

fn canonicalize<T: Scalar>(values: &[T], columns: Vec<Vec<C<T>>>, scale: T) -> Vec<Vec<C<T>>> {
    let n = values.len();
    let gap = T::lit(T::TOL.degeneracy) * T::one().max(scale);
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end - 1] - values[end] <= gap {
            end += 1;
        }
        out.extend(canonical_cluster(&columns[start..end], n));
        start = end;
    }
    out
}

fn canonical_cluster<T: Scalar>(cluster: &[Vec<C<T>>], n: usize) -> Vec<Vec<C<T>>> {
    let rank = cluster.len();
    let mut threshold = T::lit(0.5) / T::from_usize(n).unwrap().sqrt();
    loop {
        let mut chosen: Vec<Vec<C<T>>> = Vec::with_capacity(rank);
        for k in 0..n {
            if chosen.len() == rank {
                break;
            }
            // projection of e_k onto the cluster span
            let mut w: Vec<C<T>> = vec![C::zero(); n];
            for u in cluster {
                let coef = u[k].conj();
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi = *wi + *ui * coef;
                }
            }
            for _ in 0..2 {
                for q in &chosen {
                    let c = inner(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi = *wi - *qi * c;
                    }
                }
            }
            let len = norm(&w);
            if len > threshold {
                chosen.push(w.into_iter().map(|z| z / cr(len)).collect());
            }
        }
        if chosen.len() == rank {
            return chosen;
        }
        threshold = threshold * T::lit(0.1);
        if threshold < T::epsilon() {
            // cannot happen for an orthonormal cluster; keep the raw vectors
            return cluster.to_vec();
        }
    }
}

/// Positive-part projector of a Hermitian matrix: the sum of `|v⟩⟨v|` over
/// eigenvectors whose eigenvalue is `≥ -cutoff`, together with the sum of those
/// eigenvalues.
pub fn positive_part<T: Scalar>(m: &HermitianMatrix<T>, cutoff: T) -> Result<(HermitianMatrix<T>, T)> {
    let e = m.eig()?;
    let n = m.dim();
    let mut proj = Matrix::<T>::zeros(n, n);
    let mut sum = T::zero();
    for (k, &lam) in e.values.iter().enumerate() {
        if lam >= -cutoff {
            let v = e.vector(k);
            for i in 0..n {
                for j in 0..n {
                    proj[(i, j)] = proj[(i, j)] + v[i] * v[j].conj();
                }
            }
            sum = sum + lam.max(T::zero());
        }
    }
    Ok((HermitianMatrix::hermitize(proj), sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix<f64> {
        let m = Matrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::hermitize(m)
    }

    #[test]
    fn sigma_x_spectrum() {
        let e = pauli::<f64>('x').eig().unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_sorted_with_permuted_basis() {
        let m = HermitianMatrix::diag(&[3.0, 1.0, 2.0]);
        let e = m.eig().unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vector(0), vec![cr(1.0), cr(0.0), cr(0.0)]);
        assert_eq!(e.vector(1), vec![cr(0.0), cr(0.0), cr(1.0)]);
        assert_eq!(e.vector(2), vec![cr(0.0), cr(1.0), cr(0.0)]);
    }

    #[test]
    fn degenerate_cluster_is_canonical() {
        // identity has one cluster: the canonical basis is the standard basis
        let e = HermitianMatrix::<f64>::identity(3).eig().unwrap();
        assert!(e.vectors.max_abs_diff(&Matrix::identity(3)) < 1e-15);

        // the same degenerate subspace reached through different rotations
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(4, &mut rng);
        let basis = h.eig().unwrap().vectors;
        let spec = HermitianMatrix::diag(&[2.0, 2.0, -1.0, 0.5]);
        let a = spec.conjugate_by(&basis).unwrap();
        let swapped = HermitianMatrix::diag(&[2.0, -1.0, 2.0, 0.5]);
        let mut perm = basis.clone();
        for i in 0..4 {
            perm[(i, 1)] = basis[(i, 2)];
            perm[(i, 2)] = basis[(i, 1)];
        }
        let b = swapped.conjugate_by(&perm).unwrap();
        let ea = a.eig().unwrap();
        let eb = b.eig().unwrap();
        assert!(ea.vectors.max_abs_diff(&eb.vectors) < 1e-10);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=12 {
            let h = random_hermitian(n, &mut rng);
            let e = h.eig().unwrap();
            assert!(e.reconstruct().max_abs_diff(h.as_matrix()) < 1e-10);
            let vv = e.vectors.adjoint().matmul(&e.vectors).unwrap();
            assert!(vv.max_abs_diff(&Matrix::identity(n)) < 1e-10);
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn deterministic_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(6, &mut rng);
        let a = h.eig().unwrap();
        let b = h.eig().unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn positive_part_assigns_zero_to_positive() {
        let (p, s) = positive_part(&HermitianMatrix::<f64>::zeros(2), 1e-12).unwrap();
        assert!(p.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-15);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn f32_eigen() {
        let m = HermitianMatrix::<f32>::diag(&[0.25, 0.75]);
        let e = m.eig().unwrap();
        assert!((e.values[0] - 0.75).abs() < 1e-6);
    }
}
