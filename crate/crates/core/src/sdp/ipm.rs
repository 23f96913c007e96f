//! Primal-dual infeasible interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for real block-diagonal SDPs in the standard form
//!
//! ```text
//! minimize ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! maximize bᵀy      s.t.  Z = C - Σ y_i A_i ⪰ 0
//! ```

use super::dense::{cholesky_solve, Dense};
use crate::scalar::Scalar;

/// One entry of a symmetric sparse matrix; off-diagonal entries are listed in
/// both triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry<T> {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: T,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SparseSym<T> {
    pub entries: Vec<Entry<T>>,
}

impl<T: Scalar> SparseSym<T> {
    /// Adds `value` at `(row, col)` and, off the diagonal, at `(col, row)`.
    pub fn push_sym(&mut self, block: usize, row: usize, col: usize, value: T) {
        self.entries.push(Entry { block, row, col, value });
        if row != col {
            self.entries.push(Entry {
                block,
                row: col,
                col: row,
                value,
            });
        }
    }

    pub fn dot(&self, x: &[Dense<T>]) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |s, e| s + e.value * x[e.block].at(e.row, e.col))
    }

    pub fn add_to(&self, dst: &mut [Dense<T>], s: T) {
        for e in &self.entries {
            let d = dst[e.block].at_mut(e.row, e.col);
            *d = *d + s * e.value;
        }
    }

    pub fn frobenius(&self) -> T {
        self.entries.iter().fold(T::zero(), |s, e| s + e.value * e.value).sqrt()
    }

    fn blocks_touched(&self, nblocks: usize) -> Vec<bool> {
        let mut t = vec![false; nblocks];
        for e in &self.entries {
            t[e.block] = true;
        }
        t
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RealProblem<T> {
    pub blocks: Vec<usize>,
    pub c: SparseSym<T>,
    pub a: Vec<SparseSym<T>>,
    pub b: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone)]
pub(crate) struct RealSolution<T> {
    pub x: Vec<Dense<T>>,
    pub dobj: T,
    pub status: RawStatus,
    pub iterations: usize,
}

const STEP_FRACTION: f64 = 0.98;
const STALL_LEVEL: f64 = 1e-4;
const STALL_ITERATIONS: usize = 50;
const RAY_TOL: f64 = 1e-8;
const RAY_SIZE: f64 = 1e4;

fn blocks_dot<T: Scalar>(a: &[Dense<T>], b: &[Dense<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.dot(y))
}

fn blocks_max_abs<T: Scalar>(a: &[Dense<T>]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.max_abs()))
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite when `dX ⪰ 0`).
fn max_step<T: Scalar>(x: &[Dense<T>], dx: &[Dense<T>]) -> Option<T> {
    let mut alpha = T::infinity();
    for (xb, db) in x.iter().zip(dx) {
        let lam = if xb.n == 1 {
            db.data[0] / xb.data[0]
        } else {
            let linv = xb.cholesky()?.lower_inverse();
            let mut w = linv.matmul(db).matmul(&linv.transpose());
            w.symmetrize();
            w.min_eigenvalue()
        };
        if lam < T::zero() {
            alpha = alpha.min(-T::one() / lam);
        }
    }
    Some(alpha)
}

/// `X A_j Z⁻¹` restricted to the blocks `A_j` touches.
fn schur_column<T: Scalar>(a: &SparseSym<T>, x: &[Dense<T>], zinv: &[Dense<T>], touched: &[bool]) -> Vec<Option<Dense<T>>> {
    let mut u: Vec<Option<Dense<T>>> = touched
        .iter()
        .zip(x)
        .map(|(&t, xb)| t.then(|| Dense::zeros(xb.n)))
        .collect();
    for e in &a.entries {
        let xb = &x[e.block];
        let zb = &zinv[e.block];
        let n = xb.n;
        let ub = u[e.block].as_mut().expect("touched block");
        for p in 0..n {
            let xp = xb.at(p, e.row) * e.value;
            if xp == T::zero() {
                continue;
            }
            let zrow = &zb.data[e.col * n..(e.col + 1) * n];
            let urow = &mut ub.data[p * n..(p + 1) * n];
            for (d, &zz) in urow.iter_mut().zip(zrow) {
                *d = *d + xp * zz;
            }
        }
    }
    u
}

fn factor_schur<T: Scalar>(m: &Dense<T>) -> Option<Dense<T>> {
    if let Some(l) = m.cholesky() {
        return Some(l);
    }
    let diag = (0..m.n).fold(T::zero(), |s, i| s.max(m.at(i, i).abs()));
    for eps in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut r = m.clone();
        for i in 0..m.n {
            *r.at_mut(i, i) = r.at(i, i) + T::lit(eps) * diag.max(T::one());
        }
        if let Some(l) = r.cholesky() {
            return Some(l);
        }
    }
    None
}

pub(crate) fn solve_real<T: Scalar>(p: &RealProblem<T>, tol: T, max_iter: usize) -> RealSolution<T> {
    let nb = p.blocks.len();
    let m = p.a.len();
    let n_tot: usize = p.blocks.iter().sum();
    let nf = T::from_usize(n_tot.max(1)).unwrap();
    let sqrt_n = nf.sqrt();
    let ten = T::lit(10.0);

    let norm_c = p.c.frobenius();
    let norm_a: Vec<T> = p.a.iter().map(SparseSym::frobenius).collect();
    let b_inf = p.b.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
    let c_max = p.c.entries.iter().fold(T::zero(), |s, e| s.max(e.value.abs()));

    let mut xi = ten.max(sqrt_n);
    for (bi, ai) in p.b.iter().zip(&norm_a) {
        xi = xi.max(sqrt_n * (T::one() + bi.abs()) / (T::one() + *ai));
    }
    let eta = norm_a.iter().fold(ten.max(sqrt_n).max(norm_c), |s, &a| s.max(a));

    let mut x: Vec<Dense<T>> = p.blocks.iter().map(|&n| Dense::scaled_identity(n, xi)).collect();
    let mut z: Vec<Dense<T>> = p.blocks.iter().map(|&n| Dense::scaled_identity(n, eta)).collect();
    let mut y = vec![T::zero(); m];
    let touched: Vec<Vec<bool>> = p.a.iter().map(|a| a.blocks_touched(nb)).collect();
    let c_dense = {
        let mut c: Vec<Dense<T>> = p.blocks.iter().map(|&n| Dense::zeros(n)).collect();
        p.c.add_to(&mut c, T::one());
        c
    };

    let half = T::lit(0.5);
    let mut best_primal = T::infinity();
    let mut stall = 0;
    let mut status = RawStatus::MaxIter;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it;
        // residuals
        let rp: Vec<T> = p.a.iter().zip(&p.b).map(|(a, &b)| b - a.dot(&x)).collect();
        let mut rd: Vec<Dense<T>> = c_dense.clone();
        for (rdb, zb) in rd.iter_mut().zip(&z) {
            rdb.add_scaled(-T::one(), zb);
        }
        for (a, &yi) in p.a.iter().zip(&y) {
            a.add_to(&mut rd, -yi);
        }
        let pobj = p.c.dot(&x);
        let dobj = p.b.iter().zip(&y).fold(T::zero(), |s, (&b, &yi)| s + b * yi);
        let gap = blocks_dot(&x, &z);
        let mu = gap / nf;

        let rp_inf = rp.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
        let rd_inf = blocks_max_abs(&rd);
        let primal_ok = rp_inf <= half * tol * T::one().max(b_inf);
        let dual_ok = rd_inf <= half * tol * T::one().max(c_max);
        let gap_ok = (pobj - dobj).abs() <= tol * T::one().max(pobj.abs());
        if primal_ok && dual_ok && gap_ok {
            status = RawStatus::Optimal;
            break;
        }

        // certificates of infeasibility
        if dobj > T::lit(RAY_SIZE) * T::one().max(norm_c) {
            let mut w: Vec<Dense<T>> = p.blocks.iter().map(|&n| Dense::zeros(n)).collect();
            for (a, &yi) in p.a.iter().zip(&y) {
                a.add_to(&mut w, yi / dobj);
            }
            let lam = w.iter().fold(T::neg_infinity(), |s, wb| s.max(wb.max_eigenvalue()));
            if lam <= T::lit(RAY_TOL) {
                status = RawStatus::Infeasible;
                break;
            }
        }
        if -pobj > T::lit(RAY_SIZE) * T::one().max(b_inf) {
            let ax = p.a.iter().fold(T::zero(), |s, a| s.max(a.dot(&x).abs()));
            if ax / -pobj <= T::lit(RAY_TOL) {
                status = RawStatus::Unbounded;
                break;
            }
        }
        let rel_primal = rp_inf / (T::one() + b_inf);
        if rel_primal < best_primal * T::lit(0.99) {
            best_primal = rel_primal;
            stall = 0;
        } else if rel_primal > T::lit(STALL_LEVEL) {
            stall += 1;
            if stall >= STALL_ITERATIONS {
                status = RawStatus::Infeasible;
                break;
            }
        }

        let zinv: Option<Vec<Dense<T>>> = z.iter().map(Dense::spd_inverse).collect();
        let Some(zinv) = zinv else { break };

        // Schur complement M_ij = ⟨A_i, X A_j Z⁻¹⟩
        let mut schur = Dense::zeros(m);
        for j in 0..m {
            let u = schur_column(&p.a[j], &x, &zinv, &touched[j]);
            for i in j..m {
                let mut s = T::zero();
                for e in &p.a[i].entries {
                    if let Some(ub) = &u[e.block] {
                        s = s + e.value * ub.at(e.row, e.col);
                    }
                }
                *schur.at_mut(i, j) = s;
                *schur.at_mut(j, i) = s;
            }
        }
        let Some(chol) = factor_schur(&schur) else { break };

        // X Rd Z⁻¹ is shared by predictor and corrector
        let x_rd_zinv: Vec<Dense<T>> = x
            .iter()
            .zip(&rd)
            .zip(&zinv)
            .map(|((xb, rb), zb)| xb.matmul(rb).matmul(zb))
            .collect();

        let direction = |sigma_mu: T, corr: Option<(&[Dense<T>], &[Dense<T>])>| -> (Vec<Dense<T>>, Vec<T>, Vec<Dense<T>>) {
            // G = σμ Z⁻¹ - X - corr Z⁻¹ - X Rd Z⁻¹
            let g: Vec<Dense<T>> = (0..nb)
                .map(|k| {
                    let mut gk = zinv[k].clone();
                    gk.scale(sigma_mu);
                    gk.add_scaled(-T::one(), &x[k]);
                    gk.add_scaled(-T::one(), &x_rd_zinv[k]);
                    if let Some((dxa, dza)) = corr {
                        gk.add_scaled(-T::one(), &dxa[k].matmul(&dza[k]).matmul(&zinv[k]));
                    }
                    gk
                })
                .collect();
            let rhs: Vec<T> = p.a.iter().zip(&rp).map(|(a, &r)| r - a.dot(&g)).collect();
            let mut dy = cholesky_solve(&chol, &rhs);
            // one round of iterative refinement against the unregularized system
            let resid: Vec<T> = (0..m)
                .map(|i| rhs[i] - (0..m).fold(T::zero(), |s, j| s + schur.at(i, j) * dy[j]))
                .collect();
            for (d, c) in dy.iter_mut().zip(cholesky_solve(&chol, &resid)) {
                *d = *d + c;
            }
            let mut dz = rd.clone();
            for (a, &d) in p.a.iter().zip(&dy) {
                a.add_to(&mut dz, -d);
            }
            // ΔX = σμ Z⁻¹ - X - (corr + X ΔZ) Z⁻¹
            let dx: Vec<Dense<T>> = (0..nb)
                .map(|k| {
                    let mut inner = x[k].matmul(&dz[k]);
                    if let Some((dxa, dza)) = corr {
                        inner.add_scaled(T::one(), &dxa[k].matmul(&dza[k]));
                    }
                    let mut dxk = zinv[k].clone();
                    dxk.scale(sigma_mu);
                    dxk.add_scaled(-T::one(), &x[k]);
                    dxk.add_scaled(-T::one(), &inner.matmul(&zinv[k]));
                    dxk.symmetrize();
                    dxk
                })
                .collect();
            (dx, dy, dz)
        };

        let frac = T::lit(STEP_FRACTION);
        let steps = |dx: &[Dense<T>], dz: &[Dense<T>]| -> Option<(T, T)> {
            let ap = T::one().min(frac * max_step(&x, dx)?);
            let ad = T::one().min(frac * max_step(&z, dz)?);
            Some((ap, ad))
        };

        let (dxa, _, dza) = direction(T::zero(), None);
        let Some((apa, ada)) = steps(&dxa, &dza) else { break };
        let mut mu_aff = T::zero();
        for k in 0..nb {
            let mut xa = x[k].clone();
            xa.add_scaled(apa, &dxa[k]);
            let mut za = z[k].clone();
            za.add_scaled(ada, &dza[k]);
            mu_aff = mu_aff + xa.dot(&za);
        }
        mu_aff = mu_aff / nf;
        let ratio = (mu_aff / mu).max(T::zero()).min(T::one());
        let sigma = ratio * ratio * ratio;

        let (dx, dy, dz) = direction(sigma * mu, Some((&dxa, &dza)));
        let Some((ap, ad)) = steps(&dx, &dz) else { break };
        for k in 0..nb {
            x[k].add_scaled(ap, &dx[k]);
            z[k].add_scaled(ad, &dz[k]);
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi = *yi + ad * *d;
        }
        iterations = it + 1;
    }

    let dobj = p.b.iter().zip(&y).fold(T::zero(), |s, (&b, &yi)| s + b * yi);
    RealSolution {
        x,
        dobj,
        status,
        iterations,
    }
}
