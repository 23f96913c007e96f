//! Small dense semidefinite programs over block-diagonal Hermitian variables.
//!
//! A problem maximizes `Tr[C X]` over `X = X_0 ⊕ X_1 ⊕ … ⪰ 0` subject to affine
//! equalities and inequalities. Complex data is lowered to a real symmetric
//! program through `X ↦ [[Re X, -Im X], [Im X, Re X]]`; problems whose data is
//! entirely real are solved over real symmetric blocks directly.
//!
//! # Text format
//!
//! ```text
//! # comment
//! blocks 2 3
//! objective
//! <block> <row> <col> <re> <im>
//! end
//! eq <rhs>
//! <block> <row> <col> <re> <im>
//! end
//! le <rhs>          (or: ge <rhs>)
//! ...
//! end
//! ```
//!
//! Each triplet `(b, r, c, v)` contributes `v` at `(r, c)` of block `b` and, when
//! `r ≠ c`, `conj(v)` at `(c, r)`.

mod dense;
mod ipm;

use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Matrix};
use crate::scalar::{Scalar, C};
use dense::Dense;
use ipm::{RawStatus, RealProblem, SparseSym};

/// Largest total variable dimension accepted by [`solve`].
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIter,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry<T> {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: C<T>,
}

/// Sparse Hermitian operator on the block-diagonal variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian<T> {
    entries: Vec<BlockEntry<T>>,
}

impl<T: Scalar> Default for SparseHermitian<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> SparseHermitian<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Adds `v` at `(row, col)` and `conj(v)` at `(col, row)` (once on the diagonal).
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: C<T>) -> &mut Self {
        self.entries.push(BlockEntry { block, row, col, value });
        self
    }

    pub fn add_real(&mut self, block: usize, row: usize, col: usize, value: T) -> &mut Self {
        self.add(block, row, col, C::new(value, T::zero()))
    }

    /// Real coefficient on `Re X[row][col]`: `Tr[H X] = value · Re X_{row,col}`.
    pub fn add_re_entry(&mut self, block: usize, row: usize, col: usize, value: T) -> &mut Self {
        if row == col {
            self.add_real(block, row, row, value)
        } else {
            self.add_real(block, row, col, value / T::lit(2.0))
        }
    }

    pub fn with(mut self, block: usize, row: usize, col: usize, value: T) -> Self {
        self.add_real(block, row, col, value);
        self
    }

    pub fn from_dense(block: usize, h: &HermitianMatrix<T>) -> Self {
        let mut s = Self::new();
        s.add_dense(block, h, T::one());
        s
    }

    pub fn add_dense(&mut self, block: usize, h: &HermitianMatrix<T>, scale: T) -> &mut Self {
        let n = h.dim();
        for r in 0..n {
            for c in r..n {
                let v = h.entry(r, c) * scale;
                if !v.is_zero() {
                    self.add(block, r, c, v);
                }
            }
        }
        self
    }

    pub fn entries(&self) -> &[BlockEntry<T>] {
        &self.entries
    }

    /// `Tr[H X]` for a block-diagonal `X`.
    pub fn trace_with(&self, x: &[HermitianMatrix<T>]) -> T {
        self.entries.iter().fold(T::zero(), |s, e| {
            let xv = x[e.block].entry(e.col, e.row);
            if e.row == e.col {
                s + e.value.re * xv.re
            } else {
                s + T::lit(2.0) * (e.value * xv).re
            }
        })
    }

    fn has_imaginary(&self) -> bool {
        self.entries.iter().any(|e| !e.value.im.is_zero())
    }

    fn check(&self, blocks: &[usize], what: &str) -> Result<()> {
        for e in &self.entries {
            let Some(&n) = blocks.get(e.block) else {
                return Err(Error::DimensionMismatch(format!("{what}: block {} does not exist", e.block)));
            };
            if e.row >= n || e.col >= n {
                return Err(Error::DimensionMismatch(format!(
                    "{what}: entry ({}, {}) outside block {} of size {n}",
                    e.row, e.col, e.block
                )));
            }
            if e.row == e.col && !e.value.im.is_zero() {
                return Err(Error::NotHermitian(e.value.im.to_f64_lossy()));
            }
            if !e.value.re.is_finite() || !e.value.im.is_finite() {
                return Err(Error::DimensionMismatch(format!("{what}: non-finite coefficient")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<T> {
    blocks: Vec<usize>,
    objective: SparseHermitian<T>,
    equalities: Vec<(SparseHermitian<T>, T)>,
    inequalities: Vec<(SparseHermitian<T>, Direction, T)>,
}

impl<T: Scalar> SdpProblem<T> {
    pub fn new(blocks: Vec<usize>) -> Self {
        Self {
            blocks,
            objective: SparseHermitian::new(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    /// One `dim x dim` block with a dense objective.
    pub fn single(objective: &HermitianMatrix<T>) -> Self {
        let mut p = Self::new(vec![objective.dim()]);
        p.objective = SparseHermitian::from_dense(0, objective);
        p
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn objective(&self) -> &SparseHermitian<T> {
        &self.objective
    }

    pub fn equalities(&self) -> &[(SparseHermitian<T>, T)] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[(SparseHermitian<T>, Direction, T)] {
        &self.inequalities
    }

    pub fn set_objective(&mut self, c: SparseHermitian<T>) -> &mut Self {
        self.objective = c;
        self
    }

    pub fn objective_mut(&mut self) -> &mut SparseHermitian<T> {
        &mut self.objective
    }

    pub fn add_equality(&mut self, a: SparseHermitian<T>, rhs: T) -> &mut Self {
        self.equalities.push((a, rhs));
        self
    }

    pub fn add_inequality(&mut self, a: SparseHermitian<T>, dir: Direction, rhs: T) -> &mut Self {
        self.inequalities.push((a, dir, rhs));
        self
    }

    /// `Σ_k coef_k X_{block_k} = rhs` entrywise. With `real_only` the imaginary
    /// parts of the off-diagonal entries are left unconstrained (appropriate
    /// when the variable is real).
    pub fn add_block_sum_equality(&mut self, terms: &[(usize, T)], rhs: &HermitianMatrix<T>, real_only: bool) -> &mut Self {
        let n = rhs.dim();
        for r in 0..n {
            for c in r..n {
                let mut re = SparseHermitian::new();
                for &(b, coef) in terms {
                    re.add_re_entry(b, r, c, coef);
                }
                self.add_equality(re, rhs.entry(r, c).re);
                if r != c && !real_only {
                    // Tr[H X] = Im X[r][c] for H = i/2 (E_rc - E_cr)
                    let mut im = SparseHermitian::new();
                    for &(b, coef) in terms {
                        im.add(b, r, c, C::new(T::zero(), coef / T::lit(2.0)));
                    }
                    self.add_equality(im, rhs.entry(r, c).im);
                }
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::DimensionMismatch("blocks must be non-empty with positive sizes".into()));
        }
        if self.dim() > MAX_DIM {
            return Err(Error::Unsupported(format!(
                "variable dimension {} exceeds {MAX_DIM}",
                self.dim()
            )));
        }
        self.objective.check(&self.blocks, "objective")?;
        for (a, b) in &self.equalities {
            a.check(&self.blocks, "equality")?;
            if !b.is_finite() {
                return Err(Error::DimensionMismatch("non-finite right-hand side".into()));
            }
        }
        for (a, _, b) in &self.inequalities {
            a.check(&self.blocks, "inequality")?;
            if !b.is_finite() {
                return Err(Error::DimensionMismatch("non-finite right-hand side".into()));
            }
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        !self.objective.has_imaginary()
            && self.equalities.iter().all(|(a, _)| !a.has_imaginary())
            && self.inequalities.iter().all(|(a, _, _)| !a.has_imaginary())
    }

    /// Plain-text dump (see the module documentation).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let write_op = |s: &mut String, h: &SparseHermitian<T>| {
            for e in &h.entries {
                let _ = writeln!(
                    s,
                    "{} {} {} {:?} {:?}",
                    e.block,
                    e.row,
                    e.col,
                    e.value.re.to_f64_lossy(),
                    e.value.im.to_f64_lossy()
                );
            }
            s.push_str("end\n");
        };
        s.push_str("# sdp problem\nblocks");
        for b in &self.blocks {
            let _ = write!(s, " {b}");
        }
        s.push_str("\nobjective\n");
        write_op(&mut s, &self.objective);
        for (a, b) in &self.equalities {
            let _ = writeln!(s, "eq {:?}", b.to_f64_lossy());
            write_op(&mut s, a);
        }
        for (a, d, b) in &self.inequalities {
            let tag = if *d == Direction::Le { "le" } else { "ge" };
            let _ = writeln!(s, "{tag} {:?}", b.to_f64_lossy());
            write_op(&mut s, a);
        }
        s
    }

    pub fn load(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, first) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
        let mut words = first.split_whitespace();
        if words.next() != Some("blocks") {
            return Err(perr(ln, "expected 'blocks'"));
        }
        let blocks = words
            .map(|w| w.parse::<usize>().map_err(|_| perr(ln, "bad block size")))
            .collect::<Result<Vec<_>>>()?;
        let mut problem = Self::new(blocks);
        let mut seen_objective = false;
        while let Some((ln, head)) = lines.next() {
            let mut w = head.split_whitespace();
            let tag = w.next().unwrap_or_default();
            let rhs = match tag {
                "objective" => None,
                "eq" | "le" | "ge" => {
                    let v: f64 = w
                        .next()
                        .ok_or_else(|| perr(ln, "missing right-hand side"))?
                        .parse()
                        .map_err(|_| perr(ln, "bad right-hand side"))?;
                    Some(T::lit(v))
                }
                _ => return Err(perr(ln, "expected objective, eq, le or ge")),
            };
            let mut op = SparseHermitian::new();
            loop {
                let (ln, l) = lines.next().ok_or_else(|| perr(ln, "missing 'end'"))?;
                if l == "end" {
                    break;
                }
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(perr(ln, "expected 'block row col re im'"));
                }
                let idx = |k: usize| f[k].parse::<usize>().map_err(|_| perr(ln, "bad index"));
                let num = |k: usize| f[k].parse::<f64>().map_err(|_| perr(ln, "bad number"));
                op.add(idx(0)?, idx(1)?, idx(2)?, C::new(T::lit(num(3)?), T::lit(num(4)?)));
            }
            match (tag, rhs) {
                ("objective", _) => {
                    if seen_objective {
                        return Err(perr(ln, "duplicate objective"));
                    }
                    seen_objective = true;
                    problem.objective = op;
                }
                ("eq", Some(b)) => {
                    problem.add_equality(op, b);
                }
                ("le", Some(b)) => {
                    problem.add_inequality(op, Direction::Le, b);
                }
                (_, Some(b)) => {
                    problem.add_inequality(op, Direction::Ge, b);
                }
                _ => unreachable!(),
            }
        }
        problem.validate()?;
        Ok(problem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution<T> {
    /// Optimal blocks, in problem order.
    pub x: Vec<HermitianMatrix<T>>,
    /// `Tr[C X]`.
    pub value: T,
    /// Upper bound from the dual iterate.
    pub dual_value: T,
    pub status: Status,
    /// Largest equality violation or inequality excess of `x`.
    pub primal_residual: T,
    /// `dual_value - value`.
    pub dual_gap: T,
    pub iterations: usize,
}

impl<T: Scalar> SdpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Solves with default options and the given stopping tolerance.
pub fn solve<T: Scalar>(p: &SdpProblem<T>, tol: T) -> Result<SdpSolution<T>> {
    solve_with(
        p,
        SolverOptions {
            tol: tol.to_f64_lossy(),
            ..Default::default()
        },
    )
}

struct Lowered<T> {
    real: RealProblem<T>,
    complex: bool,
    user_blocks: usize,
}

fn lower_op<T: Scalar>(h: &SparseHermitian<T>, blocks: &[usize], complex: bool, scale: T) -> SparseSym<T> {
    let mut s = SparseSym::default();
    for e in &h.entries {
        let (re, im) = (e.value.re * scale, e.value.im * scale);
        let (r, c, b) = (e.row, e.col, e.block);
        if !complex {
            s.push_sym(b, r, c, re);
            continue;
        }
        let n = blocks[b];
        if !re.is_zero() {
            s.push_sym(b, r, c, re);
            s.push_sym(b, r + n, c + n, re);
        }
        if r != c && !im.is_zero() {
            s.push_sym(b, r, c + n, -im);
            s.push_sym(b, r + n, c, im);
        }
    }
    s
}

fn lower<T: Scalar>(p: &SdpProblem<T>) -> Lowered<T> {
    let complex = !p.is_real();
    let half = if complex { T::lit(0.5) } else { T::one() };
    let mut blocks: Vec<usize> = p.blocks.iter().map(|&n| if complex { 2 * n } else { n }).collect();
    let c = lower_op(&p.objective, &p.blocks, complex, -half);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (op, rhs) in &p.equalities {
        a.push(lower_op(op, &p.blocks, complex, half));
        b.push(*rhs);
    }
    for (op, dir, rhs) in &p.inequalities {
        let mut row = lower_op(op, &p.blocks, complex, half);
        let slack = blocks.len();
        blocks.push(1);
        let sign = if *dir == Direction::Le { T::one() } else { -T::one() };
        row.push_sym(slack, 0, 0, sign);
        a.push(row);
        b.push(*rhs);
    }
    Lowered {
        real: RealProblem { blocks, c, a, b },
        complex,
        user_blocks: p.blocks.len(),
    }
}

/// Drops equality rows that are linear combinations of earlier ones. Returns
/// `None` when a dependent row contradicts the others.
fn independent_rows<T: Scalar>(p: &RealProblem<T>) -> Option<Vec<usize>> {
    let mut offsets = Vec::with_capacity(p.blocks.len());
    let mut total = 0;
    for &n in &p.blocks {
        offsets.push(total);
        total += n * (n + 1) / 2;
    }
    let coord = |b: usize, r: usize, c: usize| {
        let (i, j) = if r <= c { (r, c) } else { (c, r) };
        let n = p.blocks[b];
        offsets[b] + i * n - i * (i + 1) / 2 + j
    };
    let mut basis: Vec<(Vec<T>, T)> = Vec::new();
    let mut keep = Vec::new();
    for (k, (row, &rhs)) in p.a.iter().zip(&p.b).enumerate() {
        let mut v = vec![T::zero(); total];
        for e in &row.entries {
            let i = coord(e.block, e.row, e.col);
            v[i] = v[i] + e.value;
        }
        let norm0 = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        let mut beta = rhs;
        for _ in 0..2 {
            for (q, qb) in &basis {
                let d = q.iter().zip(&v).fold(T::zero(), |s, (&a, &b)| s + a * b);
                if d.is_zero() {
                    continue;
                }
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi = *vi - d * qi;
                }
                beta = beta - d * *qb;
            }
        }
        let norm = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if norm <= T::lit(1e-10) * norm0.max(T::one()) {
            if beta.abs() > T::lit(1e-8) * T::one().max(rhs.abs()) {
                return None;
            }
            continue;
        }
        for vi in &mut v {
            *vi = *vi / norm;
        }
        basis.push((v, beta / norm));
        keep.push(k);
    }
    Some(keep)
}

fn lift<T: Scalar>(x: &Dense<T>, complex: bool) -> HermitianMatrix<T> {
    if !complex {
        let m = Matrix::from_fn(x.n, x.n, |i, j| C::new(x.at(i, j), T::zero()));
        return HermitianMatrix::hermitize(m);
    }
    let n = x.n / 2;
    let half = T::lit(0.5);
    let m = Matrix::from_fn(n, n, |r, c| {
        C::new(
            (x.at(r, c) + x.at(r + n, c + n)) * half,
            (x.at(r + n, c) - x.at(r, c + n)) * half,
        )
    });
    HermitianMatrix::hermitize(m)
}

fn residual<T: Scalar>(p: &SdpProblem<T>, x: &[HermitianMatrix<T>]) -> T {
    let mut r = T::zero();
    for (a, b) in &p.equalities {
        r = r.max((a.trace_with(x) - *b).abs());
    }
    for (a, d, b) in &p.inequalities {
        let v = a.trace_with(x);
        let excess = match d {
            Direction::Le => v - *b,
            Direction::Ge => *b - v,
        };
        r = r.max(excess);
    }
    r
}

pub fn solve_with<T: Scalar>(p: &SdpProblem<T>, opts: SolverOptions) -> Result<SdpSolution<T>> {
    p.validate()?;
    if !(opts.tol > 0.0) || opts.max_iterations == 0 {
        return Err(Error::OutOfRange {
            name: "tol/max_iterations",
            value: opts.tol,
            range: "tol > 0, max_iterations >= 1".into(),
        });
    }
    let lowered = lower(p);
    let zero_x: Vec<HermitianMatrix<T>> = p.blocks.iter().map(|&n| HermitianMatrix::zeros(n)).collect();
    let Some(keep) = independent_rows(&lowered.real) else {
        let primal_residual = residual(p, &zero_x);
        return Ok(SdpSolution {
            x: zero_x,
            value: T::nan(),
            dual_value: T::infinity(),
            status: Status::Infeasible,
            primal_residual,
            dual_gap: T::infinity(),
            iterations: 0,
        });
    };
    let mut real = lowered.real;
    real.a = keep.iter().map(|&k| real.a[k].clone()).collect();
    real.b = keep.iter().map(|&k| real.b[k]).collect();

    let raw = ipm::solve_real(&real, T::lit(opts.tol), opts.max_iterations);
    let status = match raw.status {
        RawStatus::Optimal => Status::Optimal,
        RawStatus::Infeasible => Status::Infeasible,
        RawStatus::MaxIter => Status::MaxIter,
        RawStatus::Unbounded => return Err(Error::Solver("objective is unbounded".into())),
    };
    let x: Vec<HermitianMatrix<T>> = raw.x[..lowered.user_blocks]
        .iter()
        .map(|b| lift(b, lowered.complex))
        .collect();
    let value = p.objective.trace_with(&x);
    let dual_value = -raw.dobj;
    Ok(SdpSolution {
        primal_residual: residual(p, &x),
        dual_gap: dual_value - value,
        value,
        dual_value,
        status,
        x,
        iterations: raw.iterations,
    })
}
