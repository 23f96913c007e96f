//! Upper bounds on local discrimination with an inconclusive outcome (a
//! level-one Gram-matrix relaxation) and the exact global POVM optimum.
//!
//! Both programs have real data. Any feasible complex Gram matrix `G` can be
//! replaced by `Re G`, which satisfies the same constraints with the same
//! objective, so the relaxation is solved over real symmetric matrices.

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::linalg::{HermitianMatrix, Matrix};
use crate::quantum::{validate_povm, Outcome, Povm, PureState};
use crate::scalar::{Scalar, C};
use crate::sdp::{solve_with, Direction, SdpProblem, SdpSolution, SolverOptions, SparseHermitian, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Monomial {
    /// `|ψ_z⟩`
    State(usize),
    /// `(A_{a|x*} ⊗ 1)|ψ_z⟩`; `a = None` is the inconclusive outcome.
    Alice(Option<usize>, usize),
    /// `(1 ⊗ B_{b|y*})|ψ_z⟩`
    Bob(Option<usize>, usize),
}

/// `{ψ_z} ∪ {A_a ψ_z} ∪ {B_b ψ_z}` with `a, b ∈ {0..N-1, ∅}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    entries: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn new(n: usize) -> Self {
        let mut entries: Vec<Monomial> = (0..n).map(Monomial::State).collect();
        let outcomes = || (0..n).map(Some).chain(std::iter::once(None));
        for z in 0..n {
            entries.extend(outcomes().map(|a| Monomial::Alice(a, z)));
        }
        for z in 0..n {
            entries.extend(outcomes().map(|b| Monomial::Bob(b, z)));
        }
        Self { n, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Monomial] {
        &self.entries
    }

    pub fn index(&self, m: Monomial) -> usize {
        let n = self.n;
        let out = |o: Option<usize>| o.unwrap_or(n);
        match m {
            Monomial::State(z) => z,
            Monomial::Alice(a, z) => n + z * (n + 1) + out(a),
            Monomial::Bob(b, z) => n + n * (n + 1) + z * (n + 1) + out(b),
        }
    }

    fn outcomes(&self) -> impl Iterator<Item = Option<usize>> + Clone {
        (0..self.n).map(Some).chain(std::iter::once(None))
    }
}

/// Linear functional `Σ coef · G[u][v]` over a real symmetric Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramForm<T> {
    pub terms: Vec<(usize, usize, T)>,
}

impl<T: Scalar> GramForm<T> {
    fn new() -> Self {
        Self { terms: Vec::new() }
    }

    fn with(mut self, u: usize, v: usize, coef: T) -> Self {
        self.terms.push((u, v, coef));
        self
    }

    pub fn evaluate(&self, g: &Matrix<T>) -> T {
        self.terms.iter().fold(T::zero(), |s, &(u, v, c)| s + c * g[(u, v)].re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramConstraint<T> {
    pub form: GramForm<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// Constraint families beyond positivity, completeness, hermiticity and
/// commutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    /// Projective measurements: `⟨A_a ψ|A_{a'} ψ'⟩ = δ_{aa'} ⟨ψ|A_a ψ'⟩` (and for `B`).
    pub projective: bool,
    /// POVM inequalities `p(a,b|z) ≥ 0` and `⟨A_a ψ|A_a ψ⟩ ≤ ⟨ψ|A_a ψ⟩` (and for
    /// `B`). Without them the relaxation is unbounded: `A_0ψ = -A_1ψ` can grow
    /// along a direction that every equality ignores.
    pub strengthen: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            projective: false,
            strengthen: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramModel<T> {
    pub basis: MonomialBasis,
    pub constraints: Vec<GramConstraint<T>>,
    /// `p_s^L = (1/N) Σ_z G[A_z ψ_z][B_z ψ_z]`.
    pub objective: GramForm<T>,
    /// `p_∅^L = (1/N) Σ_z G[A_∅ ψ_z][B_∅ ψ_z]`.
    pub inconclusive: GramForm<T>,
}

fn check_inputs<T: Scalar>(n: usize, delta: T, p_inc: T) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "N >= 2".into(),
        });
    }
    check_range("delta", delta.to_f64_lossy(), 0.0, 1.0, 0.0)?;
    check_range("p_inc", p_inc.to_f64_lossy(), 0.0, 1.0, 0.0)
}

pub fn build_gram_model<T: Scalar>(n: usize, delta: T, p_inc: T) -> Result<GramModel<T>> {
    build_gram_model_with(n, delta, p_inc, ModelOptions::default())
}

pub fn build_gram_model_with<T: Scalar>(n: usize, delta: T, p_inc: T, opts: ModelOptions) -> Result<GramModel<T>> {
    check_inputs(n, delta, p_inc)?;
    let basis = MonomialBasis::new(n);
    let ix = |m: Monomial| basis.index(m);
    let one = T::one();
    let mut cons = Vec::new();
    let mut push = |form: GramForm<T>, relation: Relation, rhs: T| cons.push(GramConstraint { form, relation, rhs });

    type Side = fn(Option<usize>, usize) -> Monomial;
    let sides: [Side; 2] = [Monomial::Alice, Monomial::Bob];

    for z in 0..n {
        let pz = ix(Monomial::State(z));
        push(GramForm::new().with(pz, pz, one), Relation::Eq, one);
        for w in (z + 1)..n {
            push(GramForm::new().with(pz, ix(Monomial::State(w)), one), Relation::Ge, delta);
        }
    }
    // completeness: Σ_a G[u][S_a ψ_z] = G[u][ψ_z]
    for u in 0..basis.len() {
        for z in 0..n {
            for side in sides {
                let mut f = GramForm::new().with(u, ix(Monomial::State(z)), -one);
                for a in basis.outcomes() {
                    f = f.with(u, ix(side(a, z)), one);
                }
                push(f, Relation::Eq, T::zero());
            }
        }
    }
    for z in 0..n {
        for w in 0..n {
            let (pz, pw) = (ix(Monomial::State(z)), ix(Monomial::State(w)));
            for side in sides {
                // Hermitian operators: ⟨ψ_z|S_a ψ_w⟩ = ⟨S_a ψ_z|ψ_w⟩
                if z < w {
                    for a in basis.outcomes() {
                        let f = GramForm::new().with(pz, ix(side(a, w)), one).with(ix(side(a, z)), pw, -one);
                        push(f, Relation::Eq, T::zero());
                    }
                }
            }
            // commuting parties: ⟨A_a ψ_z|B_b ψ_w⟩ = ⟨B_b ψ_z|A_a ψ_w⟩
            if z < w {
                for a in basis.outcomes() {
                    for b in basis.outcomes() {
                        let f = GramForm::new()
                            .with(ix(Monomial::Alice(a, z)), ix(Monomial::Bob(b, w)), one)
                            .with(ix(Monomial::Bob(b, z)), ix(Monomial::Alice(a, w)), -one);
                        push(f, Relation::Eq, T::zero());
                    }
                }
            }
        }
    }
    if opts.projective {
        for z in 0..n {
            for w in z..n {
                for side in sides {
                    for a in basis.outcomes() {
                        for a2 in basis.outcomes() {
                            let mut f = GramForm::new().with(ix(side(a, z)), ix(side(a2, w)), one);
                            if a == a2 {
                                f = f.with(ix(Monomial::State(z)), ix(side(a, w)), -one);
                            }
                            push(f, Relation::Eq, T::zero());
                        }
                    }
                }
            }
        }
    }
    if opts.strengthen {
        for z in 0..n {
            for a in basis.outcomes() {
                for b in basis.outcomes() {
                    let f = GramForm::new().with(ix(Monomial::Alice(a, z)), ix(Monomial::Bob(b, z)), one);
                    push(f, Relation::Ge, T::zero());
                }
            }
            for side in sides {
                for a in basis.outcomes() {
                    let s = ix(side(a, z));
                    let f = GramForm::new().with(s, s, one).with(ix(Monomial::State(z)), s, -one);
                    push(f, Relation::Le, T::zero());
                }
            }
        }
    }

    let inv_n = one / T::from_usize(n).unwrap();
    let mut objective = GramForm::new();
    let mut inconclusive = GramForm::new();
    for z in 0..n {
        objective = objective.with(ix(Monomial::Alice(Some(z), z)), ix(Monomial::Bob(Some(z), z)), inv_n);
        inconclusive = inconclusive.with(ix(Monomial::Alice(None, z)), ix(Monomial::Bob(None, z)), inv_n);
    }
    cons.push(GramConstraint {
        form: inconclusive.clone(),
        relation: Relation::Ge,
        rhs: p_inc,
    });
    Ok(GramModel {
        basis,
        constraints: cons,
        objective,
        inconclusive,
    })
}

impl<T: Scalar> GramModel<T> {
    /// Lowers the model to an SDP over the Gram matrix `H` of the monomials
    /// without the inconclusive outcome. Completeness holds for every `u` iff
    /// `S_∅ ψ_z = ψ_z - Σ_{a<N} S_a ψ_z` in the span, so `G = V H Vᵀ` for the
    /// corresponding expansion `V`; completeness rows become identities and are
    /// dropped. Unlike `G`, `H` can be positive definite, which the
    /// interior-point solver needs.
    pub fn to_sdp(&self) -> Result<SdpProblem<T>> {
        let n = self.basis.n;
        let reduced: Vec<usize> = (0..self.basis.len())
            .filter(|&k| !matches!(self.basis.entries[k], Monomial::Alice(None, _) | Monomial::Bob(None, _)))
            .collect();
        let mut position = vec![usize::MAX; self.basis.len()];
        for (r, &k) in reduced.iter().enumerate() {
            position[k] = r;
        }
        let expand = |k: usize| -> Vec<(usize, T)> {
            match self.basis.entries[k] {
                Monomial::Alice(None, z) | Monomial::Bob(None, z) => {
                    let side: fn(Option<usize>, usize) -> Monomial =
                        if matches!(self.basis.entries[k], Monomial::Alice(..)) { Monomial::Alice } else { Monomial::Bob };
                    let mut v = vec![(position[self.basis.index(Monomial::State(z))], T::one())];
                    v.extend((0..n).map(|a| (position[self.basis.index(side(Some(a), z))], -T::one())));
                    v
                }
                _ => vec![(position[k], T::one())],
            }
        };
        let lower = |form: &GramForm<T>| -> SparseHermitian<T> {
            let mut acc: std::collections::BTreeMap<(usize, usize), T> = Default::default();
            for &(u, v, c) in &form.terms {
                for &(i, ci) in &expand(u) {
                    for &(j, cj) in &expand(v) {
                        let e = acc.entry((i.min(j), i.max(j))).or_insert_with(T::zero);
                        *e = *e + c * ci * cj;
                    }
                }
            }
            let mut s = SparseHermitian::new();
            for ((i, j), c) in acc {
                if c != T::zero() {
                    s.add_re_entry(0, i, j, c);
                }
            }
            s
        };
        let mut p = SdpProblem::new(vec![reduced.len()]);
        p.set_objective(lower(&self.objective));
        for c in &self.constraints {
            let a = lower(&c.form);
            if a.entries().is_empty() {
                if c.rhs != T::zero() {
                    return Err(Error::Solver("constraint reduces to 0 = nonzero".into()));
                }
                continue;
            }
            match c.relation {
                Relation::Eq => p.add_equality(a, c.rhs),
                Relation::Ge => p.add_inequality(a, Direction::Ge, c.rhs),
                Relation::Le => p.add_inequality(a, Direction::Le, c.rhs),
            };
        }
        Ok(p)
    }
}

/// Value and certificate data of one solved program.
#[derive(Debug, Clone)]
pub struct BoundResult<T> {
    pub value: T,
    pub status: Status,
    pub dual_gap: T,
    pub primal_residual: T,
}

fn certified<T: Scalar>(s: &SdpSolution<T>, what: &str) -> Result<BoundResult<T>> {
    if s.status != Status::Optimal {
        return Err(Error::Solver(format!("{what}: solver stopped with status {}", s.status)));
    }
    Ok(BoundResult {
        value: s.value,
        status: s.status,
        dual_gap: s.dual_gap,
        primal_residual: s.primal_residual,
    })
}

fn options(tol: f64) -> SolverOptions {
    SolverOptions {
        tol,
        ..Default::default()
    }
}

/// Relaxation bound on the local success probability.
pub fn solve_local_bound<T: Scalar>(n: usize, delta: T, p_inc: T, tol: T) -> Result<T> {
    solve_local_bound_with(n, delta, p_inc, tol, ModelOptions::default()).map(|r| r.value)
}

pub fn solve_local_bound_with<T: Scalar>(n: usize, delta: T, p_inc: T, tol: T, opts: ModelOptions) -> Result<BoundResult<T>> {
    let model = build_gram_model_with(n, delta, p_inc, opts)?;
    if delta >= T::one() {
        // identical states: the Gram feasible set has empty interior and the
        // optimum is guessing on the conclusive part
        return Ok(BoundResult {
            value: (T::one() - p_inc) / T::from(n).unwrap(),
            status: Status::Optimal,
            dual_gap: T::zero(),
            primal_residual: T::zero(),
        });
    }
    let s = solve_with(&model.to_sdp()?, options(tol.to_f64_lossy()))?;
    certified(&s, "local bound")
}

/// `N` unit vectors in `C^N` with pairwise inner products `δ`: the columns of
/// `√((1-δ)1 + δJ)`.
pub fn states_from_gram<T: Scalar>(n: usize, delta: T) -> Result<Vec<PureState<T>>> {
    check_inputs(n, delta, T::zero())?;
    let g = HermitianMatrix::from_real_fn(n, |i, j| if i == j { T::one() } else { delta })?;
    let e = g.eig()?;
    let root = Matrix::from_fn(n, n, |i, j| {
        (0..n).fold(C::new(T::zero(), T::zero()), |acc, k| {
            let lam = e.values[k].max(T::zero()).sqrt();
            acc + e.vectors[(i, k)] * e.vectors[(j, k)].conj() * C::new(lam, T::zero())
        })
    });
    (0..n)
        .map(|j| PureState::normalized(root.column(j), n, 1))
        .collect()
}

/// Global optimum with its measurement.
#[derive(Debug, Clone)]
pub struct GlobalBound<T> {
    pub result: BoundResult<T>,
    /// Elements `M_0..M_{N-1}, M_∅`, renormalized to exact completeness.
    pub povm: Povm<T>,
    pub states: Vec<PureState<T>>,
    /// Success and inconclusive rates recomputed from `povm` on `states`.
    pub p_success: T,
    pub p_inconclusive: T,
}

pub fn solve_global_bound<T: Scalar>(n: usize, delta: T, p_inc: T, tol: T) -> Result<T> {
    solve_global_bound_full(n, delta, p_inc, tol).map(|g| g.result.value)
}

/// Maximizes `(1/N) Σ_z ⟨ψ_z|M_z|ψ_z⟩` over `{M_0..M_{N-1}, M_∅}` with
/// `(1/N) Σ_z ⟨ψ_z|M_∅|ψ_z⟩ ≥ p_inc`.
pub fn solve_global_bound_full<T: Scalar>(n: usize, delta: T, p_inc: T, tol: T) -> Result<GlobalBound<T>> {
    check_inputs(n, delta, p_inc)?;
    let states = states_from_gram(n, delta)?;
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let mut p = SdpProblem::new(vec![n; n + 1]);
    let mut obj = SparseHermitian::new();
    for (z, s) in states.iter().enumerate() {
        obj.add_dense(z, &s.projector(), inv_n);
    }
    p.set_objective(obj);
    let terms: Vec<(usize, T)> = (0..=n).map(|k| (k, T::one())).collect();
    p.add_block_sum_equality(&terms, &HermitianMatrix::identity(n), true);
    let mut inc = SparseHermitian::new();
    for s in &states {
        inc.add_dense(n, &s.projector(), inv_n);
    }
    p.add_inequality(inc, Direction::Ge, p_inc);

    let sol = solve_with(&p, options(tol.to_f64_lossy()))?;
    let result = certified(&sol, "global bound")?;
    let povm = renormalize(&sol.x)?;
    let rate = |k: usize| -> Result<T> {
        let mut acc = T::zero();
        for (z, s) in states.iter().enumerate() {
            let m = &povm.elements()[if k == n { n } else { z }];
            acc = acc + m.expectation(s.amplitudes())?;
        }
        Ok(acc * inv_n)
    };
    let p_success = rate(0)?;
    let p_inconclusive = rate(n)?;
    Ok(GlobalBound {
        result,
        povm,
        states,
        p_success,
        p_inconclusive,
    })
}

/// `S^{-1/2} M_k S^{-1/2}` with `S = Σ M_k`, which restores exact completeness.
fn renormalize<T: Scalar>(blocks: &[HermitianMatrix<T>]) -> Result<Povm<T>> {
    let n = blocks[0].dim();
    let mut sum = HermitianMatrix::zeros(n);
    for b in blocks {
        sum = &sum + b;
    }
    let e = sum.eig()?;
    let inv_root = Matrix::from_fn(n, n, |i, j| {
        (0..n).fold(C::new(T::zero(), T::zero()), |acc, k| {
            let s = T::one() / e.values[k].sqrt();
            acc + e.vectors[(i, k)] * e.vectors[(j, k)].conj() * C::new(s, T::zero())
        })
    });
    let elements: Vec<HermitianMatrix<T>> = blocks
        .iter()
        .map(|b| b.conjugate_by(&inv_root))
        .collect::<Result<_>>()?;
    // interior-point iterates are strictly positive; clip round-off anyway
    let report = validate_povm(&elements)?;
    if !report.passes {
        return Err(Error::InvalidPovm(format!(
            "reconstructed measurement fails validation (residual {:e})",
            report.completeness_residual.to_f64_lossy()
        )));
    }
    let mut labels: Vec<Outcome> = (0..blocks.len() - 1).map(Outcome::Index).collect();
    labels.push(Outcome::Inconclusive);
    Povm::new(elements, labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow<T> {
    pub n: usize,
    pub delta: T,
    pub p_inc: T,
    pub local_bound: T,
    pub global_bound: T,
    pub solver_status: Status,
}

impl<T: Scalar> RegionRow<T> {
    pub const CSV_HEADER: &'static str = "N,delta,p_inc,local_bound,global_bound,solver_status";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{:.12},{:.12},{}",
            self.n,
            self.delta.to_f64_lossy(),
            self.p_inc.to_f64_lossy(),
            self.local_bound.to_f64_lossy(),
            self.global_bound.to_f64_lossy(),
            self.solver_status
        )
    }
}

/// Local and global bounds on every grid point (grid points run in parallel).
pub fn region_sweep<T: Scalar>(n: usize, delta: T, p_inc_grid: &[T], tol: T) -> Result<Vec<RegionRow<T>>> {
    for &q in p_inc_grid {
        check_inputs(n, delta, q)?;
    }
    p_inc_grid
        .par_iter()
        .map(|&q| {
            let local = solve_local_bound(n, delta, q, tol)?;
            let global = solve_global_bound(n, delta, q, tol)?;
            Ok(RegionRow {
                n,
                delta,
                p_inc: q,
                local_bound: local,
                global_bound: global,
                solver_status: Status::Optimal,
            })
        })
        .collect()
}
