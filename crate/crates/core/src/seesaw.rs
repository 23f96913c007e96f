//! See-saw maximization of the CHSH winning probability over local two-outcome
//! measurements for a fixed bipartite state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::eig::positive_part;
use crate::ensembles::{ensemble_density, BipartiteEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, HermitianMatrix, Matrix};
use crate::quantum::{partial_trace_matrix, tensor_product, Party, Povm};
use crate::scalar::{Scalar, C};
use crate::sdp::{solve, SdpProblem};

/// Eigenvalues this close to zero count as positive in a best response.
const TIE_CUTOFF: f64 = 1e-12;

/// Mixed state the CHSH game is played on, with its local dimensions.
#[derive(Debug, Clone)]
pub struct ChshTarget<T> {
    rho: HermitianMatrix<T>,
    dims: (usize, usize),
}

impl<T: Scalar> ChshTarget<T> {
    pub fn new(rho: HermitianMatrix<T>, d_a: usize, d_b: usize) -> Result<Self> {
        if rho.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "state of dim {} on {d_a}x{d_b}",
                rho.dim()
            )));
        }
        Ok(Self { rho, dims: (d_a, d_b) })
    }

    /// `Σ_z p_z ρ_z` for mixed preparations.
    pub fn from_mixture(states: &[HermitianMatrix<T>], priors: &[T], d_a: usize, d_b: usize) -> Result<Self> {
        crate::ensembles::check_priors(priors)?;
        if states.len() != priors.len() || states.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} states with {} priors",
                states.len(),
                priors.len()
            )));
        }
        let mut rho = HermitianMatrix::zeros(d_a * d_b);
        for (s, &p) in states.iter().zip(priors) {
            if s.dim() != d_a * d_b {
                return Err(Error::DimensionMismatch(format!("state of dim {} on {d_a}x{d_b}", s.dim())));
            }
            rho = &rho + &s.scale(p);
        }
        Self::new(rho, d_a, d_b)
    }

    pub fn rho(&self) -> &HermitianMatrix<T> {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

impl<T: Scalar> From<&BipartiteEnsemble<T>> for ChshTarget<T> {
    fn from(e: &BipartiteEnsemble<T>) -> Self {
        let (d_a, d_b) = e.dims();
        Self {
            rho: ensemble_density(e),
            dims: (d_a, d_b),
        }
    }
}

/// Two-outcome measurements for both settings of both parties.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssignment<T> {
    pub alice: [Povm<T>; 2],
    pub bob: [Povm<T>; 2],
}

impl<T: Scalar> MeasurementAssignment<T> {
    pub fn new(alice: [Povm<T>; 2], bob: [Povm<T>; 2]) -> Result<Self> {
        for p in alice.iter().chain(bob.iter()) {
            if p.len() != 2 {
                return Err(Error::InvalidPovm(format!("CHSH needs two outcomes, got {}", p.len())));
            }
        }
        if alice[0].dim() != alice[1].dim() || bob[0].dim() != bob[1].dim() {
            return Err(Error::DimensionMismatch("settings of one party differ in dimension".into()));
        }
        Ok(Self { alice, bob })
    }

    pub fn side(&self, party: Party) -> &[Povm<T>; 2] {
        match party {
            Party::A => &self.alice,
            Party::B => &self.bob,
        }
    }

    fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.alice[0].dim() != dims.0 || self.bob[0].dim() != dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "measurements on {}x{} for a {}x{} state",
                self.alice[0].dim(),
                self.bob[0].dim(),
                dims.0,
                dims.1
            )));
        }
        Ok(())
    }
}

fn wins(a: usize, b: usize, x: usize, y: usize) -> bool {
    (a ^ b) == (x & y)
}

/// `¼ Σ Tr[ρ(A_{a|x} ⊗ B_{b|y})]` over the winning tuples `a ⊕ b = x·y`.
pub fn chsh_value<T: Scalar>(target: &ChshTarget<T>, m: &MeasurementAssignment<T>) -> Result<T> {
    m.check_dims(target.dims)?;
    let mut total = T::zero();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    if wins(a, b, x, y) {
                        let op = tensor_product(&m.alice[x].elements()[a], &m.bob[y].elements()[b]);
                        total = total + target.rho.dot(&op)?;
                    }
                }
            }
        }
    }
    Ok(total / T::lit(4.0))
}

/// Response operators `K_{o|s}` of the free side: the objective equals
/// `Σ_{s,o} Tr[K_{o|s} M_{o|s}]` for the free side's measurements `M`.
pub fn response_operators<T: Scalar>(
    target: &ChshTarget<T>,
    fixed_side: Party,
    m: &MeasurementAssignment<T>,
) -> Result<[[HermitianMatrix<T>; 2]; 2]> {
    m.check_dims(target.dims)?;
    let (d_a, d_b) = target.dims;
    let rho = target.rho.as_matrix();
    // marginal[s][o] = Tr_fixed[(F_{o|s} on the fixed side) ρ]
    let marginal = |s: usize, o: usize| -> Result<HermitianMatrix<T>> {
        let f = &m.side(fixed_side)[s].elements()[o];
        let lifted = match fixed_side {
            Party::A => tensor_product(f, &HermitianMatrix::identity(d_b)),
            Party::B => tensor_product(&HermitianMatrix::identity(d_a), f),
        };
        let prod = lifted.as_matrix().matmul(rho)?;
        Ok(HermitianMatrix::hermitize(partial_trace_matrix(&prod, d_a, d_b, fixed_side)?))
    };
    let margs = [[marginal(0, 0)?, marginal(0, 1)?], [marginal(1, 0)?, marginal(1, 1)?]];
    let free_dim = margs[0][0].dim();
    let quarter = T::lit(0.25);
    let k = std::array::from_fn(|s| {
        std::array::from_fn(|o| {
            let mut acc = HermitianMatrix::zeros(free_dim);
            for (fs, row) in margs.iter().enumerate() {
                for (fo, mg) in row.iter().enumerate() {
                    if wins(o, fo, s, fs) {
                        acc = &acc + mg;
                    }
                }
            }
            acc.scale(quarter)
        })
    });
    Ok(k)
}

/// Optimal measurements of the side opposite to `fixed_side`, computed from the
/// positive part of `K_{0|s} - K_{1|s}`.
pub fn best_response<T: Scalar>(
    target: &ChshTarget<T>,
    fixed_side: Party,
    m: &MeasurementAssignment<T>,
) -> Result<MeasurementAssignment<T>> {
    best_response_with(target, fixed_side, m, HalfStep::Spectral)
}

/// How a single best-response half-step is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalfStep {
    /// Positive-part projector of `K_0 - K_1`.
    #[default]
    Spectral,
    /// `max Tr[K_0 E_0] + Tr[K_1 E_1]` over `E_0 + E_1 = 1` with the SDP solver.
    Sdp,
    /// Restricted to projective pairs with `rank E_0 = d/2`, i.e. traceless
    /// observables `E_0 - E_1`: the span of the top `d/2` eigenvectors of
    /// `K_0 - K_1`. Needs even local dimension.
    Balanced,
}

pub fn best_response_with<T: Scalar>(
    target: &ChshTarget<T>,
    fixed_side: Party,
    m: &MeasurementAssignment<T>,
    method: HalfStep,
) -> Result<MeasurementAssignment<T>> {
    let k = response_operators(target, fixed_side, m)?;
    let mut fresh = Vec::with_capacity(2);
    for ks in &k {
        let effect = match method {
            HalfStep::Spectral => positive_part(&(&ks[0] - &ks[1]), T::lit(TIE_CUTOFF))?.0,
            HalfStep::Sdp => sdp_effect(ks)?,
            HalfStep::Balanced => balanced_effect(&(&ks[0] - &ks[1]))?,
        };
        fresh.push(Povm::binary(effect)?);
    }
    let fresh: [Povm<T>; 2] = fresh.try_into().expect("two settings");
    match fixed_side {
        Party::A => MeasurementAssignment::new(m.alice.clone(), fresh),
        Party::B => MeasurementAssignment::new(fresh, m.bob.clone()),
    }
}

fn balanced_effect<T: Scalar>(diff: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let d = diff.dim();
    if d % 2 != 0 {
        return Err(Error::Unsupported(format!("balanced measurements need even dimension, got {d}")));
    }
    let e = diff.eig()?;
    let mut proj = HermitianMatrix::zeros(d);
    for k in 0..d / 2 {
        proj = &proj + &HermitianMatrix::projector(&e.vector(k));
    }
    Ok(proj)
}

fn sdp_effect<T: Scalar>(ks: &[HermitianMatrix<T>; 2]) -> Result<HermitianMatrix<T>> {
    let d = ks[0].dim();
    let mut p = SdpProblem::new(vec![d, d]);
    let c = p.objective_mut();
    c.add_dense(0, &ks[0], T::one());
    c.add_dense(1, &ks[1], T::one());
    p.add_block_sum_equality(&[(0, T::one()), (1, T::one())], &HermitianMatrix::identity(d), false);
    let s = solve(&p, T::lit(1e-10))?;
    if !s.is_optimal() {
        return Err(Error::Solver(format!("best response: solver stopped with status {}", s.status)));
    }
    // clamp the spectrum into [0, 1] so the pair is an exact POVM
    let mut e = s.x[0].eig()?;
    for v in &mut e.values {
        *v = v.max(T::zero()).min(T::one());
    }
    Ok(HermitianMatrix::hermitize(e.reconstruct()))
}

/// Haar-random orthonormal basis with its vectors dealt round-robin to the
/// outcomes. With two outcomes the first projector has rank `max(1, ⌊dim/2⌋)`.
pub fn random_measurement<T: Scalar, R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm<T>> {
    if outcomes < 2 {
        return Err(Error::OutOfRange {
            name: "outcomes",
            value: outcomes as f64,
            range: ">= 2".into(),
        });
    }
    if dim == 0 {
        return Err(Error::OutOfRange {
            name: "dim",
            value: 0.0,
            range: ">= 1".into(),
        });
    }
    let seed: Vec<Vec<C<T>>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C::new(T::lit(re), T::lit(im))
                })
                .collect()
        })
        .collect();
    let basis = complete_basis(&seed, dim);
    let owner = |k: usize| -> usize {
        if outcomes == 2 {
            usize::from(k >= (dim / 2).max(1))
        } else {
            k % outcomes
        }
    };
    let mut elements: Vec<Matrix<T>> = vec![Matrix::zeros(dim, dim); outcomes];
    for (k, v) in basis.iter().enumerate() {
        let e = &mut elements[owner(k)];
        for i in 0..dim {
            for j in 0..dim {
                e[(i, j)] = e[(i, j)] + v[i] * v[j].conj();
            }
        }
    }
    Povm::indexed(elements.into_iter().map(HermitianMatrix::hermitize).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub rng_seed: u64,
    pub half_step: HalfStep,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 500,
            convergence_tol: 1e-9,
            rng_seed: 0,
            half_step: HalfStep::Spectral,
        }
    }
}

impl SeesawConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::OutOfRange {
                name: "restarts/max_iterations",
                value: 0.0,
                range: ">= 1".into(),
            });
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::OutOfRange {
                name: "convergence_tol",
                value: self.convergence_tol,
                range: "> 0".into(),
            });
        }
        Ok(())
    }
}

/// One restart: its full value trace and final assignment.
#[derive(Debug, Clone)]
pub struct RestartOutcome<T> {
    pub value: T,
    pub assignment: MeasurementAssignment<T>,
    pub trace: Vec<T>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SeesawResult<T> {
    pub best_value: T,
    pub best_assignment: MeasurementAssignment<T>,
    /// Trace of the restart that produced `best_value`.
    pub trace: Vec<T>,
    pub converged: bool,
    pub restarts: Vec<RestartOutcome<T>>,
}

/// Generator for restart `k`: the master seed with stream `k`, so adding
/// restarts leaves earlier ones unchanged.
pub fn restart_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn one_restart<T: Scalar>(target: &ChshTarget<T>, cfg: &SeesawConfig, k: usize) -> Result<RestartOutcome<T>> {
    let (d_a, d_b) = target.dims;
    let mut rng = restart_rng(cfg.rng_seed, k);
    let alice = [random_measurement(d_a, 2, &mut rng)?, random_measurement(d_a, 2, &mut rng)?];
    let bob = [random_measurement(d_b, 2, &mut rng)?, random_measurement(d_b, 2, &mut rng)?];
    let mut m = MeasurementAssignment::new(alice, bob)?;
    let tol = T::lit(cfg.convergence_tol);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut last = chsh_value(target, &m)?;
    for _ in 0..cfg.max_iterations {
        m = best_response_with(target, Party::A, &m, cfg.half_step)?;
        m = best_response_with(target, Party::B, &m, cfg.half_step)?;
        let value = chsh_value(target, &m)?;
        trace.push(value);
        let change = (value - last).abs();
        last = value;
        if change < tol && trace.len() > 1 {
            converged = true;
            break;
        }
    }
    Ok(RestartOutcome {
        value: last,
        assignment: m,
        trace,
        converged,
    })
}

/// Runs `cfg.restarts` independent see-saw ascents in parallel and keeps the
/// best (lowest restart index on ties).
pub fn seesaw_run<T: Scalar>(target: &ChshTarget<T>, cfg: &SeesawConfig) -> Result<SeesawResult<T>> {
    cfg.validate()?;
    let restarts: Vec<RestartOutcome<T>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| one_restart(target, cfg, k))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, r) in restarts.iter().enumerate() {
        if r.value > restarts[best].value {
            best = k;
        }
    }
    let b = &restarts[best];
    Ok(SeesawResult {
        best_value: b.value,
        best_assignment: b.assignment.clone(),
        trace: b.trace.clone(),
        converged: b.converged,
        restarts,
    })
}
