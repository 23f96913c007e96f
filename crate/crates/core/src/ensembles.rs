//! State families: the two-state Bell-symmetric pair, generalized maximally
//! entangled bases, axisymmetric ensembles and their noisy versions.

use num_traits::Zero;

use crate::error::{check_range, Error, Result};
use crate::linalg::{complete_basis, HermitianMatrix, Matrix};
use crate::quantum::{bell_states, partial_trace, Party, PureState};
use crate::scalar::{cis, cr, Scalar, C};

/// Pure bipartite preparations with their priors.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteEnsemble<T> {
    states: Vec<PureState<T>>,
    priors: Vec<T>,
    dims: (usize, usize),
    /// Maximally entangled state the family is built around, when there is one.
    anchor: Option<PureState<T>>,
}

impl<T: Scalar> BipartiteEnsemble<T> {
    pub fn new(states: Vec<PureState<T>>, priors: Vec<T>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidPriors("empty ensemble".into()));
        };
        let dims = first.dims();
        if states.iter().any(|s| s.dims() != dims) {
            return Err(Error::DimensionMismatch(
                "ensemble states with different local dimensions".into(),
            ));
        }
        if priors.len() != states.len() {
            return Err(Error::InvalidPriors(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        check_priors(&priors)?;
        Ok(Self {
            states,
            priors,
            dims,
            anchor: None,
        })
    }

    pub fn equiprobable(states: Vec<PureState<T>>) -> Result<Self> {
        let n = T::from_usize(states.len()).unwrap();
        let priors = vec![T::one() / n; states.len()];
        Self::new(states, priors)
    }

    pub fn with_anchor(mut self, anchor: PureState<T>) -> Result<Self> {
        if anchor.dims() != self.dims {
            return Err(Error::DimensionMismatch("anchor state dimensions".into()));
        }
        self.anchor = Some(anchor);
        Ok(self)
    }

    pub fn states(&self) -> &[PureState<T>] {
        &self.states
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn anchor(&self) -> Option<&PureState<T>> {
        self.anchor.as_ref()
    }

    /// `G[z][z'] = ⟨ψ_z|ψ_z'⟩`.
    pub fn overlap_matrix(&self) -> Matrix<T> {
        let n = self.len();
        Matrix::from_fn(n, n, |i, j| {
            self.states[i].overlap(&self.states[j]).expect("shared dimensions")
        })
    }
}

pub(crate) fn check_priors<T: Scalar>(priors: &[T]) -> Result<()> {
    if priors.iter().any(|&p| !(p >= T::zero()) || !p.is_finite()) {
        return Err(Error::InvalidPriors("negative or non-finite prior".into()));
    }
    let total: T = priors.iter().copied().sum();
    if !((total - T::one()).abs() <= T::lit(T::TOL.invariant)) {
        return Err(Error::InvalidPriors(format!(
            "priors sum to {}",
            total.to_f64_lossy()
        )));
    }
    Ok(())
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    check_range("delta", delta.to_f64_lossy(), 0.0, 1.0, 0.0)
}

/// `|ψ_z⟩ = √((1+δ)/2)|φ⁺⟩ + (-1)^z √((1-δ)/2)|φ⁻⟩`, equal priors.
pub fn two_state_family<T: Scalar>(delta: T) -> Result<BipartiteEnsemble<T>> {
    check_delta(delta)?;
    let two = T::lit(2.0);
    let a = ((T::one() + delta) / two).sqrt();
    let b = ((T::one() - delta) / two).sqrt();
    let [phi_p, phi_m, _, _] = bell_states::<T>();
    let states = [T::one(), -T::one()]
        .iter()
        .map(|&sign| {
            let amps = phi_p
                .amplitudes()
                .iter()
                .zip(phi_m.amplitudes())
                .map(|(&p, &m)| p.scale(a) + m.scale(sign * b))
                .collect();
            PureState::normalized(amps, 2, 2)
        })
        .collect::<Result<Vec<_>>>()?;
    BipartiteEnsemble::equiprobable(states)?.with_anchor(phi_p)
}

/// `|ξ_n⟩ = N^{-1/2} Σ_j e^{i2πjn/N} |j⟩⊗|j⟩`.
pub fn gme_basis<T: Scalar>(n_states: usize, n: usize) -> Result<PureState<T>> {
    if n_states == 0 || n >= n_states {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: format!("[0, {})", n_states),
        });
    }
    let big_n = T::from_usize(n_states).unwrap();
    let norm = T::one() / big_n.sqrt();
    let mut amps = vec![C::zero(); n_states * n_states];
    for j in 0..n_states {
        let phase = T::TAU() * T::from_usize(j * n % n_states).unwrap() / big_n;
        amps[j * n_states + j] = cis(phase).scale(norm);
    }
    PureState::new(amps, n_states, n_states)
}

/// Coefficients of the equal-overlap family in an orthonormal frame `{e_0, …, e_{N-1}}`:
/// `c_{z,0} = √((1+(N-1)δ)/N)`, `c_{z,j} = √((1-δ)/N) e^{i2πjz/N}`.
fn axisymmetric_coefficients<T: Scalar>(n: usize, delta: T) -> Vec<Vec<C<T>>> {
    let big_n = T::from_usize(n).unwrap();
    let lead = ((T::one() + (big_n - T::one()) * delta) / big_n).sqrt();
    let tail = ((T::one() - delta) / big_n).sqrt();
    (0..n)
        .map(|z| {
            (0..n)
                .map(|j| {
                    if j == 0 {
                        cr(lead)
                    } else {
                        let phase = T::TAU() * T::from_usize(j * z % n).unwrap() / big_n;
                        cis(phase).scale(tail)
                    }
                })
                .collect()
        })
        .collect()
}

fn combine<T: Scalar>(frame: &[PureState<T>], coeffs: &[C<T>]) -> Result<PureState<T>> {
    let (da, db) = frame[0].dims();
    let mut amps = vec![C::zero(); da * db];
    for (state, &c) in frame.iter().zip(coeffs) {
        for (a, &s) in amps.iter_mut().zip(state.amplitudes()) {
            *a = *a + s * c;
        }
    }
    PureState::normalized(amps, da, db)
}

/// N states in `C^N ⊗ C^N`, pairwise overlap δ, all equally close to `|ξ_0⟩`.
pub fn axisymmetric_family<T: Scalar>(n: usize, delta: T) -> Result<BipartiteEnsemble<T>> {
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "N >= 2".into(),
        });
    }
    check_delta(delta)?;
    let frame = (0..n).map(|k| gme_basis(n, k)).collect::<Result<Vec<_>>>()?;
    let states = axisymmetric_coefficients(n, delta)
        .iter()
        .map(|c| combine(&frame, c))
        .collect::<Result<Vec<_>>>()?;
    BipartiteEnsemble::equiprobable(states)?.with_anchor(frame[0].clone())
}

/// The same equal-overlap construction with the Bell basis `φ⁺, φ⁻, ψ⁺, ψ⁻` as
/// frame, so that `N ∈ {2, 3, 4}` preparations live on two qubits. The ensemble
/// is Bell diagonal with the extremal spectrum for its overlap.
pub fn axisymmetric_qubit_family<T: Scalar>(n: usize, delta: T) -> Result<BipartiteEnsemble<T>> {
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!(
            "{n} preparations do not fit a two-qubit Bell frame"
        )));
    }
    check_delta(delta)?;
    let frame = bell_states::<T>();
    let states = axisymmetric_coefficients(n, delta)
        .iter()
        .map(|c| combine(&frame[..n], c))
        .collect::<Result<Vec<_>>>()?;
    BipartiteEnsemble::equiprobable(states)?.with_anchor(frame[0].clone())
}

/// Reduced state of preparation `z` held by `party`.
pub fn reduced_state<T: Scalar>(
    e: &BipartiteEnsemble<T>,
    z: usize,
    party: Party,
) -> Result<HermitianMatrix<T>> {
    let state = e.states.get(z).ok_or(Error::OutOfRange {
        name: "z",
        value: z as f64,
        range: format!("[0, {})", e.len()),
    })?;
    let (da, db) = e.dims;
    partial_trace(&state.projector(), da, db, party.other())
}

/// `ρ = Σ_z p_z |ψ_z⟩⟨ψ_z|`.
pub fn ensemble_density<T: Scalar>(e: &BipartiteEnsemble<T>) -> HermitianMatrix<T> {
    let d = e.dims.0 * e.dims.1;
    e.states
        .iter()
        .zip(&e.priors)
        .fold(HermitianMatrix::zeros(d), |acc, (s, &p)| {
            &acc + &s.projector().scale(p)
        })
}

/// Applies the unitary taking the ensemble's anchor to `vac`; the completion
/// is Gram–Schmidt over the standard basis on both sides.
pub fn rotate_to_vacuum<T: Scalar>(
    e: &BipartiteEnsemble<T>,
    vac: &PureState<T>,
) -> Result<BipartiteEnsemble<T>> {
    if vac.dims() != e.dims {
        return Err(Error::DimensionMismatch(
            "vacuum must live in the ensemble's Hilbert space".into(),
        ));
    }
    let anchor = e
        .anchor
        .as_ref()
        .ok_or_else(|| Error::Unsupported("ensemble has no anchor state to rotate".into()))?;
    let u = unitary_mapping(anchor, vac);
    let states = e
        .states
        .iter()
        .map(|s| s.transform(&u))
        .collect::<Result<Vec<_>>>()?;
    BipartiteEnsemble::new(states, e.priors.clone())?.with_anchor(vac.clone())
}

/// Deterministic unitary with `U|from⟩ = |to⟩`.
pub fn unitary_mapping<T: Scalar>(from: &PureState<T>, to: &PureState<T>) -> Matrix<T> {
    let d = from.dim();
    let src = complete_basis(&[from.amplitudes().to_vec()], d);
    let dst = complete_basis(&[to.amplitudes().to_vec()], d);
    let src = Matrix::from_columns(&src);
    let dst = Matrix::from_columns(&dst);
    dst.matmul(&src.adjoint()).expect("square bases")
}

/// Preparations mixed with white noise: `ν|ψ_z⟩⟨ψ_z| + (1-ν) 1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyEnsemble<T> {
    pub base: BipartiteEnsemble<T>,
    pub visibility: T,
}

impl<T: Scalar> NoisyEnsemble<T> {
    pub fn new(base: BipartiteEnsemble<T>, visibility: T) -> Result<Self> {
        check_range("nu", visibility.to_f64_lossy(), 0.0, 1.0, 0.0)?;
        Ok(Self { base, visibility })
    }

    pub fn preparations(&self) -> Vec<HermitianMatrix<T>> {
        let (da, db) = self.base.dims;
        let d = da * db;
        let noise = HermitianMatrix::identity(d).scale((T::one() - self.visibility) / T::from_usize(d).unwrap());
        self.base
            .states
            .iter()
            .map(|s| &s.projector().scale(self.visibility) + &noise)
            .collect()
    }
}

/// The two noisy preparations built on [`two_state_family`].
pub fn noisy_family<T: Scalar>(delta: T, nu: T) -> Result<Vec<HermitianMatrix<T>>> {
    Ok(NoisyEnsemble::new(two_state_family(delta)?, nu)?.preparations())
}
