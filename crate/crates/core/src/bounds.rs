//! Closed-form bounds relating local discrimination to CHSH violation,
//! maximally entangled fidelity, global energy and noise thresholds.
//!
//! Every function rejects inputs outside its domain instead of clamping them.
//! Domain checks allow a slack of [`Tolerances::invariant`](crate::Tolerances)
//! so that values produced by other bounds (e.g. `ps_n(N, 1) = 1/N` up to
//! rounding) compose.

use crate::error::{check_range, Error, Result};
use crate::linalg::HermitianMatrix;
use crate::quantum::pauli;
use crate::scalar::Scalar;

fn slack<T: Scalar>() -> f64 {
    T::TOL.invariant
}

fn delta_ok<T: Scalar>(delta: T) -> Result<()> {
    check_range("delta", delta.to_f64_lossy(), 0.0, 1.0, 0.0)
}

fn n_ok(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "N >= 2".into(),
        })
    } else {
        Ok(())
    }
}

fn nf<T: Scalar>(n: usize) -> T {
    T::from_usize(n).unwrap()
}

/// CHSH operator value together with the equivalent winning probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshBoundResult<T> {
    pub p_win_max: T,
    pub beta: T,
}

impl<T: Scalar> ChshBoundResult<T> {
    pub fn from_beta(beta: T) -> Self {
        let p_win_max = (T::lit(2.0) + beta / T::lit(2.0)) / T::lit(4.0);
        Self { p_win_max, beta }
    }
}

/// Minimum-error discrimination of two equiprobable pure states: `(1 + √(1-δ²))/2`.
pub fn helstrom<T: Scalar>(delta: T) -> Result<T> {
    delta_ok(delta)?;
    Ok((T::one() + (T::one() - delta * delta).sqrt()) / T::lit(2.0))
}

/// Optimal success for N equidistant pure states.
pub fn ps_n<T: Scalar>(n: usize, delta: T) -> Result<T> {
    n_ok(n)?;
    delta_ok(delta)?;
    let n = nf::<T>(n);
    let s = (T::one() + (n - T::one()) * delta).sqrt() + (n - T::one()) * (T::one() - delta).sqrt();
    Ok(s * s / (n * n))
}

/// Minimum error probability per wrong label, `(1 - p_s)/N`.
pub fn pe_n<T: Scalar>(n: usize, delta: T) -> Result<T> {
    let ps = ps_n(n, delta)?;
    Ok((T::one() - ps) / nf(n))
}

/// Off-peak eigenvalue of an axisymmetric reduced state,
/// `(√(1+(N-1)δ) - √(1-δ))²/N² = (1 - p_s)/(N - 1)`.
pub fn pe_reduced<T: Scalar>(n: usize, delta: T) -> Result<T> {
    n_ok(n)?;
    delta_ok(delta)?;
    let nn = nf::<T>(n);
    let d = (T::one() + (nn - T::one()) * delta).sqrt() - (T::one() - delta).sqrt();
    Ok(d * d / (nn * nn))
}

/// Largest CHSH violation of an equiprobable two-qubit ensemble of N ∈ {2,3,4}
/// pure states with pairwise overlap δ.
pub fn chsh_bound_overlap<T: Scalar>(n: usize, delta: T) -> Result<ChshBoundResult<T>> {
    delta_ok(delta)?;
    let two = T::lit(2.0);
    let beta = match n {
        2 => two * (T::one() + delta * delta).sqrt(),
        3 => two * T::SQRT_2() / T::lit(3.0) * (T::one() + two * delta),
        4 => two * T::SQRT_2() * delta,
        _ => {
            return Err(Error::Unsupported(format!(
                "CHSH overlap bound is derived for N in {{2, 3, 4}}, got {n}"
            )))
        }
    };
    Ok(ChshBoundResult::from_beta(beta))
}

/// Two preparations with arbitrary priors: `β = 2√(2 - 4P(1-δ²))`, `P = p₀p₁`.
pub fn chsh_bound_general_priors<T: Scalar>(priors: [T; 2], delta: T) -> Result<ChshBoundResult<T>> {
    crate::ensembles::check_priors(&priors)?;
    delta_ok(delta)?;
    let p = priors[0] * priors[1];
    let inner = T::lit(2.0) - T::lit(4.0) * p * (T::one() - delta * delta);
    Ok(ChshBoundResult::from_beta(T::lit(2.0) * inner.sqrt()))
}

/// CHSH winning probability compatible with a local success probability.
pub fn chsh_from_ps<T: Scalar>(ps_local: T) -> Result<T> {
    check_range("ps_local", ps_local.to_f64_lossy(), 0.5, 1.0, slack::<T>())?;
    let x = T::lit(2.0) * ps_local - T::one();
    Ok((T::lit(2.0) + (T::lit(2.0) - x * x).sqrt()) / T::lit(4.0))
}

/// Winning probability of the θ-parametrized strategy: `(2 + cos θ + δ sin θ)/4`.
pub fn theta_chsh<T: Scalar>(delta: T, theta: T) -> T {
    (T::lit(2.0) + theta.cos() + delta * theta.sin()) / T::lit(4.0)
}

/// Projector `½[1 + sin θ σ_x + cos θ σ_z]`.
pub fn measurement_pi<T: Scalar>(theta: T) -> HermitianMatrix<T> {
    let half = T::lit(0.5);
    let x = pauli::<T>('x').scale(theta.sin());
    let z = pauli::<T>('z').scale(theta.cos());
    (&(&HermitianMatrix::identity(2) + &x) + &z).scale(half)
}

/// Largest fidelity of an ensemble with overlaps at most δ with any pure state.
pub fn fidelity_bound_delta<T: Scalar>(n: usize, delta: T) -> Result<T> {
    n_ok(n)?;
    delta_ok(delta)?;
    let n = nf::<T>(n);
    Ok((T::one() + (n - T::one()) * delta) / n)
}

/// Maximally entangled fidelity bound in terms of the local success probability.
pub fn fidelity_bound_ps<T: Scalar>(n: usize, ps_local: T) -> Result<T> {
    n_ok(n)?;
    let nn = nf::<T>(n);
    check_range("ps_local", ps_local.to_f64_lossy(), 1.0 / n as f64, 1.0, slack::<T>())?;
    let q = T::one() - ps_local;
    let root = ((nn - T::one()) * q * ps_local).max(T::zero()).sqrt();
    Ok((T::one() + (nn - T::lit(2.0)) * q + T::lit(2.0) * root) / nn)
}

/// Lower bound on `Tr[ρH]` for `H = 1 - |vac⟩⟨vac|`: `(1 - 1/N)(1 - δ)`.
pub fn energy_alpha<T: Scalar>(n: usize, delta: T) -> Result<T> {
    n_ok(n)?;
    delta_ok(delta)?;
    Ok((T::one() - T::one() / nf(n)) * (T::one() - delta))
}

/// Local success bound implied by a global energy `α`.
pub fn ps_from_energy<T: Scalar>(n: usize, alpha: T) -> Result<T> {
    n_ok(n)?;
    let hi = 1.0 - 1.0 / n as f64;
    check_range("alpha", alpha.to_f64_lossy(), 0.0, hi, slack::<T>())?;
    let nn = nf::<T>(n);
    let alpha = alpha.max(T::zero());
    let s = (nn * (T::one() - alpha)).max(T::zero()).sqrt() + (nn * (nn - T::one()) * alpha).sqrt();
    Ok(s * s / (nn * nn))
}

/// Upper bound on the largest eigenvalue of a `D x D` Hermitian matrix with real
/// spectrum from its first two trace moments.
pub fn lambda_max_bound<T: Scalar>(trace: T, trace2: T, dim: usize) -> Result<T> {
    if dim == 0 {
        return Err(Error::OutOfRange {
            name: "D",
            value: 0.0,
            range: "D >= 1".into(),
        });
    }
    let d = nf::<T>(dim);
    let spread = trace2 - trace * trace / d;
    let tol = T::lit(slack::<T>()) * T::one().max(trace2.abs());
    if spread < -tol {
        return Err(Error::OutOfRange {
            name: "trace2",
            value: trace2.to_f64_lossy(),
            range: format!(">= trace^2/D = {}", (trace * trace / d).to_f64_lossy()),
        });
    }
    Ok(trace / d + ((d - T::one()) / d).sqrt() * spread.max(T::zero()).sqrt())
}

/// Local success bound for the two-state family with an inconclusive rate.
pub fn inconclusive_local_ps<T: Scalar>(delta: T, p_inc: T) -> Result<T> {
    check_range("p_inc", p_inc.to_f64_lossy(), 0.0, 1.0, 0.0)?;
    Ok((T::one() - p_inc) * helstrom(delta)?)
}

/// Critical visibility `1/√(1+δ²)` and the inconclusive-rate threshold `δ/√(1+δ²)`.
pub fn critical_visibility<T: Scalar>(delta: T) -> Result<(T, T)> {
    delta_ok(delta)?;
    let r = (T::one() + delta * delta).sqrt();
    Ok((T::one() / r, delta / r))
}
