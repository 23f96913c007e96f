//! States, measurements and the bipartite operations built on them.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, HermitianMatrix, Matrix};
use crate::scalar::{cr, Scalar, C};

/// One party of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Normalized bipartite pure state with amplitudes in the `|i⟩⊗|j⟩ ↦ i·dB + j` order.
#[derive(Clone, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<C<T>>,
    dims: (usize, usize),
}

impl<T: fmt::Debug> fmt::Debug for PureState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureState({}x{}) {:?}", self.dims.0, self.dims.1, self.amplitudes)
    }
}

impl<T: Scalar> PureState<T> {
    pub fn new(amplitudes: Vec<C<T>>, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || amplitudes.len() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for local dimensions {d_a}x{d_b}",
                amplitudes.len()
            )));
        }
        let n2 = norm(&amplitudes).powi(2);
        if !((n2 - T::one()).abs() <= T::lit(T::TOL.invariant)) {
            return Err(Error::NotNormalized(n2.to_f64_lossy()));
        }
        Ok(Self {
            amplitudes,
            dims: (d_a, d_b),
        })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C<T>>, d_a: usize, d_b: usize) -> Result<Self> {
        let n = norm(&amplitudes);
        if n.is_zero() || !n.is_finite() {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(amplitudes.into_iter().map(|z| z / cr(n)).collect(), d_a, d_b)
    }

    /// State of a single system, stored as `d x 1`.
    pub fn single(amplitudes: Vec<C<T>>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, d, 1)
    }

    /// `|a⟩⊗|b⟩`.
    pub fn product(a: &[C<T>], b: &[C<T>]) -> Result<Self> {
        let amps = a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect();
        Self::normalized(amps, a.len(), b.len())
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<C<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "overlap of states with dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn projector(&self) -> HermitianMatrix<T> {
        HermitianMatrix::projector(&self.amplitudes)
    }

    /// `U|ψ⟩`.
    pub fn transform(&self, u: &Matrix<T>) -> Result<Self> {
        let amps = u.apply(&self.amplitudes)?;
        Self::normalized(amps, self.dims.0, self.dims.1)
    }
}

/// Computational basis vector `|k⟩` in dimension `d`.
pub fn ket<T: Scalar>(d: usize, k: usize) -> Vec<C<T>> {
    let mut v = vec![C::zero(); d];
    v[k] = C::one();
    v
}

/// Pauli operators `'i'`, `'x'`, `'y'`, `'z'`.
pub fn pauli<T: Scalar>(which: char) -> HermitianMatrix<T> {
    let (o, l, i) = (C::<T>::zero(), C::<T>::one(), C::<T>::i());
    let entries = match which {
        'i' => vec![l, o, o, l],
        'x' => vec![o, l, l, o],
        'y' => vec![o, -i, i, o],
        'z' => vec![l, o, o, -l],
        other => panic!("unknown Pauli operator {other:?}"),
    };
    HermitianMatrix::new(2, entries).expect("Pauli matrices are Hermitian")
}

/// The four two-qubit Bell states in the order `φ⁺, φ⁻, ψ⁺, ψ⁻`.
pub fn bell_states<T: Scalar>() -> [PureState<T>; 4] {
    let h = T::FRAC_1_SQRT_2();
    let (o, p, m) = (C::zero(), cr(h), cr(-h));
    [
        PureState::new(vec![p, o, o, p], 2, 2).unwrap(),
        PureState::new(vec![p, o, o, m], 2, 2).unwrap(),
        PureState::new(vec![o, p, p, o], 2, 2).unwrap(),
        PureState::new(vec![o, p, m, o], 2, 2).unwrap(),
    ]
}

pub fn tensor_product<T: Scalar>(a: &HermitianMatrix<T>, b: &HermitianMatrix<T>) -> HermitianMatrix<T> {
    HermitianMatrix::hermitize(a.as_matrix().kron(b.as_matrix()))
}

/// Partial trace of a general (not necessarily Hermitian) operator on
/// `C^{dA} ⊗ C^{dB}`; `traced` names the subsystem that is summed over.
pub fn partial_trace_matrix<T: Scalar>(
    m: &Matrix<T>,
    d_a: usize,
    d_b: usize,
    traced: Party,
) -> Result<Matrix<T>> {
    if !m.is_square() || m.rows() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of a {}x{} operator over {d_a}x{d_b}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match traced {
        Party::B => Matrix::from_fn(d_a, d_a, |i, j| {
            (0..d_b).fold(C::zero(), |acc, k| acc + m[(i * d_b + k, j * d_b + k)])
        }),
        Party::A => Matrix::from_fn(d_b, d_b, |i, j| {
            (0..d_a).fold(C::zero(), |acc, k| acc + m[(k * d_b + i, k * d_b + j)])
        }),
    })
}

pub fn partial_trace<T: Scalar>(
    m: &HermitianMatrix<T>,
    d_a: usize,
    d_b: usize,
    traced: Party,
) -> Result<HermitianMatrix<T>> {
    partial_trace_matrix(m.as_matrix(), d_a, d_b, traced).map(HermitianMatrix::hermitize)
}

/// `Tr[m^k]` for `k ∈ 1..=4`.
pub fn trace_power<T: Scalar>(m: &HermitianMatrix<T>, k: u32) -> Result<T> {
    if !(1..=4).contains(&k) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            range: "{1, 2, 3, 4}".into(),
        });
    }
    let base = m.as_matrix();
    let mut acc = base.clone();
    for _ in 1..k {
        acc = acc.matmul(base)?;
    }
    let t = acc.trace();
    let scale = T::one().max(t.re.abs());
    if t.im.abs() > T::lit(T::TOL.invariant) * scale {
        return Err(Error::ImaginaryResidue(t.im.to_f64_lossy()));
    }
    Ok(t.re)
}

/// `⟨φ|ρ|φ⟩`.
pub fn fidelity_with_pure<T: Scalar>(rho: &HermitianMatrix<T>, phi: &PureState<T>) -> Result<T> {
    if rho.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of a dim-{} operator with a dim-{} state",
            rho.dim(),
            phi.dim()
        )));
    }
    rho.expectation(phi.amplitudes())
}

/// Outcome label of a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Index(usize),
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Index(k) => write!(f, "{k}"),
            Outcome::Inconclusive => write!(f, "∅"),
        }
    }
}

/// Positivity and completeness diagnostics of a candidate measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmReport<T> {
    pub min_eigenvalues: Vec<T>,
    pub completeness_residual: T,
    pub passes: bool,
}

pub fn validate_povm<T: Scalar>(elements: &[HermitianMatrix<T>]) -> Result<PovmReport<T>> {
    let Some(first) = elements.first() else {
        return Err(Error::InvalidPovm("no elements".into()));
    };
    let d = first.dim();
    if elements.iter().any(|e| e.dim() != d) {
        return Err(Error::InvalidPovm("elements of unequal dimension".into()));
    }
    let mut min_eigenvalues = Vec::with_capacity(elements.len());
    for e in elements {
        min_eigenvalues.push(e.min_eigenvalue()?);
    }
    let sum = elements
        .iter()
        .skip(1)
        .fold(first.clone(), |acc, e| &acc + e);
    let completeness_residual = sum.max_abs_diff(&HermitianMatrix::identity(d));
    let psd = T::lit(T::TOL.psd);
    let passes = min_eigenvalues.iter().all(|&l| l >= -psd)
        && completeness_residual <= T::lit(T::TOL.elementwise);
    Ok(PovmReport {
        min_eigenvalues,
        completeness_residual,
        passes,
    })
}

/// A validated POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T> {
    elements: Vec<HermitianMatrix<T>>,
    labels: Vec<Outcome>,
}

impl<T: Scalar> Povm<T> {
    pub fn new(elements: Vec<HermitianMatrix<T>>, labels: Vec<Outcome>) -> Result<Self> {
        if elements.len() != labels.len() {
            return Err(Error::InvalidPovm(format!(
                "{} elements but {} labels",
                elements.len(),
                labels.len()
            )));
        }
        let report = validate_povm(&elements)?;
        if !report.passes {
            return Err(Error::InvalidPovm(format!(
                "min eigenvalue {:e}, completeness residual {:e}",
                report
                    .min_eigenvalues
                    .iter()
                    .fold(T::infinity(), |m, &x| m.min(x))
                    .to_f64_lossy(),
                report.completeness_residual.to_f64_lossy()
            )));
        }
        Ok(Self { elements, labels })
    }

    /// Labels `0..k` in order.
    pub fn indexed(elements: Vec<HermitianMatrix<T>>) -> Result<Self> {
        let labels = (0..elements.len()).map(Outcome::Index).collect();
        Self::new(elements, labels)
    }

    /// Two-outcome measurement `{E, 1 - E}`.
    pub fn binary(effect: HermitianMatrix<T>) -> Result<Self> {
        let rest = &HermitianMatrix::identity(effect.dim()) - &effect;
        Self::indexed(vec![effect, rest])
    }

    pub fn elements(&self) -> &[HermitianMatrix<T>] {
        &self.elements
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, label: Outcome) -> Option<&HermitianMatrix<T>> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|k| &self.elements[k])
    }
}
