//! Scalar abstraction and the shared numeric policy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Tolerances shared by constructors, validators and solvers.
///
/// Every threshold in the crate is read from one of these records so that
/// tests and algorithms agree on what "equal" means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Generic elementwise comparison (completeness residuals, reconstructions).
    pub elementwise: f64,
    /// Structural invariants: Hermiticity, normalization, prior sums.
    pub invariant: f64,
    /// Smallest eigenvalue accepted as positive semidefinite.
    pub psd: f64,
    /// Eigenvalues closer than this (relative to the spectral scale) form one cluster.
    pub degeneracy: f64,
    /// Off-diagonal mass at which the Jacobi sweep stops, relative to the Frobenius norm.
    pub jacobi: f64,
    /// Default SDP stopping tolerance.
    pub sdp: f64,
}

impl Tolerances {
    pub const F64: Tolerances = Tolerances {
        elementwise: 1e-10,
        invariant: 1e-12,
        psd: 1e-10,
        degeneracy: 1e-10,
        jacobi: 1e-15,
        sdp: 1e-8,
    };

    pub const F32: Tolerances = Tolerances {
        elementwise: 1e-4,
        invariant: 1e-5,
        psd: 1e-4,
        degeneracy: 1e-4,
        jacobi: 1e-7,
        sdp: 1e-4,
    };
}

/// Real field the numerics are written against (implemented for `f32` and `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    const TOL: Tolerances;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TOL: Tolerances = Tolerances::F64;
}

impl Scalar for f32 {
    const TOL: Tolerances = Tolerances::F32;
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cis<T: Scalar>(phase: T) -> C<T> {
    Complex::new(phase.cos(), phase.sin())
}
