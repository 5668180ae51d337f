//! Scalar abstraction: everything numeric in this crate is generic over `f32`/`f64`.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real floating point type the linear algebra is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Default tolerances for this precision.
    fn tolerances() -> Tolerances<Self>;

    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tolerances() -> Tolerances<f64> {
        Tolerances {
            hermitian: 1e-12,
            unitarity: 1e-10,
            eig_orthogonality: 1e-10,
            eig_reconstruction: 1e-10,
            jacobi_off_relative: 1e-13,
            jacobi_max_sweeps: 100,
            qr_rank_relative: 1e-12,
            state_norm: 1e-12,
            mixed_min_eigenvalue: 1e-10,
            mixed_trace: 1e-10,
        }
    }
}

impl Real for f32 {
    fn tolerances() -> Tolerances<f32> {
        Tolerances {
            hermitian: 1e-5,
            unitarity: 1e-4,
            eig_orthogonality: 1e-4,
            eig_reconstruction: 1e-4,
            jacobi_off_relative: 1e-6,
            jacobi_max_sweeps: 100,
            qr_rank_relative: 1e-6,
            state_norm: 1e-5,
            mixed_min_eigenvalue: 1e-4,
            mixed_trace: 1e-4,
        }
    }
}

/// Numerical tolerances, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Max entrywise `|H - H†|` accepted for a Hermitian matrix (relative to `max(1, max|H|)`).
    pub hermitian: T,
    /// Max entrywise `|U†U - I|` accepted for a unitary.
    pub unitarity: T,
    pub eig_orthogonality: T,
    /// Relative to `max(1, ‖H‖∞)`.
    pub eig_reconstruction: T,
    /// Jacobi stops when off-diagonal Frobenius norm is below this fraction of `‖H‖F`.
    pub jacobi_off_relative: T,
    pub jacobi_max_sweeps: usize,
    /// `|R_kk|` below this fraction of `‖M‖F` counts as rank deficient.
    pub qr_rank_relative: T,
    pub state_norm: T,
    pub mixed_min_eigenvalue: T,
    pub mixed_trace: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        T::tolerances()
    }
}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = Complex<T>;
