//! Seeded sampling of Ginibre matrices and Haar-distributed unitaries.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{qr_unitary_factor, ComplexMatrix};
use crate::scalar::Real;

/// Consecutive rank-deficient Ginibre draws tolerated before giving up.
pub const MAX_DEGENERATE_RETRIES: usize = 10;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same pair yield the same sequence. Workers derive their
/// own stream with [`RngStream::fork`] so parallel results do not depend on
/// scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream `(seed, stream_id + index)`, independent of this stream's position.
    pub fn fork(&self, index: u64) -> Self {
        Self::new(self.seed, self.stream_id.wrapping_add(index))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Box–Muller: complex normal with `E|z|² = 1`, real and imaginary parts of variance 1/2.
    #[inline]
    pub fn complex_gaussian<T: Real>(&mut self) -> Complex<T> {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        Complex::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }
}

/// `d×d` matrix of iid standard complex Gaussians.
pub fn sample_ginibre<T: Real>(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let data = (0..d * d).map(|_| rng.complex_gaussian()).collect();
    ComplexMatrix::new(d, d, data)
}

/// Vector of `d` iid standard complex Gaussians.
pub fn gaussian_vector<T: Real>(d: usize, rng: &mut RngStream) -> Vec<Complex<T>> {
    (0..d).map(|_| rng.complex_gaussian()).collect()
}

/// A `d×d` matrix satisfying `‖U†U - I‖max ≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix<T> {
    inner: ComplexMatrix<T>,
}

impl<T: Real> UnitaryMatrix<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidMatrix(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        let defect = m.unitarity_defect();
        let tol = T::tolerances().unitarity;
        if !(defect <= tol) {
            return Err(Error::InvalidMatrix(format!(
                "unitarity defect {defect} exceeds {tol}"
            )));
        }
        Ok(Self { inner: m })
    }

    pub fn identity(d: usize) -> Self {
        Self { inner: ComplexMatrix::identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.inner
    }

    /// `U x`, no dimension check.
    #[inline]
    pub(crate) fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.inner.mul_vec_unchecked(x)
    }

    /// `U† x`, no dimension check.
    #[inline]
    pub(crate) fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.inner.adjoint_mul_vec_unchecked(x)
    }
}

/// Haar-distributed unitary: phase-corrected QR of a Ginibre matrix.
pub fn sample_haar_unitary<T: Real>(d: usize, rng: &mut RngStream) -> Result<UnitaryMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    for _ in 0..=MAX_DEGENERATE_RETRIES {
        let g = sample_ginibre::<T>(d, rng)?;
        match qr_unitary_factor(&g) {
            Ok(q) => return UnitaryMatrix::new(q),
            Err(Error::DegenerateSample(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NumericalFailure(format!(
        "{} consecutive degenerate Ginibre samples",
        MAX_DEGENERATE_RETRIES + 1
    )))
}
