use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Householder QR with the phase convention `R_kk > 0` (real), which makes the factorization unique.
pub fn qr_decompose<T: Real>(m: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let n = m.rows();
    let floor = T::tolerances().qr_rank_relative * m.frobenius_norm();
    let two = T::lit(2.0);

    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![Complex::zero(); n];

    for k in 0..n {
        let xnorm = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if xnorm <= floor || xnorm.is_zero() {
            return Err(Error::DegenerateSample(format!("column {k} is rank deficient")));
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::one() };
        let alpha = -phase * xnorm;

        let hv = &mut v[k..];
        for (i, slot) in hv.iter_mut().enumerate() {
            *slot = a[(k + i, k)];
        }
        hv[0] = hv[0] - alpha;
        let vnorm = hv.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in hv.iter_mut() {
            *z = *z / vnorm;
        }

        // A ← (I - 2vv†) A on the trailing block
        for j in k..n {
            let w = hv
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (i, z)| acc + z.conj() * a[(k + i, j)]);
            for (i, z) in hv.iter().enumerate() {
                a[(k + i, j)] = a[(k + i, j)] - *z * w * two;
            }
        }
        // Q ← Q (I - 2vv†)
        for r in 0..n {
            let w = hv
                .iter()
                .enumerate()
                .fold(Complex::<T>::zero(), |acc, (i, z)| acc + q[(r, k + i)] * *z);
            for (i, z) in hv.iter().enumerate() {
                q[(r, k + i)] = q[(r, k + i)] - w * z.conj() * two;
            }
        }
    }

    let mut r = ComplexMatrix::from_fn(n, n, |i, j| if i <= j { a[(i, j)] } else { Complex::zero() });
    for k in 0..n {
        let d = r[(k, k)];
        let unit = d / d.norm();
        for i in 0..n {
            q[(i, k)] = q[(i, k)] * unit;
        }
        for j in k..n {
            r[(k, j)] = r[(k, j)] * unit.conj();
        }
        r[(k, k)] = Complex::new(d.norm(), T::zero());
    }
    Ok((q, r))
}

/// Unitary factor `Q` of the positive-diagonal QR factorization.
pub fn qr_unitary_factor<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    qr_decompose(m).map(|(q, _)| q)
}
