//! Cyclic Jacobi eigensolver for complex Hermitian matrices, and the norms built on it.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::scalar::{Real, Tolerances};

/// Spectral decomposition `H = V diag(λ) V†`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    pub eigenvalues: Vec<T>,
    /// Eigenvectors as columns.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn eigenvector(&self, i: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(i)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + v[(i, k)] * v[(j, k)].conj() * self.eigenvalues[k]
            })
        })
    }

    /// Index of the eigenvalue of largest magnitude. Ties, up to a few ulps, go to the positive end.
    pub fn extreme_index(&self) -> usize {
        let last = self.eigenvalues.len() - 1;
        let top = self.eigenvalues[0].abs();
        let slack = T::lit(16.0) * T::epsilon() * T::one().max(top);
        if self.eigenvalues[last].abs() > top + slack {
            last
        } else {
            0
        }
    }
}

pub fn hermitian_eigensystem<T: Real>(h: &HermitianMatrix<T>) -> Result<EigenSystem<T>> {
    hermitian_eigensystem_with(h, &T::tolerances())
}

pub fn hermitian_eigensystem_with<T: Real>(
    h: &HermitianMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<EigenSystem<T>> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let mut v = ComplexMatrix::identity(n);
    let fro = a.frobenius_norm();
    let threshold = tol.jacobi_off_relative * fro;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > threshold {
        if sweeps == tol.jacobi_max_sweeps {
            return Err(Error::NumericalFailure(format!(
                "Jacobi did not converge in {sweeps} sweeps"
            )));
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    // stable sort keeps the result deterministic under equal eigenvalues
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`: `A ← J† A J`, `V ← V J`.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= T::min_positive_value() {
        return;
    }
    let phase = apq / r;
    let phase_c = phase.conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let two = T::lit(2.0);
    let tau = (aqq - app) / (two * r);
    let t = if tau >= T::zero() {
        T::one() / (tau + T::one().hypot(tau))
    } else {
        -T::one() / (-tau + T::one().hypot(tau))
    };
    let c = T::one() / T::one().hypot(t);
    let s = t * c;

    // J = [[c, s], [-s·ē, c·ē]] on the (p, q) plane
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * phase_c * s;
        a[(k, q)] = akp * s + akq * phase_c * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(app - t * r, T::zero());
    a[(q, q)] = Complex::new(aqq + t * r, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * phase_c * s;
        v[(k, q)] = vkp * s + vkq * phase_c * c;
    }
}

/// `‖H‖∞ = max |λ|`.
pub fn operator_norm<T: Real>(h: &HermitianMatrix<T>) -> Result<T> {
    let es = hermitian_eigensystem(h)?;
    Ok(es.eigenvalues.iter().fold(T::zero(), |m, l| m.max(l.abs())))
}

/// `‖H‖₁ = Σ |λ|`.
pub fn trace_norm<T: Real>(h: &HermitianMatrix<T>) -> Result<T> {
    let es = hermitian_eigensystem(h)?;
    Ok(es.eigenvalues.iter().map(|l| l.abs()).sum())
}
