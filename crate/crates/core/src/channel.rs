//! Random unitary mixing channels `R(ρ) = (1/N) Σ Uᵢ ρ Uᵢ†` and the quantities measured on them.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::haar::{gaussian_vector, sample_haar_unitary, RngStream, UnitaryMatrix};
use crate::linalg::{
    hermitian_eigensystem, hermitian_eigensystem_with, inner, norm2, operator_norm, ComplexMatrix,
    HermitianMatrix,
};
use crate::scalar::Real;

/// Unit vector in `ℂᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts amplitudes whose norm is within tolerance of 1.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("empty state vector".into()));
        }
        let n = norm2(&amplitudes);
        if !((n - T::one()).abs() <= T::tolerances().state_norm) {
            return Err(Error::InvalidParameter(format!("state norm {n} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("empty state vector".into()));
        }
        let n = norm2(&amplitudes);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z = *z / n;
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k >= d {
            return Err(Error::InvalidDimension(format!("|{k}⟩ in dimension {d}")));
        }
        let mut v = vec![Complex::zero(); d];
        v[k] = Complex::one();
        Ok(Self { amplitudes: v })
    }

    /// Uniformly distributed pure state (normalized complex Gaussian vector).
    pub fn random(d: usize, rng: &mut RngStream) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("d must be at least 1".into()));
        }
        Self::normalized(gaussian_vector(d, rng))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// `|x⟩⟨x|`.
    pub fn projector(&self) -> HermitianMatrix<T> {
        HermitianMatrix::projector(&self.amplitudes)
    }

    /// `e^{iθ}|x⟩`.
    pub fn with_phase(&self, theta: T) -> Self {
        let p = Complex::from_polar(T::one(), theta);
        Self { amplitudes: self.amplitudes.iter().map(|z| z * p).collect() }
    }

    pub(crate) fn from_unit_unchecked(amplitudes: Vec<Complex<T>>) -> Self {
        Self { amplitudes }
    }
}

/// Density matrix: positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState<T> {
    matrix: HermitianMatrix<T>,
}

impl<T: Real> MixedState<T> {
    pub fn new(matrix: HermitianMatrix<T>) -> Result<Self> {
        let tol = T::tolerances();
        let tr = matrix.trace();
        if !((tr - T::one()).abs() <= tol.mixed_trace) {
            return Err(Error::InvalidMatrix(format!("trace {tr} is not 1")));
        }
        let es = hermitian_eigensystem(&matrix)?;
        let min = *es.eigenvalues.last().expect("dim >= 1");
        if min < -tol.mixed_min_eigenvalue {
            return Err(Error::InvalidMatrix(format!("negative eigenvalue {min}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(x: &PureState<T>) -> Self {
        Self { matrix: x.projector() }
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: HermitianMatrix::identity(d).scale(T::one() / T::lit(d as f64)) }
    }

    /// Random full-rank state `G G† / tr(G G†)` with `G` Ginibre.
    pub fn random(d: usize, rng: &mut RngStream) -> Result<Self> {
        let g = crate::haar::sample_ginibre::<T>(d, rng)?;
        let w = g.matmul(&g.adjoint())?;
        let tr = w.trace().re;
        Ok(Self { matrix: HermitianMatrix::symmetrize(w.scale(T::one() / tr)) })
    }

    pub(crate) fn from_hermitian_unchecked(matrix: HermitianMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix<T> {
        &self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Haar,
    Weyl,
    Loaded,
}

/// Where a channel came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub kind: ChannelKind,
    pub seed: Option<u64>,
    pub stream_id: Option<u64>,
}

/// Uniform mixture of `N` unitary conjugations on `ℂᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomUnitaryChannel<T> {
    dim: usize,
    unitaries: Vec<UnitaryMatrix<T>>,
    provenance: Provenance,
}

impl<T: Real> RandomUnitaryChannel<T> {
    pub fn from_unitaries(unitaries: Vec<UnitaryMatrix<T>>, provenance: Provenance) -> Result<Self> {
        let dim = unitaries
            .first()
            .ok_or_else(|| Error::InvalidDimension("a channel needs at least one unitary".into()))?
            .dim();
        for u in &unitaries {
            check_dims(dim, u.dim())?;
        }
        Ok(Self { dim, unitaries, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix<T>] {
        &self.unitaries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn inv_count(&self) -> T {
        T::one() / T::lit(self.count() as f64)
    }

    fn inv_dim(&self) -> T {
        T::one() / T::lit(self.dim as f64)
    }

    /// `R(ρ)`.
    pub fn apply(&self, rho: &MixedState<T>) -> Result<MixedState<T>> {
        check_dims(self.dim, rho.dim())?;
        Ok(MixedState::from_hermitian_unchecked(self.apply_operator(rho.matrix())?))
    }

    /// `R†(σ) = (1/N) Σ Uᵢ† σ Uᵢ`.
    pub fn apply_adjoint(&self, sigma: &MixedState<T>) -> Result<MixedState<T>> {
        check_dims(self.dim, sigma.dim())?;
        Ok(MixedState::from_hermitian_unchecked(self.apply_adjoint_operator(sigma.matrix())?))
    }

    /// Linear extension of `R` to any Hermitian operator.
    pub fn apply_operator(&self, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        check_dims(self.dim, a.dim())?;
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for u in &self.unitaries {
            let m = u.matrix();
            acc = acc.add(&m.matmul(a.matrix())?.matmul(&m.adjoint())?)?;
        }
        Ok(HermitianMatrix::symmetrize(acc.scale(self.inv_count())))
    }

    pub fn apply_adjoint_operator(&self, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        check_dims(self.dim, a.dim())?;
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for u in &self.unitaries {
            let m = u.matrix();
            acc = acc.add(&m.adjoint().matmul(a.matrix())?.matmul(m)?)?;
        }
        Ok(HermitianMatrix::symmetrize(acc.scale(self.inv_count())))
    }

    /// `R(φφ†)` via the image vectors `Uᵢφ`.
    pub fn pure_image(&self, phi: &PureState<T>) -> Result<HermitianMatrix<T>> {
        check_dims(self.dim, phi.dim())?;
        Ok(self.outer_sum(self.unitaries.iter().map(|u| u.apply(phi.amplitudes()))))
    }

    /// `R†(ψψ†)` via `Uᵢ†ψ`.
    pub fn pure_adjoint_image(&self, psi: &PureState<T>) -> Result<HermitianMatrix<T>> {
        check_dims(self.dim, psi.dim())?;
        Ok(self.outer_sum(self.unitaries.iter().map(|u| u.apply_adjoint(psi.amplitudes()))))
    }

    fn outer_sum(&self, vectors: impl Iterator<Item = Vec<Complex<T>>>) -> HermitianMatrix<T> {
        let d = self.dim;
        let mut acc = ComplexMatrix::zeros(d, d);
        for w in vectors {
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] = acc[(i, j)] + w[i] * w[j].conj();
                }
            }
        }
        HermitianMatrix::symmetrize(acc.scale(self.inv_count()))
    }

    /// `(1/N) Σ |⟨ψ|Uᵢ|φ⟩|²`, the pair statistic `(1/N) Σ tr(Uᵢφ Uᵢ†ψ)`.
    pub fn pair_statistic(&self, phi: &PureState<T>, psi: &PureState<T>) -> Result<T> {
        check_dims(self.dim, phi.dim())?;
        check_dims(self.dim, psi.dim())?;
        let s: T = self
            .unitaries
            .iter()
            .map(|u| inner(psi.amplitudes(), &u.apply(phi.amplitudes())).norm_sqr())
            .sum();
        Ok(s * self.inv_count())
    }

    /// `‖R(φφ†) - I/d‖∞`.
    pub fn deviation(&self, phi: &PureState<T>) -> Result<T> {
        operator_norm(&self.pure_image(phi)?.shift(self.inv_dim()))
    }

    /// Net-free upper bound on `sup_φ ‖R(φφ†) - I/d‖∞`.
    ///
    /// `R - Δ` (with `Δ` the completely depolarizing map) acts on `φφ† - I/d`, a
    /// traceless operator of Hilbert–Schmidt norm `√(1 - 1/d)`. For traceless
    /// Hermitian `Y`, `‖Y‖∞ ≤ √(1 - 1/d)‖Y‖₂`, so the supremum is at most
    /// `(1 - 1/d)·s` where `s` is the largest singular value of the superoperator
    /// of `R` restricted to traceless operators. A small roundoff slack is added
    /// to the computed `s²`.
    pub fn superoperator_bound(&self) -> Result<T> {
        let d = self.dim;
        if d == 1 {
            return Ok(T::zero());
        }
        let n = d * d;
        // S[(a,b),(c,e)] = (1/N) Σ U_ac conj(U_be), minus vec(I)vec(I)†/d
        let mut s = ComplexMatrix::zeros(n, n);
        for u in &self.unitaries {
            let m = u.matrix();
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let uac = m[(a, c)];
                        for e in 0..d {
                            s[(a * d + b, c * d + e)] = s[(a * d + b, c * d + e)] + uac * m[(b, e)].conj();
                        }
                    }
                }
            }
        }
        let mut s = s.scale(self.inv_count());
        let inv_d = self.inv_dim();
        for a in 0..d {
            for c in 0..d {
                s[(a * d + a, c * d + c)] = s[(a * d + a, c * d + c)] - Complex::new(inv_d, T::zero());
            }
        }
        let gram = HermitianMatrix::symmetrize(s.adjoint().matmul(&s)?);
        let es = hermitian_eigensystem_with(&gram, &T::tolerances())?;
        let top = es.eigenvalues[0].max(T::zero());
        let slack = T::lit(8.0 * n as f64) * T::epsilon() * T::one().max(gram.matrix().frobenius_norm());
        Ok((T::one() - inv_d) * (top + slack).sqrt())
    }
}

/// `N` independent Haar unitaries drawn in order from `rng`.
pub fn build_random_channel<T: Real>(
    d: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<RandomUnitaryChannel<T>> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("d = {d}, N = {n}")));
    }
    let provenance = Provenance {
        kind: ChannelKind::Haar,
        seed: Some(rng.seed()),
        stream_id: Some(rng.stream_id()),
    };
    let unitaries = (0..n)
        .map(|_| sample_haar_unitary(d, rng))
        .collect::<Result<Vec<_>>>()?;
    RandomUnitaryChannel::from_unitaries(unitaries, provenance)
}

/// The `d²` Weyl operators `XʲZᵏ`; an exact randomizer (`R(ρ) = I/d` for every state).
pub fn build_weyl_channel<T: Real>(d: usize) -> Result<RandomUnitaryChannel<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let mut unitaries = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            // (XʲZᵏ)|m⟩ = ω^{km} |m + j⟩
            let mut m = ComplexMatrix::zeros(d, d);
            for col in 0..d {
                let angle = std::f64::consts::TAU * ((k * col) % d) as f64 / d as f64;
                m[((col + j) % d, col)] = Complex::new(T::lit(angle.cos()), T::lit(angle.sin()));
            }
            unitaries.push(UnitaryMatrix::new(m)?);
        }
    }
    RandomUnitaryChannel::from_unitaries(
        unitaries,
        Provenance { kind: ChannelKind::Weyl, seed: None, stream_id: None },
    )
}

impl<T: Real> PureState<T> {
    /// Entrywise scalar conversion, renormalized.
    pub fn cast<U: Real>(&self) -> PureState<U> {
        let v = self
            .amplitudes
            .iter()
            .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
            .collect();
        PureState::normalized(v).expect("unit vector stays nonzero")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(d: usize, k: usize) -> PureState<f64> {
        PureState::basis(d, k).unwrap()
    }

    fn identity_channel(d: usize) -> RandomUnitaryChannel<f64> {
        RandomUnitaryChannel::from_unitaries(
            vec![UnitaryMatrix::identity(d)],
            Provenance { kind: ChannelKind::Loaded, seed: None, stream_id: None },
        )
        .unwrap()
    }

    #[test]
    fn build_validates_sizes() {
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(build_random_channel::<f64>(0, 3, &mut rng), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_random_channel::<f64>(2, 0, &mut rng), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_weyl_channel::<f64>(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn random_channel_is_reproducible() {
        let a = build_random_channel::<f64>(2, 3, &mut RngStream::new(11, 0)).unwrap();
        let b = build_random_channel::<f64>(2, 3, &mut RngStream::new(11, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance().seed, Some(11));
    }

    #[test]
    fn scalar_channel_and_unitarity() {
        let ch = build_random_channel::<f64>(1, 5, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(ch.count(), 5);
        for u in ch.unitaries() {
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
        let ch = build_random_channel::<f64>(4, 16, &mut RngStream::new(2, 0)).unwrap();
        assert!(ch.unitaries().iter().all(|u| u.matrix().unitarity_defect() <= 1e-10));
    }

    #[test]
    fn weyl_d1_and_d2() {
        let w1 = build_weyl_channel::<f64>(1).unwrap();
        assert_eq!(w1.count(), 1);
        assert!(w1.unitaries()[0].matrix().max_abs_diff(&ComplexMatrix::identity(1)) < 1e-15);

        let w2 = build_weyl_channel::<f64>(2).unwrap();
        let c = |re: f64| Complex::new(re, 0.0);
        let x = ComplexMatrix::new(2, 2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        let z = ComplexMatrix::diagonal(&[1.0, -1.0]);
        let xz = x.matmul(&z).unwrap();
        let expected = [ComplexMatrix::identity(2), z, x, xz];
        for (u, e) in w2.unitaries().iter().zip(&expected) {
            assert!(u.matrix().max_abs_diff(e) < 1e-15);
        }
    }

    #[test]
    fn weyl_d3_maps_ket_to_maximally_mixed() {
        let ch = build_weyl_channel::<f64>(3).unwrap();
        let out = ch.apply(&MixedState::from_pure(&ket(3, 0))).unwrap();
        let target = MixedState::<f64>::maximally_mixed(3);
        assert!(out.matrix().matrix().max_abs_diff(target.matrix().matrix()) < 1e-12);
    }

    #[test]
    fn identity_channel_leaves_states_alone() {
        let ch = identity_channel(3);
        let rho = MixedState::<f64>::random(3, &mut RngStream::new(4, 0)).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(out.matrix().matrix().max_abs_diff(rho.matrix().matrix()) < 1e-15);
        let back = ch.apply_adjoint(&rho).unwrap();
        assert!(back.matrix().matrix().max_abs_diff(rho.matrix().matrix()) < 1e-15);
        assert_eq!(ch.pair_statistic(&ket(3, 0), &ket(3, 0)).unwrap(), 1.0);
        assert_eq!(ch.pair_statistic(&ket(3, 0), &ket(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn weyl_d2_randomizes_everything() {
        let ch = build_weyl_channel::<f64>(2).unwrap();
        let mut rng = RngStream::new(8, 0);
        for _ in 0..20 {
            let phi = PureState::random(2, &mut rng).unwrap();
            let psi = PureState::random(2, &mut rng).unwrap();
            assert!((ch.pair_statistic(&phi, &psi).unwrap() - 0.5).abs() < 1e-12);
            let back = ch.apply_adjoint(&MixedState::from_pure(&psi)).unwrap();
            let half = MixedState::<f64>::maximally_mixed(2);
            assert!(back.matrix().matrix().max_abs_diff(half.matrix().matrix()) < 1e-12);
        }
    }

    #[test]
    fn deviation_of_single_unitary_is_one_minus_inverse_dim() {
        let mut rng = RngStream::new(10, 0);
        for d in 2..=6 {
            let ch = build_random_channel::<f64>(d, 1, &mut rng).unwrap();
            let phi = PureState::random(d, &mut rng).unwrap();
            let dev = ch.deviation(&phi).unwrap();
            assert!((dev - (1.0 - 1.0 / d as f64)).abs() <= 1e-12, "d={d}: {dev}");
        }
        let ch = build_random_channel::<f64>(1, 4, &mut rng).unwrap();
        assert!(ch.deviation(&ket(1, 0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = identity_channel(2);
        assert!(matches!(ch.pair_statistic(&ket(3, 0), &ket(2, 0)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(ch.deviation(&ket(3, 0)), Err(Error::DimensionMismatch { .. })));
        assert!(ch.apply(&MixedState::maximally_mixed(3)).is_err());
    }

    #[test]
    fn superoperator_bound_edge_cases() {
        // single unitary: bound is exactly 1 - 1/d
        let ch = build_random_channel::<f64>(3, 1, &mut RngStream::new(1, 0)).unwrap();
        let b = ch.superoperator_bound().unwrap();
        assert!((b - 2.0 / 3.0).abs() < 1e-6, "{b}");
        let w = build_weyl_channel::<f64>(4).unwrap();
        assert!(w.superoperator_bound().unwrap() < 1e-6);
        assert_eq!(identity_channel(1).superoperator_bound().unwrap(), 0.0);
    }

    #[test]
    fn state_constructors() {
        assert!(PureState::<f64>::basis(2, 2).is_err());
        assert!(PureState::new(vec![Complex::new(0.5, 0.0)]).is_err());
        assert!(PureState::<f64>::normalized(vec![Complex::zero(); 2]).is_err());
        let bad = HermitianMatrix::diagonal(&[1.5, -0.5]);
        assert!(MixedState::new(bad).is_err());
        assert!(MixedState::new(HermitianMatrix::diagonal(&[0.25, 0.75])).is_ok());
    }
}
