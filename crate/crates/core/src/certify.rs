//! Two-sided estimates of `A = sup_{φ,ψ} |(1/N) Σ tr(Uᵢ φ Uᵢ† ψ) - 1/d|` and the randomizing verdict.
//!
//! The upper side is the net lift `A ≤ (B + 2δ/d)/(1 - 2δ)` where `B` is the same
//! supremum restricted to a δ-net. The lower side is an alternating maximization
//! over pure states that returns explicit witnesses.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{PureState, RandomUnitaryChannel};
use crate::error::{check_dims, Error, Result};
use crate::haar::RngStream;
use crate::linalg::{hermitian_eigensystem, trace_norm, HermitianMatrix};
use crate::netcover::PureStateNet;
use crate::scalar::Real;

/// `δ = ε/(3 + 2ε)`, the net radius for which a net supremum of `δ/d` lifts to exactly `ε/d`.
pub fn paper_delta<T: Real>(epsilon: T) -> Result<T> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    Ok(epsilon / (T::lit(3.0) + T::lit(2.0) * epsilon))
}

/// `(B + 2δ/d) / (1 - 2δ)`, valid for `0 ≤ δ < 1/2`.
pub fn certified_upper_bound_a<T: Real>(b: T, delta: T, d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if !(delta >= T::zero() && delta < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1/2)")));
    }
    let two = T::lit(2.0);
    Ok((b + two * delta / T::lit(d as f64)) / (T::one() - two * delta))
}

/// Exact maximum of `|pair_statistic(φ₀, ψ₀) - 1/d|` over ordered net pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetSupremum<T> {
    pub value: T,
    pub phi_index: usize,
    pub psi_index: usize,
}

/// Scans all ordered pairs of the net.
///
/// For each `φ₀` the operator `H = R(φ₀φ₀†) - I/d` is formed once, so each pair
/// costs one quadratic form `|ψ₀† H ψ₀|`. Rows are visited by decreasing `‖H‖∞`
/// and a row is skipped when `‖H‖∞` is already below the running maximum; this
/// never changes the result since every entry of the row is at most `‖H‖∞`.
pub fn net_supremum_b<T: Real>(
    ch: &RandomUnitaryChannel<T>,
    net: &PureStateNet<T>,
) -> Result<NetSupremum<T>> {
    if net.is_empty() {
        return Err(Error::InvalidParameter("empty net".into()));
    }
    check_dims(ch.dim(), net.dim)?;
    let inv_d = T::one() / T::lit(ch.dim() as f64);

    let rows: Vec<(HermitianMatrix<T>, T)> = net
        .states
        .par_iter()
        .map(|phi| {
            let h = ch.pure_image(phi)?.shift(inv_d);
            let es = hermitian_eigensystem(&h)?;
            let top = es.eigenvalues.iter().fold(T::zero(), |m, l| m.max(l.abs()));
            Ok((h, top))
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| rows[j].1.partial_cmp(&rows[i].1).unwrap_or(std::cmp::Ordering::Equal));

    let best = AtomicU64::new(0f64.to_bits());
    let candidates: Vec<Option<(T, usize, usize)>> = order
        .par_iter()
        .map(|&i| {
            let (h, top) = &rows[i];
            if top.to_f64_lossy() < f64::from_bits(best.load(Ordering::Relaxed)) {
                return None;
            }
            let mut row_best = (T::neg_infinity(), 0usize);
            for (j, psi) in net.states.iter().enumerate() {
                let v = h.expectation(psi.amplitudes()).abs();
                if v > row_best.0 {
                    row_best = (v, j);
                }
            }
            best.fetch_max(row_best.0.to_f64_lossy().to_bits(), Ordering::Relaxed);
            Some((row_best.0, i, row_best.1))
        })
        .collect();

    let (value, phi_index, psi_index) = candidates
        .into_iter()
        .flatten()
        .fold(None::<(T, usize, usize)>, |acc, c| match acc {
            None => Some(c),
            Some(a) if c.0 > a.0 || (c.0 == a.0 && (c.1, c.2) < (a.1, a.2)) => Some(c),
            keep => keep,
        })
        .expect("the first visited row is never skipped");
    Ok(NetSupremum { value, phi_index, psi_index })
}

/// Parameters of the alternating maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self { restarts: 32, tol: 1e-10, max_iters: 500 }
    }
}

impl OptimizerParams {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("optimizer parameters {self:?}")));
        }
        Ok(())
    }
}

/// One alternating-maximization run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentRun<T> {
    /// `|pair_statistic(phi, psi) - 1/d|` at the returned witnesses.
    pub value: T,
    pub phi: PureState<T>,
    pub psi: PureState<T>,
    /// Objective after every half-step.
    pub history: Vec<T>,
}

/// Leading eigenvector (by `|λ|`, ties to the positive end) of `h`.
fn extreme_eigenvector<T: Real>(h: &HermitianMatrix<T>) -> Result<(T, PureState<T>)> {
    let es = hermitian_eigensystem(h)?;
    let k = es.extreme_index();
    Ok((es.eigenvalues[k].abs(), PureState::from_unit_unchecked(es.eigenvector(k))))
}

/// Alternates `ψ ← top eigenvector of R(φφ†) - I/d` and `φ ← top eigenvector of R†(ψψ†) - I/d`.
pub fn alternating_ascent<T: Real>(
    ch: &RandomUnitaryChannel<T>,
    start: PureState<T>,
    params: &OptimizerParams,
) -> Result<AscentRun<T>> {
    check_dims(ch.dim(), start.dim())?;
    let inv_d = T::one() / T::lit(ch.dim() as f64);
    let tol = T::lit(params.tol);
    let mut phi = start;
    let mut psi;
    let mut history = Vec::new();
    let mut previous = T::neg_infinity();
    let mut iters = 0;
    loop {
        let (v, next_psi) = extreme_eigenvector(&ch.pure_image(&phi)?.shift(inv_d))?;
        psi = next_psi;
        history.push(v);
        let (v, next_phi) = extreme_eigenvector(&ch.pure_adjoint_image(&psi)?.shift(inv_d))?;
        phi = next_phi;
        history.push(v);
        iters += 1;
        if v - previous < tol || iters >= params.max_iters {
            break;
        }
        previous = v;
    }
    let value = (ch.pair_statistic(&phi, &psi)? - inv_d).abs();
    Ok(AscentRun { value, phi, psi, history })
}

/// Witnessed lower bound on `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound<T> {
    pub value: T,
    pub phi: PureState<T>,
    pub psi: PureState<T>,
}

/// Best of `params.restarts` ascents from uniform random starts; restart `r` draws from `rng.fork(r)`.
pub fn alternating_max_lower_bound<T: Real>(
    ch: &RandomUnitaryChannel<T>,
    params: &OptimizerParams,
    rng: &RngStream,
) -> Result<LowerBound<T>> {
    params.validate()?;
    let runs: Vec<AscentRun<T>> = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng.fork(r as u64);
            let start = PureState::random(ch.dim(), &mut stream)?;
            alternating_ascent(ch, start, params)
        })
        .collect::<Result<_>>()?;
    // first maximum wins, so the result does not depend on scheduling
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("restarts >= 1");
    Ok(LowerBound { value: best.value, phi: best.phi, psi: best.psi })
}

/// How the discretization for the upper bound is supplied.
#[derive(Debug, Clone, Copy)]
pub enum Discretization<'a, T> {
    /// A materialized net; `B` is its exact ordered-pair supremum.
    Net(&'a PureStateNet<T>),
    /// A δ-net that exists but is too large to list. `B ≤ A` is then bounded by
    /// [`RandomUnitaryChannel::superoperator_bound`].
    Implicit { delta: T },
}

impl<T: Real> Discretization<'_, T> {
    pub fn delta(&self) -> T {
        match self {
            Discretization::Net(n) => n.delta,
            Discretization::Implicit { delta } => *delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedRandomizing,
    CertifiedNotRandomizing,
    Undetermined,
}

/// Where the `B` of a certificate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BSource {
    /// Exact scan; indices of the maximizing `(φ₀, ψ₀)`.
    NetScan { net_size: usize, phi_index: usize, psi_index: usize },
    /// Upper bound on `B` from the superoperator norm.
    SuperoperatorBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub b_ms: f64,
    pub lower_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCertificate<T> {
    pub dim: usize,
    pub count: usize,
    pub epsilon: T,
    pub delta: T,
    pub b: T,
    pub b_source: BSource,
    pub a_upper: T,
    pub a_lower: T,
    /// Net-free upper bound on `A`, reported alongside as a cross-check.
    pub superoperator_bound: T,
    pub witness_phi: PureState<T>,
    pub witness_psi: PureState<T>,
    pub verdict: Verdict,
    pub timings: Timings,
}

impl<T: Real> DeviationCertificate<T> {
    /// `ε/d`.
    pub fn threshold(&self) -> T {
        self.epsilon / T::lit(self.dim as f64)
    }
}

fn classify<T: Real>(a_upper: T, a_lower: T, threshold: T) -> Verdict {
    if a_upper <= threshold {
        Verdict::CertifiedRandomizing
    } else if a_lower > threshold {
        Verdict::CertifiedNotRandomizing
    } else {
        Verdict::Undetermined
    }
}

/// Decides whether `ch` is ε-randomizing: randomizing if `A_upper ≤ ε/d`, not
/// randomizing if `A_lower > ε/d`, undetermined otherwise.
pub fn verdict<T: Real>(
    ch: &RandomUnitaryChannel<T>,
    epsilon: T,
    disc: Discretization<'_, T>,
    params: &OptimizerParams,
    rng: &RngStream,
) -> Result<DeviationCertificate<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let delta = disc.delta();
    if !(delta > T::zero() && delta < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("net delta = {delta} outside (0, 1/2)")));
    }
    params.validate()?;

    let started = Instant::now();
    let superop = ch.superoperator_bound()?;
    let (b, b_source) = match disc {
        Discretization::Net(net) => {
            let sup = net_supremum_b(ch, net)?;
            (
                sup.value,
                BSource::NetScan { net_size: net.len(), phi_index: sup.phi_index, psi_index: sup.psi_index },
            )
        }
        Discretization::Implicit { .. } => (superop, BSource::SuperoperatorBound),
    };
    let b_ms = started.elapsed().as_secs_f64() * 1e3;
    let a_upper = certified_upper_bound_a(b, delta, ch.dim())?;

    let started = Instant::now();
    let lower = alternating_max_lower_bound(ch, params, rng)?;
    let lower_ms = started.elapsed().as_secs_f64() * 1e3;

    let threshold = epsilon / T::lit(ch.dim() as f64);
    Ok(DeviationCertificate {
        dim: ch.dim(),
        count: ch.count(),
        epsilon,
        delta,
        b,
        b_source,
        a_upper,
        a_lower: lower.value,
        superoperator_bound: superop,
        witness_phi: lower.phi,
        witness_psi: lower.psi,
        verdict: classify(a_upper, lower.value, threshold),
        timings: Timings { b_ms, lower_ms },
    })
}

/// Checks `|(1/N) Σ tr(Uᵢ a Uᵢ† b)| ≤ ‖a‖₁ ‖b‖₁ (A_upper + 1/d)` up to roundoff.
/// A `false` return means `a_upper` was not a valid bound on `A`.
pub fn bilinear_bound_check<T: Real>(
    ch: &RandomUnitaryChannel<T>,
    a: &HermitianMatrix<T>,
    b: &HermitianMatrix<T>,
    a_upper: T,
) -> Result<bool> {
    check_dims(ch.dim(), a.dim())?;
    check_dims(ch.dim(), b.dim())?;
    let lhs = ch.apply_operator(a)?.trace_product(b).abs();
    let inv_d = T::one() / T::lit(ch.dim() as f64);
    let rhs = trace_norm(a)? * trace_norm(b)? * (a_upper + inv_d);
    let slack = T::lit(64.0) * T::epsilon() * T::one().max(rhs);
    Ok(lhs <= rhs + slack)
}
