//! Nets of pure states in trace distance: greedy construction and covering audits.


use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::channel::PureState;
use crate::error::{check_dims, Error, Result};
use crate::haar::RngStream;
use crate::scalar::Real;

/// Largest net the builder will attempt, as a natural log of its estimated size.
pub const MAX_NET_LOG_SIZE: f64 = 16.118_095_650_958_32; // ln(1e7)

/// Minimum consecutive-rejection budget of the default stop rule.
pub const DEFAULT_STOP_FLOOR: usize = 1000;
/// Per-kept-state factor of the default stop rule.
pub const DEFAULT_STOP_FACTOR: usize = 20;

const AUDIT_CHUNK: usize = 1024;

/// `‖xx† - yy†‖₁ = 2√(1 - |⟨x|y⟩|²)`.
pub fn trace_distance_pure<T: Real>(x: &PureState<T>, y: &PureState<T>) -> Result<T> {
    check_dims(x.dim(), y.dim())?;
    Ok(trace_distance_unchecked(x, y))
}

/// `1 - |⟨x|y⟩|²` through the Lagrange identity `Σ_{i<j} |x_i y_j - x_j y_i|²`,
/// which has no cancellation when `x ≈ y`.
#[inline]
fn trace_distance_unchecked<T: Real>(x: &PureState<T>, y: &PureState<T>) -> T {
    let (a, b) = (x.amplitudes(), y.amplitudes());
    let mut s = T::zero();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            s = s + (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    T::lit(2.0) * s.sqrt()
}

/// `ln (5/δ)^{2d}`, the log of the cardinality guaranteed for some δ-net.
pub fn log_cardinality_bound(d: usize, delta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(2.0 * d as f64 * (5.0 / delta).ln())
}

/// Log of an upper estimate of the greedy `δ/2`-separated set size.
///
/// A pure-state ball of trace radius `r` has normalized volume `(r/2)^{2(d-1)}`;
/// disjoint balls of radius `δ/4` around the kept states give `(8/δ)^{2(d-1)}`.
pub fn log_net_size_estimate(d: usize, delta: f64) -> f64 {
    2.0 * (d.saturating_sub(1)) as f64 * (8.0 / delta).ln()
}

/// Error unless a net at `(d, delta)` fits under [`MAX_NET_LOG_SIZE`].
pub fn check_net_feasible(d: usize, delta: f64) -> Result<()> {
    let est = log_net_size_estimate(d, delta);
    if est > MAX_NET_LOG_SIZE {
        return Err(Error::Infeasible(format!(
            "net at d = {d}, delta = {delta} would hold about e^{est:.1} states (limit e^{MAX_NET_LOG_SIZE:.1})"
        )));
    }
    Ok(())
}

/// A finite set of pure states, pairwise at least `delta/2` apart, meant to cover every pure state within `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateNet<T> {
    pub dim: usize,
    pub delta: T,
    pub states: Vec<PureState<T>>,
    pub seed: Option<u64>,
    /// Consecutive-rejection threshold in force when the builder stopped.
    pub stop_k: usize,
    /// Candidates rejected over the whole build.
    pub rejections: usize,
}

impl<T: Real> PureStateNet<T> {
    /// Wraps an explicit list of states. Separation is not checked here; see [`verify_separation`].
    pub fn from_states(delta: T, states: Vec<PureState<T>>) -> Result<Self> {
        let dim = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("a net needs at least one state".into()))?
            .dim();
        for s in &states {
            check_dims(dim, s.dim())?;
        }
        if !(delta > T::zero() && delta <= T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 2]")));
        }
        Ok(Self { dim, delta, states, seed: None, stop_k: 0, rejections: 0 })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Real coordinates of `xx†` used for bucketing. Euclidean distance between
/// coordinates never exceeds `‖xx† - yy†‖₂ = ‖xx† - yy†‖₁ / √2`.
fn coords<T: Real>(x: &PureState<T>) -> [f64; 3] {
    let a = x.amplitudes();
    let p00 = a[0].norm_sqr().to_f64_lossy();
    if a.len() == 1 {
        return [p00, 0.0, 0.0];
    }
    let p01 = a[0] * a[1].conj();
    let s = std::f64::consts::SQRT_2;
    [p00, s * p01.re.to_f64_lossy(), s * p01.im.to_f64_lossy()]
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Grid bucketing of net states on projected coordinates.
struct NetIndex {
    cell: f64,
    buckets: FxHashMap<[i64; 3], Vec<usize>>,
}

impl NetIndex {
    fn new(cell: f64) -> Self {
        Self { cell, buckets: FxHashMap::default() }
    }

    fn key(&self, c: &[f64; 3]) -> [i64; 3] {
        [
            (c[0] / self.cell).floor() as i64,
            (c[1] / self.cell).floor() as i64,
            (c[2] / self.cell).floor() as i64,
        ]
    }

    fn insert(&mut self, c: &[f64; 3], id: usize) {
        let k = self.key(c);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Calls `f` on every id in a bucket meeting the box of half-width `radius` around `c`;
    /// stops early when `f` returns true.
    fn visit(&self, c: &[f64; 3], radius: f64, mut f: impl FnMut(usize) -> bool) -> bool {
        let lo = self.key(&[c[0] - radius, c[1] - radius, c[2] - radius]);
        let hi = self.key(&[c[0] + radius, c[1] + radius, c[2] + radius]);
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                for e in lo[2]..=hi[2] {
                    if let Some(ids) = self.buckets.get(&[a, b, e]) {
                        for &id in ids {
                            if f(id) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

/// Greedy random packing: keep a uniform candidate iff it is at least `delta/2`
/// from every kept state; stop after `stop_k` consecutive rejections (default
/// `max(1000, 20·|kept|)`, re-evaluated as the set grows).
pub fn build_delta_net<T: Real>(
    d: usize,
    delta: T,
    rng: &mut RngStream,
    stop_k: Option<usize>,
) -> Result<PureStateNet<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be at least 1".into()));
    }
    let delta_f = delta.to_f64_lossy();
    if !(delta_f > 0.0 && delta_f <= 2.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta_f} outside (0, 2]")));
    }
    if stop_k == Some(0) {
        return Err(Error::InvalidParameter("stop_k must be positive".into()));
    }
    check_net_feasible(d, delta_f)?;

    let seed = rng.seed();
    let half = delta / T::lit(2.0);
    let radius = delta_f / (2.0 * std::f64::consts::SQRT_2);
    let mut index = NetIndex::new(2.0 * radius);
    let r_sq = radius * radius * (1.0 + 1e-9);
    let mut states: Vec<PureState<T>> = Vec::new();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut consecutive = 0usize;
    let mut rejections = 0usize;
    let threshold = |kept: usize| {
        stop_k.unwrap_or_else(|| DEFAULT_STOP_FLOOR.max(DEFAULT_STOP_FACTOR * kept))
    };

    while consecutive < threshold(states.len()) {
        let cand = PureState::random(d, rng)?;
        let c = coords(&cand);
        let blocked = index.visit(&c, radius, |id| {
            dist_sq(&c, &points[id]) < r_sq && trace_distance_unchecked(&states[id], &cand) < half
        });
        if blocked {
            consecutive += 1;
            rejections += 1;
        } else {
            index.insert(&c, states.len());
            points.push(c);
            states.push(cand);
            consecutive = 0;
        }
    }

    Ok(PureStateNet {
        dim: d,
        delta,
        stop_k: threshold(states.len()),
        states,
        seed: Some(seed),
        rejections,
    })
}

/// True iff every pair of distinct net states is at least `delta/2` apart.
pub fn verify_separation<T: Real>(net: &PureStateNet<T>) -> bool {
    let half = net.delta / T::lit(2.0);
    let states = &net.states;
    (0..states.len()).into_par_iter().all(|i| {
        states[i + 1..]
            .iter()
            .all(|y| trace_distance_unchecked(&states[i], y) >= half)
    })
}

/// Outcome of a Monte Carlo covering audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub trials: usize,
    pub delta: f64,
    pub net_size: usize,
    /// Largest nearest-net distance seen.
    pub max_gap: f64,
    /// Trials whose nearest net state was farther than `delta`.
    pub failures: usize,
}

/// Samples `trials` uniform pure states and measures each one's distance to the net.
pub fn audit_covering<T: Real>(
    net: &PureStateNet<T>,
    trials: usize,
    rng: &RngStream,
) -> Result<CoverageReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if net.is_empty() {
        return Err(Error::InvalidParameter("empty net".into()));
    }
    let delta_f = net.delta.to_f64_lossy();
    let radius = delta_f / std::f64::consts::SQRT_2;
    let mut index = NetIndex::new(radius);
    for (i, s) in net.states.iter().enumerate() {
        index.insert(&coords(s), i);
    }

    let chunks = trials.div_ceil(AUDIT_CHUNK);
    let per_chunk: Vec<Result<(f64, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut r = rng.fork(ci as u64);
            let n = AUDIT_CHUNK.min(trials - ci * AUDIT_CHUNK);
            let mut max_gap = 0.0f64;
            let mut failures = 0usize;
            for _ in 0..n {
                let x = PureState::<T>::random(net.dim, &mut r)?;
                let gap = nearest_distance(net, &index, radius, &x);
                if gap > delta_f {
                    failures += 1;
                }
                max_gap = max_gap.max(gap);
            }
            Ok((max_gap, failures))
        })
        .collect();

    let mut max_gap = 0.0f64;
    let mut failures = 0usize;
    for r in per_chunk {
        let (g, f) = r?;
        max_gap = max_gap.max(g);
        failures += f;
    }
    Ok(CoverageReport { trials, delta: delta_f, net_size: net.len(), max_gap, failures })
}

fn nearest_distance<T: Real>(
    net: &PureStateNet<T>,
    index: &NetIndex,
    radius: f64,
    x: &PureState<T>,
) -> f64 {
    let mut best = f64::INFINITY;
    index.visit(&coords(x), radius, |id| {
        best = best.min(trace_distance_unchecked(&net.states[id], x).to_f64_lossy());
        false
    });
    if best <= net.delta.to_f64_lossy() {
        return best;
    }
    // nothing within delta: exhaustive search for the true gap
    net.states
        .iter()
        .map(|s| trace_distance_unchecked(s, x).to_f64_lossy())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn ket(d: usize, k: usize) -> PureState<f64> {
        PureState::basis(d, k).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(trace_distance_pure(&ket(2, 0), &ket(2, 0)).unwrap(), 0.0);
        assert_eq!(trace_distance_pure(&ket(2, 0), &ket(2, 1)).unwrap(), 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap();
        let d = trace_distance_pure(&ket(2, 0), &plus).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert!(trace_distance_pure(&ket(2, 0), &ket(3, 0)).is_err());
    }

    #[test]
    fn cardinality_bound_examples() {
        assert!((log_cardinality_bound(2, 0.5).unwrap() - 4.0 * 10f64.ln()).abs() < 1e-12);
        assert!((log_cardinality_bound(1, 0.2).unwrap() - 6.437_751_649_736_401).abs() < 1e-12);
        assert!(log_cardinality_bound(2, 1.0).is_err());
        assert!(log_cardinality_bound(2, 5.0).is_err());
        assert!(log_cardinality_bound(2, 0.0).is_err());
    }

    #[test]
    fn one_dimensional_net_is_a_single_state() {
        let net = build_delta_net::<f64>(1, 0.5, &mut RngStream::new(1, 0), None).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.rejections, DEFAULT_STOP_FLOOR);
    }

    #[test]
    fn wide_radius_net_is_small_but_covers() {
        let net = build_delta_net::<f64>(2, 1.9, &mut RngStream::new(2, 0), None).unwrap();
        assert!(net.len() <= 10, "{}", net.len());
        let rep = audit_covering(&net, 2000, &RngStream::new(3, 0)).unwrap();
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn separated_and_bounded() {
        let net = build_delta_net::<f64>(2, 0.5, &mut RngStream::new(4, 0), None).unwrap();
        assert!(verify_separation(&net));
        assert!((net.len() as f64).ln() <= log_cardinality_bound(2, 0.5).unwrap());
        let again = build_delta_net::<f64>(2, 0.5, &mut RngStream::new(4, 0), None).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn basis_net_with_radius_two_never_fails() {
        let net = PureStateNet::from_states(2.0, vec![ket(2, 0), ket(2, 1)]).unwrap();
        let rep = audit_covering(&net, 1000, &RngStream::new(5, 0)).unwrap();
        assert_eq!(rep.failures, 0);
        assert!(rep.max_gap <= 2.0);
    }

    #[test]
    fn undersized_net_is_caught() {
        let net = PureStateNet::from_states(0.1, vec![ket(2, 0)]).unwrap();
        let rep = audit_covering(&net, 10_000, &RngStream::new(6, 0)).unwrap();
        assert!(rep.failures > 9_000, "{}", rep.failures);
    }

    #[test]
    fn parameter_validation() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(build_delta_net::<f64>(2, 0.0, &mut rng, None), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_delta_net::<f64>(2, 2.5, &mut rng, None), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_delta_net::<f64>(0, 0.5, &mut rng, None), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_delta_net::<f64>(6, 0.1, &mut rng, None), Err(Error::Infeasible(_))));
        let net = PureStateNet::from_states(0.5, vec![ket(2, 0)]).unwrap();
        assert!(audit_covering(&net, 0, &rng).is_err());
        assert!(PureStateNet::<f64>::from_states(0.5, vec![]).is_err());
    }

    #[test]
    fn fixed_stop_rule_is_recorded() {
        let net = build_delta_net::<f64>(2, 0.8, &mut RngStream::new(7, 0), Some(50)).unwrap();
        assert_eq!(net.stop_k, 50);
    }
}
