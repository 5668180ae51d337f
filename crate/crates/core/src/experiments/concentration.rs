use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{concentration_tail_bound, BoundConstants};
use crate::channel::{build_random_channel, PureState};
use crate::error::{check_dims, Error, Result};
use crate::haar::RngStream;

/// Summary of the per-trial pair statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl StatSummary {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Empirical tail of the pair statistic against the bound `2 exp(-cδ²N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical_tail: f64,
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    pub statistic: StatSummary,
    pub seed: u64,
    pub stream_id: u64,
}

impl ConcentrationReport {
    /// Binomial standard deviation of the empirical tail if the true tail equaled the bound.
    pub fn binomial_sd_at_bound(&self) -> f64 {
        let p = self.bound.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Draws `trials` independent `N`-unitary channels (trial `t` from `rng.fork(t)`)
/// and counts how often `|pair_statistic(φ, ψ) - 1/d| ≥ δ/d`.
#[allow(clippy::too_many_arguments)]
pub fn run_concentration_trial(
    d: usize,
    n: usize,
    delta: f64,
    trials: usize,
    phi: &PureState<f64>,
    psi: &PureState<f64>,
    rng: &RngStream,
    consts: &BoundConstants,
) -> Result<ConcentrationReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if d == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("d = {d}, N = {n}")));
    }
    check_dims(d, phi.dim())?;
    check_dims(d, psi.dim())?;
    let bound = concentration_tail_bound(delta, n as u64, consts)?;
    let inv_d = 1.0 / d as f64;
    let threshold = delta / d as f64;

    let stats: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng.fork(t as u64);
            let ch = build_random_channel::<f64>(d, n, &mut stream)?;
            ch.pair_statistic(phi, psi)
        })
        .collect::<Result<_>>()?;

    let exceedances = stats.iter().filter(|&&s| (s - inv_d).abs() >= threshold).count();
    Ok(ConcentrationReport {
        d,
        n,
        delta,
        trials,
        exceedances,
        empirical_tail: exceedances as f64 / trials as f64,
        bound,
        vacuous: bound >= 1.0,
        statistic: StatSummary::of(&stats),
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}
