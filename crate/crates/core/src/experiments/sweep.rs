use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::item_stream;
use crate::certify::{paper_delta, verdict, Discretization, OptimizerParams, Verdict};
use crate::channel::build_random_channel;
use crate::error::{Error, Result};
use crate::haar::RngStream;
use crate::netcover::{build_delta_net, check_net_feasible, PureStateNet};

fn default_channels() -> usize {
    20
}

/// Grid of `(d, ε, N)` cells. Deserializable from the sweep grid JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub counts: Vec<usize>,
    #[serde(default = "default_channels")]
    pub channels_per_cell: usize,
    #[serde(default)]
    pub optimizer: OptimizerParams,
    /// Fixed consecutive-rejection stop for net building; `None` uses the adaptive default.
    #[serde(default)]
    pub stop_k: Option<usize>,
    /// Certify through the superoperator bound instead of skipping cells whose net is too large.
    #[serde(default)]
    pub implicit_when_infeasible: bool,
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.epsilons.is_empty() || self.counts.is_empty() {
            return Err(Error::InvalidParameter("sweep grid has an empty axis".into()));
        }
        if self.channels_per_cell == 0 {
            return Err(Error::InvalidParameter("channels_per_cell must be positive".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(format!("d = {d}")));
        }
        if let Some(&n) = self.counts.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidDimension(format!("N = {n}")));
        }
        for &e in &self.epsilons {
            paper_delta(e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed {
        frac_certified: f64,
        frac_not: f64,
        frac_undetermined: f64,
        mean_a_upper: f64,
        mean_a_lower: f64,
        /// `None` when certified through the superoperator bound.
        net_size: Option<usize>,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub d: usize,
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub channels: usize,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub cells: Vec<CellReport>,
}

/// Runs the verdict on `channels_per_cell` fresh channels in every cell.
///
/// One net per `(d, ε)` is shared by that row's cells. Channel `t` of cell `k`
/// is drawn from stream `item_stream(k, 2t)` and its optimizer from `item_stream(k, 2t + 1)`.
pub fn run_randomizing_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let seed = config.seed;
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    let mut net_index = 0u64;

    for &d in &config.dims {
        for &epsilon in &config.epsilons {
            let delta = paper_delta(epsilon)?;
            let net: std::result::Result<PureStateNet<f64>, String> = match check_net_feasible(d, delta) {
                Ok(()) => {
                    let mut rng = RngStream::new(seed, net_index);
                    build_delta_net(d, delta, &mut rng, config.stop_k).map_err(|e| e.to_string())
                }
                Err(e) => Err(e.to_string()),
            };
            net_index += 1;

            for &n in &config.counts {
                let k = cell_index;
                cell_index += 1;
                let disc = match (&net, config.implicit_when_infeasible) {
                    (Ok(net), _) => Discretization::Net(net),
                    (Err(_), true) => Discretization::Implicit { delta },
                    (Err(reason), false) => {
                        cells.push(CellReport {
                            d,
                            epsilon,
                            n,
                            delta,
                            channels: 0,
                            outcome: CellOutcome::Skipped { reason: reason.clone() },
                        });
                        continue;
                    }
                };
                let results: Vec<(Verdict, f64, f64)> = (0..config.channels_per_cell as u64)
                    .into_par_iter()
                    .map(|t| {
                        let mut ch_rng = RngStream::new(seed, item_stream(k, 2 * t));
                        let ch = build_random_channel::<f64>(d, n, &mut ch_rng)?;
                        let opt_rng = RngStream::new(seed, item_stream(k, 2 * t + 1));
                        let cert = verdict(&ch, epsilon, disc, &config.optimizer, &opt_rng)?;
                        Ok((cert.verdict, cert.a_upper, cert.a_lower))
                    })
                    .collect::<Result<_>>()?;
                let m = results.len() as f64;
                let frac = |v: Verdict| results.iter().filter(|r| r.0 == v).count() as f64 / m;
                cells.push(CellReport {
                    d,
                    epsilon,
                    n,
                    delta,
                    channels: results.len(),
                    outcome: CellOutcome::Completed {
                        frac_certified: frac(Verdict::CertifiedRandomizing),
                        frac_not: frac(Verdict::CertifiedNotRandomizing),
                        frac_undetermined: frac(Verdict::Undetermined),
                        mean_a_upper: results.iter().map(|r| r.1).sum::<f64>() / m,
                        mean_a_lower: results.iter().map(|r| r.2).sum::<f64>() / m,
                        net_size: net.as_ref().ok().map(|n| n.len()),
                    },
                });
            }
        }
    }
    Ok(SweepReport { seed, cells })
}
