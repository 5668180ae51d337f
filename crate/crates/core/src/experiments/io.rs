//! JSON and CSV formats for channels, nets, certificates and experiment reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ConcentrationReport, CellOutcome, SweepReport};
use crate::certify::{BSource, DeviationCertificate, Timings, Verdict};
use crate::channel::{ChannelKind, Provenance, PureState, RandomUnitaryChannel};
use crate::error::{Error, Result};
use crate::haar::UnitaryMatrix;
use crate::linalg::ComplexMatrix;
use crate::netcover::PureStateNet;

pub const CHANNEL_SCHEMA: &str = "ruc-1";

pub const CONCENTRATION_CSV_HEADER: &str = "d,N,delta,trials,empirical_tail,bound,vacuous,seed";
pub const SWEEP_CSV_HEADER: &str =
    "d,epsilon,N,channels,frac_certified,frac_not,frac_undetermined,mean_A_upper,mean_A_lower,seed";

type Pair = [f64; 2];

fn pairs(v: &[Complex<f64>]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn complexes(v: &[Pair]) -> Vec<Complex<f64>> {
    v.iter().map(|p| Complex::new(p[0], p[1])).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    schema: String,
    dim: usize,
    count: usize,
    seed: Option<u64>,
    unitaries: Vec<Vec<Pair>>,
}

/// Channel JSON: `{schema, dim, count, seed, unitaries}`, each unitary a row-major list of `[re, im]`.
pub fn channel_to_json(ch: &RandomUnitaryChannel<f64>) -> String {
    let file = ChannelFile {
        schema: CHANNEL_SCHEMA.into(),
        dim: ch.dim(),
        count: ch.count(),
        seed: ch.provenance().seed,
        unitaries: ch.unitaries().iter().map(|u| pairs(u.matrix().as_slice())).collect(),
    };
    serde_json::to_string(&file).expect("channel serializes")
}

pub fn channel_from_json(text: &str) -> Result<RandomUnitaryChannel<f64>> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    if file.schema != CHANNEL_SCHEMA {
        return Err(Error::ParseError(format!("unsupported schema {:?}", file.schema)));
    }
    if file.dim == 0 || file.count == 0 || file.unitaries.len() != file.count {
        return Err(Error::ParseError(format!(
            "dim {} / count {} does not match {} unitaries",
            file.dim,
            file.count,
            file.unitaries.len()
        )));
    }
    let unitaries = file
        .unitaries
        .iter()
        .enumerate()
        .map(|(i, entries)| {
            if entries.len() != file.dim * file.dim {
                return Err(Error::ParseError(format!(
                    "unitary {i} has {} entries, expected {}",
                    entries.len(),
                    file.dim * file.dim
                )));
            }
            let m = ComplexMatrix::new(file.dim, file.dim, complexes(entries))?;
            UnitaryMatrix::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    RandomUnitaryChannel::from_unitaries(
        unitaries,
        Provenance { kind: ChannelKind::Loaded, seed: file.seed, stream_id: None },
    )
}

pub fn save_channel(path: &Path, ch: &RandomUnitaryChannel<f64>) -> Result<()> {
    fs::write(path, channel_to_json(ch))?;
    Ok(())
}

pub fn load_channel(path: &Path) -> Result<RandomUnitaryChannel<f64>> {
    channel_from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetFile {
    dim: usize,
    delta: f64,
    states: Vec<Vec<Pair>>,
    seed: Option<u64>,
    stop_k: usize,
}

/// Net JSON: `{dim, delta, states, seed, stop_k}`.
pub fn net_to_json(net: &PureStateNet<f64>) -> String {
    let file = NetFile {
        dim: net.dim,
        delta: net.delta,
        states: net.states.iter().map(|s| pairs(s.amplitudes())).collect(),
        seed: net.seed,
        stop_k: net.stop_k,
    };
    serde_json::to_string(&file).expect("net serializes")
}

pub fn net_from_json(text: &str) -> Result<PureStateNet<f64>> {
    let file: NetFile = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    let states = file
        .states
        .iter()
        .map(|s| {
            if s.len() != file.dim {
                return Err(Error::ParseError(format!("state of length {} in dimension {}", s.len(), file.dim)));
            }
            PureState::new(complexes(s))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut net = PureStateNet::from_states(file.delta, states)?;
    net.seed = file.seed;
    net.stop_k = file.stop_k;
    Ok(net)
}

pub fn save_net(path: &Path, net: &PureStateNet<f64>) -> Result<()> {
    fs::write(path, net_to_json(net))?;
    Ok(())
}

pub fn load_net(path: &Path) -> Result<PureStateNet<f64>> {
    net_from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Serialize)]
struct Witnesses {
    phi: Vec<Pair>,
    psi: Vec<Pair>,
}

#[derive(Debug, Serialize)]
struct CertificateFile<'a> {
    dim: usize,
    count: usize,
    delta: f64,
    #[serde(rename = "B")]
    b: f64,
    b_source: &'a BSource,
    #[serde(rename = "A_upper")]
    a_upper: f64,
    #[serde(rename = "A_lower")]
    a_lower: f64,
    superoperator_bound: f64,
    epsilon: f64,
    threshold: f64,
    verdict: Verdict,
    witnesses: Witnesses,
    timings: Option<&'a Timings>,
}

/// Certificate JSON. Timings are wall-clock and therefore only written when asked for.
pub fn certificate_to_json(cert: &DeviationCertificate<f64>, include_timings: bool) -> String {
    let file = CertificateFile {
        dim: cert.dim,
        count: cert.count,
        delta: cert.delta,
        b: cert.b,
        b_source: &cert.b_source,
        a_upper: cert.a_upper,
        a_lower: cert.a_lower,
        superoperator_bound: cert.superoperator_bound,
        epsilon: cert.epsilon,
        threshold: cert.threshold(),
        verdict: cert.verdict,
        witnesses: Witnesses {
            phi: pairs(cert.witness_phi.amplitudes()),
            psi: pairs(cert.witness_psi.amplitudes()),
        },
        timings: include_timings.then_some(&cert.timings),
    };
    serde_json::to_string_pretty(&file).expect("certificate serializes")
}

/// Parses any JSON document; handy for callers validating written files.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
}

pub fn concentration_csv(reports: &[ConcentrationReport]) -> String {
    let mut out = String::from(CONCENTRATION_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.d, r.n, r.delta, r.trials, r.empirical_tail, r.bound, r.vacuous, r.seed
        );
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        match &c.outcome {
            CellOutcome::Completed { frac_certified, frac_not, frac_undetermined, mean_a_upper, mean_a_lower, .. } => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    c.d,
                    c.epsilon,
                    c.n,
                    c.channels,
                    frac_certified,
                    frac_not,
                    frac_undetermined,
                    mean_a_upper,
                    mean_a_lower,
                    report.seed
                );
            }
            CellOutcome::Skipped { .. } => {
                let _ = writeln!(out, "{},{},{},0,,,,,,{}", c.d, c.epsilon, c.n, report.seed);
            }
        }
    }
    out
}
