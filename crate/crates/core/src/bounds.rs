//! Closed-form calculators: sample-size requirement, concentration tail, and the
//! failure-probability bound of the net argument. Everything is evaluated in the
//! log domain; nothing is clamped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the concentration tail `2 exp(-cδ²N)` and of the sample-size rule `N ≥ C d/ε² ln(1/ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c: 1.0 / (6.0 * std::f64::consts::LN_2), big_c: 150.0 }
    }
}

impl BoundConstants {
    pub fn new(c: f64, big_c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && big_c > 0.0 && big_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("constants must be positive: c = {c}, C = {big_c}")));
        }
        Ok(Self { c, big_c })
    }
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} outside (0, 1)")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::InvalidDimension("d must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `max(1, ⌈C d/ε² ln(1/ε)⌉)`, natural log.
pub fn required_n(d: usize, epsilon: f64, consts: &BoundConstants) -> Result<u64> {
    check_dim(d)?;
    check_open_unit("epsilon", epsilon)?;
    let n = consts.big_c * d as f64 / (epsilon * epsilon) * (1.0 / epsilon).ln();
    Ok((n.ceil() as u64).max(1))
}

/// `2 exp(-c δ² N)`.
pub fn concentration_tail_bound(delta: f64, n: u64, consts: &BoundConstants) -> Result<f64> {
    check_open_unit("delta", delta)?;
    Ok((std::f64::consts::LN_2 - consts.c * delta * delta * n as f64).exp())
}

/// `ln[2 (25/ε)^{4d} exp(-c ε² N / 25)]`.
pub fn failure_log_bound(d: usize, epsilon: f64, n: u64, consts: &BoundConstants) -> Result<f64> {
    check_dim(d)?;
    check_open_unit("epsilon", epsilon)?;
    Ok(std::f64::consts::LN_2 + 4.0 * d as f64 * (25.0 / epsilon).ln()
        - consts.c * epsilon * epsilon * n as f64 / 25.0)
}

/// Smallest `N` with [`failure_log_bound`] `< 0`.
pub fn min_n_for_success(d: usize, epsilon: f64, consts: &BoundConstants) -> Result<u64> {
    check_dim(d)?;
    check_open_unit("epsilon", epsilon)?;
    let threshold = 25.0 * (std::f64::consts::LN_2 + 4.0 * d as f64 * (25.0 / epsilon).ln())
        / (consts.c * epsilon * epsilon);
    let mut n = (threshold.floor() as u64 + 1).max(1);
    // settle rounding at the boundary against the bound itself
    while failure_log_bound(d, epsilon, n, consts)? >= 0.0 {
        n += 1;
    }
    while n > 1 && failure_log_bound(d, epsilon, n - 1, consts)? < 0.0 {
        n -= 1;
    }
    Ok(n)
}

/// Everything the `bounds` command reports for one `(d, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub d: usize,
    pub epsilon: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "required_N")]
    pub required_n: u64,
    #[serde(rename = "min_N_for_success")]
    pub min_n_for_success: u64,
    #[serde(rename = "failure_log_bound_at_required_N")]
    pub failure_log_bound_at_required_n: f64,
}

pub fn summarize(d: usize, epsilon: f64, consts: &BoundConstants) -> Result<BoundsSummary> {
    let required = required_n(d, epsilon, consts)?;
    Ok(BoundsSummary {
        d,
        epsilon,
        c: consts.c,
        big_c: consts.big_c,
        required_n: required,
        min_n_for_success: min_n_for_success(d, epsilon, consts)?,
        failure_log_bound_at_required_n: failure_log_bound(d, epsilon, required, consts)?,
    })
}
