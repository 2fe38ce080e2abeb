//! Evaluators for every inequality the trackability calculus asserts:
//! moment-entropy bounds, finite-horizon necessary conditions, Gallager's
//! reliability function and its maximization, anytime-capacity checks, and
//! the MAP / ρ-estimator sufficient conditions.
//!
//! Orientation convention: every check reports `slack = lhs − rhs` arranged
//! so slack ≥ 0 means the asserted inequality holds. Expectations over
//! information density restrict to positive-mass atoms; products of many
//! probabilities stay in the log domain and are exponentiated once at the
//! reporting boundary.

mod gallager;
mod moment_entropy;
mod necessary;
mod sufficient;

pub use gallager::{anytime_bound_check, e0_maximize, gallager_e0, gallager_e0_joint, E0Form};
pub use moment_entropy::{moment_entropy_bounded, moment_entropy_zeta};
pub use necessary::{
    gartner_ellis_value, jensen_chain_check, necessary_terms, reverse_holder_check, NecessaryTerms,
};
pub use sufficient::{map_error_bound, sufficient_map_value, sufficient_rho_value, RhoSufficiency};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Free parameters of the bound family; each check validates the subset it
/// actually uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Moment order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Outer power in the necessary condition; admissible iff q > ρ + 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Hölder exponent, > 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Zeta argument, > 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Power of |x−x'| used as the integer distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_power: Option<u32>,
}

impl BoundParams {
    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_metric_power(mut self, mp: u32) -> Self {
        self.metric_power = Some(mp);
        self
    }

    /// Rényi order induced by (ρ, q): (q−1)/(q−ρ−1), > 1 whenever q > ρ+1.
    pub fn alpha(&self) -> Option<f64> {
        match (self.rho, self.q) {
            (Some(rho), Some(q)) if q > rho + 1.0 => Some((q - 1.0) / (q - rho - 1.0)),
            _ => None,
        }
    }
}

/// Admissibility for the necessary-condition family: ρ > 0 and q > ρ + 1.
/// Returns the induced Rényi order α.
pub fn validate_necessary_params(rho: f64, q: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    if !(q > rho + 1.0) {
        return Err(Error::parameter(format!(
            "q = {q} must exceed ρ + 1 = {}; the induced Rényi order is undefined otherwise",
            rho + 1.0
        )));
    }
    Ok((q - 1.0) / (q - rho - 1.0))
}

/// Outcome of one verified inequality.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs − rhs; ≥ 0 means the asserted inequality holds.
    pub slack: f64,
    pub params: BoundParams,
    pub t: Option<u32>,
    /// Instance digest or description for reproducing the check.
    pub provenance: String,
    /// True when an inner log-expectation hit the −700 nat clamp; such
    /// reports are flagged rather than silently trusted.
    pub clamped: bool,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        params: BoundParams,
        provenance: impl Into<String>,
    ) -> BoundReport {
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            slack: lhs - rhs,
            params,
            t: None,
            provenance: provenance.into(),
            clamped: false,
        }
    }

    pub fn at_time(mut self, t: u32) -> Self {
        self.t = Some(t);
        self
    }

    pub fn holds(&self, tolerance: f64) -> bool {
        self.slack >= -tolerance
    }
}
