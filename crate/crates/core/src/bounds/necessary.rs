//! Finite-horizon necessary-condition terms and the information-density
//! functionals they are built from.

use super::{validate_necessary_params, BoundParams, BoundReport};
use crate::dist::JointDist;
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;

/// Inner conditional log-expectations are clamped here before the outer
/// power; any report produced from a clamped evaluation is flagged.
const INNER_LOG_CLAMP: f64 = -700.0;

/// log E[ E[exp(c · i(X;Y)) | Y]^q ] over positive-mass atoms.
///
/// Returns the log value and whether the clamp fired. The inner expectation
/// for a given y runs over x with P(x,y) > 0; zero-mass pairs contribute
/// nothing to either expectation.
pub(crate) fn log_outer_inner_expectation(j: &JointDist, c: f64, q: f64) -> (f64, bool) {
    let ny = j.y_support().len();
    let log_px = j.log_marginal_x();
    let log_py = j.log_marginal_y();
    let mut outer = Vec::with_capacity(ny);
    let mut clamped = false;
    let mut inner = Vec::new();
    for yi in 0..ny {
        inner.clear();
        let ly = log_py[yi];
        for (xi, &lx) in log_px.iter().enumerate() {
            let lxy = j.log_mass_at(xi, yi);
            if lxy == f64::NEG_INFINITY {
                continue;
            }
            let density = lxy - lx - ly;
            inner.push((lxy - ly) + c * density);
        }
        let mut scaled = q * log_sum_exp(&inner);
        if scaled < INNER_LOG_CLAMP {
            scaled = INNER_LOG_CLAMP;
            clamped = true;
        }
        outer.push(ly + scaled);
    }
    (log_sum_exp(&outer), clamped)
}

/// Both sides of the per-horizon necessary condition.
#[derive(Debug, Clone, Copy)]
pub struct NecessaryTerms {
    /// −(1/(ρt)) · log E[ E[e^{−(ρ/q)·i(X_t;Y_{1:t})} | Y_{1:t}]^q ]
    pub lhs: f64,
    /// (1/t) · H_α(X_t) with α = (q−1)/(q−ρ−1)
    pub rhs: f64,
    pub alpha: f64,
    pub clamped: bool,
}

impl NecessaryTerms {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluate the necessary-condition terms on an exact joint of
/// (X_t, Y_{1:t}). Trackability requires lhs ≥ rhs in the limit; at finite t
/// the pair is reported as a profile point, never extrapolated.
pub fn necessary_terms(j: &JointDist, rho: f64, q: f64, t: u32) -> Result<NecessaryTerms> {
    let alpha = validate_necessary_params(rho, q)?;
    if t == 0 {
        return Err(Error::parameter("t must be ≥ 1"));
    }
    let (log_outer, clamped) = log_outer_inner_expectation(j, -rho / q, q);
    let lhs = -log_outer / (rho * t as f64);
    let (marginal_x, _) = crate::dist::marginals(j);
    let rhs = marginal_x.renyi_entropy(alpha)? / t as f64;
    Ok(NecessaryTerms {
        lhs,
        rhs,
        alpha,
        clamped,
    })
}

/// (1/(ρt)) · log E[exp(ρ · i(X_{1:t};Y_{1:t}))], the normalized log
/// moment-generating function of the information density at horizon t.
pub fn gartner_ellis_value(j: &JointDist, rho: f64, t: u32) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    if t == 0 {
        return Err(Error::parameter("t must be ≥ 1"));
    }
    Ok(log_mgf_density(j, rho) / (rho * t as f64))
}

/// log E[exp(c·i)] over positive-mass atoms.
fn log_mgf_density(j: &JointDist, c: f64) -> f64 {
    let log_px = j.log_marginal_x();
    let log_py = j.log_marginal_y();
    let mut terms = Vec::with_capacity(j.x_support().len() * j.y_support().len());
    for (xi, &lx) in log_px.iter().enumerate() {
        for (yi, &ly) in log_py.iter().enumerate() {
            let lxy = j.log_mass_at(xi, yi);
            if lxy == f64::NEG_INFINITY {
                continue;
            }
            terms.push(lxy + c * (lxy - lx - ly));
        }
    }
    log_sum_exp(&terms)
}

/// The Jensen chain connecting the reliability-function form to the
/// moment-generating form:
/// E[E[e^{−(ρ/(1+ρ))·i}|Y]^{1+ρ}]^{−1} ≤ E[e^{ρ·i}].
/// Comparison happens in the log domain; the report carries linear values.
pub fn jensen_chain_check(
    j: &JointDist,
    rho: f64,
    provenance: impl Into<String>,
) -> Result<BoundReport> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    let (log_outer, clamped) = log_outer_inner_expectation(j, -rho / (1.0 + rho), 1.0 + rho);
    let log_lhs = -log_outer;
    let log_rhs = log_mgf_density(j, rho);
    // Oriented as rhs − lhs ≥ 0: report lhs := E[e^{ρi}], rhs := the
    // reciprocal reliability term.
    let mut report = BoundReport::new(
        "jensen_chain",
        log_rhs.exp(),
        log_lhs.exp(),
        BoundParams::default().with_rho(rho),
        provenance,
    );
    report.clamped = clamped;
    Ok(report)
}

/// Reverse-Hölder split of the conditional Rényi power, checked pointwise
/// in y and reported at the worst history:
/// E[P(X|Y)^{−ρ/(ρ+1)}|Y]^{ρ+1}
///   ≥ E[e^{−(ρ/(p(ρ+1)))·i}|Y]^{p(ρ+1)} · E[P_X(X)^{ρ/((p−1)(ρ+1))}|Y]^{(1−p)(ρ+1)}.
pub fn reverse_holder_check(
    j: &JointDist,
    rho: f64,
    p: f64,
    provenance: impl Into<String>,
) -> Result<BoundReport> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    if !(p > 1.0) {
        return Err(Error::parameter(format!("Hölder exponent p = {p} must be > 1")));
    }
    let log_px = j.log_marginal_x();
    let log_py = j.log_marginal_y();
    let mut worst: Option<(f64, f64)> = None;
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    let mut t3 = Vec::new();
    for (yi, &ly) in log_py.iter().enumerate() {
        t1.clear();
        t2.clear();
        t3.clear();
        for (xi, &lx) in log_px.iter().enumerate() {
            let lxy = j.log_mass_at(xi, yi);
            if lxy == f64::NEG_INFINITY {
                continue;
            }
            let lcond = lxy - ly;
            let density = lxy - lx - ly;
            t1.push(lcond / (rho + 1.0));
            t2.push(lcond - rho / (p * (rho + 1.0)) * density);
            t3.push(lcond + rho / ((p - 1.0) * (rho + 1.0)) * lx);
        }
        let log_lhs = (rho + 1.0) * log_sum_exp(&t1);
        let log_rhs =
            p * (rho + 1.0) * log_sum_exp(&t2) + (1.0 - p) * (rho + 1.0) * log_sum_exp(&t3);
        let margin = log_lhs - log_rhs;
        if worst.map_or(true, |(m, _)| margin < m) {
            worst = Some((margin, log_rhs));
        }
        let _ = yi;
    }
    let (margin, log_rhs) = worst.ok_or_else(|| Error::domain("joint has no y support"))?;
    Ok(BoundReport::new(
        "reverse_holder",
        (margin + log_rhs).exp(),
        log_rhs.exp(),
        BoundParams::default().with_rho(rho).with_p(p),
        provenance,
    ))
}
