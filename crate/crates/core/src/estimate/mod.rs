//! Estimator constructions and their tie-breaking rules.
//!
//! A policy is a pure function of the conditional law of the state given the
//! observation history (hence of the history itself), plus explicit tie
//! randomness. MAP picks a mode; the ρ-estimator picks a point whose
//! conditional mass dominates every competitor proportionally to
//! |distance|^ρ, with J the largest such domination constant.

mod moments;

pub use moments::{error_moment_exact, error_moment_mc, ErrorStats, MomentMethod};

use crate::dist::{IntegerPmf, ObservationLabel};
use crate::error::{Error, Result};
use crate::numerics::SeedSpec;
use rand::Rng;
use std::collections::BTreeMap;

/// How a policy resolves ties between equally good estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    /// Deterministic replay: smallest candidate wins.
    LowestValue,
    /// Uniform choice over the candidate set, keyed by an explicit seed.
    SeededUniform(SeedSpec),
}

/// What a policy proposes before tie resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyValue {
    /// A single real-valued estimate.
    Real(f64),
    /// A non-empty set of equally preferred integer estimates.
    TieSet(Vec<i64>),
}

#[derive(Debug, Clone)]
pub enum PolicyKind {
    /// argmax of the conditional law.
    Map,
    /// Member of the distance-domination set A for this exponent.
    Rho { rho: f64 },
    /// Ceiling-quantized version of another policy.
    CeilingOf(Box<PolicyKind>),
    /// Explicit real-valued table keyed by observation history.
    Custom { table: BTreeMap<ObservationLabel, f64> },
}

#[derive(Debug, Clone)]
pub struct EstimatorPolicy {
    pub kind: PolicyKind,
    pub tie_rule: TieRule,
}

impl EstimatorPolicy {
    pub fn map() -> EstimatorPolicy {
        EstimatorPolicy {
            kind: PolicyKind::Map,
            tie_rule: TieRule::LowestValue,
        }
    }

    pub fn rho(rho: f64) -> EstimatorPolicy {
        EstimatorPolicy {
            kind: PolicyKind::Rho { rho },
            tie_rule: TieRule::LowestValue,
        }
    }

    pub fn with_tie_rule(mut self, tie_rule: TieRule) -> EstimatorPolicy {
        self.tie_rule = tie_rule;
        self
    }

    /// Candidate estimate(s) before tie resolution.
    pub fn propose(&self, cond: &IntegerPmf, y: &ObservationLabel) -> Result<PolicyValue> {
        Self::propose_kind(&self.kind, cond, y)
    }

    fn propose_kind(kind: &PolicyKind, cond: &IntegerPmf, y: &ObservationLabel) -> Result<PolicyValue> {
        match kind {
            PolicyKind::Map => Ok(PolicyValue::TieSet(argmax_set(cond))),
            PolicyKind::Rho { rho } => {
                let (_, set) = j_value(cond, *rho)?;
                Ok(PolicyValue::TieSet(set))
            }
            PolicyKind::CeilingOf(inner) => Ok(match Self::propose_kind(inner, cond, y)? {
                PolicyValue::Real(v) => PolicyValue::TieSet(vec![ceiling_quantize(v)]),
                PolicyValue::TieSet(set) => {
                    let mut ceils: Vec<i64> = set.into_iter().collect();
                    ceils.dedup();
                    PolicyValue::TieSet(ceils)
                }
            }),
            PolicyKind::Custom { table } => table
                .get(y)
                .map(|&v| PolicyValue::Real(v))
                .ok_or_else(|| Error::validation("policy.table", format!("no entry for history {y}"))),
        }
    }

    /// The resolved (real-valued) estimate for one observation history.
    pub fn estimate(&self, cond: &IntegerPmf, y: &ObservationLabel) -> Result<f64> {
        Ok(match self.propose(cond, y)? {
            PolicyValue::Real(v) => v,
            PolicyValue::TieSet(set) => resolve_tie(&set, self.tie_rule) as f64,
        })
    }
}

fn resolve_tie(set: &[i64], tie_rule: TieRule) -> i64 {
    debug_assert!(!set.is_empty());
    match tie_rule {
        TieRule::LowestValue => set[0],
        TieRule::SeededUniform(seed) => {
            let mut rng = seed.rng();
            set[rng.random_range(0..set.len())]
        }
    }
}

fn argmax_set(cond: &IntegerPmf) -> Vec<i64> {
    let best = cond
        .log_masses()
        .iter()
        .map(|l| l.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    cond.iter()
        .filter(|&(_, l)| l >= best - 1e-12)
        .map(|(x, _)| x)
        .collect()
}

/// MAP estimate: argmax of the conditional, ties per `tie_rule`.
pub fn map_estimate(cond: &IntegerPmf, tie_rule: TieRule) -> i64 {
    resolve_tie(&argmax_set(cond), tie_rule)
}

/// Smallest integer ≥ x.
pub fn ceiling_quantize(x: f64) -> i64 {
    x.ceil() as i64
}

/// The domination constant J and its achieving set A.
///
/// For each supported x, score(x) = min over supported x' ≠ x of
/// (p(x)/p(x')) / |x−x'|^ρ, with the empty minimum equal to +∞ (singleton
/// supports have no competing atom). J is the largest score, and A collects
/// the achievers, so A is exactly the distance-domination set evaluated at
/// its own break-even constant. Off-support competitors impose no constraint
/// because a ratio with zero denominator is +∞ by convention.
pub fn j_value(cond: &IntegerPmf, rho: f64) -> Result<(f64, Vec<i64>)> {
    let (log_j, set) = j_value_log(cond, rho)?;
    Ok((log_j.exp(), set))
}

/// Log-domain variant of [`j_value`]; bound evaluators consume this form.
pub fn j_value_log(cond: &IntegerPmf, rho: f64) -> Result<(f64, Vec<i64>)> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    let atoms: Vec<(i64, f64)> = cond.iter().collect();
    if atoms.len() == 1 {
        return Ok((f64::INFINITY, vec![atoms[0].0]));
    }
    let mut scores = Vec::with_capacity(atoms.len());
    for &(x, lx) in &atoms {
        let mut score = f64::INFINITY;
        for &(x2, lx2) in &atoms {
            if x2 == x {
                continue;
            }
            let dist = (x - x2).unsigned_abs() as f64;
            let s = lx - lx2 - rho * dist.ln();
            if s < score {
                score = s;
            }
        }
        scores.push((x, score));
    }
    let log_j = scores
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let set: Vec<i64> = scores
        .iter()
        .filter(|&&(_, s)| s >= log_j - 1e-12)
        .map(|&(x, _)| x)
        .collect();
    Ok((log_j, set))
}

/// A member of A(ρ) for this conditional, ties per `tie_rule`.
pub fn rho_estimate(cond: &IntegerPmf, rho: f64, tie_rule: TieRule) -> Result<i64> {
    let (_, set) = j_value(cond, rho)?;
    Ok(resolve_tie(&set, tie_rule))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_point_mass() {
        assert_eq!(map_estimate(&IntegerPmf::point_mass(5), TieRule::LowestValue), 5);
    }

    #[test]
    fn map_strict_argmax() {
        let p = IntegerPmf::from_linear(&[(0, 0.9), (1, 0.1)]).unwrap();
        assert_eq!(map_estimate(&p, TieRule::LowestValue), 0);
    }

    #[test]
    fn map_tie_rules() {
        let p = IntegerPmf::uniform(0, 1).unwrap();
        assert_eq!(map_estimate(&p, TieRule::LowestValue), 0);
        // Uniform tie rule hits each side with frequency 1/2 ± 3σ.
        let n = 10_000u64;
        let ones: u64 = (0..n)
            .map(|i| map_estimate(&p, TieRule::SeededUniform(SeedSpec::new(7, i))) as u64)
            .sum();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!(((ones as f64) - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn ceiling_examples() {
        assert_eq!(ceiling_quantize(2.3), 3);
        assert_eq!(ceiling_quantize(-1.0), -1);
        assert_eq!(ceiling_quantize(-0.5), 0);
    }

    #[test]
    fn j_value_singleton_is_infinite() {
        let (j, set) = j_value(&IntegerPmf::point_mass(4), 1.0).unwrap();
        assert_eq!(j, f64::INFINITY);
        assert_eq!(set, vec![4]);
    }

    #[test]
    fn j_value_two_atoms() {
        // score(0) = (2/3)/(1/3) / 1 = 2, score(1) = 1/2
        let p = IntegerPmf::from_linear(&[(0, 2.0 / 3.0), (1, 1.0 / 3.0)]).unwrap();
        let (j, set) = j_value(&p, 1.0).unwrap();
        assert!((j - 2.0).abs() < 1e-12);
        assert_eq!(set, vec![0]);
    }

    #[test]
    fn j_value_symmetric_tie() {
        let p = IntegerPmf::uniform(0, 1).unwrap();
        let (j, set) = j_value(&p, 1.0).unwrap();
        assert!((j - 1.0).abs() < 1e-12);
        assert_eq!(set, vec![0, 1]);
    }

    #[test]
    fn j_value_consistency_on_random_pmfs() {
        // Every member of A dominates every competitor at level J, and
        // slightly above J the domination set is empty.
        for i in 0..200 {
            let p = crate::numerics::random_pmf_on(&[-3, -1, 0, 2, 5], SeedSpec::new(21, i));
            for rho in [0.5, 1.0, 2.0] {
                let (j, set) = j_value(&p, rho).unwrap();
                assert!(j > 0.0);
                for &x in &set {
                    for (x2, l2) in p.iter() {
                        if x2 == x {
                            continue;
                        }
                        let lhs = p.log_mass(x) - l2;
                        let rhs = j.ln() + rho * ((x - x2).unsigned_abs() as f64).ln();
                        assert!(lhs >= rhs - 1e-12 * rhs.abs().max(1.0));
                    }
                }
                if j.is_finite() {
                    let c = j * (1.0 + 1e-9);
                    let dominated = p.iter().any(|(x, lx)| {
                        p.iter().filter(|&(x2, _)| x2 != x).all(|(x2, lx2)| {
                            lx - lx2 >= c.ln() + rho * ((x - x2).unsigned_abs() as f64).ln() - 1e-15
                        })
                    });
                    assert!(!dominated, "sup property violated at instance {i}");
                }
            }
        }
    }

    #[test]
    fn rho_estimate_examples() {
        assert_eq!(
            rho_estimate(&IntegerPmf::point_mass(4), 1.0, TieRule::LowestValue).unwrap(),
            4
        );
        let p = IntegerPmf::from_linear(&[(0, 2.0 / 3.0), (1, 1.0 / 3.0)]).unwrap();
        assert_eq!(rho_estimate(&p, 1.0, TieRule::LowestValue).unwrap(), 0);

        let u = IntegerPmf::uniform(0, 1).unwrap();
        let n = 10_000u64;
        let ones: u64 = (0..n)
            .map(|i| {
                rho_estimate(&u, 1.0, TieRule::SeededUniform(SeedSpec::new(13, i))).unwrap() as u64
            })
            .sum();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!(((ones as f64) - n as f64 / 2.0).abs() < 3.0 * sigma);
    }
}
