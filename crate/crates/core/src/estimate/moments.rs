//! Exact and Monte Carlo evaluation of estimation-error moments E|X − X̂|^m.

use super::{EstimatorPolicy, PolicyValue, TieRule};
use crate::dist::{JointDist, ObservationLabel};
use crate::error::{Error, Result};
use crate::numerics::SeedSpec;
use crate::process::{sample_trajectory, ExactFilter, TrackingInstance};
use rand::Rng;
use std::collections::BTreeMap;

/// Substream tags for Monte Carlo replications.
const TAG_TRAJECTORY: u64 = 0x71;
const TAG_TIE: u64 = 0x72;

/// How a set of error moments was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Exact,
    MonteCarlo { replications: u64 },
}

/// Per-horizon error moments for one estimator policy.
#[derive(Debug, Clone)]
pub struct ErrorStats {
    pub m: f64,
    pub method: MomentMethod,
    pub per_t_moment: BTreeMap<u32, f64>,
    /// 95% normal-approximation half-widths; identically zero for exact runs.
    pub per_t_half_width: BTreeMap<u32, f64>,
}

impl ErrorStats {
    pub fn new(m: f64, method: MomentMethod) -> ErrorStats {
        ErrorStats {
            m,
            method,
            per_t_moment: BTreeMap::new(),
            per_t_half_width: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, t: u32, moment: f64, half_width: f64) {
        debug_assert!(moment >= 0.0);
        debug_assert!(matches!(self.method, MomentMethod::MonteCarlo { .. }) || half_width == 0.0);
        self.per_t_moment.insert(t, moment);
        self.per_t_half_width.insert(t, half_width);
    }
}

/// Exact error moment Σ_y P(y) Σ_x P(x|y) |x − x̂(y)|^m in the linear domain.
///
/// Seeded-uniform tie rules are averaged analytically over the tie set
/// (weight 1/|A| each) so the result stays exact; `LowestValue` replays the
/// deterministic choice.
pub fn error_moment_exact(j: &JointDist, policy: &EstimatorPolicy, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::parameter(format!("moment order m = {m} must be > 0")));
    }
    let mut total = 0.0;
    for (yi, y) in j.y_support().iter().enumerate() {
        let cond = j.conditional_by_index(yi);
        let py = j.log_marginal_y()[yi].exp();
        let inner = match policy.propose(&cond, y)? {
            PolicyValue::Real(v) => conditional_moment(&cond, v, m),
            PolicyValue::TieSet(set) => match policy.tie_rule {
                TieRule::LowestValue => conditional_moment(&cond, set[0] as f64, m),
                TieRule::SeededUniform(_) => {
                    let k = set.len() as f64;
                    set.iter()
                        .map(|&a| conditional_moment(&cond, a as f64, m))
                        .sum::<f64>()
                        / k
                }
            },
        };
        total += py * inner;
    }
    Ok(total)
}

fn conditional_moment(cond: &crate::dist::IntegerPmf, estimate: f64, m: f64) -> f64 {
    cond.iter()
        .map(|(x, l)| l.exp() * (x as f64 - estimate).abs().powf(m))
        .sum()
}

/// Monte Carlo error moment over seeded rollouts, with a 95% half-width.
///
/// Conditional laws come from the exact posterior filter (subject to
/// `budget`), so the only statistical error is in the outer expectation.
/// Replications are keyed by (seed, replication index) and accumulated in
/// index order: results are bit-identical for a fixed seed.
pub fn error_moment_mc(
    instance: &TrackingInstance,
    policy: &EstimatorPolicy,
    m: f64,
    t: u32,
    replications: u64,
    seed: SeedSpec,
    budget: u64,
) -> Result<(f64, f64)> {
    if replications < 100 {
        return Err(Error::parameter(format!(
            "replications = {replications} < 100 gives a meaningless half-width"
        )));
    }
    if !(m > 0.0) {
        return Err(Error::parameter(format!("moment order m = {m} must be > 0")));
    }
    let mut filter = ExactFilter::new(instance, t, budget)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for r in 0..replications {
        let roll = sample_trajectory(instance, t, seed.substream(TAG_TRAJECTORY, r))?;
        let cond = filter.posterior(&roll.outputs)?;
        let label = ObservationLabel::new(roll.outputs.clone());
        let estimate = match policy.propose(&cond, &label)? {
            PolicyValue::Real(v) => v,
            PolicyValue::TieSet(set) => match policy.tie_rule {
                TieRule::LowestValue => set[0] as f64,
                TieRule::SeededUniform(base) => {
                    let mut rng = base.substream(TAG_TIE, r).rng();
                    set[rng.random_range(0..set.len())] as f64
                }
            },
        };
        let s_t = *roll.states.last().expect("t ≥ 1") as f64;
        let err = (s_t - estimate).abs().powf(m);
        sum += err;
        sum_sq += err * err;
    }
    let n = replications as f64;
    let mean = sum / n;
    let variance = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let half_width = 1.959963984540054 * (variance / n).sqrt();
    Ok((mean, half_width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::IntegerPmf;
    use crate::process::{exact_joint, ChannelSpec, EncoderSpec, JointTarget, SourceSpec};

    fn binary_instance(channel: ChannelSpec) -> TrackingInstance {
        TrackingInstance::new(
            SourceSpec::Iid {
                pmf: IntegerPmf::uniform(0, 1).unwrap(),
            },
            channel,
            EncoderSpec::CurrentState,
            8,
        )
    }

    #[test]
    fn identity_channel_map_error_is_zero() {
        let inst = binary_instance(ChannelSpec::noiseless(2).unwrap());
        for t in 1..=3 {
            let j = exact_joint(&inst, t, JointTarget::CurrentState, 1 << 20).unwrap();
            for m in [0.5, 1.0, 2.0] {
                let e = error_moment_exact(&j, &EstimatorPolicy::map(), m).unwrap();
                assert!(e.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bsc_map_error_is_crossover_probability() {
        let inst = binary_instance(ChannelSpec::bsc(0.1).unwrap());
        let j = exact_joint(&inst, 1, JointTarget::CurrentState, 1 << 20).unwrap();
        for m in [1.0, 2.0, 3.5] {
            let e = error_moment_exact(&j, &EstimatorPolicy::map(), m).unwrap();
            assert!((e - 0.1).abs() < 1e-13);
        }
    }

    #[test]
    fn useless_channel_squared_error_is_half() {
        let out_law = IntegerPmf::uniform(0, 1).unwrap();
        let inst = binary_instance(ChannelSpec::useless(vec![0, 1], &out_law).unwrap());
        let j = exact_joint(&inst, 1, JointTarget::CurrentState, 1 << 20).unwrap();
        let e = error_moment_exact(&j, &EstimatorPolicy::map(), 2.0).unwrap();
        assert!((e - 0.5).abs() < 1e-13);
    }

    #[test]
    fn uniform_tie_average_is_analytic() {
        // Useless channel, uniform conditional: uniform tie over {0,1} gives
        // (|x−0|² + |x−1|²)/2 averaged over uniform x = 1/2.
        let out_law = IntegerPmf::uniform(0, 1).unwrap();
        let inst = binary_instance(ChannelSpec::useless(vec![0, 1], &out_law).unwrap());
        let j = exact_joint(&inst, 1, JointTarget::CurrentState, 1 << 20).unwrap();
        let policy = EstimatorPolicy::map().with_tie_rule(TieRule::SeededUniform(SeedSpec::new(1, 0)));
        let e = error_moment_exact(&j, &policy, 2.0).unwrap();
        assert!((e - 0.5).abs() < 1e-13);
    }

    #[test]
    fn mc_identity_channel_is_exactly_zero() {
        let inst = binary_instance(ChannelSpec::noiseless(2).unwrap());
        let (e, hw) =
            error_moment_mc(&inst, &EstimatorPolicy::map(), 1.0, 2, 200, SeedSpec::new(5, 0), 1 << 20)
                .unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(hw, 0.0);
    }

    #[test]
    fn mc_is_bit_deterministic() {
        let inst = binary_instance(ChannelSpec::bsc(0.1).unwrap());
        let run = || {
            error_moment_mc(
                &inst,
                &EstimatorPolicy::map(),
                1.0,
                3,
                500,
                SeedSpec::new(42, 3),
                1 << 20,
            )
            .unwrap()
        };
        let (a, ha) = run();
        let (b, hb) = run();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(ha.to_bits(), hb.to_bits());
    }

    #[test]
    fn mc_matches_exact_within_half_width() {
        let inst = binary_instance(ChannelSpec::bsc(0.1).unwrap());
        let j = exact_joint(&inst, 2, JointTarget::CurrentState, 1 << 20).unwrap();
        let exact = error_moment_exact(&j, &EstimatorPolicy::map(), 1.0).unwrap();
        let (mc, hw) = error_moment_mc(
            &inst,
            &EstimatorPolicy::map(),
            1.0,
            2,
            20_000,
            SeedSpec::new(7, 0),
            1 << 20,
        )
        .unwrap();
        assert!(
            (mc - exact).abs() <= hw,
            "mc {mc} vs exact {exact}, half-width {hw}"
        );
    }

    #[test]
    fn replication_floor_is_enforced() {
        let inst = binary_instance(ChannelSpec::bsc(0.1).unwrap());
        assert!(error_moment_mc(
            &inst,
            &EstimatorPolicy::map(),
            1.0,
            1,
            99,
            SeedSpec::new(1, 0),
            1 << 20
        )
        .is_err());
    }
}
