//! Seeded trajectory rollouts and the exact posterior filter.

use super::joint::{enumerate_trajectories, Trajectory};
use super::{ChannelSpec, SourceSpec, TrackingInstance};
use crate::dist::IntegerPmf;
use crate::error::{Error, Result};
use crate::numerics::{log_add_exp, SeedSpec};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// A sampled realization (s_{1:t}, x_{1:t}, y_{1:t}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rollout {
    pub states: Vec<i64>,
    pub inputs: Vec<i64>,
    pub outputs: Vec<i64>,
}

/// One rollout (s_{1:t}, x_{1:t}, y_{1:t}) drawn from the generative law.
/// Deterministic given the seed.
pub fn sample_trajectory(instance: &TrackingInstance, t: u32, seed: SeedSpec) -> Result<Rollout> {
    instance.check_horizon(t)?;
    let mut rng = seed.rng();
    let mut states: Vec<i64> = Vec::with_capacity(t as usize);
    let mut inputs: Vec<i64> = Vec::with_capacity(t as usize);
    let mut outputs: Vec<i64> = Vec::with_capacity(t as usize);
    for k in 1..=t {
        let next = match &instance.source {
            SourceSpec::RateR { rate } => {
                let prev = states.last().copied().unwrap_or(0);
                let digits = 1u64 << rate;
                let w = rng.random_range(0..digits) as i64;
                (prev << rate) + w
            }
            SourceSpec::Iid { pmf } => sample_pmf(pmf, &mut rng),
            SourceSpec::MarkovInteger {
                initial_state,
                transition,
            } => {
                let prev = states.last().copied().unwrap_or(*initial_state);
                let row = transition.get(&prev).ok_or_else(|| {
                    Error::validation(
                        "source.transition",
                        format!("no transition row for reachable state {prev}"),
                    )
                })?;
                sample_pmf(row, &mut rng)
            }
        };
        SourceSpec::validate_bound(instance.bound_sequence.as_ref(), k, next)?;
        states.push(next);

        let x = instance
            .encoder
            .encode(&instance.source, &instance.channel, k as usize, &states)?;
        inputs.push(x);
        outputs.push(sample_channel(&instance.channel, x, &mut rng)?);
    }
    Ok(Rollout {
        states,
        inputs,
        outputs,
    })
}

fn sample_pmf(p: &IntegerPmf, rng: &mut ChaCha12Rng) -> i64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (x, l) in p.iter() {
        acc += l.exp();
        if u < acc {
            return x;
        }
    }
    p.max_support()
}

fn sample_channel(ch: &ChannelSpec, x: i64, rng: &mut ChaCha12Rng) -> Result<i64> {
    let xi = ch
        .input_index(x)
        .ok_or_else(|| Error::validation("encoder", format!("symbol {x} not a channel input")))?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let outs = ch.output_alphabet();
    for (yi, &y) in outs.iter().enumerate() {
        acc += ch.log_transition(xi, yi).exp();
        if u < acc {
            return Ok(y);
        }
    }
    Ok(*outs.last().expect("non-empty output alphabet"))
}

/// Exact Bayesian filter: the posterior of S_t given an observed history,
/// computed by weighting every source trajectory by its channel likelihood.
///
/// Enumeration happens once at construction (subject to `budget`); posteriors
/// are memoized per observed history, so repeated Monte Carlo lookups are
/// cheap.
pub struct ExactFilter {
    channel: ChannelSpec,
    trajectories: Vec<Trajectory>,
    horizon: u32,
    cache: BTreeMap<Vec<i64>, IntegerPmf>,
}

impl ExactFilter {
    pub fn new(instance: &TrackingInstance, t: u32, budget: u64) -> Result<ExactFilter> {
        instance.check_horizon(t)?;
        let trajectories = enumerate_trajectories(instance, t, budget)?;
        Ok(ExactFilter {
            channel: instance.channel.clone(),
            trajectories,
            horizon: t,
            cache: BTreeMap::new(),
        })
    }

    /// P(S_t | y_{1:t}) for the filter's horizon.
    pub fn posterior(&mut self, observed: &[i64]) -> Result<IntegerPmf> {
        if observed.len() != self.horizon as usize {
            return Err(Error::parameter(format!(
                "observed history has length {}, filter horizon is {}",
                observed.len(),
                self.horizon
            )));
        }
        if let Some(hit) = self.cache.get(observed) {
            return Ok(hit.clone());
        }
        let mut weights: BTreeMap<i64, f64> = BTreeMap::new();
        for tr in &self.trajectories {
            let mut lw = tr.log_prob;
            for (&x, &y) in tr.inputs.iter().zip(observed) {
                lw += self.channel.log_transition_symbols(x, y);
                if lw == f64::NEG_INFINITY {
                    break;
                }
            }
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let s = *tr.states.last().expect("t ≥ 1");
            weights
                .entry(s)
                .and_modify(|acc| *acc = log_add_exp(*acc, lw))
                .or_insert(lw);
        }
        if weights.is_empty() {
            return Err(Error::domain(format!(
                "observed history {observed:?} has probability zero under this instance"
            )));
        }
        let evidence = crate::numerics::log_sum_exp(&weights.values().copied().collect::<Vec<_>>());
        let pairs: Vec<(i64, f64)> = weights.into_iter().map(|(s, lw)| (s, lw - evidence)).collect();
        let posterior = IntegerPmf::from_log_pairs(&pairs)?;
        self.cache.insert(observed.to_vec(), posterior.clone());
        Ok(posterior)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::EncoderSpec;

    fn rate1_instance(channel: ChannelSpec, horizon: u32) -> TrackingInstance {
        TrackingInstance::new(
            SourceSpec::RateR { rate: 1 },
            channel,
            EncoderSpec::SystematicDigit,
            horizon,
        )
    }

    #[test]
    fn identity_channel_reveals_inputs() {
        let inst = rate1_instance(ChannelSpec::noiseless(2).unwrap(), 5);
        for i in 0..20 {
            let tr = sample_trajectory(&inst, 5, SeedSpec::new(3, i)).unwrap();
            assert_eq!(tr.inputs, tr.outputs);
        }
    }

    #[test]
    fn same_seed_same_rollout() {
        let inst = rate1_instance(ChannelSpec::bsc(0.3).unwrap(), 6);
        let a = sample_trajectory(&inst, 6, SeedSpec::new(9, 4)).unwrap();
        let b = sample_trajectory(&inst, 6, SeedSpec::new(9, 4)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.outputs, b.outputs);
    }

    #[test]
    fn rate_one_recurrence_holds_on_samples() {
        let inst = rate1_instance(ChannelSpec::bsc(0.1).unwrap(), 6);
        for i in 0..10_000 {
            let tr = sample_trajectory(&inst, 3, SeedSpec::new(11, i)).unwrap();
            let mut prev = 0;
            for &s in &tr.states {
                let w = s - 2 * prev;
                assert!(w == 0 || w == 1, "innovation {w} out of range");
                prev = s;
            }
        }
    }

    #[test]
    fn filter_is_degenerate_on_identity_channel() {
        let inst = rate1_instance(ChannelSpec::noiseless(2).unwrap(), 4);
        let mut filter = ExactFilter::new(&inst, 4, 1 << 20).unwrap();
        let tr = sample_trajectory(&inst, 4, SeedSpec::new(1, 1)).unwrap();
        let post = filter.posterior(&tr.outputs).unwrap();
        assert_eq!(post.support(), &[*tr.states.last().unwrap()]);
    }

    #[test]
    fn filter_matches_joint_conditional() {
        let inst = rate1_instance(ChannelSpec::bsc(0.1).unwrap(), 3);
        let j = crate::process::exact_joint(&inst, 3, crate::process::JointTarget::CurrentState, 1 << 20)
            .unwrap();
        let mut filter = ExactFilter::new(&inst, 3, 1 << 20).unwrap();
        for y in j.y_support() {
            let via_joint = crate::dist::conditional(&j, y).unwrap();
            let via_filter = filter.posterior(y.symbols()).unwrap();
            assert_eq!(via_joint.support(), via_filter.support());
            for (x, l) in via_joint.iter() {
                assert!((l - via_filter.log_mass(x)).abs() < 1e-11);
            }
        }
    }
}
