//! Generative models: sources, memoryless channels, causal encoders, and the
//! exact finite-horizon joint laws they induce.

mod joint;
mod sample;

pub use joint::{
    exact_joint, product_channel, product_pmf, sequence_index, single_use_joint, JointTarget,
    Trajectory,
};
pub use sample::{sample_trajectory, ExactFilter, Rollout};

use crate::dist::{IntegerPmf, LogProb, MASS_TOLERANCE};
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;
use std::collections::BTreeMap;

/// Default cap on enumerated (trajectory × output-history) atoms.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Generative description of the tracked process {S_t}.
#[derive(Debug, Clone)]
pub enum SourceSpec {
    /// S_{t+1} = 2^R · S_t + W_t with W_t i.i.d. uniform on {0,…,2^R−1}
    /// and S_0 = 0; S_t is uniform on {0,…,2^{Rt}−1}.
    RateR { rate: u32 },
    /// S_t i.i.d. with the given marginal law.
    Iid { pmf: IntegerPmf },
    /// Integer Markov chain from a fixed initial state with an explicit
    /// transition table; every reachable state needs a row.
    MarkovInteger {
        initial_state: i64,
        transition: BTreeMap<i64, IntegerPmf>,
    },
}

impl SourceSpec {
    /// Optional per-time amplitude bound |S_t| ≤ c_t checked during
    /// enumeration; a violation is a validation error, never a warning.
    pub fn validate_bound(
        bound_sequence: Option<&BTreeMap<u32, f64>>,
        t: u32,
        state: i64,
    ) -> Result<()> {
        if let Some(bounds) = bound_sequence {
            if let Some(&c) = bounds.get(&t) {
                if (state.unsigned_abs() as f64) > c {
                    return Err(Error::validation(
                        format!("source.bound_sequence[{t}]"),
                        format!("reachable state {state} exceeds |S_{t}| ≤ {c}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of distinct source trajectories s_{1:t} (an upper bound for
    /// Markov sources), used for budget checks before enumerating.
    pub fn trajectory_count(&self, t: u32) -> u128 {
        match self {
            SourceSpec::RateR { rate } => 1u128 << ((*rate as u128) * t as u128).min(127),
            SourceSpec::Iid { pmf } => (pmf.len() as u128).saturating_pow(t),
            SourceSpec::MarkovInteger { transition, .. } => {
                let width = transition.values().map(|p| p.len()).max().unwrap_or(1) as u128;
                width.saturating_pow(t)
            }
        }
    }
}

/// Discrete memoryless channel P(y|x) over finite integer alphabets.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    input_alphabet: Vec<i64>,
    output_alphabet: Vec<i64>,
    /// Row-major log transition matrix, one row per input symbol.
    rows: Vec<LogProb>,
}

impl ChannelSpec {
    /// Build from linear-domain rows; every row must sum to one.
    pub fn from_linear_rows(
        input_alphabet: Vec<i64>,
        output_alphabet: Vec<i64>,
        rows: &[Vec<f64>],
    ) -> Result<ChannelSpec> {
        if input_alphabet.is_empty() || output_alphabet.is_empty() {
            return Err(Error::validation("channel", "empty alphabet"));
        }
        if input_alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "channel.input_alphabet",
                "must be strictly increasing",
            ));
        }
        if output_alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "channel.output_alphabet",
                "must be strictly increasing",
            ));
        }
        if rows.len() != input_alphabet.len() {
            return Err(Error::validation(
                "channel.rows",
                format!("{} rows for {} inputs", rows.len(), input_alphabet.len()),
            ));
        }
        let mut log_rows = Vec::with_capacity(rows.len() * output_alphabet.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != output_alphabet.len() {
                return Err(Error::validation(
                    format!("channel.rows[{i}]"),
                    format!("{} entries for {} outputs", row.len(), output_alphabet.len()),
                ));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::validation(
                    format!("channel.rows[{i}]"),
                    format!("row sums to {total}, expected 1"),
                ));
            }
            for &p in row {
                if p.is_nan() || p < 0.0 {
                    return Err(Error::validation(
                        format!("channel.rows[{i}]"),
                        format!("{p} is not a probability"),
                    ));
                }
                log_rows.push(LogProb::from_log(p.ln())?);
            }
        }
        Ok(ChannelSpec {
            input_alphabet,
            output_alphabet,
            rows: log_rows,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<ChannelSpec> {
        Self::from_linear_rows(vec![0, 1], vec![0, 1], &[vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel copying each of `n` symbols.
    pub fn noiseless(n: usize) -> Result<ChannelSpec> {
        let alphabet: Vec<i64> = (0..n as i64).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_linear_rows(alphabet.clone(), alphabet, &rows)
    }

    /// Channel whose output ignores the input.
    pub fn useless(inputs: Vec<i64>, output_law: &IntegerPmf) -> Result<ChannelSpec> {
        let outs: Vec<i64> = output_law.support().to_vec();
        let row: Vec<f64> = outs.iter().map(|&y| output_law.mass(y)).collect();
        let rows: Vec<Vec<f64>> = (0..inputs.len()).map(|_| row.clone()).collect();
        Self::from_linear_rows(inputs, outs, &rows)
    }

    pub fn input_alphabet(&self) -> &[i64] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[i64] {
        &self.output_alphabet
    }

    pub fn input_index(&self, x: i64) -> Option<usize> {
        self.input_alphabet.binary_search(&x).ok()
    }

    /// log P(y | x) by alphabet index.
    #[inline]
    pub fn log_transition(&self, input_idx: usize, output_idx: usize) -> f64 {
        self.rows[input_idx * self.output_alphabet.len() + output_idx].ln()
    }

    /// log P(y | x) by symbol value; `-∞` for unknown symbols.
    pub fn log_transition_symbols(&self, x: i64, y: i64) -> f64 {
        match (
            self.input_alphabet.binary_search(&x),
            self.output_alphabet.binary_search(&y),
        ) {
            (Ok(i), Ok(j)) => self.log_transition(i, j),
            _ => f64::NEG_INFINITY,
        }
    }

    /// Output law under an input distribution, as log masses per output index.
    pub fn output_log_marginal(&self, input: &IntegerPmf) -> Result<Vec<f64>> {
        let mut per_output = vec![Vec::new(); self.output_alphabet.len()];
        for (x, lx) in input.iter() {
            let xi = self.input_index(x).ok_or_else(|| {
                Error::validation("input", format!("symbol {x} not in channel input alphabet"))
            })?;
            for (yi, terms) in per_output.iter_mut().enumerate() {
                terms.push(lx + self.log_transition(xi, yi));
            }
        }
        Ok(per_output.iter().map(|terms| log_sum_exp(terms)).collect())
    }
}

/// Deterministic causal encoder: channel input at time t from s_{1:t}.
#[derive(Debug, Clone)]
pub enum EncoderSpec {
    /// x_t = s_t; requires every reachable state to be a channel input symbol.
    CurrentState,
    /// For rate-R sources: emits the newest R-bit digit w_{t−1} = s_t − 2^R·s_{t−1},
    /// mapped into the channel input alphabet by index.
    SystematicDigit,
    /// Explicit lookup tables, one per time step, keyed by the full history.
    Table { steps: Vec<BTreeMap<Vec<i64>, i64>> },
}

impl EncoderSpec {
    /// Channel input for time `t` (1-based) given the history s_{1:t}.
    pub fn encode(
        &self,
        source: &SourceSpec,
        channel: &ChannelSpec,
        t: usize,
        history: &[i64],
    ) -> Result<i64> {
        debug_assert_eq!(history.len(), t);
        match self {
            EncoderSpec::CurrentState => {
                let s = history[t - 1];
                if channel.input_index(s).is_none() {
                    return Err(Error::validation(
                        "encoder",
                        format!("state {s} is not a channel input symbol"),
                    ));
                }
                Ok(s)
            }
            EncoderSpec::SystematicDigit => {
                let rate = match source {
                    SourceSpec::RateR { rate } => *rate,
                    _ => {
                        return Err(Error::validation(
                            "encoder",
                            "systematic digit encoder requires a rate-R source",
                        ))
                    }
                };
                let prev = if t >= 2 { history[t - 2] } else { 0 };
                let digit = history[t - 1] - (prev << rate);
                let alphabet = channel.input_alphabet();
                if digit < 0 || digit as usize >= alphabet.len() {
                    return Err(Error::validation(
                        "encoder",
                        format!(
                            "digit {digit} has no input symbol (alphabet size {})",
                            alphabet.len()
                        ),
                    ));
                }
                Ok(alphabet[digit as usize])
            }
            EncoderSpec::Table { steps } => {
                let table = steps.get(t - 1).ok_or_else(|| {
                    Error::validation(
                        format!("encoder.steps[{}]", t - 1),
                        "no table for this time step",
                    )
                })?;
                table.get(history).copied().ok_or_else(|| {
                    Error::validation(
                        format!("encoder.steps[{}]", t - 1),
                        format!("no entry for history {history:?}"),
                    )
                })
            }
        }
    }
}

/// A complete tracking setup: source, channel, causal encoder, horizon.
///
/// Realizes the chain S_t → X_{1:t} → Y_{1:t}: outputs depend on the source
/// only through the channel inputs.
#[derive(Debug, Clone)]
pub struct TrackingInstance {
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub encoder: EncoderSpec,
    pub horizon: u32,
    pub bound_sequence: Option<BTreeMap<u32, f64>>,
}

impl TrackingInstance {
    pub fn new(
        source: SourceSpec,
        channel: ChannelSpec,
        encoder: EncoderSpec,
        horizon: u32,
    ) -> TrackingInstance {
        TrackingInstance {
            source,
            channel,
            encoder,
            horizon,
            bound_sequence: None,
        }
    }

    pub fn check_horizon(&self, t: u32) -> Result<()> {
        if t == 0 || t > self.horizon {
            return Err(Error::parameter(format!(
                "t = {t} outside 1..={}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Exact law of S_t for a rate-R source: uniform on {0,…,2^{Rt}−1}.
pub fn rate_r_state_dist(rate: u32, t: u32, budget: u64) -> Result<IntegerPmf> {
    let atoms = 1u128 << ((rate as u128) * t as u128).min(127);
    if atoms > budget as u128 {
        return Err(Error::Resource { atoms, budget });
    }
    IntegerPmf::uniform(0, (atoms - 1) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_r_state_law_is_uniform() {
        let p = rate_r_state_dist(1, 3, 1 << 20).unwrap();
        assert_eq!(p.support().len(), 8);
        assert!((p.renyi_entropy(f64::INFINITY).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);
        // |S_t| ≤ 2^{Rt} by enumeration
        assert!(p.max_support() <= 1 << 3);

        let q = rate_r_state_dist(2, 1, 1 << 20).unwrap();
        assert_eq!(q.support(), &[0, 1, 2, 3]);

        let r = rate_r_state_dist(1, 2, 1 << 20).unwrap();
        assert_eq!(r.max_support(), 3);
    }

    #[test]
    fn rate_r_budget_is_enforced() {
        match rate_r_state_dist(2, 20, 1000) {
            Err(Error::Resource { atoms, budget }) => {
                assert_eq!(atoms, 1 << 40);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn channel_rows_must_be_stochastic() {
        let bad = ChannelSpec::from_linear_rows(vec![0, 1], vec![0, 1], &[vec![0.6, 0.6], vec![0.5, 0.5]]);
        assert!(bad.is_err());
    }

    #[test]
    fn systematic_digit_extracts_innovation() {
        let source = SourceSpec::RateR { rate: 1 };
        let channel = ChannelSpec::bsc(0.1).unwrap();
        let enc = EncoderSpec::SystematicDigit;
        // s_1 = 1, s_2 = 2·1 + 0 = 2, s_3 = 2·2 + 1 = 5
        assert_eq!(enc.encode(&source, &channel, 1, &[1]).unwrap(), 1);
        assert_eq!(enc.encode(&source, &channel, 2, &[1, 2]).unwrap(), 0);
        assert_eq!(enc.encode(&source, &channel, 3, &[1, 2, 5]).unwrap(), 1);
    }

    #[test]
    fn current_state_encoder_rejects_foreign_symbols() {
        let source = SourceSpec::Iid {
            pmf: IntegerPmf::uniform(0, 2).unwrap(),
        };
        let channel = ChannelSpec::bsc(0.1).unwrap();
        let enc = EncoderSpec::CurrentState;
        assert!(enc.encode(&source, &channel, 1, &[2]).is_err());
        assert_eq!(enc.encode(&source, &channel, 1, &[1]).unwrap(), 1);
    }

    #[test]
    fn output_marginal_of_bsc_under_uniform_is_uniform() {
        let ch = ChannelSpec::bsc(0.2).unwrap();
        let input = IntegerPmf::uniform(0, 1).unwrap();
        let out = ch.output_log_marginal(&input).unwrap();
        for l in out {
            assert!((l.exp() - 0.5).abs() < 1e-13);
        }
    }
}
