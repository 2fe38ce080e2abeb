//! Exact finite-horizon joint laws by forward enumeration.

use super::{ChannelSpec, SourceSpec, TrackingInstance};
use crate::dist::{IntegerPmf, JointDist, ObservationLabel};
use crate::error::{Error, Result};
use crate::numerics::log_add_exp;
use std::collections::BTreeMap;

/// One source realization: states s_{1:t}, encoded inputs x_{1:t}, prior log
/// probability.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<i64>,
    pub inputs: Vec<i64>,
    pub log_prob: f64,
}

/// Which pair the exact joint is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointTarget {
    /// (S_t, Y_{1:t}) — the tracked state against the observation history.
    CurrentState,
    /// (X_{1:t}, Y_{1:t}) — the full channel input sequence against the
    /// observation history. Input sequences are identified by their
    /// lexicographic rank among the sequences that occur, since the joint
    /// carries integer x values; only the joint's structure matters to the
    /// quantities evaluated on this target.
    FullInputSequence,
}

/// Enumerate every source trajectory up to horizon `t`, in canonical
/// (lexicographic) order, with encoded channel inputs attached.
pub(crate) fn enumerate_trajectories(
    instance: &TrackingInstance,
    t: u32,
    max_trajectories: u64,
) -> Result<Vec<Trajectory>> {
    let count = instance.source.trajectory_count(t);
    if count > max_trajectories as u128 {
        return Err(Error::Resource {
            atoms: count,
            budget: max_trajectories,
        });
    }
    let mut out = Vec::new();
    let mut states = Vec::with_capacity(t as usize);
    walk_source(instance, t, &mut states, 0.0, &mut out)?;
    Ok(out)
}

fn walk_source(
    instance: &TrackingInstance,
    t: u32,
    states: &mut Vec<i64>,
    log_prob: f64,
    out: &mut Vec<Trajectory>,
) -> Result<()> {
    let step = states.len() as u32;
    if step == t {
        let mut inputs = Vec::with_capacity(t as usize);
        for k in 1..=t as usize {
            inputs.push(
                instance
                    .encoder
                    .encode(&instance.source, &instance.channel, k, &states[..k])?,
            );
        }
        out.push(Trajectory {
            states: states.clone(),
            inputs,
            log_prob,
        });
        return Ok(());
    }
    let next_time = step + 1;
    let extend = |next: i64, lp: f64, states: &mut Vec<i64>, out: &mut Vec<Trajectory>| -> Result<()> {
        SourceSpec::validate_bound(instance.bound_sequence.as_ref(), next_time, next)?;
        states.push(next);
        walk_source(instance, t, states, log_prob + lp, out)?;
        states.pop();
        Ok(())
    };
    match &instance.source {
        SourceSpec::RateR { rate } => {
            let prev = states.last().copied().unwrap_or(0);
            let base = prev << rate;
            let digits = 1i64 << rate;
            let lp = -((digits as f64).ln());
            for w in 0..digits {
                extend(base + w, lp, states, out)?;
            }
        }
        SourceSpec::Iid { pmf } => {
            for (x, lp) in pmf.iter() {
                extend(x, lp, states, out)?;
            }
        }
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
            for (x, lp) in row.clone().iter() {
                extend(x, lp, states, out)?;
            }
        }
    }
    Ok(())
}

/// Exact joint law of the target pair at horizon `t` by forward enumeration
/// over all source and channel realizations.
///
/// The planned atom count (trajectories × |Y|^t) is checked against `budget`
/// before any work happens.
pub fn exact_joint(
    instance: &TrackingInstance,
    t: u32,
    target: JointTarget,
    budget: u64,
) -> Result<JointDist> {
    instance.check_horizon(t)?;
    let n_out = instance.channel.output_alphabet().len() as u128;
    let planned = instance
        .source
        .trajectory_count(t)
        .saturating_mul(n_out.saturating_pow(t));
    if planned > budget as u128 {
        return Err(Error::Resource {
            atoms: planned,
            budget,
        });
    }
    let trajectories = enumerate_trajectories(instance, t, budget)?;

    let mut atoms: BTreeMap<(i64, Vec<i64>), f64> = BTreeMap::new();
    let sequence_rank: Option<BTreeMap<Vec<i64>, i64>> = match target {
        JointTarget::CurrentState => None,
        JointTarget::FullInputSequence => {
            let mut distinct: Vec<Vec<i64>> =
                trajectories.iter().map(|tr| tr.inputs.clone()).collect();
            distinct.sort();
            distinct.dedup();
            Some(
                distinct
                    .into_iter()
                    .enumerate()
                    .map(|(i, seq)| (seq, i as i64))
                    .collect(),
            )
        }
    };

    for tr in &trajectories {
        let x_value = match target {
            JointTarget::CurrentState => *tr.states.last().expect("t ≥ 1"),
            JointTarget::FullInputSequence => sequence_rank
                .as_ref()
                .expect("rank table exists for this target")[&tr.inputs],
        };
        let mut y = Vec::with_capacity(t as usize);
        walk_outputs(&instance.channel, &tr.inputs, tr.log_prob, &mut y, &mut |y, lm| {
            atoms
                .entry((x_value, y.to_vec()))
                .and_modify(|acc| *acc = log_add_exp(*acc, lm))
                .or_insert(lm);
        });
    }

    let mut x_support: Vec<i64> = atoms.keys().map(|(x, _)| *x).collect();
    x_support.sort_unstable();
    x_support.dedup();
    let mut y_raw: Vec<Vec<i64>> = atoms.keys().map(|(_, y)| y.clone()).collect();
    y_raw.sort();
    y_raw.dedup();
    let y_support: Vec<ObservationLabel> = y_raw.iter().cloned().map(ObservationLabel::new).collect();

    let ny = y_support.len();
    let mut matrix = vec![f64::NEG_INFINITY; x_support.len() * ny];
    for ((x, y), lm) in &atoms {
        let xi = x_support.binary_search(x).expect("x came from the atom set");
        let yi = y_raw.binary_search(y).expect("y came from the atom set");
        matrix[xi * ny + yi] = *lm;
    }
    JointDist::from_log_matrix(x_support, y_support, matrix)
}

/// Depth-first over output histories, pruning zero-probability branches.
fn walk_outputs(
    channel: &ChannelSpec,
    inputs: &[i64],
    log_acc: f64,
    y: &mut Vec<i64>,
    emit: &mut impl FnMut(&[i64], f64),
) {
    let k = y.len();
    if k == inputs.len() {
        emit(y, log_acc);
        return;
    }
    let xi = channel
        .input_index(inputs[k])
        .expect("encoder outputs live in the channel input alphabet");
    for (yi, &sym) in channel.output_alphabet().iter().enumerate() {
        let lt = channel.log_transition(xi, yi);
        if lt == f64::NEG_INFINITY {
            continue;
        }
        y.push(sym);
        walk_outputs(channel, inputs, log_acc + lt, y, emit);
        y.pop();
    }
}

/// Lexicographic rank of a symbol sequence in `alphabet`^len, as an integer.
pub fn sequence_index(symbols: &[i64], alphabet: &[i64]) -> Option<i64> {
    let n = alphabet.len() as i64;
    let mut idx = 0i64;
    for &s in symbols {
        let pos = alphabet.binary_search(&s).ok()?;
        idx = idx * n + pos as i64;
    }
    Some(idx)
}

/// The t-fold memoryless extension of a channel. Sequences are identified by
/// lexicographic rank, so alphabets become {0,…,n^t−1}.
pub fn product_channel(ch: &ChannelSpec, t: u32) -> Result<ChannelSpec> {
    let n_in = ch.input_alphabet().len();
    let n_out = ch.output_alphabet().len();
    let atoms = (n_in as u128).pow(t) * (n_out as u128).pow(t);
    if atoms > 1 << 24 {
        return Err(Error::Resource {
            atoms,
            budget: 1 << 24,
        });
    }
    let in_seqs = all_index_sequences(n_in, t);
    let out_seqs = all_index_sequences(n_out, t);
    let rows: Vec<Vec<f64>> = in_seqs
        .iter()
        .map(|xs| {
            out_seqs
                .iter()
                .map(|ys| {
                    let l: f64 = xs
                        .iter()
                        .zip(ys)
                        .map(|(&xi, &yi)| ch.log_transition(xi, yi))
                        .sum();
                    l.exp()
                })
                .collect()
        })
        .collect();
    ChannelSpec::from_linear_rows(
        (0..in_seqs.len() as i64).collect(),
        (0..out_seqs.len() as i64).collect(),
        &rows,
    )
}

/// The i.i.d. product of a single-letter input law on the t-fold channel's
/// rank alphabet.
pub fn product_pmf(ch: &ChannelSpec, input: &IntegerPmf, t: u32) -> Result<IntegerPmf> {
    let n_in = ch.input_alphabet().len();
    let seqs = all_index_sequences(n_in, t);
    let log_by_index: Result<Vec<f64>> = ch
        .input_alphabet()
        .iter()
        .map(|&x| Ok(input.log_mass(x)))
        .collect();
    let log_by_index = log_by_index?;
    if input
        .support()
        .iter()
        .any(|&x| ch.input_index(x).is_none())
    {
        return Err(Error::validation(
            "input",
            "input law has atoms outside the channel input alphabet",
        ));
    }
    let pairs: Vec<(i64, f64)> = seqs
        .iter()
        .enumerate()
        .map(|(rank, xs)| {
            let l: f64 = xs.iter().map(|&xi| log_by_index[xi]).sum();
            (rank as i64, l)
        })
        .collect();
    IntegerPmf::from_log_pairs(&pairs)
}

/// Single-use joint P(x, y) = P(x)·P(y|x) with one-symbol observation labels.
/// Output labels whose column has no mass are dropped.
pub fn single_use_joint(ch: &ChannelSpec, input: &IntegerPmf) -> Result<JointDist> {
    if input.support().iter().any(|&x| ch.input_index(x).is_none()) {
        return Err(Error::validation(
            "input",
            "input law has atoms outside the channel input alphabet",
        ));
    }
    let log_py = ch.output_log_marginal(input)?;
    let keep: Vec<usize> = (0..ch.output_alphabet().len())
        .filter(|&yi| log_py[yi] != f64::NEG_INFINITY)
        .collect();
    let y_support: Vec<ObservationLabel> = keep
        .iter()
        .map(|&yi| ObservationLabel::new(vec![ch.output_alphabet()[yi]]))
        .collect();
    let x_support: Vec<i64> = input.support().to_vec();
    let mut matrix = Vec::with_capacity(x_support.len() * keep.len());
    for (x, lx) in input.iter() {
        let xi = ch.input_index(x).expect("checked above");
        for &yi in &keep {
            matrix.push(lx + ch.log_transition(xi, yi));
        }
    }
    JointDist::from_log_matrix(x_support, y_support, matrix)
}

fn all_index_sequences(n: usize, t: u32) -> Vec<Vec<usize>> {
    let mut seqs = vec![Vec::new()];
    for _ in 0..t {
        let mut next = Vec::with_capacity(seqs.len() * n);
        for s in &seqs {
            for i in 0..n {
                let mut e = s.clone();
                e.push(i);
                next.push(e);
            }
        }
        seqs = next;
    }
    seqs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::EncoderSpec;

    fn iid_uniform_identity(t: u32) -> TrackingInstance {
        TrackingInstance::new(
            SourceSpec::Iid {
                pmf: IntegerPmf::uniform(0, 1).unwrap(),
            },
            ChannelSpec::noiseless(2).unwrap(),
            EncoderSpec::CurrentState,
            t,
        )
    }

    #[test]
    fn identity_channel_single_step_is_diagonal() {
        let j = exact_joint(&iid_uniform_identity(1), 1, JointTarget::CurrentState, 1 << 20).unwrap();
        assert_eq!(j.x_support(), &[0, 1]);
        assert_eq!(j.y_support().len(), 2);
        for (xi, &x) in j.x_support().iter().enumerate() {
            for (yi, y) in j.y_support().iter().enumerate() {
                let expect = if y.symbols() == [x] { 0.5 } else { 0.0 };
                assert!((j.log_mass_at(xi, yi).exp() - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn useless_channel_gives_product_joint() {
        let out_law = IntegerPmf::from_linear(&[(0, 0.3), (1, 0.7)]).unwrap();
        let inst = TrackingInstance::new(
            SourceSpec::Iid {
                pmf: IntegerPmf::uniform(0, 1).unwrap(),
            },
            ChannelSpec::useless(vec![0, 1], &out_law).unwrap(),
            EncoderSpec::CurrentState,
            2,
        );
        let j = exact_joint(&inst, 2, JointTarget::CurrentState, 1 << 20).unwrap();
        let (px, py) = crate::dist::marginals(&j);
        for (xi, &x) in j.x_support().iter().enumerate() {
            for (yi, y) in j.y_support().iter().enumerate() {
                let product = px.log_mass(x) + py.log_mass(y);
                assert!((j.log_mass_at(xi, yi) - product).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rate_r_marginal_is_uniform_exactly() {
        let inst = TrackingInstance::new(
            SourceSpec::RateR { rate: 1 },
            ChannelSpec::bsc(0.1).unwrap(),
            EncoderSpec::SystematicDigit,
            4,
        );
        let j = exact_joint(&inst, 3, JointTarget::CurrentState, 1 << 20).unwrap();
        let (px, _) = crate::dist::marginals(&j);
        let expect = rate_r_state_dist_reference(1, 3);
        assert_eq!(px.support(), expect.support());
        for (x, l) in px.iter() {
            assert!((l - expect.log_mass(x)).abs() < 1e-12);
        }
    }

    fn rate_r_state_dist_reference(rate: u32, t: u32) -> IntegerPmf {
        crate::process::rate_r_state_dist(rate, t, 1 << 30).unwrap()
    }

    #[test]
    fn budget_violations_name_the_atom_count() {
        let inst = iid_uniform_identity(8);
        match exact_joint(&inst, 8, JointTarget::CurrentState, 100) {
            Err(Error::Resource { atoms, budget }) => {
                assert_eq!(atoms, 256 * 256);
                assert_eq!(budget, 100);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn full_input_sequence_target_ranks_sequences() {
        let inst = iid_uniform_identity(2);
        let j = exact_joint(&inst, 2, JointTarget::FullInputSequence, 1 << 20).unwrap();
        assert_eq!(j.x_support(), &[0, 1, 2, 3]);
        assert_eq!(j.y_support().len(), 4);
    }

    #[test]
    fn product_channel_matches_manual_two_use_law() {
        let ch = ChannelSpec::bsc(0.2).unwrap();
        let big = product_channel(&ch, 2).unwrap();
        // P(00|01) = P(0|0)·P(0|1) = 0.8·0.2
        let xi = sequence_index(&[0, 1], ch.input_alphabet()).unwrap() as usize;
        let yi = sequence_index(&[0, 0], ch.output_alphabet()).unwrap() as usize;
        assert!((big.log_transition(xi, yi).exp() - 0.16).abs() < 1e-13);
    }

    #[test]
    fn product_pmf_multiplies_masses() {
        let ch = ChannelSpec::bsc(0.2).unwrap();
        let p = IntegerPmf::from_linear(&[(0, 0.25), (1, 0.75)]).unwrap();
        let pp = product_pmf(&ch, &p, 2).unwrap();
        assert!((pp.mass(0) - 0.0625).abs() < 1e-13);
        assert!((pp.mass(3) - 0.5625).abs() < 1e-13);
    }
}
