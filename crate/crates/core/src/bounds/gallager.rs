//! Gallager's reliability function E₀, its maximization over input laws,
//! and the anytime-capacity check it induces for rate-R sources.

use super::necessary::log_outer_inner_expectation;
use super::{BoundParams, BoundReport};
use crate::dist::IntegerPmf;
use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, SeedSpec};
use crate::process::{single_use_joint, ChannelSpec};

/// Which algebraic route evaluates E₀. The two agree identically; keeping
/// both provides a cross-form oracle for every channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E0Form {
    /// −log Σ_y (Σ_x P(x)·P(y|x)^{1/(1+ρ)})^{1+ρ}, straight over the matrix.
    Sum,
    /// −log E[E[e^{−(ρ/(1+ρ))·i(X;Y)}|Y]^{1+ρ}] through the single-use joint.
    Density,
}

/// E₀(ρ, P_{Y|X}, P_X) in nats.
pub fn gallager_e0(ch: &ChannelSpec, input: &IntegerPmf, rho: f64, form: E0Form) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    if input.support().iter().any(|&x| ch.input_index(x).is_none()) {
        return Err(Error::validation(
            "input",
            "input law has atoms outside the channel input alphabet",
        ));
    }
    match form {
        E0Form::Sum => {
            let damp = 1.0 / (1.0 + rho);
            let mut outer = Vec::with_capacity(ch.output_alphabet().len());
            let mut inner = Vec::new();
            for yi in 0..ch.output_alphabet().len() {
                inner.clear();
                for (x, lx) in input.iter() {
                    let xi = ch.input_index(x).expect("validated above");
                    let lt = ch.log_transition(xi, yi);
                    if lt == f64::NEG_INFINITY {
                        continue;
                    }
                    inner.push(lx + damp * lt);
                }
                if inner.is_empty() {
                    continue; // output never produced under this input law
                }
                outer.push((1.0 + rho) * log_sum_exp(&inner));
            }
            Ok(-log_sum_exp(&outer))
        }
        E0Form::Density => {
            let j = single_use_joint(ch, input)?;
            let (log_outer, _) = log_outer_inner_expectation(&j, -rho / (1.0 + rho), 1.0 + rho);
            Ok(-log_outer)
        }
    }
}

/// E₀ evaluated directly on a joint law via the information-density form;
/// the route for t-use systems where only the exact joint is materialized.
pub fn gallager_e0_joint(j: &crate::dist::JointDist, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    let (log_outer, _) = log_outer_inner_expectation(j, -rho / (1.0 + rho), 1.0 + rho);
    Ok(-log_outer)
}

/// E₀ maximized over input distributions on the simplex.
///
/// Multiplicative fixed-point updates: with a_{xy} = P(y|x)^{1/(1+ρ)},
/// f_y = Σ_x P(x)·a_{xy} and c_x = Σ_y a_{xy}·f_y^ρ, the next iterate is
/// P'(x) ∝ P(x)·c_x^{−1/ρ}. Each step minimizes a convex majorizer of
/// Σ_y f_y^{1+ρ}, so E₀ values are non-decreasing and converge to the
/// global maximum from any interior start; feasibility on the simplex holds
/// by construction. A uniform start plus five seeded Dirichlet starts guard
/// plateau cases, and the best final value wins (ties keep the uniform
/// start, which symmetric channels preserve exactly).
pub fn e0_maximize(ch: &ChannelSpec, rho: f64) -> Result<(IntegerPmf, f64)> {
    if !(rho > 0.0) {
        return Err(Error::parameter(format!("ρ = {rho} must be > 0")));
    }
    const VALUE_TOLERANCE: f64 = 1e-10;
    const MAX_ITERATIONS: usize = 10_000;
    const STARTS: u64 = 5;

    let n = ch.input_alphabet().len();
    let uniform = vec![-(n as f64).ln(); n];
    let mut starts = vec![uniform];
    for k in 0..STARTS {
        let p = crate::numerics::random_pmf(n, SeedSpec::new(0xE0, k));
        starts.push(
            ch.input_alphabet()
                .iter()
                .enumerate()
                .map(|(i, _)| p.log_mass(i as i64))
                .collect(),
        );
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut any_converged = false;
    let mut last_residual = f64::INFINITY;
    for start in starts {
        let (log_p, value, converged, residual) =
            ascend(ch, rho, start, VALUE_TOLERANCE, MAX_ITERATIONS);
        any_converged |= converged;
        if !converged {
            last_residual = residual;
        }
        if best.as_ref().map_or(true, |&(_, v)| value > v) {
            best = Some((log_p, value));
        }
    }
    let (log_p, value) = best.expect("at least one start ran");
    let pairs: Vec<(i64, f64)> = ch
        .input_alphabet()
        .iter()
        .zip(&log_p)
        .map(|(&x, &l)| (x, l))
        .collect();
    let input = IntegerPmf::from_log_pairs(&pairs)?;
    if !any_converged {
        return Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            residual: last_residual,
            best_value: value,
            best_input: Box::new(input),
        });
    }
    Ok((input, value))
}

/// One multiplicative-update climb from a log-domain interior start.
/// Returns (final log input, final E₀, converged, last value step).
fn ascend(
    ch: &ChannelSpec,
    rho: f64,
    mut log_p: Vec<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> (Vec<f64>, f64, bool, f64) {
    let n_in = ch.input_alphabet().len();
    let n_out = ch.output_alphabet().len();
    let damp = 1.0 / (1.0 + rho);
    // log a_{xy} = log P(y|x) / (1+ρ)
    let log_a: Vec<f64> = (0..n_in * n_out)
        .map(|k| damp * ch.log_transition(k / n_out, k % n_out))
        .collect();

    let value_of = |log_p: &[f64]| -> f64 {
        let mut outer = Vec::with_capacity(n_out);
        let mut inner = Vec::with_capacity(n_in);
        for yi in 0..n_out {
            inner.clear();
            for xi in 0..n_in {
                let la = log_a[xi * n_out + yi];
                if la == f64::NEG_INFINITY || log_p[xi] == f64::NEG_INFINITY {
                    continue;
                }
                inner.push(log_p[xi] + la);
            }
            if inner.is_empty() {
                continue;
            }
            outer.push((1.0 + rho) * log_sum_exp(&inner));
        }
        -log_sum_exp(&outer)
    };

    let mut value = value_of(&log_p);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        // log f_y under the current iterate
        let log_f: Vec<f64> = (0..n_out)
            .map(|yi| {
                let terms: Vec<f64> = (0..n_in)
                    .filter(|&xi| log_p[xi] != f64::NEG_INFINITY)
                    .map(|xi| log_p[xi] + log_a[xi * n_out + yi])
                    .collect();
                log_sum_exp(&terms)
            })
            .collect();
        // log c_x = log Σ_y a_{xy} f_y^ρ
        let mut next: Vec<f64> = (0..n_in)
            .map(|xi| {
                if log_p[xi] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let terms: Vec<f64> = (0..n_out)
                    .filter(|&yi| log_f[yi] != f64::NEG_INFINITY)
                    .map(|yi| log_a[xi * n_out + yi] + rho * log_f[yi])
                    .collect();
                log_p[xi] - log_sum_exp(&terms) / rho
            })
            .collect();
        let norm = log_sum_exp(&next);
        for l in &mut next {
            *l -= norm;
        }
        log_p = next;
        let next_value = value_of(&log_p);
        residual = (next_value - value).abs();
        value = next_value;
        if residual < tolerance {
            return (log_p, value, true, residual);
        }
    }
    (log_p, value, false, residual)
}

/// Checks whether a rate-R source can escape the reliability-function
/// necessary condition on this channel: rate-R order-m tracking requires
/// R·log 2 ≤ E₀(m)/m, so slack = E₀(m)/m − R·log 2 < 0 rules tracking out.
pub fn anytime_bound_check(rate: u32, m: f64, ch: &ChannelSpec) -> Result<BoundReport> {
    if !(m > 0.0) {
        return Err(Error::parameter(format!("m = {m} must be > 0")));
    }
    let (input, e0) = e0_maximize(ch, m)?;
    let lhs = e0 / m;
    let rhs = rate as f64 * std::f64::consts::LN_2;
    let provenance = format!(
        "optimizer input {}",
        crate::dist::json::pmf_to_json(&input)
    );
    Ok(BoundReport::new(
        "anytime_bound",
        lhs,
        rhs,
        BoundParams::default().with_m(m),
        provenance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_pmf, random_pmf_on};

    fn random_channel(n_in: usize, n_out: usize, seed_stream: u64) -> ChannelSpec {
        let alphabet_in: Vec<i64> = (0..n_in as i64).collect();
        let alphabet_out: Vec<i64> = (0..n_out as i64).collect();
        let rows: Vec<Vec<f64>> = (0..n_in)
            .map(|i| {
                let p = random_pmf(n_out, SeedSpec::new(900 + seed_stream, i as u64));
                (0..n_out as i64).map(|y| p.mass(y)).collect()
            })
            .collect();
        ChannelSpec::from_linear_rows(alphabet_in, alphabet_out, &rows).unwrap()
    }

    #[test]
    fn useless_channel_has_zero_exponent() {
        let out_law = IntegerPmf::from_linear(&[(0, 0.3), (1, 0.7)]).unwrap();
        let ch = ChannelSpec::useless(vec![0, 1], &out_law).unwrap();
        for (k, rho) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let input = random_pmf_on(&[0, 1], SeedSpec::new(31, k as u64));
            let e0 = gallager_e0(&ch, &input, rho, E0Form::Sum).unwrap();
            assert!(e0.abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_channel_exponent_is_rho_log_n() {
        for n in [2usize, 3, 5] {
            let ch = ChannelSpec::noiseless(n).unwrap();
            let input = IntegerPmf::uniform(0, n as i64 - 1).unwrap();
            for rho in [0.5, 1.0, 2.0] {
                let e0 = gallager_e0(&ch, &input, rho, E0Form::Sum).unwrap();
                assert!((e0 - rho * (n as f64).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sum_and_density_forms_agree() {
        for i in 0..100 {
            let n_in = 2 + (i % 3) as usize;
            let n_out = 2 + ((i / 3) % 3) as usize;
            let ch = random_channel(n_in, n_out, i);
            let input = random_pmf(n_in, SeedSpec::new(77, i));
            for rho in [0.5, 1.0, 2.0] {
                let a = gallager_e0(&ch, &input, rho, E0Form::Sum).unwrap();
                let b = gallager_e0(&ch, &input, rho, E0Form::Density).unwrap();
                assert!((a - b).abs() <= 1e-10, "forms differ by {} at {i}", a - b);
            }
        }
    }

    #[test]
    fn bsc_optimizer_returns_uniform() {
        for p in [0.05, 0.1, 0.25] {
            let ch = ChannelSpec::bsc(p).unwrap();
            let (input, value) = e0_maximize(&ch, 1.0).unwrap();
            assert!((input.mass(0) - 0.5).abs() < 1e-6);
            assert!((input.mass(1) - 0.5).abs() < 1e-6);
            let direct = gallager_e0(&ch, &IntegerPmf::uniform(0, 1).unwrap(), 1.0, E0Form::Sum).unwrap();
            assert!((value - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_binary_maximum_is_log_two() {
        let ch = ChannelSpec::noiseless(2).unwrap();
        let (_, value) = e0_maximize(&ch, 1.0).unwrap();
        assert!((value - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn useless_channel_maximum_is_zero() {
        let out_law = IntegerPmf::uniform(0, 1).unwrap();
        let ch = ChannelSpec::useless(vec![0, 1], &out_law).unwrap();
        let (_, value) = e0_maximize(&ch, 1.0).unwrap();
        assert!(value.abs() < 1e-10);
    }

    #[test]
    fn optimizer_beats_or_matches_random_inputs() {
        for i in 0..20 {
            let ch = random_channel(3, 3, 400 + i);
            let (_, best) = e0_maximize(&ch, 1.0).unwrap();
            for k in 0..10 {
                let input = random_pmf(3, SeedSpec::new(500 + i, k));
                let value = gallager_e0(&ch, &input, 1.0, E0Form::Sum).unwrap();
                assert!(value <= best + 1e-8, "random input beat optimizer by {}", value - best);
            }
        }
    }

    #[test]
    fn anytime_check_boundary_and_violation() {
        // Noiseless binary at R = 1, m = 1 sits exactly on the boundary.
        let r = anytime_bound_check(1, 1.0, &ChannelSpec::noiseless(2).unwrap()).unwrap();
        assert!(r.slack.abs() < 1e-9);

        // BSC(0.25) cannot support rate-1 first-moment tracking.
        let r = anytime_bound_check(1, 1.0, &ChannelSpec::bsc(0.25).unwrap()).unwrap();
        assert!(r.slack < 0.0);

        // A useless channel is ruled out at any rate.
        let out_law = IntegerPmf::uniform(0, 1).unwrap();
        let r = anytime_bound_check(3, 2.0, &ChannelSpec::useless(vec![0, 1], &out_law).unwrap()).unwrap();
        assert!(r.lhs.abs() < 1e-9 && r.slack < 0.0);
    }
}
