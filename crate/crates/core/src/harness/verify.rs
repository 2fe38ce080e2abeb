//! The randomized verification suite: every documented invariant as a
//! seeded property over random instances, with deterministic outcomes,
//! a byte-stable report table, and JSON repro dumps for any failure.

use super::output::{csv_float, json_escape, report_to_json, summary_row, SUMMARY_HEADER};
use crate::bounds::{
    gallager_e0, gallager_e0_joint, jensen_chain_check, map_error_bound, moment_entropy_bounded,
    moment_entropy_zeta, necessary_terms, reverse_holder_check, sufficient_map_value,
    sufficient_rho_value, BoundReport, E0Form,
};
use crate::dist::{
    conditional, information_density, json::pmf_to_json, marginals, IntegerPmf, JointDist,
    ObservationLabel,
};
use crate::error::Result;
use crate::estimate::{
    error_moment_exact, error_moment_mc, j_value, EstimatorPolicy, PolicyKind, TieRule,
};
use crate::numerics::{log_sum_exp, random_pmf, random_pmf_on, riemann_zeta, SeedSpec};
use crate::process::{
    exact_joint, product_channel, product_pmf, sample_trajectory, single_use_joint, ChannelSpec,
    EncoderSpec, JointTarget, SourceSpec, TrackingInstance,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Default failure threshold for inequality sweeps.
pub const VERIFY_SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intensity {
    /// ~100 instances per randomized property.
    Quick,
    /// ~1000 instances per randomized property.
    Full,
}

impl Intensity {
    pub fn parse(text: &str) -> Option<Intensity> {
        match text {
            "quick" => Some(Intensity::Quick),
            "full" => Some(Intensity::Full),
            _ => None,
        }
    }

    fn instances(self) -> u64 {
        match self {
            Intensity::Quick => 100,
            Intensity::Full => 1000,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Intensity::Quick => "quick",
            Intensity::Full => "full",
        }
    }
}

/// Deliberate defects for exercising the suite's own failure reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the comparison direction of the bounded moment-entropy sweep;
    /// the suite must report the failures and emit repro files.
    InvertBoundedMomentCheck,
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub instances: u64,
    pub failures: u64,
    /// Smallest margin observed; the property passed iff this is ≥ 0
    /// (each check already folds its tolerance into the margin).
    pub worst_margin: f64,
    /// JSON payloads describing the first few failures.
    pub repro: Vec<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub intensity: Intensity,
    pub seed: SeedSpec,
    pub properties: Vec<PropertyOutcome>,
    /// Bound reports accumulated by the sweep properties, for JSONL/CSV.
    pub reports: Vec<BoundReport>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed())
    }

    /// Fixed-width table; bytes depend only on (seed, intensity, mutation).
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verification suite: intensity={} seed={}/{}",
            self.intensity.label(),
            self.seed.master_seed,
            self.seed.stream_index
        );
        let _ = writeln!(
            out,
            "{:<34} {:>9} {:>9} {:>13}  {}",
            "property", "instances", "failures", "worst_margin", "status"
        );
        for p in &self.properties {
            let margin = if p.worst_margin.is_finite() {
                format!("{:.3e}", p.worst_margin)
            } else if p.worst_margin == f64::INFINITY {
                "inf".to_string()
            } else {
                "-inf".to_string()
            };
            let _ = writeln!(
                out,
                "{:<34} {:>9} {:>9} {:>13}  {}",
                p.name,
                p.instances,
                p.failures,
                margin,
                if p.passed() { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "overall: {} ({} properties)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.properties.len()
        );
        out
    }

    /// Write the sweep JSONL, the CSV summary, and repro files for any
    /// failures. Returns the file names written.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut jsonl = String::new();
        let mut csv = String::from(SUMMARY_HEADER);
        csv.push('\n');
        for report in &self.reports {
            jsonl.push_str(&report_to_json(report));
            jsonl.push('\n');
            csv.push_str(&summary_row(report, self.seed.master_seed, self.seed.stream_index));
            csv.push('\n');
        }
        let jsonl_name = "verify_reports.jsonl".to_string();
        let csv_name = "verify_summary.csv".to_string();
        std::fs::write(dir.join(&jsonl_name), jsonl.as_bytes())?;
        std::fs::write(dir.join(&csv_name), csv.as_bytes())?;
        files.push(jsonl_name);
        files.push(csv_name);
        for p in &self.properties {
            for (k, payload) in p.repro.iter().enumerate() {
                let name = format!("repro_{}_{k}.json", p.name);
                std::fs::write(dir.join(&name), payload.as_bytes())?;
                files.push(name);
            }
        }
        Ok(files)
    }
}

struct Recorder {
    name: &'static str,
    instances: u64,
    failures: u64,
    worst: f64,
    repro: Vec<String>,
}

impl Recorder {
    fn new(name: &'static str) -> Recorder {
        Recorder {
            name,
            instances: 0,
            failures: 0,
            worst: f64::INFINITY,
            repro: Vec::new(),
        }
    }

    /// Record one check; `margin` ≥ 0 passes. The payload closure runs only
    /// on failure (first five kept).
    fn check(&mut self, margin: f64, payload: impl FnOnce() -> String) {
        self.instances += 1;
        if margin < self.worst {
            self.worst = margin;
        }
        if !(margin >= 0.0) {
            self.failures += 1;
            if self.repro.len() < 5 {
                self.repro.push(payload());
            }
        }
    }

    fn finish(self) -> PropertyOutcome {
        PropertyOutcome {
            name: self.name,
            instances: self.instances,
            failures: self.failures,
            worst_margin: if self.instances == 0 { 0.0 } else { self.worst },
            repro: self.repro,
        }
    }
}

fn repro_json(property: &str, index: u64, detail: &str, lhs: f64, rhs: f64) -> String {
    format!(
        "{{\"property\":\"{}\",\"instance\":{},\"lhs\":{},\"rhs\":{},\"detail\":\"{}\"}}\n",
        json_escape(property),
        index,
        csv_float(lhs),
        csv_float(rhs),
        json_escape(detail)
    )
}

/// Run every registered property. Deterministic given (seed, intensity,
/// mutation): identical calls render identical tables and identical files.
pub fn verify_suite(
    seed: SeedSpec,
    intensity: Intensity,
    mutation: Option<Mutation>,
) -> Result<VerifyOutcome> {
    let n = intensity.instances();
    let mut reports = Vec::new();
    let properties = vec![
        prop_log_sum_exp_reference(seed, 10 * n),
        prop_zeta_profile(),
        prop_random_pmf_mass(seed, n),
        prop_renyi_order_monotone(seed, 5 * n),
        prop_min_entropy_limit(seed, n),
        prop_joint_consistency(seed, n),
        prop_moment_entropy_bounded(seed, 10 * n, mutation, &mut reports)?,
        prop_moment_entropy_zeta(seed, 5 * n, &mut reports)?,
        prop_e0_form_equivalence(seed, 5 * n)?,
        prop_e0_symmetric_channels()?,
        prop_single_letterization(seed, n)?,
        prop_data_processing(seed, n / 2)?,
        prop_necessary_profile()?,
        prop_necessary_monotonicity(seed, n / 2)?,
        prop_reverse_holder(seed, 2 * n, &mut reports)?,
        prop_jensen_chain(seed, 2 * n, &mut reports)?,
        prop_map_bounds(seed, 2 * n, &mut reports)?,
        prop_rho_bounds(seed, 2 * n, &mut reports)?,
        prop_quantization_chain(seed, 2 * n)?,
        prop_map_optimality(seed, n)?,
        prop_rate_r_marginals()?,
        prop_trajectory_frequencies(seed, 1000 * n)?,
        prop_mc_within_half_width(seed)?,
        prop_j_value_consistency(seed, 2 * n)?,
    ];
    Ok(VerifyOutcome {
        intensity,
        seed,
        properties,
        reports,
    })
}

// --- randomized instance builders ---------------------------------------

fn random_channel(n_in: usize, n_out: usize, seed: SeedSpec) -> ChannelSpec {
    let rows: Vec<Vec<f64>> = (0..n_in)
        .map(|i| {
            let p = random_pmf(n_out, seed.substream(0xC0DE, i as u64));
            (0..n_out as i64).map(|y| p.mass(y)).collect()
        })
        .collect();
    ChannelSpec::from_linear_rows(
        (0..n_in as i64).collect(),
        (0..n_out as i64).collect(),
        &rows,
    )
    .expect("random rows are stochastic")
}

/// Random joint over {0..nx−1} × single-symbol histories {0..ny−1}.
fn random_joint(nx: usize, ny: usize, seed: SeedSpec) -> JointDist {
    let flat = random_pmf(nx * ny, seed);
    let matrix: Vec<f64> = (0..(nx * ny) as i64).map(|k| flat.mass(k)).collect();
    let labels: Vec<ObservationLabel> = (0..ny as i64).map(|y| ObservationLabel::new(vec![y])).collect();
    JointDist::from_linear_matrix((0..nx as i64).collect(), labels, matrix)
        .expect("Dirichlet masses form a joint")
}

fn identity_instance(t: u32) -> TrackingInstance {
    TrackingInstance::new(
        SourceSpec::Iid {
            pmf: IntegerPmf::uniform(0, 1).expect("valid range"),
        },
        ChannelSpec::noiseless(2).expect("identity"),
        EncoderSpec::CurrentState,
        t,
    )
}

fn useless_instance(t: u32) -> TrackingInstance {
    let out_law = IntegerPmf::uniform(0, 1).expect("valid range");
    TrackingInstance::new(
        SourceSpec::Iid {
            pmf: IntegerPmf::uniform(0, 1).expect("valid range"),
        },
        ChannelSpec::useless(vec![0, 1], &out_law).expect("useless"),
        EncoderSpec::CurrentState,
        t,
    )
}

// --- numerics properties --------------------------------------------------

/// Double-double (~106-bit) accumulation of Σ exp(v) as the higher-precision
/// reference for the stable log-sum-exp.
fn dd_log_sum_exp(values: &[f64]) -> f64 {
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for &v in values {
        let x = v.exp();
        let s = hi + x;
        let bb = s - hi;
        let err = (hi - (s - bb)) + (x - bb);
        hi = s;
        lo += err;
    }
    (hi + lo).ln()
}

fn prop_log_sum_exp_reference(seed: SeedSpec, n: u64) -> PropertyOutcome {
    use rand::Rng;
    let mut rec = Recorder::new("log_sum_exp_reference");
    for i in 0..n {
        let mut rng = seed.substream(0x01, i).rng();
        let len = 1 + (rng.random_range(0..40u32) as usize);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(-30.0..5.0)).collect();
        let got = log_sum_exp(&values);
        let reference = dd_log_sum_exp(&values);
        rec.check(1e-13 - (got - reference).abs(), || {
            repro_json("log_sum_exp_reference", i, &format!("{values:?}"), got, reference)
        });
    }
    rec.finish()
}

fn prop_zeta_profile() -> PropertyOutcome {
    let mut rec = Recorder::new("zeta_profile");
    let pi = std::f64::consts::PI;
    let z2 = riemann_zeta(2.0).expect("s > 1");
    let z4 = riemann_zeta(4.0).expect("s > 1");
    rec.check(1e-12 - (z2 - pi * pi / 6.0).abs(), || {
        repro_json("zeta_profile", 0, "zeta(2) vs pi^2/6", z2, pi * pi / 6.0)
    });
    rec.check(1e-12 - (z4 - pi.powi(4) / 90.0).abs(), || {
        repro_json("zeta_profile", 1, "zeta(4) vs pi^4/90", z4, pi.powi(4) / 90.0)
    });
    let grid = [1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0];
    let values: Vec<f64> = grid
        .iter()
        .map(|&s| riemann_zeta(s).expect("s > 1"))
        .collect();
    for (k, w) in values.windows(2).enumerate() {
        rec.check(w[0] - w[1], || {
            repro_json("zeta_profile", 2 + k as u64, "monotonicity", w[0], w[1])
        });
    }
    let z50 = riemann_zeta(50.0).expect("s > 1");
    rec.check(1e-14 - (z50 - 1.0), || {
        repro_json("zeta_profile", 11, "zeta(50) - 1 < 1e-14", z50, 1.0)
    });
    rec.check(z50 - 1.0, || {
        repro_json("zeta_profile", 12, "zeta(50) > 1", z50, 1.0)
    });
    rec.finish()
}

fn prop_random_pmf_mass(seed: SeedSpec, n: u64) -> PropertyOutcome {
    let mut rec = Recorder::new("random_pmf_mass");
    for i in 0..n {
        let size = 1 + (i % 17) as usize;
        let p = random_pmf(size, seed.substream(0x03, i));
        let total: f64 = p.iter().map(|(_, l)| l.exp()).sum();
        rec.check(1e-12 - (total - 1.0).abs(), || {
            repro_json("random_pmf_mass", i, &pmf_to_json(&p), total, 1.0)
        });
    }
    rec.finish()
}

fn prop_renyi_order_monotone(seed: SeedSpec, n: u64) -> PropertyOutcome {
    let mut rec = Recorder::new("renyi_order_monotone");
    let orders = [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY];
    for i in 0..n {
        let size = 2 + (i % 15) as usize;
        let p = random_pmf(size, seed.substream(0x04, i));
        let values: Vec<f64> = orders
            .iter()
            .map(|&a| p.renyi_entropy(a).expect("valid law"))
            .collect();
        for w in values.windows(2) {
            rec.check(w[0] - w[1] + 1e-12, || {
                repro_json("renyi_order_monotone", i, &pmf_to_json(&p), w[0], w[1])
            });
        }
    }
    rec.finish()
}

fn prop_min_entropy_limit(seed: SeedSpec, n: u64) -> PropertyOutcome {
    let mut rec = Recorder::new("min_entropy_limit");
    for i in 0..n {
        let size = 2 + (i % 15) as usize;
        let p = random_pmf(size, seed.substream(0x05, i));
        let hinf = p.renyi_entropy(f64::INFINITY).expect("valid law");
        // Exact sandwich at order 64: 0 ≤ H_64 − H_∞ ≤ H_∞/63.
        let h64 = p.renyi_entropy(64.0).expect("valid law");
        rec.check(h64 - hinf + 1e-12, || {
            repro_json("min_entropy_limit", i, &pmf_to_json(&p), h64, hinf)
        });
        rec.check(hinf / 63.0 - (h64 - hinf) + 1e-12, || {
            repro_json("min_entropy_limit", i, &pmf_to_json(&p), h64 - hinf, hinf / 63.0)
        });
        // Numeric convergence: by order 256 the gap is under 0.02 nats for
        // any law on ≤ 16 atoms (H_∞/255 ≤ log(16)/255 < 0.011).
        let h256 = p.renyi_entropy(256.0).expect("valid law");
        rec.check(0.02 - (h256 - hinf).abs(), || {
            repro_json("min_entropy_limit", i, &pmf_to_json(&p), h256, hinf)
        });
    }
    rec.finish()
}

fn prop_joint_consistency(seed: SeedSpec, n: u64) -> PropertyOutcome {
    let mut rec = Recorder::new("joint_consistency");
    for i in 0..n {
        let nx = 2 + (i % 3) as usize;
        let ny = 2 + ((i / 3) % 2) as usize;
        let j = random_joint(nx, ny, seed.substream(0x06, i));
        let (px, py) = marginals(&j);
        let mut total = 0.0;
        let mut damped = 0.0;
        let mut worst_remix = 0.0f64;
        for (xi, &x) in j.x_support().iter().enumerate() {
            for (yi, y) in j.y_support().iter().enumerate() {
                let l = j.log_mass_at(xi, yi);
                if l == f64::NEG_INFINITY {
                    continue;
                }
                let density = information_density(&j, x, y).expect("positive atom");
                total += l.exp();
                damped += (l - density).exp();
                let cond = conditional(&j, y).expect("positive column");
                let rebuilt = (cond.log_mass(x) + py.log_mass(y)).exp();
                worst_remix = worst_remix.max((rebuilt - l.exp()).abs());
            }
        }
        let _ = px;
        rec.check(1e-12 - (total - 1.0).abs(), || {
            repro_json("joint_consistency", i, "E[exp(0)] = 1", total, 1.0)
        });
        rec.check(1.0 + 1e-12 - damped, || {
            repro_json("joint_consistency", i, "E[exp(-i)] <= 1", damped, 1.0)
        });
        rec.check(1e-12 - worst_remix, || {
            repro_json("joint_consistency", i, "conditional remix", worst_remix, 0.0)
        });
    }
    rec.finish()
}

// --- moment-entropy sweeps -------------------------------------------------

fn prop_moment_entropy_bounded(
    seed: SeedSpec,
    n: u64,
    mutation: Option<Mutation>,
    reports: &mut Vec<BoundReport>,
) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("moment_entropy_bounded_sweep");
    let support: Vec<i64> = (-8..=8).collect();
    let inverted = mutation == Some(Mutation::InvertBoundedMomentCheck);
    for i in 0..n {
        let p = random_pmf_on(&support, seed.substream(0x07, i));
        for rho in [0.5, 1.0, 2.0] {
            let report = moment_entropy_bounded(&p, rho, format!("sweep#{i}"))?;
            let slack = if inverted { -report.slack } else { report.slack };
            rec.check(slack + VERIFY_SLACK_TOLERANCE, || {
                repro_json(
                    "moment_entropy_bounded_sweep",
                    i,
                    &format!("rho={rho} pmf={}", pmf_to_json(&p)),
                    report.lhs,
                    report.rhs,
                )
            });
            reports.push(report.at_time(0));
        }
    }
    Ok(rec.finish())
}

fn prop_moment_entropy_zeta(
    seed: SeedSpec,
    n: u64,
    reports: &mut Vec<BoundReport>,
) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("moment_entropy_zeta_sweep");
    let support: Vec<i64> = (-20..=20).collect();
    for i in 0..n {
        let p = random_pmf_on(&support, seed.substream(0x08, i));
        for (m, rho) in [(2.0, 1.0), (3.0, 1.5), (1.0, 0.5)] {
            let report = moment_entropy_zeta(&p, m, rho, format!("sweep#{i}"))?;
            rec.check(report.slack + VERIFY_SLACK_TOLERANCE, || {
                repro_json(
                    "moment_entropy_zeta_sweep",
                    i,
                    &format!("m={m} rho={rho} pmf={}", pmf_to_json(&p)),
                    report.lhs,
                    report.rhs,
                )
            });
            reports.push(report.at_time(0));
        }
    }
    Ok(rec.finish())
}

// --- reliability-function properties ---------------------------------------

fn prop_e0_form_equivalence(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("e0_form_equivalence");
    for i in 0..n {
        let n_in = 2 + (i % 4) as usize;
        let n_out = 2 + ((i / 4) % 4) as usize;
        let ch = random_channel(n_in, n_out, seed.substream(0x09, i));
        let input = random_pmf(n_in, seed.substream(0x0A, i));
        for rho in [0.5, 1.0, 2.0] {
            let a = gallager_e0(&ch, &input, rho, E0Form::Sum)?;
            let b = gallager_e0(&ch, &input, rho, E0Form::Density)?;
            rec.check(1e-10 - (a - b).abs(), || {
                repro_json("e0_form_equivalence", i, &format!("rho={rho}"), a, b)
            });
        }
    }
    Ok(rec.finish())
}

fn prop_e0_symmetric_channels() -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("e0_symmetric_channels");
    for (k, p) in [0.05, 0.1, 0.25].into_iter().enumerate() {
        let ch = ChannelSpec::bsc(p)?;
        let (input, value) = crate::bounds::e0_maximize(&ch, 1.0)?;
        let coord_err = (input.mass(0) - 0.5).abs().max((input.mass(1) - 0.5).abs());
        rec.check(1e-6 - coord_err, || {
            repro_json("e0_symmetric_channels", k as u64, &format!("bsc({p})"), coord_err, 0.0)
        });
        let at_uniform = gallager_e0(&ch, &IntegerPmf::uniform(0, 1)?, 1.0, E0Form::Sum)?;
        rec.check(1e-9 - (value - at_uniform).abs(), || {
            repro_json("e0_symmetric_channels", k as u64, "value at uniform", value, at_uniform)
        });
    }
    let (_, noiseless) = crate::bounds::e0_maximize(&ChannelSpec::noiseless(2)?, 1.0)?;
    rec.check(1e-9 - (noiseless - 2f64.ln()).abs(), || {
        repro_json("e0_symmetric_channels", 3, "noiseless binary", noiseless, 2f64.ln())
    });
    let out_law = IntegerPmf::uniform(0, 1)?;
    let (_, useless) = crate::bounds::e0_maximize(&ChannelSpec::useless(vec![0, 1], &out_law)?, 1.0)?;
    rec.check(1e-10 - useless.abs(), || {
        repro_json("e0_symmetric_channels", 4, "useless", useless, 0.0)
    });
    Ok(rec.finish())
}

fn prop_single_letterization(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("e0_single_letterization");
    for i in 0..n {
        let ch = random_channel(2, 2, seed.substream(0x0B, i));
        let input = random_pmf(2, seed.substream(0x0C, i));
        let e0_single = gallager_e0(&ch, &input, 1.0, E0Form::Sum)?;
        for t in [2u32, 3] {
            let big = product_channel(&ch, t)?;
            let product_input = product_pmf(&ch, &input, t)?;
            let e0_t = gallager_e0(&big, &product_input, 1.0, E0Form::Sum)?;
            rec.check(1e-9 - (e0_t - t as f64 * e0_single).abs(), || {
                repro_json(
                    "e0_single_letterization",
                    i,
                    &format!("product input, t={t}"),
                    e0_t,
                    t as f64 * e0_single,
                )
            });
        }
        // Correlated inputs stay below t·sup_P E0.
        if i % 2 == 0 {
            let t = 2u32;
            let big = product_channel(&ch, t)?;
            let correlated = random_pmf(4, seed.substream(0x0D, i));
            let e0_corr = gallager_e0(&big, &correlated, 1.0, E0Form::Sum)?;
            let (_, e0_max) = crate::bounds::e0_maximize(&ch, 1.0)?;
            rec.check(t as f64 * e0_max + 1e-9 - e0_corr, || {
                repro_json(
                    "e0_single_letterization",
                    i,
                    "correlated input vs t*sup E0",
                    e0_corr,
                    t as f64 * e0_max,
                )
            });
        }
    }
    Ok(rec.finish())
}

fn prop_data_processing(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("e0_data_processing");
    for i in 0..n.max(10) {
        // Ternary i.i.d. state encoded by a lossy parity map into a random
        // binary channel: the state-observable pair can never carry a larger
        // exponent than the inputs-observable pair.
        let state_law = random_pmf_on(&[0, 1, 2], seed.substream(0x0E, i));
        let ch = random_channel(2, 2, seed.substream(0x0F, i));
        let t = 2u32;
        let mut steps = Vec::new();
        for k in 1..=t as usize {
            let mut table = BTreeMap::new();
            for history in all_histories(state_law.support(), k) {
                let parity = history[k - 1].rem_euclid(2);
                table.insert(history, parity);
            }
            steps.push(table);
        }
        let instance = TrackingInstance::new(
            SourceSpec::Iid {
                pmf: state_law.clone(),
            },
            ch,
            EncoderSpec::Table { steps },
            t,
        );
        let state_joint = exact_joint(&instance, t, JointTarget::CurrentState, 1 << 22)?;
        let seq_joint = exact_joint(&instance, t, JointTarget::FullInputSequence, 1 << 22)?;
        for rho in [0.5, 1.0, 2.0] {
            let e0_state = gallager_e0_joint(&state_joint, rho)?;
            let e0_inputs = gallager_e0_joint(&seq_joint, rho)?;
            rec.check(e0_inputs - e0_state + 1e-9, || {
                repro_json("e0_data_processing", i, &format!("rho={rho}"), e0_inputs, e0_state)
            });
        }
    }
    Ok(rec.finish())
}

fn all_histories(support: &[i64], len: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * support.len());
        for h in &out {
            for &s in support {
                let mut e = h.clone();
                e.push(s);
                next.push(e);
            }
        }
        out = next;
    }
    out
}

// --- necessary-condition properties ----------------------------------------

fn prop_necessary_profile() -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("necessary_identity_profile");
    for t in 1..=6u32 {
        let j = exact_joint(&identity_instance(t), t, JointTarget::CurrentState, 1 << 22)?;
        let terms = necessary_terms(&j, 1.0, 3.0, t)?;
        rec.check(1e-12 - terms.gap().abs(), || {
            repro_json("necessary_identity_profile", t as u64, "gap", terms.lhs, terms.rhs)
        });
        // Trackable instance: the condition itself must hold comfortably.
        rec.check(terms.gap() + VERIFY_SLACK_TOLERANCE, || {
            repro_json("necessary_identity_profile", t as u64, "direction", terms.lhs, terms.rhs)
        });
    }
    let j = exact_joint(&useless_instance(1), 1, JointTarget::CurrentState, 1 << 20)?;
    let terms = necessary_terms(&j, 1.0, 3.0, 1)?;
    rec.check(1e-12 - terms.lhs.abs(), || {
        repro_json("necessary_identity_profile", 7, "useless lhs = 0", terms.lhs, 0.0)
    });
    rec.check(1e-12 - (terms.rhs - 2f64.ln()).abs(), || {
        repro_json("necessary_identity_profile", 8, "useless rhs = log 2", terms.rhs, 2f64.ln())
    });
    Ok(rec.finish())
}

fn prop_necessary_monotonicity(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("necessary_channel_monotonicity");
    let identity_joint = exact_joint(&identity_instance(1), 1, JointTarget::CurrentState, 1 << 20)?;
    let lhs_identity = necessary_terms(&identity_joint, 1.0, 3.0, 1)?.lhs;
    for i in 0..n.max(10) {
        let ch = random_channel(2, 2, seed.substream(0x10, i));
        let instance = TrackingInstance::new(
            SourceSpec::Iid {
                pmf: IntegerPmf::uniform(0, 1)?,
            },
            ch,
            EncoderSpec::CurrentState,
            1,
        );
        let j = exact_joint(&instance, 1, JointTarget::CurrentState, 1 << 20)?;
        let lhs = necessary_terms(&j, 1.0, 3.0, 1)?.lhs;
        rec.check(lhs_identity - lhs + VERIFY_SLACK_TOLERANCE, || {
            repro_json("necessary_channel_monotonicity", i, "identity dominates", lhs_identity, lhs)
        });
    }
    Ok(rec.finish())
}

fn prop_reverse_holder(
    seed: SeedSpec,
    n: u64,
    reports: &mut Vec<BoundReport>,
) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("reverse_holder");
    for i in 0..n {
        let nx = 2 + (i % 3) as usize;
        let ny = 2 + (i % 2) as usize;
        let j = random_joint(nx, ny, seed.substream(0x12, i));
        for (rho, p) in [(1.0, 2.0), (0.5, 1.5), (2.0, 3.0)] {
            let report = reverse_holder_check(&j, rho, p, format!("sweep#{i}"))?;
            rec.check(report.slack + 1e-10, || {
                repro_json("reverse_holder", i, &format!("rho={rho} p={p}"), report.lhs, report.rhs)
            });
            reports.push(report.at_time(1));
        }
    }
    Ok(rec.finish())
}

fn prop_jensen_chain(
    seed: SeedSpec,
    n: u64,
    reports: &mut Vec<BoundReport>,
) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("jensen_chain");
    for i in 0..n {
        let n_in = 2 + (i % 3) as usize;
        let n_out = 2 + ((i / 3) % 3) as usize;
        let ch = random_channel(n_in, n_out, seed.substream(0x13, i));
        let input = random_pmf(n_in, seed.substream(0x14, i));
        let j = single_use_joint(&ch, &input)?;
        for rho in [0.5, 1.0, 2.0] {
            let report = jensen_chain_check(&j, rho, format!("sweep#{i}"))?;
            rec.check(report.slack + 1e-10, || {
                repro_json("jensen_chain", i, &format!("rho={rho}"), report.lhs, report.rhs)
            });
            reports.push(report.at_time(1));
        }
    }
    Ok(rec.finish())
}

// --- estimator-bound properties ---------------------------------------------

fn prop_map_bounds(seed: SeedSpec, n: u64, reports: &mut Vec<BoundReport>) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("map_error_bounds");
    for i in 0..n {
        let nx = 2 + (i % 3) as usize;
        let ny = 2 + (i % 3) as usize;
        let j = random_joint(nx, ny, seed.substream(0x15, i));
        for (rho, s, mp) in [(1.0, 2.0, 1u32), (2.0, 1.5, 2)] {
            let bound = map_error_bound(&j, rho, s, mp)?;
            let exact = error_moment_exact(&j, &EstimatorPolicy::map(), mp as f64)?;
            rec.check(bound - exact + 1e-12, || {
                repro_json("map_error_bounds", i, &format!("distance rho={rho} s={s} mp={mp}"), bound, exact)
            });
            let mut report = BoundReport::new(
                "map_error_bound",
                bound,
                exact,
                crate::bounds::BoundParams::default()
                    .with_rho(rho)
                    .with_s(s)
                    .with_metric_power(mp),
                format!("sweep#{i}"),
            );
            report.t = Some(1);
            reports.push(report);
        }
        for (m, s) in [(1u32, 2.0), (2, 1.5)] {
            let bound = riemann_zeta(s)? * sufficient_map_value(&j, m, s)?;
            let exact = error_moment_exact(&j, &EstimatorPolicy::map(), m as f64)?;
            rec.check(bound - exact + 1e-12, || {
                repro_json("map_error_bounds", i, &format!("tau m={m} s={s}"), bound, exact)
            });
            let mut report = BoundReport::new(
                "sufficient_map",
                bound,
                exact,
                crate::bounds::BoundParams::default().with_m(m as f64).with_s(s),
                format!("sweep#{i}"),
            );
            report.t = Some(1);
            reports.push(report);
        }
    }
    Ok(rec.finish())
}

fn prop_rho_bounds(seed: SeedSpec, n: u64, reports: &mut Vec<BoundReport>) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("rho_estimator_bounds");
    for i in 0..n {
        let nx = 2 + (i % 3) as usize;
        let ny = 2 + (i % 2) as usize;
        let j = random_joint(nx, ny, seed.substream(0x16, i));
        for (m, p, s) in [(1u32, 2.0, 2.0), (2, 1.5, 1.5)] {
            let r = sufficient_rho_value(&j, m, p, s)?;
            let policy = EstimatorPolicy::rho(r.rho)
                .with_tie_rule(TieRule::SeededUniform(seed.substream(0x17, i)));
            let exact = error_moment_exact(&j, &policy, m as f64)?;
            let zeta = riemann_zeta(s)?;
            rec.check(zeta * r.direct_value - exact + 1e-10, || {
                repro_json(
                    "rho_estimator_bounds",
                    i,
                    &format!("direct m={m} p={p} s={s}"),
                    zeta * r.direct_value,
                    exact,
                )
            });
            rec.check(r.holder_value - r.direct_value + 1e-10, || {
                repro_json(
                    "rho_estimator_bounds",
                    i,
                    &format!("holder ordering m={m} p={p} s={s}"),
                    r.holder_value,
                    r.direct_value,
                )
            });
            let params = crate::bounds::BoundParams::default()
                .with_m(m as f64)
                .with_p(p)
                .with_s(s);
            let mut report =
                BoundReport::new("sufficient_rho", zeta * r.direct_value, exact, params, format!("sweep#{i}"));
            report.t = Some(1);
            reports.push(report);
            let mut report =
                BoundReport::new("sufficient_rho_holder", r.holder_value, r.direct_value, params, format!("sweep#{i}"));
            report.t = Some(1);
            reports.push(report);
        }
    }
    Ok(rec.finish())
}

fn prop_quantization_chain(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    use rand::Rng;
    let mut rec = Recorder::new("quantization_chain");
    for i in 0..n {
        let nx = 2 + (i % 3) as usize;
        let ny = 2 + (i % 2) as usize;
        let j = random_joint(nx, ny, seed.substream(0x18, i));
        let mut rng = seed.substream(0x19, i).rng();
        let lo = j.x_support()[0] as f64 - 1.0;
        let hi = *j.x_support().last().expect("non-empty") as f64 + 1.0;
        let table: BTreeMap<ObservationLabel, f64> = j
            .y_support()
            .iter()
            .map(|y| (y.clone(), rng.random_range(lo..hi)))
            .collect();
        let real_policy = EstimatorPolicy {
            kind: PolicyKind::Custom { table: table.clone() },
            tie_rule: TieRule::LowestValue,
        };
        let ceil_policy = EstimatorPolicy {
            kind: PolicyKind::CeilingOf(Box::new(PolicyKind::Custom { table })),
            tie_rule: TieRule::LowestValue,
        };
        for m in [1.5, 2.0, 3.0] {
            let real = error_moment_exact(&j, &real_policy, m)?;
            let quantized = error_moment_exact(&j, &ceil_policy, m)?;
            let lhs = quantized.powf(1.0 / m);
            let rhs = real.powf(1.0 / m) + 1.0;
            rec.check(rhs - lhs + 1e-10, || {
                repro_json("quantization_chain", i, &format!("m={m} (root form)"), lhs, rhs)
            });
        }
        for m in [0.5, 1.0] {
            let real = error_moment_exact(&j, &real_policy, m)?;
            let quantized = error_moment_exact(&j, &ceil_policy, m)?;
            rec.check(real + 1.0 - quantized + 1e-10, || {
                repro_json("quantization_chain", i, &format!("m={m} (additive form)"), quantized, real + 1.0)
            });
        }
    }
    Ok(rec.finish())
}

fn prop_map_optimality(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("map_optimality_binary");
    for i in 0..n {
        let ny = 2 + (i % 2) as usize;
        let j = random_joint(2, ny, seed.substream(0x1A, i));
        for m in [1.0, 2.0, 3.0] {
            let map_err = error_moment_exact(&j, &EstimatorPolicy::map(), m)?;
            let mut best = f64::INFINITY;
            for assignment in 0..(1u32 << ny) {
                let table: BTreeMap<ObservationLabel, f64> = j
                    .y_support()
                    .iter()
                    .enumerate()
                    .map(|(yi, y)| (y.clone(), ((assignment >> yi) & 1) as f64))
                    .collect();
                let policy = EstimatorPolicy {
                    kind: PolicyKind::Custom { table },
                    tie_rule: TieRule::LowestValue,
                };
                best = best.min(error_moment_exact(&j, &policy, m)?);
            }
            rec.check(best - map_err + 1e-12, || {
                repro_json("map_optimality_binary", i, &format!("m={m}"), best, map_err)
            });
        }
    }
    Ok(rec.finish())
}

// --- process properties -----------------------------------------------------

fn prop_rate_r_marginals() -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("rate_r_marginals");
    for (rate, max_t) in [(1u32, 4u32), (2, 2)] {
        for t in 1..=max_t {
            // The digit encoder needs 2^R input symbols.
            let channel = if rate == 1 {
                ChannelSpec::bsc(0.2)?
            } else {
                ChannelSpec::from_linear_rows(
                    vec![0, 1, 2, 3],
                    vec![0, 1],
                    &[
                        vec![0.7, 0.3],
                        vec![0.3, 0.7],
                        vec![0.6, 0.4],
                        vec![0.4, 0.6],
                    ],
                )?
            };
            let instance = TrackingInstance::new(
                SourceSpec::RateR { rate },
                channel,
                EncoderSpec::SystematicDigit,
                t,
            );
            let j = exact_joint(&instance, t, JointTarget::CurrentState, 1 << 22)?;
            let (px, _) = marginals(&j);
            let expect = crate::process::rate_r_state_dist(rate, t, 1 << 30)?;
            let mut worst = 0.0f64;
            if px.support() != expect.support() {
                worst = f64::INFINITY;
            } else {
                for (x, l) in px.iter() {
                    worst = worst.max((l - expect.log_mass(x)).abs());
                }
            }
            rec.check(1e-12 - worst, || {
                repro_json("rate_r_marginals", (rate * 10 + t) as u64, "uniform state law", worst, 0.0)
            });
        }
    }
    Ok(rec.finish())
}

fn prop_trajectory_frequencies(seed: SeedSpec, samples: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("trajectory_frequencies");
    let t = 2u32;
    let instance = TrackingInstance::new(
        SourceSpec::Iid {
            pmf: IntegerPmf::uniform(0, 1)?,
        },
        ChannelSpec::bsc(0.3)?,
        EncoderSpec::CurrentState,
        t,
    );
    let j = exact_joint(&instance, t, JointTarget::CurrentState, 1 << 20)?;
    let mut observed: BTreeMap<(i64, Vec<i64>), u64> = BTreeMap::new();
    for r in 0..samples {
        let roll = sample_trajectory(&instance, t, seed.substream(0x1B, r))?;
        *observed
            .entry((*roll.states.last().expect("t >= 1"), roll.outputs))
            .or_insert(0) += 1;
    }
    // Pearson statistic against the exact atom masses; all 8 atoms of this
    // instance have comfortably large expected counts.
    let mut statistic = 0.0;
    let mut df = 0u32;
    for (xi, &x) in j.x_support().iter().enumerate() {
        for (yi, y) in j.y_support().iter().enumerate() {
            let expected = j.log_mass_at(xi, yi).exp() * samples as f64;
            if expected <= 0.0 {
                continue;
            }
            let got = *observed.get(&(x, y.symbols().to_vec())).unwrap_or(&0) as f64;
            statistic += (got - expected) * (got - expected) / expected;
            df += 1;
        }
    }
    assert_eq!(df, 8, "fixed instance has 8 positive atoms");
    // 99th percentile of chi-square with 7 degrees of freedom.
    let critical = 18.475306906582357;
    rec.check(critical - statistic, || {
        repro_json("trajectory_frequencies", 0, &format!("chi-square, {samples} samples"), statistic, critical)
    });
    Ok(rec.finish())
}

fn prop_mc_within_half_width(seed: SeedSpec) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("mc_within_half_width");
    let instance = TrackingInstance::new(
        SourceSpec::RateR { rate: 1 },
        ChannelSpec::bsc(0.1)?,
        EncoderSpec::SystematicDigit,
        2,
    );
    let j = exact_joint(&instance, 2, JointTarget::CurrentState, 1 << 20)?;
    let exact = error_moment_exact(&j, &EstimatorPolicy::map(), 1.0)?;
    let mut covered = 0u64;
    for rep in 0..100u64 {
        let (estimate, hw) = error_moment_mc(
            &instance,
            &EstimatorPolicy::map(),
            1.0,
            2,
            1000,
            seed.substream(0x1C, rep),
            1 << 20,
        )?;
        if (estimate - exact).abs() <= hw {
            covered += 1;
        }
    }
    rec.check(covered as f64 - 93.0, || {
        repro_json("mc_within_half_width", 0, "coverage out of 100 seeds", covered as f64, 93.0)
    });
    Ok(rec.finish())
}


fn prop_j_value_consistency(seed: SeedSpec, n: u64) -> Result<PropertyOutcome> {
    let mut rec = Recorder::new("j_value_consistency");
    let support = [-3i64, -1, 0, 2, 5];
    for i in 0..n {
        let p = random_pmf_on(&support, seed.substream(0x1D, i));
        for rho in [0.5, 1.0, 2.0] {
            let (j, set) = j_value(&p, rho)?;
            // Domination at level J for every member of A.
            let mut worst = f64::INFINITY;
            for &x in &set {
                for (x2, l2) in p.iter() {
                    if x2 == x {
                        continue;
                    }
                    let lhs = p.log_mass(x) - l2;
                    let rhs = j.ln() + rho * ((x - x2).unsigned_abs() as f64).ln();
                    worst = worst.min(lhs - rhs + 1e-12 * rhs.abs().max(1.0));
                }
            }
            rec.check(worst, || {
                repro_json("j_value_consistency", i, &format!("domination rho={rho}"), j, 0.0)
            });
            // Slightly above J the domination set must be empty.
            if j.is_finite() {
                let c_log = (j * (1.0 + 1e-9)).ln();
                let dominated = p.iter().any(|(x, lx)| {
                    p.iter().filter(|&(x2, _)| x2 != x).all(|(x2, lx2)| {
                        lx - lx2 >= c_log + rho * ((x - x2).unsigned_abs() as f64).ln() - 1e-15
                    })
                });
                rec.check(if dominated { -1.0 } else { 0.0 }, || {
                    repro_json("j_value_consistency", i, &format!("sup property rho={rho}"), j, 0.0)
                });
            }
        }
    }
    Ok(rec.finish())
}
