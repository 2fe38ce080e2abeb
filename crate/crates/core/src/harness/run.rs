//! The experiment runner: exact joints per horizon, bound evaluations,
//! optional Monte Carlo error profiles, and reproducible output files.

use super::output::{csv_float, json_escape, report_to_json};
use super::{BoundInstance, BoundKind, ResolvedExperiment};
use crate::bounds::{
    anytime_bound_check, gallager_e0_joint, jensen_chain_check, map_error_bound,
    moment_entropy_bounded, moment_entropy_zeta, necessary_terms, sufficient_map_value,
    sufficient_rho_value, BoundReport,
};
use crate::dist::{marginals, JointDist};
use crate::error::Result;
use crate::estimate::{error_moment_exact, error_moment_mc, EstimatorPolicy, TieRule};
use crate::numerics::riemann_zeta;
use crate::process::{exact_joint, JointTarget};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct StageTiming {
    pub name: String,
    pub wall_ms: u128,
}

/// What a finished run produced. CSV and JSONL bytes are a pure function of
/// the resolved config; only `stages` varies between identical runs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub stages: Vec<StageTiming>,
    pub files: Vec<String>,
}

pub fn run_experiment(resolved: &ResolvedExperiment) -> Result<RunManifest> {
    let digest = {
        let mut hasher = Sha256::new();
        hasher.update(resolved.canonical.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    let prefix = &digest[..12];
    let mut stages = Vec::new();

    // Stage: enumerate the exact joints each requested evaluation needs.
    let stage_start = Instant::now();
    let needs_state = resolved.mc.is_some()
        || resolved
            .bound_instances
            .iter()
            .any(|b| b.kind.needs_state_joint());
    let needs_sequence = resolved
        .bound_instances
        .iter()
        .any(|b| b.kind.needs_sequence_joint());
    let mut state_joints: BTreeMap<u32, JointDist> = BTreeMap::new();
    let mut sequence_joints: BTreeMap<u32, JointDist> = BTreeMap::new();
    for &t in &resolved.horizons {
        if needs_state {
            state_joints.insert(
                t,
                exact_joint(&resolved.instance, t, JointTarget::CurrentState, resolved.budget)?,
            );
        }
        if needs_sequence {
            sequence_joints.insert(
                t,
                exact_joint(
                    &resolved.instance,
                    t,
                    JointTarget::FullInputSequence,
                    resolved.budget,
                )?,
            );
        }
    }
    stages.push(StageTiming {
        name: "enumerate".to_string(),
        wall_ms: stage_start.elapsed().as_millis(),
    });

    // Stage: bounds. Channel-only checks are hoisted out of the per-t loop.
    let stage_start = Instant::now();
    let mut anytime_cache: BTreeMap<String, BoundReport> = BTreeMap::new();
    for b in &resolved.bound_instances {
        if b.kind == BoundKind::AnytimeBound {
            let rate = resolved
                .source_rate
                .expect("validated: anytime_bound needs a rate-R source");
            let m = b.params.m.expect("validated");
            let mut report = anytime_bound_check(rate, m, &resolved.instance.channel)?;
            report.provenance = format!("config {prefix}");
            anytime_cache.insert(b.label.clone(), report);
        }
    }

    let mut reports: Vec<BoundReport> = Vec::new();
    let mut csv = String::new();
    csv.push_str("t");
    for b in &resolved.bound_instances {
        let _ = write!(csv, ",{0}_lhs,{0}_rhs,{0}_slack", b.label);
        if b.kind == BoundKind::SufficientRho {
            let _ = write!(csv, ",{0}_holder_lhs,{0}_holder_rhs,{0}_holder_slack", b.label);
        }
    }
    if resolved.mc.is_some() {
        csv.push_str(",mc_estimate,mc_half_width");
    }
    csv.push('\n');

    let mut mc_rows: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    if let Some(mc) = &resolved.mc {
        let mc_start = Instant::now();
        for &t in &resolved.horizons {
            let (estimate, hw95) = error_moment_mc(
                &resolved.instance,
                &mc.policy,
                mc.m,
                t,
                mc.replications,
                resolved.seed,
                resolved.budget,
            )?;
            mc_rows.insert(t, (estimate, hw95 / 1.959963984540054 * mc.z));
        }
        stages.push(StageTiming {
            name: "monte_carlo".to_string(),
            wall_ms: mc_start.elapsed().as_millis(),
        });
    }

    for &t in &resolved.horizons {
        let _ = write!(csv, "{t}");
        for b in &resolved.bound_instances {
            let produced = evaluate_bound(
                b,
                resolved,
                t,
                state_joints.get(&t),
                sequence_joints.get(&t),
                &anytime_cache,
                prefix,
            )?;
            for report in &produced {
                let _ = write!(
                    csv,
                    ",{},{},{}",
                    csv_float(report.lhs),
                    csv_float(report.rhs),
                    csv_float(report.slack)
                );
            }
            reports.extend(produced);
        }
        if resolved.mc.is_some() {
            let (estimate, hw) = mc_rows[&t];
            let _ = write!(csv, ",{},{}", csv_float(estimate), csv_float(hw));
        }
        csv.push('\n');
    }
    stages.push(StageTiming {
        name: "bounds".to_string(),
        wall_ms: stage_start.elapsed().as_millis(),
    });

    // Stage: write outputs.
    let stage_start = Instant::now();
    std::fs::create_dir_all(&resolved.output_dir)?;
    let csv_name = format!("{prefix}_profile.csv");
    let jsonl_name = format!("{prefix}_reports.jsonl");
    let manifest_name = format!("{prefix}_manifest.json");
    std::fs::write(resolved.output_dir.join(&csv_name), csv.as_bytes())?;
    let mut jsonl = String::new();
    for report in &reports {
        jsonl.push_str(&report_to_json(report));
        jsonl.push('\n');
    }
    std::fs::write(resolved.output_dir.join(&jsonl_name), jsonl.as_bytes())?;
    stages.push(StageTiming {
        name: "write".to_string(),
        wall_ms: stage_start.elapsed().as_millis(),
    });

    let manifest = RunManifest {
        config_digest: digest.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        stages,
        files: vec![csv_name, jsonl_name, manifest_name.clone()],
    };
    std::fs::write(
        resolved.output_dir.join(&manifest_name),
        manifest_to_json(&manifest).as_bytes(),
    )?;
    Ok(manifest)
}

fn manifest_to_json(m: &RunManifest) -> String {
    let stages: Vec<String> = m
        .stages
        .iter()
        .map(|s| format!("{{\"name\":\"{}\",\"wall_ms\":{}}}", json_escape(&s.name), s.wall_ms))
        .collect();
    let files: Vec<String> = m
        .files
        .iter()
        .map(|f| format!("\"{}\"", json_escape(f)))
        .collect();
    format!(
        "{{\"config_digest\":\"{}\",\"tool_version\":\"{}\",\"stages\":[{}],\"files\":[{}]}}\n",
        m.config_digest,
        json_escape(&m.tool_version),
        stages.join(","),
        files.join(",")
    )
}

/// Evaluate one bound instance at one horizon. Most kinds yield a single
/// report; the ρ-sufficiency check also reports its Hölder-split ordering.
fn evaluate_bound(
    b: &BoundInstance,
    resolved: &ResolvedExperiment,
    t: u32,
    state_joint: Option<&JointDist>,
    sequence_joint: Option<&JointDist>,
    anytime_cache: &BTreeMap<String, BoundReport>,
    prefix: &str,
) -> Result<Vec<BoundReport>> {
    let state = || state_joint.expect("state joint enumerated for this kind");
    let sequence = || sequence_joint.expect("sequence joint enumerated for this kind");
    let provenance = format!("config {prefix}");
    let reports = match b.kind {
        BoundKind::MomentEntropyBounded => {
            let (px, _) = marginals(state());
            let mut r = moment_entropy_bounded(&px, b.params.rho.expect("validated"), provenance)?;
            r.params = b.params;
            vec![r.at_time(t)]
        }
        BoundKind::MomentEntropyZeta => {
            let (px, _) = marginals(state());
            let mut r = moment_entropy_zeta(
                &px,
                b.params.m.expect("validated"),
                b.params.rho.expect("validated"),
                provenance,
            )?;
            r.params = b.params;
            vec![r.at_time(t)]
        }
        BoundKind::NecessaryTerms => {
            let terms = necessary_terms(
                state(),
                b.params.rho.expect("validated"),
                b.params.q.expect("validated"),
                t,
            )?;
            let mut r = BoundReport::new("necessary_terms", terms.lhs, terms.rhs, b.params, provenance);
            r.clamped = terms.clamped;
            vec![r.at_time(t)]
        }
        BoundKind::AnytimeNecessary => {
            let m = b.params.m.expect("validated");
            let e0 = gallager_e0_joint(sequence(), m)?;
            let lhs = e0 / (m * t as f64);
            let (px, _) = marginals(state());
            let rhs = px.renyi_entropy(f64::INFINITY)? / t as f64;
            vec![BoundReport::new("anytime_necessary", lhs, rhs, b.params, provenance).at_time(t)]
        }
        BoundKind::GartnerEllis => {
            let rho = b.params.rho.expect("validated");
            let lhs = crate::bounds::gartner_ellis_value(sequence(), rho, t)?;
            let rhs = match resolved.source_rate {
                Some(rate) => rate as f64 * std::f64::consts::LN_2,
                None => {
                    let (px, _) = marginals(state());
                    px.renyi_entropy(f64::INFINITY)? / t as f64
                }
            };
            vec![BoundReport::new("gartner_ellis", lhs, rhs, b.params, provenance).at_time(t)]
        }
        BoundKind::AnytimeBound => {
            vec![anytime_cache[&b.label].clone().at_time(t)]
        }
        BoundKind::MapErrorBound => {
            let rho = b.params.rho.expect("validated");
            let s = b.params.s.expect("validated");
            let mp = b.params.metric_power.expect("validated");
            let lhs = map_error_bound(state(), rho, s, mp)?;
            let rhs = error_moment_exact(state(), &EstimatorPolicy::map(), mp as f64)?;
            vec![BoundReport::new("map_error_bound", lhs, rhs, b.params, provenance).at_time(t)]
        }
        BoundKind::SufficientMap => {
            let m = b.params.m.expect("validated") as u32;
            let s = b.params.s.expect("validated");
            let lhs = riemann_zeta(s)? * sufficient_map_value(state(), m, s)?;
            let rhs = error_moment_exact(state(), &EstimatorPolicy::map(), m as f64)?;
            vec![BoundReport::new("sufficient_map", lhs, rhs, b.params, provenance).at_time(t)]
        }
        BoundKind::SufficientRho => {
            let m = b.params.m.expect("validated") as u32;
            let p = b.params.p.expect("validated");
            let s = b.params.s.expect("validated");
            let r = sufficient_rho_value(state(), m, p, s)?;
            let policy = EstimatorPolicy::rho(r.rho)
                .with_tie_rule(TieRule::SeededUniform(resolved.seed.substream(0x11, t as u64)));
            let exact = error_moment_exact(state(), &policy, m as f64)?;
            let zeta = riemann_zeta(s)?;
            vec![
                BoundReport::new("sufficient_rho", zeta * r.direct_value, exact, b.params, provenance.clone())
                    .at_time(t),
                BoundReport::new(
                    "sufficient_rho_holder",
                    r.holder_value,
                    r.direct_value,
                    b.params,
                    provenance,
                )
                .at_time(t),
            ]
        }
        BoundKind::JensenChain => {
            let mut r = jensen_chain_check(sequence(), b.params.rho.expect("validated"), provenance)?;
            r.params = b.params;
            vec![r.at_time(t)]
        }
        BoundKind::DataProcessing => {
            let rho = b.params.rho.expect("validated");
            let lhs = gallager_e0_joint(sequence(), rho)?;
            let rhs = gallager_e0_joint(state(), rho)?;
            vec![BoundReport::new("data_processing", lhs, rhs, b.params, provenance).at_time(t)]
        }
    };
    Ok(reports)
}

/// Convenience for tests and the CLI: parse, resolve, run.
pub fn run_from_json(
    text: &str,
    overrides: &super::Overrides,
) -> Result<(RunManifest, PathBuf)> {
    let cfg = super::ExperimentConfig::from_json(text)?;
    let resolved = cfg.resolve(overrides)?;
    let manifest = run_experiment(&resolved)?;
    Ok((manifest, resolved.output_dir))
}

#[cfg(test)]
mod tests {
    use super::super::{ExperimentConfig, Overrides};
    use super::*;

    fn identity_config(bounds: &str, dir: &std::path::Path) -> ResolvedExperiment {
        let text = format!(
            r#"{{
  "instance": {{
    "source": {{"kind": "iid", "pmf": {{"support": [0,1], "mass": [0.5,0.5]}}}},
    "channel": {{"input_alphabet": [0,1], "output_alphabet": [0,1],
                "rows": [[1.0,0.0],[0.0,1.0]]}},
    "encoder": {{"kind": "current_state"}},
    "horizon": 6
  }},
  "bounds": [{bounds}],
  "horizons": [1,2,3,4,5,6],
  "seed": {{"master_seed": 7, "stream_index": 0}}
}}"#
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        cfg.resolve(&Overrides {
            output_dir: Some(dir.to_path_buf()),
            ..Overrides::default()
        })
        .unwrap()
    }

    #[test]
    fn identity_profile_has_zero_gap() {
        let dir = tempfile::tempdir().unwrap();
        let resolved = identity_config(
            r#"{"name": "necessary_terms", "params": {"rho": 1.0, "q": 3.0}}"#,
            dir.path(),
        );
        let manifest = run_experiment(&resolved).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(&manifest.files[0])).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,necessary_terms_0_0_lhs,necessary_terms_0_0_rhs,necessary_terms_0_0_slack"
        );
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[0], (i + 1).to_string());
            let slack: f64 = cells[3].parse().unwrap();
            assert!(slack.abs() <= 1e-12, "gap {slack} at t={}", i + 1);
        }
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let bounds = r#"{"name": "necessary_terms", "params": {"rho": 1.0, "q": 3.0}},
                        {"name": "jensen_chain", "params": {"rho": 1.0}},
                        {"name": "sufficient_map", "params": {"m": 1, "s": 2.0}}"#;
        let ra = identity_config(bounds, dir_a.path());
        let rb = identity_config(bounds, dir_b.path());
        let ma = run_experiment(&ra).unwrap();
        let mb = run_experiment(&rb).unwrap();
        assert_eq!(ma.config_digest, mb.config_digest);
        for file in &ma.files[..2] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "outputs differ for {file}");
        }
    }

    #[test]
    fn mc_stage_writes_columns() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            r#"{{
  "instance": {{
    "source": {{"kind": "rate_r", "rate": 1}},
    "channel": {{"input_alphabet": [0,1], "output_alphabet": [0,1],
                "rows": [[0.9,0.1],[0.1,0.9]]}},
    "encoder": {{"kind": "systematic_digit"}},
    "horizon": 3
  }},
  "horizons": [1,2,3],
  "mc": {{"replications": 500, "m": 1.0}},
  "seed": {{"master_seed": 11, "stream_index": 0}},
  "output_dir": "{}"
}}"#,
            dir.path().display()
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let resolved = cfg.resolve(&Overrides::default()).unwrap();
        let manifest = run_experiment(&resolved).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(&manifest.files[0])).unwrap();
        assert!(csv.lines().next().unwrap().ends_with("mc_estimate,mc_half_width"));
        assert_eq!(csv.lines().count(), 4);
    }
}
