//! Config-driven experiment runner, randomized verification suite, and the
//! serialization surfaces behind the CLI.
//!
//! A JSON experiment config names a tracking instance, a list of bound
//! checks with parameter grids, the horizons to profile, and an optional
//! Monte Carlo stage. Validation failures carry the path of the offending
//! field. Identical resolved configs reproduce byte-identical CSV and JSONL
//! outputs; only the manifest's wall-clock numbers vary between runs.

pub mod output;
mod run;
mod verify;

pub use run::{run_experiment, run_from_json, RunManifest, StageTiming};
pub use verify::{
    verify_suite, Intensity, Mutation, PropertyOutcome, VerifyOutcome, VERIFY_SLACK_TOLERANCE,
};

use crate::bounds::BoundParams;
use crate::dist::IntegerPmf;
use crate::error::{Error, Result};
use crate::estimate::{EstimatorPolicy, TieRule};
use crate::numerics::SeedSpec;
use crate::process::{ChannelSpec, EncoderSpec, SourceSpec, TrackingInstance, DEFAULT_BUDGET};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    #[serde(default)]
    pub bounds: Vec<BoundRequest>,
    pub horizons: Vec<u32>,
    #[serde(default)]
    pub mc: Option<McConfig>,
    pub seed: SeedSpec,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub source: SourceConfig,
    pub channel: ChannelConfig,
    pub encoder: EncoderConfig,
    pub horizon: u32,
    #[serde(default)]
    pub bound_sequence: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    RateR {
        rate: u32,
    },
    Iid {
        pmf: PmfConfig,
    },
    MarkovInteger {
        initial_state: i64,
        transition: BTreeMap<String, PmfConfig>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfConfig {
    pub support: Vec<i64>,
    pub mass: Vec<f64>,
}

impl PmfConfig {
    fn build(&self, path: &str) -> Result<IntegerPmf> {
        if self.support.len() != self.mass.len() {
            return Err(Error::validation(
                format!("{path}.mass"),
                format!("{} masses for {} support values", self.mass.len(), self.support.len()),
            ));
        }
        let pairs: Vec<(i64, f64)> = self.support.iter().copied().zip(self.mass.iter().copied()).collect();
        IntegerPmf::from_linear(&pairs)
            .map_err(|e| Error::validation(path.to_string(), e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub input_alphabet: Vec<i64>,
    pub output_alphabet: Vec<i64>,
    /// Linear-domain transition rows, one per input symbol.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderConfig {
    CurrentState,
    SystematicDigit,
    Table { steps: Vec<Vec<TableEntry>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub history: Vec<i64>,
    pub input: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub name: String,
    #[serde(default)]
    pub params: GridParams,
}

/// Scalar-or-list parameter fields; lists expand to a Cartesian grid.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    #[serde(default)]
    pub m: Option<OneOrMany>,
    #[serde(default)]
    pub rho: Option<OneOrMany>,
    #[serde(default)]
    pub q: Option<OneOrMany>,
    #[serde(default)]
    pub p: Option<OneOrMany>,
    #[serde(default)]
    pub s: Option<OneOrMany>,
    #[serde(default)]
    pub metric_power: Option<OneOrManyInt>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrManyInt {
    One(u32),
    Many(Vec<u32>),
}

impl OneOrManyInt {
    fn values(&self) -> Vec<u32> {
        match self {
            OneOrManyInt::One(v) => vec![*v],
            OneOrManyInt::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub replications: u64,
    /// Confidence level for the reported half-width; one of 0.90, 0.95, 0.99.
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Moment order of the error profile.
    pub m: f64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub tie: TieConfig,
}

fn default_confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    #[default]
    Map,
    Rho {
        rho: f64,
    },
}

#[derive(Debug, Clone, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TieConfig {
    #[default]
    LowestValue,
    SeededUniform,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub budget: Option<u64>,
}

/// Which evaluator a validated bound request runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    MomentEntropyBounded,
    MomentEntropyZeta,
    NecessaryTerms,
    AnytimeNecessary,
    GartnerEllis,
    AnytimeBound,
    MapErrorBound,
    SufficientMap,
    SufficientRho,
    JensenChain,
    DataProcessing,
}

impl BoundKind {
    pub fn parse(name: &str) -> Option<BoundKind> {
        match name {
            "moment_entropy_bounded" => Some(BoundKind::MomentEntropyBounded),
            "moment_entropy_zeta" => Some(BoundKind::MomentEntropyZeta),
            "necessary_terms" => Some(BoundKind::NecessaryTerms),
            "anytime_necessary" => Some(BoundKind::AnytimeNecessary),
            "gartner_ellis" => Some(BoundKind::GartnerEllis),
            "anytime_bound" => Some(BoundKind::AnytimeBound),
            "map_error_bound" => Some(BoundKind::MapErrorBound),
            "sufficient_map" => Some(BoundKind::SufficientMap),
            "sufficient_rho" => Some(BoundKind::SufficientRho),
            "jensen_chain" => Some(BoundKind::JensenChain),
            "data_processing" => Some(BoundKind::DataProcessing),
            _ => None,
        }
    }

    /// Needs the (S_t, Y_{1:t}) joint.
    pub fn needs_state_joint(self) -> bool {
        !matches!(self, BoundKind::AnytimeBound)
    }

    /// Needs the (X_{1:t}, Y_{1:t}) joint.
    pub fn needs_sequence_joint(self) -> bool {
        matches!(
            self,
            BoundKind::AnytimeNecessary
                | BoundKind::GartnerEllis
                | BoundKind::JensenChain
                | BoundKind::DataProcessing
        )
    }
}

pub const ALL_BOUND_NAMES: [&str; 11] = [
    "moment_entropy_bounded",
    "moment_entropy_zeta",
    "necessary_terms",
    "anytime_necessary",
    "gartner_ellis",
    "anytime_bound",
    "map_error_bound",
    "sufficient_map",
    "sufficient_rho",
    "jensen_chain",
    "data_processing",
];

/// One validated bound evaluation: a stable label, the evaluator, and a
/// fully pinned parameter set.
#[derive(Debug, Clone)]
pub struct BoundInstance {
    pub label: String,
    pub kind: BoundKind,
    pub params: BoundParams,
}

#[derive(Debug, Clone)]
pub struct ResolvedMc {
    pub replications: u64,
    pub confidence: f64,
    pub z: f64,
    pub m: f64,
    pub policy: EstimatorPolicy,
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub instance: TrackingInstance,
    pub source_rate: Option<u32>,
    pub bound_instances: Vec<BoundInstance>,
    pub horizons: Vec<u32>,
    pub mc: Option<ResolvedMc>,
    pub seed: SeedSpec,
    pub budget: u64,
    pub output_dir: PathBuf,
    /// Canonical description digested into output file names.
    pub canonical: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::validation("config", e.to_string()))?;
        Ok(cfg)
    }

    pub fn resolve(&self, overrides: &Overrides) -> Result<ResolvedExperiment> {
        let instance = self.build_instance()?;
        let source_rate = match &self.instance.source {
            SourceConfig::RateR { rate } => Some(*rate),
            _ => None,
        };
        if self.horizons.is_empty() {
            return Err(Error::validation("horizons", "at least one horizon required"));
        }
        for (i, &t) in self.horizons.iter().enumerate() {
            if t == 0 || t > self.instance.horizon {
                return Err(Error::validation(
                    format!("horizons[{i}]"),
                    format!("t = {t} outside 1..={}", self.instance.horizon),
                ));
            }
        }
        let mut bound_instances = Vec::new();
        for (i, request) in self.bounds.iter().enumerate() {
            bound_instances.extend(expand_request(request, i, source_rate)?);
        }
        let seed = match overrides.seed {
            Some(master) => SeedSpec::new(master, self.seed.stream_index),
            None => self.seed,
        };
        let mc = match &self.mc {
            None => None,
            Some(mc) => Some(resolve_mc(mc, seed)?),
        };
        let budget = overrides.budget.or(self.budget).unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(Error::validation("budget", "budget must be positive"));
        }
        let output_dir = overrides
            .output_dir
            .clone()
            .or_else(|| self.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let canonical = canonical_description(self, seed, budget, &bound_instances);
        Ok(ResolvedExperiment {
            instance,
            source_rate,
            bound_instances,
            horizons: self.horizons.clone(),
            mc,
            seed,
            budget,
            output_dir,
            canonical,
        })
    }

    fn build_instance(&self) -> Result<TrackingInstance> {
        let source = match &self.instance.source {
            SourceConfig::RateR { rate } => {
                if *rate == 0 || *rate > 16 {
                    return Err(Error::validation(
                        "instance.source.rate",
                        "rate must be in 1..=16",
                    ));
                }
                SourceSpec::RateR { rate: *rate }
            }
            SourceConfig::Iid { pmf } => SourceSpec::Iid {
                pmf: pmf.build("instance.source.pmf")?,
            },
            SourceConfig::MarkovInteger {
                initial_state,
                transition,
            } => {
                let mut rows = BTreeMap::new();
                for (key, pmf) in transition {
                    let state: i64 = key.parse().map_err(|_| {
                        Error::validation(
                            format!("instance.source.transition[{key}]"),
                            "key must be an integer state",
                        )
                    })?;
                    rows.insert(state, pmf.build(&format!("instance.source.transition[{key}]"))?);
                }
                SourceSpec::MarkovInteger {
                    initial_state: *initial_state,
                    transition: rows,
                }
            }
        };
        let channel = ChannelSpec::from_linear_rows(
            self.instance.channel.input_alphabet.clone(),
            self.instance.channel.output_alphabet.clone(),
            &self.instance.channel.rows,
        )
        .map_err(|e| match e {
            Error::Validation { path, message } => Error::Validation {
                path: format!("instance.{path}"),
                message,
            },
            other => other,
        })?;
        let encoder = match &self.instance.encoder {
            EncoderConfig::CurrentState => EncoderSpec::CurrentState,
            EncoderConfig::SystematicDigit => EncoderSpec::SystematicDigit,
            EncoderConfig::Table { steps } => {
                let mut tables = Vec::with_capacity(steps.len());
                for (k, entries) in steps.iter().enumerate() {
                    let mut table = BTreeMap::new();
                    for e in entries {
                        if e.history.len() != k + 1 {
                            return Err(Error::validation(
                                format!("instance.encoder.steps[{k}]"),
                                format!("history length {} at step {}", e.history.len(), k + 1),
                            ));
                        }
                        if table.insert(e.history.clone(), e.input).is_some() {
                            return Err(Error::validation(
                                format!("instance.encoder.steps[{k}]"),
                                format!("duplicate history {:?}", e.history),
                            ));
                        }
                    }
                    tables.push(table);
                }
                EncoderSpec::Table { steps: tables }
            }
        };
        if self.instance.horizon == 0 {
            return Err(Error::validation("instance.horizon", "horizon must be ≥ 1"));
        }
        let mut instance = TrackingInstance::new(source, channel, encoder, self.instance.horizon);
        if let Some(bounds) = &self.instance.bound_sequence {
            let mut map = BTreeMap::new();
            for (key, &value) in bounds {
                let t: u32 = key.parse().map_err(|_| {
                    Error::validation(
                        format!("instance.bound_sequence[{key}]"),
                        "key must be a time index",
                    )
                })?;
                if !(value > 0.0) {
                    return Err(Error::validation(
                        format!("instance.bound_sequence[{key}]"),
                        "bound must be positive",
                    ));
                }
                map.insert(t, value);
            }
            instance.bound_sequence = Some(map);
        }
        Ok(instance)
    }
}

fn resolve_mc(mc: &McConfig, seed: SeedSpec) -> Result<ResolvedMc> {
    if mc.replications < 100 {
        return Err(Error::validation("mc.replications", "need at least 100"));
    }
    let z = match mc.confidence {
        c if (c - 0.90).abs() < 1e-9 => 1.6448536269514722,
        c if (c - 0.95).abs() < 1e-9 => 1.959963984540054,
        c if (c - 0.99).abs() < 1e-9 => 2.5758293035489004,
        other => {
            return Err(Error::validation(
                "mc.confidence",
                format!("{other} unsupported; use 0.90, 0.95, or 0.99"),
            ))
        }
    };
    if !(mc.m > 0.0) {
        return Err(Error::validation("mc.m", "moment order must be > 0"));
    }
    let tie = match mc.tie {
        TieConfig::LowestValue => TieRule::LowestValue,
        TieConfig::SeededUniform => TieRule::SeededUniform(seed.substream(0x7e, 0)),
    };
    let policy = match &mc.estimator {
        EstimatorConfig::Map => EstimatorPolicy::map().with_tie_rule(tie),
        EstimatorConfig::Rho { rho } => {
            if !(*rho > 0.0) {
                return Err(Error::validation("mc.estimator.rho", "ρ must be > 0"));
            }
            EstimatorPolicy::rho(*rho).with_tie_rule(tie)
        }
    };
    Ok(ResolvedMc {
        replications: mc.replications,
        confidence: mc.confidence,
        z,
        m: mc.m,
        policy,
    })
}

fn expand_request(
    request: &BoundRequest,
    index: usize,
    source_rate: Option<u32>,
) -> Result<Vec<BoundInstance>> {
    let kind = BoundKind::parse(&request.name).ok_or_else(|| {
        Error::validation(
            format!("bounds[{index}].name"),
            format!(
                "unknown bound '{}'; known: {}",
                request.name,
                ALL_BOUND_NAMES.join(", ")
            ),
        )
    })?;
    if kind == BoundKind::AnytimeBound && source_rate.is_none() {
        return Err(Error::validation(
            format!("bounds[{index}]"),
            "anytime_bound requires a rate-R source",
        ));
    }
    let gp = &request.params;
    let grid = |field: &Option<OneOrMany>| -> Vec<Option<f64>> {
        match field {
            None => vec![None],
            Some(v) => v.values().into_iter().map(Some).collect(),
        }
    };
    let mp_grid: Vec<Option<u32>> = match &gp.metric_power {
        None => vec![None],
        Some(v) => v.values().into_iter().map(Some).collect(),
    };
    let mut combos = Vec::new();
    for m in grid(&gp.m) {
        for rho in grid(&gp.rho) {
            for q in grid(&gp.q) {
                for p in grid(&gp.p) {
                    for s in grid(&gp.s) {
                        for mp in &mp_grid {
                            combos.push(BoundParams {
                                m,
                                rho,
                                q,
                                p,
                                s,
                                metric_power: *mp,
                            });
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(combos.len());
    for (combo_idx, params) in combos.into_iter().enumerate() {
        validate_bound_params(kind, &params, index)?;
        out.push(BoundInstance {
            label: format!("{}_{index}_{combo_idx}", request.name),
            kind,
            params,
        });
    }
    Ok(out)
}

fn validate_bound_params(kind: BoundKind, params: &BoundParams, index: usize) -> Result<()> {
    let path = |field: &str| format!("bounds[{index}].params.{field}");
    let need = |field: &str, value: Option<f64>| -> Result<f64> {
        value.ok_or_else(|| Error::validation(path(field), "required for this bound"))
    };
    let positive = |field: &str, value: f64| -> Result<()> {
        if value > 0.0 {
            Ok(())
        } else {
            Err(Error::validation(path(field), format!("{value} must be > 0")))
        }
    };
    let above_one = |field: &str, value: f64| -> Result<()> {
        if value > 1.0 {
            Ok(())
        } else {
            Err(Error::validation(path(field), format!("{value} must be > 1")))
        }
    };
    let integer_moment = |field: &str, value: f64| -> Result<()> {
        if value >= 1.0 && value.fract() == 0.0 {
            Ok(())
        } else {
            Err(Error::validation(
                path(field),
                format!("{value} must be a positive integer for this bound"),
            ))
        }
    };
    match kind {
        BoundKind::MomentEntropyBounded => {
            let rho = need("rho", params.rho)?;
            if rho < 0.0 {
                return Err(Error::validation(path("rho"), format!("{rho} must be ≥ 0")));
            }
        }
        BoundKind::MomentEntropyZeta => {
            let m = need("m", params.m)?;
            let rho = need("rho", params.rho)?;
            positive("rho", rho)?;
            if !(rho < m) {
                return Err(Error::validation(
                    path("rho"),
                    format!("ρ = {rho} must be < m = {m}"),
                ));
            }
        }
        BoundKind::NecessaryTerms => {
            let rho = need("rho", params.rho)?;
            let q = need("q", params.q)?;
            positive("rho", rho)?;
            if !(q > rho + 1.0) {
                return Err(Error::validation(
                    path("q"),
                    format!("q = {q} must exceed ρ + 1 = {}", rho + 1.0),
                ));
            }
        }
        BoundKind::AnytimeNecessary | BoundKind::AnytimeBound => {
            positive("m", need("m", params.m)?)?;
        }
        BoundKind::GartnerEllis | BoundKind::JensenChain | BoundKind::DataProcessing => {
            positive("rho", need("rho", params.rho)?)?;
        }
        BoundKind::MapErrorBound => {
            positive("rho", need("rho", params.rho)?)?;
            above_one("s", need("s", params.s)?)?;
            if params.metric_power.map_or(true, |mp| mp == 0) {
                return Err(Error::validation(
                    path("metric_power"),
                    "a positive integer metric power is required for this bound",
                ));
            }
        }
        BoundKind::SufficientMap => {
            integer_moment("m", need("m", params.m)?)?;
            above_one("s", need("s", params.s)?)?;
        }
        BoundKind::SufficientRho => {
            integer_moment("m", need("m", params.m)?)?;
            above_one("p", need("p", params.p)?)?;
            above_one("s", need("s", params.s)?)?;
        }
    }
    Ok(())
}

/// Deterministic one-line description of everything that affects outputs;
/// its SHA-256 prefix names the output files.
fn canonical_description(
    cfg: &ExperimentConfig,
    seed: SeedSpec,
    budget: u64,
    bound_instances: &[BoundInstance],
) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    match &cfg.instance.source {
        SourceConfig::RateR { rate } => {
            let _ = write!(s, "source=rate_r({rate});");
        }
        SourceConfig::Iid { pmf } => {
            let _ = write!(s, "source=iid({:?},{:?});", pmf.support, pmf.mass);
        }
        SourceConfig::MarkovInteger {
            initial_state,
            transition,
        } => {
            let _ = write!(s, "source=markov({initial_state}");
            for (k, pmf) in transition {
                let _ = write!(s, ",{k}:{:?}/{:?}", pmf.support, pmf.mass);
            }
            let _ = write!(s, ");");
        }
    }
    let ch = &cfg.instance.channel;
    let _ = write!(
        s,
        "channel={:?}|{:?}|{:?};",
        ch.input_alphabet, ch.output_alphabet, ch.rows
    );
    match &cfg.instance.encoder {
        EncoderConfig::CurrentState => s.push_str("encoder=current_state;"),
        EncoderConfig::SystematicDigit => s.push_str("encoder=systematic_digit;"),
        EncoderConfig::Table { steps } => {
            s.push_str("encoder=table(");
            for (k, entries) in steps.iter().enumerate() {
                let _ = write!(s, "step{k}:");
                for e in entries {
                    let _ = write!(s, "{:?}->{},", e.history, e.input);
                }
            }
            s.push_str(");");
        }
    }
    let _ = write!(s, "horizon={};horizons={:?};", cfg.instance.horizon, cfg.horizons);
    for b in bound_instances {
        let _ = write!(
            s,
            "bound={}:{:?}:{:?}:{:?}:{:?}:{:?}:{:?};",
            b.label, b.params.m, b.params.rho, b.params.q, b.params.p, b.params.s, b.params.metric_power
        );
    }
    if let Some(mc) = &cfg.mc {
        let _ = write!(
            s,
            "mc={}x{}@{:?}:{:?};",
            mc.replications, mc.m, mc.confidence, mc.tie == TieConfig::SeededUniform
        );
        if let EstimatorConfig::Rho { rho } = mc.estimator {
            let _ = write!(s, "mc_rho={rho};");
        }
    }
    let _ = write!(
        s,
        "seed={}/{};budget={budget}",
        seed.master_seed, seed.stream_index
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn minimal_config(extra_bounds: &str) -> String {
        format!(
            r#"{{
  "instance": {{
    "source": {{"kind": "rate_r", "rate": 1}},
    "channel": {{"input_alphabet": [0,1], "output_alphabet": [0,1],
                "rows": [[0.9,0.1],[0.1,0.9]]}},
    "encoder": {{"kind": "systematic_digit"}},
    "horizon": 4
  }},
  "bounds": [{extra_bounds}],
  "horizons": [1,2],
  "seed": {{"master_seed": 7, "stream_index": 0}}
}}"#
        )
    }

    #[test]
    fn valid_config_resolves() {
        let text = minimal_config(r#"{"name": "necessary_terms", "params": {"rho": 1.0, "q": 3.0}}"#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let resolved = cfg.resolve(&Overrides::default()).unwrap();
        assert_eq!(resolved.bound_instances.len(), 1);
        assert_eq!(resolved.budget, DEFAULT_BUDGET);
        assert_eq!(resolved.source_rate, Some(1));
    }

    #[test]
    fn q_at_admissibility_boundary_names_the_field() {
        let text = minimal_config(r#"{"name": "necessary_terms", "params": {"rho": 1.0, "q": 2.0}}"#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        match cfg.resolve(&Overrides::default()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "bounds[0].params.q"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn grids_expand_cartesian() {
        let text =
            minimal_config(r#"{"name": "necessary_terms", "params": {"rho": [0.5, 1.0], "q": [3.0, 4.0]}}"#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let resolved = cfg.resolve(&Overrides::default()).unwrap();
        assert_eq!(resolved.bound_instances.len(), 4);
        assert_eq!(resolved.bound_instances[0].label, "necessary_terms_0_0");
        assert_eq!(resolved.bound_instances[3].label, "necessary_terms_0_3");
    }

    #[test]
    fn unknown_bound_name_is_rejected() {
        let text = minimal_config(r#"{"name": "no_such_bound"}"#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        match cfg.resolve(&Overrides::default()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "bounds[0].name"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn horizon_overflow_is_rejected() {
        let text = minimal_config("").replace("\"horizons\": [1,2]", "\"horizons\": [1,9]");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        match cfg.resolve(&Overrides::default()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "horizons[1]"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn overrides_apply() {
        let text = minimal_config("");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let resolved = cfg
            .resolve(&Overrides {
                seed: Some(99),
                output_dir: Some(PathBuf::from("/tmp/x")),
                budget: Some(1234),
            })
            .unwrap();
        assert_eq!(resolved.seed.master_seed, 99);
        assert_eq!(resolved.budget, 1234);
        assert_eq!(resolved.output_dir, PathBuf::from("/tmp/x"));
    }
}
