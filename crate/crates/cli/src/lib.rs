//! Experiment runner behind the `qdepth` binary.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qdepth_core::compressed::{equivalence_suite, extract_collision, ExtractConfig, ExtractTarget};
use qdepth_core::experiments::{
    constants_table, h_collision_experiment, honest_collision_experiment, serial_experiment, CollisionConfig,
    HCollisionConfig, SerialConfig,
};
use qdepth_core::hybrid::Backend;
use qdepth_core::oracle::HASH_NAME;
use qdepth_core::podq::{self, ProverKind};
use qdepth_core::provers::ProverBackend;
use qdepth_core::shadowlab::{run_shadowlab, ShadowlabConfig};
use qdepth_core::stats::sigma;
use qdepth_core::{Error, Result, Seed};

pub const SCHEMA_VERSION: u32 = 1;

/// The published report schema.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Constants,
    HonestCollision,
    Podq,
    Serial,
    Hcollision,
    CompressedEquiv,
    Extract,
    Shadowlab,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::HonestCollision => "honest-collision",
            Experiment::Podq => "podq",
            Experiment::Serial => "serial",
            Experiment::Hcollision => "hcollision",
            Experiment::CompressedEquiv => "compressed-equiv",
            Experiment::Extract => "extract",
            Experiment::Shadowlab => "shadowlab",
        }
    }

    /// `(lambda, d, trials)` used when a flag is omitted.
    pub fn defaults(self) -> (usize, usize, usize) {
        match self {
            Experiment::Constants => (12, 0, 1),
            Experiment::HonestCollision => (10, 0, 1000),
            Experiment::Podq => (10, 2, 200),
            Experiment::Serial => (8, 3, 100),
            Experiment::Hcollision => (8, 4, 200),
            Experiment::CompressedEquiv => (4, 0, 20),
            Experiment::Extract => (4, 1, 500),
            Experiment::Shadowlab => (3, 2, 10_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    /// Sample the measured image, then simulate only its preimage branch.
    Structured,
    /// Dense state vectors.
    Dense,
    /// Sparse amplitude maps.
    Sparse,
}

impl BackendArg {
    fn prover(self) -> ProverBackend {
        match self {
            BackendArg::Structured => ProverBackend::StructuredBranch,
            BackendArg::Dense => ProverBackend::FullStatevector,
            BackendArg::Sparse => ProverBackend::SparseCircuit,
        }
    }

    fn machine(self) -> Result<Backend> {
        match self {
            BackendArg::Dense => Ok(Backend::Dense),
            BackendArg::Sparse => Ok(Backend::Sparse),
            BackendArg::Structured => Err(Error::param(
                "this experiment runs circuits; use --backend dense or sparse",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A decimal `u64` or 32 hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedArg(pub Seed);

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(SeedArg(Seed::from_u64(v)));
        }
        if s.len() == 32 {
            return Seed::from_hex(s).map(SeedArg).map_err(|e| e.to_string());
        }
        Err(format!("`{s}` is neither a u64 nor 32 hex digits"))
    }
}

impl fmt::Display for SeedArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_hex())
    }
}

/// Every input of a run; serialized into the report for replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub lambda: usize,
    pub d: usize,
    pub trials: usize,
    /// 32 hex digits.
    pub seed: String,
    pub backend: Option<BackendArg>,
    pub out: Option<String>,
    pub hash_name: String,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: Seed) -> Self {
        let (lambda, d, trials) = experiment.defaults();
        ExperimentConfig {
            experiment,
            lambda,
            d,
            trials,
            seed: seed.to_hex(),
            backend: None,
            out: None,
            hash_name: HASH_NAME.to_string(),
        }
    }

    fn seed(&self) -> Result<Seed> {
        Seed::from_hex(&self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub report: Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// `path,value` rows, one per scalar leaf of the report.
    pub fn to_csv(&self) -> String {
        let mut rows = vec!["path,value".to_string()];
        let whole = serde_json::to_value(self).expect("reports serialize");
        flatten("", &whole, &mut rows);
        let mut s = rows.join("\n");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<String>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::String(s) => rows.push(format!("{},{}", csv_field(prefix), csv_field(s))),
        other => rows.push(format!("{},{}", csv_field(prefix), other)),
    }
}

fn to_value<T: Serialize>(r: &T) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

/// Executes the named harness and judges its report.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.hash_name != HASH_NAME {
        return Err(Error::param(format!("unsupported hash `{}`", cfg.hash_name)));
    }
    if cfg.trials == 0 {
        return Err(Error::param("--trials must be positive"));
    }
    let seed = cfg.seed()?;
    let (checks, report) = match cfg.experiment {
        Experiment::Constants => {
            let r = constants_table(cfg.lambda)?;
            let gaps = r.gaps_above(10, 0.01);
            let checks = vec![
                check(
                    "c_4_2_exact",
                    r.small_case_matches(),
                    format!("{} vs {}", r.c_4_2, r.c_4_2_enumerated),
                ),
                check(
                    "limit_within_1pct",
                    gaps.is_empty(),
                    format!("lambda >= 10 off by more than 1%: {gaps:?}"),
                ),
            ];
            (checks, to_value(&r))
        }
        Experiment::HonestCollision => {
            let mut c = CollisionConfig::new(cfg.lambda, cfg.d, cfg.trials, seed);
            if let Some(b) = cfg.backend {
                c.backend = b.prover();
            }
            let r = honest_collision_experiment(&c)?;
            let checks = vec![
                check(
                    "interference",
                    r.interference.violations == 0,
                    format!("{:?}", r.interference),
                ),
                check(
                    "completeness",
                    r.completeness_ok(),
                    format!("{} >= {}", r.honest.rate, r.chernoff_lower_bound),
                ),
                check(
                    "random_guess",
                    r.random_guess_ok(),
                    format!("{} <= {}", r.random_guess.rate, r.random_guess_limit),
                ),
                check("depth", r.depth_ok(), format!("{:?}", r.depth)),
            ];
            (checks, to_value(&r))
        }
        Experiment::Podq => {
            let mut c = podq::ExperimentConfig::new(cfg.lambda, cfg.d, cfg.trials, seed);
            if let Some(b) = cfg.backend {
                c.backend = b.prover();
            }
            let r = podq::experiment(&c)?;
            let mut checks = Vec::new();
            if let (Some(t), Some(h), Some(g)) = (
                r.thresholds,
                r.prover(ProverKind::Honest),
                r.prover(ProverKind::RandomGuess),
            ) {
                let limit = t.random_guess_bound + 3.0 * sigma(t.random_guess_bound, g.acceptance.trials);
                checks.push(check(
                    "completeness",
                    h.acceptance.rate >= t.chernoff_lower_bound,
                    format!("{} >= {}", h.acceptance.rate, t.chernoff_lower_bound),
                ));
                checks.push(check(
                    "random_guess",
                    g.acceptance.rate <= limit,
                    format!("{} <= {limit}", g.acceptance.rate),
                ));
            }
            if let Some(q) = r.prover(ProverKind::CqcBudgeted) {
                checks.push(check(
                    "cqc_budget_exceeded",
                    q.budget_exceeded == q.acceptance.trials,
                    format!("{} of {}", q.budget_exceeded, q.acceptance.trials),
                ));
            }
            (checks, to_value(&r))
        }
        Experiment::Serial => {
            let mut c = SerialConfig::new(cfg.lambda, cfg.d, cfg.trials, seed);
            if let Some(b) = cfg.backend {
                c.backend = b.machine()?;
            }
            let r = serial_experiment(&c)?;
            let checks = vec![
                check(
                    "completeness",
                    r.completeness_ok(),
                    format!("{} >= {}", r.honest.rate, r.product_bound),
                ),
                check(
                    "tamper",
                    r.tamper_rejected.rate >= 0.99,
                    format!("{} >= 0.99", r.tamper_rejected.rate),
                ),
            ];
            (checks, to_value(&r))
        }
        Experiment::Hcollision => {
            let mut c = HCollisionConfig::new(cfg.lambda, cfg.d, cfg.trials, seed);
            if let Some(b) = cfg.backend {
                c.backend = b.machine()?;
            }
            let r = h_collision_experiment(&c)?;
            let checks = vec![
                check(
                    "acceptance",
                    r.acceptance.rate >= 0.95,
                    format!("{} >= 0.95 (hit bound {})", r.acceptance.rate, r.hit_bound),
                ),
                check(
                    "constant_depth",
                    r.depth_is_constant(),
                    format!("{}..={}", r.min_depth, r.max_depth),
                ),
                check(
                    "stage_queries",
                    r.stage_query_mismatches == 0,
                    format!("{} trials off {}", r.stage_query_mismatches, r.expected_stage_queries),
                ),
            ];
            (checks, to_value(&r))
        }
        Experiment::CompressedEquiv => {
            let r = equivalence_suite(cfg.trials, seed)?;
            let checks = vec![
                check("max_tv", r.max_tv < 1e-9, format!("{} < 1e-9", r.max_tv)),
                check(
                    "decomp_involution",
                    r.decomp_involution_error < 1e-9,
                    format!("{} < 1e-9", r.decomp_involution_error),
                ),
            ];
            (checks, to_value(&r))
        }
        Experiment::Extract => {
            let c = ExtractConfig {
                lambda: cfg.lambda,
                d: cfg.d,
                trials: cfg.trials,
                seed,
                target: ExtractTarget::HonestQc,
            };
            let r = extract_collision(&c)?;
            let checks = vec![check(
                "all_verified",
                r.all_verified,
                format!("{} emissions, nonempty rate {}", r.emissions.len(), r.nonempty.rate),
            )];
            (checks, to_value(&r))
        }
        Experiment::Shadowlab => {
            let c = ShadowlabConfig::new(cfg.lambda, cfg.d, cfg.trials, seed);
            let r = run_shadowlab(&c)?;
            let checks = vec![
                check("abort", r.abort_ok(), format!("{} <= {}", r.abort.rate, r.abort_limit)),
                check("find", r.find_ok(), format!("{} cells", r.find.len())),
                check("exclusion_find", r.qc_ok(), format!("{} cells", r.qc.len())),
                check("structure", r.structure_ok(), format!("{} exact runs", r.exact_runs)),
            ];
            (checks, to_value(&r))
        }
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_as_integers_or_hex() {
        let a: SeedArg = "7".parse().unwrap();
        assert_eq!(a.0, Seed::from_u64(7));
        let b: SeedArg = a.to_string().parse().unwrap();
        assert_eq!(a, b);
        assert!("xyz".parse::<SeedArg>().is_err());
    }

    #[test]
    fn constants_run_passes() {
        let r = run(&ExperimentConfig::new(Experiment::Constants, Seed::from_u64(1))).unwrap();
        assert!(r.passed, "{:?}", r.checks);
        assert!(r.to_csv().lines().any(|l| l.starts_with("report.c_4_2,2/5")));
    }

    #[test]
    fn circuit_experiments_refuse_the_structured_backend() {
        let mut cfg = ExperimentConfig::new(Experiment::Serial, Seed::from_u64(1));
        cfg.backend = Some(BackendArg::Structured);
        assert!(matches!(run(&cfg), Err(Error::Parameter(_))));
    }
}
