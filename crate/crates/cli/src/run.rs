//! Command execution and result files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use univinf_core::inference::{
    confidence_set, crossfit_lr, split_sample, Criterion, Dataset, Decision, HypothesisSpec, LogStat, TestConfig,
    TestRecord,
};
use univinf_core::models::ChoiceModel;
use univinf_core::simulation::{mc_table, McDesign, McTable, TABLE1_H, TABLE2_H};

use crate::config::{parse_config, Command, DesignChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, Schema};

/// Version of the JSON output layout.
pub const OUTPUT_VERSION: u32 = 1;
pub const DEFAULT_OUT_DIR: &str = "univinf-out";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    /// Replaces the config's data path.
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub design: Option<DesignChoice>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRef {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to re-run a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub command: Command,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub config_text: String,
    pub design_choice: Option<DesignChoice>,
    pub data: Option<DataRef>,
    /// Resolved simulation design.
    pub design: Option<McDesign>,
    /// SHA-256 of each output file.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs one command and writes its outputs; returns the output directory.
pub fn run(inv: &Invocation) -> CliResult<PathBuf> {
    let (cfg, text) = parse_config(&inv.config)?;
    execute(inv, cfg, text)
}

/// Re-runs the command recorded in a manifest into `out`.
pub fn replay(manifest_path: &Path, out: &Path, workers: Option<usize>) -> CliResult<PathBuf> {
    let raw = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", manifest_path.display())))?;
    let m: Manifest = serde_json::from_str(&raw).map_err(|e| CliError::Config(format!("bad manifest: {e}")))?;
    if sha256_hex(m.config_text.as_bytes()) != m.config_hash {
        return Err(CliError::Config("manifest config text does not match its hash".into()));
    }
    let cfg = RunConfig::from_toml(&m.config_text, Path::new("."))?;
    let inv = Invocation {
        command: m.command,
        config: manifest_path.to_path_buf(),
        data: m.data.as_ref().map(|d| d.path.clone()),
        out: Some(out.to_path_buf()),
        design: m.design_choice,
        workers,
    };
    if let Some(d) = &m.data {
        let bytes = std::fs::read(&d.path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", d.path.display())))?;
        if sha256_hex(&bytes) != d.sha256 {
            return Err(CliError::Data(format!("{} changed since the manifest was written", d.path.display())));
        }
    }
    execute(&inv, cfg, m.config_text)
}

fn execute(inv: &Invocation, mut cfg: RunConfig, text: String) -> CliResult<PathBuf> {
    if let Some(p) = &inv.data {
        match cfg.data.as_mut() {
            Some(d) => d.path = p.clone(),
            None => return Err(CliError::Config("--data given but the config has no [data] block".into())),
        }
    }
    let design_choice = match inv.command {
        Command::Simulate => Some(inv.design.unwrap_or(DesignChoice::Custom)),
        _ => None,
    };
    cfg.validate_for(inv.command, design_choice)?;
    let out = inv
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out)?;

    let mut manifest = Manifest {
        version: OUTPUT_VERSION,
        command: inv.command,
        config_hash: sha256_hex(text.as_bytes()),
        config_text: text,
        design_choice,
        data: None,
        design: None,
        outputs: BTreeMap::new(),
    };
    let mut job = || -> CliResult<Vec<(String, Vec<u8>)>> {
        match inv.command {
            Command::Test => {
                let (model, data, data_ref) = load(&cfg)?;
                manifest.data = Some(data_ref);
                run_test(&cfg, model.as_ref(), &data, &manifest.config_hash)
            }
            Command::Confset => {
                let (model, data, data_ref) = load(&cfg)?;
                manifest.data = Some(data_ref);
                run_confset(&cfg, model.as_ref(), &data, &manifest.config_hash)
            }
            Command::Simulate => {
                let design = resolve_design(&cfg, design_choice.expect("simulate has a design"))?;
                manifest.design = Some(design.clone());
                run_simulate(&design)
            }
        }
    };
    let started = Instant::now();
    let files = match inv.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Run(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    for (name, bytes) in &files {
        std::fs::write(out.join(name), bytes)?;
        manifest.outputs.insert(name.clone(), sha256_hex(bytes));
    }
    let m = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Run(e.to_string()))?;
    std::fs::write(out.join(MANIFEST_FILE), m)?;
    eprintln!(
        "{}: wrote {} file(s) to {} in {:.2}s",
        inv.command,
        files.len() + 1,
        out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(out)
}

fn load(cfg: &RunConfig) -> CliResult<(std::sync::Arc<dyn ChoiceModel>, Dataset, DataRef)> {
    let model = cfg
        .model
        .as_ref()
        .expect("validated")
        .build()
        .map_err(|e| CliError::Config(format!("model: {e}")))?;
    let block = cfg.data.as_ref().expect("validated");
    let schema = Schema {
        outcome_column: block.outcome_column.clone(),
        covariate_columns: block.covariate_columns.clone(),
        covariate_kind: block.covariate_kind,
    };
    let data = ingest_csv(&block.path, &schema, model.space())?;
    if data.covariate_dim() != model.covariate_dim() {
        return Err(CliError::Data(format!(
            "data has {} covariate column(s), the model expects {}",
            data.covariate_dim(),
            model.covariate_dim()
        )));
    }
    let bytes = std::fs::read(&block.path)?;
    let path = std::fs::canonicalize(&block.path)?;
    Ok((
        model,
        data,
        DataRef {
            path,
            sha256: sha256_hex(&bytes),
        },
    ))
}

fn test_config(cfg: &RunConfig) -> TestConfig {
    TestConfig {
        alpha: cfg.alpha,
        criterion: cfg.criterion,
        route: cfg.route,
        optimizer_seed: cfg.seed,
    }
}

fn json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// Contents of `record.json`. Extended reals are numbers or `"+inf"`/`"-inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutput {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub alpha: f64,
    pub criterion: Criterion,
    pub decision: Decision,
    pub s_n: LogStat,
    pub t_n: LogStat,
    pub t_n_swap: LogStat,
    pub theta_hat1_forward: Vec<f64>,
    pub theta_hat1_swapped: Vec<f64>,
    pub theta_hat0_forward: Vec<f64>,
    pub theta_hat0_swapped: Vec<f64>,
    pub record: TestRecord,
}

fn run_test(cfg: &RunConfig, model: &dyn ChoiceModel, data: &Dataset, hash: &str) -> CliResult<Vec<(String, Vec<u8>)>> {
    let h = cfg.hypothesis.as_ref().expect("validated");
    let grid = h.null.points().map_err(|e| CliError::Config(e.to_string()))?;
    let hyp = HypothesisSpec::new(grid, h.search_box.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    if hyp.search_box.dim() != model.theta_dim() {
        return Err(CliError::Config(format!(
            "hypothesis has dimension {}, the model has {} parameters",
            hyp.search_box.dim(),
            model.theta_dim()
        )));
    }
    let plan = split_sample(data, cfg.seed).map_err(|e| CliError::Data(e.to_string()))?;
    let record = crossfit_lr(data, &plan, &hyp, model, &test_config(cfg))?;
    let out = TestOutput {
        version: OUTPUT_VERSION,
        config_hash: hash.to_string(),
        seed: cfg.seed,
        alpha: cfg.alpha,
        criterion: cfg.criterion,
        decision: record.decision,
        s_n: LogStat(record.s_n()),
        t_n: LogStat(record.t_n()),
        t_n_swap: LogStat(record.t_n_swap()),
        theta_hat1_forward: record.forward.theta_hat1.clone(),
        theta_hat1_swapped: record.swapped.theta_hat1.clone(),
        theta_hat0_forward: record.forward.theta_hat0.clone(),
        theta_hat0_swapped: record.swapped.theta_hat0.clone(),
        record,
    };
    Ok(vec![("record.json".into(), json(&out)?)])
}

/// Contents of the confidence-set `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfsetSummary {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub alpha: f64,
    pub functional: univinf_core::inference::Functional,
    pub theta_hat1_forward: Vec<f64>,
    pub theta_hat1_swapped: Vec<f64>,
    pub tested: usize,
    pub retained: Vec<f64>,
    pub skipped: Vec<f64>,
    pub retained_min: Option<f64>,
    pub retained_max: Option<f64>,
    /// Whether the retained values are consecutive among the non-skipped
    /// tested values. Reported only.
    pub retained_is_interval: bool,
}

fn run_confset(cfg: &RunConfig, model: &dyn ChoiceModel, data: &Dataset, hash: &str) -> CliResult<Vec<(String, Vec<u8>)>> {
    let c = cfg.confset.as_ref().expect("validated");
    let phis = c.phi.values()?;
    let nuisance = c.nuisance.points().map_err(|e| CliError::Config(e.to_string()))?;
    if nuisance.iter().any(|t| t.len() != model.theta_dim()) || c.search_box.dim() != model.theta_dim() {
        return Err(CliError::Config(format!(
            "confset grids must have the model's {} parameters",
            model.theta_dim()
        )));
    }
    c.functional
        .eval(&nuisance[0], model)
        .map_err(|e| CliError::Config(format!("confset.functional: {e}")))?;
    let plan = split_sample(data, cfg.seed).map_err(|e| CliError::Data(e.to_string()))?;
    let cs = confidence_set(data, model, &c.functional, &phis, &nuisance, c.tolerance, &c.search_box, &plan, &test_config(cfg))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["phi", "null_points", "log_s_n", "s_n", "retained", "skipped"]).map_err(io)?;
    for r in &cs.rows {
        let (log_s, s) = match r.log_s {
            Some(l) => (l.0.to_string(), l.exp().to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.phi.to_string(),
            r.null_points.to_string(),
            log_s,
            s,
            r.retained.to_string(),
            r.skipped.to_string(),
        ])
        .map_err(io)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let tested: Vec<&univinf_core::inference::ConfsetRow> = cs.rows.iter().filter(|r| !r.skipped).collect();
    let first = tested.iter().position(|r| r.retained);
    let last = tested.iter().rposition(|r| r.retained);
    let is_interval = match (first, last) {
        (Some(a), Some(b)) => tested[a..=b].iter().all(|r| r.retained),
        _ => true,
    };
    let retained = cs.retained();
    let summary = ConfsetSummary {
        version: OUTPUT_VERSION,
        config_hash: hash.to_string(),
        seed: cfg.seed,
        alpha: cfg.alpha,
        functional: c.functional.clone(),
        theta_hat1_forward: cs.theta_hat1_forward.clone(),
        theta_hat1_swapped: cs.theta_hat1_swapped.clone(),
        tested: tested.len(),
        retained_min: retained.iter().copied().reduce(f64::min),
        retained_max: retained.iter().copied().reduce(f64::max),
        retained,
        skipped: cs.skipped(),
        retained_is_interval: is_interval,
    };
    Ok(vec![("confset.csv".into(), csv_bytes), ("summary.json".into(), json(&summary)?)])
}

/// The design `simulate` runs: a preset with the config's overrides, or the
/// config's full `[design]` block.
pub fn resolve_design(cfg: &RunConfig, choice: DesignChoice) -> CliResult<McDesign> {
    let mut d = match choice {
        DesignChoice::Custom => return Ok(cfg.design.clone().expect("validated")),
        DesignChoice::Table1 => {
            let mut d = McDesign::table1(100, Criterion::Mle, TABLE1_H.to_vec(), 1000);
            d.sample_sizes = vec![50, 100, 200];
            d.criteria = vec![Criterion::Mle, Criterion::Moment];
            d
        }
        DesignChoice::Table2 => {
            let mut d = McDesign::table2(100, TABLE2_H.to_vec(), 1000);
            d.sample_sizes = vec![50, 100, 200, 300];
            d
        }
    };
    d.alpha = cfg.alpha;
    d.seed = cfg.seed;
    d.route = cfg.route;
    if let Some(s) = &cfg.simulation {
        if let Some(v) = &s.sample_sizes {
            d.sample_sizes = v.clone();
        }
        if let Some(v) = &s.criteria {
            d.criteria = v.clone();
        }
        if let Some(v) = &s.h_grid {
            d.h_grid = v.clone();
        }
        if let Some(v) = s.replications {
            d.replications = v;
        }
        if let Some(v) = s.selection {
            d.selection = v;
        }
    }
    d.validate().map_err(|e| CliError::Config(format!("simulation: {e}")))?;
    Ok(d)
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::Moment => "moment",
        Criterion::Mle => "mle",
        Criterion::Entrants => "entrants",
    }
}

pub fn table_csv(table: &McTable) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["n", "criterion", "h", "power", "mc_se", "reps"]).map_err(io)?;
    for r in &table.rows {
        w.write_record([
            r.n.to_string(),
            criterion_name(r.criterion).to_string(),
            r.h.to_string(),
            r.power.to_string(),
            r.mc_se.to_string(),
            r.reps.to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn run_simulate(design: &McDesign) -> CliResult<Vec<(String, Vec<u8>)>> {
    design.validate().map_err(|e| CliError::Config(format!("design: {e}")))?;
    let table = mc_table(design)?;
    Ok(vec![("table.csv".into(), table_csv(&table)?), ("table.json".into(), json(&table)?)])
}
