use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use bayesreg::adaptive::{run_adaptive, run_nonadaptive, AdaptiveConfig, RunRecord, Scheme};
use bayesreg::models::{named_values, to_named};
use bayesreg::rng::{stream_id, tag};
use bayesreg::{MlOptions, ModelSpec, RegionSpec, Setting, StatisticalModel, SCHEMA_VERSION};

use crate::{CliError, CliResult, SimulateArgs};

pub const CSV_HELP: &str = "\
CSV columns (one row per run and step):
  run               replica index, 0-based
  k                 step index, 1-based
  <setting names>   setting measured at step k (theta | psi1,psi2 | theta1,theta2)
  ml_<param>        ML estimate after step k
  mrse_pred         region MRSE objective at the ML estimate
  mrse_true         same objective with the Fisher information at the true parameter
  s                 region size at the ML estimate
  c                 region credibility at the ML estimate
  lambda            likelihood-ratio level of the region
  lambda_crit_flag  true when lambda_crit >= 1 (no plausible region)

The JSON file holds the resolved config and the full run records under
schema_version.";

/// Experiment description as read from a config file; every field may be
/// overridden on the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    model: Option<ModelSpec>,
    true_params: Option<BTreeMap<String, f64>>,
    scheme: Option<Scheme>,
    region: Option<RegionSpec>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(rename = "L")]
    l: Option<usize>,
    nm: Option<usize>,
    initial_setting: Option<BTreeMap<String, f64>>,
    runs: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    ml: Option<MlOptions>,
}

/// Fully resolved experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub true_params: BTreeMap<String, f64>,
    pub scheme: Scheme,
    pub region: RegionSpec,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub nm: usize,
    pub initial_setting: BTreeMap<String, f64>,
    pub runs: usize,
    pub seed: u64,
    pub ml: MlOptions,
}

struct ModelDefaults {
    truth: &'static [f64],
    initial: &'static [f64],
    n: usize,
    nm: usize,
}

fn defaults(model: &ModelSpec) -> ModelDefaults {
    match model {
        ModelSpec::Homodyne { .. } => ModelDefaults {
            truth: &[1.179],
            initial: &[1.837],
            n: 1000,
            nm: 32,
        },
        ModelSpec::ThreePath => ModelDefaults {
            truth: &[0.5, 1.0],
            initial: &[0.0, 0.0],
            n: 5000,
            nm: 1024,
        },
        ModelSpec::Squeezed => ModelDefaults {
            truth: &[3.2580, 1.0517],
            initial: &[0.27, 1.0],
            n: 10_000,
            nm: 1024,
        },
    }
}

fn parse_model(name: &str, current: Option<&ModelSpec>) -> CliResult<ModelSpec> {
    match name {
        "homodyne" => Ok(match current {
            Some(m @ ModelSpec::Homodyne { .. }) => m.clone(),
            _ => ModelSpec::Homodyne { zeta: 0.7 },
        }),
        "three-path" => Ok(ModelSpec::ThreePath),
        "squeezed" => Ok(ModelSpec::Squeezed),
        other => Err(CliError::Usage(format!(
            "unknown model '{other}', expected homodyne, three-path or squeezed"
        ))),
    }
}

fn parse_scheme(name: &str) -> CliResult<Scheme> {
    match name {
        "adaptive" => Ok(Scheme::Adaptive),
        "nonadaptive" => Ok(Scheme::Nonadaptive),
        other => Err(CliError::Usage(format!("unknown scheme '{other}', expected adaptive or nonadaptive"))),
    }
}

fn resolve_region(args: &SimulateArgs, current: Option<RegionSpec>) -> CliResult<RegionSpec> {
    let kind = args
        .region
        .clone()
        .unwrap_or_else(|| current.map_or("plausible", |r| r.label()).to_string());
    let from_file_s = match current {
        Some(RegionSpec::FixedS { s0 }) => Some(s0),
        _ => None,
    };
    let from_file_c = match current {
        Some(RegionSpec::FixedC { c0 }) => Some(c0),
        _ => None,
    };
    match kind.as_str() {
        "fixed-s" => args
            .s0
            .or(from_file_s)
            .map(|s0| RegionSpec::FixedS { s0 })
            .ok_or_else(|| CliError::Usage("--region fixed-s needs --s0".into())),
        "fixed-c" => args
            .c0
            .or(from_file_c)
            .map(|c0| RegionSpec::FixedC { c0 })
            .ok_or_else(|| CliError::Usage("--region fixed-c needs --c0".into())),
        "plausible" => Ok(RegionSpec::Plausible),
        other => Err(CliError::Usage(format!(
            "unknown region '{other}', expected fixed-s, fixed-c or plausible"
        ))),
    }
}

fn read_file(args: &SimulateArgs) -> CliResult<ExperimentFile> {
    let Some(path) = &args.config else {
        return Ok(ExperimentFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Merges the config file and flags into a validated experiment.
fn resolve(args: &SimulateArgs) -> CliResult<(ExperimentConfig, Option<PathBuf>)> {
    let file = read_file(args)?;
    let model = match &args.model {
        Some(name) => parse_model(name, file.model.as_ref())?,
        None => file
            .model
            .clone()
            .ok_or_else(|| CliError::Usage("no model given; use --model or a config file".into()))?,
    };
    let def = defaults(&model);
    let built = model.build()?;
    let named = |values: &[f64], names: &[&str]| to_named(names, values);
    let config = ExperimentConfig {
        true_params: file
            .true_params
            .clone()
            .unwrap_or_else(|| named(def.truth, built.param_names())),
        initial_setting: file
            .initial_setting
            .clone()
            .unwrap_or_else(|| named(def.initial, built.setting_names())),
        scheme: match &args.scheme {
            Some(s) => parse_scheme(s)?,
            None => file.scheme.unwrap_or(Scheme::Adaptive),
        },
        region: resolve_region(args, file.region)?,
        n: args.n.or(file.n).unwrap_or(def.n),
        k: args.k.or(file.k).unwrap_or(10),
        l: args.l.or(file.l).unwrap_or(20),
        nm: args.nm.or(file.nm).unwrap_or(def.nm),
        runs: args.runs.or(file.runs).unwrap_or(1),
        seed: args.seed.or(file.seed).unwrap_or(0),
        ml: file.ml.unwrap_or_default(),
        model,
    };
    if config.runs == 0 {
        return Err(CliError::Usage("runs must be at least 1".into()));
    }
    Ok((config, args.out.clone().or(file.out)))
}

fn adaptive_config(config: &ExperimentConfig, model: &dyn StatisticalModel, seed: u64) -> CliResult<AdaptiveConfig> {
    let initial = named_values(model.setting_names(), &config.initial_setting)?;
    let cfg = AdaptiveConfig {
        steps: config.k,
        total_copies: config.n,
        replicates: config.l,
        grid_size: config.nm,
        spec: config.region,
        initial_setting: Setting::new(initial),
        seed,
        ml: config.ml,
    };
    cfg.validate(model)?;
    Ok(cfg)
}

/// Runs every replica; replica `r` draws from the stream family `(seed, r)`.
pub fn simulate(config: &ExperimentConfig) -> CliResult<Vec<RunRecord>> {
    let model = config.model.build()?;
    let truth = named_values(model.param_names(), &config.true_params)?;
    model.param_space().check_point(&truth)?;
    adaptive_config(config, model.as_ref(), config.seed)?;
    (0..config.runs as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = adaptive_config(config, model.as_ref(), stream_id(config.seed, &[tag::REPLICA, r]))?;
            let record = match config.scheme {
                Scheme::Adaptive => run_adaptive(model.as_ref(), &truth, &cfg)?,
                Scheme::Nonadaptive => run_nonadaptive(model.as_ref(), &truth, &cfg)?,
            };
            Ok(record)
        })
        .collect()
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Failure(format!("csv error: {e}"))
}

pub fn write_csv(config: &ExperimentConfig, runs: &[RunRecord], sink: impl Write) -> CliResult<()> {
    let model = config.model.build()?;
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["run".to_string(), "k".to_string()];
    header.extend(model.setting_names().iter().map(|s| s.to_string()));
    header.extend(model.param_names().iter().map(|p| format!("ml_{p}")));
    header.extend(
        ["mrse_pred", "mrse_true", "s", "c", "lambda", "lambda_crit_flag"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(csv_error)?;
    for (r, run) in runs.iter().enumerate() {
        for step in &run.steps {
            let mut row = vec![r.to_string(), step.k.to_string()];
            row.extend(step.setting.iter().map(f64::to_string));
            row.extend(step.ml.iter().map(f64::to_string));
            row.push(step.mrse_pred.to_string());
            row.push(step.mrse_true.map(|v| v.to_string()).unwrap_or_default());
            row.push(step.size.to_string());
            row.push(step.credibility.to_string());
            row.push(step.lambda.to_string());
            row.push(step.lambda_crit_flag.to_string());
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: &'static str,
    config: &'a ExperimentConfig,
    runs: &'a [RunRecord],
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let (config, out) = resolve(args)?;
    let runs = simulate(&config)?;
    match out {
        None => write_csv(&config, &runs, std::io::stdout().lock()),
        Some(path) => {
            let csv_path = path.with_extension("csv");
            let json_path = path.with_extension("json");
            write_csv(&config, &runs, std::fs::File::create(&csv_path)?)?;
            let report = JsonReport {
                schema_version: SCHEMA_VERSION,
                config: &config,
                runs: &runs,
            };
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))?;
            std::fs::write(&json_path, json + "\n")?;
            eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
            Ok(())
        }
    }
}
