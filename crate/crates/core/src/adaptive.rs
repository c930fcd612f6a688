//! Greedy MRSE-minimizing setting selection and the nonadaptive baseline.
//!
//! At every step the accumulated real data fixes an a posteriori state
//! `ρ0 = r_ML`. For each grid setting `m_j` and replicate `l` a batch of
//! `N/K` copies is simulated from `ρ0`, the projected ML `r̃_{j,l}` of the
//! combined data is found, and the projected Fisher information (all batches
//! re-evaluated at `r̃_{j,l}`) is scored by the region objective. The setting
//! with the smallest replicate-averaged objective is measured next.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::FisherMatrix;
use crate::inference::{fisher_at, ml_estimate, ml_scoring, Batch, Dataset, MlOptions, MlResult};
use crate::models::{check_setting, sample, Evidence, Setting, StatisticalModel};
use crate::optimize::nelder_mead;
use crate::region::{
    lambda_crit, mrse_asymptotic, mrse_credible_fixed_c, mrse_credible_fixed_s, region_props, RegionSpec,
};
use crate::rng::{stream, tag};
use crate::space::ParamSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Number of steps `K`.
    pub steps: usize,
    /// Total real copies `N`; `K` must divide it.
    pub total_copies: usize,
    /// Simulated datasets per grid setting `L`.
    pub replicates: usize,
    /// Settings-grid count `n_m`.
    pub grid_size: usize,
    pub spec: RegionSpec,
    /// First setting of both schemes, and the fixed setting of the nonadaptive one.
    pub initial_setting: Setting,
    pub seed: u64,
    #[serde(default)]
    pub ml: MlOptions,
}

impl AdaptiveConfig {
    pub fn validate(&self, model: &dyn StatisticalModel) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.steps == 0 {
            return bad("K must be at least 1".into());
        }
        if self.total_copies == 0 || !self.total_copies.is_multiple_of(self.steps) {
            return bad(format!("K = {} must divide N = {}", self.steps, self.total_copies));
        }
        if self.replicates == 0 {
            return bad("L must be at least 1".into());
        }
        if self.grid_size == 0 {
            return bad("n_m must be at least 1".into());
        }
        self.spec.validate()?;
        check_setting(model, &self.initial_setting)
    }

    pub fn copies_per_step(&self) -> usize {
        self.total_copies / self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Adaptive,
    Nonadaptive,
}

/// State after the real batch of step `k` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// Setting measured at this step.
    pub setting: Vec<f64>,
    pub ml: Vec<f64>,
    pub ml_converged: bool,
    pub boundary_hit: bool,
    /// Objective at the ML Fisher information of the accumulated data.
    pub mrse_pred: f64,
    /// Objective at the true-parameter Fisher information, when known.
    pub mrse_true: Option<f64>,
    pub size: f64,
    pub credibility: f64,
    pub lambda: f64,
    /// `λ_crit ≥ 1`: no meaningful plausible region yet.
    pub lambda_crit_flag: bool,
    pub fisher_ml: FisherMatrix,
    /// Replicate-averaged projected objective of the next setting (adaptive only).
    pub projected_objective: Option<f64>,
    pub dropped_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub scheme: Scheme,
    pub spec: RegionSpec,
    pub true_params: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

impl RunRecord {
    pub fn total_copies(&self, copies_per_step: usize) -> usize {
        self.steps.len() * copies_per_step
    }

    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("runs have at least one step")
    }
}

/// Region MRSE selected by `spec`; `+∞` for information-deficient matrices.
///
/// The plausible objective uses `λ = min(λ_crit, 1)`, which equals the
/// plausible closed form whenever a plausible region exists.
pub fn mrse_objective(spec: &RegionSpec, fisher: &FisherMatrix, space: &ParamSpace) -> f64 {
    if !fisher.is_positive_definite() {
        return f64::INFINITY;
    }
    let value = match *spec {
        RegionSpec::FixedS { s0 } => mrse_credible_fixed_s(s0, fisher, space),
        RegionSpec::FixedC { c0 } => mrse_credible_fixed_c(c0, fisher),
        RegionSpec::Plausible => {
            lambda_crit(fisher, space).and_then(|lc| mrse_asymptotic(lc.value.min(1.0), fisher))
        }
    };
    match value {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// Uniform lattice over the setting box, endpoints included. One axis holds
/// `n_m` points; two axes hold `⌈√n_m⌉` points each. `n_m = 1` gives the
/// lower corner.
pub fn settings_grid(space: &ParamSpace, n_m: usize) -> Result<Vec<Setting>> {
    if n_m == 0 {
        return Err(Error::Config("n_m must be at least 1".into()));
    }
    let d = space.dim();
    let per_axis = match d {
        1 => n_m,
        _ => (n_m as f64).powf(1.0 / d as f64).ceil() as usize,
    };
    let per_axis = if n_m == 1 { 1 } else { per_axis.max(2) };
    let axis = |j: usize| -> Vec<f64> {
        let (lo, hi) = (space.lower()[j], space.upper()[j]);
        (0..per_axis)
            .map(|i| if per_axis == 1 { lo } else { lo + (hi - lo) * i as f64 / (per_axis - 1) as f64 })
            .collect()
    };
    let axes: Vec<Vec<f64>> = (0..d).map(axis).collect();
    let total = per_axis.pow(d as u32);
    Ok((0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut v = vec![0.0; d];
            for j in (0..d).rev() {
                v[j] = axes[j][rem % per_axis];
                rem /= per_axis;
            }
            Setting::new(v)
        })
        .collect())
}

/// Diagnostics of one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub setting: Setting,
    pub index: usize,
    /// Replicate-averaged objective per grid setting.
    pub objectives: Vec<f64>,
    pub dropped_replicates: usize,
}

fn refine_steps(model: &dyn StatisticalModel, fisher: &FisherMatrix) -> Vec<f64> {
    let widths: Vec<f64> = model.param_space().widths().collect();
    let inv = fisher.inverse().ok();
    widths
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let sd = inv.as_ref().map(|m| m[(i, i)].max(0.0).sqrt()).unwrap_or(f64::NAN);
            if sd.is_finite() && sd > 0.0 {
                sd.clamp(1e-6 * w, 0.05 * w)
            } else {
                0.05 * w
            }
        })
        .collect()
}

/// Picks the next setting from the accumulated real data over the
/// configured settings grid.
pub fn choose_setting(
    model: &dyn StatisticalModel,
    accumulated: &Dataset,
    ml: &MlResult,
    config: &AdaptiveConfig,
    step_index: usize,
) -> Result<Selection> {
    let grid = settings_grid(model.setting_space(), config.grid_size)?;
    choose_setting_from(model, accumulated, ml, config, step_index, &grid)
}

/// As [`choose_setting`] over an explicit candidate list.
pub fn choose_setting_from(
    model: &dyn StatisticalModel,
    accumulated: &Dataset,
    ml: &MlResult,
    config: &AdaptiveConfig,
    step_index: usize,
    grid: &[Setting],
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::Config("empty settings grid".into()));
    }
    let real = accumulated.evidence();
    let design = accumulated.design();
    let copies = config.copies_per_step();
    let rho0 = &ml.estimate;
    let steps = refine_steps(model, &ml.fisher_at_ml);
    let space = model.param_space();
    let replicates = config.replicates;

    let cells: Vec<Option<f64>> = (0..grid.len() * replicates)
        .into_par_iter()
        .map(|cell| {
            let (j, l) = (cell / replicates, cell % replicates);
            let setting = &grid[j];
            let mut rng = stream(config.seed, &[tag::PROJECTION, step_index as u64, l as u64]);
            let summary = model.simulate_summary(rho0, setting, copies, &mut rng);
            let mut evidence: Vec<Evidence> = real.clone();
            evidence.push(Evidence {
                setting: setting.clone(),
                summary,
            });
            let projected = ml_scoring(model, &evidence, rho0, &steps, &config.ml).ok()?;
            if !projected.converged {
                return None;
            }
            let mut fisher = fisher_at(model, &design, &projected.estimate).ok()?;
            fisher += &(&model.fisher_per_copy(&projected.estimate, setting) * copies as f64);
            Some(mrse_objective(&config.spec, &fisher, space))
        })
        .collect();

    let dropped = cells.iter().filter(|c| c.is_none()).count();
    if dropped == cells.len() {
        return Err(Error::Numerical(format!(
            "every projected estimate failed to converge at step {step_index}"
        )));
    }
    let objectives: Vec<f64> = cells
        .chunks(replicates)
        .map(|reps| {
            let kept: Vec<f64> = reps.iter().flatten().copied().collect();
            if kept.is_empty() {
                f64::INFINITY
            } else {
                kept.iter().sum::<f64>() / kept.len() as f64
            }
        })
        .collect();
    let index = objectives
        .iter()
        .enumerate()
        .fold(0, |best, (j, &v)| if v < objectives[best] || objectives[best].is_nan() { j } else { best });
    Ok(Selection {
        setting: grid[index].clone(),
        index,
        objectives,
        dropped_replicates: dropped,
    })
}

fn step_record(
    model: &dyn StatisticalModel,
    data: &Dataset,
    ml: &MlResult,
    true_params: &[f64],
    spec: &RegionSpec,
    k: usize,
    setting: &Setting,
) -> Result<StepRecord> {
    let space = model.param_space();
    let fisher_ml = ml.fisher_at_ml.clone();
    let mrse_pred = mrse_objective(spec, &fisher_ml, space);
    let mrse_true = mrse_objective(spec, &fisher_at(model, &data.design(), true_params)?, space);
    let props = region_props(spec, &fisher_ml, space).ok();
    let flag = lambda_crit(&fisher_ml, space).map(|lc| lc.degenerate).unwrap_or(true);
    Ok(StepRecord {
        k,
        setting: setting.values().to_vec(),
        ml: ml.estimate.clone(),
        ml_converged: ml.converged,
        boundary_hit: ml.boundary_hit,
        mrse_pred,
        mrse_true: Some(mrse_true),
        size: props.map_or(f64::NAN, |p| p.size),
        credibility: props.map_or(f64::NAN, |p| p.credibility),
        lambda: props.map_or(f64::NAN, |p| p.lambda),
        lambda_crit_flag: flag,
        fisher_ml,
        projected_objective: None,
        dropped_replicates: 0,
    })
}

fn run(model: &dyn StatisticalModel, true_params: &[f64], config: &AdaptiveConfig, scheme: Scheme) -> Result<RunRecord> {
    config.validate(model)?;
    model.param_space().check_point(true_params)?;
    let copies = config.copies_per_step();
    let mut data = Dataset::new();
    let mut setting = config.initial_setting.clone();
    let mut steps = Vec::with_capacity(config.steps);
    for k in 1..=config.steps {
        let mut rng = stream(config.seed, &[tag::DATA, k as u64]);
        let outcomes = sample(model, true_params, &setting, copies, &mut rng)?;
        data.push(Batch::new(model, setting.clone(), outcomes)?);
        let ml = ml_estimate(model, &data, &config.ml)?;
        let mut record = step_record(model, &data, &ml, true_params, &config.spec, k, &setting)?;
        if scheme == Scheme::Adaptive && k < config.steps {
            let sel = choose_setting(model, &data, &ml, config, k)?;
            record.projected_objective = Some(sel.objectives[sel.index]);
            record.dropped_replicates = sel.dropped_replicates;
            setting = sel.setting;
        }
        steps.push(record);
    }
    Ok(RunRecord {
        model: model.name().to_string(),
        scheme,
        spec: config.spec,
        true_params: true_params.to_vec(),
        steps,
    })
}

/// Adaptive campaign: `K` real batches of `N/K` copies, re-planning the
/// setting after each batch.
pub fn run_adaptive(model: &dyn StatisticalModel, true_params: &[f64], config: &AdaptiveConfig) -> Result<RunRecord> {
    run(model, true_params, config, Scheme::Adaptive)
}

/// Baseline measuring `config.initial_setting` at every step. Uses the same
/// data streams as [`run_adaptive`], so paired seeds share their first batch.
pub fn run_nonadaptive(model: &dyn StatisticalModel, true_params: &[f64], config: &AdaptiveConfig) -> Result<RunRecord> {
    run(model, true_params, config, Scheme::Nonadaptive)
}

/// Per-coordinate distance respecting the setting periods, max over coordinates.
pub fn setting_distance(model: &dyn StatisticalModel, a: &Setting, b: &Setting) -> f64 {
    model
        .setting_period()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(&p, (x, y))| {
            let d = (x - y).rem_euclid(p);
            d.min(p - d)
        })
        .fold(0.0, f64::max)
}

/// Greedy optimum of the next setting at a known parameter value: minimizes
/// the objective of the design `previous + copies × m` over the setting box.
///
/// Returns every refined local minimum whose value is within `rel_tol` of the
/// best, so symmetric optima are all reported.
pub fn optimal_next_settings(
    model: &dyn StatisticalModel,
    previous: &[(Setting, usize)],
    params: &[f64],
    copies: usize,
    spec: &RegionSpec,
    per_axis: usize,
    rel_tol: f64,
) -> Result<Vec<(Setting, f64)>> {
    let sspace = model.setting_space();
    let pspace = model.param_space();
    let base = fisher_at(model, previous, params)?;
    let objective = |m: &[f64]| {
        let mut f = base.clone();
        f += &(&model.fisher_per_copy(params, &Setting::new(m.to_vec())) * copies as f64);
        mrse_objective(spec, &f, pspace)
    };
    let n = per_axis.max(3);
    let grid = settings_grid(sspace, n.pow(sspace.dim() as u32))?;
    let values: Vec<f64> = grid.par_iter().map(|s| objective(s.values())).collect();
    let d = sspace.dim();
    // grid-local minima over the axis neighbours
    let index_of = |coords: &[usize]| coords.iter().fold(0, |acc, &c| acc * n + c);
    let mut starts = Vec::new();
    for (flat, &v) in values.iter().enumerate() {
        let mut coords = vec![0; d];
        let mut rem = flat;
        for j in (0..d).rev() {
            coords[j] = rem % n;
            rem /= n;
        }
        let is_min = (0..d).all(|j| {
            [coords[j].checked_sub(1), Some(coords[j] + 1).filter(|&c| c < n)]
                .into_iter()
                .flatten()
                .all(|c| {
                    let mut nb = coords.clone();
                    nb[j] = c;
                    values[index_of(&nb)] >= v
                })
        });
        if is_min && v.is_finite() {
            starts.push(flat);
        }
    }
    let step: Vec<f64> = sspace.widths().map(|w| w / (n - 1) as f64).collect();
    let mut found: Vec<(Setting, f64)> = starts
        .par_iter()
        .map(|&i| {
            let m = nelder_mead(objective, grid[i].values(), &step, sspace, 1e-10, 10_000);
            if m.value <= values[i] {
                (Setting::new(m.x), m.value)
            } else {
                (grid[i].clone(), values[i])
            }
        })
        .collect();
    let best = found.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Numerical("objective is infinite over the whole setting grid".into()));
    }
    found.retain(|f| f.1 <= best + rel_tol * best.abs());
    Ok(found)
}
