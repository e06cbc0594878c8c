//! Experiment suites chaining generate -> metrics -> train, with the
//! metric-accuracy correlation study. Variants run in parallel when the
//! `parallel` feature is on; report rows always follow spec order.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::{generate_dataset, GenerationConfig};
use crate::metrics::{metrics_report, pearson_correlation, DEFAULT_T_THRESHOLD};
use crate::mlp::{init_network, train, MlpConfig};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    NoiseSweep,
    SizeSweep,
    DensitySweep,
    MetricCorrelation,
}

fn default_size_factors() -> Vec<f64> {
    vec![1.0]
}

fn default_densities() -> Vec<f64> {
    vec![1.0]
}

fn default_scale() -> f64 {
    1.0
}

fn default_hidden() -> usize {
    1024
}

fn default_epochs() -> usize {
    30
}

fn default_batch_size() -> usize {
    128
}

fn default_threshold() -> f64 {
    DEFAULT_T_THRESHOLD
}

/// A declarative experiment: which dataset variants to build and how to
/// train on them. Loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub suite: Suite,
    pub families: Vec<u32>,
    pub sigmas: Vec<u32>,
    #[serde(default = "default_size_factors")]
    pub size_factors: Vec<f64>,
    #[serde(default = "default_densities")]
    pub densities: Vec<f64>,
    /// Desk-scale multiplier on the per-class example count.
    #[serde(default = "default_scale")]
    pub scale: f64,
    pub seed: u64,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// L2 coefficient; defaults to 1e-5 for family 4, 0 otherwise.
    #[serde(default)]
    pub l2_lambda: Option<f64>,
    #[serde(default = "default_threshold")]
    pub t_threshold: f64,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.sigmas.is_empty() {
            return Err(Error::InvalidSpec("families and sigmas must be non-empty".into()));
        }
        if self.size_factors.is_empty() || self.densities.is_empty() {
            return Err(Error::InvalidSpec(
                "size_factors and densities must be non-empty".into(),
            ));
        }
        if self.scale <= 0.0 || !self.scale.is_finite() {
            return Err(Error::InvalidSpec("scale must be positive".into()));
        }
        for &f in &self.families {
            for &s in &self.sigmas {
                if !(1..=4).contains(&f) || s > 4 {
                    return Err(Error::InvalidVariant { family: f, sigma: s });
                }
            }
        }
        for &d in &self.densities {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidSpec(format!("density {} out of [0,1]", d)));
            }
        }
        Ok(())
    }
}

/// One (variant, metrics, accuracy) observation, plot-ready.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub family: u32,
    pub sigma: u32,
    pub size_factor: f64,
    pub density: f64,
    pub per_class: usize,
    pub l: f64,
    pub u: f64,
    pub d: f64,
    pub t: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub accuracy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCorrelations {
    pub l: f64,
    pub u: f64,
    pub d: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub suite: Suite,
    pub spec: ExperimentSpec,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<MetricCorrelations>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy)]
struct VariantTask {
    family: u32,
    sigma: u32,
    size_factor: f64,
    density: f64,
}

impl VariantTask {
    fn name(&self) -> String {
        let mut name = format!("{}.{}", self.family, self.sigma);
        if self.size_factor != 1.0 {
            name.push_str(&format!("@size{}", self.size_factor));
        }
        if self.density != 1.0 {
            name.push_str(&format!("@density{}", self.density));
        }
        name
    }
}

fn enumerate_tasks(spec: &ExperimentSpec) -> Vec<VariantTask> {
    let base = VariantTask {
        family: spec.families[0],
        sigma: spec.sigmas[0],
        size_factor: spec.size_factors[0],
        density: spec.densities[0],
    };
    match spec.suite {
        Suite::NoiseSweep | Suite::MetricCorrelation => spec
            .families
            .iter()
            .flat_map(|&family| {
                spec.sigmas
                    .iter()
                    .map(move |&sigma| VariantTask { family, sigma, ..base })
            })
            .collect(),
        Suite::SizeSweep => spec
            .size_factors
            .iter()
            .map(|&size_factor| VariantTask { size_factor, ..base })
            .collect(),
        Suite::DensitySweep => spec
            .densities
            .iter()
            .map(|&density| VariantTask { density, ..base })
            .collect(),
    }
}

fn run_task(task: &VariantTask, spec: &ExperimentSpec) -> Result<ReportRow> {
    let in_context = |e: Error| Error::Variant {
        variant: task.name(),
        source: Box::new(e),
    };
    let mut cfg = GenerationConfig::variant(task.family, task.sigma, task.size_factor)
        .map_err(in_context)?;
    cfg.per_class = ((cfg.per_class as f64) * spec.scale).round().max(1.0) as usize;
    cfg.master_seed = spec.seed;
    let dataset = generate_dataset(&cfg).map_err(in_context)?;
    let metrics = metrics_report(&dataset, spec.t_threshold, false).map_err(in_context)?;
    let l2 = spec
        .l2_lambda
        .unwrap_or(if task.family == 4 { 1e-5 } else { 0.0 });
    let mlp_cfg = MlpConfig {
        n_hidden: spec.hidden,
        density: task.density,
        l2_lambda: l2,
        epochs: spec.epochs,
        batch_size: spec.batch_size,
        init_seed: spec.seed,
        shuffle_seed: spec.seed,
        ..MlpConfig::standard(dataset.n_features)
    };
    let mut net = init_network(&mlp_cfg);
    let report = train(&mut net, &dataset, &mlp_cfg).map_err(in_context)?;
    Ok(ReportRow {
        variant: task.name(),
        family: task.family,
        sigma: task.sigma,
        size_factor: task.size_factor,
        density: task.density,
        per_class: cfg.per_class,
        l: metrics.l,
        u: metrics.u,
        d: metrics.d,
        t: metrics.t,
        train_accuracy: report.final_train_accuracy,
        test_accuracy: report.final_test_accuracy,
        accuracy_gap: report.accuracy_gap,
    })
}

/// Run every variant in the spec and assemble the report.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let tasks = enumerate_tasks(spec);

    #[cfg(feature = "parallel")]
    let rows: Vec<ReportRow> = {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|task| run_task(task, spec))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<ReportRow> = tasks
        .iter()
        .map(|task| run_task(task, spec))
        .collect::<Result<_>>()?;

    let correlations = if spec.suite == Suite::MetricCorrelation {
        let acc: Vec<f64> = rows.iter().map(|r| r.test_accuracy).collect();
        let l: Vec<f64> = rows.iter().map(|r| r.l).collect();
        let u: Vec<f64> = rows.iter().map(|r| r.u).collect();
        let d: Vec<f64> = rows.iter().map(|r| r.d).collect();
        let t: Vec<f64> = rows.iter().map(|r| r.t as f64).collect();
        Some(MetricCorrelations {
            l: pearson_correlation(&l, &acc)?,
            u: pearson_correlation(&u, &acc)?,
            d: pearson_correlation(&d, &acc)?,
            t: pearson_correlation(&t, &acc)?,
        })
    } else {
        None
    };

    Ok(ExperimentReport {
        version: REPORT_VERSION,
        suite: spec.suite,
        spec: spec.clone(),
        rows,
        correlations,
    })
}

pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()?)?;
    Ok(())
}
