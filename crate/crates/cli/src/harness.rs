//! Cartesian experiment sweeps.
//!
//! Every trial seed is `derive(master, [dataset, trial])`. The swept axes are
//! left out on purpose: all cells of one trial share the initial subgraph and
//! random streams, so methods and settings are compared on paired draws.

use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use im_meta::data::{DatasetBundle, SyntheticConfig};
use im_meta::diffusion::{DiffusionConfig, DiffusionModel, IcProbability};
use im_meta::inference::{SiameseConfig, TrainConfig};
use im_meta::pipeline::{run, Method, RunConfig};
use im_meta::rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::io::{load_edge_list, load_features};
use crate::records::ExperimentRecord;
use crate::{Error, Result};

/// Worker-count override for parallel trials.
pub const WORKERS_ENV: &str = "IM_META_WORKERS";

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// `key=value` list: `n`, `d`, `markers`, `in`, `out`, and optionally
    /// `noise`, `extra`, `hubs` and `hub_extra`.
    Synthetic {
        spec: String,
        config: SyntheticConfig,
    },
    Files {
        name: String,
        edges: PathBuf,
        features: Option<PathBuf>,
    },
}

impl DatasetSpec {
    pub fn synthetic(spec: &str) -> Result<Self> {
        let mut n = None;
        let mut d = None;
        let mut markers = None;
        let mut p_in = None;
        let mut p_out = None;
        let mut noise = None;
        let mut extra = None;
        let mut hubs = None;
        let mut hub_extra = None;
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {part:?}")))?;
            let bad = || Error::Config(format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "n" => n = Some(value.parse().map_err(|_| bad())?),
                "d" => d = Some(value.parse().map_err(|_| bad())?),
                "markers" => markers = Some(value.parse().map_err(|_| bad())?),
                "in" => p_in = Some(value.parse().map_err(|_| bad())?),
                "out" => p_out = Some(value.parse().map_err(|_| bad())?),
                "noise" => noise = Some(value.parse().map_err(|_| bad())?),
                "extra" => extra = Some(value.parse().map_err(|_| bad())?),
                "hubs" => hubs = Some(value.parse().map_err(|_| bad())?),
                "hub_extra" => hub_extra = Some(value.parse().map_err(|_| bad())?),
                other => return Err(Error::Config(format!("unknown synthetic key {other:?}"))),
            }
        }
        let need = |name: &str| Error::Config(format!("synthetic spec is missing {name}"));
        let n: usize = n.ok_or_else(|| need("n"))?;
        let d: usize = d.ok_or_else(|| need("d"))?;
        let mut config = SyntheticConfig::new(
            n,
            d,
            markers.unwrap_or_else(|| d.min(4)),
            p_in.ok_or_else(|| need("in"))?,
            p_out.ok_or_else(|| need("out"))?,
        );
        if let Some(x) = noise {
            config.noise_density = x;
        }
        if let Some(x) = extra {
            config.extra_marker_prob = x;
        }
        if let Some(x) = hubs {
            config.hub_fraction = x;
        }
        if let Some(x) = hub_extra {
            config.hub_marker_prob = x;
        }
        Ok(DatasetSpec::Synthetic {
            spec: spec.to_string(),
            config,
        })
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Synthetic { config, .. } => format!("synthetic-n{}", config.n),
            DatasetSpec::Files { name, .. } => name.clone(),
        }
    }

    /// Loads or generates the dataset. Synthetic graphs depend only on the
    /// spec text and `master_seed`.
    pub fn load(&self, master_seed: u64) -> Result<DatasetBundle> {
        match self {
            DatasetSpec::Synthetic { spec, config } => {
                let mut r = rng::seeded(rng::derive(master_seed, &[rng::hash_str(spec)]));
                let mut bundle = config.generate(&mut r)?;
                bundle.name = self.name();
                Ok(bundle)
            }
            DatasetSpec::Files {
                name,
                edges,
                features,
            } => {
                let loaded = load_edge_list(edges)?;
                let n = loaded.graph.node_count();
                let feats = match features {
                    Some(path) => load_features(path, n, Some(&loaded.index()))?,
                    None => im_meta::FeatureMatrix::empty(n, 1),
                };
                Ok(DatasetBundle::new(name.clone(), loaded.graph, feats)?)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub synthetic: Option<String>,
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub name: Option<String>,
}

impl DatasetSection {
    pub fn spec(&self, base: &Path) -> Result<DatasetSpec> {
        match (&self.synthetic, &self.edges) {
            (Some(s), None) => DatasetSpec::synthetic(s),
            (None, Some(e)) => Ok(DatasetSpec::Files {
                name: self.name.clone().unwrap_or_else(|| {
                    e.file_stem()
                        .map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
                }),
                edges: base.join(e),
                features: self.features.as_ref().map(|f| base.join(f)),
            }),
            _ => Err(Error::Config(
                "dataset needs exactly one of `synthetic` or `edges`".into(),
            )),
        }
    }
}

fn one<T: Clone>(x: T) -> Vec<T> {
    vec![x]
}

/// A sweep: every combination of the list-valued axes, `trials` times each.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub dataset: DatasetSection,
    pub methods: Vec<String>,
    #[serde(default = "SuiteConfig::default_queries")]
    pub queries: Vec<usize>,
    #[serde(default = "SuiteConfig::default_seeds")]
    pub seeds: Vec<usize>,
    #[serde(default = "SuiteConfig::default_models")]
    pub models: Vec<String>,
    #[serde(default = "SuiteConfig::default_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "SuiteConfig::default_epsilon")]
    pub epsilon: Vec<f64>,
    #[serde(default = "SuiteConfig::default_drop")]
    pub drop: Vec<f64>,
    #[serde(default = "SuiteConfig::default_trials")]
    pub trials: usize,
    #[serde(default = "SuiteConfig::default_p")]
    pub ic_probability: f64,
    /// Evaluation replicates.
    #[serde(default = "SuiteConfig::default_mc")]
    pub mc: usize,
    /// Greedy-selection replicates; defaults to `mc`.
    pub selection_mc: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub hidden: Option<Vec<usize>>,
    pub embedding: Option<usize>,
    /// Sampled negatives per observed edge.
    pub neg_ratio: Option<f64>,
    pub h_cap: Option<usize>,
    pub theta_cap: Option<usize>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Trials of a cell that start after this budget are recorded as errors.
    pub cell_timeout_ms: Option<u64>,
    pub out: Option<PathBuf>,
}

impl SuiteConfig {
    fn default_queries() -> Vec<usize> {
        one(15)
    }
    fn default_seeds() -> Vec<usize> {
        one(5)
    }
    fn default_models() -> Vec<String> {
        one("ic".into())
    }
    fn default_alpha() -> Vec<f64> {
        one(1.0)
    }
    fn default_epsilon() -> Vec<f64> {
        one(0.5)
    }
    fn default_drop() -> Vec<f64> {
        one(0.0)
    }
    fn default_trials() -> usize {
        10
    }
    fn default_p() -> f64 {
        0.1
    }
    fn default_mc() -> usize {
        20_000
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// A single-cell suite for `dataset` with every other setting at its
    /// default.
    pub fn single(dataset: DatasetSection, method: &str) -> Self {
        Self {
            dataset,
            methods: one(method.to_string()),
            queries: Self::default_queries(),
            seeds: Self::default_seeds(),
            models: Self::default_models(),
            alpha: Self::default_alpha(),
            epsilon: Self::default_epsilon(),
            drop: Self::default_drop(),
            trials: Self::default_trials(),
            ic_probability: Self::default_p(),
            mc: Self::default_mc(),
            selection_mc: None,
            epochs: None,
            learning_rate: None,
            hidden: None,
            embedding: None,
            neg_ratio: None,
            h_cap: None,
            theta_cap: None,
            rng_seed: 0,
            cell_timeout_ms: None,
            out: None,
        }
    }

    /// Every cell's run configuration with the trial seed left at zero.
    pub fn cells(&self) -> Result<Vec<RunConfig>> {
        let methods = self
            .methods
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| Error::Config(format!("unknown method {m:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let models = self
            .models
            .iter()
            .map(|m| match m.as_str() {
                "ic" => Ok(DiffusionModel::Ic),
                "wc" => Ok(DiffusionModel::Wc),
                other => Err(Error::Config(format!("unknown diffusion model {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut train = TrainConfig::default();
        if let Some(e) = self.epochs {
            train.epochs = e;
        }
        if let Some(lr) = self.learning_rate {
            train.learning_rate = lr;
        }
        let mut siamese = SiameseConfig::default();
        if let Some(h) = &self.hidden {
            siamese.hidden = h.clone();
        }
        if let Some(e) = self.embedding {
            siamese.embedding = e;
        }
        let mut cells = Vec::new();
        for &method in &methods {
            for &model in &models {
                for &queries in &self.queries {
                    for &seeds in &self.seeds {
                        for &alpha in &self.alpha {
                            for &epsilon in &self.epsilon {
                                for &drop in &self.drop {
                                    let cfg = RunConfig {
                                        method,
                                        queries,
                                        seeds,
                                        diffusion: DiffusionConfig {
                                            model,
                                            ic_probability: IcProbability::Constant(
                                                self.ic_probability,
                                            ),
                                            replicates: self.mc,
                                        },
                                        selection_replicates: self.selection_mc,
                                        alpha,
                                        epsilon,
                                        h_cap: self.h_cap,
                                        theta_cap: self.theta_cap,
                                        feature_drop: drop,
                                        train,
                                        siamese: siamese.clone(),
                                        neg_ratio: self.neg_ratio.unwrap_or(1.0),
                                        ..RunConfig::default()
                                    };
                                    cfg.validate()?;
                                    cells.push(cfg);
                                }
                            }
                        }
                    }
                }
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(cells)
    }
}

/// Seed for trial `trial` on `dataset` under `master`.
pub fn trial_seed(master: u64, dataset: &str, trial: usize) -> u64 {
    rng::derive(master, &[rng::hash_str(dataset), trial as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    /// Cell-major, trial-minor.
    pub records: Vec<ExperimentRecord>,
    pub failures: usize,
}

fn model_name(m: DiffusionModel) -> &'static str {
    match m {
        DiffusionModel::Ic => "ic",
        DiffusionModel::Wc => "wc",
    }
}

/// Thread count from [`WORKERS_ENV`], else rayon's default.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs every cell of `suite` on `data`. Trials run in parallel; records come
/// back in a fixed order whatever the worker count. A failing trial becomes
/// a row with `sigma = NaN` and the suite carries on.
pub fn run_suite(suite: &SuiteConfig, data: &DatasetBundle) -> Result<SuiteOutcome> {
    let cells = suite.cells()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..suite.trials).map(move |t| (c, t)))
        .collect();
    let started: Vec<OnceLock<Instant>> = (0..cells.len()).map(|_| OnceLock::new()).collect();
    let budget = suite.cell_timeout_ms.map(Duration::from_millis);
    let done = Mutex::new(0usize);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records: Vec<(ExperimentRecord, bool)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, trial)| {
                let mut cfg = cells[c].clone();
                cfg.seed = trial_seed(suite.rng_seed, &data.name, trial);
                let t0 = Instant::now();
                let first = *started[c].get_or_init(Instant::now);
                let over = budget.is_some_and(|b| first.elapsed() > b);
                let result = if over {
                    Err(Error::Config("cell time budget exceeded".into()))
                } else {
                    run(&cfg, data).map_err(Error::from)
                };
                let wall_ms = t0.elapsed().as_millis() as u64;
                let mut record = ExperimentRecord {
                    method: cfg.method.name().to_string(),
                    dataset: data.name.clone(),
                    model: model_name(cfg.diffusion.model).to_string(),
                    queries: cfg.queries,
                    k: cfg.seeds,
                    alpha: cfg.alpha,
                    epsilon: cfg.epsilon,
                    drop: cfg.feature_drop,
                    trial,
                    seed: cfg.seed,
                    sigma: f64::NAN,
                    vt: 0,
                    et: 0,
                    wall_ms,
                };
                let ok = match result {
                    Ok(out) => {
                        record.sigma = out.sigma.mean;
                        record.vt = out.state.observed_count();
                        record.et = out.state.edges().edge_count();
                        true
                    }
                    Err(e) => {
                        log::error!("{} trial {trial}: {e}", cfg.method.name());
                        false
                    }
                };
                let mut n = done.lock().expect("progress lock");
                *n += 1;
                log::info!(
                    "[{}/{}] {} T={} k={} trial {trial}: sigma={:.3} ({wall_ms} ms)",
                    *n,
                    jobs.len(),
                    record.method,
                    record.queries,
                    record.k,
                    record.sigma
                );
                (record, ok)
            })
            .collect()
    });
    let failures = records.iter().filter(|r| !r.1).count();
    Ok(SuiteOutcome {
        records: records.into_iter().map(|r| r.0).collect(),
        failures,
    })
}
