//! JSON run configurations and the single-run executor.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{inject_noise, load_idx, make_probe_batch, BlobGenerator, IdxOptions, LabeledDataset, NoiseKind, NoiseSpec};
use crate::error::{invalid, Error, Result};
use crate::nn::{accuracy, init_two_layer, MlpClassifier, Model, OptimizerConfig, Schedule, TrainState};
use crate::record::CheckpointRecord;
use crate::rng;
use crate::susceptibility::{ProbeEta, SusceptibilityTracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    SyntheticBlobs,
    SyntheticSphere,
    Idx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxPaths {
    pub images: PathBuf,
    pub labels: PathBuf,
    #[serde(default)]
    pub test_images: Option<PathBuf>,
    #[serde(default)]
    pub test_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default = "default_classes")]
    pub classes: usize,
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Size of the held-out split for synthetic data; 0 disables it.
    #[serde(default)]
    pub test_n: usize,
    #[serde(default)]
    pub paths: Option<IdxPaths>,
    #[serde(default)]
    pub limit: Option<usize>,
}

fn default_classes() -> usize {
    2
}

fn default_spread() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_noise_kind")]
    pub kind: NoiseKind,
    #[serde(default)]
    pub level: f64,
    /// Defaults to the run seed's noise stream.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_noise_kind() -> NoiseKind {
    NoiseKind::Symmetric
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { kind: NoiseKind::Symmetric, level: 0.0, seed: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLayerRelu,
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default = "default_width")]
    pub m: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_hidden")]
    pub hidden_sizes: Vec<usize>,
}

fn default_width() -> usize {
    1024
}

fn default_kappa() -> f64 {
    1.0
}

fn default_hidden() -> Vec<usize> {
    vec![64, 64]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    None,
    CosineAnnealing,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub eta: f64,
    #[serde(default)]
    pub schedule: ScheduleKind,
    /// Cosine period; defaults to `epochs` (at least 1).
    #[serde(default)]
    pub t_max: Option<usize>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub batch_size: usize,
    pub epochs: usize,
}

impl OptimizerSection {
    pub fn to_config(&self) -> Result<OptimizerConfig> {
        let schedule = match self.schedule {
            ScheduleKind::None => Schedule::None,
            ScheduleKind::CosineAnnealing => Schedule::CosineAnnealing { t_max: self.t_max.unwrap_or(self.epochs.max(1)) },
            ScheduleKind::Exponential => Schedule::Exponential {
                gamma: self.gamma.ok_or_else(|| invalid("optimizer.gamma is required for the exponential schedule"))?,
            },
        };
        let cfg = OptimizerConfig { eta: self.eta, schedule, momentum: self.momentum, batch_size: self.batch_size, epochs: self.epochs };
        cfg.validate().map_err(|e| invalid(format!("optimizer: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    #[default]
    SameAsTraining,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_probe_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub eta_mode: EtaMode,
    /// Probe learning rate when `eta_mode` is `fixed`.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Defaults to the run seed's probe stream.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_true() -> bool {
    true
}

fn default_probe_size() -> usize {
    crate::data::DEFAULT_PROBE_SIZE
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { enabled: true, batch_size: default_probe_size(), eta_mode: EtaMode::SameAsTraining, eta: None, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub run_log_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub run_id: Option<String>,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub model: ModelConfig,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| format!("seed-{}", self.seed))
    }

    /// Field-level checks that do not need any data.
    pub fn validate(&self) -> Result<()> {
        let ds = &self.dataset;
        match ds.kind {
            DatasetKind::SyntheticBlobs | DatasetKind::SyntheticSphere => {
                if ds.n < 2 || ds.d < 2 {
                    return Err(invalid(format!("dataset: synthetic data needs n >= 2 and d >= 2, got n={}, d={}", ds.n, ds.d)));
                }
            }
            DatasetKind::Idx => {
                if ds.paths.is_none() {
                    return Err(invalid("dataset.paths is required for idx datasets"));
                }
            }
        }
        if ds.kind == DatasetKind::SyntheticBlobs && (ds.classes < 2 || ds.n < ds.classes) {
            return Err(invalid(format!("dataset: blobs need classes >= 2 and n >= classes, got {} and {}", ds.classes, ds.n)));
        }
        if !(ds.spread >= 0.0) {
            return Err(invalid(format!("dataset.spread must be non-negative, got {}", ds.spread)));
        }
        if !(0.0..=1.0).contains(&self.noise.level) {
            return Err(invalid(format!("noise.level must lie in [0, 1], got {}", self.noise.level)));
        }
        let binary_data = ds.kind == DatasetKind::SyntheticSphere;
        match self.model.kind {
            ModelKind::TwoLayerRelu => {
                if self.model.m == 0 {
                    return Err(invalid("model.m must be at least 1"));
                }
                if !(self.model.kappa > 0.0 && self.model.kappa <= 1.0) {
                    return Err(invalid(format!("model.kappa must lie in (0, 1], got {}", self.model.kappa)));
                }
                if ds.kind == DatasetKind::SyntheticBlobs && ds.classes != 2 {
                    return Err(invalid("model: the two-layer network needs binary labels"));
                }
            }
            ModelKind::Mlp => {
                if self.model.hidden_sizes.contains(&0) {
                    return Err(invalid("model.hidden_sizes entries must be positive"));
                }
                let _ = binary_data;
            }
        }
        self.optimizer.to_config()?;
        let p = &self.probe;
        if p.enabled {
            if p.batch_size == 0 {
                return Err(invalid("probe.batch_size must be at least 1"));
            }
            match (p.eta_mode, p.eta) {
                (EtaMode::Fixed, None) => return Err(invalid("probe.eta is required when probe.eta_mode is fixed")),
                (EtaMode::Fixed, Some(eta)) if !(eta >= 0.0) => {
                    return Err(invalid(format!("probe.eta must be non-negative, got {eta}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn probe_eta(&self) -> ProbeEta {
        match self.probe.eta_mode {
            EtaMode::SameAsTraining => ProbeEta::SameAsTraining,
            EtaMode::Fixed => ProbeEta::Fixed(self.probe.eta.unwrap_or(0.0)),
        }
    }
}

/// Training split with noise applied, plus the optional clean test split.
pub fn build_datasets(cfg: &RunConfig) -> Result<(LabeledDataset<f64>, Option<LabeledDataset<f64>>)> {
    let ds = &cfg.dataset;
    let ntk_mode = cfg.model.kind == ModelKind::TwoLayerRelu;
    let (train, test) = match ds.kind {
        DatasetKind::SyntheticBlobs => {
            let generator = BlobGenerator::<f64>::new(ds.d, ds.classes, ds.spread, cfg.seed)?;
            let train = generator.sample(ds.n, rng::labels::DATA)?;
            let test = if ds.test_n > 0 { Some(generator.sample(ds.test_n, rng::labels::TEST_DATA)?) } else { None };
            (train, test)
        }
        DatasetKind::SyntheticSphere => {
            let all = crate::data::synth_sphere_dataset::<f64>(ds.n + ds.test_n, ds.d, cfg.seed)?;
            let head = LabeledDataset::new(
                all.inputs.slice(ndarray::s![..ds.n, ..]).to_owned(),
                all.true_labels[..ds.n].to_vec(),
                2,
                true,
            )?;
            let tail = if ds.test_n > 0 {
                Some(LabeledDataset::new(
                    all.inputs.slice(ndarray::s![ds.n.., ..]).to_owned(),
                    all.true_labels[ds.n..].to_vec(),
                    2,
                    true,
                )?)
            } else {
                None
            };
            (head, tail)
        }
        DatasetKind::Idx => {
            let paths = ds.paths.as_ref().ok_or_else(|| invalid("dataset.paths is required for idx datasets"))?;
            let opts = IdxOptions { limit: ds.limit, ntk_mode };
            let train = load_idx(&paths.images, &paths.labels, opts)?;
            let test = match (&paths.test_images, &paths.test_labels) {
                (Some(i), Some(l)) => Some(load_idx(i, l, IdxOptions { limit: None, ntk_mode })?),
                (None, None) => None,
                _ => return Err(invalid("dataset.paths: test_images and test_labels must be given together")),
            };
            (train, test)
        }
    };
    let noise_seed = cfg.noise.seed.unwrap_or_else(|| rng::derive_seed(cfg.seed, rng::labels::NOISE));
    let train = inject_noise(&train, NoiseSpec { kind: cfg.noise.kind, level: cfg.noise.level, seed: noise_seed })?;
    Ok((train, test))
}

/// Model initialized from the run seed's init stream.
pub fn build_model(cfg: &RunConfig, train: &LabeledDataset<f64>) -> Result<Model<f64>> {
    Ok(match cfg.model.kind {
        ModelKind::TwoLayerRelu => {
            if train.num_classes != 2 {
                return Err(invalid("model: the two-layer network needs binary labels"));
            }
            Model::TwoLayer(init_two_layer(train.dim(), cfg.model.m, cfg.model.kappa, cfg.seed)?)
        }
        ModelKind::Mlp => Model::Mlp(MlpClassifier::new(train.dim(), &cfg.model.hidden_sizes, train.num_classes, cfg.seed)?),
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<CheckpointRecord>,
    pub model: Model<f64>,
}

/// Trains per `cfg`, probing once after every epoch when the probe is enabled.
///
/// A non-finite training loss aborts the run with a numeric error.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let opt = cfg.optimizer.to_config()?;
    let (train, test) = build_datasets(cfg)?;
    let model = build_model(cfg, &train)?;
    let mut tracker = if cfg.probe.enabled {
        let seed = cfg.probe.seed.unwrap_or_else(|| rng::derive_seed(cfg.seed, rng::labels::PROBE));
        Some(SusceptibilityTracker::new(make_probe_batch(&train, cfg.probe.batch_size, seed)?, cfg.probe_eta()))
    } else {
        None
    };
    let mut state = TrainState::new(model, cfg.run_id(), cfg.seed);
    for _ in 0..opt.epochs {
        let record = state.train_epoch(&train, &opt)?;
        let (lr, loss, epoch) = (record.lr, record.train_loss, record.epoch);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("training loss became {loss} at epoch {epoch}; try a smaller eta")));
        }
        let probe = match tracker.as_mut() {
            Some(t) => {
                let inc = t.probe_step(&state.model, lr)?;
                Some((inc, t.zeta()))
            }
            None => None,
        };
        let test_acc = match &test {
            Some(ts) => Some(accuracy(&state.model, ts.inputs.view(), &ts.true_labels, None)?),
            None => None,
        };
        let rec = state.last_record_mut().expect("epoch recorded");
        rec.test_acc = test_acc;
        if let Some((inc, zeta)) = probe {
            rec.zeta_increment = inc;
            rec.zeta = zeta;
        }
    }
    let model = state.model.clone();
    Ok(RunOutcome { records: state.into_records(), model })
}
