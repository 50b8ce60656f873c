use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stressuq::channel::ChannelConfig;
use stressuq::dns::{load_profile, surrogate::table_names, ColumnMap, DnsProfile};
use stressuq::features::FeatureSet;
use stressuq::forest::{ForestHyperparams, TargetKind};
use stressuq::{Error, Result};

/// Everything a run reads, after flag overrides. Serialised verbatim into the
/// manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub solver: ChannelConfig,
    pub uq: UqSection,
    pub data: DataSection,
    pub forest: ForestSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UqSection {
    /// `data-free`, `p`, `pcorr` or `pcorr_angles`.
    pub mode: String,
    pub delta_b: f64,
    /// Forest file for the data-driven modes.
    pub forest: Option<PathBuf>,
    /// Evaluate features once on the baseline instead of on every iterate.
    pub freeze_features: bool,
    /// Relative amplitude of the noise put on `uv` by `propagate-dns`.
    pub noise: f64,
}

impl Default for UqSection {
    fn default() -> Self {
        Self {
            mode: "data-free".into(),
            delta_b: 1.0,
            forest: None,
            freeze_features: true,
            noise: 0.0,
        }
    }
}

/// One reference data set: a mean table and, when the stresses live in a
/// separate file, a fluctuation table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnsFile {
    pub re_tau: f64,
    pub mean: PathBuf,
    pub fluct: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Directory searched for `LM_Channel_<Re>_{mean_prof,vel_fluc_prof}.dat`
    /// when a Reynolds number has no explicit entry.
    pub dir: Option<PathBuf>,
    pub files: Vec<DnsFile>,
    pub train_re: Vec<f64>,
    pub test_re: Vec<f64>,
    pub features: Vec<String>,
    pub mean_columns: ColumnMap,
    pub fluct_columns: ColumnMap,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            dir: None,
            files: Vec::new(),
            train_re: vec![180.0, 550.0, 2000.0, 5200.0],
            test_re: vec![1000.0],
            features: FeatureSet::default().names(),
            mean_columns: ColumnMap::lee_moser_mean(),
            fluct_columns: ColumnMap::lee_moser_fluct(),
        }
    }
}

/// Overrides of the tuned per-target forest settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    /// `p`, `pcorr` or `pcorr_angles`; `p` when absent.
    pub target: Option<String>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub max_features: Option<usize>,
    pub n_trees: Option<usize>,
    pub bootstrap: Option<bool>,
}

impl RunConfig {
    /// Reads a TOML file; relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.uq.forest.as_mut() {
            fix(p);
        }
        if let Some(p) = self.data.dir.as_mut() {
            fix(p);
        }
        for f in &mut self.data.files {
            fix(&mut f.mean);
            if let Some(p) = f.fluct.as_mut() {
                fix(p);
            }
        }
    }

    pub fn feature_set(&self) -> Result<FeatureSet> {
        FeatureSet::from_names(&self.data.features)
    }

    pub fn target(&self) -> Result<TargetKind> {
        self.forest.target.as_deref().unwrap_or("p").parse()
    }

    pub fn hyperparams(&self, kind: TargetKind) -> ForestHyperparams {
        let mut hp = ForestHyperparams::for_target(kind, self.seed);
        let f = &self.forest;
        hp.max_depth = f.max_depth.unwrap_or(hp.max_depth);
        hp.min_samples_split = f.min_samples_split.unwrap_or(hp.min_samples_split);
        hp.max_features = f.max_features.unwrap_or(hp.max_features);
        hp.n_trees = f.n_trees.unwrap_or(hp.n_trees);
        hp.bootstrap = f.bootstrap.unwrap_or(hp.bootstrap);
        hp
    }

    /// Mean and optional fluctuation paths for `re_tau`, if any are known.
    pub fn dataset_paths(&self, re_tau: f64) -> Option<(PathBuf, Option<PathBuf>)> {
        if let Some(f) = self
            .data
            .files
            .iter()
            .find(|f| (f.re_tau - re_tau).abs() < 0.5)
        {
            return Some((f.mean.clone(), f.fluct.clone()));
        }
        let dir = self.data.dir.as_ref()?;
        let (mean, fluct) = table_names(re_tau);
        let mean = dir.join(mean);
        let fluct = dir.join(fluct);
        mean.is_file()
            .then(|| (mean, fluct.is_file().then_some(fluct)))
    }

    /// Loads the reference profiles for `res`; all missing Reynolds numbers
    /// are named in a single error.
    pub fn load_datasets(&self, res: &[f64]) -> Result<Vec<Dataset>> {
        let mut missing = Vec::new();
        let mut found = Vec::new();
        for &re in res {
            match self.dataset_paths(re) {
                Some(p) => found.push((re, p)),
                None => missing.push(re.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "no reference data for Re_tau = {}",
                missing.join(", ")
            )));
        }
        found
            .into_iter()
            .map(|(re_tau, (mean, fluct))| {
                let profile = load_profile(
                    &mean,
                    &self.data.mean_columns,
                    fluct.as_deref().map(|p| (p, &self.data.fluct_columns)),
                )?;
                let mut paths = vec![mean];
                paths.extend(fluct);
                Ok(Dataset {
                    re_tau,
                    profile,
                    paths,
                })
            })
            .collect()
    }
}

pub struct Dataset {
    pub re_tau: f64,
    pub profile: DnsProfile,
    pub paths: Vec<PathBuf>,
}
