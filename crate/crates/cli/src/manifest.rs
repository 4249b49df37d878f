//! Experiment manifest: one TOML document, overridable from the
//! environment, hashed so every artifact can name the config behind it.

use std::path::{Path, PathBuf};

use graphnas_core::metrics::LaplacianMin;
use graphnas_core::search::{Mode, OpKind};
use graphnas_core::surrogate::SelectionCriterion;
use graphnas_core::Feature;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Environment variables `GRAPHNAS__<SECTION>__<KEY>` override
/// `section.key`; `GRAPHNAS__<KEY>` overrides a top-level key.
pub const ENV_OVERRIDE_PREFIX: &str = "GRAPHNAS__";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub seed: u64,
    pub out: PathBuf,
    pub generate: GenerateConfig,
    pub featurize: FeaturizeConfig,
    pub train: ToyConfig,
    pub fit: FitConfig,
    pub sfs: SfsConfig,
    pub search: SearchSection,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            seed: 0,
            out: PathBuf::from("graphnas-out"),
            generate: GenerateConfig::default(),
            featurize: FeaturizeConfig::default(),
            train: ToyConfig::default(),
            fit: FitConfig::default(),
            sfs: SfsConfig::default(),
            search: SearchSection::default(),
        }
    }
}

/// WS-flex sweep plus optional heterogeneity augmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub n: usize,
    pub degree_min: f64,
    /// Defaults to `n - 1`.
    pub degree_max: Option<f64>,
    pub degree_steps: usize,
    pub p_steps: usize,
    pub seeds_per_cell: usize,
    pub augment_rounds: usize,
    pub rewires_per_round: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            n: 64,
            degree_min: 2.0,
            degree_max: None,
            degree_steps: 20,
            p_steps: 5,
            seeds_per_cell: 1,
            augment_rounds: 0,
            rewires_per_round: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeConfig {
    pub laplacian_min: LaplacianMin,
    pub kl_restarts: usize,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        FeaturizeConfig {
            laplacian_min: LaplacianMin::AlgebraicConnectivity,
            kl_restarts: graphnas_core::metrics::KL_RESTARTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyData {
    /// Gaussian blobs on hypercube corners with parity labels.
    Parity,
    /// One Gaussian blob per class.
    Blobs,
    /// Concentric 2-D rings.
    Rings,
}

/// Toy classification task and trainer used to measure graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub data: ToyData,
    /// Points per class (per corner for `parity`).
    pub per_class: usize,
    pub dim: usize,
    pub classes: usize,
    /// Blob separation for `blobs`, Gaussian noise for `parity` and `rings`.
    pub spread: f64,
    pub held_out: f64,
    pub units_per_node: usize,
    pub n_layers: usize,
    /// Size every network to the FLOPs of the complete graph's network.
    pub match_flops: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Initialisations averaged per measured graph.
    pub inits: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            data: ToyData::Parity,
            per_class: 20,
            dim: 5,
            classes: 2,
            spread: 0.35,
            held_out: 0.3,
            units_per_node: 1,
            n_layers: 4,
            match_flops: false,
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 5e-4,
            inits: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Regressors; when absent, the SFS prefix with the lowest TEST MSE.
    pub features: Option<Vec<Feature>>,
    /// Feature table with targets; defaults to the one `train-toy` writes.
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfsConfig {
    pub criterion: SelectionCriterion,
    /// Also run one trace per forced first feature.
    pub fixed_first: bool,
    /// Steps compared by the feature-set similarity matrix.
    pub similarity_k: usize,
}

impl Default for SfsConfig {
    fn default() -> Self {
        SfsConfig {
            criterion: SelectionCriterion::TestMse,
            fixed_first: true,
            similarity_k: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub epsilon: f64,
    pub max_steps: usize,
    pub max_proposals_per_step: usize,
    pub operator_retries: usize,
    pub mode: Mode,
    pub operators: Vec<OpKind>,
    /// `auto`, `worst`, `best`, a pool graph id, or an edge-list path.
    pub start: String,
    /// Step width of the multi-seed buckets.
    pub bucket: usize,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = graphnas_core::search::SearchConfig::default();
        SearchSection {
            epsilon: d.epsilon,
            max_steps: d.max_steps,
            max_proposals_per_step: d.max_proposals_per_step,
            operator_retries: d.operator_retries,
            mode: d.mode,
            operators: d.operators,
            start: "auto".to_string(),
            bucket: 1,
        }
    }
}

/// A loaded manifest with its canonical text and hash.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub manifest: Manifest,
    /// The effective manifest (after overrides) re-serialised as TOML.
    pub canonical: String,
    pub sha256: String,
}

fn parse_override(raw: &str) -> toml::Value {
    // bare words that are not TOML values are taken as strings
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_overrides(table: &mut toml::Table, vars: impl Iterator<Item = (String, String)>) -> Result<(), Failure> {
    let mut vars: Vec<(String, String)> = vars.filter(|(k, _)| k.starts_with(ENV_OVERRIDE_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_OVERRIDE_PREFIX.len()..]
            .split("__")
            .map(str::to_ascii_lowercase)
            .collect();
        let value = parse_override(&raw);
        match path.as_slice() {
            [top] => {
                table.insert(top.clone(), value);
            }
            [section, field] => {
                let entry = table
                    .entry(section.clone())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()));
                let toml::Value::Table(inner) = entry else {
                    return Err(Failure::invalid(format!(
                        "override {key}: `{section}` is not a section"
                    )));
                };
                inner.insert(field.clone(), value);
            }
            _ => {
                return Err(Failure::invalid(format!(
                    "override {key}: expected at most one `__` separator"
                )))
            }
        }
    }
    Ok(())
}

impl Loaded {
    /// Reads `path` (or starts from defaults), applies environment
    /// overrides, then the `--seed` / `--out` flags.
    pub fn load(
        path: Option<&Path>,
        env: impl Iterator<Item = (String, String)>,
        seed: Option<u64>,
        out: Option<&Path>,
    ) -> Result<Self, Failure> {
        let text = match path {
            Some(p) => {
                std::fs::read_to_string(p).map_err(|e| Failure::invalid(format!("manifest {}: {e}", p.display())))?
            }
            None => String::new(),
        };
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| Failure::invalid(format!("manifest: {e}")))?;
        apply_overrides(&mut table, env)?;
        let mut manifest: Manifest = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Failure::invalid(format!("manifest: {e}")))?;
        if let Some(s) = seed {
            manifest.seed = s;
        }
        if let Some(o) = out {
            manifest.out = o.to_path_buf();
        }
        manifest.validate()?;
        let canonical = toml::to_string(&manifest).map_err(|e| Failure::internal(format!("manifest: {e}")))?;
        let sha256 = format!("{:x}", Sha256::digest(canonical.as_bytes()));
        Ok(Loaded {
            manifest,
            canonical,
            sha256,
        })
    }
}

impl Manifest {
    fn validate(&self) -> Result<(), Failure> {
        let bad = |field: &str, why: String| Err(Failure::invalid(format!("manifest field `{field}`: {why}")));
        let g = &self.generate;
        if g.n < 3 {
            return bad("generate.n", format!("need at least 3 nodes, got {}", g.n));
        }
        let top = (g.n - 1) as f64;
        let hi = g.degree_max.unwrap_or(top);
        if !(g.degree_min >= 2.0 && g.degree_min <= top) {
            return bad(
                "generate.degree_min",
                format!("must lie in [2, {top}], got {}", g.degree_min),
            );
        }
        if !(hi >= 2.0 && hi <= top) {
            return bad("generate.degree_max", format!("must lie in [2, {top}], got {hi}"));
        }
        if hi <= g.degree_min {
            return bad(
                "generate.degree_max",
                format!("{hi} must exceed degree_min {}", g.degree_min),
            );
        }
        if g.degree_steps == 0 || g.p_steps == 0 || g.seeds_per_cell == 0 {
            return bad("generate.degree_steps", "grid sizes must be positive".to_string());
        }
        let t = &self.train;
        if t.classes < 2 {
            return bad("train.classes", format!("need at least 2, got {}", t.classes));
        }
        if t.data == ToyData::Parity && t.classes != 2 {
            return bad("train.classes", "parity data has exactly 2 classes".to_string());
        }
        if !(t.held_out > 0.0 && t.held_out < 1.0) {
            return bad("train.held_out", format!("must lie in (0, 1), got {}", t.held_out));
        }
        if t.units_per_node == 0 || t.inits == 0 || t.batch_size == 0 {
            return bad("train.units_per_node", "sizes must be positive".to_string());
        }
        if t.n_layers < 2 {
            return bad("train.n_layers", format!("need at least 2, got {}", t.n_layers));
        }
        if self.sfs.similarity_k == 0 {
            return bad("sfs.similarity_k", "must be positive".to_string());
        }
        if self.search.bucket == 0 {
            return bad("search.bucket", "must be positive".to_string());
        }
        self.search_config(0)
            .validate()
            .map_err(|e| Failure::invalid(format!("manifest section `search`: {e}")))
    }

    pub fn degree_max(&self) -> f64 {
        self.generate.degree_max.unwrap_or((self.generate.n - 1) as f64)
    }

    /// Child seed for one pipeline stage.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        graphnas_core::rng::named_seed(self.seed, stage)
    }

    pub fn featurize_options(&self) -> graphnas_core::metrics::FeaturizeOptions {
        graphnas_core::metrics::FeaturizeOptions {
            laplacian_min: self.featurize.laplacian_min,
            kl_restarts: self.featurize.kl_restarts,
        }
    }

    pub fn search_config(&self, seed: u64) -> graphnas_core::search::SearchConfig {
        let s = &self.search;
        graphnas_core::search::SearchConfig {
            epsilon: s.epsilon,
            max_steps: s.max_steps,
            max_proposals_per_step: s.max_proposals_per_step,
            operator_retries: s.operator_retries,
            mode: s.mode,
            seed,
            feature_seed: self.stage_seed("featurize"),
            operators: s.operators.clone(),
            feature_options: self.featurize_options(),
        }
    }
}
