use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::diagram::{PolarParams, DEFAULT_EXCLUSION_RADIUS};
use crate::error::{Error, Result};
use crate::filtration::{FiltrationConfig, DEFAULT_EPSILON};
use crate::polar::{Aggregate, DiagonalMode, PpdConfig};
use crate::preflib::PreferenceProfile;

use super::Metric;

/// A TOML experiment description.
///
/// ```toml
/// name = "irish"
/// seed = 7
/// metrics = ["ppd", "wasserstein", "bottleneck"]
///
/// [dataset]
/// source = "file"
/// path = "irish.soc"
///
/// [[comparisons]]
/// left = "first:100"
/// right = "last:100"
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub pipeline: PipelineSpec,
    #[serde(default = "default_metrics", deserialize_with = "metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub ppd: PpdSpec,
    /// Wasserstein order.
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub comparisons: Vec<PairSpec>,
    #[serde(default)]
    pub layout: Layout,
    pub noise: Option<NoiseSpec>,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Ppd, Metric::Wasserstein, Metric::Bottleneck]
}

fn metrics<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Vec<Metric>, D::Error> {
    let names = Vec::<String>::deserialize(de)?;
    names
        .iter()
        .map(|n| Metric::parse(n).map_err(serde::de::Error::custom))
        .collect()
}

fn one() -> f64 {
    1.0
}

fn default_directions() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A PrefLib SOC file; relative paths resolve against the spec file.
    File {
        path: PathBuf,
    },
    ImpartialCulture {
        alternatives: usize,
        voters: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSpec {
    pub epsilon: f64,
    pub dimension: usize,
    pub expand_triangles: bool,
    pub cap: Option<f64>,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        PipelineSpec {
            epsilon: DEFAULT_EPSILON,
            dimension: 1,
            expand_triangles: true,
            cap: None,
        }
    }
}

impl PipelineSpec {
    pub fn filtration(&self) -> FiltrationConfig {
        FiltrationConfig {
            epsilon: self.epsilon,
            expand_triangles: self.expand_triangles,
            cap: self.cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpdSpec {
    pub alphas: Vec<f64>,
    pub aggregate: Aggregate,
    pub diagonal: DiagonalMode,
    pub exclusion_radius: f64,
}

impl Default for PpdSpec {
    fn default() -> Self {
        PpdSpec {
            alphas: vec![1.0],
            aggregate: Aggregate::Sum,
            diagonal: DiagonalMode::Project,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        }
    }
}

impl PpdSpec {
    pub fn config(&self, alpha: f64) -> Result<PpdConfig> {
        Ok(PpdConfig {
            polar: PolarParams::new(alpha, self.exclusion_radius)?,
            diagonal_mode: self.diagonal,
            aggregate: self.aggregate,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub left: SubsetSelector,
    pub right: SubsetSelector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One row per metric.
    #[default]
    Rows,
    /// One column per metric, one row per comparison.
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    AdjacentSwap,
    GaussianMargin,
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::AdjacentSwap => "adjacent_swap",
            NoiseModel::GaussianMargin => "gaussian_margin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub rates: Vec<f64>,
    pub trials: usize,
    #[serde(default = "all_voters")]
    pub subset: SubsetSelector,
}

fn all_voters() -> SubsetSelector {
    SubsetSelector::All
}

/// Which voters of a profile to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub enum SubsetSelector {
    All,
    First(usize),
    Last(usize),
    Range(usize, usize),
    Sample(usize),
    /// Chunk `part` of a seeded permutation cut into pieces of `size`.
    Disjoint {
        size: usize,
        part: usize,
    },
}

impl SubsetSelector {
    pub fn apply(&self, profile: &PreferenceProfile, seed: u64) -> Result<PreferenceProfile> {
        let total = profile.voter_count() as usize;
        match *self {
            SubsetSelector::All => Ok(profile.clone()),
            SubsetSelector::First(k) => profile.voter_range(0, k),
            SubsetSelector::Last(k) => {
                if k > total {
                    return Err(Error::SubsetOutOfRange(format!(
                        "last {k} of {total} voters"
                    )));
                }
                profile.voter_range(total - k, total)
            }
            SubsetSelector::Range(a, b) => profile.voter_range(a, b),
            SubsetSelector::Sample(k) => profile.sample_voters(k, seed),
            SubsetSelector::Disjoint { size, part } => profile.disjoint_sample(size, part, seed),
        }
    }
}

impl FromStr for SubsetSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Spec(format!("bad subset selector '{s}'"));
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "all" if rest.is_empty() => Ok(SubsetSelector::All),
            "first" => Ok(SubsetSelector::First(num(rest)?)),
            "last" => Ok(SubsetSelector::Last(num(rest)?)),
            "sample" => Ok(SubsetSelector::Sample(num(rest)?)),
            "range" => {
                let (a, b) = rest.split_once("..").ok_or_else(bad)?;
                Ok(SubsetSelector::Range(num(a)?, num(b)?))
            }
            "disjoint" => {
                let (size, part) = rest.split_once(':').ok_or_else(bad)?;
                Ok(SubsetSelector::Disjoint {
                    size: num(size)?,
                    part: num(part)?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for SubsetSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for SubsetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetSelector::All => write!(f, "all"),
            SubsetSelector::First(k) => write!(f, "first:{k}"),
            SubsetSelector::Last(k) => write!(f, "last:{k}"),
            SubsetSelector::Range(a, b) => write!(f, "range:{a}..{b}"),
            SubsetSelector::Sample(k) => write!(f, "sample:{k}"),
            SubsetSelector::Disjoint { size, part } => write!(f, "disjoint:{size}:{part}"),
        }
    }
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Spec(e.to_string().trim().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::Spec("no metrics requested".into()));
        }
        if self.ppd.alphas.is_empty() {
            return Err(Error::Spec("ppd.alphas is empty".into()));
        }
        for &a in &self.ppd.alphas {
            self.ppd.config(a)?;
        }
        if let Some(noise) = &self.noise {
            if noise.trials == 0 {
                return Err(Error::Spec("noise.trials must be >= 1".into()));
            }
            if noise.rates.is_empty() {
                return Err(Error::Spec("noise.rates is empty".into()));
            }
            for &r in &noise.rates {
                let ok = match noise.model {
                    NoiseModel::AdjacentSwap => (0.0..=1.0).contains(&r),
                    NoiseModel::GaussianMargin => r >= 0.0 && r.is_finite(),
                };
                if !ok {
                    return Err(Error::Spec(format!(
                        "noise rate {r} out of range for {}",
                        noise.model.name()
                    )));
                }
            }
        }
        Ok(())
    }
}
