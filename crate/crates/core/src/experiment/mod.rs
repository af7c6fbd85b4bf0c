//! End-to-end pipeline: profile subsets, synthetic profiles, noise models,
//! metric comparison tables and stability sweeps.

mod report;
mod spec;

pub use report::{
    load_dataset, run_comparison, stability_sweep, ComparisonReport, ComparisonRow, SweepReport,
    SweepRow, Table,
};
pub use spec::{
    DatasetSpec, ExperimentSpec, Layout, NoiseModel, NoiseSpec, PairSpec, PipelineSpec, PpdSpec,
    SubsetSelector,
};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classical::{self, MetricParams};
use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::filtration::{build_filtration, FiltrationConfig};
use crate::persistence::compute_persistence;
use crate::polar::{self, PpdConfig};
use crate::preflib::{dominance, Ballot, DominanceMatrix, PreferenceProfile};
use crate::summaries::{self, Grid, Norm};

/// Dominance → filtration → persistence, restricted to one homology
/// dimension (and capped when the filtration config asks for it).
pub fn diagram_from_dominance(
    dom: &DominanceMatrix,
    cfg: &FiltrationConfig,
    dim: usize,
) -> Result<PersistenceDiagram> {
    let complex = build_filtration(dom, cfg)?;
    let full = compute_persistence(&complex)?;
    let full = match cfg.cap {
        Some(cap) => full.capped(cap)?,
        None => full,
    };
    Ok(full.restrict(dim))
}

pub fn diagram_from_profile(
    profile: &PreferenceProfile,
    cfg: &FiltrationConfig,
    dim: usize,
) -> Result<PersistenceDiagram> {
    diagram_from_dominance(&dominance(profile), cfg, dim)
}

/// `voters` rankings drawn uniformly from all orders of `alternatives`.
pub fn generate_impartial_culture(
    alternatives: usize,
    voters: usize,
    seed: u64,
) -> Result<PreferenceProfile> {
    if alternatives < 2 {
        return Err(Error::param(format!(
            "impartial culture needs >= 2 alternatives, got {alternatives}"
        )));
    }
    if voters == 0 {
        return Err(Error::param("impartial culture needs >= 1 voter"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ballots = (0..voters)
        .map(|_| {
            let mut ranking: Vec<usize> = (0..alternatives).collect();
            ranking.shuffle(&mut rng);
            Ballot {
                multiplicity: 1,
                ranking,
            }
        })
        .collect();
    PreferenceProfile::new((1..=alternatives).map(|i| i.to_string()).collect(), ballots)
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "swap rate must lie in [0, 1], got {rate}"
        )))
    }
}

/// Each voter independently applies one uniformly chosen adjacent
/// transposition with probability `rate`. Unchanged voters keep their
/// original ballot line; changed voters become single-voter ballots after it.
pub fn perturb_profile(
    profile: &PreferenceProfile,
    rate: f64,
    seed: u64,
) -> Result<PreferenceProfile> {
    check_rate(rate)?;
    let n = profile.num_alternatives();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ballots = Vec::with_capacity(profile.ballots.len());
    for ballot in &profile.ballots {
        let mut kept = 0;
        let mut changed = Vec::new();
        for _ in 0..ballot.multiplicity {
            if n >= 2 && rng.random::<f64>() < rate {
                let k = rng.random_range(0..n - 1);
                let mut ranking = ballot.ranking.clone();
                ranking.swap(k, k + 1);
                changed.push(Ballot {
                    multiplicity: 1,
                    ranking,
                });
            } else {
                kept += 1;
            }
        }
        if kept > 0 {
            ballots.push(Ballot {
                multiplicity: kept,
                ranking: ballot.ranking.clone(),
            });
        }
        ballots.extend(changed);
    }
    let mut out = PreferenceProfile::new(profile.alternatives.clone(), ballots)?;
    out.names = profile.names.clone();
    Ok(out)
}

/// Adds `N(0, (rate · N)²)` noise to each `D_ij` (`i < j`), rounds, clamps to
/// `[0, N]` and sets `D_ji = N − D_ij`.
pub fn perturb_dominance(dom: &DominanceMatrix, rate: f64, seed: u64) -> Result<DominanceMatrix> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::param(format!("noise rate must be >= 0, got {rate}")));
    }
    let mut out = dom.clone();
    if rate == 0.0 {
        return Ok(out);
    }
    let total = dom.voter_count() as f64;
    let normal = Normal::new(0.0, rate * total).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..dom.len() {
        for j in (i + 1)..dom.len() {
            let noisy = (dom.count(i, j) as f64 + normal.sample(&mut rng))
                .round()
                .clamp(0.0, total);
            out.set_pair(i, j, noisy as u64);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Ppd,
    Wasserstein,
    Bottleneck,
    Sliced,
    Landscape,
    Silhouette,
    Entropy,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Ppd,
        Metric::Wasserstein,
        Metric::Bottleneck,
        Metric::Sliced,
        Metric::Landscape,
        Metric::Silhouette,
        Metric::Entropy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Ppd => "ppd",
            Metric::Wasserstein => "wasserstein",
            Metric::Bottleneck => "bottleneck",
            Metric::Sliced => "sliced",
            Metric::Landscape => "landscape",
            Metric::Silhouette => "silhouette",
            Metric::Entropy => "entropy",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::param(format!("unknown metric '{name}'")))
    }
}

/// Everything a diagram distance may need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceParams {
    pub ppd: PpdConfig,
    pub metric: MetricParams,
    pub grid_samples: usize,
    pub k_max: usize,
    pub weight_exponent: f64,
    /// `L^p` order for landscape and silhouette distances; `None` is sup.
    pub norm: Option<f64>,
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams {
            ppd: PpdConfig::default(),
            metric: MetricParams::default(),
            grid_samples: summaries::DEFAULT_GRID_SAMPLES,
            k_max: summaries::DEFAULT_K_MAX,
            weight_exponent: 1.0,
            norm: Some(2.0),
        }
    }
}

impl DistanceParams {
    fn norm(&self) -> Norm {
        self.norm.map_or(Norm::Sup, Norm::P)
    }
}

pub fn distance(
    metric: Metric,
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &DistanceParams,
) -> Result<f64> {
    match metric {
        Metric::Ppd => polar::ppd(d1, d2, &params.ppd),
        Metric::Wasserstein => classical::wasserstein(d1, d2, &params.metric),
        Metric::Bottleneck => classical::bottleneck(d1, d2),
        Metric::Sliced => classical::sliced_wasserstein(d1, d2, &params.metric),
        Metric::Landscape => {
            let grid = Grid::spanning(&[d1, d2], params.grid_samples)?;
            summaries::landscape_distance(
                &summaries::landscape(d1, params.k_max, &grid)?,
                &summaries::landscape(d2, params.k_max, &grid)?,
                params.norm(),
            )
        }
        Metric::Silhouette => {
            let grid = Grid::spanning(&[d1, d2], params.grid_samples)?;
            summaries::silhouette_distance(
                &summaries::silhouette(d1, params.weight_exponent, &grid)?,
                &summaries::silhouette(d2, params.weight_exponent, &grid)?,
                params.norm(),
            )
        }
        Metric::Entropy => summaries::entropy_distance(d1, d2),
    }
}
