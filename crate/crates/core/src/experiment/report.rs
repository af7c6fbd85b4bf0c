use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::classical::MetricParams;
use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::preflib::{dominance, parse_preflib, write_preflib, PreferenceProfile};

use super::spec::{DatasetSpec, ExperimentSpec, Layout, NoiseModel};
use super::{
    diagram_from_dominance, diagram_from_profile, distance, generate_impartial_culture,
    perturb_dominance, perturb_profile, DistanceParams, Metric,
};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The profile named by the spec and the SHA-256 of its bytes (the file, or
/// the SOC serialization of a generated profile).
pub fn load_dataset(spec: &ExperimentSpec, base_dir: &Path) -> Result<(PreferenceProfile, String)> {
    match &spec.dataset {
        DatasetSpec::File { path } => {
            let full = base_dir.join(path);
            let bytes = std::fs::read(&full).map_err(|e| Error::Io {
                path: full.display().to_string(),
                message: e.to_string(),
            })?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::parse(0, "dataset is not UTF-8"))?;
            Ok((parse_preflib(&text)?, hex(&Sha256::digest(&bytes))))
        }
        DatasetSpec::ImpartialCulture {
            alternatives,
            voters,
        } => {
            let profile = generate_impartial_culture(*alternatives, *voters, spec.seed)?;
            let text = write_preflib(&profile, &spec.name);
            Ok((profile, hex(&Sha256::digest(text.as_bytes()))))
        }
    }
}

/// A metric as it appears in a table, with the PPD α it was run at.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Column {
    metric: Metric,
    alpha: Option<f64>,
}

impl Column {
    fn label(&self, p: f64) -> String {
        match self.metric {
            Metric::Ppd => format!("PPD (alpha={})", self.alpha.unwrap_or(1.0)),
            Metric::Wasserstein => format!("W{p}"),
            Metric::Bottleneck => "Bottleneck".into(),
            Metric::Sliced => format!("SW{p}"),
            Metric::Landscape => "Landscape".into(),
            Metric::Silhouette => "Silhouette".into(),
            Metric::Entropy => "Entropy".into(),
        }
    }
}

struct Plan {
    columns: Vec<Column>,
    params: Vec<DistanceParams>,
}

impl Plan {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        let metric = MetricParams {
            p: spec.p,
            directions: spec.directions,
            ..Default::default()
        };
        metric.validate()?;
        let mut columns = Vec::new();
        let mut params = Vec::new();
        for &m in &spec.metrics {
            let alphas: Vec<Option<f64>> = if m == Metric::Ppd {
                spec.ppd.alphas.iter().map(|&a| Some(a)).collect()
            } else {
                vec![None]
            };
            for alpha in alphas {
                let mut dp = DistanceParams {
                    metric,
                    ..Default::default()
                };
                if let Some(a) = alpha {
                    dp.ppd = spec.ppd.config(a)?;
                }
                columns.push(Column { metric: m, alpha });
                params.push(dp);
            }
        }
        Ok(Plan { columns, params })
    }

    fn evaluate(&self, a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<Vec<f64>> {
        self.columns
            .iter()
            .zip(&self.params)
            .map(|(c, p)| distance(c.metric, a, b, p))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub comparison: String,
    pub metric: String,
    pub alpha: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub spec: ExperimentSpec,
    pub dataset_sha256: String,
    pub rows: Vec<ComparisonRow>,
}

/// Runs every comparison of the spec: subset → dominance → filtration →
/// persistence → each requested metric.
pub fn run_comparison(spec: &ExperimentSpec, base_dir: &Path) -> Result<ComparisonReport> {
    spec.validate()?;
    if spec.comparisons.is_empty() {
        return Err(Error::Spec("no comparisons requested".into()));
    }
    let (profile, checksum) = load_dataset(spec, base_dir)?;
    let plan = Plan::new(spec)?;
    let filtration = spec.pipeline.filtration();
    let mut rows = Vec::new();
    for pair in &spec.comparisons {
        let left = pair.left.apply(&profile, spec.seed)?;
        let right = pair.right.apply(&profile, spec.seed)?;
        let a = diagram_from_profile(&left, &filtration, spec.pipeline.dimension)?;
        let b = diagram_from_profile(&right, &filtration, spec.pipeline.dimension)?;
        let label = format!("{} vs {}", pair.left, pair.right);
        for (col, value) in plan.columns.iter().zip(plan.evaluate(&a, &b)?) {
            rows.push(ComparisonRow {
                comparison: label.clone(),
                metric: col.label(spec.p),
                alpha: col.alpha,
                value,
            });
        }
    }
    Ok(ComparisonReport {
        spec: spec.clone(),
        dataset_sha256: checksum,
        rows,
    })
}

fn provenance_header() -> Vec<String> {
    [
        "aggregate",
        "diagonal",
        "p",
        "epsilon",
        "dim",
        "seed",
        "dataset_sha256",
    ]
    .map(String::from)
    .to_vec()
}

fn provenance(spec: &ExperimentSpec, checksum: &str) -> Vec<String> {
    vec![
        format!("{:?}", spec.ppd.aggregate).to_lowercase(),
        format!("{:?}", spec.ppd.diagonal).to_lowercase(),
        spec.p.to_string(),
        spec.pipeline.epsilon.to_string(),
        spec.pipeline.dimension.to_string(),
        spec.seed.to_string(),
        checksum.to_string(),
    ]
}

fn value(v: f64) -> String {
    format!("{v:.9}")
}

fn alpha_cell(a: Option<f64>) -> String {
    a.map(|a| a.to_string()).unwrap_or_default()
}

impl ComparisonReport {
    pub fn table(&self) -> Table {
        match self.spec.layout {
            Layout::Rows => self.rows_table(),
            Layout::Columns => self.columns_table(),
        }
    }

    fn rows_table(&self) -> Table {
        let mut header: Vec<String> = ["comparison", "metric", "value", "alpha"]
            .map(String::from)
            .to_vec();
        header.extend(provenance_header());
        let prov = provenance(&self.spec, &self.dataset_sha256);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.comparison.clone(),
                    r.metric.clone(),
                    value(r.value),
                    alpha_cell(r.alpha),
                ];
                row.extend(prov.iter().cloned());
                row
            })
            .collect();
        Table { header, rows }
    }

    fn columns_table(&self) -> Table {
        let mut metrics: Vec<String> = Vec::new();
        let mut comparisons: Vec<String> = Vec::new();
        for r in &self.rows {
            if !metrics.contains(&r.metric) {
                metrics.push(r.metric.clone());
            }
            if !comparisons.contains(&r.comparison) {
                comparisons.push(r.comparison.clone());
            }
        }
        let mut header = vec!["comparison".to_string()];
        header.extend(metrics.iter().cloned());
        header.extend(provenance_header());
        let prov = provenance(&self.spec, &self.dataset_sha256);
        let rows = comparisons
            .iter()
            .map(|c| {
                let mut row = vec![c.clone()];
                for m in &metrics {
                    let v = self
                        .rows
                        .iter()
                        .find(|r| &r.comparison == c && &r.metric == m);
                    row.push(v.map(|r| value(r.value)).unwrap_or_default());
                }
                row.extend(prov.iter().cloned());
                row
            })
            .collect();
        Table { header, rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub metric: String,
    pub alpha: Option<f64>,
    pub rate: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub spec: ExperimentSpec,
    pub dataset_sha256: String,
    pub rows: Vec<SweepRow>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Distances between the unperturbed diagram and perturbed copies, averaged
/// over trials. Trial `t` uses seed `spec.seed + t` at every rate.
pub fn stability_sweep(spec: &ExperimentSpec, base_dir: &Path) -> Result<SweepReport> {
    spec.validate()?;
    let noise = spec
        .noise
        .as_ref()
        .ok_or_else(|| Error::Spec("stability sweep needs a [noise] section".into()))?;
    let (profile, checksum) = load_dataset(spec, base_dir)?;
    let profile = noise.subset.apply(&profile, spec.seed)?;
    let plan = Plan::new(spec)?;
    let filtration = spec.pipeline.filtration();
    let dim = spec.pipeline.dimension;
    let dom = dominance(&profile);
    let base = diagram_from_dominance(&dom, &filtration, dim)?;

    let mut rows = Vec::new();
    for &rate in &noise.rates {
        let per_trial: Vec<Vec<f64>> = (0..noise.trials)
            .into_par_iter()
            .map(|t| {
                let seed = spec.seed.wrapping_add(t as u64);
                let perturbed = match noise.model {
                    NoiseModel::AdjacentSwap => dominance(&perturb_profile(&profile, rate, seed)?),
                    NoiseModel::GaussianMargin => perturb_dominance(&dom, rate, seed)?,
                };
                plan.evaluate(
                    &base,
                    &diagram_from_dominance(&perturbed, &filtration, dim)?,
                )
            })
            .collect::<Result<_>>()?;
        for (k, col) in plan.columns.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|v| v[k]).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SweepRow {
                metric: col.label(spec.p),
                alpha: col.alpha,
                rate,
                mean,
                std,
                trials: noise.trials,
            });
        }
    }
    rows.sort_by(|a, b| a.metric.cmp(&b.metric).then(a.rate.total_cmp(&b.rate)));
    Ok(SweepReport {
        spec: spec.clone(),
        dataset_sha256: checksum,
        rows,
    })
}

impl SweepReport {
    pub fn table(&self) -> Table {
        let mut header: Vec<String> = ["metric", "rate", "mean", "std", "trials", "model", "alpha"]
            .map(String::from)
            .to_vec();
        header.extend(provenance_header());
        let prov = provenance(&self.spec, &self.dataset_sha256);
        let model = self
            .spec
            .noise
            .as_ref()
            .map(|n| n.model.name())
            .unwrap_or_default();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.metric.clone(),
                    r.rate.to_string(),
                    value(r.mean),
                    value(r.std),
                    r.trials.to_string(),
                    model.to_string(),
                    alpha_cell(r.alpha),
                ];
                row.extend(prov.iter().cloned());
                row
            })
            .collect();
        Table { header, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Space-padded columns, left aligned.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}
