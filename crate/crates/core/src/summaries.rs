//! Persistence landscapes, silhouettes and persistence entropy.

use std::fmt::Write as _;

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_SAMPLES: usize = 512;
pub const DEFAULT_K_MAX: usize = 5;

/// Uniformly spaced sample points `start, ..., end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        if samples < 2 || !start.is_finite() || !end.is_finite() || end <= start {
            return Err(Error::param(format!(
                "grid needs start < end and at least 2 samples, got [{start}, {end}] x {samples}"
            )));
        }
        Ok(Grid {
            start,
            end,
            samples,
        })
    }

    /// `[min birth, max death]` over all finite points of the given diagrams.
    /// Falls back to `[0, 1]` when there are no points.
    pub fn spanning(diagrams: &[&PersistenceDiagram], samples: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in diagrams.iter().flat_map(|d| d.points()) {
            lo = lo.min(p.birth);
            hi = hi.max(p.death);
        }
        if !lo.is_finite() || hi <= lo {
            let base = if lo.is_finite() { lo } else { 0.0 };
            return Grid::new(base, base + 1.0, samples);
        }
        Grid::new(lo, hi, samples)
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.samples - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.end
                } else {
                    self.start + i as f64 * h
                }
            })
            .collect()
    }
}

/// Tent function `max(0, min(t - b, d - t))`.
pub fn tent(p: &DiagramPoint, t: f64) -> f64 {
    (t - p.birth).min(p.death - t).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    P(f64),
    Sup,
}

impl Norm {
    fn validate(&self) -> Result<()> {
        match *self {
            Norm::P(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::param(format!("L^p needs p >= 1, got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// `∫ |f|^p` by the trapezoid rule on the grid.
fn trapezoid_pow(values: &[f64], spacing: f64, p: f64) -> f64 {
    let powed: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let inner: f64 = powed.iter().sum::<f64>() - 0.5 * (powed[0] + powed[powed.len() - 1]);
    inner * spacing
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub grid: Grid,
    /// `levels[k][i] = λ_{k+1}(t_i)`.
    pub levels: Vec<Vec<f64>>,
}

pub fn landscape(d: &PersistenceDiagram, k_max: usize, grid: &Grid) -> Result<Landscape> {
    if k_max == 0 {
        return Err(Error::param("landscape needs k_max >= 1"));
    }
    let ts = grid.points();
    let mut levels = vec![vec![0.0; ts.len()]; k_max];
    let mut values = Vec::with_capacity(d.len());
    for (i, &t) in ts.iter().enumerate() {
        values.clear();
        values.extend(d.points().iter().map(|p| tent(p, t)).filter(|&v| v > 0.0));
        values.sort_by(|a, b| b.total_cmp(a));
        for (k, &v) in values.iter().take(k_max).enumerate() {
            levels[k][i] = v;
        }
    }
    Ok(Landscape {
        grid: *grid,
        levels,
    })
}

impl Landscape {
    /// Exact `λ_k(t)` (1-based `k`), independent of the grid.
    pub fn evaluate(d: &PersistenceDiagram, k: usize, t: f64) -> f64 {
        let mut values: Vec<f64> = d.points().iter().map(|p| tent(p, t)).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values.get(k.wrapping_sub(1)).copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.levels.len() {
            let _ = write!(out, ",lambda_{k}");
        }
        out.push('\n');
        for (i, t) in self.grid.points().iter().enumerate() {
            let _ = write!(out, "{t:.17e}");
            for level in &self.levels {
                let _ = write!(out, ",{:.17e}", level[i]);
            }
            out.push('\n');
        }
        out
    }
}

pub fn landscape_distance(a: &Landscape, b: &Landscape, norm: Norm) -> Result<f64> {
    norm.validate()?;
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    if a.levels.len() != b.levels.len() {
        return Err(Error::GridMismatch(format!(
            "k_max {} vs {}",
            a.levels.len(),
            b.levels.len()
        )));
    }
    let diffs: Vec<Vec<f64>> = a
        .levels
        .iter()
        .zip(&b.levels)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect())
        .collect();
    Ok(match norm {
        Norm::Sup => diffs.iter().flatten().fold(0.0, |m, v| m.max(v.abs())),
        Norm::P(p) => {
            let h = a.grid.spacing();
            diffs
                .iter()
                .map(|d| trapezoid_pow(d, h, p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub weight_exponent: f64,
}

/// Persistence-weighted average of tents, `w_i = pers_i^exponent`.
pub fn silhouette(d: &PersistenceDiagram, weight_exponent: f64, grid: &Grid) -> Result<Silhouette> {
    if !(weight_exponent >= 0.0 && weight_exponent.is_finite()) {
        return Err(Error::param(format!(
            "weight exponent must be >= 0, got {weight_exponent}"
        )));
    }
    let weights: Vec<f64> = d
        .points()
        .iter()
        .map(|p| p.persistence().powf(weight_exponent))
        .collect();
    let total: f64 = weights.iter().sum();
    let values = grid
        .points()
        .iter()
        .map(|&t| {
            if total > 0.0 {
                d.points()
                    .iter()
                    .zip(&weights)
                    .map(|(p, w)| w * tent(p, t))
                    .sum::<f64>()
                    / total
            } else {
                0.0
            }
        })
        .collect();
    Ok(Silhouette {
        grid: *grid,
        values,
        weight_exponent,
    })
}

impl Silhouette {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.grid.points().iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.17e},{v:.17e}");
        }
        out
    }
}

pub fn silhouette_distance(a: &Silhouette, b: &Silhouette, norm: Norm) -> Result<f64> {
    norm.validate()?;
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| u - v).collect();
    Ok(match norm {
        Norm::Sup => diff.iter().fold(0.0, |m, v| m.max(v.abs())),
        Norm::P(p) => trapezoid_pow(&diff, a.grid.spacing(), p).powf(1.0 / p),
    })
}

/// Shannon entropy (natural log) of the normalized persistences.
pub fn persistence_entropy(d: &PersistenceDiagram) -> Result<f64> {
    let pers: Vec<f64> = d
        .points()
        .iter()
        .map(|p| p.persistence())
        .filter(|&l| l > 0.0)
        .collect();
    let total: f64 = pers.iter().sum();
    if pers.is_empty() || total <= 0.0 {
        return Err(Error::EntropyUndefined);
    }
    Ok(-pers
        .iter()
        .map(|l| {
            let q = l / total;
            q * q.ln()
        })
        .sum::<f64>())
}

pub fn entropy_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    Ok((persistence_entropy(d1)? - persistence_entropy(d2)?).abs())
}
