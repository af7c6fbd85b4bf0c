//! Bottleneck, p-Wasserstein and sliced Wasserstein distances.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::diagram::{mirror, single_dimension, DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::matching::{self, Matching, MatchingProblem, Objective, Unmatched};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroundMetric {
    #[default]
    Linf,
    L2,
}

impl GroundMetric {
    pub fn distance(&self, a: &DiagramPoint, b: &DiagramPoint) -> f64 {
        let (db, dd) = ((a.birth - b.birth).abs(), (a.death - b.death).abs());
        match self {
            GroundMetric::Linf => db.max(dd),
            GroundMetric::L2 => db.hypot(dd),
        }
    }

    /// Distance from a point to its diagonal projection.
    pub fn to_diagonal(&self, p: &DiagramPoint) -> f64 {
        self.distance(p, &mirror(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    /// Wasserstein order.
    pub p: f64,
    /// Number of projection directions for the sliced distance.
    pub directions: usize,
    pub ground: GroundMetric,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            p: 1.0,
            directions: 50,
            ground: GroundMetric::Linf,
        }
    }
}

impl MetricParams {
    pub fn with_p(p: f64) -> Self {
        MetricParams {
            p,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::param(format!(
                "order p must be >= 1, got {}",
                self.p
            )));
        }
        if self.directions == 0 {
            return Err(Error::param(
                "sliced Wasserstein needs at least one direction",
            ));
        }
        Ok(())
    }
}

/// The diagonal-augmented matching problem between two point sets under a
/// ground metric.
pub fn matching_problem(
    a: &[DiagramPoint],
    b: &[DiagramPoint],
    ground: GroundMetric,
) -> Result<MatchingProblem> {
    let mut pair = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            pair.push(ground.distance(p, q));
        }
    }
    MatchingProblem::new(
        a.len(),
        b.len(),
        pair,
        Unmatched::Diagonal {
            left: a.iter().map(|p| ground.to_diagonal(p)).collect(),
            right: b.iter().map(|q| ground.to_diagonal(q)).collect(),
        },
    )
}

pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    bottleneck_matching(d1, d2).map(|(v, _)| v)
}

/// Exact bottleneck distance under the L∞ ground metric, with a witness.
pub fn bottleneck_matching(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
) -> Result<(f64, Matching)> {
    let (a, b) = single_dimension(d1, d2)?;
    Ok(matching_problem(a, b, GroundMetric::Linf)?.solve_max())
}

pub fn wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &MetricParams,
) -> Result<f64> {
    wasserstein_matching(d1, d2, params).map(|(v, _)| v)
}

pub fn wasserstein_matching(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &MetricParams,
) -> Result<(f64, Matching)> {
    if !(params.p >= 1.0 && params.p.is_finite()) {
        return Err(Error::param(format!(
            "order p must be >= 1, got {}",
            params.p
        )));
    }
    let (a, b) = single_dimension(d1, d2)?;
    matching_problem(a, b, params.ground)?.solve_sum(params.p)
}

/// Exhaustive-search oracle for the bottleneck (`Objective::Max`) or
/// Wasserstein (`Objective::Sum`) objective.
pub fn brute_force_match(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    ground: GroundMetric,
    objective: Objective,
) -> Result<(f64, Matching)> {
    let (a, b) = single_dimension(d1, d2)?;
    if a.len() + b.len() > matching::BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge {
            limit: matching::BRUTE_FORCE_LIMIT,
            got: a.len() + b.len(),
        });
    }
    matching::brute_force(&matching_problem(a, b, ground)?, objective)
}

/// `N` directions at the midpoints of a uniform partition of `[0, π)`.
pub fn projection_angles(directions: usize) -> Vec<f64> {
    (0..directions)
        .map(|i| (i as f64 + 0.5) * PI / directions as f64)
        .collect()
}

/// 1-D `W_p^p` between equal-size samples: sort both and pair in order.
pub fn wasserstein_1d_pow(xs: &mut [f64], ys: &mut [f64], p: f64) -> f64 {
    assert_eq!(xs.len(), ys.len(), "1-D transport needs equal sample sizes");
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum()
}

/// Sliced Wasserstein distance over the midpoint direction grid.
pub fn sliced_wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &MetricParams,
) -> Result<f64> {
    params.validate()?;
    sliced_wasserstein_with_angles(d1, d2, &projection_angles(params.directions), params.p)
}

/// Sliced Wasserstein distance over explicit projection angles.
///
/// Each side is augmented with the diagonal projections of the other side's
/// points, so both projected samples have `n + m` entries.
pub fn sliced_wasserstein_with_angles(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    angles: &[f64],
    p: f64,
) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::param(
            "sliced Wasserstein needs at least one direction",
        ));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("order p must be >= 1, got {p}")));
    }
    let (a, b) = single_dimension(d1, d2)?;
    let left: Vec<(f64, f64)> = a
        .iter()
        .map(|x| (x.birth, x.death))
        .chain(b.iter().map(|y| {
            let m = mirror(y);
            (m.birth, m.death)
        }))
        .collect();
    let right: Vec<(f64, f64)> = b
        .iter()
        .map(|y| (y.birth, y.death))
        .chain(a.iter().map(|x| {
            let m = mirror(x);
            (m.birth, m.death)
        }))
        .collect();
    let total: f64 = angles
        .iter()
        .map(|&theta| {
            let (c, s) = (theta.cos(), theta.sin());
            let mut xs: Vec<f64> = left.iter().map(|&(u, v)| u * c + v * s).collect();
            let mut ys: Vec<f64> = right.iter().map(|&(u, v)| u * c + v * s).collect();
            wasserstein_1d_pow(&mut xs, &mut ys, p)
        })
        .sum();
    Ok((total / angles.len() as f64).powf(1.0 / p))
}

/// Symmetric matrix of pairwise distances, computed in parallel over the
/// upper triangle.
pub fn pairwise<F>(diagrams: &[PersistenceDiagram], distance: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&PersistenceDiagram, &PersistenceDiagram) -> Result<f64> + Sync,
{
    let n = diagrams.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| distance(&diagrams[i], &diagrams[j]))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; n]; n];
    for (&(i, j), v) in cells.iter().zip(values) {
        out[i][j] = v;
        out[j][i] = v;
    }
    Ok(out)
}
