//! Polar persistence distance: point and diagram level, gradients, squared
//! loss, polar Gaussian kernel and embedding.

use std::f64::consts::PI;

use serde::Deserialize;

use crate::diagram::{
    mirror, single_dimension, to_polar, DiagramPoint, PersistenceDiagram, PolarParams, PolarPoint,
};
use crate::error::{Error, Result};
use crate::matching::{self, Endpoint, Matching, MatchingProblem, Objective, Unmatched};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalMode {
    /// Unmatched points pay the distance to their diagonal projection.
    #[default]
    Project,
    /// Unmatched points are dropped; only a maximum-cardinality matching is
    /// charged.
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Sum,
    Max,
}

impl Aggregate {
    fn objective(self) -> Objective {
        match self {
            Aggregate::Sum => Objective::Sum { power: 1.0 },
            Aggregate::Max => Objective::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PpdConfig {
    pub polar: PolarParams,
    pub diagonal_mode: DiagonalMode,
    pub aggregate: Aggregate,
}

impl PpdConfig {
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Ok(PpdConfig {
            polar: PolarParams::with_alpha(alpha)?,
            ..Default::default()
        })
    }
}

/// Wraps an angle difference into `[-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    if (-PI..=PI).contains(&x) {
        return x;
    }
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn polar_of(p: &DiagramPoint, params: &PolarParams) -> Result<PolarPoint> {
    if params.excludes(p) {
        return Err(Error::PolarSingularity {
            birth: p.birth,
            death: p.death,
        });
    }
    to_polar(p)
}

fn squared(a: &PolarPoint, b: &PolarPoint, alpha: f64) -> f64 {
    let dr = a.radius - b.radius;
    let s = (0.5 * wrap_angle(a.angle - b.angle)).sin();
    dr * dr + alpha * s * s
}

pub fn ppd_point(p1: &DiagramPoint, p2: &DiagramPoint, params: &PolarParams) -> Result<f64> {
    params.validate()?;
    let (a, b) = (polar_of(p1, params)?, polar_of(p2, params)?);
    Ok(squared(&a, &b, params.alpha).sqrt())
}

/// Gradient with respect to `(birth, death)` of each argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGradient {
    pub first: (f64, f64),
    pub second: (f64, f64),
}

/// Converts `(∂/∂r, ∂/∂θ)` into `(∂/∂b, ∂/∂d)` at `p`.
fn to_cartesian_gradient(p: &DiagramPoint, polar: &PolarPoint, dr: f64, dtheta: f64) -> (f64, f64) {
    let r = polar.radius;
    let r2 = r * r;
    (
        dr * p.birth / r - dtheta * p.death / r2,
        dr * p.death / r + dtheta * p.birth / r2,
    )
}

/// Gradient of the squared distance; defined everywhere off the origin.
fn squared_gradient(
    p1: &DiagramPoint,
    p2: &DiagramPoint,
    params: &PolarParams,
) -> Result<PointGradient> {
    let (a, b) = (polar_of(p1, params)?, polar_of(p2, params)?);
    let dr = a.radius - b.radius;
    let dtheta = 0.5 * params.alpha * wrap_angle(a.angle - b.angle).sin();
    Ok(PointGradient {
        first: to_cartesian_gradient(p1, &a, 2.0 * dr, dtheta),
        second: to_cartesian_gradient(p2, &b, -2.0 * dr, -dtheta),
    })
}

pub fn ppd_gradient(
    p1: &DiagramPoint,
    p2: &DiagramPoint,
    params: &PolarParams,
) -> Result<PointGradient> {
    let d = ppd_point(p1, p2, params)?;
    if d == 0.0 {
        return Err(Error::GradientUndefined);
    }
    let g = squared_gradient(p1, p2, params)?;
    let k = 0.5 / d;
    Ok(PointGradient {
        first: (k * g.first.0, k * g.first.1),
        second: (k * g.second.0, k * g.second.1),
    })
}

fn masked<'a>(
    points: &'a [DiagramPoint],
    params: &PolarParams,
) -> (Vec<&'a DiagramPoint>, Vec<usize>) {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| !params.excludes(p))
        .map(|(i, p)| (p, i))
        .unzip()
}

fn ppd_problem(
    a: &[&DiagramPoint],
    b: &[&DiagramPoint],
    cfg: &PpdConfig,
) -> Result<MatchingProblem> {
    let mut pair = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            pair.push(ppd_point(p, q, &cfg.polar)?);
        }
    }
    let unmatched = match cfg.diagonal_mode {
        DiagonalMode::Project => {
            let diag = |p: &&DiagramPoint| diagonal_cost(p, &cfg.polar);
            Unmatched::Diagonal {
                left: a.iter().map(diag).collect::<Result<_>>()?,
                right: b.iter().map(diag).collect::<Result<_>>()?,
            }
        }
        DiagonalMode::Exclude => Unmatched::Excluded,
    };
    MatchingProblem::new(a.len(), b.len(), pair, unmatched)
}

/// `ppd_point(p, mirror(p))`.
pub fn diagonal_cost(p: &DiagramPoint, params: &PolarParams) -> Result<f64> {
    ppd_point(p, &mirror(p), params)
}

fn remap(matching: Matching, left: &[usize], right: &[usize]) -> Matching {
    let fix = |e: Endpoint, idx: &[usize]| match e {
        Endpoint::Point(i) => Endpoint::Point(idx[i]),
        Endpoint::Diagonal => Endpoint::Diagonal,
    };
    Matching {
        pairs: matching
            .pairs
            .into_iter()
            .map(|mut p| {
                p.left = fix(p.left, left);
                p.right = fix(p.right, right);
                p
            })
            .collect(),
    }
}

/// Diagram-level PPD with its optimal matching. Indices in the matching refer
/// to the unmasked point lists.
pub fn ppd_diagram(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    cfg: &PpdConfig,
) -> Result<(f64, Matching)> {
    cfg.polar.validate()?;
    let (a, b) = single_dimension(d1, d2)?;
    let (a, ia) = masked(a, &cfg.polar);
    let (b, ib) = masked(b, &cfg.polar);
    if a.is_empty() && b.is_empty() {
        return Ok((0.0, Matching::default()));
    }
    let (value, m) = ppd_problem(&a, &b, cfg)?.solve(cfg.aggregate.objective())?;
    Ok((value, remap(m, &ia, &ib)))
}

pub fn ppd(d1: &PersistenceDiagram, d2: &PersistenceDiagram, cfg: &PpdConfig) -> Result<f64> {
    ppd_diagram(d1, d2, cfg).map(|(v, _)| v)
}

/// Exhaustive-search oracle for [`ppd_diagram`].
pub fn ppd_brute_force(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    cfg: &PpdConfig,
) -> Result<(f64, Matching)> {
    cfg.polar.validate()?;
    let (a, b) = single_dimension(d1, d2)?;
    let (a, ia) = masked(a, &cfg.polar);
    let (b, ib) = masked(b, &cfg.polar);
    let (value, m) = matching::brute_force(&ppd_problem(&a, &b, cfg)?, cfg.aggregate.objective())?;
    Ok((value, remap(m, &ia, &ib)))
}

/// One weighted term `w · d²` of the matching loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerm {
    pub left: Endpoint,
    pub right: Endpoint,
    pub weight: f64,
}

impl LossTerm {
    pub fn from_matching(m: &Matching, weight: f64) -> Vec<LossTerm> {
        m.pairs
            .iter()
            .map(|p| LossTerm {
                left: p.left,
                right: p.right,
                weight,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loss {
    pub value: f64,
    /// `∂L/∂(b, d)` for every point of the left diagram.
    pub left: Vec<(f64, f64)>,
    pub right: Vec<(f64, f64)>,
}

/// `Σ w · ppd²` over the given terms. A diagonal endpoint stands for the
/// projection of the other endpoint; its gradient flows back through the
/// projection.
pub fn ppd_loss(
    a: &[DiagramPoint],
    b: &[DiagramPoint],
    terms: &[LossTerm],
    params: &PolarParams,
) -> Result<Loss> {
    params.validate()?;
    let mut loss = Loss {
        value: 0.0,
        left: vec![(0.0, 0.0); a.len()],
        right: vec![(0.0, 0.0); b.len()],
    };
    let fetch = |e: Endpoint, side: &[DiagramPoint]| -> Result<Option<usize>> {
        match e {
            Endpoint::Point(i) if i < side.len() => Ok(Some(i)),
            Endpoint::Point(i) => Err(Error::param(format!(
                "loss term refers to missing point {i}"
            ))),
            Endpoint::Diagonal => Ok(None),
        }
    };
    for term in terms {
        if !(term.weight >= 0.0 && term.weight.is_finite()) {
            return Err(Error::param(format!(
                "loss weights must be >= 0, got {}",
                term.weight
            )));
        }
        let w = term.weight;
        match (fetch(term.left, a)?, fetch(term.right, b)?) {
            (Some(i), Some(j)) => {
                let g = squared_gradient(&a[i], &b[j], params)?;
                loss.value += w * squared(
                    &polar_of(&a[i], params)?,
                    &polar_of(&b[j], params)?,
                    params.alpha,
                );
                add(&mut loss.left[i], g.first, w);
                add(&mut loss.right[j], g.second, w);
            }
            (Some(i), None) => {
                let (v, g) = diagonal_term(&a[i], params)?;
                loss.value += w * v;
                add(&mut loss.left[i], g, w);
            }
            (None, Some(j)) => {
                let (v, g) = diagonal_term(&b[j], params)?;
                loss.value += w * v;
                add(&mut loss.right[j], g, w);
            }
            (None, None) => return Err(Error::param("loss term pairs the diagonal with itself")),
        }
    }
    Ok(loss)
}

fn add(acc: &mut (f64, f64), g: (f64, f64), w: f64) {
    acc.0 += w * g.0;
    acc.1 += w * g.1;
}

/// Squared distance from `p` to its projection, with the total gradient
/// through the projection Jacobian `½[[1,1],[1,1]]`.
fn diagonal_term(p: &DiagramPoint, params: &PolarParams) -> Result<(f64, (f64, f64))> {
    let m = mirror(p);
    let v = squared(&polar_of(p, params)?, &polar_of(&m, params)?, params.alpha);
    let g = squared_gradient(p, &m, params)?;
    let through = 0.5 * (g.second.0 + g.second.1);
    Ok((v, (g.first.0 + through, g.first.1 + through)))
}

/// `exp(−ppd² / 2σ²)`.
pub fn polar_kernel(
    p1: &DiagramPoint,
    p2: &DiagramPoint,
    sigma: f64,
    params: &PolarParams,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("sigma must be > 0, got {sigma}")));
    }
    let d = ppd_point(p1, p2, params)?;
    Ok((-d * d / (2.0 * sigma * sigma)).exp())
}

/// `[r cos θ, r sin θ, √α θ]`; the first two coordinates are `(b, d)` itself.
pub fn polar_embed(p: &DiagramPoint, params: &PolarParams) -> Result<[f64; 3]> {
    params.validate()?;
    let polar = polar_of(p, params)?;
    Ok([p.birth, p.death, params.alpha.sqrt() * polar.angle])
}
