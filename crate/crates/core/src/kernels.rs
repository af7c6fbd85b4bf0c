//! Kernels on persistence diagrams and Gram-matrix utilities.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::classical::{self, MetricParams};
use crate::diagram::{mirror, DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub sigma: f64,
    /// Heat diffusion time.
    pub t: f64,
    /// PWGK weight `arctan(c · pers^q)`.
    pub c: f64,
    pub q: f64,
    pub sw_directions: usize,
    /// Heat-kernel weight `pers^weight_exponent`.
    pub weight_exponent: f64,
    /// Wasserstein order for the kernelized Wasserstein and SW kernels.
    pub p: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            sigma: 1.0,
            t: 1.0,
            c: 1.0,
            q: 1.0,
            sw_directions: 50,
            weight_exponent: 1.0,
            p: 1.0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be > 0, got {v}")))
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        positive("t", self.t)?;
        positive("C", self.c)?;
        positive("q", self.q)?;
        if self.sw_directions == 0 {
            return Err(Error::param("sw_directions must be >= 1"));
        }
        if !(self.weight_exponent >= 0.0 && self.weight_exponent.is_finite()) {
            return Err(Error::param(format!(
                "weight exponent must be >= 0, got {}",
                self.weight_exponent
            )));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::param(format!(
                "order p must be >= 1, got {}",
                self.p
            )));
        }
        Ok(())
    }
}

fn sq_dist(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    let (x, y) = (a.birth - b.birth, a.death - b.death);
    x * x + y * y
}

fn require_finite(d: &PersistenceDiagram) -> Result<()> {
    if d.points().iter().all(DiagramPoint::is_finite) {
        Ok(())
    } else {
        Err(Error::EssentialNoPolar)
    }
}

/// Persistence scale-space kernel.
///
/// With `Φ_σ(p) = (4πσ)⁻¹ [g(· − p) − g(· − p̄)]`, `g(x) = exp(−‖x‖²/4σ)`,
/// each Gaussian inner product integrates to `(8πσ)⁻¹ exp(−‖u − v‖²/8σ)`.
pub fn pssk(d1: &PersistenceDiagram, d2: &PersistenceDiagram, sigma: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    require_finite(d1)?;
    require_finite(d2)?;
    let g = |a: &DiagramPoint, b: &DiagramPoint| (-sq_dist(a, b) / (8.0 * sigma)).exp();
    let mut total = 0.0;
    for p in d1.points() {
        let pm = mirror(p);
        for q in d2.points() {
            let qm = mirror(q);
            total += g(p, q) - g(p, &qm) - g(&pm, q) + g(&pm, &qm);
        }
    }
    Ok(total / (8.0 * PI * sigma))
}

/// Value of the summed scale-space feature map at `(x, y)`.
pub fn pssk_feature(d: &PersistenceDiagram, sigma: f64, x: f64, y: f64) -> f64 {
    let at = DiagramPoint::new(x, y, 0);
    let g = |c: &DiagramPoint| (-sq_dist(&at, c) / (4.0 * sigma)).exp();
    d.points().iter().map(|p| g(p) - g(&mirror(p))).sum::<f64>() / (4.0 * PI * sigma)
}

pub fn pwgk_weight(p: &DiagramPoint, c: f64, q: f64) -> f64 {
    (c * p.persistence().powf(q)).atan()
}

/// Persistence-weighted Gaussian kernel.
pub fn pwgk(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &KernelParams,
) -> Result<f64> {
    params.validate()?;
    require_finite(d1)?;
    require_finite(d2)?;
    let two_s2 = 2.0 * params.sigma * params.sigma;
    let w2: Vec<f64> = d2
        .points()
        .iter()
        .map(|q| pwgk_weight(q, params.c, params.q))
        .collect();
    Ok(d1
        .points()
        .iter()
        .map(|p| {
            let wp = pwgk_weight(p, params.c, params.q);
            d2.points()
                .iter()
                .zip(&w2)
                .map(|(q, wq)| wp * wq * (-sq_dist(p, q) / two_s2).exp())
                .sum::<f64>()
        })
        .sum())
}

/// Heat kernel with weights `pers^weight_exponent`.
pub fn heat_kernel(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    t: f64,
    weight_exponent: f64,
) -> Result<f64> {
    positive("t", t)?;
    if !(weight_exponent >= 0.0 && weight_exponent.is_finite()) {
        return Err(Error::param(format!(
            "weight exponent must be >= 0, got {weight_exponent}"
        )));
    }
    require_finite(d1)?;
    require_finite(d2)?;
    let w = |p: &DiagramPoint| p.persistence().powf(weight_exponent);
    let mut total = 0.0;
    for p in d1.points() {
        for q in d2.points() {
            total += w(p) * w(q) * (-sq_dist(p, q) / (4.0 * t)).exp();
        }
    }
    Ok(total / (4.0 * PI * t))
}

fn rbf(distance: f64, sigma: f64) -> f64 {
    (-distance * distance / (2.0 * sigma * sigma)).exp()
}

pub fn sw_kernel(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &KernelParams,
) -> Result<f64> {
    params.validate()?;
    let metric = MetricParams {
        p: params.p,
        directions: params.sw_directions,
        ..Default::default()
    };
    Ok(rbf(
        classical::sliced_wasserstein(d1, d2, &metric)?,
        params.sigma,
    ))
}

pub fn kernelized_wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    sigma: f64,
    p: f64,
) -> Result<f64> {
    positive("sigma", sigma)?;
    Ok(rbf(
        classical::wasserstein(d1, d2, &MetricParams::with_p(p))?,
        sigma,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Pssk,
    Pwgk,
    Heat,
    SlicedWasserstein,
    KernelizedWasserstein,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Pssk,
        KernelKind::Pwgk,
        KernelKind::Heat,
        KernelKind::SlicedWasserstein,
        KernelKind::KernelizedWasserstein,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Pssk => "pssk",
            KernelKind::Pwgk => "pwgk",
            KernelKind::Heat => "heat",
            KernelKind::SlicedWasserstein => "sw",
            KernelKind::KernelizedWasserstein => "kw",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown kernel '{name}' (pssk, pwgk, heat, sw, kw)"
                ))
            })
    }

    pub fn evaluate(
        &self,
        d1: &PersistenceDiagram,
        d2: &PersistenceDiagram,
        params: &KernelParams,
    ) -> Result<f64> {
        match self {
            KernelKind::Pssk => pssk(d1, d2, params.sigma),
            KernelKind::Pwgk => pwgk(d1, d2, params),
            KernelKind::Heat => heat_kernel(d1, d2, params.t, params.weight_exponent),
            KernelKind::SlicedWasserstein => sw_kernel(d1, d2, params),
            KernelKind::KernelizedWasserstein => {
                kernelized_wasserstein(d1, d2, params.sigma, params.p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.entries[i][i]).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.len();
        if n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.entries[i][j]);
        m.symmetric_eigenvalues().min()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.entries) {
            out.push_str(l);
            for v in row {
                let _ = write!(out, ",{v:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Gram matrix over the upper triangle, mirrored for exact symmetry.
pub fn gram(
    diagrams: &[PersistenceDiagram],
    kind: KernelKind,
    params: &KernelParams,
) -> Result<GramMatrix> {
    if diagrams.is_empty() {
        return Err(Error::param("Gram matrix needs at least one diagram"));
    }
    params.validate()?;
    let n = diagrams.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| kind.evaluate(&diagrams[i], &diagrams[j], params))
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![0.0; n]; n];
    for (&(i, j), v) in cells.iter().zip(values) {
        entries[i][j] = v;
        entries[j][i] = v;
    }
    let labels = diagrams
        .iter()
        .enumerate()
        .map(|(i, d)| d.label.clone().unwrap_or_else(|| format!("d{i}")))
        .collect();
    Ok(GramMatrix { entries, labels })
}
