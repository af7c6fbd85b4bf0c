//! Persistence diagrams, their points and the polar view of a point.
//!
//! A [`PersistenceDiagram`] keeps finite `(birth, death)` pairs and essential
//! (never-dying) classes apart. Matching metrics only ever see the finite
//! points; essential classes either stay out of the comparison or are turned
//! into finite points at an explicit cap via [`PersistenceDiagram::capped`].

pub(crate) mod io;

pub use io::{read_diagram, write_diagram, HEADER};

use crate::error::{Error, Result};

/// Default near-origin mask applied before polar metrics.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub dim: usize,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64, dim: usize) -> Self {
        DiagramPoint { birth, death, dim }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.birth.hypot(self.death)
    }

    /// Image of `T_λ(b, d) = (λb, λd)`.
    pub fn scaled(&self, factor: f64) -> Self {
        DiagramPoint::new(self.birth * factor, self.death * factor, self.dim)
    }
}

/// Polar coordinates of a diagram point about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub radius: f64,
    pub angle: f64,
}

impl PolarPoint {
    /// Back to `(birth, death)`.
    pub fn to_cartesian(&self) -> (f64, f64) {
        (
            self.radius * self.angle.cos(),
            self.radius * self.angle.sin(),
        )
    }
}

pub fn to_polar(p: &DiagramPoint) -> Result<PolarPoint> {
    if !p.death.is_finite() {
        return Err(Error::EssentialNoPolar);
    }
    if p.birth == 0.0 && p.death == 0.0 {
        return Err(Error::PolarSingularity {
            birth: p.birth,
            death: p.death,
        });
    }
    Ok(PolarPoint {
        radius: p.birth.hypot(p.death),
        angle: p.death.atan2(p.birth),
    })
}

/// Orthogonal projection onto the diagonal, `((b+d)/2, (b+d)/2)`.
///
/// Serves both as the scale-space kernel's mirror point and as the diagonal
/// partner of an unmatched point.
pub fn mirror(p: &DiagramPoint) -> DiagramPoint {
    let mid = 0.5 * (p.birth + p.death);
    DiagramPoint::new(mid, mid, p.dim)
}

/// Tunables shared by every polar computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarParams {
    pub alpha: f64,
    pub exclusion_radius: f64,
}

impl Default for PolarParams {
    fn default() -> Self {
        PolarParams {
            alpha: 1.0,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        }
    }
}

impl PolarParams {
    pub fn new(alpha: f64, exclusion_radius: f64) -> Result<Self> {
        let params = PolarParams {
            alpha,
            exclusion_radius,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_EXCLUSION_RADIUS)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.exclusion_radius >= 0.0 && self.exclusion_radius.is_finite()) {
            return Err(Error::param(format!(
                "exclusion radius must be >= 0, got {}",
                self.exclusion_radius
            )));
        }
        Ok(())
    }

    /// Points strictly inside the exclusion disc are masked out.
    pub fn excludes(&self, p: &DiagramPoint) -> bool {
        p.norm() < self.exclusion_radius || (p.birth == 0.0 && p.death == 0.0)
    }
}

/// An essential (infinite-death) homology class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialClass {
    pub birth: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
    essential: Vec<EssentialClass>,
    pub label: Option<String>,
    pub cap: Option<f64>,
}

impl PersistenceDiagram {
    /// Builds a diagram, rejecting NaNs, infinite births and `birth > death`.
    ///
    /// Points with infinite death are moved to the essential list.
    pub fn new(points: Vec<DiagramPoint>) -> Result<Self> {
        let mut diagram = PersistenceDiagram::default();
        for p in points {
            if p.death == f64::INFINITY {
                diagram.push_essential(EssentialClass {
                    birth: p.birth,
                    dim: p.dim,
                })?;
            } else {
                diagram.push(p)?;
            }
        }
        Ok(diagram)
    }

    /// Convenience constructor for a single-dimension diagram.
    pub fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(b, d)| DiagramPoint::new(b, d, dim))
                .collect(),
        )
    }

    pub fn empty() -> Self {
        PersistenceDiagram::default()
    }

    pub fn push(&mut self, p: DiagramPoint) -> Result<()> {
        if !p.birth.is_finite() || p.death.is_nan() || p.death == f64::NEG_INFINITY {
            return Err(Error::Validation(format!(
                "non-finite point ({}, {})",
                p.birth, p.death
            )));
        }
        if p.birth > p.death {
            return Err(Error::Validation(format!(
                "birth {} exceeds death {}",
                p.birth, p.death
            )));
        }
        if p.death.is_infinite() {
            return self.push_essential(EssentialClass {
                birth: p.birth,
                dim: p.dim,
            });
        }
        self.points.push(p);
        Ok(())
    }

    pub fn push_essential(&mut self, class: EssentialClass) -> Result<()> {
        if !class.birth.is_finite() {
            return Err(Error::Validation(format!(
                "essential class with birth {}",
                class.birth
            )));
        }
        self.essential.push(class);
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn essential(&self) -> &[EssentialClass] {
        &self.essential
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Homology dimensions that carry at least one finite or essential class.
    pub fn dimensions(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self
            .points
            .iter()
            .map(|p| p.dim)
            .chain(self.essential.iter().map(|e| e.dim))
            .collect();
        dims.sort_unstable();
        dims.dedup();
        dims
    }

    /// Sub-diagram of one homology dimension, keeping label and cap.
    pub fn restrict(&self, dim: usize) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.dim == dim)
                .collect(),
            essential: self
                .essential
                .iter()
                .copied()
                .filter(|e| e.dim == dim)
                .collect(),
            label: self.label.clone(),
            cap: self.cap,
        }
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.essential.iter().filter(|e| e.dim == dim).count()
    }

    /// Materializes essential classes as finite points dying at `cap`.
    ///
    /// Classes born at or after the cap would be zero- or negative-persistence
    /// and are dropped.
    pub fn capped(&self, cap: f64) -> Result<PersistenceDiagram> {
        if !cap.is_finite() {
            return Err(Error::param(format!("cap must be finite, got {cap}")));
        }
        let mut out = PersistenceDiagram {
            points: self.points.clone(),
            essential: Vec::new(),
            label: self.label.clone(),
            cap: Some(cap),
        };
        for e in &self.essential {
            if e.birth < cap {
                out.points.push(DiagramPoint::new(e.birth, cap, e.dim));
            }
        }
        Ok(out)
    }

    /// Applies `T_λ` to every finite point and essential birth.
    pub fn scaled(&self, factor: f64) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self.points.iter().map(|p| p.scaled(factor)).collect(),
            essential: self
                .essential
                .iter()
                .map(|e| EssentialClass {
                    birth: e.birth * factor,
                    dim: e.dim,
                })
                .collect(),
            label: self.label.clone(),
            cap: self.cap.map(|c| c * factor),
        }
    }

    /// Multiset equality of finite points and essential classes, ignoring order.
    pub fn same_multiset(&self, other: &PersistenceDiagram) -> bool {
        fn key(p: &DiagramPoint) -> (usize, u64, u64) {
            (p.dim, p.birth.to_bits(), p.death.to_bits())
        }
        fn ekey(e: &EssentialClass) -> (usize, u64) {
            (e.dim, e.birth.to_bits())
        }
        let mut a: Vec<_> = self.points.iter().map(key).collect();
        let mut b: Vec<_> = other.points.iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        let mut ea: Vec<_> = self.essential.iter().map(ekey).collect();
        let mut eb: Vec<_> = other.essential.iter().map(ekey).collect();
        ea.sort_unstable();
        eb.sort_unstable();
        a == b && ea == eb
    }
}

/// Finite points of a diagram pair, checking that both live in one dimension.
pub(crate) fn single_dimension<'a>(
    d1: &'a PersistenceDiagram,
    d2: &'a PersistenceDiagram,
) -> Result<(&'a [DiagramPoint], &'a [DiagramPoint])> {
    let mut seen: Option<usize> = None;
    for p in d1.points().iter().chain(d2.points()) {
        match seen {
            None => seen = Some(p.dim),
            Some(dim) if dim != p.dim => return Err(Error::MixedDimensions(dim, p.dim)),
            _ => {}
        }
    }
    Ok((d1.points(), d2.points()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn polar_fixtures() {
        let p = to_polar(&DiagramPoint::new(1.0, 3.0, 1)).unwrap();
        assert!((p.radius - 3.162_277_660_168_379_5).abs() < 1e-12);
        assert!((p.angle - 1.249_045_772_398_254_4).abs() < 1e-12);

        let q = to_polar(&DiagramPoint::new(3.0, 1.0, 1)).unwrap();
        assert!((q.radius - 3.162_277_660_168_379_5).abs() < 1e-12);
        assert!((q.angle - 0.321_750_554_396_642_2).abs() < 1e-12);

        let axis = to_polar(&DiagramPoint::new(0.0, 1.0, 0)).unwrap();
        assert_eq!(axis.radius, 1.0);
        assert_eq!(axis.angle, FRAC_PI_2);
    }

    #[test]
    fn polar_errors() {
        assert!(matches!(
            to_polar(&DiagramPoint::new(0.0, 0.0, 0)),
            Err(Error::PolarSingularity { .. })
        ));
        assert_eq!(
            to_polar(&DiagramPoint::new(0.0, f64::INFINITY, 0)),
            Err(Error::EssentialNoPolar)
        );
    }

    #[test]
    fn mirror_fixtures() {
        assert_eq!(
            mirror(&DiagramPoint::new(0.0, 2.0, 0)),
            DiagramPoint::new(1.0, 1.0, 0)
        );
        assert_eq!(
            mirror(&DiagramPoint::new(1.0, 3.0, 0)),
            DiagramPoint::new(2.0, 2.0, 0)
        );
        assert_eq!(
            mirror(&DiagramPoint::new(5.0, 5.0, 0)),
            DiagramPoint::new(5.0, 5.0, 0)
        );
    }

    #[test]
    fn diagram_rejects_inverted_points() {
        assert!(matches!(
            PersistenceDiagram::from_pairs(0, &[(0.5, 0.3)]),
            Err(Error::Validation(_))
        ));
        assert!(PersistenceDiagram::from_pairs(0, &[(f64::NAN, 0.3)]).is_err());
    }

    #[test]
    fn infinite_deaths_become_essential() {
        let d = PersistenceDiagram::from_pairs(0, &[(0.0, 0.2), (0.0, f64::INFINITY)]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.essential_count(0), 1);
        let capped = d.capped(1.0).unwrap();
        assert_eq!(capped.len(), 2);
        assert!(capped.essential().is_empty());
        assert_eq!(capped.cap, Some(1.0));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = PersistenceDiagram::from_pairs(0, &[(0.0, 1.0)]).unwrap();
        let b = PersistenceDiagram::from_pairs(1, &[(0.0, 1.0)]).unwrap();
        assert_eq!(
            single_dimension(&a, &b).unwrap_err(),
            Error::MixedDimensions(0, 1)
        );
        assert!(single_dimension(&a, &PersistenceDiagram::empty()).is_ok());
    }

    #[test]
    fn valid_points_live_in_upper_octant() {
        for &(b, d) in &[(0.0, 1e-3), (0.2, 0.3), (5.0, 100.0), (1.0, 1.0 + 1e-9)] {
            let p = DiagramPoint::new(b, d, 0);
            let polar = to_polar(&p).unwrap();
            assert!(polar.angle > FRAC_PI_4 && polar.angle <= FRAC_PI_2);
            let pers = polar.radius * (polar.angle.sin() - polar.angle.cos());
            assert!((pers - p.persistence()).abs() <= 1e-12 * polar.radius.max(1.0));
        }
    }
}
