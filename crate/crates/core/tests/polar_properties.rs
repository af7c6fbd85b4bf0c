mod common;

use std::f64::consts::PI;

use common::{polar_reference, random_points, rng};
use ppd_core::classical::bottleneck;
use ppd_core::diagram::{to_polar, DiagramPoint, PersistenceDiagram, PolarParams};
use ppd_core::matching::Endpoint;
use ppd_core::polar::{ppd, ppd_gradient, ppd_loss, ppd_point, LossTerm, PpdConfig};
use rand::Rng;

fn pt(b: f64, d: f64) -> DiagramPoint {
    DiagramPoint::new(b, d, 1)
}

fn alpha(a: f64) -> PolarParams {
    PolarParams::with_alpha(a).unwrap()
}

#[test]
fn matches_high_precision_reference() {
    let mut r = rng(1);
    let params = alpha(1.5);
    for _ in 0..2000 {
        let ps = random_points(&mut r, 2, (0.0, 4.0), (0.01, 3.0), 1);
        let d = ppd_point(&ps[0], &ps[1], &params).unwrap();
        assert!((d - polar_reference(&ps[0], &ps[1], 1.5)).abs() < 1e-12);
    }
}

#[test]
fn quasi_metric_axioms_on_random_pairs() {
    let mut r = rng(2);
    for _ in 0..10_000 {
        let a = r.random_range(0.05..20.0);
        let params = alpha(a);
        let ps = random_points(&mut r, 2, (0.0, 5.0), (0.0, 5.0), 1);
        let (p, q) = (ps[0], ps[1]);
        if p.norm() < 1e-6 || q.norm() < 1e-6 {
            continue;
        }
        let d = ppd_point(&p, &q, &params).unwrap();
        assert!(d >= 0.0);
        assert_eq!(d, ppd_point(&q, &p, &params).unwrap());
        assert_eq!(ppd_point(&p, &p, &params).unwrap(), 0.0);
        if p != q {
            assert!(d > 0.0);
        }
    }
}

#[test]
fn random_triangle_search_finds_no_violation() {
    // sin(|Δθ|/2) is half the chord length on the unit circle, so the
    // distance is an l2 product of two metrics and the triangle inequality
    // holds for every α.
    let mut r = rng(3);
    let mut worst = f64::NEG_INFINITY;
    for &a in &[1.0, 100.0, 1e4] {
        let params = alpha(a);
        for _ in 0..20_000 {
            let ps: Vec<DiagramPoint> = (0..3)
                .map(|_| {
                    let radius = r.random_range(0.01..5.0);
                    let theta = r.random_range(PI / 4.0..PI / 2.0);
                    pt(radius * theta.cos(), radius * theta.sin())
                })
                .collect();
            let d = |i: usize, j: usize| ppd_point(&ps[i], &ps[j], &params).unwrap();
            worst = worst.max(d(0, 2) - d(0, 1) - d(1, 2));
        }
    }
    assert!(worst <= 1e-12, "triangle violation {worst}");
}

fn random_pair(r: &mut impl Rng) -> (DiagramPoint, DiagramPoint) {
    let mut draw = || loop {
        let p = pt(r.random_range(0.0..3.0), r.random_range(0.0..5.0));
        if p.norm() > 0.1 {
            return p;
        }
    };
    (draw(), draw())
}

fn norm4(v: [f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng(4);
    let h = 1e-6;
    let mut checked = 0;
    while checked < 1000 {
        let (p, q) = random_pair(&mut r);
        let params = alpha(r.random_range(0.25..3.0));
        let f = |p: DiagramPoint, q: DiagramPoint| ppd_point(&p, &q, &params).unwrap();
        if f(p, q) < 1e-3 {
            continue;
        }
        let g = ppd_gradient(&p, &q, &params).unwrap();
        let fd = [
            (f(pt(p.birth + h, p.death), q) - f(pt(p.birth - h, p.death), q)) / (2.0 * h),
            (f(pt(p.birth, p.death + h), q) - f(pt(p.birth, p.death - h), q)) / (2.0 * h),
            (f(p, pt(q.birth + h, q.death)) - f(p, pt(q.birth - h, q.death))) / (2.0 * h),
            (f(p, pt(q.birth, q.death + h)) - f(p, pt(q.birth, q.death - h))) / (2.0 * h),
        ];
        let an = [g.first.0, g.first.1, g.second.0, g.second.1];
        let err = norm4([an[0] - fd[0], an[1] - fd[1], an[2] - fd[2], an[3] - fd[3]]);
        assert!(err / norm4(an) < 1e-5, "{p:?} {q:?}: {an:?} vs {fd:?}");
        checked += 1;
    }
}

#[test]
fn squared_loss_gradients_including_coincident_pairs() {
    let mut r = rng(5);
    let h = 1e-6;
    for k in 0..300 {
        let (p, mut q) = random_pair(&mut r);
        if k % 3 == 0 {
            q = p;
        }
        let params = alpha(1.7);
        let terms = [
            LossTerm {
                left: Endpoint::Point(0),
                right: Endpoint::Point(0),
                weight: 0.8,
            },
            LossTerm {
                left: Endpoint::Diagonal,
                right: Endpoint::Point(1),
                weight: 1.3,
            },
        ];
        let other = pt(0.4, 2.2);
        let loss = |p: DiagramPoint, q: DiagramPoint| {
            ppd_loss(&[p], &[q, other], &terms, &params).unwrap()
        };
        let l = loss(p, q);
        let fd = [
            (loss(pt(p.birth + h, p.death), q).value - loss(pt(p.birth - h, p.death), q).value)
                / (2.0 * h),
            (loss(pt(p.birth, p.death + h), q).value - loss(pt(p.birth, p.death - h), q).value)
                / (2.0 * h),
            (loss(p, pt(q.birth + h, q.death)).value - loss(p, pt(q.birth - h, q.death)).value)
                / (2.0 * h),
            (loss(p, pt(q.birth, q.death + h)).value - loss(p, pt(q.birth, q.death - h)).value)
                / (2.0 * h),
        ];
        let an = [l.left[0].0, l.left[0].1, l.right[0].0, l.right[0].1];
        let err = norm4([an[0] - fd[0], an[1] - fd[1], an[2] - fd[2], an[3] - fd[3]]);
        if p == q {
            assert_eq!(an, [0.0; 4]);
            assert!(err < 1e-8);
        } else {
            assert!(err / norm4(an).max(1e-3) < 1e-5, "{an:?} vs {fd:?}");
        }
    }
}

fn perturbed(d: &[DiagramPoint], dirs: &[f64], delta: f64) -> PersistenceDiagram {
    PersistenceDiagram::new(
        d.iter()
            .zip(dirs)
            .map(|(p, &phi)| pt(p.birth + delta * phi.cos(), p.death + delta * phi.sin()))
            .collect(),
    )
    .unwrap()
}

#[test]
fn stability_ratio_is_flat_across_scales() {
    let mut r = rng(6);
    let cfg = PpdConfig {
        polar: PolarParams::new(1.0, 0.1).unwrap(),
        ..Default::default()
    };
    for _ in 0..100 {
        let pts = random_points(&mut r, 10, (0.5, 5.0), (0.5, 3.0), 1);
        let dirs: Vec<f64> = (0..10).map(|_| r.random_range(0.0..2.0 * PI)).collect();
        let base = PersistenceDiagram::new(pts.clone()).unwrap();
        let ratios: Vec<f64> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&delta| ppd(&base, &perturbed(&pts, &dirs, delta), &cfg).unwrap() / delta)
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(lo > 0.0 && hi / lo <= 3.0, "{ratios:?}");
    }
}

#[test]
fn scaling_moves_radius_but_not_angle() {
    let mut r = rng(7);
    for _ in 0..500 {
        let (p, q) = random_pair(&mut r);
        let lambda = r.random_range(0.1..10.0);
        let (a, b) = (to_polar(&p).unwrap(), to_polar(&p.scaled(lambda)).unwrap());
        assert!((a.angle - b.angle).abs() < 1e-14);
        assert!((b.radius - lambda * a.radius).abs() <= 1e-12 * b.radius);
        let radial = |x: &DiagramPoint, y: &DiagramPoint| {
            to_polar(x).unwrap().radius - to_polar(y).unwrap().radius
        };
        let scaled = radial(&p.scaled(lambda), &q.scaled(lambda));
        assert!((scaled - lambda * radial(&p, &q)).abs() <= 1e-11 * (1.0 + scaled.abs()));
    }
}

#[test]
fn same_radius_angle_sweep() {
    let r0 = 2.0;
    let params = alpha(1.0);
    let p1 = pt(0.0, r0);
    let mut last_ppd = 0.0;
    let mut bottlenecks = Vec::new();
    for k in 1..=100 {
        let dt = k as f64 * (PI / 2.0) / 101.0;
        let theta = PI / 2.0 + dt;
        let p2 = pt(r0 * theta.cos(), r0 * theta.sin());
        let euclid = (p1.birth - p2.birth).powi(2) + (p1.death - p2.death).powi(2);
        assert!((euclid - 2.0 * r0 * r0 * (1.0 - dt.cos())).abs() < 1e-12);
        let d = ppd_point(&p1, &p2, &params).unwrap();
        assert!(d > last_ppd);
        last_ppd = d;
        let a = PersistenceDiagram::new(vec![p1]).unwrap();
        let b = PersistenceDiagram::new(vec![p2]).unwrap();
        bottlenecks.push(bottleneck(&a, &b).unwrap());
    }
    let peak = bottlenecks.iter().cloned().fold(0.0, f64::max);
    let at = bottlenecks.iter().position(|&v| v == peak).unwrap();
    assert!(at > 0 && at < 99, "bottleneck rises then falls");
}
