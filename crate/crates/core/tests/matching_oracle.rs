mod common;

use common::{
    enumerate_matchings, linf, linf_diag, min_max, min_sum, polar_reference, random_diagram, rng,
};
use ppd_core::classical::{bottleneck_matching, wasserstein_matching, MetricParams};
use ppd_core::diagram::{mirror, PersistenceDiagram, PolarParams};
use ppd_core::polar::{ppd_diagram, Aggregate, DiagonalMode, PpdConfig};
use proptest::prelude::*;

fn classical_oracle(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Vec<Vec<f64>> {
    let (pa, pb) = (a.points(), b.points());
    enumerate_matchings(
        pa.len(),
        pb.len(),
        &|i, j| linf(&pa[i], &pb[j]),
        &|i| linf_diag(&pa[i]),
        &|j| linf_diag(&pb[j]),
        false,
    )
}

fn ppd_oracle(
    a: &PersistenceDiagram,
    b: &PersistenceDiagram,
    alpha: f64,
    exclude: bool,
) -> Vec<Vec<f64>> {
    let (pa, pb) = (a.points(), b.points());
    enumerate_matchings(
        pa.len(),
        pb.len(),
        &|i, j| polar_reference(&pa[i], &pb[j], alpha),
        &|i| polar_reference(&pa[i], &mirror(&pa[i]), alpha),
        &|j| polar_reference(&pb[j], &mirror(&pb[j]), alpha),
        exclude,
    )
}

#[test]
fn classical_distances_match_enumeration() {
    let mut r = rng(99);
    for case in 0..500 {
        let a = random_diagram(&mut r, 4);
        let b = random_diagram(&mut r, 4);
        let all = classical_oracle(&a, &b);
        let (bn, m) = bottleneck_matching(&a, &b).unwrap();
        assert!((bn - min_max(&all)).abs() < 1e-9, "case {case}");
        assert!(m.is_valid(a.len(), b.len()));
        for p in [1.0, 2.0, 3.5] {
            let (w, m) = wasserstein_matching(&a, &b, &MetricParams::with_p(p)).unwrap();
            assert!((w - min_sum(&all, p)).abs() < 1e-9, "case {case} p {p}");
            assert!((m.power_sum(p) - w).abs() < 1e-9);
        }
    }
}

#[test]
fn ppd_matches_enumeration() {
    let mut r = rng(123);
    for case in 0..500 {
        let a = random_diagram(&mut r, 4);
        let b = random_diagram(&mut r, 4);
        for exclude in [false, true] {
            let all = ppd_oracle(&a, &b, 1.5, exclude);
            for aggregate in [Aggregate::Sum, Aggregate::Max] {
                let cfg = PpdConfig {
                    polar: PolarParams::with_alpha(1.5).unwrap(),
                    diagonal_mode: if exclude {
                        DiagonalMode::Exclude
                    } else {
                        DiagonalMode::Project
                    },
                    aggregate,
                };
                let (v, _) = ppd_diagram(&a, &b, &cfg).unwrap();
                let expected = match aggregate {
                    Aggregate::Sum => min_sum(&all, 1.0),
                    Aggregate::Max => min_max(&all),
                };
                assert!(
                    (v - expected).abs() < 1e-9,
                    "case {case} {aggregate:?} exclude={exclude}: {v} vs {expected}"
                );
            }
        }
    }
}

fn small_diagram() -> impl Strategy<Value = PersistenceDiagram> {
    proptest::collection::vec((0.0f64..4.0, 0.0f64..3.0), 0..5).prop_map(|v| {
        let pairs: Vec<(f64, f64)> = v.into_iter().map(|(b, l)| (b, b + l)).collect();
        PersistenceDiagram::from_pairs(1, &pairs).unwrap()
    })
}

proptest! {
    #[test]
    fn distances_are_symmetric_and_vanish_on_self(a in small_diagram(), b in small_diagram()) {
        let (ab, _) = bottleneck_matching(&a, &b).unwrap();
        let (ba, _) = bottleneck_matching(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert_eq!(bottleneck_matching(&a, &a).unwrap().0, 0.0);
        let w = MetricParams::default();
        let (ab, _) = wasserstein_matching(&a, &b, &w).unwrap();
        let (ba, _) = wasserstein_matching(&b, &a, &w).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(wasserstein_matching(&a, &a, &w).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn bottleneck_never_exceeds_wasserstein(a in small_diagram(), b in small_diagram()) {
        let (bn, _) = bottleneck_matching(&a, &b).unwrap();
        let (w, _) = wasserstein_matching(&a, &b, &MetricParams::with_p(2.0)).unwrap();
        prop_assert!(bn <= w + 1e-9);
    }
}
