//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppd_core::diagram::{DiagramPoint, PersistenceDiagram};
use ppd_core::filtration::{FilteredComplex, Simplex};

/// Finite points as `(dim, birth, death)` and essential classes as `(dim, birth)`.
pub type Multiset = (Vec<(usize, f64, f64)>, Vec<(usize, f64)>);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rank over GF(2) of the given columns (each a set of row ids).
fn rank_gf2(mut cols: Vec<Vec<bool>>) -> usize {
    let mut rank = 0;
    let rows = cols.first().map_or(0, Vec::len);
    for r in 0..rows {
        let Some(pivot) = (rank..cols.len()).find(|&c| cols[c][r]) else {
            continue;
        };
        cols.swap(rank, pivot);
        let p = cols[rank].clone();
        for (c, col) in cols.iter_mut().enumerate() {
            if c != rank && col[r] {
                for (x, y) in col.iter_mut().zip(&p) {
                    *x ^= *y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the boundary map from `dim`-simplices entering at or before `b`,
/// keeping only rows of `(dim-1)`-simplices that satisfy `row_filter`.
fn boundary_rank(
    s: &[Simplex],
    dim: usize,
    b: f64,
    row_filter: impl Fn(&Simplex) -> bool,
) -> usize {
    if dim == 0 {
        return 0;
    }
    let rows: Vec<&Simplex> = s
        .iter()
        .filter(|x| x.dim() == dim - 1 && row_filter(x))
        .collect();
    let cols: Vec<Vec<bool>> = s
        .iter()
        .filter(|x| x.dim() == dim && x.value <= b)
        .map(|x| {
            let faces = x.faces();
            rows.iter().map(|r| faces.contains(&r.vertices)).collect()
        })
        .collect();
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    rank_gf2(cols)
}

/// Persistent Betti number `β_k^{a,b}` = rank of `H_k(K_a) → H_k(K_b)`:
/// `n_k(a) − rk ∂_k(a) − rk ∂_{k+1}(b) + rk ∂_{k+1}(b)|rows ∉ K_a`.
pub fn persistent_betti(complex: &FilteredComplex, k: usize, a: f64, b: f64) -> i64 {
    let s = complex.simplices();
    let n_k = s.iter().filter(|x| x.dim() == k && x.value <= a).count() as i64;
    let rk_a = boundary_rank(s, k, a, |x| x.value <= a) as i64;
    let rk_b = boundary_rank(s, k + 1, b, |x| x.value <= b) as i64;
    let rk_out = boundary_rank(s, k + 1, b, |x| x.value > a && x.value <= b) as i64;
    n_k - rk_a - rk_b + rk_out
}

/// Diagram in dimensions 0 and 1 recovered from persistent Betti numbers by
/// inclusion–exclusion. Finite points as `(dim, birth, death)`, essential
/// classes as `(dim, birth)`; both sorted.
pub fn betti_oracle(complex: &FilteredComplex) -> Multiset {
    let mut values: Vec<f64> = complex.simplices().iter().map(|s| s.value).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let m = values.len();
    let beta = |k: usize, i: isize, j: usize| -> i64 {
        if i < 0 {
            0
        } else {
            persistent_betti(complex, k, values[i as usize], values[j])
        }
    };
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for k in 0..=1 {
        for i in 0..m {
            for j in (i + 1)..m {
                let ii = i as isize;
                let mu = beta(k, ii, j - 1) - beta(k, ii, j) - beta(k, ii - 1, j - 1)
                    + beta(k, ii - 1, j);
                assert!(mu >= 0, "negative multiplicity");
                for _ in 0..mu {
                    finite.push((k, values[i], values[j]));
                }
            }
            let last = m - 1;
            let ess = beta(k, i as isize, last) - beta(k, i as isize - 1, last);
            for _ in 0..ess {
                essential.push((k, values[i]));
            }
        }
    }
    finite.sort_by(|x, y| (x.0, x.1, x.2).partial_cmp(&(y.0, y.1, y.2)).unwrap());
    essential.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
    (finite, essential)
}

pub fn diagram_multiset(d: &PersistenceDiagram) -> Multiset {
    let mut finite: Vec<_> = d
        .points()
        .iter()
        .map(|p| (p.dim, p.birth, p.death))
        .collect();
    let mut essential: Vec<_> = d.essential().iter().map(|e| (e.dim, e.birth)).collect();
    finite.sort_by(|x, y| (x.0, x.1, x.2).partial_cmp(&(y.0, y.1, y.2)).unwrap());
    essential.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
    (finite, essential)
}

/// H0 by Kruskal over edges in filtration order: merging two components
/// kills the one with the later birth.
pub fn h0_oracle(complex: &FilteredComplex) -> (Vec<(f64, f64)>, Vec<f64>) {
    let s = complex.simplices();
    let n = complex.vertex_count();
    let mut birth = vec![f64::NAN; n];
    for x in s.iter().filter(|x| x.dim() == 0) {
        birth[x.vertices[0]] = x.value;
    }
    let mut comp: Vec<usize> = (0..n).collect();
    let comp_birth = birth.clone();
    let mut points = Vec::new();
    for e in s.iter().filter(|x| x.dim() == 1) {
        let (a, b) = (comp[e.vertices[0]], comp[e.vertices[1]]);
        if a == b {
            continue;
        }
        let (keep, kill) = if comp_birth[a] <= comp_birth[b] {
            (a, b)
        } else {
            (b, a)
        };
        if comp_birth[kill] < e.value {
            points.push((comp_birth[kill], e.value));
        }
        for c in comp.iter_mut() {
            if *c == kill {
                *c = keep;
            }
        }
    }
    let mut roots: Vec<usize> = comp.clone();
    roots.sort_unstable();
    roots.dedup();
    let mut essential: Vec<f64> = roots.iter().map(|&r| comp_birth[r]).collect();
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    essential.sort_by(f64::total_cmp);
    (points, essential)
}

/// Random flag complex on up to `max_vertices` vertices with values drawn
/// from a coarse grid, so ties between simplices are common.
pub fn random_flag_complex(rng: &mut ChaCha8Rng, max_vertices: usize) -> FilteredComplex {
    let n = rng.random_range(1..=max_vertices);
    let vertex_values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random_range(0..4) as f64 * 0.125
            }
        })
        .collect();
    let density = rng.random_range(0.2..0.95);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(density) {
                let base = vertex_values[i].max(vertex_values[j]);
                edges.push((i, j, base + rng.random_range(0..8) as f64 * 0.125));
            }
        }
    }
    FilteredComplex::flag(&vertex_values, &edges, true).unwrap()
}

/// `n` points with births in `[lo, hi)` and persistence in `[min_pers, max_pers)`.
pub fn random_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    (lo, hi): (f64, f64),
    (min_pers, max_pers): (f64, f64),
    dim: usize,
) -> Vec<DiagramPoint> {
    (0..n)
        .map(|_| {
            let b = rng.random_range(lo..hi);
            DiagramPoint::new(b, b + rng.random_range(min_pers..max_pers), dim)
        })
        .collect()
}

pub fn random_diagram(rng: &mut ChaCha8Rng, max_points: usize) -> PersistenceDiagram {
    let n = rng.random_range(0..=max_points);
    PersistenceDiagram::new(random_points(rng, n, (0.0, 3.0), (0.01, 2.0), 1)).unwrap()
}

/// Every partial matching between `n` left and `m` right points, as the list
/// of its costs (unmatched points pay their diagonal cost).
pub fn enumerate_matchings(
    n: usize,
    m: usize,
    pair: &dyn Fn(usize, usize) -> f64,
    left_diag: &dyn Fn(usize) -> f64,
    right_diag: &dyn Fn(usize) -> f64,
    max_cardinality_only: bool,
) -> Vec<Vec<f64>> {
    fn go(
        i: usize,
        n: usize,
        m: usize,
        used: &mut Vec<bool>,
        acc: &mut Vec<(usize, Option<usize>)>,
        out: &mut Vec<Vec<(usize, Option<usize>)>>,
    ) {
        if i == n {
            out.push(acc.clone());
            return;
        }
        acc.push((i, None));
        go(i + 1, n, m, used, acc, out);
        acc.pop();
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                acc.push((i, Some(j)));
                go(i + 1, n, m, used, acc, out);
                acc.pop();
                used[j] = false;
            }
        }
    }
    let mut all = Vec::new();
    go(0, n, m, &mut vec![false; m], &mut Vec::new(), &mut all);
    let full = n.min(m);
    all.into_iter()
        .filter(|assign| {
            !max_cardinality_only || assign.iter().filter(|(_, j)| j.is_some()).count() == full
        })
        .map(|assign| {
            let mut costs = Vec::new();
            let mut hit = vec![false; m];
            for (i, j) in assign {
                match j {
                    Some(j) => {
                        hit[j] = true;
                        costs.push(pair(i, j));
                    }
                    None if !max_cardinality_only => costs.push(left_diag(i)),
                    None => {}
                }
            }
            if !max_cardinality_only {
                for (j, h) in hit.iter().enumerate() {
                    if !h {
                        costs.push(right_diag(j));
                    }
                }
            }
            costs
        })
        .collect()
}

/// Minimum over matchings of `(Σ c^p)^{1/p}`.
pub fn min_sum(matchings: &[Vec<f64>], p: f64) -> f64 {
    matchings
        .iter()
        .map(|c| c.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum over matchings of the largest cost.
pub fn min_max(matchings: &[Vec<f64>]) -> f64 {
    matchings
        .iter()
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

pub fn linf(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

pub fn linf_diag(a: &DiagramPoint) -> f64 {
    0.5 * (a.death - a.birth)
}

/// High-precision reference for the polar distance, independent of the
/// library: angles via `atan2`, the half-angle term via `1 − cos`.
pub fn polar_reference(p: &DiagramPoint, q: &DiagramPoint, alpha: f64) -> f64 {
    let (r1, r2) = (p.birth.hypot(p.death), q.birth.hypot(q.death));
    let dt = p.death.atan2(p.birth) - q.death.atan2(q.birth);
    ((r1 - r2).powi(2) + alpha * 0.5 * (1.0 - dt.cos())).sqrt()
}
