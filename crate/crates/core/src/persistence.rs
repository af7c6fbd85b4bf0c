//! Persistent homology over GF(2) by boundary-matrix reduction.
//!
//! Columns are reduced left to right, highest dimension first, with
//! clearing: once column `j` has pivot `i`, column `i` is known to reduce to
//! zero and is skipped. H0 also has a union-find path that follows the elder
//! rule and yields the same pairs.

use std::collections::HashMap;

use crate::diagram::{DiagramPoint, EssentialClass, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::filtration::FilteredComplex;

/// Sparse GF(2) boundary matrix; column `j` lists the filtration indices of
/// the faces of simplex `j`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn from_complex(complex: &FilteredComplex) -> Result<Self> {
        let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(complex.len());
        let mut columns = Vec::with_capacity(complex.len());
        let mut dims = Vec::with_capacity(complex.len());
        for (j, s) in complex.simplices().iter().enumerate() {
            let mut col = Vec::with_capacity(s.vertices.len());
            for face in s.faces() {
                let &i = index.get(face.as_slice()).ok_or_else(|| {
                    Error::InvalidFiltration(format!(
                        "face {face:?} of {:?} precedes no index",
                        s.vertices
                    ))
                })?;
                col.push(i);
            }
            col.sort_unstable();
            index.insert(&s.vertices, j);
            columns.push(col);
            dims.push(s.dim());
        }
        Ok(BoundaryMatrix { columns, dims })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }
}

/// Result of reducing a boundary matrix: `pivot_of[j] = Some(i)` pairs
/// creator `i` with destroyer `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub pivot_of: Vec<Option<usize>>,
    pub destroyed_by: Vec<Option<usize>>,
    pub dims: Vec<usize>,
}

impl Reduction {
    pub fn is_creator(&self, j: usize) -> bool {
        self.pivot_of[j].is_none()
    }

    pub fn is_essential(&self, j: usize) -> bool {
        self.pivot_of[j].is_none() && self.destroyed_by[j].is_none()
    }
}

/// Symmetric difference of two ascending index lists.
fn add_columns(target: &mut Vec<usize>, source: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < source.len() {
        match target[a].cmp(&source[b]) {
            std::cmp::Ordering::Less => {
                out.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(source[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out.extend_from_slice(&target[a..]);
    out.extend_from_slice(&source[b..]);
    *target = out;
}

pub fn reduce(matrix: &BoundaryMatrix) -> Reduction {
    let n = matrix.len();
    let mut columns = matrix.columns.clone();
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    let mut destroyed_by: Vec<Option<usize>> = vec![None; n];
    let mut column_with_low: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let max_dim = matrix.dims.iter().copied().max().unwrap_or(0);

    for dim in (1..=max_dim).rev() {
        for j in 0..n {
            if matrix.dims[j] != dim || cleared[j] {
                continue;
            }
            while let Some(&low) = columns[j].last() {
                match column_with_low[low] {
                    Some(k) => {
                        let source = std::mem::take(&mut columns[k]);
                        add_columns(&mut columns[j], &source);
                        columns[k] = source;
                    }
                    None => break,
                }
            }
            if let Some(&low) = columns[j].last() {
                column_with_low[low] = Some(j);
                pivot_of[j] = Some(low);
                destroyed_by[low] = Some(j);
                cleared[low] = true;
                columns[low].clear();
            }
        }
    }
    Reduction {
        pivot_of,
        destroyed_by,
        dims: matrix.dims.clone(),
    }
}

/// Persistence diagram of dimensions 0 and 1.
///
/// Finite pairs of zero persistence are dropped; unpaired creators become
/// essential classes. Classes of dimension two and above are not reported.
pub fn compute_persistence(complex: &FilteredComplex) -> Result<PersistenceDiagram> {
    let matrix = BoundaryMatrix::from_complex(complex)?;
    let reduction = reduce(&matrix);
    let simplices = complex.simplices();
    let mut diagram = PersistenceDiagram::empty();
    for (j, s) in simplices.iter().enumerate() {
        if let Some(i) = reduction.pivot_of[j] {
            let dim = simplices[i].dim();
            let (birth, death) = (simplices[i].value, s.value);
            if dim <= 1 && death > birth {
                diagram.push(DiagramPoint::new(birth, death, dim))?;
            }
        } else if reduction.destroyed_by[j].is_none() && s.dim() <= 1 {
            diagram.push_essential(EssentialClass {
                birth: s.value,
                dim: s.dim(),
            })?;
        }
    }
    Ok(diagram)
}

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the surviving root, or `None`
    /// when they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        Some(big)
    }
}

/// H0 diagram by a union-find sweep over the edges in filtration order.
///
/// When two components meet, the one whose oldest vertex entered later dies
/// (elder rule), with ties broken by filtration index exactly as the
/// reduction does.
pub fn h0_union_find(complex: &FilteredComplex) -> Result<PersistenceDiagram> {
    let simplices = complex.simplices();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut birth_index: Vec<usize> = Vec::new();
    for (j, s) in simplices.iter().enumerate() {
        if s.dim() == 0 {
            slot.insert(s.vertices[0], birth_index.len());
            birth_index.push(j);
        }
    }
    let mut uf = UnionFind::new(birth_index.len());
    // Oldest filtration index per root.
    let mut oldest = birth_index.clone();
    let mut diagram = PersistenceDiagram::empty();
    for s in simplices.iter().filter(|s| s.dim() == 1) {
        let a = slot[&s.vertices[0]];
        let b = slot[&s.vertices[1]];
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            continue;
        }
        let (elder, younger) = if oldest[ra] < oldest[rb] {
            (oldest[ra], oldest[rb])
        } else {
            (oldest[rb], oldest[ra])
        };
        let root = uf.union(ra, rb).expect("distinct roots");
        oldest[root] = elder;
        let birth = simplices[younger].value;
        if s.value > birth {
            diagram.push(DiagramPoint::new(birth, s.value, 0))?;
        }
    }
    for v in 0..birth_index.len() {
        if uf.find(v) == v {
            diagram.push_essential(EssentialClass {
                birth: simplices[oldest[v]].value,
                dim: 0,
            })?;
        }
    }
    Ok(diagram)
}

pub fn connected_components(complex: &FilteredComplex) -> usize {
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for s in complex.simplices().iter().filter(|s| s.dim() == 0) {
        let next = slot.len();
        slot.insert(s.vertices[0], next);
    }
    let mut uf = UnionFind::new(slot.len());
    let mut components = slot.len();
    for s in complex.simplices().iter().filter(|s| s.dim() == 1) {
        if uf
            .union(slot[&s.vertices[0]], slot[&s.vertices[1]])
            .is_some()
        {
            components -= 1;
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::Simplex;

    fn pairs(d: &PersistenceDiagram, dim: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = d
            .restrict(dim)
            .points()
            .iter()
            .map(|p| (p.birth, p.death))
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn path_graph() {
        let k = FilteredComplex::flag(&[0.0; 3], &[(0, 1, 0.2), (1, 2, 0.5)], true).unwrap();
        let d = compute_persistence(&k).unwrap();
        assert_eq!(pairs(&d, 0), vec![(0.0, 0.2), (0.0, 0.5)]);
        assert_eq!(d.essential_count(0), 1);
        assert!(h0_union_find(&k).unwrap().same_multiset(&d.restrict(0)));
    }

    #[test]
    fn hollow_four_cycle_is_essential() {
        let edges = [(0, 1, 0.1), (1, 2, 0.2), (2, 3, 0.3), (0, 3, 0.4)];
        let k = FilteredComplex::flag(&[0.0; 4], &edges, true).unwrap();
        let d = compute_persistence(&k).unwrap();
        assert!(pairs(&d, 1).is_empty());
        assert_eq!(d.essential_count(1), 1);
        assert_eq!(d.restrict(1).essential()[0].birth, 0.4);
    }

    #[test]
    fn filled_triangle_has_no_finite_cycle() {
        let edges = [(0, 1, 0.1), (1, 2, 0.2), (0, 2, 0.3)];
        let k = FilteredComplex::flag(&[0.0; 3], &edges, true).unwrap();
        assert_eq!(k.count_dim(2), 1);
        let d = compute_persistence(&k).unwrap();
        assert!(pairs(&d, 1).is_empty());
        assert_eq!(d.essential_count(1), 0);
    }

    #[test]
    fn square_with_late_diagonal_gives_finite_cycle() {
        let edges = [
            (0, 1, 0.1),
            (1, 2, 0.2),
            (2, 3, 0.3),
            (0, 3, 0.4),
            (0, 2, 0.9),
        ];
        let k = FilteredComplex::flag(&[0.0; 4], &edges, true).unwrap();
        let d = compute_persistence(&k).unwrap();
        assert_eq!(pairs(&d, 1), vec![(0.4, 0.9)]);
        assert_eq!(d.essential_count(1), 0);
    }

    #[test]
    fn component_counts() {
        let two_edges =
            FilteredComplex::flag(&[0.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)], true).unwrap();
        assert_eq!(connected_components(&two_edges), 2);
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in (a + 1)..5 {
                edges.push((a, b, (a + b) as f64));
            }
        }
        let k5 = FilteredComplex::flag(&[0.0; 5], &edges, true).unwrap();
        assert_eq!(connected_components(&k5), 1);
        assert_eq!(connected_components(&FilteredComplex::default()), 0);
        assert_eq!(compute_persistence(&k5).unwrap().essential_count(0), 1);
    }

    #[test]
    fn elder_rule_with_vertex_values() {
        // Vertex 1 is younger, so it dies when the edge arrives.
        let k = FilteredComplex::new(vec![
            Simplex::new(vec![0], 0.0),
            Simplex::new(vec![1], 0.5),
            Simplex::new(vec![0, 1], 2.0),
        ])
        .unwrap();
        let d = compute_persistence(&k).unwrap();
        assert_eq!(pairs(&d, 0), vec![(0.5, 2.0)]);
        assert!(h0_union_find(&k).unwrap().same_multiset(&d.restrict(0)));
    }

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut a = vec![0, 2, 5];
        add_columns(&mut a, &[2, 3, 5, 7]);
        assert_eq!(a, vec![0, 3, 7]);
    }
}
