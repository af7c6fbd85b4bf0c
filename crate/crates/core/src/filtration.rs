//! Filtered simplicial complexes of dimension at most two, and the
//! lower-star filtration of the dominance graph.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::diagram::io::{format_real, parse_real};
use crate::error::{Error, Result};
use crate::preflib::DominanceMatrix;

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted ascending, one to three vertices.
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn new(mut vertices: Vec<usize>, value: f64) -> Self {
        vertices.sort_unstable();
        Simplex { vertices, value }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, in ascending lexicographic order.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        if self.vertices.len() < 2 {
            return Vec::new();
        }
        let mut faces: Vec<Vec<usize>> = (0..self.vertices.len())
            .map(|skip| {
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        faces.sort();
        faces
    }
}

fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.dim().cmp(&b.dim()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Simplices stored in filtration order: by value, then dimension, then
/// lexicographic vertex tuple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
}

impl FilteredComplex {
    /// Sorts into filtration order and checks that every face is present with
    /// a value no larger than its coface.
    pub fn new(mut simplices: Vec<Simplex>) -> Result<Self> {
        for s in &simplices {
            if s.vertices.is_empty() || s.vertices.len() > 3 {
                return Err(Error::InvalidFiltration(format!(
                    "simplex {:?} has unsupported dimension",
                    s.vertices
                )));
            }
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidFiltration(format!(
                    "simplex {:?} has repeated or unsorted vertices",
                    s.vertices
                )));
            }
            if !s.value.is_finite() {
                return Err(Error::InvalidFiltration(format!(
                    "simplex {:?} has non-finite value",
                    s.vertices
                )));
            }
        }
        simplices.sort_by(filtration_order);
        let complex = FilteredComplex { simplices };
        complex.validate()?;
        Ok(complex)
    }

    /// Flag complex of a weighted graph: every clique of size ≤ 3 enters at
    /// the maximum value among its vertices and edges.
    pub fn flag(
        vertex_values: &[f64],
        edges: &[(usize, usize, f64)],
        expand_triangles: bool,
    ) -> Result<Self> {
        let n = vertex_values.len();
        let mut simplices: Vec<Simplex> = vertex_values
            .iter()
            .enumerate()
            .map(|(v, &value)| Simplex::new(vec![v], value))
            .collect();
        let mut edge_value: HashMap<(usize, usize), f64> = HashMap::new();
        for &(a, b, value) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidFiltration(format!("bad edge ({a}, {b})")));
            }
            let key = (a.min(b), a.max(b));
            let value = value.max(vertex_values[a]).max(vertex_values[b]);
            if edge_value.insert(key, value).is_some() {
                return Err(Error::InvalidFiltration(format!("duplicate edge {key:?}")));
            }
            simplices.push(Simplex::new(vec![key.0, key.1], value));
        }
        if expand_triangles {
            for a in 0..n {
                for b in (a + 1)..n {
                    let Some(&ab) = edge_value.get(&(a, b)) else {
                        continue;
                    };
                    for c in (b + 1)..n {
                        if let (Some(&ac), Some(&bc)) =
                            (edge_value.get(&(a, c)), edge_value.get(&(b, c)))
                        {
                            simplices.push(Simplex::new(vec![a, b, c], ab.max(ac).max(bc)));
                        }
                    }
                }
            }
        }
        FilteredComplex::new(simplices)
    }

    fn validate(&self) -> Result<()> {
        let mut value_of: HashMap<&[usize], f64> = HashMap::with_capacity(self.simplices.len());
        for s in &self.simplices {
            for face in s.faces() {
                match value_of.get(face.as_slice()) {
                    Some(&fv) if fv <= s.value => {}
                    Some(&fv) => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {face:?} at {fv} enters after {:?} at {}",
                            s.vertices, s.value
                        )))
                    }
                    None => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {face:?} of {:?} missing or out of order",
                            s.vertices
                        )))
                    }
                }
            }
            if value_of.insert(&s.vertices, s.value).is_some() {
                return Err(Error::InvalidFiltration(format!(
                    "duplicate simplex {:?}",
                    s.vertices
                )));
            }
        }
        Ok(())
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }

    pub fn vertex_count(&self) -> usize {
        self.count_dim(0)
    }

    /// One `dim v0[,v1[,v2]] value` line per simplex, in filtration order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let verts: Vec<String> = s.vertices.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{} {} {}",
                s.dim(),
                verts.join(","),
                format_real(s.value)
            );
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self> {
        let mut simplices = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(line_no, "expected 'dim vertices value'"));
            }
            let dim: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid dimension '{}'", fields[0])))?;
            let vertices = fields[1]
                .split(',')
                .map(|v| v.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| {
                    Error::parse(line_no, format!("invalid vertex list '{}'", fields[1]))
                })?;
            if vertices.len() != dim + 1 {
                return Err(Error::parse(
                    line_no,
                    "vertex count does not match dimension",
                ));
            }
            let value = parse_real(fields[2], line_no)?;
            let simplex = Simplex::new(vertices, value);
            if !seen.insert(simplex.vertices.clone()) {
                return Err(Error::parse(line_no, "duplicate simplex"));
            }
            simplices.push(simplex);
        }
        FilteredComplex::new(simplices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationConfig {
    pub epsilon: f64,
    pub expand_triangles: bool,
    /// Death value given to essential classes when they must be compared.
    pub cap: Option<f64>,
}

impl Default for FiltrationConfig {
    fn default() -> Self {
        FiltrationConfig {
            epsilon: DEFAULT_EPSILON,
            expand_triangles: true,
            cap: None,
        }
    }
}

/// Edge value `1 / (|w_ij| + ε)` for a non-tied pair.
pub fn edge_value(margin: i64, epsilon: f64) -> f64 {
    1.0 / (margin.unsigned_abs() as f64 + epsilon)
}

/// Lower-star filtration of the dominance graph.
///
/// Vertices enter at 0, an edge `{i, j}` enters at `1 / (|w_ij| + ε)` when
/// the pair is not tied, and (optionally) each triangle of edges enters at
/// the largest of its edge values.
pub fn build_filtration(dom: &DominanceMatrix, cfg: &FiltrationConfig) -> Result<FilteredComplex> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::param(format!(
            "epsilon must be > 0, got {}",
            cfg.epsilon
        )));
    }
    let n = dom.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = dom.margin(i, j);
            if w != 0 {
                edges.push((i, j, edge_value(w, cfg.epsilon)));
            }
        }
    }
    FilteredComplex::flag(&vec![0.0; n], &edges, cfg.expand_triangles)
}
