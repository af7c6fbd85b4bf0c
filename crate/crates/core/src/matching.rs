//! Optimal partial matchings between two point sets with diagonal options.
//!
//! Every diagram metric here reduces to one [`MatchingProblem`]: `n × m`
//! point-to-point costs plus, per point, the cost of sending it to the
//! diagonal. The problem is turned into a square assignment of size `n + m`
//! (each side padded with diagonal slots) and solved either for the minimum
//! sum of `cost^power` (Hungarian algorithm) or for the minimum largest cost
//! (threshold search over the finite set of candidate costs).

use crate::error::{Error, Result};

/// Largest combined point count accepted by [`brute_force`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Point(usize),
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub left: Endpoint,
    pub right: Endpoint,
    pub cost: f64,
}

/// A partial bijection; every point of either side occurs in exactly one pair
/// and diagonal-to-diagonal pairs are omitted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
}

impl Matching {
    pub fn costs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.cost).collect()
    }

    pub fn max_cost(&self) -> f64 {
        self.pairs.iter().map(|p| p.cost).fold(0.0, f64::max)
    }

    /// `(Σ cost^power)^{1/power}`.
    pub fn power_sum(&self, power: f64) -> f64 {
        let scale = self.max_cost();
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .pairs
            .iter()
            .map(|p| (p.cost / scale).powf(power))
            .sum();
        scale * s.powf(1.0 / power)
    }

    /// Checks the partial-bijection invariant against side sizes.
    pub fn is_valid(&self, n: usize, m: usize) -> bool {
        let mut left = vec![0usize; n];
        let mut right = vec![0usize; m];
        for pair in &self.pairs {
            match (pair.left, pair.right) {
                (Endpoint::Diagonal, Endpoint::Diagonal) => return false,
                (l, r) => {
                    if let Endpoint::Point(i) = l {
                        if i >= n {
                            return false;
                        }
                        left[i] += 1;
                    }
                    if let Endpoint::Point(j) = r {
                        if j >= m {
                            return false;
                        }
                        right[j] += 1;
                    }
                }
            }
        }
        left.iter().chain(&right).all(|&c| c == 1)
    }
}

/// How points left without a partner are charged.
#[derive(Debug, Clone, PartialEq)]
pub enum Unmatched {
    /// Each point may go to the diagonal at the given per-point cost.
    Diagonal { left: Vec<f64>, right: Vec<f64> },
    /// Maximum-cardinality matching; surplus points of the larger side are
    /// dropped at zero cost.
    Excluded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingProblem {
    n: usize,
    m: usize,
    /// Row-major `n × m`.
    pair_cost: Vec<f64>,
    unmatched: Unmatched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Minimize `Σ cost^p`; the reported value is `(Σ cost^p)^{1/p}`.
    Sum { power: f64 },
    /// Minimize the largest pair cost.
    Max,
}

impl MatchingProblem {
    pub fn new(n: usize, m: usize, pair_cost: Vec<f64>, unmatched: Unmatched) -> Result<Self> {
        if pair_cost.len() != n * m {
            return Err(Error::param(format!(
                "pair cost has {} entries, expected {}",
                pair_cost.len(),
                n * m
            )));
        }
        if let Unmatched::Diagonal { left, right } = &unmatched {
            if left.len() != n || right.len() != m {
                return Err(Error::param(
                    "diagonal cost vectors do not match side sizes",
                ));
            }
        }
        let all_costs = pair_cost.iter().chain(match &unmatched {
            Unmatched::Diagonal { left, right } => {
                Box::new(left.iter().chain(right)) as Box<dyn Iterator<Item = &f64>>
            }
            Unmatched::Excluded => Box::new(std::iter::empty()),
        });
        for &c in all_costs {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::param(format!(
                    "matching costs must be finite and >= 0, got {c}"
                )));
            }
        }
        Ok(MatchingProblem {
            n,
            m,
            pair_cost,
            unmatched,
        })
    }

    pub fn sides(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn pair_cost(&self, i: usize, j: usize) -> f64 {
        self.pair_cost[i * self.m + j]
    }

    fn left_unmatched(&self, i: usize) -> f64 {
        match &self.unmatched {
            Unmatched::Diagonal { left, .. } => left[i],
            Unmatched::Excluded => 0.0,
        }
    }

    fn right_unmatched(&self, j: usize) -> f64 {
        match &self.unmatched {
            Unmatched::Diagonal { right, .. } => right[j],
            Unmatched::Excluded => 0.0,
        }
    }

    /// Square cost matrix and the endpoint each row/column stands for.
    fn square(&self) -> (usize, Vec<f64>, Vec<Endpoint>, Vec<Endpoint>) {
        let (n, m) = (self.n, self.m);
        match &self.unmatched {
            Unmatched::Diagonal { left, right } => {
                // Rows: left points, then m diagonal slots.
                // Columns: right points, then n diagonal slots.
                let size = n + m;
                let mut cost = vec![0.0; size * size];
                for r in 0..size {
                    for c in 0..size {
                        cost[r * size + c] = match (r < n, c < m) {
                            (true, true) => self.pair_cost(r, c),
                            (true, false) => left[r],
                            (false, true) => right[c],
                            (false, false) => 0.0,
                        };
                    }
                }
                let rows = (0..n)
                    .map(Endpoint::Point)
                    .chain((0..m).map(|_| Endpoint::Diagonal))
                    .collect();
                let cols = (0..m)
                    .map(Endpoint::Point)
                    .chain((0..n).map(|_| Endpoint::Diagonal))
                    .collect();
                (size, cost, rows, cols)
            }
            Unmatched::Excluded => {
                let size = n.max(m);
                let mut cost = vec![0.0; size * size];
                for r in 0..n {
                    for c in 0..m {
                        cost[r * size + c] = self.pair_cost(r, c);
                    }
                }
                let rows = (0..size)
                    .map(|r| {
                        if r < n {
                            Endpoint::Point(r)
                        } else {
                            Endpoint::Diagonal
                        }
                    })
                    .collect();
                let cols = (0..size)
                    .map(|c| {
                        if c < m {
                            Endpoint::Point(c)
                        } else {
                            Endpoint::Diagonal
                        }
                    })
                    .collect();
                (size, cost, rows, cols)
            }
        }
    }

    fn endpoint_cost(&self, left: Endpoint, right: Endpoint) -> f64 {
        match (left, right) {
            (Endpoint::Point(i), Endpoint::Point(j)) => self.pair_cost(i, j),
            (Endpoint::Point(i), Endpoint::Diagonal) => self.left_unmatched(i),
            (Endpoint::Diagonal, Endpoint::Point(j)) => self.right_unmatched(j),
            (Endpoint::Diagonal, Endpoint::Diagonal) => 0.0,
        }
    }

    fn matching_from_assignment(
        &self,
        rows: &[Endpoint],
        cols: &[Endpoint],
        assign: &[usize],
    ) -> Matching {
        let mut pairs = Vec::with_capacity(self.n + self.m);
        for (r, &c) in assign.iter().enumerate() {
            let (left, right) = (rows[r], cols[c]);
            if left == Endpoint::Diagonal && right == Endpoint::Diagonal {
                continue;
            }
            pairs.push(MatchedPair {
                left,
                right,
                cost: self.endpoint_cost(left, right),
            });
        }
        Matching { pairs }
    }

    pub fn solve(&self, objective: Objective) -> Result<(f64, Matching)> {
        match objective {
            Objective::Sum { power } => self.solve_sum(power),
            Objective::Max => Ok(self.solve_max()),
        }
    }

    /// Minimum of `Σ cost^power` over all admissible matchings.
    pub fn solve_sum(&self, power: f64) -> Result<(f64, Matching)> {
        if !(power >= 1.0 && power.is_finite()) {
            return Err(Error::param(format!("order p must be >= 1, got {power}")));
        }
        let (size, cost, rows, cols) = self.square();
        if size == 0 {
            return Ok((0.0, Matching::default()));
        }
        // Scale before raising to the power so that large p stays representable.
        let scale = cost.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            let assign: Vec<usize> = (0..size).collect();
            return Ok((0.0, self.matching_from_assignment(&rows, &cols, &assign)));
        }
        let powered: Vec<f64> = cost.iter().map(|&c| (c / scale).powf(power)).collect();
        let assign = hungarian(size, &powered);
        let matching = self.matching_from_assignment(&rows, &cols, &assign);
        Ok((matching.power_sum(power), matching))
    }

    /// Minimum over admissible matchings of the largest pair cost.
    pub fn solve_max(&self) -> (f64, Matching) {
        let (size, cost, rows, cols) = self.square();
        if size == 0 {
            return (0.0, Matching::default());
        }
        let mut candidates = cost.clone();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        // The largest candidate is always feasible.
        let (mut lo, mut hi) = (0usize, candidates.len() - 1);
        let mut best = perfect_matching_below(size, &cost, candidates[hi])
            .expect("complete graph has a perfect matching");
        while lo < hi {
            let mid = (lo + hi) / 2;
            match perfect_matching_below(size, &cost, candidates[mid]) {
                Some(assign) => {
                    best = assign;
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        // `best` always holds the assignment found at `candidates[hi]`.
        (
            candidates[hi],
            self.matching_from_assignment(&rows, &cols, &best),
        )
    }
}

/// Minimum-cost perfect assignment of an `n × n` matrix (row-major).
///
/// Shortest augmenting paths with row and column potentials, O(n³).
/// Returns `assign[row] = column`.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    // 1-based arrays with a virtual column 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        row_of_col[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost[(r - 1) * n + (c - 1)] - u[r] - v[c];
                if reduced < minv[c] {
                    minv[c] = reduced;
                    way[c] = col0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for c in 1..=n {
        assign[row_of_col[c] - 1] = c - 1;
    }
    assign
}

/// A perfect matching using only entries `<= threshold`, if one exists
/// (augmenting paths, Kuhn's algorithm).
fn perfect_matching_below(n: usize, cost: &[f64], threshold: f64) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| (0..n).filter(|&c| cost[r * n + c] <= threshold).collect())
        .collect();
    let mut row_of_col: Vec<Option<usize>> = vec![None; n];

    fn augment(
        r: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        row_of_col: &mut [Option<usize>],
    ) -> bool {
        for &c in &adj[r] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            if row_of_col[c].is_none_or(|other| augment(other, adj, seen, row_of_col)) {
                row_of_col[c] = Some(r);
                return true;
            }
        }
        false
    }

    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(r, &adj, &mut seen, &mut row_of_col) {
            return None;
        }
    }
    let mut assign = vec![0usize; n];
    for (c, r) in row_of_col.into_iter().enumerate() {
        assign[r.expect("perfect")] = c;
    }
    Some(assign)
}

/// Exhaustive search over every admissible matching. Test oracle for
/// [`MatchingProblem::solve`]; limited to [`BRUTE_FORCE_LIMIT`] points.
pub fn brute_force(problem: &MatchingProblem, objective: Objective) -> Result<(f64, Matching)> {
    let (n, m) = problem.sides();
    if n + m > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge {
            limit: BRUTE_FORCE_LIMIT,
            got: n + m,
        });
    }
    if let Objective::Sum { power } = objective {
        if !(power >= 1.0 && power.is_finite()) {
            return Err(Error::param(format!("order p must be >= 1, got {power}")));
        }
    }
    let required = match problem.unmatched {
        Unmatched::Excluded => n.min(m),
        Unmatched::Diagonal { .. } => 0,
    };

    struct Search<'a> {
        problem: &'a MatchingProblem,
        objective: Objective,
        required: usize,
        partner: Vec<Option<usize>>,
        used: Vec<bool>,
        best: Option<(f64, Vec<Option<usize>>)>,
    }

    impl Search<'_> {
        fn evaluate(&self) -> Option<f64> {
            let (n, m) = self.problem.sides();
            let matched = self.partner.iter().filter(|p| p.is_some()).count();
            if matched < self.required {
                return None;
            }
            let mut costs = Vec::with_capacity(n + m);
            for (i, p) in self.partner.iter().enumerate() {
                costs.push(match p {
                    Some(j) => self.problem.pair_cost(i, *j),
                    None => self.problem.left_unmatched(i),
                });
            }
            for j in 0..m {
                if !self.used[j] {
                    costs.push(self.problem.right_unmatched(j));
                }
            }
            Some(match self.objective {
                Objective::Sum { power } => costs.iter().map(|c| c.powf(power)).sum(),
                Objective::Max => costs.iter().copied().fold(0.0, f64::max),
            })
        }

        fn run(&mut self, i: usize) {
            if i == self.partner.len() {
                if let Some(value) = self.evaluate() {
                    if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
                        self.best = Some((value, self.partner.clone()));
                    }
                }
                return;
            }
            self.partner[i] = None;
            self.run(i + 1);
            for j in 0..self.used.len() {
                if !self.used[j] {
                    self.used[j] = true;
                    self.partner[i] = Some(j);
                    self.run(i + 1);
                    self.used[j] = false;
                }
            }
            self.partner[i] = None;
        }
    }

    let mut search = Search {
        problem,
        objective,
        required,
        partner: vec![None; n],
        used: vec![false; m],
        best: None,
    };
    search.run(0);
    let (raw, partner) = search.best.expect("at least one admissible matching");

    let mut pairs = Vec::new();
    let mut used = vec![false; m];
    for (i, p) in partner.iter().enumerate() {
        let right = match p {
            Some(j) => {
                used[*j] = true;
                Endpoint::Point(*j)
            }
            None => Endpoint::Diagonal,
        };
        pairs.push(MatchedPair {
            left: Endpoint::Point(i),
            right,
            cost: problem.endpoint_cost(Endpoint::Point(i), right),
        });
    }
    for (j, &u) in used.iter().enumerate() {
        if !u {
            pairs.push(MatchedPair {
                left: Endpoint::Diagonal,
                right: Endpoint::Point(j),
                cost: problem.right_unmatched(j),
            });
        }
    }
    let value = match objective {
        Objective::Sum { power } => raw.powf(1.0 / power),
        Objective::Max => raw,
    };
    Ok((value, Matching { pairs }))
}
