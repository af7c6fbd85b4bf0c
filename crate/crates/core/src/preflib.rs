//! PrefLib strict-order-complete (SOC) ingestion and dominance counting.
//!
//! Only the current PrefLib layout is accepted: `#`-prefixed metadata lines
//! (`# NUMBER ALTERNATIVES: 5`, `# ALTERNATIVE NAME 1: ...`) followed by
//! ballot lines of the form `multiplicity: c1,c2,...,cn`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub multiplicity: u64,
    /// Alternative indices, most preferred first.
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    /// Alternative identifiers as they appear in ballot lines.
    pub alternatives: Vec<String>,
    /// Display names from metadata, parallel to `alternatives`.
    pub names: Vec<String>,
    pub ballots: Vec<Ballot>,
}

impl PreferenceProfile {
    /// Builds and validates a profile from index rankings.
    pub fn new(alternatives: Vec<String>, ballots: Vec<Ballot>) -> Result<Self> {
        let names = alternatives.clone();
        let profile = PreferenceProfile {
            alternatives,
            names,
            ballots,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alternatives.len();
        if n == 0 {
            return Err(Error::Validation("profile has no alternatives".into()));
        }
        if self.ballots.is_empty() {
            return Err(Error::Validation("profile has no ballots".into()));
        }
        for (k, ballot) in self.ballots.iter().enumerate() {
            if ballot.multiplicity == 0 {
                return Err(Error::Validation(format!("ballot {k} has multiplicity 0")));
            }
            check_permutation(&ballot.ranking, &self.alternatives).map_err(|detail| {
                Error::NotStrictOrder {
                    line: k + 1,
                    detail,
                }
            })?;
        }
        Ok(())
    }

    pub fn num_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    /// Total number of voters, N.
    pub fn voter_count(&self) -> u64 {
        self.ballots.iter().map(|b| b.multiplicity).sum()
    }

    /// One ballot per voter, in file order.
    pub fn expanded(&self) -> Vec<&[usize]> {
        let mut out = Vec::with_capacity(self.voter_count() as usize);
        for b in &self.ballots {
            for _ in 0..b.multiplicity {
                out.push(b.ranking.as_slice());
            }
        }
        out
    }

    fn with_voters(&self, voters: &[&[usize]]) -> PreferenceProfile {
        let mut ballots: Vec<Ballot> = Vec::new();
        for ranking in voters {
            match ballots.last_mut() {
                Some(last) if last.ranking.as_slice() == *ranking => last.multiplicity += 1,
                _ => ballots.push(Ballot {
                    multiplicity: 1,
                    ranking: ranking.to_vec(),
                }),
            }
        }
        PreferenceProfile {
            alternatives: self.alternatives.clone(),
            names: self.names.clone(),
            ballots,
        }
    }

    /// Voters `start..end` in file order (multiplicities expanded).
    pub fn voter_range(&self, start: usize, end: usize) -> Result<PreferenceProfile> {
        let voters = self.expanded();
        if start >= end || end > voters.len() {
            return Err(Error::SubsetOutOfRange(format!(
                "voters {start}..{end} of {}",
                voters.len()
            )));
        }
        Ok(self.with_voters(&voters[start..end]))
    }

    /// The voters at the given positions (file order of `indices` is kept).
    pub fn select_voters(&self, indices: &[usize]) -> Result<PreferenceProfile> {
        let voters = self.expanded();
        let mut picked = Vec::with_capacity(indices.len());
        for &i in indices {
            picked.push(*voters.get(i).ok_or_else(|| {
                Error::SubsetOutOfRange(format!("voter {i} of {}", voters.len()))
            })?);
        }
        if picked.is_empty() {
            return Err(Error::SubsetOutOfRange("empty voter selection".into()));
        }
        Ok(self.with_voters(&picked))
    }

    /// `size` distinct voters drawn uniformly with a seeded generator, kept in
    /// file order.
    pub fn sample_voters(&self, size: usize, seed: u64) -> Result<PreferenceProfile> {
        let total = self.voter_count() as usize;
        if size == 0 || size > total {
            return Err(Error::SubsetOutOfRange(format!(
                "sample of {size} from {total} voters"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, total, size).into_vec();
        idx.sort_unstable();
        self.select_voters(&idx)
    }

    /// Splits a seeded permutation of the voters into consecutive chunks of
    /// `size` and returns chunk `part`.
    pub fn disjoint_sample(
        &self,
        size: usize,
        part: usize,
        seed: u64,
    ) -> Result<PreferenceProfile> {
        let total = self.voter_count() as usize;
        if size == 0 || (part + 1) * size > total {
            return Err(Error::SubsetOutOfRange(format!(
                "disjoint sample {part} of size {size} from {total} voters"
            )));
        }
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut idx = order[part * size..(part + 1) * size].to_vec();
        idx.sort_unstable();
        self.select_voters(&idx)
    }

    /// Mean position of each alternative (0 = top), weighted by multiplicity.
    pub fn mean_positions(&self) -> Vec<f64> {
        let n = self.num_alternatives();
        let mut sums = vec![0.0; n];
        for b in &self.ballots {
            for (pos, &alt) in b.ranking.iter().enumerate() {
                sums[alt] += pos as f64 * b.multiplicity as f64;
            }
        }
        let total = self.voter_count() as f64;
        sums.into_iter().map(|s| s / total).collect()
    }

    /// Keeps the `k` alternatives with the best (lowest) mean position,
    /// restricting every ranking to them. Ties break on the original index.
    /// When `k` covers every alternative the profile is returned unchanged.
    pub fn top_alternatives(&self, k: usize) -> Result<PreferenceProfile> {
        let n = self.num_alternatives();
        if k == 0 {
            return Err(Error::param("top_alternatives needs k >= 1"));
        }
        if k >= n {
            return Ok(self.clone());
        }
        let means = self.mean_positions();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
        let mut keep: Vec<usize> = order[..k].to_vec();
        keep.sort_unstable();
        let remap: HashMap<usize, usize> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let ballots = self
            .ballots
            .iter()
            .map(|b| Ballot {
                multiplicity: b.multiplicity,
                ranking: b
                    .ranking
                    .iter()
                    .filter_map(|a| remap.get(a).copied())
                    .collect(),
            })
            .collect();
        Ok(PreferenceProfile {
            alternatives: keep.iter().map(|&i| self.alternatives[i].clone()).collect(),
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            ballots,
        })
    }
}

fn check_permutation(ranking: &[usize], labels: &[String]) -> std::result::Result<(), String> {
    let n = labels.len();
    let mut seen = vec![false; n];
    for &a in ranking {
        if a >= n {
            return Err(format!("alternative index {a} out of range"));
        }
        if seen[a] {
            return Err(format!("alternative '{}' repeated", labels[a]));
        }
        seen[a] = true;
    }
    if ranking.len() != n {
        return Err(format!("ranks {} of {n} alternatives", ranking.len()));
    }
    Ok(())
}

fn metadata_value<'a>(body: &'a str, key: &str) -> Option<&'a str> {
    let rest = body.strip_prefix(key)?;
    let rest = rest.trim_start();
    Some(rest.strip_prefix(':').unwrap_or(rest).trim())
}

/// Parses a PrefLib SOC file.
pub fn parse_preflib(input: &str) -> Result<PreferenceProfile> {
    let mut declared_alternatives: Option<(usize, usize)> = None;
    let mut declared_voters: Option<(u64, usize)> = None;
    let mut named: Vec<(String, String)> = Vec::new();
    let mut raw_ballots: Vec<(usize, u64, Vec<String>)> = Vec::new();

    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            let body = body.trim();
            if let Some(v) = metadata_value(body, "DATA TYPE") {
                if !v.is_empty() && !v.eq_ignore_ascii_case("soc") {
                    return Err(Error::NotStrictOrder {
                        line: line_no,
                        detail: format!("data type '{v}' is not soc"),
                    });
                }
            } else if let Some(v) = metadata_value(body, "NUMBER ALTERNATIVES") {
                let n = v.parse().map_err(|_| {
                    Error::parse(line_no, format!("invalid alternative count '{v}'"))
                })?;
                declared_alternatives = Some((n, line_no));
            } else if let Some(v) = metadata_value(body, "NUMBER VOTERS") {
                let n = v
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid voter count '{v}'")))?;
                declared_voters = Some((n, line_no));
            } else if let Some(rest) = body.strip_prefix("ALTERNATIVE NAME") {
                let (id, name) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line_no, "malformed ALTERNATIVE NAME line"))?;
                named.push((id.trim().to_string(), name.trim().to_string()));
            }
            continue;
        }

        let (mult, ranking) = line.split_once(':').ok_or_else(|| {
            Error::parse(
                line_no,
                format!("expected 'multiplicity: ranking', got '{line}'"),
            )
        })?;
        let mult: u64 = mult.trim().parse().map_err(|_| {
            Error::parse(line_no, format!("invalid multiplicity '{}'", mult.trim()))
        })?;
        if mult == 0 {
            return Err(Error::parse(line_no, "multiplicity must be positive"));
        }
        if ranking.contains('{') || ranking.contains('}') {
            return Err(Error::NotStrictOrder {
                line: line_no,
                detail: "tied alternatives".into(),
            });
        }
        let ids: Vec<String> = ranking.split(',').map(|s| s.trim().to_string()).collect();
        if ids.iter().any(|s| s.is_empty()) {
            return Err(Error::parse(line_no, "empty alternative in ranking"));
        }
        raw_ballots.push((line_no, mult, ids));
    }

    if raw_ballots.is_empty() {
        return Err(Error::Validation("profile has no ballots".into()));
    }

    let (alternatives, names): (Vec<String>, Vec<String>) = if named.is_empty() {
        // No names: the first ballot fixes the alternative set, ordered by id.
        let mut ids = raw_ballots[0].2.clone();
        ids.sort_by(|a, b| match (a.parse::<i64>(), b.parse::<i64>()) {
            (Ok(x), Ok(y)) => x.cmp(&y),
            _ => a.cmp(b),
        });
        ids.dedup();
        (ids.clone(), ids)
    } else {
        named.into_iter().unzip()
    };

    if let Some((n, line)) = declared_alternatives {
        if n != alternatives.len() {
            return Err(Error::parse(
                line,
                format!("declares {n} alternatives but names {}", alternatives.len()),
            ));
        }
    }

    let index: HashMap<&str, usize> = alternatives
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut ballots = Vec::with_capacity(raw_ballots.len());
    for (line_no, mult, ids) in &raw_ballots {
        let mut ranking = Vec::with_capacity(ids.len());
        for id in ids {
            let idx = *index
                .get(id.as_str())
                .ok_or_else(|| Error::parse(*line_no, format!("unknown alternative '{id}'")))?;
            ranking.push(idx);
        }
        check_permutation(&ranking, &alternatives).map_err(|detail| Error::NotStrictOrder {
            line: *line_no,
            detail,
        })?;
        ballots.push(Ballot {
            multiplicity: *mult,
            ranking,
        });
    }

    let profile = PreferenceProfile {
        alternatives,
        names,
        ballots,
    };
    if let Some((declared, line)) = declared_voters {
        let sum = profile.voter_count();
        if declared != sum {
            return Err(Error::Validation(format!(
                "line {line}: declares {declared} voters but ballots sum to {sum}"
            )));
        }
    }
    Ok(profile)
}

/// Serializes a profile in the PrefLib SOC layout accepted by [`parse_preflib`].
pub fn write_preflib(profile: &PreferenceProfile, title: &str) -> String {
    let mut out = String::new();
    let mut unique: Vec<&[usize]> = profile
        .ballots
        .iter()
        .map(|b| b.ranking.as_slice())
        .collect();
    unique.sort_unstable();
    unique.dedup();
    let _ = writeln!(out, "# TITLE: {title}");
    let _ = writeln!(out, "# DATA TYPE: soc");
    let _ = writeln!(out, "# NUMBER ALTERNATIVES: {}", profile.num_alternatives());
    let _ = writeln!(out, "# NUMBER VOTERS: {}", profile.voter_count());
    let _ = writeln!(out, "# NUMBER UNIQUE ORDERS: {}", unique.len());
    for (id, name) in profile.alternatives.iter().zip(&profile.names) {
        let _ = writeln!(out, "# ALTERNATIVE NAME {id}: {name}");
    }
    for b in &profile.ballots {
        let ids: Vec<&str> = b
            .ranking
            .iter()
            .map(|&a| profile.alternatives[a].as_str())
            .collect();
        let _ = writeln!(out, "{}: {}", b.multiplicity, ids.join(","));
    }
    out
}

/// Pairwise win counts `D` and margins `w = D - Dᵀ`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceMatrix {
    pub alternatives: Vec<String>,
    n: usize,
    voters: u64,
    counts: Vec<u64>,
}

impl DominanceMatrix {
    /// Builds from explicit counts, checking `D_ii = 0` and `D_ij + D_ji = N`.
    pub fn from_counts(
        alternatives: Vec<String>,
        counts: Vec<Vec<u64>>,
        voters: u64,
    ) -> Result<Self> {
        let n = alternatives.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "dominance counts must be {n}x{n}"
            )));
        }
        let flat: Vec<u64> = counts.into_iter().flatten().collect();
        let m = DominanceMatrix {
            alternatives,
            n,
            voters,
            counts: flat,
        };
        for i in 0..n {
            if m.count(i, i) != 0 {
                return Err(Error::Validation(format!("D[{i}][{i}] must be 0")));
            }
            for j in (i + 1)..n {
                if m.count(i, j) + m.count(j, i) != voters {
                    return Err(Error::Validation(format!(
                        "D[{i}][{j}] + D[{j}][{i}] = {} != N = {voters}",
                        m.count(i, j) + m.count(j, i)
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn voter_count(&self) -> u64 {
        self.voters
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    pub fn margin(&self, i: usize, j: usize) -> i64 {
        self.count(i, j) as i64 - self.count(j, i) as i64
    }

    pub fn counts(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn margins(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.margin(i, j)).collect())
            .collect()
    }

    /// Replaces `D_ij` (and `D_ji = N - D_ij`) for `i < j`.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, dij: u64) {
        debug_assert!(dij <= self.voters);
        let n = self.n;
        self.counts[i * n + j] = dij;
        self.counts[j * n + i] = self.voters - dij;
    }

    /// Header row of alternative ids, then one row of counts per alternative.
    pub fn to_csv(&self) -> String {
        let mut out = self.alternatives.join(",");
        out.push('\n');
        for row in self.counts.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `D_ij = #{voters ranking i above j}`, weighted by multiplicity.
pub fn dominance(profile: &PreferenceProfile) -> DominanceMatrix {
    let n = profile.num_alternatives();
    let mut counts = vec![0u64; n * n];
    let mut position = vec![0usize; n];
    for ballot in &profile.ballots {
        for (pos, &alt) in ballot.ranking.iter().enumerate() {
            position[alt] = pos;
        }
        for i in 0..n {
            for j in 0..n {
                if position[i] < position[j] {
                    counts[i * n + j] += ballot.multiplicity;
                }
            }
        }
    }
    DominanceMatrix {
        alternatives: profile.alternatives.clone(),
        n,
        voters: profile.voter_count(),
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# FILE NAME: small.soc
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 3
# NUMBER VOTERS: 3
# ALTERNATIVE NAME 1: a
# ALTERNATIVE NAME 2: b
# ALTERNATIVE NAME 3: c
2: 1,2,3
1: 3,1,2
";

    #[test]
    fn parses_small_profile() {
        let p = parse_preflib(SMALL).unwrap();
        assert_eq!(p.num_alternatives(), 3);
        assert_eq!(p.voter_count(), 3);
        assert_eq!(p.ballots.len(), 2);
        assert_eq!(p.ballots[1].ranking, vec![2, 0, 1]);
        assert_eq!(p.names, vec!["a", "b", "c"]);
    }

    #[test]
    fn dominance_counts_by_hand() {
        let d = dominance(&parse_preflib(SMALL).unwrap());
        // a≻b≻c ×2, c≻a≻b ×1
        assert_eq!(d.count(0, 1), 3);
        assert_eq!(d.count(1, 0), 0);
        assert_eq!(d.count(0, 2), 2);
        assert_eq!(d.count(2, 0), 1);
        assert_eq!(d.count(1, 2), 2);
        assert_eq!(d.count(2, 1), 1);
        assert_eq!(d.margin(0, 1), 3);
        assert_eq!(d.margin(2, 0), -1);
    }

    #[test]
    fn single_ballot_dominance() {
        let p = parse_preflib("1: 1,2\n").unwrap();
        let d = dominance(&p);
        assert_eq!((d.count(0, 1), d.count(1, 0)), (1, 0));
    }

    #[test]
    fn repeated_alternative_rejected() {
        let err = parse_preflib("1: 1,2,3\n1: 1,1,2\n").unwrap_err();
        assert!(
            matches!(err, Error::NotStrictOrder { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn incomplete_ranking_rejected() {
        let text = SMALL.replace("1: 3,1,2", "1: 3,1");
        assert!(matches!(
            parse_preflib(&text),
            Err(Error::NotStrictOrder { line: 9, .. })
        ));
    }

    #[test]
    fn unknown_alternative_rejected() {
        let text = SMALL.replace("1: 3,1,2", "1: 3,1,7");
        let err = parse_preflib(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 9, ref message } if message.contains("'7'")));
    }

    #[test]
    fn voter_count_mismatch_rejected() {
        let text = SMALL.replace("NUMBER VOTERS: 3", "NUMBER VOTERS: 4");
        assert!(matches!(parse_preflib(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn ties_and_other_types_rejected() {
        assert!(matches!(
            parse_preflib("1: 1,{2,3}\n"),
            Err(Error::NotStrictOrder { line: 1, .. })
        ));
        assert!(matches!(
            parse_preflib("# DATA TYPE: soi\n1: 1,2\n"),
            Err(Error::NotStrictOrder { .. })
        ));
    }

    #[test]
    fn empty_profile_rejected() {
        assert!(parse_preflib("# NUMBER ALTERNATIVES: 2\n").is_err());
        assert!(matches!(
            parse_preflib("2 1,2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_preflib("0: 1,2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let p = parse_preflib(SMALL).unwrap();
        assert_eq!(parse_preflib(&write_preflib(&p, "t")).unwrap(), p);
    }

    #[test]
    fn subsets_follow_file_order() {
        let p = parse_preflib(SMALL).unwrap();
        let first = p.voter_range(0, 2).unwrap();
        assert_eq!(first.voter_count(), 2);
        assert_eq!(
            first.ballots,
            vec![Ballot {
                multiplicity: 2,
                ranking: vec![0, 1, 2]
            }]
        );
        let last = p.voter_range(2, 3).unwrap();
        assert_eq!(last.ballots[0].ranking, vec![2, 0, 1]);
        assert!(p.voter_range(2, 4).is_err());
        assert!(p.voter_range(1, 1).is_err());
    }

    #[test]
    fn disjoint_samples_partition_voters() {
        let text: String = (0..40)
            .map(|i| if i % 2 == 0 { "1: 1,2\n" } else { "1: 2,1\n" })
            .collect();
        let p = parse_preflib(&text).unwrap();
        let a = p.disjoint_sample(20, 0, 9).unwrap();
        let b = p.disjoint_sample(20, 1, 9).unwrap();
        assert_eq!(a.voter_count() + b.voter_count(), 40);
        let da = dominance(&a);
        let db = dominance(&b);
        assert_eq!(da.count(0, 1) + db.count(0, 1), 20);
        assert!(p.disjoint_sample(20, 2, 9).is_err());
        assert_eq!(
            p.sample_voters(10, 3).unwrap(),
            p.sample_voters(10, 3).unwrap()
        );
    }

    #[test]
    fn top_alternatives_by_mean_position() {
        // c is always last, so top-2 keeps a and b.
        let p = parse_preflib("2: 1,2,3\n1: 2,1,3\n").unwrap();
        let top = p.top_alternatives(2).unwrap();
        assert_eq!(top.alternatives, vec!["1", "2"]);
        assert_eq!(top.ballots[0].ranking, vec![0, 1]);
        assert_eq!(top.ballots[1].ranking, vec![1, 0]);
        assert_eq!(p.top_alternatives(3).unwrap(), p);
    }

    #[test]
    fn from_counts_enforces_complement() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(DominanceMatrix::from_counts(ids.clone(), vec![vec![0, 3], vec![1, 0]], 4).is_ok());
        assert!(DominanceMatrix::from_counts(ids, vec![vec![0, 3], vec![2, 0]], 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let d = dominance(&parse_preflib(SMALL).unwrap());
        assert_eq!(d.to_csv(), "1,2,3\n0,3,2\n0,0,2\n1,1,0\n");
    }
}
