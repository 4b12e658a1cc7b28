//! Presentations of the second and third terms of the jet complex of order
//! `p^m`, and an elimination probe for the third.
//!
//! `Ω¹` is spanned by `(dt)^U` with `0 < |U| ≤ p^m`. For each `I` with
//! `p^m < |I| ≤ 2p^m` the relation `Σ_{0<S<I} qbinom(I,S) (dt)^S ⊗ (dt)^{I-S} = 0`
//! holds in `Ω²`, with terms having a factor of weight above `p^m` dropped.
//! A splitting `I = A(I) + B(I)` with `qbinom(I, A(I))` a unit picks the
//! generator each relation removes.
//!
//! Local freeness of `Ω³` is open; the probe reports what elimination with
//! unit pivots achieves and never issues a verdict.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, CoeffTable};
use crate::homology::snf_exponents;
use crate::matrix::Matrix;
use crate::params::{MultiIndex, PParams};
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("no unit splitting exists for I = {0}")]
    NoUnitSplitting(String),
    #[error("invalid splitting for I = {index}: {reason}")]
    InvalidSplitting { index: String, reason: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `1 ≤ |U| ≤ p^m`.
fn is_dt_index(u: &MultiIndex, pm: u32) -> bool {
    (1..=pm as u64).contains(&u.weight())
}

pub fn dt_indices(n: usize, pm: u32) -> Vec<MultiIndex> {
    (1..=pm as u64).flat_map(|w| MultiIndex::of_weight(n, w)).collect()
}

/// `I` with `p^m < |I| ≤ 2p^m`.
pub fn qualifying_indices(n: usize, pm: u32) -> Vec<MultiIndex> {
    (pm as u64 + 1..=2 * pm as u64)
        .flat_map(|w| MultiIndex::of_weight(n, w))
        .collect()
}

/// Strictly between `0` and `i` componentwise.
fn proper_parts(i: &MultiIndex) -> impl Iterator<Item = MultiIndex> + '_ {
    i.below().into_iter().filter(move |s| !s.is_zero() && s != i)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub index: MultiIndex,
    pub a: MultiIndex,
    pub b: MultiIndex,
}

/// `I ↦ (A(I), B(I))` for every qualifying `I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingChoice {
    pub pm: u32,
    pub n: usize,
    pub entries: BTreeMap<MultiIndex, (MultiIndex, MultiIndex)>,
}

impl SplittingChoice {
    pub fn get(&self, i: &MultiIndex) -> Option<&(MultiIndex, MultiIndex)> {
        self.entries.get(i)
    }

    /// `(x, y) = (A(x+y), B(x+y))`.
    pub fn is_excluded_pair(&self, x: &MultiIndex, y: &MultiIndex) -> bool {
        self.entries
            .get(&x.add(y))
            .is_some_and(|(a, b)| a == x && b == y)
    }

    /// All `I` with `B(I) = w`.
    pub fn with_b(&self, w: &MultiIndex) -> Vec<&MultiIndex> {
        self.entries
            .iter()
            .filter(|(_, (_, b))| b == w)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_b_index(&self, w: &MultiIndex) -> bool {
        self.entries.values().any(|(_, b)| b == w)
    }

    pub fn list(&self) -> Vec<SplitEntry> {
        self.entries
            .iter()
            .map(|(i, (a, b))| SplitEntry {
                index: i.clone(),
                a: a.clone(),
                b: b.clone(),
            })
            .collect()
    }

    /// Replaces the default choice for some indices, validating each override.
    pub fn with_overrides(
        &self,
        params: &PParams,
        overrides: &[(MultiIndex, MultiIndex)],
    ) -> Result<SplittingChoice, JetError> {
        let coeffs = CoeffTable::new(params, 2 * params.pm())?;
        let ring1 = Zpn::new(params.p, 1).expect("prime");
        let mut out = self.clone();
        for (i, a) in overrides {
            let bad = |reason: &str| JetError::InvalidSplitting {
                index: i.to_string(),
                reason: reason.into(),
            };
            if !out.entries.contains_key(i) {
                return Err(bad("index does not satisfy p^m < |I| <= 2p^m"));
            }
            let b = i.checked_sub(a).ok_or_else(|| bad("A is not below I"))?;
            if a.is_zero() || b.is_zero() {
                return Err(bad("A and B must both be nonzero"));
            }
            if !is_dt_index(a, self.pm) || !is_dt_index(&b, self.pm) {
                return Err(bad("|A| and |B| must be at most p^m"));
            }
            if !ring1.is_unit(ring1.reduce(coeffs.qbinom(i, a))) {
                return Err(bad("qbinom(I, A) is not a unit"));
            }
            out.entries.insert(i.clone(), (a.clone(), b));
        }
        Ok(out)
    }
}

/// The lexicographically smallest `A` with `0 < A < I`, `|A|, |I-A| ≤ p^m` and
/// `qbinom(I, A)` a unit, for every qualifying `I`.
pub fn find_splittings(params: &PParams) -> Result<SplittingChoice, JetError> {
    let pm = params.pm();
    let coeffs = CoeffTable::new(params, 2 * pm)?;
    let ring1 = Zpn::new(params.p, 1).expect("prime");
    let mut entries = BTreeMap::new();
    for i in qualifying_indices(params.n, pm) {
        let mut candidates: Vec<MultiIndex> = proper_parts(&i).collect();
        candidates.sort();
        let a = candidates
            .into_iter()
            .find(|a| {
                let b = i.checked_sub(a).unwrap();
                is_dt_index(a, pm)
                    && is_dt_index(&b, pm)
                    && ring1.is_unit(ring1.reduce(coeffs.qbinom(&i, a)))
            })
            .ok_or_else(|| JetError::NoUnitSplitting(i.to_string()))?;
        let b = i.checked_sub(&a).unwrap();
        entries.insert(i, (a, b));
    }
    Ok(SplittingChoice {
        pm,
        n: params.n,
        entries,
    })
}

fn pair_label(u: &MultiIndex, v: &MultiIndex) -> String {
    format!("{u}|{v}")
}

fn triple_label(t: &(MultiIndex, MultiIndex, MultiIndex)) -> String {
    format!("{}|{}|{}", t.0, t.1, t.2)
}

/// Result of the `Ω²` presentation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omega2Report {
    pub params: String,
    pub generator_count: usize,
    pub relation_count: usize,
    pub basis: Vec<String>,
    pub excluded: Vec<String>,
    /// Every excluded generator carries a unit and occurs in no other relation.
    pub unit_pivots: bool,
    /// Substituting each reconstructed excluded generator makes its relation vanish.
    pub certificate_exact: bool,
    /// All invariant factors of the relation matrix are units.
    pub snf_rank_matches: bool,
    pub rank: usize,
}

impl Omega2Report {
    pub fn passed(&self) -> bool {
        self.unit_pivots && self.certificate_exact && self.snf_rank_matches
    }
}

pub fn omega2_basis(params: &PParams, choice: &SplittingChoice) -> Result<Omega2Report, JetError> {
    let pm = params.pm();
    let ring = params.ring();
    let coeffs = CoeffTable::new(params, 2 * pm)?;
    let d = dt_indices(params.n, pm);
    let gens: Vec<(MultiIndex, MultiIndex)> = d
        .iter()
        .flat_map(|u| d.iter().map(move |v| (u.clone(), v.clone())))
        .collect();
    let col: BTreeMap<&(MultiIndex, MultiIndex), usize> = gens.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let quals: Vec<MultiIndex> = choice.entries.keys().cloned().collect();

    let mut rel = Matrix::zeros(quals.len(), gens.len());
    for (r, i) in quals.iter().enumerate() {
        for s in proper_parts(i) {
            let t = i.checked_sub(&s).unwrap();
            if is_dt_index(&s, pm) && is_dt_index(&t, pm) {
                let c = coeffs.qbinom(i, &s);
                rel.add_at(r, col[&(s, t)], c, &ring);
            }
        }
    }

    let mut unit_pivots = true;
    let mut excluded = Vec::new();
    let mut excluded_cols = BTreeMap::new();
    for (r, i) in quals.iter().enumerate() {
        let (a, b) = &choice.entries[i];
        let c = col[&(a.clone(), b.clone())];
        let others_zero = (0..quals.len()).all(|r2| r2 == r || rel.get(r2, c) == 0);
        unit_pivots &= ring.is_unit(rel.get(r, c)) && others_zero;
        excluded.push(pair_label(a, b));
        excluded_cols.insert(c, r);
    }

    // Projection onto basis coordinates: basis generators map to themselves,
    // an excluded one to -pivot^{-1} times the rest of its relation. Every
    // relation must then project to zero.
    let basis_cols: Vec<usize> = (0..gens.len()).filter(|j| !excluded_cols.contains_key(j)).collect();
    let mut certificate_exact = unit_pivots;
    if unit_pivots {
        let bpos: BTreeMap<usize, usize> = basis_cols.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let mut proj = Matrix::zeros(basis_cols.len(), gens.len());
        for (&j, &k) in &bpos {
            proj.set(k, j, ring.reduce(1));
        }
        for (&c, &r) in &excluded_cols {
            let inv = ring.neg(ring.inverse(rel.get(r, c)).unwrap());
            for (&j, &k) in &bpos {
                proj.set(k, c, ring.add(proj.get(k, c), ring.mul(inv, rel.get(r, j))));
            }
        }
        certificate_exact = proj.mul(&rel.transpose(), &ring).is_zero();
    }

    let exps = snf_exponents(&rel, &ring);
    let snf_rank_matches = exps.len() == quals.len() && exps.iter().all(|&e| e == 0);
    let excluded_set: BTreeSet<&String> = excluded.iter().collect();
    let basis: Vec<String> = gens
        .iter()
        .map(|(u, v)| pair_label(u, v))
        .filter(|l| !excluded_set.contains(l))
        .collect();
    Ok(Omega2Report {
        params: params.to_string(),
        generator_count: gens.len(),
        relation_count: quals.len(),
        rank: basis.len(),
        basis,
        excluded,
        unit_pivots,
        certificate_exact,
        snf_rank_matches,
    })
}

type Triple = (MultiIndex, MultiIndex, MultiIndex);

/// Outcome of elimination with unit pivots over one coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationResult {
    pub modulus_exp: u32,
    pub eliminated_count: usize,
    pub dependent_relations: usize,
    /// Relations left nonzero with no unit coefficient.
    pub stuck_relations: Vec<String>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub schema: u32,
    pub params: String,
    pub choice: Vec<SplitEntry>,
    pub generator_count: usize,
    pub relation_count: usize,
    pub eliminated_count: usize,
    pub residual_count: usize,
    pub residual_generators: Vec<String>,
    pub elimination_complete: bool,
    pub mod_p: EliminationResult,
    pub mod_pn: EliminationResult,
    /// Relations whose coefficients are all non-units as written.
    pub all_nonunit_relations: Vec<String>,
    /// Second-sum terms whose last factor `I - T` is again some `B(I')`.
    pub b_reentries: Vec<String>,
    /// Cycles among relation targets through such terms.
    pub b_cycles: Vec<Vec<String>>,
    /// Terms produced by the relations that are not in the generating set.
    pub non_generator_terms: Vec<String>,
    /// `A(I) ≰ U+V`; the term is taken as zero.
    pub incomparable_splittings: Vec<String>,
    /// Terms with a factor of weight above `p^m`, which vanish in `Ω¹`.
    pub dropped_terms: usize,
}

pub const FREENESS_SCHEMA: u32 = 1;

fn is_omega3_generator(t: &Triple, choice: &SplittingChoice) -> bool {
    let pm = choice.pm;
    let (u, v, w) = t;
    is_dt_index(u, pm)
        && is_dt_index(v, pm)
        && is_dt_index(w, pm)
        && !choice.is_excluded_pair(v, w)
        && (choice.is_b_index(w) || !choice.is_excluded_pair(u, v))
}

struct Relations {
    targets: Vec<Triple>,
    rows: Vec<BTreeMap<Triple, u128>>,
    b_reentries: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
    incomparable: Vec<String>,
    dropped: usize,
}

fn build_relations(params: &PParams, choice: &SplittingChoice, coeffs: &CoeffTable) -> Relations {
    let pm = params.pm();
    let ring = coeffs.ring();
    let d = dt_indices(params.n, pm);
    let mut targets = Vec::new();
    for (a, b) in choice.entries.values() {
        for w in &d {
            if choice.is_b_index(w) {
                targets.push((a.clone(), b.clone(), w.clone()));
            }
        }
    }
    targets.sort();
    let target_pos: BTreeMap<&Triple, usize> = targets.iter().enumerate().map(|(k, t)| (t, k)).collect();

    let mut rows = Vec::with_capacity(targets.len());
    let mut b_reentries = Vec::new();
    let mut edges = BTreeSet::new();
    let mut incomparable = Vec::new();
    let mut dropped = 0;
    for (k, (u, v, w)) in targets.iter().enumerate() {
        let kk = u.add(v);
        let is_for_w = choice.with_b(w);
        let excluded_s: BTreeSet<&MultiIndex> = is_for_w.iter().map(|i| &choice.entries[*i].0).collect();
        let mut row: BTreeMap<Triple, u128> = BTreeMap::new();
        let push = |row: &mut BTreeMap<Triple, u128>, t: Triple, c: u128| {
            let e = row.entry(t.clone()).or_insert(0);
            *e = ring.add(*e, c);
            if *e == 0 {
                row.remove(&t);
            }
        };
        for s in proper_parts(&kk) {
            if excluded_s.contains(&s) {
                continue;
            }
            let first = kk.checked_sub(&s).unwrap();
            if !is_dt_index(&first, pm) || !is_dt_index(&s, pm) {
                dropped += 1;
                continue;
            }
            push(&mut row, (first, s.clone(), w.clone()), coeffs.qbinom(&kk, &s));
        }
        for i in is_for_w {
            let a = &choice.entries[i].0;
            if !a.le(&kk) {
                incomparable.push(format!("A({i})={a} vs U+V={kk} in relation {}", triple_label(&targets[k])));
                continue;
            }
            let inv = ring
                .inverse(coeffs.qbinom(i, a))
                .expect("splitting coefficient is a unit");
            let c1 = ring.mul(coeffs.qbinom(&kk, a), inv);
            let first = kk.checked_sub(a).unwrap();
            for t in proper_parts(i) {
                if &t == a {
                    continue;
                }
                let rest = i.checked_sub(&t).unwrap();
                if !is_dt_index(&first, pm) || !is_dt_index(&t, pm) || !is_dt_index(&rest, pm) {
                    dropped += 1;
                    continue;
                }
                let term = (first.clone(), t.clone(), rest.clone());
                if choice.is_b_index(&rest) {
                    b_reentries.push(format!("{} in relation {}", triple_label(&term), triple_label(&targets[k])));
                    if let Some(&k2) = target_pos.get(&term) {
                        edges.insert((k, k2));
                    }
                }
                push(&mut row, term, ring.neg(ring.mul(c1, coeffs.qbinom(i, &t))));
            }
        }
        rows.push(row);
    }
    Relations {
        targets,
        rows,
        b_reentries,
        edges,
        incomparable,
        dropped,
    }
}

/// Gauss-Jordan with unit pivots only, preferring each relation's own target.
fn eliminate(
    rows: &[BTreeMap<usize, u128>],
    targets: &[Option<usize>],
    labels: &[String],
    ring: &Zpn,
) -> (EliminationResult, BTreeSet<usize>) {
    let mut rows: Vec<BTreeMap<usize, u128>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|(&c, &v)| (c, ring.reduce(v)))
                .filter(|&(_, v)| v != 0)
                .collect()
        })
        .collect();
    let mut pivoted = vec![false; rows.len()];
    let mut pivot_cols = BTreeSet::new();
    loop {
        let mut progress = false;
        for r in 0..rows.len() {
            if pivoted[r] || rows[r].is_empty() {
                continue;
            }
            let pick = targets[r]
                .filter(|c| rows[r].get(c).is_some_and(|&v| ring.is_unit(v)))
                .or_else(|| rows[r].iter().find(|(_, &v)| ring.is_unit(v)).map(|(&c, _)| c));
            let Some(c) = pick else {
                continue;
            };
            let inv = ring.inverse(rows[r][&c]).unwrap();
            for v in rows[r].values_mut() {
                *v = ring.mul(*v, inv);
            }
            let prow = rows[r].clone();
            for (r2, row) in rows.iter_mut().enumerate() {
                if r2 == r {
                    continue;
                }
                let Some(&f) = row.get(&c) else {
                    continue;
                };
                for (&cc, &pv) in &prow {
                    let e = row.entry(cc).or_insert(0);
                    *e = ring.sub(*e, ring.mul(f, pv));
                    if *e == 0 {
                        row.remove(&cc);
                    }
                }
            }
            pivoted[r] = true;
            pivot_cols.insert(c);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let stuck: Vec<String> = (0..rows.len())
        .filter(|&r| !pivoted[r] && !rows[r].is_empty())
        .map(|r| labels[r].clone())
        .collect();
    let dependent = (0..rows.len()).filter(|&r| !pivoted[r] && rows[r].is_empty()).count();
    (
        EliminationResult {
            modulus_exp: ring.exponent(),
            eliminated_count: pivot_cols.len(),
            dependent_relations: dependent,
            complete: stuck.is_empty(),
            stuck_relations: stuck,
        },
        pivot_cols,
    )
}

/// Builds the generators and relations of `Ω³` and eliminates over `Z/p` and `Z/p^N`.
pub fn omega3_probe(params: &PParams, choice: &SplittingChoice) -> Result<FreenessReport, JetError> {
    let pm = params.pm();
    let ring = params.ring();
    let coeffs = CoeffTable::new(params, 2 * pm)?;
    let d = dt_indices(params.n, pm);
    let mut gens: Vec<Triple> = Vec::new();
    for u in &d {
        for v in &d {
            for w in &d {
                let t = (u.clone(), v.clone(), w.clone());
                if is_omega3_generator(&t, choice) {
                    gens.push(t);
                }
            }
        }
    }
    gens.sort();
    let rel = build_relations(params, choice, &coeffs);

    let mut columns: BTreeMap<Triple, usize> = gens.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    let mut non_generator_terms = BTreeSet::new();
    let mut rows = Vec::with_capacity(rel.rows.len());
    for row in &rel.rows {
        let mut r = BTreeMap::new();
        for (t, &c) in row {
            let next = columns.len();
            let col = *columns.entry(t.clone()).or_insert_with(|| {
                non_generator_terms.insert(triple_label(t));
                next
            });
            r.insert(col, c);
        }
        rows.push(r);
    }
    let targets: Vec<Option<usize>> = rel.targets.iter().map(|t| columns.get(t).copied()).collect();
    let labels: Vec<String> = rel.targets.iter().map(triple_label).collect();

    let ring1 = Zpn::new(params.p, 1).expect("prime");
    let all_nonunit_relations = rows
        .iter()
        .zip(&labels)
        .filter(|(r, _)| !r.values().any(|&v| ring1.is_unit(ring1.reduce(v))))
        .map(|(_, l)| l.clone())
        .collect();
    let (mod_p, _) = eliminate(&rows, &targets, &labels, &ring1);
    let (mod_pn, pivots) = eliminate(&rows, &targets, &labels, &ring);

    let residual_generators: Vec<String> = gens
        .iter()
        .enumerate()
        .filter(|(i, _)| !pivots.contains(i))
        .map(|(_, g)| triple_label(g))
        .collect();

    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..rel.targets.len()).map(|k| graph.add_node(k)).collect();
    for &(a, b) in &rel.edges {
        graph.add_edge(nodes[a], nodes[b], ());
    }
    let mut b_cycles: Vec<Vec<String>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || rel.edges.contains(&(graph[scc[0]], graph[scc[0]])))
        .map(|scc| {
            let mut v: Vec<String> = scc.iter().map(|&nx| labels[graph[nx]].clone()).collect();
            v.sort();
            v
        })
        .collect();
    b_cycles.sort();

    Ok(FreenessReport {
        schema: FREENESS_SCHEMA,
        params: params.to_string(),
        choice: choice.list(),
        generator_count: gens.len(),
        relation_count: rows.len(),
        eliminated_count: mod_pn.eliminated_count,
        residual_count: residual_generators.len(),
        residual_generators,
        elimination_complete: mod_pn.complete,
        mod_p,
        mod_pn,
        all_nonunit_relations,
        b_reentries: rel.b_reentries,
        b_cycles,
        non_generator_terms: non_generator_terms.into_iter().collect(),
        incomparable_splittings: rel.incomparable,
        dropped_terms: rel.dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn splitting_examples() {
        let c = find_splittings(&PParams::new(2, 0, 1, 2).unwrap()).unwrap();
        assert_eq!(c.get(&mi(&[2])).unwrap().0, mi(&[1]));
        let c = find_splittings(&PParams::new(2, 1, 1, 2).unwrap()).unwrap();
        assert_eq!(c.get(&mi(&[3])).unwrap().0, mi(&[1]));
        assert_eq!(c.get(&mi(&[4])).unwrap().0, mi(&[2]));
        assert_eq!(c.entries.len(), 2);
    }

    #[test]
    fn splittings_exist_on_grid() {
        for p in [2, 3, 5] {
            for m in 0..=2 {
                for n in 1..=3 {
                    let params = PParams::new(p, m, n, 1).unwrap();
                    let c = find_splittings(&params).unwrap();
                    assert_eq!(c.entries.len(), qualifying_indices(n, params.pm()).len());
                }
            }
        }
    }

    #[test]
    fn overrides_are_validated() {
        let params = PParams::new(2, 1, 1, 2).unwrap();
        let c = find_splittings(&params).unwrap();
        let ok = c.with_overrides(&params, &[(mi(&[3]), mi(&[2]))]).unwrap();
        assert_eq!(ok.get(&mi(&[3])).unwrap().1, mi(&[1]));
        // qbinom(4,1) = 4 is not a unit mod 2, and |B| = 3 exceeds p^m anyway.
        assert!(c.with_overrides(&params, &[(mi(&[4]), mi(&[1]))]).is_err());
        assert!(c.with_overrides(&params, &[(mi(&[2]), mi(&[1]))]).is_err());
    }

    #[test]
    fn omega2_classical_rank() {
        for n in 1..=3 {
            let params = PParams::new(3, 0, n, 2).unwrap();
            let c = find_splittings(&params).unwrap();
            let rep = omega2_basis(&params, &c).unwrap();
            assert!(rep.passed());
            assert_eq!(rep.rank, binom(n, 2));
        }
    }

    #[test]
    fn omega2_level_one() {
        let params = PParams::new(2, 1, 2, 3).unwrap();
        let c = find_splittings(&params).unwrap();
        let rep = omega2_basis(&params, &c).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.excluded.len(), rep.relation_count);
        assert_eq!(rep.rank, rep.generator_count - rep.relation_count);
    }

    #[test]
    fn omega3_classical_elimination() {
        for (p, n) in [(2, 1), (2, 2), (3, 3), (5, 4)] {
            let params = PParams::new(p, 0, n, 2).unwrap();
            let c = find_splittings(&params).unwrap();
            let rep = omega3_probe(&params, &c).unwrap();
            assert!(rep.elimination_complete, "{rep:?}");
            assert!(rep.mod_p.complete);
            assert_eq!(rep.residual_count, binom(n, 3));
        }
    }

    #[test]
    fn omega3_probe_is_deterministic() {
        let params = PParams::new(2, 1, 2, 2).unwrap();
        let c = find_splittings(&params).unwrap();
        let a = serde_json::to_string(&omega3_probe(&params, &c).unwrap()).unwrap();
        let b = serde_json::to_string(&omega3_probe(&params, &c).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
