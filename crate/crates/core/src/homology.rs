//! Finite free cochain complexes over `Z/p^N`, their homology via Smith
//! normal form, and the mapping-cone test for quasi-isomorphisms.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("d∘d is nonzero starting in degree {0}")]
    NotAComplex(i32),
    #[error("map does not commute with the differentials in degree {0}")]
    NotChainMap(i32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precision {requested} exceeds the current precision {current}")]
    Precision { requested: u32, current: u32 },
}

/// The named, weighted basis of one term.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub labels: Vec<String>,
    pub weights: Vec<u64>,
}

impl Term {
    pub fn new(labels: Vec<String>, weights: Vec<u64>) -> Self {
        assert_eq!(labels.len(), weights.len());
        Term { labels, weights }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn push(&mut self, label: String, weight: u64) {
        self.labels.push(label);
        self.weights.push(weight);
    }
}

/// A cochain complex `C^lo -> C^{lo+1} -> ... -> C^hi` of free modules.
///
/// `diffs[k]` is the matrix of `C^{lo+k} -> C^{lo+k+1}` acting on columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasedComplex {
    #[serde(skip_serializing, skip_deserializing, default = "default_ring")]
    pub ring: Zpn,
    pub lo: i32,
    pub terms: Vec<Term>,
    pub diffs: Vec<Matrix>,
}

fn default_ring() -> Zpn {
    Zpn::new(2, 1).unwrap()
}

impl BasedComplex {
    pub fn new(
        ring: Zpn,
        lo: i32,
        terms: Vec<Term>,
        diffs: Vec<Matrix>,
    ) -> Result<Self, HomologyError> {
        if diffs.len() + 1 != terms.len().max(1) {
            return Err(HomologyError::Shape(format!(
                "{} terms need {} differentials, got {}",
                terms.len(),
                terms.len().saturating_sub(1),
                diffs.len()
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.cols() != terms[k].len() || d.rows() != terms[k + 1].len() {
                return Err(HomologyError::Shape(format!(
                    "differential out of degree {} is {}x{}, expected {}x{}",
                    lo + k as i32,
                    d.rows(),
                    d.cols(),
                    terms[k + 1].len(),
                    terms[k].len()
                )));
            }
        }
        Ok(BasedComplex {
            ring,
            lo,
            terms,
            diffs,
        })
    }

    /// A single term in degree `lo` with zero differential around it.
    pub fn concentrated(ring: Zpn, degree: i32, term: Term) -> Self {
        BasedComplex {
            ring,
            lo: degree,
            terms: vec![term],
            diffs: Vec::new(),
        }
    }

    /// The highest degree carried (may hold an empty term).
    pub fn hi(&self) -> i32 {
        self.lo + self.terms.len() as i32 - 1
    }

    pub fn term(&self, d: i32) -> Option<&Term> {
        if d < self.lo {
            return None;
        }
        self.terms.get((d - self.lo) as usize)
    }

    pub fn rank(&self, d: i32) -> usize {
        self.term(d).map_or(0, Term::len)
    }

    /// The differential out of degree `d`, as a `rank(d+1) x rank(d)` matrix.
    pub fn diff(&self, d: i32) -> Matrix {
        if d >= self.lo {
            if let Some(m) = self.diffs.get((d - self.lo) as usize) {
                return m.clone();
            }
        }
        Matrix::zeros(self.rank(d + 1), self.rank(d))
    }

    pub fn check_complex(&self) -> Result<(), HomologyError> {
        for k in 1..self.diffs.len() {
            if !self.diffs[k].mul(&self.diffs[k - 1], &self.ring).is_zero() {
                return Err(HomologyError::NotAComplex(self.lo + k as i32 - 1));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> BTreeSet<u64> {
        self.terms
            .iter()
            .flat_map(|t| t.weights.iter().copied())
            .collect()
    }

    /// Whether every differential entry connects basis elements of equal weight.
    pub fn is_weight_homogeneous(&self) -> bool {
        self.diffs.iter().enumerate().all(|(k, d)| {
            let (src, tgt) = (&self.terms[k], &self.terms[k + 1]);
            (0..d.rows()).all(|i| {
                (0..d.cols()).all(|j| d.get(i, j) == 0 || tgt.weights[i] == src.weights[j])
            })
        })
    }

    /// The subcomplex spanned by basis elements of weight `w`.
    pub fn weight_block(&self, w: u64) -> BasedComplex {
        self.select_weights(|x| x == w)
    }

    /// The span of basis elements whose weight satisfies `keep`. This is a
    /// subcomplex when the differentials respect weights.
    pub fn select_weights(&self, keep: impl Fn(u64) -> bool) -> BasedComplex {
        let idx: Vec<Vec<usize>> = self
            .terms
            .iter()
            .map(|t| (0..t.len()).filter(|&i| keep(t.weights[i])).collect())
            .collect();
        let terms = self
            .terms
            .iter()
            .zip(&idx)
            .map(|(t, ix)| Term {
                labels: ix.iter().map(|&i| t.labels[i].clone()).collect(),
                weights: ix.iter().map(|&i| t.weights[i]).collect(),
            })
            .collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(k, d)| d.select(&idx[k + 1], &idx[k]))
            .collect();
        BasedComplex {
            ring: self.ring,
            lo: self.lo,
            terms,
            diffs,
        }
    }

    /// Reorders the basis of every term; `perms[k][new] = old`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> BasedComplex {
        let terms = self
            .terms
            .iter()
            .zip(perms)
            .map(|(t, p)| Term {
                labels: p.iter().map(|&i| t.labels[i].clone()).collect(),
                weights: p.iter().map(|&i| t.weights[i]).collect(),
            })
            .collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(k, d)| d.select(&perms[k + 1], &perms[k]))
            .collect();
        BasedComplex {
            ring: self.ring,
            lo: self.lo,
            terms,
            diffs,
        }
    }

    /// Alternating sum of term ranks.
    pub fn euler_characteristic(&self) -> i64 {
        (self.lo..=self.hi())
            .map(|d| sign_i64(d) * self.rank(d) as i64)
            .sum()
    }
}

fn sign_i64(d: i32) -> i64 {
    if d.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Homology in one degree: `Z/p^N` to the power `free_rank` plus `Z/p^e` per torsion exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHomology {
    pub degree: i32,
    pub free_rank: usize,
    pub torsion: Vec<u32>,
}

impl DegreeHomology {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologySummary {
    pub degrees: Vec<DegreeHomology>,
}

impl HomologySummary {
    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(DegreeHomology::is_zero)
    }

    pub fn degree(&self, d: i32) -> DegreeHomology {
        self.degrees
            .iter()
            .find(|h| h.degree == d)
            .cloned()
            .unwrap_or(DegreeHomology {
                degree: d,
                ..Default::default()
            })
    }

    pub fn free_rank(&self, d: i32) -> usize {
        self.degree(d).free_rank
    }

    /// Direct sum, degree by degree.
    pub fn merge(&mut self, other: &HomologySummary) {
        for h in &other.degrees {
            match self.degrees.iter_mut().find(|x| x.degree == h.degree) {
                Some(x) => {
                    x.free_rank += h.free_rank;
                    x.torsion.extend(&h.torsion);
                    x.torsion.sort_unstable();
                }
                None => self.degrees.push(h.clone()),
            }
        }
        self.degrees.sort_by_key(|h| h.degree);
    }
}

/// Result of [`snf_local`]: `left * M * right = diag(p^e)`.
#[derive(Debug, Clone)]
pub struct Snf {
    /// Ascending, of length `min(rows, cols)`; `N` encodes a zero diagonal entry.
    pub exponents: Vec<u32>,
    pub left: Matrix,
    pub right: Matrix,
    pub right_inv: Matrix,
}

/// Smith normal form over the local ring `Z/p^N`.
///
/// Pivots have minimal valuation in the remaining block, ties broken by
/// row-major position, so the transforms are reproducible.
pub fn snf_local(m: &Matrix, ring: &Zpn) -> Snf {
    let (exponents, t) = snf_impl(m, ring, true);
    let (left, right, right_inv) = t.unwrap();
    Snf {
        exponents,
        left,
        right,
        right_inv,
    }
}

/// Diagonal exponents only.
pub fn snf_exponents(m: &Matrix, ring: &Zpn) -> Vec<u32> {
    snf_impl(m, ring, false).0
}

type Transforms = (Matrix, Matrix, Matrix);

fn snf_impl(m: &Matrix, ring: &Zpn, track: bool) -> (Vec<u32>, Option<Transforms>) {
    let (r, c) = (m.rows(), m.cols());
    let k = r.min(c);
    let n_exp = ring.exponent();
    let mut a = m.clone();
    let mut tr = track.then(|| {
        (
            Matrix::identity(r, ring),
            Matrix::identity(c, ring),
            Matrix::identity(c, ring),
        )
    });
    let mut exps = Vec::with_capacity(k);
    for t in 0..k {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for i in t..r {
            for j in t..c {
                let v = a.get(i, j);
                if v == 0 {
                    continue;
                }
                let val = ring.valuation(v);
                if best.is_none_or(|b| val < b.0) {
                    best = Some((val, i, j));
                    if val == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((e, pi, pj)) = best else {
            exps.resize(k, n_exp);
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if let Some((l, rr, ri)) = tr.as_mut() {
            l.swap_rows(t, pi);
            rr.swap_cols(t, pj);
            ri.swap_rows(t, pj);
        }
        let unit = ring.div_p_power(a.get(t, t), e);
        let uinv = ring.inverse(unit).expect("pivot cofactor is a unit");
        a.scale_row(t, uinv, ring);
        if let Some((l, _, _)) = tr.as_mut() {
            l.scale_row(t, uinv, ring);
        }
        for i in t + 1..r {
            let b = a.get(i, t);
            if b != 0 {
                let f = ring.neg(ring.div_p_power(b, e));
                a.row_axpy(i, t, f, ring);
                if let Some((l, _, _)) = tr.as_mut() {
                    l.row_axpy(i, t, f, ring);
                }
            }
        }
        for j in t + 1..c {
            let b = a.get(t, j);
            if b != 0 {
                let f = ring.div_p_power(b, e);
                a.col_axpy(j, t, ring.neg(f), ring);
                if let Some((_, rr, ri)) = tr.as_mut() {
                    rr.col_axpy(j, t, ring.neg(f), ring);
                    ri.row_axpy(t, j, f, ring);
                }
            }
        }
        exps.push(e);
    }
    (exps, tr)
}

/// `H = ker(b) / im(a)` for `a: C^{d-1} -> C^d`, `b: C^d -> C^{d+1}`.
fn degree_homology(degree: i32, dim: usize, a: &Matrix, b: &Matrix, ring: &Zpn) -> DegreeHomology {
    let n_exp = ring.exponent();
    let mut out = DegreeHomology {
        degree,
        ..Default::default()
    };
    if dim == 0 {
        return out;
    }
    // Kernel of b in the basis given by the columns of R: generator p^{c_i} e_i.
    let (cvals, rinv) = if b.rows() == 0 || b.is_zero() {
        (vec![0u32; dim], None)
    } else {
        let s = snf_local(b, ring);
        let mut c: Vec<u32> = s
            .exponents
            .iter()
            .map(|&e| n_exp.saturating_sub(e))
            .collect();
        c.resize(dim, 0);
        (c, Some(s.right_inv))
    };
    let keep: Vec<usize> = (0..dim).filter(|&i| cvals[i] < n_exp).collect();
    if keep.is_empty() {
        return out;
    }
    let a_y = match &rinv {
        Some(ri) => ri.mul(a, ring),
        None => a.clone(),
    };
    let mut rel = Matrix::zeros(keep.len(), a.cols() + keep.len());
    for (row, &i) in keep.iter().enumerate() {
        for j in 0..a.cols() {
            let v = a_y.get(i, j);
            debug_assert!(ring.valuation(v) >= cvals[i], "image outside kernel");
            rel.set(row, j, ring.div_p_power(v, cvals[i]));
        }
        rel.set(row, a.cols() + row, ring.p_power(n_exp - cvals[i]));
    }
    for e in snf_exponents(&rel, ring) {
        if e >= n_exp {
            out.free_rank += 1;
        } else if e > 0 {
            out.torsion.push(e);
        }
    }
    out.torsion.sort_unstable();
    out
}

fn homology_unchecked(c: &BasedComplex) -> HomologySummary {
    let degrees = (c.lo..=c.hi())
        .map(|d| {
            let dim = c.rank(d);
            let a = c.diff(d - 1);
            let b = c.diff(d);
            degree_homology(d, dim, &a, &b, &c.ring)
        })
        .collect();
    HomologySummary { degrees }
}

/// Homology of the whole complex, computed per weight block when the
/// differentials respect weights.
pub fn homology(c: &BasedComplex) -> Result<HomologySummary, HomologyError> {
    c.check_complex()?;
    if !c.is_weight_homogeneous() {
        return Ok(homology_unchecked(c));
    }
    let mut total = HomologySummary {
        degrees: (c.lo..=c.hi())
            .map(|d| DegreeHomology {
                degree: d,
                ..Default::default()
            })
            .collect(),
    };
    for h in homology_by_weight(c)?.values() {
        total.merge(h);
    }
    Ok(total)
}

/// Per-weight homology; requires weight-homogeneous differentials.
pub fn homology_by_weight(
    c: &BasedComplex,
) -> Result<BTreeMap<u64, HomologySummary>, HomologyError> {
    c.check_complex()?;
    if !c.is_weight_homogeneous() {
        return Err(HomologyError::Shape(
            "differential mixes weights; per-weight homology undefined".into(),
        ));
    }
    let weights: Vec<u64> = c.weights().into_iter().collect();
    Ok(weights
        .par_iter()
        .map(|&w| (w, homology_unchecked(&c.weight_block(w))))
        .collect::<Vec<_>>()
        .into_iter()
        .collect())
}

/// Degreewise matrices of a map between based complexes. Missing degrees are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComplexMap {
    pub components: BTreeMap<i32, Matrix>,
}

impl ComplexMap {
    pub fn component(&self, d: i32, src: &BasedComplex, tgt: &BasedComplex) -> Matrix {
        self.components
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(tgt.rank(d), src.rank(d)))
    }

    pub fn identity(c: &BasedComplex) -> Self {
        ComplexMap {
            components: (c.lo..=c.hi())
                .map(|d| (d, Matrix::identity(c.rank(d), &c.ring)))
                .collect(),
        }
    }

    pub fn zero() -> Self {
        ComplexMap::default()
    }

    fn check_shapes(&self, src: &BasedComplex, tgt: &BasedComplex) -> Result<(), HomologyError> {
        for (&d, m) in &self.components {
            if m.rows() != tgt.rank(d) || m.cols() != src.rank(d) {
                return Err(HomologyError::Shape(format!(
                    "map component in degree {d} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    tgt.rank(d),
                    src.rank(d)
                )));
            }
        }
        Ok(())
    }
}

fn degree_span(a: &BasedComplex, b: &BasedComplex) -> (i32, i32) {
    (a.lo.min(b.lo), a.hi().max(b.hi()))
}

pub fn check_chain_map(
    f: &ComplexMap,
    src: &BasedComplex,
    tgt: &BasedComplex,
) -> Result<(), HomologyError> {
    f.check_shapes(src, tgt)?;
    let ring = &src.ring;
    let (lo, hi) = degree_span(src, tgt);
    for d in lo - 1..=hi {
        let left = f.component(d + 1, src, tgt).mul(&src.diff(d), ring);
        let right = tgt.diff(d).mul(&f.component(d, src, tgt), ring);
        if left != right {
            return Err(HomologyError::NotChainMap(d));
        }
    }
    Ok(())
}

/// `Cone^k = A^{k+1} ⊕ B^k` with `d(a, b) = (-d_A a, f(a) + d_B b)`.
pub fn cone(f: &ComplexMap, src: &BasedComplex, tgt: &BasedComplex) -> BasedComplex {
    let ring = src.ring;
    let lo = (src.lo - 1).min(tgt.lo);
    let hi = (src.hi() - 1).max(tgt.hi());
    let mut terms = Vec::new();
    for k in lo..=hi {
        let mut t = Term::default();
        if let Some(a) = src.term(k + 1) {
            for (l, &w) in a.labels.iter().zip(&a.weights) {
                t.push(format!("src:{l}"), w);
            }
        }
        if let Some(b) = tgt.term(k) {
            for (l, &w) in b.labels.iter().zip(&b.weights) {
                t.push(format!("tgt:{l}"), w);
            }
        }
        terms.push(t);
    }
    let mut diffs = Vec::new();
    for k in lo..hi {
        let (a0, b0) = (src.rank(k + 1), tgt.rank(k));
        let (a1, b1) = (src.rank(k + 2), tgt.rank(k + 1));
        let mut m = Matrix::zeros(a1 + b1, a0 + b0);
        m.paste(0, 0, &src.diff(k + 1).neg(&ring));
        m.paste(a1, 0, &f.component(k + 1, src, tgt));
        m.paste(a1, a0, &tgt.diff(k));
        diffs.push(m);
    }
    BasedComplex {
        ring,
        lo,
        terms,
        diffs,
    }
}

/// Verdict of the cone criterion together with the cone's homology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiIsoReport {
    pub is_quasi_iso: bool,
    pub cone_homology: HomologySummary,
}

pub fn is_quasi_iso(
    f: &ComplexMap,
    src: &BasedComplex,
    tgt: &BasedComplex,
) -> Result<QuasiIsoReport, HomologyError> {
    check_chain_map(f, src, tgt)?;
    let c = cone(f, src, tgt);
    let h = homology(&c)?;
    Ok(QuasiIsoReport {
        is_quasi_iso: h.is_zero(),
        cone_homology: h,
    })
}

/// Position of a basis element of a tensor product: `(deg a, index a, index b)`.
pub type TensorIndex = (i32, usize, usize);

/// `(A ⊗ B)^k = ⊕_{i+j=k} A^i ⊗ B^j` with `d(a⊗b) = da⊗b + (-1)^i a⊗db`.
///
/// Within each degree, summands are ordered by `i` and then `a`-major.
pub fn tensor_product(a: &BasedComplex, b: &BasedComplex) -> (BasedComplex, Vec<Vec<TensorIndex>>) {
    let ring = a.ring;
    let lo = a.lo + b.lo;
    let hi = a.hi() + b.hi();
    let mut terms = Vec::new();
    let mut index: Vec<Vec<TensorIndex>> = Vec::new();
    for k in lo..=hi {
        let mut t = Term::default();
        let mut ix = Vec::new();
        for i in a.lo..=a.hi() {
            let j = k - i;
            let (Some(ta), Some(tb)) = (a.term(i), b.term(j)) else {
                continue;
            };
            for x in 0..ta.len() {
                for y in 0..tb.len() {
                    t.push(
                        format!("{}*{}", ta.labels[x], tb.labels[y]),
                        ta.weights[x] + tb.weights[y],
                    );
                    ix.push((i, x, y));
                }
            }
        }
        terms.push(t);
        index.push(ix);
    }
    let mut diffs = Vec::new();
    for k in lo..hi {
        let src = &index[(k - lo) as usize];
        let tgt = &index[(k + 1 - lo) as usize];
        let pos: BTreeMap<TensorIndex, usize> =
            tgt.iter().enumerate().map(|(p, &key)| (key, p)).collect();
        let mut m = Matrix::zeros(tgt.len(), src.len());
        for (col, &(i, x, y)) in src.iter().enumerate() {
            let j = k - i;
            let da = a.diff(i);
            for r in 0..da.rows() {
                let v = da.get(r, x);
                if v != 0 {
                    if let Some(&row) = pos.get(&(i + 1, r, y)) {
                        m.add_at(row, col, v, &ring);
                    }
                }
            }
            let db = b.diff(j);
            let sgn = sign_i64(i);
            for r in 0..db.rows() {
                let v = db.get(r, y);
                if v != 0 {
                    if let Some(&row) = pos.get(&(i, x, r)) {
                        let v = if sgn < 0 { ring.neg(v) } else { v };
                        m.add_at(row, col, v, &ring);
                    }
                }
            }
        }
        diffs.push(m);
    }
    (
        BasedComplex {
            ring,
            lo,
            terms,
            diffs,
        },
        index,
    )
}

/// Reduce every differential modulo `p^{N'}`.
pub fn base_change(c: &BasedComplex, precision: u32) -> Result<BasedComplex, HomologyError> {
    let current = c.ring.exponent();
    if precision == 0 || precision > current {
        return Err(HomologyError::Precision {
            requested: precision,
            current,
        });
    }
    let ring = c.ring.with_exponent(precision).expect("smaller modulus");
    Ok(BasedComplex {
        ring,
        lo: c.lo,
        terms: c.terms.clone(),
        diffs: c.diffs.iter().map(|d| d.reduce(&ring)).collect(),
    })
}

/// Direct sum of complexes, each basis label prefixed by its summand tag.
pub fn direct_sum(parts: &[(String, BasedComplex)]) -> BasedComplex {
    let ring = parts[0].1.ring;
    let lo = parts.iter().map(|(_, c)| c.lo).min().unwrap();
    let hi = parts.iter().map(|(_, c)| c.hi()).max().unwrap();
    let mut terms = Vec::new();
    for d in lo..=hi {
        let mut t = Term::default();
        for (tag, c) in parts {
            if let Some(x) = c.term(d) {
                for (l, &w) in x.labels.iter().zip(&x.weights) {
                    t.push(format!("{tag}:{l}"), w);
                }
            }
        }
        terms.push(t);
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let rows: usize = parts.iter().map(|(_, c)| c.rank(d + 1)).sum();
        let cols: usize = parts.iter().map(|(_, c)| c.rank(d)).sum();
        let mut m = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for (_, c) in parts {
            m.paste(r0, c0, &c.diff(d));
            r0 += c.rank(d + 1);
            c0 += c.rank(d);
        }
        diffs.push(m);
    }
    BasedComplex {
        ring,
        lo,
        terms,
        diffs,
    }
}
