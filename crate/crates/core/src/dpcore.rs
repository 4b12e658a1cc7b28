//! The free m-PD polynomial algebra `R{τ_1, ..., τ_n}` over `R = Z/p^N`, its
//! tensor powers `P(r)` and their cosimplicial structure.
//!
//! A basis word `τ^{V_1} ⊗ ... ⊗ τ^{V_r}` is a [`TensorWord`]. In the
//! rational embedding `τ^{k} = τ^k / q(k)!` the product is
//! `τ^{i} τ^{j} = mbinom(i+j, i) τ^{i+j}` and the comultiplication is
//! `Δτ^{I} = Σ_V qbinom(I, V) τ^{V} ⊗ τ^{I-V}`.
//!
//! Face maps follow the projection convention: for `1 <= i <= r` the face
//! `d^i` comultiplies slot `i` into slots `i, i+1`, while `d^0` and `d^{r+1}`
//! insert a unit slot at the left and right end respectively.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, CoeffTable};
use crate::matrix::Matrix;
use crate::params::{MultiIndex, PParams};
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpError {
    #[error("grade mismatch: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },
    #[error("index {index} out of range 0..={max} for grade {grade}")]
    IndexOutOfRange { index: usize, max: usize, grade: usize },
    #[error("image term {0} lies outside the target basis")]
    OutsideBasis(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A word `(V_1, ..., V_r)`; the empty word is the unit of `P(0)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorWord(pub Vec<MultiIndex>);

impl TensorWord {
    pub fn unit() -> Self {
        TensorWord(Vec::new())
    }

    pub fn single(i: MultiIndex) -> Self {
        TensorWord(vec![i])
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(MultiIndex::weight).sum()
    }

    /// Every factor nonzero.
    pub fn is_normalized(&self) -> bool {
        self.0.iter().all(|v| !v.is_zero())
    }

    pub fn concat(&self, other: &TensorWord) -> TensorWord {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        TensorWord(v)
    }
}

impl Ord for TensorWord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.grade(), self.weight(), &self.0).cmp(&(other.grade(), other.weight(), &other.0))
    }
}

impl PartialOrd for TensorWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "|")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub w_max: u64,
}

impl WeightWindow {
    pub fn new(w_max: u64) -> Self {
        WeightWindow { w_max }
    }

    pub fn contains(&self, w: u64) -> bool {
        w <= self.w_max
    }
}

/// A sparse combination of words of a common grade.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DPElement {
    pub grade: usize,
    pub terms: BTreeMap<TensorWord, u128>,
}

impl DPElement {
    pub fn zero(grade: usize) -> Self {
        DPElement {
            grade,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_word(word: TensorWord, coeff: u128) -> Self {
        let mut e = DPElement::zero(word.grade());
        if coeff != 0 {
            e.terms.insert(word, coeff);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &TensorWord) -> u128 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, word: TensorWord, c: u128, ring: &Zpn) {
        if c == 0 {
            return;
        }
        debug_assert_eq!(word.grade(), self.grade);
        let e = self.terms.entry(word).or_insert(0);
        *e = ring.add(*e, c);
        if *e == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add_scaled(&mut self, other: &DPElement, c: u128, ring: &Zpn) {
        for (w, &v) in &other.terms {
            self.add_term(w.clone(), ring.mul(c, v), ring);
        }
    }

    pub fn add(&self, other: &DPElement, ring: &Zpn) -> DPElement {
        let mut out = self.clone();
        out.add_scaled(other, 1, ring);
        out
    }

    pub fn scale(&self, c: u128, ring: &Zpn) -> DPElement {
        let mut out = DPElement::zero(self.grade);
        out.add_scaled(self, c, ring);
        out
    }

    pub fn neg(&self, ring: &Zpn) -> DPElement {
        self.scale(ring.neg(ring.reduce(1)), ring)
    }

    /// Terms of every weight present, as a set.
    pub fn weights(&self) -> Vec<u64> {
        let mut w: Vec<u64> = self.terms.keys().map(TensorWord::weight).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    /// Terms with signed coefficients, for display.
    pub fn display(&self, ring: &Zpn) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(w, &c)| format!("{}*[{}]", ring.to_signed(c), w))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for DPElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DPElement(grade {}, {:?})", self.grade, self.terms)
    }
}

/// All multi-indices of length `n` and weight `w`, in lexicographic order.
fn indices_of_weight(n: usize, w: u64) -> Vec<MultiIndex> {
    MultiIndex::of_weight(n, w)
}

/// All words of grade `r` and total weight exactly `w`, optionally with
/// every factor nonzero, in the canonical order.
pub fn words_of_weight(n: usize, r: usize, w: u64, normalized: bool) -> Vec<TensorWord> {
    fn rec(
        n: usize,
        r: usize,
        w: u64,
        normalized: bool,
        prefix: &mut Vec<MultiIndex>,
        out: &mut Vec<TensorWord>,
    ) {
        if r == 0 {
            if w == 0 {
                out.push(TensorWord(prefix.clone()));
            }
            return;
        }
        let min_rest = if normalized { (r - 1) as u64 } else { 0 };
        let lo = if normalized { 1 } else { 0 };
        if w < min_rest + lo {
            return;
        }
        for first in lo..=w - min_rest {
            for v in indices_of_weight(n, first) {
                prefix.push(v);
                rec(n, r - 1, w - first, normalized, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, r, w, normalized, &mut Vec::with_capacity(r), &mut out);
    out.sort();
    out
}

/// Context for computations in `P(•)` over `Z/p^N`, truncated to a weight window.
#[derive(Debug, Clone)]
pub struct DpAlgebra {
    params: PParams,
    ring: Zpn,
    coeffs: CoeffTable,
    window: WeightWindow,
}

impl DpAlgebra {
    pub fn new(params: PParams, window: WeightWindow) -> Result<Self, DpError> {
        let bound = window.w_max.max(2 * params.pm() as u64).min(4096) as u32;
        let coeffs = CoeffTable::new(&params, bound)?;
        Ok(DpAlgebra {
            params,
            ring: params.ring(),
            coeffs,
            window,
        })
    }

    pub fn params(&self) -> &PParams {
        &self.params
    }

    pub fn ring(&self) -> &Zpn {
        &self.ring
    }

    pub fn coeffs(&self) -> &CoeffTable {
        &self.coeffs
    }

    pub fn window(&self) -> WeightWindow {
        self.window
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn one(&self, grade: usize) -> DPElement {
        let w = TensorWord(vec![MultiIndex::zero(self.n()); grade]);
        DPElement::from_word(w, self.ring.reduce(1))
    }

    /// `τ^{I}` in grade 1.
    pub fn tau(&self, i: &MultiIndex) -> DPElement {
        DPElement::from_word(TensorWord::single(i.clone()), self.ring.reduce(1))
    }

    pub fn word(&self, w: TensorWord) -> DPElement {
        DPElement::from_word(w, self.ring.reduce(1))
    }

    /// `τ_i = d^0(t_i)` for the coordinate `t_i` (0-based `i`).
    pub fn d0_coordinate(&self, i: usize) -> Result<DPElement, DpError> {
        if i >= self.n() {
            return Err(DpError::IndexOutOfRange {
                index: i,
                max: self.n() - 1,
                grade: 0,
            });
        }
        Ok(self.tau(&MultiIndex::unit(self.n(), i)))
    }

    /// Slotwise product of two words, with its coefficient.
    pub fn mul_words(&self, a: &TensorWord, b: &TensorWord) -> (TensorWord, u128) {
        let mut c = self.ring.reduce(1);
        let mut out = Vec::with_capacity(a.grade());
        for (v, w) in a.0.iter().zip(&b.0) {
            c = self.ring.mul(c, self.coeffs.mul_coeff(v, w));
            out.push(v.add(w));
        }
        (TensorWord(out), c)
    }

    pub fn mul(&self, a: &DPElement, b: &DPElement) -> Result<DPElement, DpError> {
        if a.grade != b.grade {
            return Err(DpError::GradeMismatch {
                left: a.grade,
                right: b.grade,
            });
        }
        let mut out = DPElement::zero(a.grade);
        for (wa, &ca) in &a.terms {
            for (wb, &cb) in &b.terms {
                if !self.window.contains(wa.weight() + wb.weight()) {
                    continue;
                }
                let (w, c) = self.mul_words(wa, wb);
                let c = self.ring.mul(c, self.ring.mul(ca, cb));
                out.add_term(w, c, &self.ring);
            }
        }
        Ok(out)
    }

    /// `∏_j c^{i_j}`: the coefficient picked up by `τ^{I}` under `τ ↦ c·τ`.
    pub fn scale_substitute(&self, c: u128, i: &MultiIndex) -> u128 {
        self.ring.pow(c, i.weight())
    }

    /// `Σ_{0≤V≤I} qbinom(I,V) τ^{V} ⊗ τ^{I-V}`.
    pub fn add_expand(&self, i: &MultiIndex) -> DPElement {
        let mut out = DPElement::zero(2);
        for v in i.below() {
            let c = self.coeffs.qbinom(i, &v);
            let rest = i.checked_sub(&v).unwrap();
            out.add_term(TensorWord(vec![v, rest]), c, &self.ring);
        }
        out
    }

    fn map_words(&self, x: &DPElement, grade: usize, f: impl Fn(&TensorWord) -> DPElement) -> DPElement {
        let mut out = DPElement::zero(grade);
        for (w, &c) in &x.terms {
            out.add_scaled(&f(w), c, &self.ring);
        }
        out
    }

    /// The face `d^i` applied to one word of grade `r`.
    pub fn face_word(&self, i: usize, w: &TensorWord) -> DPElement {
        let r = w.grade();
        let zero = MultiIndex::zero(self.n());
        if i == 0 || i == r + 1 {
            let mut v = w.0.clone();
            if i == 0 {
                v.insert(0, zero);
            } else {
                v.push(zero);
            }
            return self.word(TensorWord(v));
        }
        let slot = i - 1;
        let mut out = DPElement::zero(r + 1);
        for (t, &c) in &self.add_expand(&w.0[slot]).terms {
            let mut v = Vec::with_capacity(r + 1);
            v.extend_from_slice(&w.0[..slot]);
            v.extend(t.0.iter().cloned());
            v.extend_from_slice(&w.0[slot + 1..]);
            out.add_term(TensorWord(v), c, &self.ring);
        }
        out
    }

    /// `(d_r^i)^*: P(r) -> P(r+1)`.
    pub fn face_map(&self, r: usize, i: usize, x: &DPElement) -> Result<DPElement, DpError> {
        self.check_grade(r, x)?;
        if i > r + 1 {
            return Err(DpError::IndexOutOfRange {
                index: i,
                max: r + 1,
                grade: r,
            });
        }
        Ok(self.map_words(x, r + 1, |w| self.face_word(i, w)))
    }

    /// The codegeneracy `σ^j: P(r) -> P(r-1)` for `0 <= j < r`: deletes slot
    /// `j` (0-based) when it is the unit and sends the word to zero otherwise.
    pub fn degeneracy_map(&self, r: usize, j: usize, x: &DPElement) -> Result<DPElement, DpError> {
        self.check_grade(r, x)?;
        if j >= r {
            return Err(DpError::IndexOutOfRange {
                index: j,
                max: r.saturating_sub(1),
                grade: r,
            });
        }
        Ok(self.map_words(x, r - 1, |w| {
            if w.0[j].is_zero() {
                let mut v = w.0.clone();
                v.remove(j);
                self.word(TensorWord(v))
            } else {
                DPElement::zero(r - 1)
            }
        }))
    }

    /// Multiplies slots `j` and `j+1` (0-based) together.
    pub fn merge_slots(&self, r: usize, j: usize, x: &DPElement) -> Result<DPElement, DpError> {
        self.check_grade(r, x)?;
        if j + 1 >= r {
            return Err(DpError::IndexOutOfRange {
                index: j,
                max: r.saturating_sub(2),
                grade: r,
            });
        }
        Ok(self.map_words(x, r - 1, |w| {
            let c = self.coeffs.mul_coeff(&w.0[j], &w.0[j + 1]);
            let mut v = w.0.clone();
            let merged = v[j].add(&v[j + 1]);
            v[j] = merged;
            v.remove(j + 1);
            DPElement::from_word(TensorWord(v), c)
        }))
    }

    /// Normalized words of grade `r` with weight in the window, canonical order.
    pub fn normalized_basis(&self, r: usize) -> Vec<TensorWord> {
        (0..=self.window.w_max)
            .flat_map(|w| words_of_weight(self.n(), r, w, true))
            .collect()
    }

    /// `d^r = Σ_{i=0}^{r+1} (-1)^i (d_r^i)^*`.
    pub fn dga_differential(&self, r: usize, x: &DPElement) -> Result<DPElement, DpError> {
        self.alternating(r, x, 0..=r + 1, 0)
    }

    /// On `L P(r) = P(r+1)`: `Σ_{i=1}^{r+2} (-1)^{i+1} (d_{r+1}^i)^*`.
    pub fn l_differential(&self, r: usize, x: &DPElement) -> Result<DPElement, DpError> {
        self.alternating(r + 1, x, 1..=r + 2, 1)
    }

    fn alternating(
        &self,
        grade: usize,
        x: &DPElement,
        faces: std::ops::RangeInclusive<usize>,
        shift: usize,
    ) -> Result<DPElement, DpError> {
        self.check_grade(grade, x)?;
        let mut out = DPElement::zero(grade + 1);
        for i in faces {
            let f = self.face_map(grade, i, x)?;
            out.add_scaled(&f, self.ring.sign((i + shift) as u64), &self.ring);
        }
        Ok(out)
    }

    fn check_grade(&self, r: usize, x: &DPElement) -> Result<(), DpError> {
        if x.grade != r {
            return Err(DpError::GradeMismatch {
                left: x.grade,
                right: r,
            });
        }
        Ok(())
    }

    /// Matrix of a linear map between two word bases; images must stay in `tgt`.
    pub fn matrix_of(
        &self,
        src: &[TensorWord],
        tgt: &[TensorWord],
        f: impl Fn(&TensorWord) -> DPElement,
    ) -> Result<Matrix, DpError> {
        let pos: BTreeMap<&TensorWord, usize> = tgt.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut m = Matrix::zeros(tgt.len(), src.len());
        for (j, w) in src.iter().enumerate() {
            for (t, &c) in &f(w).terms {
                let i = *pos.get(t).ok_or_else(|| DpError::OutsideBasis(t.to_string()))?;
                m.add_at(i, j, c, &self.ring);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn alg(p: u64, m: u32, n: usize, big_n: u32, w: u64) -> DpAlgebra {
        DpAlgebra::new(PParams::new(p, m, n, big_n).unwrap(), WeightWindow::new(w)).unwrap()
    }

    fn tw(v: &[&[u32]]) -> TensorWord {
        TensorWord(v.iter().map(|x| mi(x)).collect())
    }

    #[test]
    fn multiplication_examples() {
        let a = alg(2, 1, 1, 4, 10);
        let t2 = a.tau(&mi(&[2]));
        assert_eq!(a.mul(&t2, &t2).unwrap(), a.tau(&mi(&[4])).scale(2, a.ring()));
        let t1 = a.tau(&mi(&[1]));
        assert_eq!(a.mul(&t1, &t1).unwrap(), a.tau(&mi(&[2])));
        assert_eq!(a.mul(&a.one(1), &t2).unwrap(), t2);
        assert!(matches!(
            a.mul(&t1, &a.one(2)),
            Err(DpError::GradeMismatch { .. })
        ));
    }

    #[test]
    fn scale_substitute_examples() {
        let a = alg(2, 1, 1, 3, 10);
        let r = a.ring();
        let minus = r.from_i64(-1);
        assert_eq!(a.scale_substitute(minus, &mi(&[1])), minus);
        assert_eq!(a.scale_substitute(minus, &mi(&[2])), 1);
        assert_eq!(a.scale_substitute(2, &mi(&[3])), 0);
    }

    #[test]
    fn add_expand_examples() {
        let a = alg(2, 1, 1, 4, 10);
        let e = a.add_expand(&mi(&[2]));
        assert_eq!(e.coeff(&tw(&[&[2], &[0]])), 1);
        assert_eq!(e.coeff(&tw(&[&[1], &[1]])), 2);
        assert_eq!(e.coeff(&tw(&[&[0], &[2]])), 1);
        assert_eq!(e.terms.len(), 3);
        assert_eq!(a.add_expand(&mi(&[0])), a.one(2));
    }

    #[test]
    fn face_examples() {
        let a = alg(2, 1, 1, 4, 10);
        let t = a.tau(&mi(&[3]));
        assert_eq!(a.face_map(1, 0, &t).unwrap(), a.word(tw(&[&[0], &[3]])));
        assert_eq!(a.face_map(1, 2, &t).unwrap(), a.word(tw(&[&[3], &[0]])));
        let t1 = a.tau(&mi(&[1]));
        let d = a.face_map(1, 1, &t1).unwrap();
        assert_eq!(d, a.word(tw(&[&[1], &[0]])).add(&a.word(tw(&[&[0], &[1]])), a.ring()));
        assert!(matches!(
            a.face_map(1, 3, &t1),
            Err(DpError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn merge_slot_examples() {
        let a = alg(2, 1, 1, 4, 10);
        let x = a.word(tw(&[&[2], &[2]]));
        assert_eq!(a.merge_slots(2, 0, &x).unwrap(), a.tau(&mi(&[4])).scale(2, a.ring()));
        let y = a.word(tw(&[&[3], &[0]]));
        assert_eq!(a.merge_slots(2, 0, &y).unwrap(), a.tau(&mi(&[3])));
    }

    #[test]
    fn degeneracy_kills_normalized_words() {
        let a = alg(2, 1, 2, 3, 6);
        for r in 1..=3 {
            for w in a.normalized_basis(r) {
                let x = a.word(w);
                for j in 0..r {
                    assert!(a.degeneracy_map(r, j, &x).unwrap().is_zero());
                }
            }
        }
        let x = a.word(tw(&[&[0, 0], &[1, 2]]));
        assert_eq!(a.degeneracy_map(2, 0, &x).unwrap(), a.tau(&mi(&[1, 2])));
    }

    #[test]
    fn normalized_basis_examples() {
        let a = alg(2, 1, 1, 2, 1);
        assert_eq!(a.normalized_basis(1), vec![tw(&[&[1]])]);
        assert_eq!(a.normalized_basis(0), vec![TensorWord::unit()]);
        let b = alg(2, 1, 1, 2, 4);
        assert!(b.normalized_basis(2).iter().all(|w| w.is_normalized()));
        assert_eq!(b.normalized_basis(2).len(), 1 + 2 + 3);
    }

    #[test]
    fn d1_examples() {
        let a = alg(2, 1, 1, 4, 10);
        let r = a.ring();
        let d = a.dga_differential(1, &a.tau(&mi(&[3]))).unwrap();
        let minus3 = r.from_i64(-3);
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.coeff(&tw(&[&[1], &[2]])), minus3);
        assert_eq!(d.coeff(&tw(&[&[2], &[1]])), minus3);
        assert!(a.dga_differential(1, &a.tau(&mi(&[1]))).unwrap().is_zero());
        assert_eq!(a.d0_coordinate(0).unwrap(), a.tau(&mi(&[1])));
    }

    #[test]
    fn differentials_square_to_zero() {
        let a = alg(2, 1, 2, 3, 6);
        for r in 0..=2 {
            for w in (0..=6).flat_map(|w| words_of_weight(2, r, w, false)) {
                let x = a.word(w.clone());
                let dd = a
                    .dga_differential(r + 1, &a.dga_differential(r, &x).unwrap())
                    .unwrap();
                assert!(dd.is_zero(), "dga d^2 on {w}");
                if r >= 1 {
                    let ll = a
                        .l_differential(r, &a.l_differential(r - 1, &x).unwrap())
                        .unwrap();
                    assert!(ll.is_zero(), "L d^2 on {w}");
                }
            }
        }
    }

    #[test]
    fn cosimplicial_identities() {
        let a = alg(3, 1, 1, 2, 7);
        for r in 1..=3usize {
            for w in (0..=7).flat_map(|w| words_of_weight(1, r, w, false)) {
                let x = a.word(w.clone());
                // d^j d^i = d^i d^{j-1} for i < j.
                for j in 0..=r + 2 {
                    for i in 0..j {
                        let lhs = a.face_map(r + 1, j, &a.face_map(r, i, &x).unwrap()).unwrap();
                        let rhs = a.face_map(r + 1, i, &a.face_map(r, j - 1, &x).unwrap()).unwrap();
                        assert_eq!(lhs, rhs, "faces {i},{j} on {w}");
                    }
                }
                // σ^j d^i: identity when i = j or j + 1.
                for j in 0..=r {
                    for i in [j, j + 1] {
                        let y = a.degeneracy_map(r + 1, j, &a.face_map(r, i, &x).unwrap()).unwrap();
                        assert_eq!(y, x, "σ^{j} d^{i} on {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn word_order_is_grade_weight_lex() {
        let mut v = vec![tw(&[&[2]]), tw(&[&[0], &[1]]), tw(&[&[1]]), TensorWord::unit()];
        v.sort();
        assert_eq!(v, vec![TensorWord::unit(), tw(&[&[1]]), tw(&[&[2]]), tw(&[&[0], &[1]])]);
    }
}
