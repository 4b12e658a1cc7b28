//! The higher de Rham complex, its linearization, the augmentation maps and
//! the comparison with the cosimplicial quotient construction.
//!
//! A basis element of the linearized complex is `τ^{I} ⊗ ω` with
//! `ω = τ̄_{j_1} ∧ ... ∧ τ̄_{j_r}` and `τ̄_j` the class of `τ^{p^m 1_j}`; its
//! weight is `|I| + r p^m`. The differential is
//! `d(τ^{I} ⊗ ω) = Σ_{i_j ≥ p^m} qbinom(i_j, p^m) τ^{I - p^m 1_j} ⊗ τ̄_j ∧ ω`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, CoeffTable};
use crate::dpcore::{words_of_weight, DPElement, DpAlgebra, DpError, TensorWord, WeightWindow};
use crate::homology::{
    check_chain_map, snf_exponents, tensor_product, BasedComplex, ComplexMap, HomologyError, Term,
};
use crate::matrix::Matrix;
use crate::params::{MultiIndex, PParams};
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HdrError {
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("evaluation point has {got} coordinates, expected {expected}")]
    EvalLength { got: usize, expected: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// `τ^{I} ⊗ τ̄_{j_1} ∧ ... ∧ τ̄_{j_r}` with `j_1 < ... < j_r` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HdrForm {
    pub coeff: MultiIndex,
    pub forms: Vec<usize>,
}

impl HdrForm {
    pub fn degree(&self) -> usize {
        self.forms.len()
    }

    pub fn weight(&self, pm: u32) -> u64 {
        self.coeff.weight() + self.forms.len() as u64 * pm as u64
    }

    /// Canonical label, e.g. `(2,0);{1,2}` with 1-based form indices.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for HdrForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let forms: Vec<String> = self.forms.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "{};{{{}}}", self.coeff, forms.join(","))
    }
}

/// Sorts a sequence of distinct indices, returning the permutation sign.
/// `None` when an index repeats.
pub fn sort_sign(seq: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut v = seq.to_vec();
    let mut odd = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((odd, v))
}

/// `τ̄_j ∧ ω` as (negated?, sorted set), or `None` when `j ∈ ω`.
pub fn wedge_left(j: usize, omega: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut seq = Vec::with_capacity(omega.len() + 1);
    seq.push(j);
    seq.extend_from_slice(omega);
    sort_sign(&seq)
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// The index set `𝔅 = { I : i_j ≤ p^m - 1 }` with labels `e_I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationBasis {
    pub pm: u32,
    pub n: usize,
    pub indices: Vec<MultiIndex>,
}

impl AugmentationBasis {
    pub fn new(params: &PParams) -> Self {
        Self::with_bound(params.pm(), params.n)
    }

    /// Entries strictly below `bound`, lexicographic.
    pub fn with_bound(bound: u32, n: usize) -> Self {
        AugmentationBasis {
            pm: bound,
            n,
            indices: MultiIndex::box_below(n, bound),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, i: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(i).ok()
    }

    pub fn label(i: &MultiIndex) -> String {
        format!("e{i}")
    }

    /// The complex concentrated in degree 0 on the elements of weight `<= w_max`.
    pub fn complex(&self, ring: Zpn, w_max: u64) -> (BasedComplex, Vec<MultiIndex>) {
        let kept: Vec<MultiIndex> = self
            .indices
            .iter()
            .filter(|i| i.weight() <= w_max)
            .cloned()
            .collect();
        let term = Term::new(
            kept.iter().map(Self::label).collect(),
            kept.iter().map(MultiIndex::weight).collect(),
        );
        (BasedComplex::concentrated(ring, 0, term), kept)
    }
}

/// The higher de Rham complex after point evaluation: the exterior algebra
/// on `τ̄_1, ..., τ̄_n` with zero differential.
pub fn build_hdr(params: &PParams) -> BasedComplex {
    let pm = params.pm() as u64;
    let terms: Vec<Term> = (0..=params.n)
        .map(|r| {
            let s = subsets(params.n, r);
            Term::new(
                s.iter()
                    .map(|f| {
                        HdrForm {
                            coeff: MultiIndex::zero(params.n),
                            forms: f.clone(),
                        }
                        .label()
                    })
                    .collect(),
                vec![r as u64 * pm; s.len()],
            )
        })
        .collect();
    let diffs = (0..params.n)
        .map(|r| Matrix::zeros(terms[r + 1].len(), terms[r].len()))
        .collect();
    BasedComplex::new(params.ring(), 0, terms, diffs).expect("consistent shapes")
}

/// Basis of degree `r` of the linearized complex in the given weights,
/// ordered by weight, then form set, then coefficient index.
pub fn lhdr_basis(params: &PParams, r: usize, weights: impl Iterator<Item = u64>) -> Vec<HdrForm> {
    let pm = params.pm() as u64;
    let sets = subsets(params.n, r);
    let mut out = Vec::new();
    for w in weights {
        let Some(rest) = w.checked_sub(r as u64 * pm) else {
            continue;
        };
        for s in &sets {
            for i in MultiIndex::of_weight(params.n, rest) {
                out.push(HdrForm {
                    coeff: i,
                    forms: s.clone(),
                });
            }
        }
    }
    out
}

/// Image of one basis element under the closed-form differential.
pub fn lhdr_differential(form: &HdrForm, coeffs: &CoeffTable) -> Vec<(HdrForm, u128)> {
    let ring = coeffs.ring();
    let pm = coeffs.pm() as u32;
    let mut out = Vec::new();
    for j in 0..form.coeff.len() {
        let ij = form.coeff.0[j];
        if ij < pm {
            continue;
        }
        let Some((neg, forms)) = wedge_left(j, &form.forms) else {
            continue;
        };
        let mut coeff = form.coeff.clone();
        coeff.0[j] -= pm;
        let c = coeffs.qbinom1(ij, pm);
        let c = if neg { ring.neg(c) } else { c };
        if c != 0 {
            out.push((HdrForm { coeff, forms }, c));
        }
    }
    out
}

/// The linearized complex on an explicit list of weights.
fn lhdr_on_weights(params: &PParams, weights: &[u64]) -> Result<(BasedComplex, Vec<Vec<HdrForm>>), HdrError> {
    let pm = params.pm();
    let top = weights.iter().copied().max().unwrap_or(0);
    let coeffs = CoeffTable::new(params, top.max(pm as u64) as u32)?;
    let bases: Vec<Vec<HdrForm>> = (0..=params.n)
        .map(|r| lhdr_basis(params, r, weights.iter().copied()))
        .collect();
    let terms = bases
        .iter()
        .map(|b| {
            Term::new(
                b.iter().map(HdrForm::label).collect(),
                b.iter().map(|f| f.weight(pm)).collect(),
            )
        })
        .collect();
    let mut diffs = Vec::with_capacity(params.n);
    for r in 0..params.n {
        let pos: BTreeMap<&HdrForm, usize> = bases[r + 1].iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut m = Matrix::zeros(bases[r + 1].len(), bases[r].len());
        for (col, f) in bases[r].iter().enumerate() {
            for (g, c) in lhdr_differential(f, &coeffs) {
                m.add_at(pos[&g], col, c, coeffs.ring());
            }
        }
        diffs.push(m);
    }
    let c = BasedComplex::new(params.ring(), 0, terms, diffs)?;
    Ok((c, bases))
}

/// The weight-`w` component of the linearized complex.
pub fn build_lhdr(params: &PParams, w: u64) -> Result<BasedComplex, HdrError> {
    Ok(lhdr_on_weights(params, &[w])?.0)
}

/// All weight components `0..=w_max`, as one block-diagonal complex.
pub fn build_lhdr_window(params: &PParams, w_max: u64) -> Result<BasedComplex, HdrError> {
    Ok(lhdr_window_with_basis(params, w_max)?.0)
}

pub fn lhdr_window_with_basis(
    params: &PParams,
    w_max: u64,
) -> Result<(BasedComplex, Vec<Vec<HdrForm>>), HdrError> {
    let weights: Vec<u64> = (0..=w_max).collect();
    lhdr_on_weights(params, &weights)
}

/// `ι′: e_I ↦ τ^{I}` from the augmentation module into degree 0, together
/// with its source complex.
pub fn iota_prime(params: &PParams, w_max: u64) -> Result<(BasedComplex, BasedComplex, ComplexMap), HdrError> {
    let (target, bases) = lhdr_window_with_basis(params, w_max)?;
    let aug = AugmentationBasis::new(params);
    let (source, kept) = aug.complex(params.ring(), w_max);
    let pos: BTreeMap<&MultiIndex, usize> = bases[0].iter().enumerate().map(|(i, f)| (&f.coeff, i)).collect();
    let one = params.ring().reduce(1);
    let mut m = Matrix::zeros(target.rank(0), source.rank(0));
    for (j, i) in kept.iter().enumerate() {
        m.set(pos[i], j, one);
    }
    let map = ComplexMap {
        components: [(0, m)].into_iter().collect(),
    };
    Ok((source, target, map))
}

/// The complex `0 -> ⊕_𝔅 R -> LHDR^0 -> ... -> LHDR^n -> 0` with the
/// augmentation in degree -1.
pub fn augmented_lhdr(params: &PParams, w_max: u64) -> Result<BasedComplex, HdrError> {
    let (source, target, map) = iota_prime(params, w_max)?;
    let mut terms = vec![source.terms[0].clone()];
    terms.extend(target.terms.iter().cloned());
    let mut diffs = vec![map.components[&0].clone()];
    diffs.extend(target.diffs.iter().cloned());
    Ok(BasedComplex::new(params.ring(), -1, terms, diffs)?)
}

fn monomial(ring: &Zpn, a: &[u128], j: &MultiIndex) -> u128 {
    a.iter()
        .zip(&j.0)
        .fold(ring.reduce(1), |acc, (&x, &e)| ring.mul(acc, ring.pow(x, e as u64)))
}

/// `β(e_I) = Σ_{J ≤ I} binom(I, J) a^J e_{I-J}` on `𝔅`, evaluated at the point `a`.
pub fn beta(params: &PParams, a: &[u128]) -> Result<Matrix, HdrError> {
    if a.len() != params.n {
        return Err(HdrError::EvalLength {
            got: a.len(),
            expected: params.n,
        });
    }
    let ring = params.ring();
    let aug = AugmentationBasis::new(params);
    let coeffs = CoeffTable::new(params, params.pm())?;
    let mut m = Matrix::zeros(aug.len(), aug.len());
    for (col, i) in aug.indices.iter().enumerate() {
        for j in i.below() {
            let c = ring.mul(coeffs.binom(i, &j), monomial(&ring, a, &j));
            let row = aug.position(&i.checked_sub(&j).unwrap()).unwrap();
            m.add_at(row, col, c, &ring);
        }
    }
    Ok(m)
}

/// `ι = ι′ ∘ β^{-1}`; not weight-homogeneous unless `a = 0`.
pub fn iota(params: &PParams, a: &[u128], w_max: u64) -> Result<(BasedComplex, BasedComplex, ComplexMap), HdrError> {
    let ring = params.ring();
    let b_inv = beta(params, a)?
        .inverse(&ring)
        .expect("β is unitriangular");
    let aug = AugmentationBasis::new(params);
    let (source, target, ip) = iota_prime(params, w_max)?;
    // Restrict β^{-1} to the kept part of 𝔅; it maps e_I into lower weights.
    let (_, kept) = aug.complex(ring, w_max);
    let idx: Vec<usize> = kept.iter().map(|i| aug.position(i).unwrap()).collect();
    let b_kept = b_inv.select(&idx, &idx);
    let m = ip.components[&0].mul(&b_kept, &ring);
    let map = ComplexMap {
        components: [(0, m)].into_iter().collect(),
    };
    Ok((source, target, map))
}

/// Result of the Künneth comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KunnethCheck {
    pub ranks_match: bool,
    pub bijective: bool,
    pub chain_map: bool,
}

impl KunnethCheck {
    pub fn passed(&self) -> bool {
        self.ranks_match && self.bijective && self.chain_map
    }
}

/// The map `(τ^{I}⊗ω) ⊗ (τ^{I'}⊗ω') ↦ τ^{(I,I')} ⊗ (ω ∧ ω')` from the tensor
/// product of two windowed linearized complexes to the one on `n + n'`
/// coordinates, with the tensor product truncated to total weight `<= w_max`.
pub fn kunneth_iso(
    px: &PParams,
    py: &PParams,
    w_max: u64,
) -> Result<(BasedComplex, BasedComplex, ComplexMap), HdrError> {
    if (px.p, px.m, px.precision) != (py.p, py.m, py.precision) {
        return Err(HdrError::ParamMismatch(format!("{px} vs {py}")));
    }
    let pz = px
        .with_n(px.n + py.n)
        .map_err(|e| HdrError::ParamMismatch(e.to_string()))?;
    let ring = px.ring();
    let (cx, bx) = lhdr_window_with_basis(px, w_max)?;
    let (cy, by) = lhdr_window_with_basis(py, w_max)?;
    let (cz, bz) = lhdr_window_with_basis(&pz, w_max)?;
    let (prod, index) = tensor_product(&cx, &cy);
    // Keep only total weight <= w_max; this is a union of weight blocks.
    let keep: Vec<Vec<usize>> = prod
        .terms
        .iter()
        .map(|t| (0..t.len()).filter(|&i| t.weights[i] <= w_max).collect())
        .collect();
    let src = prod.select_weights(|w| w <= w_max);
    let mut components = BTreeMap::new();
    for d in src.lo..=src.hi() {
        let k = (d - prod.lo) as usize;
        let Some(zb) = bz.get(d as usize) else {
            continue;
        };
        let pos: BTreeMap<&HdrForm, usize> = zb.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let mut m = Matrix::zeros(zb.len(), keep[k].len());
        for (col, &orig) in keep[k].iter().enumerate() {
            let (i, x, y) = index[k][orig];
            let fx = &bx[i as usize][x];
            let fy = &by[(d - i) as usize][y];
            let mut coeff = fx.coeff.0.clone();
            coeff.extend(&fy.coeff.0);
            let mut seq = fx.forms.clone();
            seq.extend(fy.forms.iter().map(|j| j + px.n));
            let (neg, forms) = sort_sign(&seq).expect("disjoint coordinates");
            let target = HdrForm {
                coeff: MultiIndex(coeff),
                forms,
            };
            let one = ring.reduce(1);
            m.set(pos[&target], col, if neg { ring.neg(one) } else { one });
        }
        components.insert(d, m);
    }
    Ok((src, cz, ComplexMap { components }))
}

pub fn verify_kunneth(px: &PParams, py: &PParams, w_max: u64) -> Result<KunnethCheck, HdrError> {
    let (src, tgt, f) = kunneth_iso(px, py, w_max)?;
    let ring = px.ring();
    let ranks_match = (src.lo.min(tgt.lo)..=src.hi().max(tgt.hi())).all(|d| src.rank(d) == tgt.rank(d));
    let bijective = ranks_match
        && f.components
            .values()
            .all(|m| m.rows() == m.cols() && m.inverse(&ring).is_some());
    let chain_map = check_chain_map(&f, &src, &tgt).is_ok();
    Ok(KunnethCheck {
        ranks_match,
        bijective,
        chain_map,
    })
}

/// Outcome of comparing the cosimplicial quotient with the exterior algebra.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    /// Per degree r (0, 1, 2) and weight: quotient is free of the expected rank.
    pub quotient_free: bool,
    /// The classes of `τ̄_{j_1} ⊗ ... ⊗ τ̄_{j_r}` (increasing) form a basis.
    pub wedge_basis: bool,
    /// `τ̄_i ⊗ τ̄_i` lies in the ideal.
    pub square_relation: bool,
    /// `τ̄_i ⊗ τ̄_j + τ̄_j ⊗ τ̄_i` lies in the ideal.
    pub anticommutativity: bool,
    /// `d^1` induces the zero differential on the quotient.
    pub induced_differential_zero: bool,
    /// The L-variant differential, projected to forms, equals the closed form.
    pub linearized_differential: bool,
    pub failures: Vec<String>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.quotient_free
            && self.wedge_basis
            && self.square_relation
            && self.anticommutativity
            && self.induced_differential_zero
            && self.linearized_differential
    }
}

/// Whether `I` is one of the generators of the ideal: not `0` and not `p^m 1_j`.
pub fn is_ideal_index(i: &MultiIndex, pm: u32) -> bool {
    let nz: Vec<u32> = i.0.iter().copied().filter(|&x| x != 0).collect();
    !(nz.is_empty() || (nz.len() == 1 && nz[0] == pm))
}

/// The form index `j` when `I = p^m 1_j`.
fn form_index(i: &MultiIndex, pm: u32) -> Option<usize> {
    let mut found = None;
    for (j, &x) in i.0.iter().enumerate() {
        match x {
            0 => {}
            x if x == pm && found.is_none() => found = Some(j),
            _ => return None,
        }
    }
    found
}

/// `log_p` of the cardinality of the cokernel of `m` (columns are relations).
fn coker_log_size(m: &Matrix, ring: &Zpn) -> u64 {
    let e = snf_exponents(m, ring);
    let k = e.len();
    e.iter().map(|&x| x as u64).sum::<u64>() + (m.rows() - k) as u64 * ring.exponent() as u64
}

/// Cokernel shape: (free rank, number of non-trivial torsion summands).
fn coker_shape(m: &Matrix, ring: &Zpn) -> (usize, usize) {
    let n = ring.exponent();
    let e = snf_exponents(m, ring);
    let free = e.iter().filter(|&&x| x >= n).count() + (m.rows() - e.len());
    let torsion = e.iter().filter(|&&x| x > 0 && x < n).count();
    (free, torsion)
}

fn in_span(m: &Matrix, v: &Matrix, ring: &Zpn) -> bool {
    coker_log_size(m, ring) == coker_log_size(&m.hstack(v), ring)
}

fn column_of(e: &DPElement, basis: &BTreeMap<&TensorWord, usize>, rows: usize, ring: &Zpn) -> Option<Matrix> {
    let mut m = Matrix::zeros(rows, 1);
    for (w, &c) in &e.terms {
        m.add_at(*basis.get(w)?, 0, c, ring);
    }
    Some(m)
}

/// Builds `N P^r` for `r <= 2` in weights `<= w_max`, divides by the DG-ideal
/// generated by `τ^{I}` for `I ∉ {0, p^m 1_j}`, and compares the result with
/// the exterior algebra and with the closed-form linearized differential.
pub fn crosscheck_quotient(params: &PParams, w_max: u64) -> Result<CrosscheckReport, HdrError> {
    let alg = DpAlgebra::new(*params, WeightWindow::new(w_max))?;
    let ring = params.ring();
    let pm = params.pm();
    let n = params.n;
    let mut rep = CrosscheckReport {
        quotient_free: true,
        wedge_basis: true,
        square_relation: true,
        anticommutativity: true,
        induced_differential_zero: true,
        linearized_differential: true,
        failures: Vec::new(),
    };
    let bar = |j: usize| MultiIndex::unit(n, j).scale(pm);
    let fail = |rep: &mut CrosscheckReport, msg: String| rep.failures.push(msg);

    for w in 0..=w_max {
        for r in 0..=2usize {
            let gens = words_of_weight(n, r, w, true);
            if gens.is_empty() {
                continue;
            }
            let pos: BTreeMap<&TensorWord, usize> = gens.iter().enumerate().map(|(i, g)| (g, i)).collect();
            let mut rel_cols: Vec<Matrix> = Vec::new();
            match r {
                0 => {}
                1 => {
                    for g in &gens {
                        if is_ideal_index(&g.0[0], pm) {
                            rel_cols.push(column_of(&alg.word(g.clone()), &pos, gens.len(), &ring).unwrap());
                        }
                    }
                }
                _ => {
                    for g in &gens {
                        if g.0.iter().any(|v| is_ideal_index(v, pm)) {
                            rel_cols.push(column_of(&alg.word(g.clone()), &pos, gens.len(), &ring).unwrap());
                        }
                    }
                    for i in MultiIndex::of_weight(n, w) {
                        if is_ideal_index(&i, pm) {
                            let d = alg.dga_differential(1, &alg.tau(&i))?;
                            match column_of(&d, &pos, gens.len(), &ring) {
                                Some(c) => rel_cols.push(c),
                                None => fail(&mut rep, format!("d(τ^{i}) leaves the normalized basis")),
                            }
                        }
                    }
                }
            }
            let mut rel = Matrix::zeros(gens.len(), 0);
            for c in &rel_cols {
                rel = rel.hstack(c);
            }
            let reps: Vec<TensorWord> = if w == r as u64 * pm as u64 {
                crate::hdr::subsets(n, r)
                    .into_iter()
                    .map(|s| TensorWord(s.iter().map(|&j| bar(j)).collect()))
                    .collect()
            } else {
                Vec::new()
            };
            let expected = reps.len();
            let (free, torsion) = coker_shape(&rel, &ring);
            if free != expected || torsion != 0 {
                rep.quotient_free = false;
                fail(
                    &mut rep,
                    format!("degree {r}, weight {w}: quotient free rank {free}, torsion {torsion}, expected free rank {expected}"),
                );
            }
            let mut with_reps = rel.clone();
            for t in &reps {
                with_reps = with_reps.hstack(&column_of(&alg.word(t.clone()), &pos, gens.len(), &ring).unwrap());
            }
            if coker_log_size(&with_reps, &ring) != 0 {
                rep.wedge_basis = false;
                fail(&mut rep, format!("degree {r}, weight {w}: wedge classes do not span"));
            }
            if r == 2 && w == 2 * pm as u64 {
                for i in 0..n {
                    let sq = alg.word(TensorWord(vec![bar(i), bar(i)]));
                    if !in_span(&rel, &column_of(&sq, &pos, gens.len(), &ring).unwrap(), &ring) {
                        rep.square_relation = false;
                        fail(&mut rep, format!("square of form {} not in the ideal", i + 1));
                    }
                    for j in i + 1..n {
                        let a = alg
                            .word(TensorWord(vec![bar(i), bar(j)]))
                            .add(&alg.word(TensorWord(vec![bar(j), bar(i)])), &ring);
                        if !in_span(&rel, &column_of(&a, &pos, gens.len(), &ring).unwrap(), &ring) {
                            rep.anticommutativity = false;
                            fail(&mut rep, format!("forms {} and {} do not anticommute", i + 1, j + 1));
                        }
                    }
                }
            }
            if r == 2 && w == pm as u64 {
                for j in 0..n {
                    let d = alg.dga_differential(1, &alg.tau(&bar(j)))?;
                    let col = column_of(&d, &pos, gens.len(), &ring);
                    if !col.is_some_and(|c| in_span(&rel, &c, &ring)) {
                        rep.induced_differential_zero = false;
                        fail(&mut rep, format!("d of form {} is nonzero in the quotient", j + 1));
                    }
                }
            }
        }
    }
    check_linearized(params, &alg, w_max, &mut rep)?;
    Ok(rep)
}

/// Projects `l_differential(τ^{I} ⊗ τ̄_{j_1} ⊗ ... )` to `τ^{I} ⊗ ω` and
/// compares with [`lhdr_differential`].
fn check_linearized(params: &PParams, alg: &DpAlgebra, w_max: u64, rep: &mut CrosscheckReport) -> Result<(), HdrError> {
    let ring = *alg.ring();
    let pm = params.pm();
    let bar = |j: usize| MultiIndex::unit(params.n, j).scale(pm);
    for r in 0..params.n {
        for f in lhdr_basis(params, r, 0..=w_max) {
            let mut word = vec![f.coeff.clone()];
            word.extend(f.forms.iter().map(|&j| bar(j)));
            let img = alg.l_differential(r, &alg.word(TensorWord(word)))?;
            let mut projected: BTreeMap<HdrForm, u128> = BTreeMap::new();
            let mut stray = false;
            for (w, &c) in &img.terms {
                let slots = &w.0[1..];
                if slots.iter().any(|v| v.is_zero()) {
                    stray = true;
                    continue;
                }
                if slots.iter().any(|v| is_ideal_index(v, pm)) {
                    continue;
                }
                let seq: Vec<usize> = slots.iter().map(|v| form_index(v, pm).unwrap()).collect();
                let Some((neg, forms)) = sort_sign(&seq) else {
                    continue;
                };
                let key = HdrForm {
                    coeff: w.0[0].clone(),
                    forms,
                };
                let e = projected.entry(key).or_insert(0);
                *e = ring.add(*e, if neg { ring.neg(c) } else { c });
            }
            projected.retain(|_, v| *v != 0);
            let closed: BTreeMap<HdrForm, u128> = lhdr_differential(&f, alg.coeffs()).into_iter().collect();
            if stray || projected != closed {
                rep.linearized_differential = false;
                rep.failures.push(format!("linearized differential disagrees on {f}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{homology, homology_by_weight, is_quasi_iso};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn pp(p: u64, m: u32, n: usize, big_n: u32) -> PParams {
        PParams::new(p, m, n, big_n).unwrap()
    }

    fn column(c: &BasedComplex, d: i32, label: &str) -> BTreeMap<String, i128> {
        let t = c.term(d).unwrap();
        let j = t.labels.iter().position(|l| l == label).unwrap();
        let m = c.diff(d);
        let tgt = c.term(d + 1).unwrap();
        (0..m.rows())
            .filter(|&i| m.get(i, j) != 0)
            .map(|i| (tgt.labels[i].clone(), c.ring.to_signed(m.get(i, j))))
            .collect()
    }

    #[test]
    fn exterior_ranks() {
        let ranks = |n| {
            let c = build_hdr(&pp(2, 1, n, 2));
            (0..=n as i32).map(|d| c.rank(d)).collect::<Vec<_>>()
        };
        assert_eq!(ranks(2), vec![1, 2, 1]);
        assert_eq!(ranks(3)[2], 3);
        assert!(build_hdr(&pp(3, 1, 3, 1)).diffs.iter().all(Matrix::is_zero));
    }

    #[test]
    fn lhdr_examples() {
        let c = build_lhdr(&pp(2, 1, 1, 3), 4).unwrap();
        assert_eq!(column(&c, 0, "(4);{}"), [("(2);{1}".to_string(), 3)].into());
        let c = build_lhdr(&pp(2, 1, 1, 3), 1).unwrap();
        assert!(column(&c, 0, "(1);{}").is_empty());
        let c = build_lhdr(&pp(2, 1, 2, 3), 4).unwrap();
        assert_eq!(
            column(&c, 0, "(2,2);{}"),
            [("(0,2);{1}".to_string(), 1), ("(2,0);{2}".to_string(), 1)].into()
        );
        c.check_complex().unwrap();
        let d2 = c.diff(1).mul(&c.diff(0), &c.ring);
        assert!(d2.is_zero());
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_left(0, &[1]), Some((false, vec![0, 1])));
        assert_eq!(wedge_left(1, &[0]), Some((true, vec![0, 1])));
        assert_eq!(wedge_left(1, &[1]), None);
        assert_eq!(sort_sign(&[2, 0, 1]), Some((false, vec![0, 1, 2])));
    }

    #[test]
    fn augmentation_cardinality() {
        assert_eq!(AugmentationBasis::new(&pp(2, 1, 2, 1)).len(), 4);
        assert_eq!(AugmentationBasis::new(&pp(3, 1, 2, 1)).len(), 9);
        assert_eq!(AugmentationBasis::new(&pp(2, 0, 3, 1)).len(), 1);
    }

    #[test]
    fn poincare_small() {
        let p = pp(2, 1, 1, 2);
        let aug = augmented_lhdr(&p, 8).unwrap();
        assert!(homology(&aug).unwrap().is_zero());
        let plain = build_lhdr_window(&p, 2).unwrap();
        let by_w = homology_by_weight(&plain).unwrap();
        let h0: Vec<usize> = (0..=2).map(|w| by_w[&w].free_rank(0)).collect();
        assert_eq!(h0, vec![1, 1, 0]);
        let (s, t, f) = iota_prime(&pp(2, 1, 2, 2), 10).unwrap();
        assert!(is_quasi_iso(&f, &s, &t).unwrap().is_quasi_iso);
    }

    #[test]
    fn beta_examples() {
        let p = pp(2, 1, 1, 3);
        let r = p.ring();
        assert_eq!(beta(&p, &[0]).unwrap(), Matrix::identity(2, &r));
        let b = beta(&p, &[5]).unwrap();
        // e_1 ↦ a e_0 + e_1
        assert_eq!((b.get(0, 1), b.get(1, 1)), (5, 1));
        let p2 = pp(3, 1, 2, 2);
        let b = beta(&p2, &[4, 7]).unwrap();
        assert!(b.inverse(&p2.ring()).is_some());
        let neg = beta(&p2, &[p2.ring().neg(4), p2.ring().neg(7)]).unwrap();
        assert_eq!(b.mul(&neg, &p2.ring()), Matrix::identity(9, &p2.ring()));
    }

    #[test]
    fn iota_is_quasi_iso_at_nonzero_point() {
        let p = pp(3, 1, 2, 2);
        let (s, t, f) = iota(&p, &[1, 5], 6).unwrap();
        assert!(is_quasi_iso(&f, &s, &t).unwrap().is_quasi_iso);
    }

    #[test]
    fn kunneth_small() {
        let p = pp(2, 1, 1, 2);
        let k = verify_kunneth(&p, &p, 6).unwrap();
        assert!(k.passed(), "{k:?}");
        let q = pp(2, 1, 2, 2);
        assert!(verify_kunneth(&q, &p, 5).unwrap().passed());
        assert!(matches!(
            kunneth_iso(&p, &pp(3, 1, 1, 2), 3),
            Err(HdrError::ParamMismatch(_))
        ));
    }

    #[test]
    fn crosscheck_small() {
        let r = crosscheck_quotient(&pp(2, 1, 1, 2), 4).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let r = crosscheck_quotient(&pp(2, 1, 2, 2), 4).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn level_zero_coefficients_are_signs() {
        let c = build_lhdr_window(&pp(3, 0, 2, 2), 6).unwrap();
        for d in &c.diffs {
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    let v = c.ring.to_signed(d.get(i, j));
                    assert!(v.abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn ideal_indices() {
        assert!(!is_ideal_index(&mi(&[0, 0]), 2));
        assert!(!is_ideal_index(&mi(&[0, 2]), 2));
        assert!(is_ideal_index(&mi(&[1, 1]), 2));
        assert!(is_ideal_index(&mi(&[4, 0]), 2));
    }
}
