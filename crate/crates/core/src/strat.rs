//! The hyper m-PD stratification `ε: P ⊗ M -> M ⊗ P` with `M = P`, its
//! cocycle condition, and the horizontality of the Poincaré augmentation.
//!
//! Grade-2 words `(U, I)` on the source side read `τ^{U} ⊗ τ^{I}` with the
//! stratification factor on the left; on the target side `(V, K)` reads
//! `τ^{V} ⊗ τ^{K}` with the stratification factor on the right. The map is
//! `P`-linear and sends `1 ⊗ τ^{I}` to `Σ_V qbinom(I,V) τ^{V} ⊗ (-τ)^{I-V}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dpcore::{words_of_weight, DPElement, DpAlgebra, DpError, TensorWord, WeightWindow};
use crate::hdr::AugmentationBasis;
use crate::matrix::Matrix;
use crate::params::{MultiIndex, PParams};
use crate::poly::Poly;
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StratError {
    #[error(transparent)]
    Dp(#[from] DpError),
}

/// Matrix of `ε` on all grade-2 words of weight at most `w_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratMatrix {
    pub w_max: u64,
    pub basis: Vec<TensorWord>,
    pub matrix: Matrix,
    #[serde(skip)]
    alg: Option<DpAlgebra>,
}

fn grade2_basis(n: usize, w_max: u64) -> Vec<TensorWord> {
    (0..=w_max).flat_map(|w| words_of_weight(n, 2, w, false)).collect()
}

/// `ε(τ^{U} ⊗ τ^{I}) = Σ_V qbinom(I,V) (-1)^{|I-V|} τ^{V} ⊗ τ^{I-V} τ^{U}`.
pub fn eps_word(alg: &DpAlgebra, w: &TensorWord) -> DPElement {
    let ring = alg.ring();
    let (u, i) = (&w.0[0], &w.0[1]);
    let mut out = DPElement::zero(2);
    for v in i.below() {
        let k = i.checked_sub(&v).unwrap();
        let c = ring.mul(alg.coeffs().qbinom(i, &v), ring.sign(k.weight()));
        let c = ring.mul(c, alg.coeffs().mul_coeff(&k, u));
        out.add_term(TensorWord(vec![v, k.add(u)]), c, ring);
    }
    out
}

/// `ε^{-1}(τ^{W} ⊗ τ^{U}) = Σ_V qbinom(W,V) τ^{W-V} τ^{U} ⊗ τ^{V}`.
pub fn eps_inverse_word(alg: &DpAlgebra, w: &TensorWord) -> DPElement {
    let ring = alg.ring();
    let (wi, u) = (&w.0[0], &w.0[1]);
    let mut out = DPElement::zero(2);
    for v in wi.below() {
        let k = wi.checked_sub(&v).unwrap();
        let c = ring.mul(alg.coeffs().qbinom(wi, &v), alg.coeffs().mul_coeff(&k, u));
        out.add_term(TensorWord(vec![k.add(u), v]), c, ring);
    }
    out
}

pub fn stratification_eps(params: &PParams, w_max: u64) -> Result<StratMatrix, StratError> {
    let alg = DpAlgebra::new(*params, WeightWindow::new(w_max))?;
    let basis = grade2_basis(params.n, w_max);
    let matrix = alg.matrix_of(&basis, &basis, |w| eps_word(&alg, w))?;
    Ok(StratMatrix {
        w_max,
        basis,
        matrix,
        alg: Some(alg),
    })
}

impl StratMatrix {
    fn alg(&self) -> &DpAlgebra {
        self.alg.as_ref().expect("constructed by stratification_eps")
    }

    pub fn ring(&self) -> &Zpn {
        self.alg().ring()
    }

    /// Image of `1 ⊗ τ^{I}`.
    pub fn apply_unit(&self, i: &MultiIndex) -> DPElement {
        let w = TensorWord(vec![MultiIndex::zero(i.len()), i.clone()]);
        eps_word(self.alg(), &w)
    }

    pub fn is_weight_preserving(&self) -> bool {
        (0..self.basis.len()).all(|j| {
            (0..self.basis.len())
                .all(|i| self.matrix.get(i, j) == 0 || self.basis[i].weight() == self.basis[j].weight())
        })
    }

    /// Killing the positive-weight stratification slot on both sides turns
    /// `ε` into the identity of `M`.
    pub fn satisfies_axiom(&self) -> bool {
        let src: Vec<usize> = (0..self.basis.len()).filter(|&j| self.basis[j].0[0].is_zero()).collect();
        let tgt: Vec<usize> = (0..self.basis.len()).filter(|&i| self.basis[i].0[1].is_zero()).collect();
        let reduced = self.matrix.select(&tgt, &src);
        let expected = Matrix::from_fn(tgt.len(), src.len(), |i, j| {
            if self.basis[tgt[i]].0[0] == self.basis[src[j]].0[1] {
                self.ring().reduce(1)
            } else {
                0
            }
        });
        reduced == expected
    }

    /// The closed-form inverse, checked on both sides.
    pub fn inverse_closed_form(&self) -> Result<Option<Matrix>, StratError> {
        let alg = self.alg();
        let inv = alg.matrix_of(&self.basis, &self.basis, |w| eps_inverse_word(alg, w))?;
        let id = Matrix::identity(self.basis.len(), alg.ring());
        let ok = self.matrix.mul(&inv, alg.ring()) == id && inv.mul(&self.matrix, alg.ring()) == id;
        Ok(ok.then_some(inv))
    }

    /// Invertible per window, with the Gauss-Jordan inverse equal to the closed form.
    pub fn is_invertible(&self) -> Result<bool, StratError> {
        let closed = self.inverse_closed_form()?;
        let gj = self.matrix.inverse(self.ring());
        Ok(matches!((closed, gj), (Some(a), Some(b)) if a == b))
    }
}

/// A failing input together with the two values that should agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub input: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Words `(M, a, b)` of `M ⊗ P(2)`. `ε` pulled back along the second projection
/// acts through slot `b`.
fn eps_on_b(alg: &DpAlgebra, w: &TensorWord) -> DPElement {
    let ring = alg.ring();
    let (m, h1, h2) = (&w.0[0], &w.0[1], &w.0[2]);
    let mut out = DPElement::zero(3);
    for v in m.below() {
        let k = m.checked_sub(&v).unwrap();
        let c = ring.mul(alg.coeffs().qbinom(m, &v), ring.sign(k.weight()));
        let c = ring.mul(c, alg.coeffs().mul_coeff(h2, &k));
        out.add_term(TensorWord(vec![v, h1.clone(), h2.add(&k)]), c, ring);
    }
    out
}

fn eps_on_a(alg: &DpAlgebra, w: &TensorWord) -> DPElement {
    let ring = alg.ring();
    let (m, h1, h2) = (&w.0[0], &w.0[1], &w.0[2]);
    let mut out = DPElement::zero(3);
    for v in m.below() {
        let k = m.checked_sub(&v).unwrap();
        let c = ring.mul(alg.coeffs().qbinom(m, &v), ring.sign(k.weight()));
        let c = ring.mul(c, alg.coeffs().mul_coeff(h1, &k));
        out.add_term(TensorWord(vec![v, h1.add(&k), h2.clone()]), c, ring);
    }
    out
}

/// `ε` pulled back along the outer projection: apply `ε` to the module slot,
/// comultiply the stratification slot, then multiply in `(a, b)`.
fn eps_on_ab(alg: &DpAlgebra, w: &TensorWord) -> Result<DPElement, DpError> {
    let (m, h1, h2) = (&w.0[0], &w.0[1], &w.0[2]);
    let n = m.len();
    let base = eps_word(alg, &TensorWord(vec![MultiIndex::zero(n), m.clone()]));
    let spread = alg.face_map(2, 2, &base)?;
    let right = alg.word(TensorWord(vec![MultiIndex::zero(n), h1.clone(), h2.clone()]));
    alg.mul(&spread, &right)
}

fn apply_linear(alg: &DpAlgebra, x: &DPElement, f: impl Fn(&TensorWord) -> DPElement) -> DPElement {
    let mut out = DPElement::zero(x.grade);
    for (w, &c) in &x.terms {
        out.add_scaled(&f(w), c, alg.ring());
    }
    out
}

/// Cocycle identity `ε_{ab} = ε_a ∘ ε_b` on every grade-3 word of weight `≤ w_max`.
pub fn verify_cocycle(params: &PParams, w_max: u64) -> Result<IdentityReport, StratError> {
    let alg = DpAlgebra::new(*params, WeightWindow::new(w_max))?;
    let mut checked = 0;
    for w in 0..=w_max {
        for word in words_of_weight(params.n, 3, w, false) {
            let lhs = eps_on_ab(&alg, &word)?;
            let rhs = apply_linear(&alg, &eps_on_b(&alg, &word), |x| eps_on_a(&alg, x));
            checked += 1;
            if lhs != rhs {
                return Ok(IdentityReport {
                    checked,
                    counterexample: Some(Counterexample {
                        input: word.to_string(),
                        lhs: lhs.display(alg.ring()),
                        rhs: rhs.display(alg.ring()),
                    }),
                });
            }
        }
    }
    Ok(IdentityReport {
        checked,
        counterexample: None,
    })
}

/// An element of `P ⊗ P` with coefficients in `R[t_1..t_n]`.
pub type PolyTensor = BTreeMap<TensorWord, Poly>;

fn pt_add(out: &mut PolyTensor, w: TensorWord, p: &Poly, ring: &Zpn) {
    if p.is_zero() {
        return;
    }
    let n = p.nvars();
    let e = out.entry(w.clone()).or_insert_with(|| Poly::zero(n));
    *e = e.add(p, ring);
    if e.is_zero() {
        out.remove(&w);
    }
}

fn pt_display(x: &PolyTensor, ring: &Zpn) -> String {
    if x.is_empty() {
        return "0".into();
    }
    x.iter()
        .map(|(w, p)| format!("({})*[{}]", p.display(ring), w))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn factorial_mod(ring: &Zpn, k: u64) -> u128 {
    (2..=k).fold(ring.reduce(1), |acc, x| ring.mul(acc, ring.reduce(x as u128)))
}

/// `q(A)! = ∏_j ⌊a_j / p^m⌋!`, so that the ordinary power `τ^A` equals `q(A)! τ^{A}`.
fn q_factorial(ring: &Zpn, a: &MultiIndex, pm: u32) -> u128 {
    a.0.iter()
        .fold(ring.reduce(1), |acc, &x| ring.mul(acc, factorial_mod(ring, (x / pm) as u64)))
}

/// Horizontality of the augmentation, computed with polynomial coefficients.
pub struct Horizontality {
    alg: DpAlgebra,
    aug: AugmentationBasis,
    /// `β^{-1}(e_I) = Σ_L c_{I,L}(t) e_L`.
    beta_inv: BTreeMap<MultiIndex, BTreeMap<MultiIndex, Poly>>,
}

impl Horizontality {
    pub fn new(params: &PParams, w_max: u64) -> Result<Self, StratError> {
        let alg = DpAlgebra::new(*params, WeightWindow::new(w_max))?;
        let aug = AugmentationBasis::new(params);
        let ring = *alg.ring();
        let n = params.n;
        let mut order = aug.indices.clone();
        order.sort_by_key(|i| (i.weight(), i.clone()));
        let mut beta_inv: BTreeMap<MultiIndex, BTreeMap<MultiIndex, Poly>> = BTreeMap::new();
        // Back-substitution: β^{-1}e_I = e_I - Σ_{0<J≤I} binom(I,J) t^J β^{-1}e_{I-J}.
        for i in &order {
            let mut col: BTreeMap<MultiIndex, Poly> = BTreeMap::new();
            col.insert(i.clone(), Poly::constant(n, ring.reduce(1)));
            for j in i.below().into_iter().filter(|j| !j.is_zero()) {
                let c = ring.neg(alg.coeffs().binom(i, &j));
                let tj = Poly::monomial(j.0.clone(), c);
                for (l, p) in &beta_inv[&i.checked_sub(&j).unwrap()] {
                    let e = col.entry(l.clone()).or_insert_with(|| Poly::zero(n));
                    *e = e.add(&tj.mul(p, &ring), &ring);
                }
            }
            col.retain(|_, p| !p.is_zero());
            beta_inv.insert(i.clone(), col);
        }
        Ok(Horizontality { alg, aug, beta_inv })
    }

    pub fn beta_inverse(&self, i: &MultiIndex) -> &BTreeMap<MultiIndex, Poly> {
        &self.beta_inv[i]
    }

    fn ring(&self) -> &Zpn {
        self.alg.ring()
    }

    fn n(&self) -> usize {
        self.alg.n()
    }

    /// `(t - τ)^E = Σ_{A ≤ E} binom(E,A) (-1)^{|A|} q(A)! t^{E-A} τ^{A}`.
    fn shifted_power(&self, e: &MultiIndex) -> Vec<(MultiIndex, Poly)> {
        let ring = self.ring();
        let pm = self.alg.params().pm();
        e.below()
            .into_iter()
            .map(|a| {
                let c = ring.mul(self.alg.coeffs().binom(e, &a), ring.sign(a.weight()));
                let c = ring.mul(c, q_factorial(ring, &a, pm));
                let rest = e.checked_sub(&a).unwrap();
                (a, Poly::monomial(rest.0, c))
            })
            .collect()
    }

    /// `ι(t^J e_I) = t^J Σ_L c_{I,L}(t) τ^{L}` as coefficients of `τ^{L}`.
    fn iota(&self, j: &MultiIndex, i: &MultiIndex) -> Vec<(MultiIndex, Poly)> {
        let tj = Poly::monomial(j.0.clone(), self.ring().reduce(1));
        self.beta_inv[i]
            .iter()
            .map(|(l, p)| (l.clone(), tj.mul(p, self.ring())))
            .collect()
    }

    /// `ε ∘ (1 ⊗ ι)` on `1 ⊗ t^J e_I`.
    pub fn path_top(&self, j: &MultiIndex, i: &MultiIndex) -> PolyTensor {
        let ring = *self.ring();
        let alg = &self.alg;
        let mut out = PolyTensor::new();
        for (l, f) in self.iota(j, i) {
            // 1 ⊗ f(t) τ^{L} = f(t - τ) ⊗ τ^{L}; ε moves f(t - τ) to the right slot.
            let image = eps_word(alg, &TensorWord(vec![MultiIndex::zero(self.n()), l.clone()]));
            for (exp, &c) in f.terms() {
                for (a, tpart) in self.shifted_power(&MultiIndex(exp.clone())) {
                    let coeff = tpart.scale(c, &ring);
                    for (w, &d) in &image.terms {
                        let (v, k) = (&w.0[0], &w.0[1]);
                        let e = ring.mul(d, alg.coeffs().mul_coeff(k, &a));
                        pt_add(&mut out, TensorWord(vec![v.clone(), k.add(&a)]), &coeff.scale(e, &ring), &ring);
                    }
                }
            }
        }
        out
    }

    /// `(ι ⊗ 1) ∘ ε_F` on `1 ⊗ t^J e_I`, where `ε_F(1 ⊗ e_I) = e_I ⊗ 1`.
    pub fn path_bottom(&self, j: &MultiIndex, i: &MultiIndex) -> PolyTensor {
        let ring = *self.ring();
        let mut out = PolyTensor::new();
        let zero = MultiIndex::zero(self.n());
        for (a, tpart) in self.shifted_power(j) {
            for (l, f) in self.iota(&zero, i) {
                pt_add(&mut out, TensorWord(vec![l, a.clone()]), &tpart.mul(&f, &ring), &ring);
            }
        }
        out
    }

    fn compare(
        &self,
        input: &[(MultiIndex, MultiIndex, u128)],
        label: String,
    ) -> Option<Counterexample> {
        let ring = *self.ring();
        let mut top = PolyTensor::new();
        let mut bottom = PolyTensor::new();
        for (j, i, c) in input {
            for (w, p) in self.path_top(j, i) {
                pt_add(&mut top, w, &p.scale(*c, &ring), &ring);
            }
            for (w, p) in self.path_bottom(j, i) {
                pt_add(&mut bottom, w, &p.scale(*c, &ring), &ring);
            }
        }
        (top != bottom).then(|| Counterexample {
            input: label,
            lhs: pt_display(&top, &ring),
            rhs: pt_display(&bottom, &ring),
        })
    }

    /// The basis section `1 ⊗ Σ_J binom(I,J) t^J e_{I-J}` as `(J, I-J, coefficient)`.
    pub fn new_basis(&self, i: &MultiIndex) -> Vec<(MultiIndex, MultiIndex, u128)> {
        i.below()
            .into_iter()
            .map(|j| {
                let c = self.alg.coeffs().binom(i, &j);
                let rest = i.checked_sub(&j).unwrap();
                (j, rest, c)
            })
            .collect()
    }

    /// Both paths agree on every basis section, and on every `1 ⊗ t^J e_I`
    /// with `|I| + |J| ≤ w_max`.
    pub fn verify(&self) -> IdentityReport {
        let w_max = self.alg.window().w_max;
        let mut checked = 0;
        for i in &self.aug.indices {
            if i.weight() > w_max {
                continue;
            }
            checked += 1;
            let label = format!("1⊗β(e{})", i);
            if let Some(c) = self.compare(&self.new_basis(i), label) {
                return IdentityReport {
                    checked,
                    counterexample: Some(c),
                };
            }
            for wj in 0..=w_max - i.weight() {
                for j in MultiIndex::of_weight(self.n(), wj) {
                    checked += 1;
                    let label = format!("1⊗t^{}e{}", j, i);
                    let one = self.ring().reduce(1);
                    if let Some(c) = self.compare(&[(j.clone(), i.clone(), one)], label) {
                        return IdentityReport {
                            checked,
                            counterexample: Some(c),
                        };
                    }
                }
            }
        }
        IdentityReport {
            checked,
            counterexample: None,
        }
    }
}

/// `Σ_{J≤L} binom(L,J) x^{L-J} (y - x)^J = y^L` in `R[x_1..x_n, y_1..y_n]`
/// for every `|L| ≤ w_max`.
pub fn verify_binomial_cancellation(params: &PParams, w_max: u64) -> Result<IdentityReport, StratError> {
    let alg = DpAlgebra::new(*params, WeightWindow::new(w_max))?;
    let ring = *alg.ring();
    let n = params.n;
    let vars = 2 * n;
    let diff: Vec<Poly> = (0..n)
        .map(|k| Poly::var(vars, n + k, &ring).sub(&Poly::var(vars, k, &ring), &ring))
        .collect();
    let mut checked = 0;
    for w in 0..=w_max {
        for l in MultiIndex::of_weight(n, w) {
            let mut lhs = Poly::zero(vars);
            for j in l.below() {
                let rest = l.checked_sub(&j).unwrap();
                let mut term = Poly::monomial_in(vars, 0, &rest.0, &ring).scale(alg.coeffs().binom(&l, &j), &ring);
                for (k, &e) in j.0.iter().enumerate() {
                    term = term.mul(&diff[k].pow(e, &ring), &ring);
                }
                lhs = lhs.add(&term, &ring);
            }
            let rhs = Poly::monomial_in(vars, n, &l.0, &ring);
            checked += 1;
            if lhs != rhs {
                return Ok(IdentityReport {
                    checked,
                    counterexample: Some(Counterexample {
                        input: l.to_string(),
                        lhs: lhs.display(&ring),
                        rhs: rhs.display(&ring),
                    }),
                });
            }
        }
    }
    Ok(IdentityReport {
        checked,
        counterexample: None,
    })
}

/// Horizontality square and the binomial cancellation behind it.
pub fn verify_horizontality(params: &PParams, w_max: u64) -> Result<IdentityReport, StratError> {
    let micro = verify_binomial_cancellation(params, w_max)?;
    if !micro.passed() {
        return Ok(micro);
    }
    let square = Horizontality::new(params, w_max)?.verify();
    Ok(IdentityReport {
        checked: micro.checked + square.checked,
        counterexample: square.counterexample,
    })
}
