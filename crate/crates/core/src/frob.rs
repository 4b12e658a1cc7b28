//! Frobenius descent on linearized complexes over `F_p`: the level-raising
//! pullback `τ'^{I} ↦ τ^{p^s I}` and the comparison map
//! `φ = ⊕_J F_J: ⊕_{J ∈ 𝔅^{(s)}} L^{(m)} -> L^{(m+s)}`, where `F_J` is
//! multiplication by `τ^{J}` after the pullback.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, CoeffTable};
use crate::hdr::{is_ideal_index, lhdr_basis, lhdr_differential, lhdr_window_with_basis, HdrError, HdrForm};
use crate::homology::{
    check_chain_map, is_quasi_iso, BasedComplex, ComplexMap, HomologyError, HomologySummary, Term,
};
use crate::matrix::Matrix;
use crate::params::{MultiIndex, PParams, ParamError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrobError {
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Hdr(#[from] HdrError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobParams {
    pub base: PParams,
    pub s: u32,
}

impl FrobParams {
    pub fn new(base: PParams, s: u32) -> Result<Self, FrobError> {
        if s == 0 {
            return Err(FrobError::LevelMismatch("s must be at least 1".into()));
        }
        if base.precision != 1 {
            return Err(FrobError::LevelMismatch(format!(
                "descent is computed over F_p only, got N={}",
                base.precision
            )));
        }
        let fp = FrobParams { base, s };
        fp.target()?;
        Ok(fp)
    }

    /// The same coordinates at level `m + s`.
    pub fn target(&self) -> Result<PParams, FrobError> {
        Ok(self.base.with_level(self.base.m + self.s)?)
    }

    /// `p^s`.
    pub fn ps(&self) -> u32 {
        (self.base.p as u32).pow(self.s)
    }
}

fn pullback_form(f: &HdrForm, ps: u32) -> HdrForm {
    HdrForm {
        coeff: f.coeff.scale(ps),
        forms: f.forms.clone(),
    }
}

fn positions(basis: &[HdrForm]) -> BTreeMap<&HdrForm, usize> {
    basis.iter().enumerate().map(|(i, f)| (f, i)).collect()
}

/// `F^*` from the level-`m` window of weight `≤ w_max` into the level-`(m+s)`
/// window of weight `≤ p^s w_max`.
pub fn frobenius_pullback(
    fp: &FrobParams,
    w_max: u64,
) -> Result<(BasedComplex, BasedComplex, ComplexMap), FrobError> {
    let ps = fp.ps();
    let (src, sb) = lhdr_window_with_basis(&fp.base, w_max)?;
    let (tgt, tb) = lhdr_window_with_basis(&fp.target()?, ps as u64 * w_max)?;
    let one = fp.base.ring().reduce(1);
    let mut components = BTreeMap::new();
    for r in 0..=fp.base.n {
        let pos = positions(&tb[r]);
        let mut m = Matrix::zeros(tb[r].len(), sb[r].len());
        for (col, f) in sb[r].iter().enumerate() {
            m.set(pos[&pullback_form(f, ps)], col, one);
        }
        components.insert(r as i32, m);
    }
    Ok((src, tgt, ComplexMap { components }))
}

/// `F^*` sends non-ideal indices to non-ideal indices, so it descends to the quotient.
pub fn pullback_preserves_ideal(fp: &FrobParams, w_max: u64) -> Result<bool, FrobError> {
    let pm = fp.base.pm();
    let pms = fp.target()?.pm();
    let ps = fp.ps();
    Ok((0..=w_max)
        .flat_map(|w| MultiIndex::of_weight(fp.base.n, w))
        .all(|i| !is_ideal_index(&i, pm) || is_ideal_index(&i.scale(ps), pms)))
}

/// Source of `φ`: copies of the level-`m` complex indexed by `J ∈ 𝔅^{(s)}`,
/// with `(J, x)` of weight `|J| + p^s w(x)`; every weight `≤ t_max` is complete.
pub struct PhiSource {
    pub complex: BasedComplex,
    pub bases: Vec<Vec<(MultiIndex, HdrForm)>>,
}

fn phi_source(fp: &FrobParams, t_max: u64) -> Result<PhiSource, FrobError> {
    let params = &fp.base;
    let pm = params.pm();
    let ps = fp.ps() as u64;
    let copies = MultiIndex::box_below(params.n, fp.ps());
    let coeffs = CoeffTable::new(params, (t_max / ps).max(pm as u64) as u32)?;
    let mut bases: Vec<Vec<(MultiIndex, HdrForm)>> = Vec::new();
    for r in 0..=params.n {
        let mut b = Vec::new();
        for t in 0..=t_max {
            for j in &copies {
                let Some(rest) = t.checked_sub(j.weight()) else {
                    continue;
                };
                if rest % ps != 0 {
                    continue;
                }
                for f in lhdr_basis(params, r, std::iter::once(rest / ps)) {
                    b.push((j.clone(), f));
                }
            }
        }
        bases.push(b);
    }
    let terms = bases
        .iter()
        .map(|b| {
            Term::new(
                b.iter().map(|(j, f)| format!("J{j}:{f}")).collect(),
                b.iter().map(|(j, f)| j.weight() + ps * f.weight(pm)).collect(),
            )
        })
        .collect();
    let ring = params.ring();
    let mut diffs = Vec::new();
    for r in 0..params.n {
        let pos: BTreeMap<&(MultiIndex, HdrForm), usize> =
            bases[r + 1].iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut m = Matrix::zeros(bases[r + 1].len(), bases[r].len());
        for (col, (j, f)) in bases[r].iter().enumerate() {
            for (g, c) in lhdr_differential(f, &coeffs) {
                m.add_at(pos[&(j.clone(), g)], col, c, &ring);
            }
        }
        diffs.push(m);
    }
    Ok(PhiSource {
        complex: BasedComplex::new(ring, 0, terms, diffs)?,
        bases,
    })
}

/// `φ` on all weights `≤ t_max` of the target, with its source and target.
pub fn phi_map(
    fp: &FrobParams,
    t_max: u64,
) -> Result<(PhiSource, BasedComplex, ComplexMap), FrobError> {
    let ps = fp.ps();
    let target = fp.target()?;
    let src = phi_source(fp, t_max)?;
    let (tgt, tb) = lhdr_window_with_basis(&target, t_max)?;
    let coeffs = CoeffTable::new(&target, t_max.max(target.pm() as u64) as u32)?;
    let mut components = BTreeMap::new();
    for (r, tb_r) in tb.iter().enumerate().take(fp.base.n + 1) {
        let pos = positions(tb_r);
        let mut m = Matrix::zeros(tb_r.len(), src.bases[r].len());
        for (col, (j, f)) in src.bases[r].iter().enumerate() {
            let g = pullback_form(f, ps);
            let c = coeffs.mul_coeff(j, &g.coeff);
            let image = HdrForm {
                coeff: g.coeff.add(j),
                forms: g.forms,
            };
            m.set(pos[&image], col, c);
        }
        components.insert(r as i32, m);
    }
    Ok((src, tgt, ComplexMap { components }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobReport {
    pub p: u64,
    pub m: u32,
    pub s: u32,
    pub n: usize,
    pub source_weight_max: u64,
    pub target_weight_max: u64,
    pub pullback_chain_map: bool,
    pub pullback_preserves_ideal: bool,
    pub phi_chain_map: bool,
    pub cone_acyclic: bool,
    pub cone_homology: Option<HomologySummary>,
    pub diagnostics: Vec<String>,
}

impl FrobReport {
    pub fn passed(&self) -> bool {
        self.pullback_chain_map && self.pullback_preserves_ideal && self.phi_chain_map && self.cone_acyclic
    }
}

/// Runs the pullback and `φ` checks for source weights `≤ w_src`. The target
/// window `p^s (w_src + 1) - 1` is the largest one whose preimages all have
/// source weight `≤ w_src` in the `J = 0` copy.
pub fn verify_frobenius_descent(fp: &FrobParams, w_src: u64) -> Result<FrobReport, FrobError> {
    let ps = fp.ps() as u64;
    let t_max = ps * (w_src + 1) - 1;
    let mut diagnostics = Vec::new();

    let (src, tgt, f) = frobenius_pullback(fp, w_src)?;
    let pullback_chain_map = match check_chain_map(&f, &src, &tgt) {
        Ok(()) => true,
        Err(e) => {
            diagnostics.push(format!("pullback: {e}"));
            false
        }
    };
    let preserves = pullback_preserves_ideal(fp, w_src)?;
    if !preserves {
        diagnostics.push("pullback sends a non-ideal index into the ideal".into());
    }

    let (psrc, ptgt, phi) = phi_map(fp, t_max)?;
    let (phi_chain_map, cone_acyclic, cone_homology) = match is_quasi_iso(&phi, &psrc.complex, &ptgt) {
        Ok(rep) => {
            if !rep.is_quasi_iso {
                diagnostics.push("cone of φ has nonzero homology".into());
            }
            (true, rep.is_quasi_iso, Some(rep.cone_homology))
        }
        Err(e) => {
            diagnostics.push(format!("φ: {e}"));
            (false, false, None)
        }
    };
    Ok(FrobReport {
        p: fp.base.p,
        m: fp.base.m,
        s: fp.s,
        n: fp.base.n,
        source_weight_max: w_src,
        target_weight_max: t_max,
        pullback_chain_map,
        pullback_preserves_ideal: preserves,
        phi_chain_map,
        cone_acyclic,
        cone_homology,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::cone;

    fn fp(p: u64, m: u32, s: u32, n: usize) -> FrobParams {
        FrobParams::new(PParams::new(p, m, n, 1).unwrap(), s).unwrap()
    }

    #[test]
    fn requires_mod_p() {
        let base = PParams::new(2, 0, 1, 2).unwrap();
        assert!(matches!(FrobParams::new(base, 1), Err(FrobError::LevelMismatch(_))));
        let base = PParams::new(2, 0, 1, 1).unwrap();
        assert!(FrobParams::new(base, 0).is_err());
    }

    #[test]
    fn pullback_on_generators() {
        let f = fp(2, 0, 1, 1);
        let (src, tgt, map) = frobenius_pullback(&f, 3).unwrap();
        let m0 = &map.components[&0];
        let col = src.terms[0].labels.iter().position(|l| l == "(1);{}").unwrap();
        let row = tgt.terms[0].labels.iter().position(|l| l == "(2);{}").unwrap();
        assert_eq!(m0.get(row, col), 1);
        let col0 = src.terms[0].labels.iter().position(|l| l == "(0);{}").unwrap();
        let row0 = tgt.terms[0].labels.iter().position(|l| l == "(0);{}").unwrap();
        assert_eq!(m0.get(row0, col0), 1);
        for (j, &w) in src.terms[0].weights.iter().enumerate() {
            let i = (0..m0.rows()).find(|&i| m0.get(i, j) != 0).unwrap();
            assert_eq!(tgt.terms[0].weights[i], 2 * w);
        }
        assert!(check_chain_map(&map, &src, &tgt).is_ok());
    }

    #[test]
    fn phi_components() {
        let f = fp(2, 0, 1, 1);
        let (src, tgt, phi) = phi_map(&f, 5).unwrap();
        // J = (1) in degree 1 lands on τ^{(1)+2I} ⊗ τ̄, not on zero.
        let col = src.bases[1]
            .iter()
            .position(|(j, g)| j.0 == [1] && g.coeff.0 == [0])
            .unwrap();
        let row = tgt.terms[1].labels.iter().position(|l| l == "(1);{1}").unwrap();
        assert_eq!(phi.components[&1].get(row, col), 1);
        assert!(check_chain_map(&phi, &src.complex, &tgt).is_ok());
    }

    #[test]
    fn dropping_positive_degree_components_breaks_chain_map() {
        let f = fp(2, 0, 1, 1);
        let (src, tgt, mut phi) = phi_map(&f, 5).unwrap();
        let m1 = phi.components.get_mut(&1).unwrap();
        for (col, (j, _)) in src.bases[1].iter().enumerate() {
            if !j.is_zero() {
                for row in 0..m1.rows() {
                    m1.set(row, col, 0);
                }
            }
        }
        assert!(check_chain_map(&phi, &src.complex, &tgt).is_err());
    }

    #[test]
    fn descent_small_grid() {
        for (p, m, s, n) in [(2, 0, 1, 1), (3, 0, 1, 1), (2, 1, 1, 1), (2, 0, 1, 2)] {
            let rep = verify_frobenius_descent(&fp(p, m, s, n), 4).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn zero_map_is_not_quasi_iso() {
        let f = fp(2, 0, 1, 1);
        let (src, tgt, _) = phi_map(&f, 3).unwrap();
        let c = cone(&ComplexMap::zero(), &src.complex, &tgt);
        assert!(!crate::homology::homology(&c).unwrap().is_zero());
    }
}
