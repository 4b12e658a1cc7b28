//! Sparse multivariate polynomials over `Z/p^N`.

use std::collections::BTreeMap;
use std::fmt;

use crate::zpn::Zpn;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u128>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: u128) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exp: Vec<u32>, c: u128) -> Self {
        let mut p = Poly::zero(exp.len());
        if c != 0 {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize, ring: &Zpn) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, ring.reduce(1))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &u128)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u64).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: u128, ring: &Zpn) {
        if c == 0 {
            return;
        }
        let v = self.terms.entry(exp.clone()).or_insert(0);
        *v = ring.add(*v, c);
        if *v == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &Poly, ring: &Zpn) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c, ring);
        }
        out
    }

    pub fn sub(&self, other: &Poly, ring: &Zpn) -> Poly {
        self.add(&other.scale(ring.neg(ring.reduce(1)), ring), ring)
    }

    pub fn scale(&self, c: u128, ring: &Zpn) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, &v) in &self.terms {
            out.add_term(e.clone(), ring.mul(c, v), ring);
        }
        out
    }

    pub fn mul(&self, other: &Poly, ring: &Zpn) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ring.mul(ca, cb), ring);
            }
        }
        out
    }

    pub fn pow(&self, k: u32, ring: &Zpn) -> Poly {
        let mut acc = Poly::constant(self.nvars, ring.reduce(1));
        for _ in 0..k {
            acc = acc.mul(self, ring);
        }
        acc
    }

    /// `∏_i x_{offset+i}^{e_i}`.
    pub fn monomial_in(nvars: usize, offset: usize, e: &[u32], ring: &Zpn) -> Poly {
        let mut exp = vec![0; nvars];
        exp[offset..offset + e.len()].copy_from_slice(e);
        Poly::monomial(exp, ring.reduce(1))
    }

    pub fn display(&self, ring: &Zpn) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(e, &c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(i, &x)| if x == 1 { format!("t{}", i + 1) } else { format!("t{}^{x}", i + 1) })
                    .collect();
                let c = ring.to_signed(c);
                if mono.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{}", mono.join("*"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let r = Zpn::new(3, 2).unwrap();
        let x = Poly::var(2, 0, &r);
        let y = Poly::var(2, 1, &r);
        let s = x.add(&y, &r);
        let sq = s.pow(2, &r);
        let expect = x.mul(&x, &r).add(&x.mul(&y, &r).scale(2, &r), &r).add(&y.mul(&y, &r), &r);
        assert_eq!(sq, expect);
        assert!(s.sub(&s, &r).is_zero());
        assert_eq!(sq.degree(), 2);
        assert_eq!(x.pow(9, &r).scale(9, &r), Poly::zero(2));
    }
}
