//! Global parameters (prime, level, coordinate count, precision) and multi-indices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("{0} is not a prime number")]
    NotPrime(u64),
    #[error("parameter {name}={value} outside the configured bound {bound}")]
    OutOfBounds {
        name: &'static str,
        value: u64,
        bound: u64,
    },
    #[error("parameter {name} must be at least {min}, got {value}")]
    TooSmall {
        name: &'static str,
        value: u64,
        min: u64,
    },
    #[error("modulus {p}^{exp} does not fit the coefficient representation")]
    ModulusTooLarge { p: u64, exp: u32 },
}

/// Upper bounds accepted by [`PParams::with_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_p: u64,
    pub max_m: u32,
    pub max_n: usize,
    pub max_precision: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_p: 97,
            max_m: 4,
            max_n: 4,
            max_precision: 16,
        }
    }
}

/// Prime `p`, level `m`, number of coordinates `n` and precision exponent:
/// coefficients live in `Z/p^precision`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PParams {
    pub p: u64,
    pub m: u32,
    pub n: usize,
    pub precision: u32,
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PParams {
    pub fn new(p: u64, m: u32, n: usize, precision: u32) -> Result<Self, ParamError> {
        Self::with_bounds(p, m, n, precision, &Bounds::default())
    }

    pub fn with_bounds(
        p: u64,
        m: u32,
        n: usize,
        precision: u32,
        bounds: &Bounds,
    ) -> Result<Self, ParamError> {
        if !is_prime(p) {
            return Err(ParamError::NotPrime(p));
        }
        let checks: [(&'static str, u64, u64); 4] = [
            ("p", p, bounds.max_p),
            ("m", m as u64, bounds.max_m as u64),
            ("n", n as u64, bounds.max_n as u64),
            ("N", precision as u64, bounds.max_precision as u64),
        ];
        for (name, value, bound) in checks {
            if value > bound {
                return Err(ParamError::OutOfBounds { name, value, bound });
            }
        }
        if n == 0 {
            return Err(ParamError::TooSmall {
                name: "n",
                value: 0,
                min: 1,
            });
        }
        if precision == 0 {
            return Err(ParamError::TooSmall {
                name: "N",
                value: 0,
                min: 1,
            });
        }
        // p^m must fit a u32 for the index arithmetic.
        if (p as u128).checked_pow(m).is_none_or(|v| v > u32::MAX as u128) {
            return Err(ParamError::OutOfBounds {
                name: "p^m",
                value: p,
                bound: u32::MAX as u64,
            });
        }
        Zpn::new(p, precision)?;
        Ok(PParams { p, m, n, precision })
    }

    /// `p^m`.
    pub fn pm(&self) -> u32 {
        (self.p as u32).pow(self.m)
    }

    pub fn ring(&self) -> Zpn {
        Zpn::new(self.p, self.precision).expect("validated at construction")
    }

    /// Derived parameter sets (other precision, level or coordinate count)
    /// are only checked for primality and representability; the caller's
    /// bounds were applied when `self` was built.
    fn derive(&self, m: u32, n: usize, precision: u32) -> Result<Self, ParamError> {
        let d = Bounds::default();
        let relaxed = Bounds {
            max_p: self.p.max(d.max_p),
            max_m: m.max(d.max_m),
            max_n: n.max(d.max_n),
            max_precision: precision.max(d.max_precision),
        };
        PParams::with_bounds(self.p, m, n, precision, &relaxed)
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self, ParamError> {
        self.derive(self.m, self.n, precision)
    }

    pub fn with_n(&self, n: usize) -> Result<Self, ParamError> {
        self.derive(self.m, n, self.precision)
    }

    pub fn with_level(&self, m: u32) -> Result<Self, ParamError> {
        self.derive(m, self.n, self.precision)
    }
}

impl fmt::Display for PParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={},m={},n={},N={}", self.p, self.m, self.n, self.precision)
    }
}

/// A multi-index `(i_1, ..., i_n)` of natural numbers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index with `1` in coordinate `i` (0-based).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }

    /// All `J` with `0 <= J <= self`, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.0.len())];
        for &bound in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (bound as usize + 1));
            for prefix in &out {
                for v in 0..=bound {
                    let mut w = prefix.clone();
                    w.push(v);
                    next.push(w);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// All multi-indices of length `n` and total weight `w`, lexicographic.
    pub fn of_weight(n: usize, w: u64) -> Vec<MultiIndex> {
        fn rec(n: usize, w: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if n == 1 {
                prefix.push(w);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for v in 0..=w {
                prefix.push(v);
                rec(n - 1, w - v, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if w == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(n, w as u32, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All multi-indices with every entry `< bound`.
    pub fn box_below(n: usize, bound: u32) -> Vec<MultiIndex> {
        if bound == 0 {
            return Vec::new();
        }
        MultiIndex(vec![bound - 1; n]).below()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_and_out_of_bounds() {
        assert_eq!(PParams::new(4, 1, 1, 1), Err(ParamError::NotPrime(4)));
        assert!(matches!(
            PParams::new(101, 1, 1, 1),
            Err(ParamError::OutOfBounds { name: "p", .. })
        ));
        assert!(matches!(
            PParams::new(2, 5, 1, 1),
            Err(ParamError::OutOfBounds { name: "m", .. })
        ));
        assert!(matches!(
            PParams::new(2, 1, 0, 1),
            Err(ParamError::TooSmall { name: "n", .. })
        ));
        assert!(PParams::new(97, 4, 4, 16).is_ok());
    }

    #[test]
    fn custom_bounds_allow_larger_levels() {
        let b = Bounds {
            max_m: 6,
            ..Bounds::default()
        };
        assert!(PParams::with_bounds(2, 6, 1, 2, &b).is_ok());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::of_weight(2, 3).len(), 4);
        assert_eq!(MultiIndex::of_weight(3, 2).len(), 6);
        assert_eq!(MultiIndex(vec![1, 2]).below().len(), 6);
        assert_eq!(MultiIndex::box_below(2, 3).len(), 9);
        let w = MultiIndex::of_weight(2, 2);
        assert_eq!(w[0], MultiIndex(vec![0, 2]));
        assert_eq!(w[2], MultiIndex(vec![2, 0]));
    }

    #[test]
    fn partial_order() {
        let a = MultiIndex(vec![1, 0]);
        let b = MultiIndex(vec![1, 1]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert_eq!(b.checked_sub(&a), Some(MultiIndex(vec![0, 1])));
        assert_eq!(a.checked_sub(&b), None);
    }
}
