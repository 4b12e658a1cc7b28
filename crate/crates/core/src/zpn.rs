//! Arithmetic in the local ring `Z/p^N`.
//!
//! Residues are stored as `u128` in `[0, p^N)`. The modulus is required to
//! stay below `2^126` so that a sum of two residues never overflows.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;

use crate::params::ParamError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zpn {
    p: u64,
    exp: u32,
    modulus: u128,
}

const MODULUS_LIMIT: u128 = 1 << 126;

impl Zpn {
    pub fn new(p: u64, exp: u32) -> Result<Self, ParamError> {
        let modulus = (p as u128)
            .checked_pow(exp)
            .filter(|&m| m < MODULUS_LIMIT)
            .ok_or(ParamError::ModulusTooLarge { p, exp })?;
        Ok(Zpn { p, exp, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The precision exponent `N`.
    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// The same prime with a different precision.
    pub fn with_exponent(&self, exp: u32) -> Result<Self, ParamError> {
        Zpn::new(self.p, exp)
    }

    #[inline]
    pub fn reduce(&self, a: u128) -> u128 {
        a % self.modulus
    }

    pub fn from_i64(&self, a: i64) -> u128 {
        let r = (a as i128).rem_euclid(self.modulus as i128);
        r as u128
    }

    pub fn from_biguint(&self, a: &BigUint) -> u128 {
        let m = BigUint::from(self.modulus);
        (a % m).to_u128().expect("residue below modulus")
    }

    pub fn from_bigint(&self, a: &BigInt) -> u128 {
        let m = BigInt::from(self.modulus);
        let r = ((a % &m) + &m) % &m;
        let (_, digits) = r.to_u64_digits();
        let mut v: u128 = 0;
        for d in digits.iter().rev() {
            v = (v << 64) | *d as u128;
        }
        debug_assert!(r.sign() != Sign::Minus);
        v
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if self.modulus <= u64::MAX as u128 {
            (a * b) % self.modulus
        } else {
            self.mul_slow(a, b)
        }
    }

    fn mul_slow(&self, mut a: u128, mut b: u128) -> u128 {
        let mut acc = 0;
        a %= self.modulus;
        while b > 0 {
            if b & 1 == 1 {
                acc = self.add(acc, a);
            }
            a = self.add(a, a);
            b >>= 1;
        }
        acc
    }

    pub fn pow(&self, mut base: u128, mut e: u64) -> u128 {
        let mut acc = self.reduce(1);
        base = self.reduce(base);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `(-1)^k` as a residue.
    pub fn sign(&self, k: u64) -> u128 {
        if k.is_multiple_of(2) {
            self.reduce(1)
        } else {
            self.neg(self.reduce(1))
        }
    }

    /// p-adic valuation, with `v(0) = N`.
    pub fn valuation(&self, a: u128) -> u32 {
        let mut a = self.reduce(a);
        if a == 0 {
            return self.exp;
        }
        let p = self.p as u128;
        let mut v = 0;
        while a.is_multiple_of(p) {
            a /= p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u128) -> bool {
        !self.reduce(a).is_multiple_of(self.p as u128)
    }

    /// `p^e` reduced; zero once `e >= N`.
    pub fn p_power(&self, e: u32) -> u128 {
        if e >= self.exp {
            0
        } else {
            (self.p as u128).pow(e)
        }
    }

    pub fn inverse(&self, a: u128) -> Option<u128> {
        if !self.is_unit(a) {
            return None;
        }
        // Extended Euclid on signed values; |coefficients| stay below the modulus.
        let (mut r0, mut r1) = (self.modulus as i128, self.reduce(a) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(s0.rem_euclid(self.modulus as i128) as u128)
    }

    /// Divide by `p^e` an element known to be divisible by it. The quotient is
    /// determined modulo `p^(N-e)`; the canonical representative is returned.
    pub fn div_p_power(&self, a: u128, e: u32) -> u128 {
        let a = self.reduce(a);
        debug_assert!(self.valuation(a) >= e);
        a / (self.p as u128).pow(e)
    }

    /// Symmetric representative in `(-p^N/2, p^N/2]`, used for display.
    pub fn to_signed(&self, a: u128) -> i128 {
        let a = self.reduce(a);
        if a > self.modulus / 2 {
            a as i128 - self.modulus as i128
        } else {
            a as i128
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops_mod_8() {
        let r = Zpn::new(2, 3).unwrap();
        assert_eq!(r.add(5, 6), 3);
        assert_eq!(r.sub(2, 5), 5);
        assert_eq!(r.mul(3, 7), 5);
        assert_eq!(r.neg(1), 7);
        assert_eq!(r.valuation(4), 2);
        assert_eq!(r.valuation(0), 3);
        assert_eq!(r.inverse(3), Some(3));
        assert_eq!(r.inverse(2), None);
        assert_eq!(r.pow(2, 3), 0);
        assert_eq!(r.from_i64(-1), 7);
        assert_eq!(r.to_signed(7), -1);
    }

    #[test]
    fn large_modulus_uses_wide_multiplication() {
        let r = Zpn::new(97, 16).unwrap();
        let a = r.modulus() - 1;
        assert_eq!(r.mul(a, a), 1);
        let inv = r.inverse(12345).unwrap();
        assert_eq!(r.mul(inv, 12345), 1);
    }

    #[test]
    fn rejects_oversized_modulus() {
        assert!(Zpn::new(2, 126).is_err());
        assert!(Zpn::new(2, 125).is_ok());
    }

    #[test]
    fn bigint_reduction() {
        let r = Zpn::new(3, 2).unwrap();
        assert_eq!(r.from_bigint(&BigInt::from(-10)), 8);
        assert_eq!(r.from_biguint(&BigUint::from(100u32)), 1);
    }

    proptest! {
        #[test]
        fn inverse_is_inverse(a in 1u64..1_000_000, e in 1u32..10) {
            let r = Zpn::new(5, e).unwrap();
            let a = r.reduce(a as u128);
            match r.inverse(a) {
                Some(b) => prop_assert_eq!(r.mul(a, b), 1 % r.modulus()),
                None => prop_assert!(!r.is_unit(a)),
            }
        }

        #[test]
        fn slow_and_fast_mul_agree(a in any::<u64>(), b in any::<u64>()) {
            let r = Zpn::new(3, 60).unwrap();
            let (a, b) = (r.reduce(a as u128), r.reduce(b as u128));
            prop_assert_eq!(r.mul(a, b), r.mul_slow(a, b));
        }
    }
}
