//! The three binomial symbols of divided-power calculus of level `m`.
//!
//! For `k = p^m q + r` write `q(k) = floor(k / p^m)`. Then
//!
//! * `binom(k, k')` is the ordinary binomial coefficient,
//! * `mbinom(k, k') = q(k)! / (q(k')! q(k-k')!)`,
//! * `qbinom(k, k') = binom(k, k') / mbinom(k, k')`.
//!
//! All three extend to multi-indices componentwise. The first two are
//! integers. `qbinom` is only p-integral: at `p = 3, m = 1` one has
//! `qbinom(6, 2) = 15/2`. It is therefore kept as an exact fraction whose
//! denominator is checked to be prime to `p`, and reduced into `Z/p^N` in
//! [`CoeffTable`].

use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::params::{MultiIndex, PParams};
use crate::zpn::Zpn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("multi-index {lower} is not below {upper}")]
    ComponentOutOfRange { upper: String, lower: String },
    #[error("qbinom({k},{kp}) at p^m={pm} has a denominator divisible by p")]
    DivisibilityViolation { k: u64, kp: u64, pm: u64 },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

/// Memoized factorials `0!, 1!, ..., bound!`.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigUint>,
}

impl FactorialTable {
    pub fn new(bound: u64) -> Self {
        let mut values = Vec::with_capacity(bound as usize + 1);
        values.push(BigUint::one());
        for k in 1..=bound {
            let next = &values[k as usize - 1] * BigUint::from(k);
            values.push(next);
        }
        FactorialTable { values }
    }

    pub fn bound(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `k!`, computed directly when `k` exceeds the memoized range.
    pub fn factorial(&self, k: u64) -> BigUint {
        match self.values.get(k as usize) {
            Some(v) => v.clone(),
            None => {
                let mut acc = self.values.last().unwrap().clone();
                for j in self.bound() + 1..=k {
                    acc *= BigUint::from(j);
                }
                acc
            }
        }
    }

    fn with<R>(&self, k: u64, f: impl FnOnce(&BigUint) -> R) -> R {
        match self.values.get(k as usize) {
            Some(v) => f(v),
            None => f(&self.factorial(k)),
        }
    }

    pub fn binom(&self, k: u64, j: u64) -> BigUint {
        if j > k {
            return BigUint::zero();
        }
        let den = self.with(j, |a| self.with(k - j, |b| a * b));
        self.with(k, |num| num / den)
    }
}

/// Default memo bound; large enough for the unit-lemma sweep.
pub const DEFAULT_FACTORIAL_BOUND: u64 = 2048;

static FACTORIALS: OnceLock<RwLock<FactorialTable>> = OnceLock::new();

fn table() -> &'static RwLock<FactorialTable> {
    FACTORIALS.get_or_init(|| RwLock::new(FactorialTable::new(DEFAULT_FACTORIAL_BOUND)))
}

/// Rebuild the shared memo with a different bound.
pub fn set_factorial_bound(bound: u64) {
    let mut t = table().write().unwrap();
    if t.bound() != bound {
        *t = FactorialTable::new(bound);
    }
}

fn binom_scalar(k: u64, j: u64) -> BigUint {
    table().read().unwrap().binom(k, j)
}

fn factorial(k: u64) -> BigUint {
    table().read().unwrap().factorial(k)
}

fn check_le(i: &MultiIndex, j: &MultiIndex) -> Result<(), ArithError> {
    if j.le(i) {
        Ok(())
    } else {
        Err(ArithError::ComponentOutOfRange {
            upper: i.to_string(),
            lower: j.to_string(),
        })
    }
}

/// `prod_k C(i_k, j_k)`.
pub fn binom(i: &MultiIndex, j: &MultiIndex) -> Result<BigUint, ArithError> {
    check_le(i, j)?;
    Ok(i.0
        .iter()
        .zip(&j.0)
        .map(|(&a, &b)| binom_scalar(a as u64, b as u64))
        .product())
}

/// `q!/(q'! q''!)` with `q = floor(k/pm)`, `q' = floor(k'/pm)`, `q'' = floor((k-k')/pm)`.
pub fn mbinom(k: u64, kp: u64, pm: u64) -> Result<BigUint, ArithError> {
    if kp > k || pm == 0 {
        return Err(ArithError::PreconditionViolation(format!(
            "mbinom needs k' <= k and p^m >= 1, got k={k}, k'={kp}, p^m={pm}"
        )));
    }
    let (q, q1, q2) = (k / pm, kp / pm, (k - kp) / pm);
    if q != q1 + q2 && q != q1 + q2 + 1 {
        return Err(ArithError::PreconditionViolation(format!(
            "floor relation fails for k={k}, k'={kp}, p^m={pm}"
        )));
    }
    let num = factorial(q);
    let den = factorial(q1) * factorial(q2);
    let (quot, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(ArithError::DivisibilityViolation { k, kp, pm });
    }
    Ok(quot)
}

/// Scalar bracketed binomial as a reduced fraction.
///
/// Fails with [`ArithError::DivisibilityViolation`] if `p` divides the
/// reduced denominator.
pub fn qbinom_scalar(k: u64, kp: u64, p: u64, pm: u64) -> Result<Ratio<BigUint>, ArithError> {
    let b = binom_scalar(k, kp);
    let mb = mbinom(k, kp, pm)?;
    let q = Ratio::new(b, mb);
    if (q.denom() % BigUint::from(p)).is_zero() {
        return Err(ArithError::DivisibilityViolation { k, kp, pm });
    }
    Ok(q)
}

pub fn qbinom(i: &MultiIndex, j: &MultiIndex, params: &PParams) -> Result<Ratio<BigUint>, ArithError> {
    check_le(i, j)?;
    let pm = params.pm() as u64;
    let mut acc = Ratio::from_integer(BigUint::one());
    for (&a, &b) in i.0.iter().zip(&j.0) {
        acc *= qbinom_scalar(a as u64, b as u64, params.p, pm)?;
    }
    Ok(acc)
}

/// Image of a p-integral fraction in `Z/p^N`.
pub fn reduce_fraction(ring: &Zpn, q: &Ratio<BigUint>) -> u128 {
    let den = ring
        .inverse(ring.from_biguint(q.denom()))
        .expect("denominator prime to p");
    ring.mul(ring.from_biguint(q.numer()), den)
}

/// Whether `qbinom(i, p^m)` is congruent to 1 modulo `p`.
pub fn check_unit_lemma(i: u64, params: &PParams) -> Result<bool, ArithError> {
    let pm = params.pm() as u64;
    if i < pm {
        return Err(ArithError::PreconditionViolation(format!(
            "unit lemma needs i >= p^m, got i={i}, p^m={pm}"
        )));
    }
    let q = qbinom_scalar(i, pm, params.p, pm)?;
    let field = Zpn::new(params.p, 1).expect("prime field");
    Ok(reduce_fraction(&field, &q) == 1)
}

/// `v_p(k!)` by Legendre's formula.
pub fn legendre(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut pk = p;
    while pk <= k {
        v += k / pk;
        pk = match pk.checked_mul(p) {
            Some(x) => x,
            None => break,
        };
    }
    v
}

/// `v_p(qbinom(k, k'))` computed from valuations of factorials only.
pub fn qbinom_valuation_legendre(k: u64, kp: u64, p: u64, pm: u64) -> i64 {
    let v = |x: u64| legendre(x, p) as i64;
    let (q, q1, q2) = (k / pm, kp / pm, (k - kp) / pm);
    (v(k) - v(kp) - v(k - kp)) - (v(q) - v(q1) - v(q2))
}

/// `v_p` of a positive integer.
pub fn valuation(x: &BigUint, p: u64) -> u64 {
    assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Scalar coefficients reduced into `Z/p^N`, tabulated for `0 <= j <= i <= bound`.
///
/// Entries are computed exactly first, so every divisibility postcondition
/// is checked once at construction.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    ring: Zpn,
    pm: u64,
    bound: u32,
    binom: Vec<Vec<u128>>,
    mbinom: Vec<Vec<u128>>,
    qbinom: Vec<Vec<u128>>,
}

impl CoeffTable {
    pub fn new(params: &PParams, bound: u32) -> Result<Self, ArithError> {
        Self::with_ring(params.ring(), params.pm() as u64, bound)
    }

    /// `pm` must be a power of the ring's prime.
    pub fn with_ring(ring: Zpn, pm: u64, bound: u32) -> Result<Self, ArithError> {
        let rows = bound as usize + 1;
        let mut binom = Vec::with_capacity(rows);
        let mut mb = Vec::with_capacity(rows);
        let mut qb = Vec::with_capacity(rows);
        for k in 0..=bound as u64 {
            let mut rb = Vec::with_capacity(k as usize + 1);
            let mut rm = Vec::with_capacity(k as usize + 1);
            let mut rq = Vec::with_capacity(k as usize + 1);
            for j in 0..=k {
                let b = binom_scalar(k, j);
                let m = mbinom(k, j, pm)?;
                let q = qbinom_scalar(k, j, ring.p(), pm)?;
                rb.push(ring.from_biguint(&b));
                rm.push(ring.from_biguint(&m));
                rq.push(reduce_fraction(&ring, &q));
            }
            binom.push(rb);
            mb.push(rm);
            qb.push(rq);
        }
        Ok(CoeffTable {
            ring,
            pm,
            bound,
            binom,
            mbinom: mb,
            qbinom: qb,
        })
    }

    pub fn ring(&self) -> &Zpn {
        &self.ring
    }

    pub fn pm(&self) -> u64 {
        self.pm
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    fn lookup(&self, t: &[Vec<u128>], k: u32, j: u32, f: impl FnOnce(u64, u64) -> u128) -> u128 {
        if j > k {
            return 0;
        }
        if k <= self.bound {
            t[k as usize][j as usize]
        } else {
            f(k as u64, j as u64)
        }
    }

    pub fn binom1(&self, k: u32, j: u32) -> u128 {
        self.lookup(&self.binom, k, j, |k, j| {
            self.ring.from_biguint(&binom_scalar(k, j))
        })
    }

    pub fn mbinom1(&self, k: u32, j: u32) -> u128 {
        self.lookup(&self.mbinom, k, j, |k, j| {
            self.ring
                .from_biguint(&mbinom(k, j, self.pm).expect("mbinom postcondition"))
        })
    }

    pub fn qbinom1(&self, k: u32, j: u32) -> u128 {
        self.lookup(&self.qbinom, k, j, |k, j| {
            let q = qbinom_scalar(k, j, self.ring.p(), self.pm).expect("qbinom postcondition");
            reduce_fraction(&self.ring, &q)
        })
    }

    /// Componentwise product; zero when `J` is not below `I`.
    pub fn qbinom(&self, i: &MultiIndex, j: &MultiIndex) -> u128 {
        self.product(i, j, Self::qbinom1)
    }

    pub fn binom(&self, i: &MultiIndex, j: &MultiIndex) -> u128 {
        self.product(i, j, Self::binom1)
    }

    /// Coefficient of `tau^{I+J}` in `tau^{I} tau^{J}`.
    pub fn mul_coeff(&self, i: &MultiIndex, j: &MultiIndex) -> u128 {
        let mut acc = self.ring.reduce(1);
        for (&a, &b) in i.0.iter().zip(&j.0) {
            acc = self.ring.mul(acc, self.mbinom1(a + b, a));
            if acc == 0 {
                break;
            }
        }
        acc
    }

    fn product(&self, i: &MultiIndex, j: &MultiIndex, f: fn(&Self, u32, u32) -> u128) -> u128 {
        let mut acc = self.ring.reduce(1);
        for (&a, &b) in i.0.iter().zip(&j.0) {
            if b > a {
                return 0;
            }
            acc = self.ring.mul(acc, f(self, a, b));
            if acc == 0 {
                break;
            }
        }
        acc
    }
}

/// Exact `qbinom` as a `u64` when it is an integer, used in reports.
pub fn qbinom_u64(k: u64, kp: u64, p: u64, pm: u64) -> Option<u64> {
    let q = qbinom_scalar(k, kp, p, pm).ok()?;
    if q.is_integer() {
        q.to_integer().to_u64()
    } else {
        None
    }
}
