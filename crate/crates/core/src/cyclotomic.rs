//! Exact arithmetic in the cyclotomic field of M-th roots of unity.
//!
//! Elements are represented in `Q[x]/(Phi_M(x))` with `Phi_M` the M-th
//! cyclotomic polynomial, stored as a rational coefficient vector of length
//! exactly `phi(M)` in the power basis `{1, x, .., x^(phi(M)-1)}`. Working
//! modulo the minimal polynomial (rather than `x^M - 1`) makes the zero
//! test decidable, which is what every identity check in this crate
//! ultimately reduces to.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith;
use crate::error::{Error, Result};

/// Default cap on the cyclotomic order; configurable per run. Vectors have
/// length `phi(M)`, so the cap keeps element sizes predictable.
pub const DEFAULT_ORDER_CAP: u64 = 64;

/// Checks an order against a configured cap. Exceeding the cap is a
/// configuration error, never silent degradation.
pub fn check_order_cap(order: u64, cap: u64) -> Result<()> {
    if order > cap {
        return Err(Error::OrderCapExceeded { order, cap });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dense rational polynomials, internal carrier for Phi_M and reduction.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct QPoly(Vec<BigRational>);

impl QPoly {
    pub(crate) fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub(crate) fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    /// x^deg with the given coefficient.
    pub(crate) fn monomial(coeff: BigRational, deg: usize) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigRational::zero(); deg + 1];
        v[deg] = coeff;
        QPoly(v)
    }

    /// x^m - 1.
    fn x_pow_minus_one(m: usize) -> Self {
        let mut v = vec![BigRational::zero(); m + 1];
        v[0] = -BigRational::one();
        v[m] = BigRational::one();
        QPoly(v)
    }

    pub(crate) fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub(crate) fn sub(&self, other: &Self) -> Self {
        let mut v = vec![BigRational::zero(); self.0.len().max(other.0.len())];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            v[i] -= c;
        }
        Self::from_coeffs(v)
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        Self::from_coeffs(v)
    }

    pub(crate) fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        QPoly(self.0.iter().map(|c| c * s).collect())
    }

    /// Euclidean division; divisor must be nonzero.
    pub(crate) fn divmod(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead_inv = BigRational::one() / divisor.0[dd].clone();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (Self::zero(), Self::from_coeffs(rem));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = &rem[i] * &lead_inv;
            for (j, c) in divisor.0.iter().enumerate() {
                let sub = c * &q;
                rem[i - dd + j] -= sub;
            }
            quot[i - dd] = q;
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    /// Extended gcd: returns (g, u, v) with u*self + v*other = g.
    fn extended_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = QPoly(vec![BigRational::one()]);
        let mut s1 = Self::zero();
        let mut t0 = Self::zero();
        let mut t1 = QPoly(vec![BigRational::one()]);
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        (r0, s0, t0)
    }
}

/// The M-th cyclotomic polynomial with integer coefficients, little-endian
/// by degree. Computed by exact division of `x^M - 1` by `Phi_d` over the
/// proper divisors `d` of `M`.
pub fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    assert!(m >= 1, "cyclotomic polynomial needs m >= 1");
    let q = cyclotomic_qpoly(m);
    q.coeffs()
        .iter()
        .map(|c| {
            assert!(c.is_integer(), "cyclotomic coefficients are integers");
            c.to_integer()
        })
        .collect()
}

fn cyclotomic_qpoly(m: u64) -> QPoly {
    let mut memo: HashMap<u64, QPoly> = HashMap::new();
    for d in arith::divisors(m) {
        let mut num = QPoly::x_pow_minus_one(d as usize);
        for e in arith::divisors(d) {
            if e == d {
                continue;
            }
            let (q, r) = num.divmod(&memo[&e]);
            debug_assert!(r.is_zero());
            num = q;
        }
        memo.insert(d, num);
    }
    memo.remove(&m).unwrap()
}

// ---------------------------------------------------------------------------
// Reduction modulus cache
// ---------------------------------------------------------------------------

struct Modulus {
    phi: usize,
    poly: QPoly,
}

fn modulus(order: u64) -> Arc<Modulus> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Modulus>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(m) = cache.read().unwrap().get(&order) {
        return Arc::clone(m);
    }
    let built = Arc::new(Modulus {
        phi: arith::totient(order) as usize,
        poly: cyclotomic_qpoly(order),
    });
    let mut w = cache.write().unwrap();
    Arc::clone(w.entry(order).or_insert(built))
}

// ---------------------------------------------------------------------------
// Field elements
// ---------------------------------------------------------------------------

/// An element of the cyclotomic field of order-M roots of unity, reduced
/// modulo `Phi_M`. The coefficient vector always has length `phi(M)`, so
/// equal values have identical representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicNumber {
    order: u64,
    coeffs: Vec<BigRational>,
}

impl CyclotomicNumber {
    fn from_reduced(order: u64, coeffs: Vec<BigRational>) -> Self {
        CyclotomicNumber { order, coeffs }
    }

    fn reduce(order: u64, raw: QPoly) -> Self {
        let m = modulus(order);
        let reduced = if raw.degree().is_none_or(|d| d < m.phi) {
            raw
        } else {
            raw.divmod(&m.poly).1
        };
        let mut coeffs = reduced.0;
        coeffs.resize(m.phi, BigRational::zero());
        Self::from_reduced(order, coeffs)
    }

    pub fn zero(order: u64) -> Self {
        assert!(order >= 2, "cyclotomic order must be at least 2");
        let phi = modulus(order).phi;
        Self::from_reduced(order, vec![BigRational::zero(); phi])
    }

    pub fn one(order: u64) -> Self {
        Self::from_rational(order, BigRational::one())
    }

    pub fn from_rational(order: u64, value: BigRational) -> Self {
        assert!(order >= 2, "cyclotomic order must be at least 2");
        let mut out = Self::zero(order);
        out.coeffs[0] = value;
        out
    }

    pub fn from_integer(order: u64, value: i64) -> Self {
        Self::from_rational(order, BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_biguint(order: u64, value: &BigUint) -> Self {
        Self::from_rational(
            order,
            BigRational::from_integer(BigInt::from(value.clone())),
        )
    }

    /// The reduced representation of `xi^e`, where `xi` is the chosen
    /// primitive M-th root of unity (the class of `x`). Negative exponents
    /// wrap around.
    pub fn root_power(order: u64, e: i64) -> Self {
        assert!(order >= 2, "cyclotomic order must be at least 2");
        let r = e.rem_euclid(order as i64) as usize;
        Self::reduce(order, QPoly::monomial(BigRational::one(), r))
    }

    /// `xi^e` for an unsigned residue exponent.
    pub fn root_power_u64(order: u64, e: u64) -> Self {
        assert!(order >= 2);
        Self::reduce(
            order,
            QPoly::monomial(BigRational::one(), (e % order) as usize),
        )
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coefficients over the power basis, length exactly `phi(order)`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self * other)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// `Phi_M`; errors on zero.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = modulus(self.order);
        let a = QPoly::from_coeffs(self.coeffs.clone());
        let (g, u, _) = a.extended_gcd(&m.poly);
        // Phi_M is irreducible over Q, so the gcd is a nonzero constant.
        debug_assert_eq!(g.degree(), Some(0));
        let scale = BigRational::one() / g.0[0].clone();
        Ok(Self::reduce(self.order, u.scale(&scale)))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_reduced(self.order, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }
}

impl Add for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn add(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        assert_eq!(self.order, rhs.order, "cyclotomic order mismatch");
        CyclotomicNumber::from_reduced(
            self.order,
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn sub(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        assert_eq!(self.order, rhs.order, "cyclotomic order mismatch");
        CyclotomicNumber::from_reduced(
            self.order,
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn mul(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        assert_eq!(self.order, rhs.order, "cyclotomic order mismatch");
        let a = QPoly::from_coeffs(self.coeffs.clone());
        let b = QPoly::from_coeffs(rhs.coeffs.clone());
        CyclotomicNumber::reduce(self.order, a.mul(&b))
    }
}

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber::from_reduced(self.order, self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            if i == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", power_str(i))?;
            } else {
                write!(f, "{}*{}", mag, power_str(i))?;
            }
        }
        Ok(())
    }
}

fn power_str(i: usize) -> String {
    if i == 1 {
        "ξ".to_string()
    } else {
        format!("ξ^{i}")
    }
}

// Exact, human-diffable JSON form: {"order": M, "coeffs": ["num/den", ..]}.
impl Serialize for CyclotomicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("CyclotomicNumber", 2)?;
        s.serialize_field("order", &self.order)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(ratio_string).collect();
        s.serialize_field("coeffs", &coeffs)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for CyclotomicNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: u64,
            coeffs: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.order < 2 {
            return Err(D::Error::custom("cyclotomic order must be at least 2"));
        }
        let phi = arith::totient(raw.order) as usize;
        if raw.coeffs.len() != phi {
            return Err(D::Error::custom(format!(
                "expected {} coefficients for order {}, got {}",
                phi,
                raw.order,
                raw.coeffs.len()
            )));
        }
        let coeffs = raw
            .coeffs
            .iter()
            .map(|s| parse_ratio(s).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CyclotomicNumber::from_reduced(raw.order, coeffs))
    }
}

pub(crate) fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn parse_ratio(s: &str) -> std::result::Result<BigRational, String> {
    let mk_err = |e| format!("bad rational {s:?}: {e}");
    match s.split_once('/') {
        Some((n, d)) => {
            let numer: BigInt = n.trim().parse().map_err(|e| mk_err(format!("{e}")))?;
            let denom: BigInt = d.trim().parse().map_err(|e| mk_err(format!("{e}")))?;
            if denom.is_zero() {
                return Err(mk_err("zero denominator".into()));
            }
            Ok(BigRational::new(numer, denom))
        }
        None => {
            let numer: BigInt = s.trim().parse().map_err(|e| mk_err(format!("{e}")))?;
            Ok(BigRational::from_integer(numer))
        }
    }
}
