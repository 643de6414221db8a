//! Base-M digit expansions and the base-shifting map.
//!
//! `base_shift(n, M, N)` reads the base-M digit string of `n` and evaluates
//! it in base `N`. With `N = 1` it degenerates to the classical base-M
//! sum-of-digits function. `residue(n, M, N)` reduces the shifted value
//! modulo `M`; that residue sequence is the object every other module
//! studies.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};

/// Little-endian base-M digit expansion. Canonical form has no trailing
/// zero digit; zero is the empty expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitVector {
    base: u64,
    digits: Vec<u64>,
}

impl DigitVector {
    pub fn base(&self) -> u64 {
        self.base
    }

    /// Digits little-endian: index `i` holds the coefficient of `base^i`.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Reconstructs the expanded number exactly.
    pub fn value(&self) -> BigUint {
        let base = BigUint::from(self.base);
        let mut acc = BigUint::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &base + BigUint::from(d);
        }
        acc
    }
}

fn check_base(base: u64) -> Result<()> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    Ok(())
}

fn check_target(target: u64) -> Result<()> {
    if target == 0 {
        return Err(Error::InvalidTarget);
    }
    Ok(())
}

/// Canonical base-M expansion of `n`. `digits(0, M)` is empty.
pub fn digits(n: &BigUint, base: u64) -> Result<DigitVector> {
    check_base(base)?;
    let big_base = BigUint::from(base);
    let mut rest = n.clone();
    let mut out = Vec::new();
    while !rest.is_zero() {
        let d = (&rest % &big_base).to_u64().expect("digit below base fits u64");
        out.push(d);
        rest /= &big_base;
    }
    Ok(DigitVector { base, digits: out })
}

/// Fast path for machine-sized inputs.
pub(crate) fn digits_u64(mut n: u64, base: u64) -> Vec<u64> {
    debug_assert!(base >= 2);
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % base);
        n /= base;
    }
    out
}

/// The base-shifting map: base-M digits of `n` evaluated in base `target`.
/// `base_shift(n, M, M) = n` for all `n`.
pub fn base_shift(n: &BigUint, base: u64, target: u64) -> Result<BigUint> {
    check_base(base)?;
    check_target(target)?;
    let dv = digits(n, base)?;
    let big_target = BigUint::from(target);
    let mut acc = BigUint::zero();
    for &d in dv.digits.iter().rev() {
        acc = acc * &big_target + BigUint::from(d);
    }
    Ok(acc)
}

/// `base_shift` for machine-sized `n` (the value may still be large).
pub(crate) fn base_shift_u64(n: u64, base: u64, target: u64) -> BigUint {
    debug_assert!(base >= 2 && target >= 1);
    let big_target = BigUint::from(target);
    let mut acc = BigUint::zero();
    for &d in digits_u64(n, base).iter().rev() {
        acc = acc * &big_target + BigUint::from(d);
    }
    acc
}

/// The shifted value reduced modulo the source base: an element of
/// `{0, .., M-1}`.
pub fn residue(n: &BigUint, base: u64, target: u64) -> Result<u64> {
    check_base(base)?;
    check_target(target)?;
    let big_base = BigUint::from(base);
    let mut rest = n.clone();
    let mut acc = 0u64;
    let mut pow = 1u64 % base;
    while !rest.is_zero() {
        let d = (&rest % &big_base).to_u64().expect("digit fits u64");
        acc = (acc + arith::mul_mod(d, pow, base)) % base;
        pow = arith::mul_mod(pow, target % base, base);
        rest /= &big_base;
    }
    Ok(acc)
}

/// `residue` for machine-sized `n`; no allocation.
pub(crate) fn residue_u64(mut n: u64, base: u64, target: u64) -> u64 {
    debug_assert!(base >= 2 && target >= 1);
    let mut acc = 0u64;
    let mut pow = 1u64 % base;
    while n > 0 {
        acc = (acc + arith::mul_mod(n % base, pow, base)) % base;
        pow = arith::mul_mod(pow, target % base, base);
        n /= base;
    }
    acc
}

/// Product of the distinct prime factors; `radical(1) = 1`.
pub fn radical(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidInput("radical of 0 is undefined".into()));
    }
    Ok(arith::factorize(k).iter().map(|(p, _)| p).product())
}

/// True iff every prime factor of `base` divides `target`, i.e.
/// rad(base) | rad(target). This is the periodicity criterion.
pub fn radical_divides(base: u64, target: u64) -> Result<bool> {
    check_base(base)?;
    check_target(target)?;
    Ok(arith::factorize(base).iter().all(|(p, _)| target.is_multiple_of(*p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn digits_examples() {
        assert_eq!(digits(&big(0), 2).unwrap().digits(), &[] as &[u64]);
        assert_eq!(digits(&big(3), 2).unwrap().digits(), &[1, 1]);
        assert_eq!(digits(&big(123), 10).unwrap().digits(), &[3, 2, 1]);
        assert!(matches!(digits(&big(5), 1), Err(Error::InvalidBase(1))));
        assert!(matches!(digits(&big(5), 0), Err(Error::InvalidBase(0))));
    }

    #[test]
    fn base_shift_examples() {
        // digits 11 in base 2 read in base 4: 4 + 1
        assert_eq!(base_shift(&big(3), 2, 4).unwrap(), big(5));
        // N = 1 degenerates to the sum of digits
        assert_eq!(base_shift(&big(123), 10, 1).unwrap(), big(6));
        // 9 = (0,0,1) base 3, read in base 2: 2^2
        assert_eq!(base_shift(&big(9), 3, 2).unwrap(), big(4));
        assert!(matches!(base_shift(&big(3), 2, 0), Err(Error::InvalidTarget)));
    }

    #[test]
    fn residue_examples() {
        // 4 = (0,1) base 4 read in base 2: value 2
        assert_eq!(residue(&big(4), 4, 2).unwrap(), 2);
        assert_eq!(residue(&big(0), 7, 3).unwrap(), 0);
        // popcount(7) = 3, odd
        assert_eq!(residue(&big(7), 2, 1).unwrap(), 1);
    }

    #[test]
    fn radical_examples() {
        assert_eq!(radical(12).unwrap(), 6);
        assert_eq!(radical(1).unwrap(), 1);
        assert_eq!(radical(8).unwrap(), 2);
        assert!(radical(0).is_err());
    }

    #[test]
    fn radical_divides_examples() {
        assert!(radical_divides(6, 12).unwrap());
        assert!(!radical_divides(6, 4).unwrap());
        assert!(radical_divides(4, 2).unwrap());
        assert!(!radical_divides(2, 1).unwrap());
    }

    #[test]
    fn growth_requires_bigints() {
        // B_{2,10}(2^40) = 10^40 does not fit in u64.
        let n = BigUint::from(1u64) << 40;
        let shifted = base_shift(&n, 2, 10).unwrap();
        assert_eq!(shifted, BigUint::from(10u32).pow(40));
    }

    proptest! {
        #[test]
        fn digit_value_roundtrip(n in 0u64..1_000_000, m in 2u64..=12) {
            let dv = digits(&big(n), m).unwrap();
            prop_assert!(dv.digits().iter().all(|&d| d < m));
            prop_assert!(dv.digits().last().is_none_or(|&d| d != 0));
            prop_assert_eq!(dv.value(), big(n));
        }

        #[test]
        fn shift_identity_at_same_base(n in 0u64..1_000_000, m in 2u64..=12) {
            prop_assert_eq!(base_shift(&big(n), m, m).unwrap(), big(n));
        }

        #[test]
        fn digit_splitting_identity(
            q in 0u64..10_000,
            r_seed in 0u64..1_000_000,
            m in 2u64..=10,
            t in 1u32..=4,
            target in 1u64..=20,
        ) {
            // n = q*M^k + r with r < M^k splits as
            // shift(n) = shift(r) + N^k * shift(q)
            let mk = m.pow(t);
            let r = r_seed % mk;
            let n = big(q) * big(mk) + big(r);
            let lhs = base_shift(&n, m, target).unwrap();
            let rhs = base_shift(&big(r), m, target).unwrap()
                + BigUint::from(target).pow(t) * base_shift(&big(q), m, target).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn shift_monotone_when_target_at_least_base(
            a in 0u64..100_000,
            b in 0u64..100_000,
            m in 2u64..=8,
            extra in 0u64..=8,
        ) {
            let target = m + extra;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(lo != hi);
            let sl = base_shift(&big(lo), m, target).unwrap();
            let sh = base_shift(&big(hi), m, target).unwrap();
            prop_assert!(sl < sh);
        }

        #[test]
        fn residue_matches_shift_mod(n in 0u64..200_000, m in 2u64..=12, target in 1u64..=30) {
            let full = base_shift(&big(n), m, target).unwrap() % big(m);
            prop_assert_eq!(big(residue(&big(n), m, target).unwrap()), full);
            prop_assert_eq!(residue_u64(n, m, target), residue(&big(n), m, target).unwrap());
        }

        #[test]
        fn residue_depends_on_window_when_periodic(
            n in 0u64..1_000_000,
            pair in prop::sample::select(vec![(4u64, 2u64), (8, 2), (9, 3), (6, 6), (12, 6)]),
        ) {
            // When rad(M) | rad(N), the residue depends only on n mod M^k0
            // with k0 the largest exponent in M's factorization.
            let (m, target) = pair;
            let k0 = crate::arith::factorize(m).iter().map(|&(_, e)| e).max().unwrap();
            let window = m.pow(k0);
            prop_assert_eq!(residue_u64(n, m, target), residue_u64(n % window, m, target));
        }
    }
}
