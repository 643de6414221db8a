//! Machine-integer helpers: primality, factorization, totients, divisors,
//! and exact binomial coefficients.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (the witness set below is proven
/// sufficient for all inputs under 2^64).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of `n >= 1` as (prime, exponent) pairs in ascending
/// order. Trial division with a primality early-exit on the cofactor.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut out = Vec::new();
    for p in [2u64, 3] {
        let mut e = 0u32;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut d = 5u64;
    while n > 1 {
        if is_prime(n) {
            out.push((n, 1));
            break;
        }
        // n is composite, so its least divisor from here is at most sqrt(n)
        while !n.is_multiple_of(d) {
            d += if d % 6 == 5 { 2 } else { 4 };
        }
        let mut e = 0u32;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        out.push((d, e));
    }
    out
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    assert!(n >= 1);
    let mut t = n;
    for (p, _) in factorize(n) {
        t = t / p * (p - 1);
    }
    t
}

/// All divisors of `n >= 1` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Divisors of `base^exp` in ascending order. Returns `None` if any divisor
/// overflows u64.
pub fn divisors_of_power(base: u64, exp: u32) -> Option<Vec<u64>> {
    let mut out = vec![1u64];
    for (p, e) in factorize(base) {
        let total = e.checked_mul(exp)?;
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..total {
            pk = pk.checked_mul(p)?;
            for d in &prev {
                out.push(d.checked_mul(pk)?);
            }
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

/// Multinomial coefficient `(sum parts)! / prod(parts!)`.
pub fn multinomial(parts: &[u64]) -> BigUint {
    let total: u64 = parts.iter().sum();
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}

/// All weak compositions of `total` into `parts` nonnegative summands.
pub fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    fn rec(total: u64, parts: usize, head: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            head.push(total);
            out.push(head.clone());
            head.pop();
            return;
        }
        for first in 0..=total {
            head.push(first);
            rec(total - first, parts - 1, head, out);
            head.pop();
        }
    }
    assert!(parts >= 1);
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (0..100).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
        );
    }

    #[test]
    fn primality_large() {
        assert!(is_prime(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime(2_147_483_649));
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
    }

    #[test]
    fn factorize_roundtrip() {
        for n in 1..2000u64 {
            let f = factorize(n);
            let back: u64 = f.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(back, n);
            for (p, _) in &f {
                assert!(is_prime(*p));
            }
        }
    }

    #[test]
    fn totient_values() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(2), 1);
        assert_eq!(totient(6), 2);
        assert_eq!(totient(5), 4);
        assert_eq!(totient(12), 4);
        assert_eq!(totient(64), 32);
    }

    #[test]
    fn divisors_sorted() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(
            divisors_of_power(4, 2).unwrap(),
            vec![1, 2, 4, 8, 16]
        );
        assert_eq!(divisors_of_power(6, 1).unwrap(), vec![1, 2, 3, 6]);
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(5, 0), BigUint::from(1u32));
        assert_eq!(binomial(3, 7), BigUint::zero());
        assert_eq!(binomial(60, 30), "118264581564861424".parse().unwrap());
    }

    #[test]
    fn compositions_count() {
        // C(total + parts - 1, parts - 1) weak compositions
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(0, 2), vec![vec![0, 0]]);
        for c in compositions(5, 3) {
            assert_eq!(c.iter().sum::<u64>(), 5);
        }
    }
}
