//! Polynomial carriers over cyclotomic coefficients.
//!
//! [`UniPoly`] is dense (index = degree) and hosts the signed generating
//! polynomials and their exact division by powers of `1 - z`. [`MultiPoly`]
//! is a sparse term map over named variables and carries the symbolic
//! identity checks. Both keep canonical forms: no trailing zero
//! coefficients, no zero terms, no unused variables.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith;
use crate::cyclotomic::CyclotomicNumber;
use crate::error::{Error, Result};

fn binom_rat(n: u64, k: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(arith::binomial(n, k)))
}

// ---------------------------------------------------------------------------
// Dense univariate polynomials
// ---------------------------------------------------------------------------

/// Dense univariate polynomial in `z` with cyclotomic coefficients, all of
/// one order. The zero polynomial has an empty coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    order: u64,
    coeffs: Vec<CyclotomicNumber>,
}

impl UniPoly {
    pub fn zero(order: u64) -> Self {
        UniPoly { order, coeffs: Vec::new() }
    }

    pub fn one(order: u64) -> Self {
        Self::constant(CyclotomicNumber::one(order))
    }

    pub fn constant(c: CyclotomicNumber) -> Self {
        let order = c.order();
        Self::from_coeffs(order, vec![c])
    }

    /// `c * z^deg`.
    pub fn monomial(c: CyclotomicNumber, deg: usize) -> Self {
        let order = c.order();
        let mut coeffs = vec![CyclotomicNumber::zero(order); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(order, coeffs)
    }

    /// `1 - z`.
    pub fn one_minus_z(order: u64) -> Self {
        Self::from_coeffs(
            order,
            vec![
                CyclotomicNumber::one(order),
                CyclotomicNumber::from_integer(order, -1),
            ],
        )
    }

    pub fn from_coeffs(order: u64, mut coeffs: Vec<CyclotomicNumber>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.order() == order));
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { order, coeffs }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[CyclotomicNumber] {
        &self.coeffs
    }

    /// Coefficient of `z^i` (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> CyclotomicNumber {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| CyclotomicNumber::zero(self.order))
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "coefficient order mismatch");
        let mut v = vec![CyclotomicNumber::zero(self.order); self.coeffs.len().max(other.coeffs.len())];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i] = &v[i] + c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            v[i] = &v[i] + c;
        }
        Self::from_coeffs(self.order, v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&CyclotomicNumber::from_integer(self.order, -1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "coefficient order mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.order);
        }
        let mut v =
            vec![CyclotomicNumber::zero(self.order); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] = &v[i + j] + &(a * b);
                }
            }
        }
        Self::from_coeffs(self.order, v)
    }

    pub fn scale(&self, s: &CyclotomicNumber) -> Self {
        assert_eq!(self.order, s.order(), "coefficient order mismatch");
        Self::from_coeffs(self.order, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by `z^k`.
    pub fn mul_z_pow(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![CyclotomicNumber::zero(self.order); k];
        v.extend(self.coeffs.iter().cloned());
        UniPoly { order: self.order, coeffs: v }
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Horner evaluation at a cyclotomic point.
    pub fn evaluate(&self, at: &CyclotomicNumber) -> CyclotomicNumber {
        assert_eq!(self.order, at.order(), "coefficient order mismatch");
        let mut acc = CyclotomicNumber::zero(self.order);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * at) + c;
        }
        acc
    }

    fn try_divide(&self, den: &Self) -> Option<Self> {
        assert_eq!(self.order, den.order, "coefficient order mismatch");
        let dd = den.degree()?;
        if self.is_zero() {
            return Some(Self::zero(self.order));
        }
        let nd = self.degree().unwrap();
        if nd < dd {
            return None;
        }
        let lead_inv = den.coeffs[dd].inverse().ok()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![CyclotomicNumber::zero(self.order); nd - dd + 1];
        for i in (dd..=nd).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = &rem[i] * &lead_inv;
            for (j, c) in den.coeffs.iter().enumerate() {
                rem[i - dd + j] = &rem[i - dd + j] - &(c * &q);
            }
            quot[i - dd] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Self::from_coeffs(self.order, quot))
        } else {
            None
        }
    }

    /// Exact quotient with `self = den * q`; errors when the remainder is
    /// nonzero or the divisor is zero.
    pub fn divide_exact(&self, den: &Self) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.try_divide(den).ok_or(Error::InexactDivision)
    }

    /// Largest k such that `(1 - z)^k` divides this polynomial, by repeated
    /// exact division. Errors on the zero polynomial.
    pub fn multiplicity_at_one(&self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let one_minus_z = Self::one_minus_z(self.order);
        let mut k = 0u32;
        let mut cur = self.clone();
        while let Some(next) = cur.try_divide(&one_minus_z) {
            k += 1;
            cur = next;
        }
        Ok(k)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "({c})")?;
            } else if i == 1 {
                write!(f, "({c})*z")?;
            } else {
                write!(f, "({c})*z^{i}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials
// ---------------------------------------------------------------------------

/// Sparse multivariate polynomial with cyclotomic coefficients. Variables
/// are kept sorted and pruned; term exponent vectors align with the
/// variable list, ordered lexicographically in the map.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    order: u64,
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, CyclotomicNumber>,
}

impl MultiPoly {
    pub fn zero(order: u64) -> Self {
        MultiPoly { order, vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn constant(c: CyclotomicNumber) -> Self {
        let order = c.order();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MultiPoly { order, vars: Vec::new(), terms }
    }

    pub fn from_integer(order: u64, v: i64) -> Self {
        Self::constant(CyclotomicNumber::from_integer(order, v))
    }

    pub fn var(order: u64, name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1u32], CyclotomicNumber::one(order));
        MultiPoly { order, vars: vec![name.to_string()], terms }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &CyclotomicNumber)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Remaps this polynomial's exponent vectors onto a superset variable
    /// list (sorted).
    fn remap(&self, vars: &[String]) -> BTreeMap<Vec<u32>, CyclotomicNumber> {
        let idx: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("superset vars"))
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut ne = vec![0u32; vars.len()];
                for (i, &x) in e.iter().enumerate() {
                    ne[idx[i]] = x;
                }
                (ne, c.clone())
            })
            .collect()
    }

    fn union_vars(a: &Self, b: &Self) -> Vec<String> {
        let mut vars: Vec<String> = a.vars.iter().chain(b.vars.iter()).cloned().collect();
        vars.sort();
        vars.dedup();
        vars
    }

    /// Drops zero coefficients and variables that no longer occur.
    fn normalize(order: u64, vars: Vec<String>, terms: BTreeMap<Vec<u32>, CyclotomicNumber>) -> Self {
        let mut terms: BTreeMap<Vec<u32>, CyclotomicNumber> =
            terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let used: Vec<bool> = (0..vars.len())
            .map(|i| terms.keys().any(|e| e[i] != 0))
            .collect();
        if used.iter().any(|u| !u) {
            let kept: Vec<String> = vars
                .iter()
                .zip(&used)
                .filter(|(_, &u)| u)
                .map(|(v, _)| v.clone())
                .collect();
            terms = terms
                .into_iter()
                .map(|(e, c)| {
                    let ne: Vec<u32> = e
                        .iter()
                        .zip(&used)
                        .filter(|(_, &u)| u)
                        .map(|(&x, _)| x)
                        .collect();
                    (ne, c)
                })
                .collect();
            return MultiPoly { order, vars: kept, terms };
        }
        MultiPoly { order, vars, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "coefficient order mismatch");
        let vars = Self::union_vars(self, other);
        let mut terms = self.remap(&vars);
        for (e, c) in other.remap(&vars) {
            match terms.get_mut(&e) {
                Some(acc) => *acc = &*acc + &c,
                None => {
                    terms.insert(e, c);
                }
            }
        }
        Self::normalize(self.order, vars, terms)
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            order: self.order,
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "coefficient order mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.order);
        }
        let vars = Self::union_vars(self, other);
        let a = self.remap(&vars);
        let b = other.remap(&vars);
        let mut terms: BTreeMap<Vec<u32>, CyclotomicNumber> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let prod = ca * cb;
                match terms.get_mut(&e) {
                    Some(acc) => *acc = &*acc + &prod,
                    None => {
                        terms.insert(e, prod);
                    }
                }
            }
        }
        Self::normalize(self.order, vars, terms)
    }

    pub fn scale(&self, s: &CyclotomicNumber) -> Self {
        assert_eq!(self.order, s.order(), "coefficient order mismatch");
        Self::normalize(
            self.order,
            self.vars.clone(),
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        )
    }

    pub fn scale_rational(&self, s: &BigRational) -> Self {
        self.scale(&CyclotomicNumber::from_rational(self.order, s.clone()))
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(CyclotomicNumber::one(self.order));
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Substitutes a polynomial for a variable. Unknown variables leave the
    /// polynomial unchanged.
    pub fn substitute(&self, var: &str, replacement: &Self) -> Self {
        assert_eq!(self.order, replacement.order, "coefficient order mismatch");
        let Some(vi) = self.vars.iter().position(|v| v == var) else {
            return self.clone();
        };
        let mut powers: Vec<Option<MultiPoly>> = Vec::new();
        let mut power = |e: u32, repl: &MultiPoly, order: u64| -> MultiPoly {
            let e = e as usize;
            if powers.len() <= e {
                powers.resize(e + 1, None);
            }
            if powers[e].is_none() {
                let p = if e == 0 {
                    MultiPoly::constant(CyclotomicNumber::one(order))
                } else {
                    repl.pow(e as u32)
                };
                powers[e] = Some(p);
            }
            powers[e].clone().unwrap()
        };
        let mut acc = Self::zero(self.order);
        for (e, c) in &self.terms {
            let mut rest_vars = Vec::new();
            let mut rest_exps = Vec::new();
            for (i, (&x, v)) in e.iter().zip(&self.vars).enumerate() {
                if i != vi && x != 0 {
                    rest_vars.push(v.clone());
                    rest_exps.push(x);
                }
            }
            let mut rest_terms = BTreeMap::new();
            rest_terms.insert(rest_exps, c.clone());
            let rest = MultiPoly { order: self.order, vars: rest_vars, terms: rest_terms };
            acc = acc.add(&rest.mul(&power(e[vi], replacement, self.order)));
        }
        acc
    }

    /// Evaluates with every variable assigned a cyclotomic value.
    pub fn eval(&self, assignment: &BTreeMap<String, CyclotomicNumber>) -> Result<CyclotomicNumber> {
        let mut acc = CyclotomicNumber::zero(self.order);
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (&x, v) in e.iter().zip(&self.vars) {
                if x == 0 {
                    continue;
                }
                let val = assignment.get(v).ok_or_else(|| {
                    Error::InvalidParameters(format!("no value assigned to variable {v}"))
                })?;
                term = &term * &val.pow(x as u64);
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        match self.vars.iter().position(|v| v == var) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Dense coefficient list when the polynomial involves only `var`
    /// (constants allowed); `None` if another variable occurs.
    pub fn dense_coeffs_in(&self, var: &str) -> Option<Vec<CyclotomicNumber>> {
        if !self.vars.iter().all(|v| v == var) {
            return None;
        }
        let deg = self.degree_in(var) as usize;
        let mut out = vec![CyclotomicNumber::zero(self.order); deg + 1];
        for (e, c) in &self.terms {
            let i = e.first().copied().unwrap_or(0) as usize;
            out[i] = c.clone();
        }
        Some(out)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (&x, v) in e.iter().zip(&self.vars) {
                match x {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{x}")?,
                }
            }
        }
        Ok(())
    }
}

/// Order-fold forward difference of `f` in `var`, where one unit step of
/// `var` shifts by `step`: the alternating binomial sum
/// `sum_s (-1)^(order-s) C(order, s) f[var -> var + s*step]`.
pub fn finite_difference(f: &MultiPoly, var: &str, step: &MultiPoly, order: u64) -> MultiPoly {
    if order == 0 {
        return f.clone();
    }
    let field_order = f.order();
    let mut acc = MultiPoly::zero(field_order);
    for s in 0..=order {
        let shifted_var = MultiPoly::var(field_order, var)
            .add(&step.scale_rational(&BigRational::from_integer(BigInt::from(s))));
        let term = f.substitute(var, &shifted_var);
        let sign = if (order - s).is_multiple_of(2) { 1 } else { -1 };
        let coeff = binom_rat(order, s) * BigRational::from_integer(BigInt::from(sign));
        acc = acc.add(&term.scale_rational(&coeff));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(order: u64, v: i64) -> CyclotomicNumber {
        CyclotomicNumber::from_integer(order, v)
    }

    fn upoly(order: u64, coeffs: &[i64]) -> UniPoly {
        UniPoly::from_coeffs(order, coeffs.iter().map(|&v| c(order, v)).collect())
    }

    #[test]
    fn uni_arithmetic_examples() {
        let order = 2;
        let a = upoly(order, &[1, -1]); // 1 - z
        let b = upoly(order, &[1, 1]); // 1 + z
        assert_eq!(a.mul(&b), upoly(order, &[1, 0, -1])); // 1 - z^2
        let p = upoly(order, &[1, 1, 1]);
        assert_eq!(p.evaluate(&c(order, 1)), c(order, 3));
        // (1-z)^2 (1+z) = 1 - z - z^2 + z^3
        assert_eq!(a.pow(2).mul(&b), upoly(order, &[1, -1, -1, 1]));
    }

    #[test]
    fn divide_exact_examples() {
        let order = 2;
        let g = upoly(order, &[1, -1, -1, 1]);
        let d = UniPoly::one_minus_z(order).pow(2);
        assert_eq!(g.divide_exact(&d).unwrap(), upoly(order, &[1, 1]));
        let p = upoly(order, &[3, 0, 2]);
        assert_eq!(p.divide_exact(&UniPoly::one(order)).unwrap(), p);
        assert_eq!(
            upoly(order, &[1, 0, -1]).divide_exact(&upoly(order, &[1, -1])).unwrap(),
            upoly(order, &[1, 1])
        );
        assert!(matches!(
            upoly(order, &[1, 1]).divide_exact(&upoly(order, &[1, -1])),
            Err(Error::InexactDivision)
        ));
        assert!(matches!(
            upoly(order, &[1]).divide_exact(&UniPoly::zero(order)),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn shift_by_z_power() {
        let order = 2;
        let p = upoly(order, &[1, 2]);
        assert_eq!(p.mul_z_pow(2), upoly(order, &[0, 0, 1, 2]));
        assert_eq!(p.mul_z_pow(0), p);
        assert!(UniPoly::zero(order).mul_z_pow(3).is_zero());
    }

    #[test]
    fn multiplicity_examples() {
        let order = 2;
        assert_eq!(upoly(order, &[1, -1]).multiplicity_at_one().unwrap(), 1);
        assert_eq!(upoly(order, &[1, -1, -1, 1]).multiplicity_at_one().unwrap(), 2);
        assert_eq!(upoly(order, &[1, 1]).multiplicity_at_one().unwrap(), 0);
        assert!(matches!(
            UniPoly::zero(order).multiplicity_at_one(),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn multi_arithmetic_examples() {
        let order = 2;
        let x = MultiPoly::var(order, "x");
        let y = MultiPoly::var(order, "y");
        // (x + y)^2 = x^2 + 2xy + y^2
        let sq = x.add(&y).pow(2);
        let expect = x
            .pow(2)
            .add(&x.mul(&y).scale(&c(order, 2)))
            .add(&y.pow(2));
        assert_eq!(sq, expect);
        // substitute y -> 0
        let zero = MultiPoly::zero(order);
        assert_eq!(x.add(&y).substitute("y", &zero), x);
        // (x + 2y)(x - 2y) = x^2 - 4y^2
        let a = x.add(&y.scale(&c(order, 2)));
        let b = x.sub(&y.scale(&c(order, 2)));
        assert_eq!(a.mul(&b), x.pow(2).sub(&y.pow(2).scale(&c(order, 4))));
    }

    #[test]
    fn unused_variables_are_pruned() {
        let order = 2;
        let x = MultiPoly::var(order, "x");
        let y = MultiPoly::var(order, "y");
        let p = x.add(&y).sub(&y);
        assert_eq!(p, x);
        assert_eq!(p.vars(), &["x".to_string()]);
    }

    #[test]
    fn finite_difference_examples() {
        let order = 2;
        let x = MultiPoly::var(order, "x");
        let y = MultiPoly::var(order, "y");
        let k = MultiPoly::var(order, "k");
        // f = x + k*y, difference in k with unit step: y
        let f = x.add(&k.mul(&y));
        // one unit step of k shifts the argument by y
        assert_eq!(
            finite_difference(&f, "k", &MultiPoly::from_integer(order, 1), 1),
            y
        );
        // order 2 on (x + k*y)^2: constant 2 y^2
        let f2 = f.pow(2);
        assert_eq!(
            finite_difference(&f2, "k", &MultiPoly::from_integer(order, 1), 2),
            y.pow(2).scale(&c(order, 2))
        );
        // order above degree annihilates
        assert!(finite_difference(&f, "k", &MultiPoly::from_integer(order, 1), 2).is_zero());
        // var absent: difference of a constant function is zero
        assert!(finite_difference(&x, "k", &MultiPoly::from_integer(order, 1), 1).is_zero());
    }

    #[test]
    fn finite_difference_eliminates_peak_variable() {
        // order-D difference of a degree-D polynomial in the shifted
        // variable leaves neither that variable nor x behind
        let order = 3;
        let x = MultiPoly::var(order, "x");
        let y = MultiPoly::var(order, "y");
        let k = MultiPoly::var(order, "k");
        let f = x.add(&k.mul(&y)).pow(3);
        let d = finite_difference(&f, "k", &MultiPoly::from_integer(order, 1), 3);
        assert_eq!(d.degree_in("k"), 0);
        assert_eq!(d.degree_in("x"), 0);
        // 3! * y^3
        assert_eq!(d, y.pow(3).scale(&c(order, 6)));
    }

    fn arb_multipoly(order: u64) -> impl Strategy<Value = MultiPoly> {
        let vars = ["x", "y", "k"];
        prop::collection::vec(
            (0u32..3, 0u32..3, 0u32..3, -4i64..=4),
            0..6,
        )
        .prop_map(move |terms| {
            let mut acc = MultiPoly::zero(order);
            for (ex, ey, ek, co) in terms {
                let mono = MultiPoly::var(order, vars[0])
                    .pow(ex)
                    .mul(&MultiPoly::var(order, vars[1]).pow(ey))
                    .mul(&MultiPoly::var(order, vars[2]).pow(ek))
                    .scale(&CyclotomicNumber::from_integer(order, co));
                acc = acc.add(&mono);
            }
            acc
        })
    }

    proptest! {
        #[test]
        fn divide_roundtrip(
            qs in prop::collection::vec(-5i64..=5, 1..6),
            ds in prop::collection::vec(-5i64..=5, 1..4),
        ) {
            let order = 4;
            let q = upoly(order, &qs);
            let d = upoly(order, &ds);
            prop_assume!(!d.is_zero());
            let prod = q.mul(&d);
            prop_assert_eq!(prod.divide_exact(&d).unwrap(), q);
        }

        #[test]
        fn difference_is_linear(
            f in arb_multipoly(3),
            g in arb_multipoly(3),
            s in -3i64..=3,
            ord in 1u64..=3,
        ) {
            let step = MultiPoly::from_integer(3, 1);
            let lhs = finite_difference(&f.add(&g.scale(&c(3, s))), "k", &step, ord);
            let rhs = finite_difference(&f, "k", &step, ord)
                .add(&finite_difference(&g, "k", &step, ord).scale(&c(3, s)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn binomial_formula_matches_repeated_first_difference(
            f in arb_multipoly(4),
            ord in 1u64..=3,
        ) {
            // the implementation expands the alternating binomial sum; it
            // must agree with iterating the first difference
            let step = MultiPoly::from_integer(4, 1);
            let direct = finite_difference(&f, "k", &step, ord);
            let mut iterated = f;
            for _ in 0..ord {
                iterated = finite_difference(&iterated, "k", &step, 1);
            }
            prop_assert_eq!(direct, iterated);
        }
    }
}
