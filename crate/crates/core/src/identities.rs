//! Machine verification of the exact identities satisfied by the signed
//! digit weights `xi^B(v)` in the non-periodic regime (rad(M) not dividing
//! rad(N)).
//!
//! The central objects are the signed generating polynomial
//! `G_p(z) = sum_{v < M^(p+1)} xi^B(v) z^v`, its exact quotient by
//! `(1-z)^(p+1)` (the beta sequence), and a family of weighted power sums.
//! Every check here reduces to an exact zero test over the cyclotomic
//! field; failures are reported with a rendered witness and are never
//! swallowed.
//!
//! Multi-variable sums are evaluated by exact multinomial regrouping: the
//! nested sum over digit tuples factors into per-variable weighted power
//! sums, which keeps symbolic verification cheap without weakening it.
//! Unit tests cross-check the regrouped evaluation against literal tuple
//! enumeration at small sizes.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith;
use crate::config::Mode;
use crate::cyclotomic::CyclotomicNumber;
use crate::digitmap::{self, base_shift_u64, residue_u64};
use crate::error::{Error, Result};
use crate::polyring::{MultiPoly, UniPoly};

/// Hard cap on materialized coefficient vectors.
const MAX_TERMS: u64 = 1 << 22;

fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn rat_biguint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

fn rat_binom(n: u64, k: u64) -> BigRational {
    rat_biguint(&arith::binomial(n, k))
}

fn sign_rat(exp: u64) -> BigRational {
    if exp.is_multiple_of(2) {
        rat_int(1)
    } else {
        rat_int(-1)
    }
}

/// Validates the standing hypothesis of every identity in this module.
fn ensure_params(m: u64, n: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidBase(m));
    }
    if n == 0 {
        return Err(Error::InvalidTarget);
    }
    if digitmap::radical_divides(m, n)? {
        return Err(Error::InvalidParameters(format!(
            "rad({m}) divides rad({n}); these identities hold only in the non-periodic regime"
        )));
    }
    Ok(())
}

fn term_count(m: u64, digits: u64) -> Result<u64> {
    let d = u32::try_from(digits)
        .map_err(|_| Error::WindowTooLarge(format!("digit count {digits} too large")))?;
    m.checked_pow(d)
        .filter(|&s| s <= MAX_TERMS)
        .ok_or_else(|| Error::WindowTooLarge(format!("M^{d} = {m}^{d} exceeds the term cap")))
}

/// The M distinct root powers, indexed by residue.
fn root_table(m: u64) -> Vec<CyclotomicNumber> {
    (0..m).map(|j| CyclotomicNumber::root_power_u64(m, j)).collect()
}

// ---------------------------------------------------------------------------
// Generating polynomials and weighted power sums
// ---------------------------------------------------------------------------

/// The signed generating polynomial of level p: coefficients `xi^B(v)` for
/// `v < M^(p+1)`, degree exactly `M^(p+1) - 1`.
pub fn generating_poly(p: u64, m: u64, n: u64) -> Result<UniPoly> {
    ensure_params(m, n)?;
    let size = term_count(m, p + 1)?;
    let roots = root_table(m);
    let coeffs = (0..size)
        .map(|v| roots[residue_u64(v, m, n) as usize].clone())
        .collect();
    Ok(UniPoly::from_coeffs(m, coeffs))
}

/// The same polynomial assembled from its factorization over digit
/// positions: `prod_l sum_{d<M} (xi^(N^l) z^(M^l))^d`. Must agree with the
/// summed form coefficient for coefficient.
pub fn generating_poly_product_form(p: u64, m: u64, n: u64) -> Result<UniPoly> {
    ensure_params(m, n)?;
    term_count(m, p + 1)?;
    let mut acc = UniPoly::one(m);
    for l in 0..=p {
        let e = arith::pow_mod(n, l, m);
        let stride = m.pow(l as u32) as usize;
        let mut coeffs =
            vec![CyclotomicNumber::zero(m); (m as usize - 1) * stride + 1];
        for d in 0..m {
            coeffs[d as usize * stride] = CyclotomicNumber::root_power_u64(m, arith::mul_mod(d, e, m));
        }
        acc = acc.mul(&UniPoly::from_coeffs(m, coeffs));
    }
    Ok(acc)
}

/// Weighted power sums `sum_{v < M^digits} v^a xi^B(v)` for `a = 0..=max_a`,
/// computed by exact per-residue accumulation (a regrouping of the defining
/// sum, independent of any vanishing theorem).
fn weighted_moments(digits: u64, m: u64, n: u64, max_a: u64) -> Result<Vec<CyclotomicNumber>> {
    let size = term_count(m, digits)?;
    let width = (max_a + 1) as usize;
    let mut sums = vec![vec![BigUint::zero(); m as usize]; width];
    for v in 0..size {
        let r = residue_u64(v, m, n) as usize;
        let mut pw = BigUint::one();
        for (a, row) in sums.iter_mut().enumerate() {
            row[r] += &pw;
            if a + 1 < width {
                pw *= v;
            }
        }
    }
    let roots = root_table(m);
    Ok(sums
        .into_iter()
        .map(|row| {
            let mut acc = CyclotomicNumber::zero(m);
            for (j, total) in row.into_iter().enumerate() {
                if !total.is_zero() {
                    acc = &acc + &roots[j].scale(&rat_biguint(&total));
                }
            }
            acc
        })
        .collect())
}

/// The exact sum `S_k = sum_{v < M^(p+1)} v^k xi^B(v)`. Zero is the
/// theorem's claim for `k <= p`; larger k are legal inputs and generally
/// nonzero.
pub fn weighted_power_sum(k: u64, p: u64, m: u64, n: u64) -> Result<CyclotomicNumber> {
    ensure_params(m, n)?;
    Ok(weighted_moments(p + 1, m, n, k)?.pop().expect("table has k+1 entries"))
}

/// Table of `sum_{v < M^digits} v^a B(v)^b xi^B(v)` for all `a <= max_a`,
/// `b <= max_b`, indexed `[a][b]`.
fn mixed_weighted_moments(
    digits: u64,
    m: u64,
    n: u64,
    max_a: u64,
    max_b: u64,
) -> Result<Vec<Vec<CyclotomicNumber>>> {
    let size = term_count(m, digits)?;
    let rows = (max_a + 1) as usize;
    let cols = (max_b + 1) as usize;
    let mut sums = vec![vec![vec![BigUint::zero(); m as usize]; cols]; rows];
    for v in 0..size {
        let r = residue_u64(v, m, n) as usize;
        let shifted = base_shift_u64(v, m, n);
        let mut vp = BigUint::one();
        for row in sums.iter_mut() {
            let mut bp = vp.clone();
            for cell in row.iter_mut() {
                cell[r] += &bp;
                bp *= &shifted;
            }
            vp *= v;
        }
    }
    let roots = root_table(m);
    Ok(sums
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|cell| {
                    let mut acc = CyclotomicNumber::zero(m);
                    for (j, total) in cell.into_iter().enumerate() {
                        if !total.is_zero() {
                            acc = &acc + &roots[j].scale(&rat_biguint(&total));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Beta sequences
// ---------------------------------------------------------------------------

/// Coefficients of the exact quotient `G_p(z) / (1-z)^(p+1)`; finitely
/// supported with highest index at most `M^(p+1) - p - 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSequence {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub p: u64,
    pub coeffs: Vec<CyclotomicNumber>,
}

impl BetaSequence {
    /// Coefficient at index k (zero beyond the stored support).
    pub fn coeff(&self, k: usize) -> CyclotomicNumber {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CyclotomicNumber::zero(self.m))
    }
}

/// Beta by polynomial division. Inexact division would contradict the
/// multiplicity theorem and surfaces as a theorem violation.
pub fn beta(p: u64, m: u64, n: u64) -> Result<BetaSequence> {
    let g = generating_poly(p, m, n)?;
    let den = UniPoly::one_minus_z(m).pow((p + 1) as u32);
    let quotient = g.divide_exact(&den).map_err(|e| match e {
        Error::InexactDivision => Error::TheoremViolation {
            identity: "G-multiplicity".into(),
            witness: format!(
                "(1-z)^{} does not divide the level-{p} generating polynomial for M={m}, N={n}",
                p + 1
            ),
        },
        other => other,
    })?;
    Ok(BetaSequence { m, n, p, coeffs: quotient.coeffs().to_vec() })
}

/// `limit` leading values of the convolution
/// `sum_{k <= v, k < g.len()} g[k] * C(v - k + passes - 1, passes - 1)`,
/// computed as `passes` nested prefix sums.
fn iterated_prefix_sums(
    field_order: u64,
    g: &[CyclotomicNumber],
    passes: u64,
    limit: usize,
) -> Vec<CyclotomicNumber> {
    let mut cur: Vec<CyclotomicNumber> = (0..limit)
        .map(|i| g.get(i).cloned().unwrap_or_else(|| CyclotomicNumber::zero(field_order)))
        .collect();
    for _ in 0..passes {
        for i in 1..cur.len() {
            cur[i] = &cur[i] + &cur[i - 1];
        }
    }
    cur
}

/// Beta by the forward convolution `sum_k xi^B(k) C(v-k+p, p)` over
/// `k < M^(p+1)`. For `p = 0` this degenerates to plain prefix sums, the
/// generating-function base case.
pub fn beta_by_convolution(p: u64, m: u64, n: u64) -> Result<BetaSequence> {
    let g = generating_poly(p, m, n)?;
    let size = g.coeffs().len();
    let support = size - (p as usize + 1);
    let coeffs = iterated_prefix_sums(m, g.coeffs(), p + 1, support);
    Ok(BetaSequence { m, n, p, coeffs })
}

/// Closed form for the coefficient sum of beta:
/// `M^((p+1)(p+2)/2) * prod_l 1/(1 - xi^(N^l))`.
fn closed_form_beta_sum(p: u64, m: u64, n: u64) -> Result<CyclotomicNumber> {
    let exp = u32::try_from((p + 1) * (p + 2) / 2)
        .map_err(|_| Error::WindowTooLarge(format!("moment exponent overflow at p={p}")))?;
    let scale = BigUint::from(m).pow(exp);
    let mut acc = CyclotomicNumber::from_biguint(m, &scale);
    let one = CyclotomicNumber::one(m);
    for l in 0..=p {
        let e = arith::pow_mod(n, l, m);
        let factor = &one - &CyclotomicNumber::root_power_u64(m, e);
        acc = &acc * &factor.inverse()?;
    }
    Ok(acc)
}

fn moment0_sides(p: u64, m: u64, n: u64) -> Result<(CyclotomicNumber, CyclotomicNumber)> {
    let b = beta(p, m, n)?;
    let mut sum = CyclotomicNumber::zero(m);
    for c in &b.coeffs {
        sum = &sum + c;
    }
    Ok((sum, closed_form_beta_sum(p, m, n)?))
}

fn moment1_sides(p: u64, m: u64, n: u64) -> Result<(CyclotomicNumber, CyclotomicNumber)> {
    let b = beta(p, m, n)?;
    let mut weighted = CyclotomicNumber::zero(m);
    let mut plain = CyclotomicNumber::zero(m);
    for (k, c) in b.coeffs.iter().enumerate() {
        plain = &plain + c;
        weighted = &weighted + &c.scale(&rat_int(k as i64));
    }
    // sum_l ((M^(l+1) - 1)/2 + M^l xi^(N^l) / (1 - xi^(N^l)))
    let one = CyclotomicNumber::one(m);
    let mut factor = CyclotomicNumber::zero(m);
    for l in 0..=p {
        let half = BigRational::new(
            BigInt::from(BigUint::from(m).pow(l as u32 + 1) - BigUint::one()),
            BigInt::from(2),
        );
        let xi_pow = CyclotomicNumber::root_power_u64(m, arith::pow_mod(n, l, m));
        let ratio = &xi_pow * &(&one - &xi_pow).inverse()?;
        let scaled = ratio.scale(&rat_biguint(&BigUint::from(m).pow(l as u32)));
        factor = &(&factor + &CyclotomicNumber::from_rational(m, half)) + &scaled;
    }
    Ok((weighted, &plain * &factor))
}

/// Sum of the beta coefficients, asserted equal to its closed form; the
/// common value is returned and a mismatch is a theorem violation.
pub fn moment0(p: u64, m: u64, n: u64) -> Result<CyclotomicNumber> {
    let (lhs, rhs) = moment0_sides(p, m, n)?;
    if lhs != rhs {
        return Err(Error::TheoremViolation {
            identity: "moment-0".into(),
            witness: format!("sum {lhs} != closed form {rhs} at p={p}, M={m}, N={n}"),
        });
    }
    Ok(lhs)
}

/// First moment `sum k beta_k`, asserted equal to its closed form.
pub fn moment1(p: u64, m: u64, n: u64) -> Result<CyclotomicNumber> {
    let (lhs, rhs) = moment1_sides(p, m, n)?;
    if lhs != rhs {
        return Err(Error::TheoremViolation {
            identity: "moment-1".into(),
            witness: format!("first moment {lhs} != closed form {rhs} at p={p}, M={m}, N={n}"),
        });
    }
    Ok(lhs)
}

// ---------------------------------------------------------------------------
// Identity reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "G-multiplicity")]
    GMultiplicity,
    #[serde(rename = "S_k-vanishing")]
    SkVanishing,
    #[serde(rename = "convolution-forward")]
    ConvolutionForward,
    #[serde(rename = "convolution-inverse")]
    ConvolutionInverse,
    #[serde(rename = "moment-0")]
    Moment0,
    #[serde(rename = "moment-1")]
    Moment1,
    #[serde(rename = "fd-single")]
    FdSingle,
    #[serde(rename = "fd-multi")]
    FdMulti,
    #[serde(rename = "poly-vanishing")]
    PolyVanishing,
    #[serde(rename = "S_pl-closed-form")]
    SplClosedForm,
    #[serde(rename = "first-closed-form")]
    FirstClosedForm,
    #[serde(rename = "second-closed-form")]
    SecondClosedForm,
}

/// Outcome of one identity check. `verified` is true exactly when no
/// witness of a discrepancy exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: IdentityId,
    pub params: BTreeMap<String, Value>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl IdentityReport {
    fn ok(identity: IdentityId, params: BTreeMap<String, Value>) -> Self {
        IdentityReport { identity, params, verified: true, witness: None }
    }

    fn failed(identity: IdentityId, params: BTreeMap<String, Value>, witness: String) -> Self {
        IdentityReport { identity, params, verified: false, witness: Some(witness) }
    }

    /// Converts an unverified report into the error it witnesses.
    pub fn into_result(self) -> Result<IdentityReport> {
        if self.verified {
            Ok(self)
        } else {
            Err(Error::TheoremViolation {
                identity: serde_json::to_value(self.identity)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_else(|| format!("{:?}", self.identity)),
                witness: self.witness.unwrap_or_default(),
            })
        }
    }
}

fn params_map(entries: &[(&str, Value)]) -> BTreeMap<String, Value> {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn base_params(m: u64, n: u64) -> Vec<(&'static str, Value)> {
    vec![("M", Value::from(m)), ("N", Value::from(n))]
}

/// Compares two polynomials per the configured mode and renders a witness
/// on mismatch. Sampled mode checks (deg+1) integer points per variable,
/// which separates polynomials of that degree exactly.
fn polys_agree(lhs: &MultiPoly, rhs: &MultiPoly, mode: Mode) -> Option<String> {
    match mode {
        Mode::Symbolic => {
            if lhs == rhs {
                None
            } else {
                Some(format!("difference = {}", lhs.sub(rhs)))
            }
        }
        Mode::Sampled => {
            let diff = lhs.sub(rhs);
            if diff.is_zero() {
                return None;
            }
            let vars: Vec<String> = diff.vars().to_vec();
            let deg = diff.total_degree() as i64;
            let order = diff.order();
            let mut assignment: BTreeMap<String, CyclotomicNumber> = BTreeMap::new();
            fn grid(
                diff: &MultiPoly,
                vars: &[String],
                deg: i64,
                order: u64,
                assignment: &mut BTreeMap<String, CyclotomicNumber>,
            ) -> Option<String> {
                match vars.first() {
                    None => {
                        let value = diff.eval(assignment).expect("all variables assigned");
                        if value.is_zero() {
                            None
                        } else {
                            Some(format!(
                                "differs at {:?}: value {}",
                                assignment
                                    .iter()
                                    .map(|(k, v)| format!("{k}={v}"))
                                    .collect::<Vec<_>>()
                                    .join(", "),
                                value
                            ))
                        }
                    }
                    Some(v) => {
                        for point in 0..=deg {
                            assignment
                                .insert(v.clone(), CyclotomicNumber::from_integer(order, point));
                            if let Some(w) = grid(diff, &vars[1..], deg, order, assignment) {
                                return Some(w);
                            }
                        }
                        assignment.remove(v);
                        None
                    }
                }
            }
            grid(&diff, &vars, deg, order, &mut assignment)
        }
    }
}

// ---------------------------------------------------------------------------
// Structural checks: multiplicity, vanishing sums, convolutions, moments
// ---------------------------------------------------------------------------

/// Root multiplicity of the generating polynomial at z = 1 is at least
/// p + 1, and the summed and factored constructions agree.
pub fn check_multiplicity(p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    let g = generating_poly(p, m, n)?;
    let product = generating_poly_product_form(p, m, n)?;
    if g != product {
        return Ok(IdentityReport::failed(
            IdentityId::GMultiplicity,
            params,
            "summed and factored generating polynomials disagree".into(),
        ));
    }
    let mult = g.multiplicity_at_one()?;
    if u64::from(mult) > p {
        Ok(IdentityReport::ok(IdentityId::GMultiplicity, params))
    } else {
        Ok(IdentityReport::failed(
            IdentityId::GMultiplicity,
            params,
            format!("multiplicity {mult} below required {}", p + 1),
        ))
    }
}

/// `S_k = 0` for `k <= p`; k beyond p is outside the statement.
pub fn check_power_sum_vanishing(k: u64, p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    if k > p {
        return Err(Error::InvalidParameters(format!(
            "vanishing holds for k <= p; got k={k}, p={p}"
        )));
    }
    let params = params_map(&[
        ("M", Value::from(m)),
        ("N", Value::from(n)),
        ("p", Value::from(p)),
        ("k", Value::from(k)),
    ]);
    let s = weighted_power_sum(k, p, m, n)?;
    if s.is_zero() {
        Ok(IdentityReport::ok(IdentityId::SkVanishing, params))
    } else {
        Ok(IdentityReport::failed(IdentityId::SkVanishing, params, format!("S_{k} = {s}")))
    }
}

/// Forward convolution: the level p+1 beta sequence equals
/// `sum_k xi^B(k) C(v-k+p+1, p+1)` for every index below `M^(p+2)`
/// (beyond the support both sides must vanish).
pub fn check_convolution_forward(p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    let level = p + 1;
    let by_division = beta(level, m, n)?;
    let g = generating_poly(level, m, n)?;
    let limit = term_count(m, level + 1)? as usize;
    let convolved = iterated_prefix_sums(m, g.coeffs(), level + 1, limit);
    for (v, value) in convolved.iter().enumerate() {
        let expected = by_division.coeff(v);
        if *value != expected {
            return Ok(IdentityReport::failed(
                IdentityId::ConvolutionForward,
                params,
                format!("index {v}: convolution {value}, division {expected}"),
            ));
        }
    }
    Ok(IdentityReport::ok(IdentityId::ConvolutionForward, params))
}

/// Inversion: `xi^B(v) = sum_k (-1)^k C(p+1, k) beta_(v-k)` for all
/// `v < M^(p+1)` (binomials vanish past p+1).
pub fn check_convolution_inverse(p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    let b = beta(p, m, n)?;
    let size = term_count(m, p + 1)?;
    let roots = root_table(m);
    let signed_binoms: Vec<BigRational> = (0..=p + 1)
        .map(|k| rat_binom(p + 1, k) * sign_rat(k))
        .collect();
    for v in 0..size {
        let mut acc = CyclotomicNumber::zero(m);
        for (k, w) in signed_binoms.iter().enumerate() {
            let k = k as u64;
            if k > v {
                break;
            }
            acc = &acc + &b.coeff((v - k) as usize).scale(w);
        }
        let expected = &roots[residue_u64(v, m, n) as usize];
        if &acc != expected {
            return Ok(IdentityReport::failed(
                IdentityId::ConvolutionInverse,
                params,
                format!("index {v}: inversion gives {acc}, digit weight is {expected}"),
            ));
        }
    }
    Ok(IdentityReport::ok(IdentityId::ConvolutionInverse, params))
}

pub fn check_moment0(p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    let (lhs, rhs) = moment0_sides(p, m, n)?;
    if lhs == rhs {
        Ok(IdentityReport::ok(IdentityId::Moment0, params))
    } else {
        Ok(IdentityReport::failed(IdentityId::Moment0, params, format!("sum {lhs} != {rhs}")))
    }
}

pub fn check_moment1(p: u64, m: u64, n: u64) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    let (lhs, rhs) = moment1_sides(p, m, n)?;
    if lhs == rhs {
        Ok(IdentityReport::ok(IdentityId::Moment1, params))
    } else {
        Ok(IdentityReport::failed(IdentityId::Moment1, params, format!("moment {lhs} != {rhs}")))
    }
}

/// Vanishing of `sum_{v < M^p} v^a B(v)^b xi^B(v)` for total degree
/// `a + b <= p - 1`.
pub fn check_vanishing_sum(p: u64, m: u64, n: u64, a: u64, b: u64) -> Result<IdentityReport> {
    if p < 1 || a + b > p - 1 {
        return Err(Error::InvalidParameters(format!(
            "vanishing sum needs p >= 1 and a + b <= p - 1; got p={p}, a={a}, b={b}"
        )));
    }
    ensure_params(m, n)?;
    let params = params_map(&[
        ("M", Value::from(m)),
        ("N", Value::from(n)),
        ("p", Value::from(p)),
        ("a", Value::from(a)),
        ("b", Value::from(b)),
    ]);
    let table = mixed_weighted_moments(p, m, n, a, b)?;
    let value = &table[a as usize][b as usize];
    if value.is_zero() {
        Ok(IdentityReport::ok(IdentityId::PolyVanishing, params))
    } else {
        Ok(IdentityReport::failed(
            IdentityId::PolyVanishing,
            params,
            format!("sum = {value}"),
        ))
    }
}

// ---------------------------------------------------------------------------
// Finite-difference identities
// ---------------------------------------------------------------------------

fn univariate_coeffs(f: &MultiPoly, arg: &str) -> Result<Vec<CyclotomicNumber>> {
    f.dense_coeffs_in(arg).ok_or_else(|| {
        Error::InvalidParameters(format!(
            "test function must be univariate in {arg}, has variables {:?}",
            f.vars()
        ))
    })
}

/// Expands `f(x + c*y)` for an integer shift c, with f given by dense
/// coefficients in its argument.
fn expand_linear_shift(
    coeffs: &[CyclotomicNumber],
    c: u64,
    m: u64,
    x: &str,
    y: &str,
) -> MultiPoly {
    let xv = MultiPoly::var(m, x);
    let yv = MultiPoly::var(m, y);
    let mut acc = MultiPoly::zero(m);
    for (d, cd) in coeffs.iter().enumerate() {
        if cd.is_zero() {
            continue;
        }
        let d = d as u64;
        for i in 0..=d {
            let scalar = rat_binom(d, i) * rat_biguint(&BigUint::from(c).pow((d - i) as u32));
            let mono = xv.pow(i as u32).mul(&yv.pow((d - i) as u32));
            acc = acc.add(&mono.scale(&cd.scale(&scalar)));
        }
    }
    acc
}

/// `sum_v xi^B(v) f(x + v*y)` with the sum over v regrouped through the
/// weighted power sums: the coefficient of `x^i y^(d-i)` is
/// `C(d, i) S_(d-i)`.
fn linear_weighted_sum(
    coeffs: &[CyclotomicNumber],
    p: u64,
    m: u64,
    n: u64,
    x: &str,
    y: &str,
) -> Result<MultiPoly> {
    let max_d = coeffs.len().saturating_sub(1) as u64;
    let moments = weighted_moments(p + 1, m, n, max_d)?;
    let xv = MultiPoly::var(m, x);
    let yv = MultiPoly::var(m, y);
    let mut acc = MultiPoly::zero(m);
    for (d, cd) in coeffs.iter().enumerate() {
        if cd.is_zero() {
            continue;
        }
        let d = d as u64;
        for i in 0..=d {
            let weight = moments[(d - i) as usize].scale(&rat_binom(d, i));
            let mono = xv.pow(i as u32).mul(&yv.pow((d - i) as u32));
            acc = acc.add(&mono.scale(&(cd * &weight)));
        }
    }
    Ok(acc)
}

/// Single finite-difference identity:
/// `sum_v xi^B(v) f(x + v y) = (-1)^(p+1) sum_k beta_k D_y^(p+1) f(x + k y)`.
#[allow(clippy::too_many_arguments)]
pub fn check_difference_single(
    p: u64,
    m: u64,
    n: u64,
    f: &MultiPoly,
    arg: &str,
    x: &str,
    y: &str,
    mode: Mode,
) -> Result<IdentityReport> {
    ensure_params(m, n)?;
    let coeffs = univariate_coeffs(f, arg)?;
    let mut params = base_params(m, n);
    params.push(("p", Value::from(p)));
    params.push(("f", Value::from(f.to_string())));
    let params = params_map(&params);

    let lhs = linear_weighted_sum(&coeffs, p, m, n, x, y)?;

    let b = beta(p, m, n)?;
    let steps = p + 1;
    // collect the total scalar weight attached to each shift c = k + s
    let mut weights =
        vec![CyclotomicNumber::zero(m); b.coeffs.len() + steps as usize];
    for (k, bk) in b.coeffs.iter().enumerate() {
        if bk.is_zero() {
            continue;
        }
        for s in 0..=steps {
            let w = rat_binom(steps, s) * sign_rat(steps - s);
            weights[k + s as usize] = &weights[k + s as usize] + &bk.scale(&w);
        }
    }
    let mut rhs = MultiPoly::zero(m);
    for (c, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        rhs = rhs.add(&expand_linear_shift(&coeffs, c as u64, m, x, y).scale(w));
    }
    let rhs = rhs.scale_rational(&sign_rat(steps));

    match polys_agree(&lhs, &rhs, mode) {
        None => Ok(IdentityReport::ok(IdentityId::FdSingle, params)),
        Some(w) => Ok(IdentityReport::failed(IdentityId::FdSingle, params, w)),
    }
}

/// The r-fold weighted sum
/// `sum_(v_1..v_r) xi^(sum B(v_j)) f(x + sum v_j y_j)` regrouped through
/// per-level weighted power sums.
fn multi_linear_weighted_sum(
    coeffs: &[CyclotomicNumber],
    p_list: &[u64],
    m: u64,
    n: u64,
    x: &str,
    y_names: &[String],
) -> Result<MultiPoly> {
    let r = p_list.len();
    let max_d = coeffs.len().saturating_sub(1) as u64;
    let mut tables: BTreeMap<u64, Vec<CyclotomicNumber>> = BTreeMap::new();
    for &p in p_list {
        if let std::collections::btree_map::Entry::Vacant(slot) = tables.entry(p) {
            slot.insert(weighted_moments(p + 1, m, n, max_d)?);
        }
    }
    let xv = MultiPoly::var(m, x);
    let yv: Vec<MultiPoly> = y_names.iter().map(|y| MultiPoly::var(m, y)).collect();
    let mut acc = MultiPoly::zero(m);
    for (d, cd) in coeffs.iter().enumerate() {
        if cd.is_zero() {
            continue;
        }
        for alpha in arith::compositions(d as u64, r + 1) {
            let mut scalar = cd.scale(&rat_biguint(&arith::multinomial(&alpha)));
            let mut mono = xv.pow(alpha[0] as u32);
            for j in 0..r {
                scalar = &scalar * &tables[&p_list[j]][alpha[j + 1] as usize];
                mono = mono.mul(&yv[j].pow(alpha[j + 1] as u32));
            }
            acc = acc.add(&mono.scale(&scalar));
        }
    }
    Ok(acc)
}

/// `W(a) = sum_k beta_k sum_s (-1)^(q-s) C(q, s) (k+s)^a`: the
/// beta-weighted images of the power monomials under the q-fold forward
/// difference.
fn beta_difference_moments(b: &BetaSequence, q: u64, max_a: u64) -> Vec<CyclotomicNumber> {
    let m = b.m;
    let mut out = vec![CyclotomicNumber::zero(m); (max_a + 1) as usize];
    for (k, bk) in b.coeffs.iter().enumerate() {
        if bk.is_zero() {
            continue;
        }
        for s in 0..=q {
            let w = rat_binom(q, s) * sign_rat(q - s);
            let shift = k as u64 + s;
            let mut pw = BigUint::one();
            for slot in out.iter_mut() {
                *slot = &*slot + &bk.scale(&(&w * rat_biguint(&pw)));
                pw *= shift;
            }
        }
    }
    out
}

/// Multiple finite-difference identity (r nested sums).
#[allow(clippy::too_many_arguments)]
pub fn check_difference_multi(
    p_list: &[u64],
    m: u64,
    n: u64,
    f: &MultiPoly,
    arg: &str,
    x: &str,
    y_names: &[String],
    mode: Mode,
) -> Result<IdentityReport> {
    ensure_params(m, n)?;
    let r = p_list.len();
    if r < 1 || y_names.len() != r {
        return Err(Error::InvalidParameters(format!(
            "need r >= 1 levels with matching step names, got {r} levels and {} names",
            y_names.len()
        )));
    }
    let coeffs = univariate_coeffs(f, arg)?;
    let mut params = base_params(m, n);
    params.push(("p_list", Value::from(p_list.to_vec())));
    params.push(("f", Value::from(f.to_string())));
    let params = params_map(&params);

    let lhs = multi_linear_weighted_sum(&coeffs, p_list, m, n, x, y_names)?;

    let max_d = coeffs.len().saturating_sub(1) as u64;
    let mut tables: BTreeMap<u64, Vec<CyclotomicNumber>> = BTreeMap::new();
    for &p in p_list {
        if let std::collections::btree_map::Entry::Vacant(slot) = tables.entry(p) {
            let b = beta(p, m, n)?;
            slot.insert(beta_difference_moments(&b, p + 1, max_d));
        }
    }
    let total_order: u64 = p_list.iter().map(|&p| p + 1).sum();
    let xv = MultiPoly::var(m, x);
    let yv: Vec<MultiPoly> = y_names.iter().map(|y| MultiPoly::var(m, y)).collect();
    let mut rhs = MultiPoly::zero(m);
    for (d, cd) in coeffs.iter().enumerate() {
        if cd.is_zero() {
            continue;
        }
        for alpha in arith::compositions(d as u64, r + 1) {
            let mut scalar = cd.scale(&rat_biguint(&arith::multinomial(&alpha)));
            let mut mono = xv.pow(alpha[0] as u32);
            for j in 0..r {
                scalar = &scalar * &tables[&p_list[j]][alpha[j + 1] as usize];
                mono = mono.mul(&yv[j].pow(alpha[j + 1] as u32));
            }
            rhs = rhs.add(&mono.scale(&scalar));
        }
    }
    let rhs = rhs.scale_rational(&sign_rat(total_order));

    match polys_agree(&lhs, &rhs, mode) {
        None => Ok(IdentityReport::ok(IdentityId::FdMulti, params)),
        Some(w) => Ok(IdentityReport::failed(IdentityId::FdMulti, params, w)),
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// The bivariate weighted power sum
/// `S(p, l) = sum_{v < M^(p+1)} xi^B(v) (B(v) x + v y)^l` in named
/// variables.
pub fn mixed_power_sum_named(
    p: u64,
    l: u64,
    m: u64,
    n: u64,
    x: &str,
    y: &str,
) -> Result<MultiPoly> {
    ensure_params(m, n)?;
    let table = mixed_weighted_moments(p + 1, m, n, l, l)?;
    let xv = MultiPoly::var(m, x);
    let yv = MultiPoly::var(m, y);
    let mut acc = MultiPoly::zero(m);
    for i in 0..=l {
        // (Bx)^i (vy)^(l-i) contributes B^i v^(l-i)
        let weight = table[(l - i) as usize][i as usize].scale(&rat_binom(l, i));
        if weight.is_zero() {
            continue;
        }
        let mono = xv.pow(i as u32).mul(&yv.pow((l - i) as u32));
        acc = acc.add(&mono.scale(&weight));
    }
    Ok(acc)
}

pub fn mixed_power_sum(p: u64, l: u64, m: u64, n: u64) -> Result<MultiPoly> {
    mixed_power_sum_named(p, l, m, n, "x", "y")
}

/// Closed form of `S(p, p+1)`:
/// `(-1)^(p+1) (p+1)! M^(p+1) prod_j (N^j x + M^j y) / prod_j (1 - xi^(N^j))`.
fn mixed_closed_form(p: u64, m: u64, n: u64, x: &str, y: &str) -> Result<MultiPoly> {
    let one = CyclotomicNumber::one(m);
    let mut scalar = CyclotomicNumber::from_biguint(m, &BigUint::from(m).pow(p as u32 + 1))
        .scale(&(rat_biguint(&arith::factorial(p + 1)) * sign_rat(p + 1)));
    let xv = MultiPoly::var(m, x);
    let yv = MultiPoly::var(m, y);
    let mut poly = MultiPoly::constant(CyclotomicNumber::one(m));
    for j in 0..=p {
        let factor = &one - &CyclotomicNumber::root_power_u64(m, arith::pow_mod(n, j, m));
        scalar = &scalar * &factor.inverse()?;
        let linear = xv
            .scale(&CyclotomicNumber::from_biguint(m, &BigUint::from(n).pow(j as u32)))
            .add(&yv.scale(&CyclotomicNumber::from_biguint(m, &BigUint::from(m).pow(j as u32))));
        poly = poly.mul(&linear);
    }
    Ok(poly.scale(&scalar))
}

/// `S(p, l) = 0` for `l <= p`, and `S(p, p+1)` matches its closed form.
pub fn check_mixed_sum_closed_form(p: u64, m: u64, n: u64, mode: Mode) -> Result<IdentityReport> {
    let params = params_map(&[("M", Value::from(m)), ("N", Value::from(n)), ("p", Value::from(p))]);
    for l in 0..=p {
        let s = mixed_power_sum(p, l, m, n)?;
        if !s.is_zero() {
            return Ok(IdentityReport::failed(
                IdentityId::SplClosedForm,
                params,
                format!("S(p={p}, l={l}) = {s}, expected 0"),
            ));
        }
    }
    let lhs = mixed_power_sum(p, p + 1, m, n)?;
    let rhs = mixed_closed_form(p, m, n, "x", "y")?;
    match polys_agree(&lhs, &rhs, mode) {
        None => Ok(IdentityReport::ok(IdentityId::SplClosedForm, params)),
        Some(w) => Ok(IdentityReport::failed(IdentityId::SplClosedForm, params, w)),
    }
}

/// First closed form: the r-fold weighted sum of `(x + sum v_j y_j)^D`
/// with `D = sum (p_j + 1)` collapses to
/// `(-1)^D D! prod_j y_j^(p_j+1) prod_j closed-beta-sum(p_j)`, and in
/// particular is free of x.
pub fn check_first_closed_form(
    p_list: &[u64],
    m: u64,
    n: u64,
    mode: Mode,
) -> Result<IdentityReport> {
    ensure_params(m, n)?;
    let r = p_list.len();
    if r < 1 {
        return Err(Error::InvalidParameters("need r >= 1 levels".into()));
    }
    let mut params = base_params(m, n);
    params.push(("p_list", Value::from(p_list.to_vec())));
    let params = params_map(&params);

    let total_degree: u64 = p_list.iter().map(|&p| p + 1).sum();
    let y_names: Vec<String> = (1..=r).map(|j| format!("y{j}")).collect();
    let mut coeffs = vec![CyclotomicNumber::zero(m); total_degree as usize + 1];
    coeffs[total_degree as usize] = CyclotomicNumber::one(m);
    let lhs = multi_linear_weighted_sum(&coeffs, p_list, m, n, "x", &y_names)?;

    if lhs.degree_in("x") != 0 {
        return Ok(IdentityReport::failed(
            IdentityId::FirstClosedForm,
            params,
            format!("left side depends on x: {lhs}"),
        ));
    }

    let mut scalar = CyclotomicNumber::from_biguint(m, &arith::factorial(total_degree))
        .scale(&sign_rat(total_degree));
    let mut rhs = MultiPoly::constant(CyclotomicNumber::one(m));
    for (j, &p) in p_list.iter().enumerate() {
        scalar = &scalar * &closed_form_beta_sum(p, m, n)?;
        rhs = rhs.mul(&MultiPoly::var(m, &y_names[j]).pow(p as u32 + 1));
    }
    let rhs = rhs.scale(&scalar);

    match polys_agree(&lhs, &rhs, mode) {
        None => Ok(IdentityReport::ok(IdentityId::FirstClosedForm, params)),
        Some(w) => Ok(IdentityReport::failed(IdentityId::FirstClosedForm, params, w)),
    }
}

/// Second closed form: the r-fold weighted sum of
/// `(sum_j B(v_j) x_j + v_j y_j)^D` equals
/// `(-1)^D D! M^D prod_j prod_i (N^i x_j + M^i y_j) / prod_j prod_i (1 - xi^(N^i))`.
pub fn check_second_closed_form(
    p_list: &[u64],
    m: u64,
    n: u64,
    mode: Mode,
) -> Result<IdentityReport> {
    ensure_params(m, n)?;
    let r = p_list.len();
    if r < 1 {
        return Err(Error::InvalidParameters("need r >= 1 levels".into()));
    }
    let mut params = base_params(m, n);
    params.push(("p_list", Value::from(p_list.to_vec())));
    let params = params_map(&params);

    let total_degree: u64 = p_list.iter().map(|&p| p + 1).sum();
    // multinomial regrouping: the sum over tuples factors per level into
    // bivariate weighted power sums over disjoint variable pairs
    let mut lhs = MultiPoly::zero(m);
    for gamma in arith::compositions(total_degree, r) {
        let mut term = MultiPoly::constant(
            CyclotomicNumber::from_biguint(m, &arith::multinomial(&gamma)),
        );
        for (j, &g) in gamma.iter().enumerate() {
            let x = format!("x{}", j + 1);
            let y = format!("y{}", j + 1);
            term = term.mul(&mixed_power_sum_named(p_list[j], g, m, n, &x, &y)?);
            if term.is_zero() {
                break;
            }
        }
        lhs = lhs.add(&term);
    }

    let one = CyclotomicNumber::one(m);
    let mut scalar = CyclotomicNumber::from_biguint(m, &BigUint::from(m).pow(total_degree as u32))
        .scale(&(rat_biguint(&arith::factorial(total_degree)) * sign_rat(total_degree)));
    let mut rhs = MultiPoly::constant(CyclotomicNumber::one(m));
    for (j, &p) in p_list.iter().enumerate() {
        let xv = MultiPoly::var(m, &format!("x{}", j + 1));
        let yv = MultiPoly::var(m, &format!("y{}", j + 1));
        for i in 0..=p {
            let factor = &one - &CyclotomicNumber::root_power_u64(m, arith::pow_mod(n, i, m));
            scalar = &scalar * &factor.inverse()?;
            let linear = xv
                .scale(&CyclotomicNumber::from_biguint(m, &BigUint::from(n).pow(i as u32)))
                .add(&yv.scale(&CyclotomicNumber::from_biguint(m, &BigUint::from(m).pow(i as u32))));
            rhs = rhs.mul(&linear);
        }
    }
    let rhs = rhs.scale(&scalar);

    match polys_agree(&lhs, &rhs, mode) {
        None => Ok(IdentityReport::ok(IdentityId::SecondClosedForm, params)),
        Some(w) => Ok(IdentityReport::failed(IdentityId::SecondClosedForm, params, w)),
    }
}

// ---------------------------------------------------------------------------
// Batch sweep
// ---------------------------------------------------------------------------

/// Caps for [`verify_all`].
#[derive(Debug, Clone, Copy)]
pub struct SweepCaps {
    pub m_cap: u64,
    pub n_cap: u64,
    pub p_cap: u64,
    pub r_cap: u64,
}

/// Runs every identity check over all valid parameter tuples within caps.
/// Finite-difference checks use the monomial of degree one above the
/// operator order. Reports come back in deterministic parameter order.
pub fn verify_all(caps: &SweepCaps, mode: Mode, workers: usize) -> Result<Vec<IdentityReport>> {
    use rayon::prelude::*;

    crate::cyclotomic::check_order_cap(caps.m_cap, crate::cyclotomic::DEFAULT_ORDER_CAP)?;
    type Job = Box<dyn Fn() -> Result<IdentityReport> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    let mut pairs = Vec::new();
    for m in 2..=caps.m_cap {
        for n in 1..=caps.n_cap {
            if !digitmap::radical_divides(m, n)? {
                pairs.push((m, n));
            }
        }
    }
    for &(m, n) in &pairs {
        for p in 0..=caps.p_cap {
            jobs.push(Box::new(move || check_multiplicity(p, m, n)));
            for k in 0..=p {
                jobs.push(Box::new(move || check_power_sum_vanishing(k, p, m, n)));
            }
            jobs.push(Box::new(move || check_convolution_forward(p, m, n)));
            jobs.push(Box::new(move || check_convolution_inverse(p, m, n)));
            jobs.push(Box::new(move || check_moment0(p, m, n)));
            jobs.push(Box::new(move || check_moment1(p, m, n)));
            jobs.push(Box::new(move || check_mixed_sum_closed_form(p, m, n, mode)));
            jobs.push(Box::new(move || {
                let d = p + 2;
                let f = MultiPoly::var(m, "u").pow(d as u32);
                check_difference_single(p, m, n, &f, "u", "x", "y", mode)
            }));
            if p >= 1 {
                for a in 0..p {
                    for b in 0..p - a {
                        jobs.push(Box::new(move || check_vanishing_sum(p, m, n, a, b)));
                    }
                }
            }
        }
        for r in 1..=caps.r_cap {
            for p_list in vectors_up_to(caps.p_cap, r as usize) {
                let pl = p_list.clone();
                jobs.push(Box::new(move || {
                    let d: u64 = pl.iter().map(|&p| p + 1).sum::<u64>() + 1;
                    let f = MultiPoly::var(m, "u").pow(d as u32);
                    let y_names: Vec<String> =
                        (1..=pl.len()).map(|j| format!("y{j}")).collect();
                    check_difference_multi(&pl, m, n, &f, "u", "x", &y_names, mode)
                }));
                let pl = p_list.clone();
                jobs.push(Box::new(move || check_first_closed_form(&pl, m, n, mode)));
                let pl = p_list;
                jobs.push(Box::new(move || check_second_closed_form(&pl, m, n, mode)));
            }
        }
    }
    let run = || -> Result<Vec<IdentityReport>> {
        jobs.par_iter().map(|job| job()).collect()
    };
    if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}

/// All vectors of the given length with entries in `0..=cap`.
pub fn vectors_up_to(cap: u64, len: usize) -> Vec<Vec<u64>> {
    fn rec(cap: u64, len: usize, head: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if len == 0 {
            out.push(head.clone());
            return;
        }
        for v in 0..=cap {
            head.push(v);
            rec(cap, len - 1, head, out);
            head.pop();
        }
    }
    let mut out = Vec::new();
    rec(cap, len, &mut Vec::new(), &mut out);
    out
}
