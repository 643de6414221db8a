//! Periodicity of the residue sequence: criterion, minimal periods,
//! bounds, and the conjecture scan.
//!
//! The residue sequence b(n) is ultimately periodic exactly when every
//! prime factor of M divides N. In that case b factors through
//! `Z / M^t` where `t` is the largest ceil(a_p / b_p) over the prime
//! valuations `a_p` of M and `b_p` of N, so minimal periods can be found
//! by exhaustive search over a finite window rather than heuristically.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::digitmap::{self, residue_u64};
use crate::error::{Error, Result};

/// Largest window exponent such that the brute-force search is allowed to
/// materialize `M^t` residues.
const MAX_WINDOW_BITS: u32 = 52;

/// Per-prime valuation data for a periodic pair: (p, a_p, b_p) with
/// `a_p = v_p(M)` and `b_p = v_p(N)`.
fn valuation_profile(m: u64, n: u64) -> Vec<(u64, u32, u32)> {
    arith::factorize(m)
        .into_iter()
        .map(|(p, a)| {
            let mut b = 0u32;
            let mut rest = n;
            while rest.is_multiple_of(p) {
                rest /= p;
                b += 1;
            }
            (p, a, b)
        })
        .collect()
}

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

/// Thm-level criterion: the residue sequence is ultimately periodic iff
/// rad(M) divides rad(N).
pub fn is_ultimately_periodic(m: u64, n: u64) -> Result<bool> {
    digitmap::radical_divides(m, n)
}

/// The window exponent `t = max_p ceil(a_p / b_p)`; errors when the pair
/// is not periodic.
pub fn window_exponent(m: u64, n: u64) -> Result<u32> {
    if !is_ultimately_periodic(m, n)? {
        return Err(Error::NotPeriodic { m, n });
    }
    Ok(valuation_profile(m, n)
        .iter()
        .map(|&(_, a, b)| ceil_div(a, b))
        .max()
        .expect("m >= 2 has a prime factor"))
}

fn checked_window(m: u64, t: u32) -> Result<u64> {
    let w = m
        .checked_pow(t)
        .ok_or_else(|| Error::WindowTooLarge(format!("M^t = {m}^{t} overflows u64")))?;
    if w >= 1u64 << MAX_WINDOW_BITS {
        return Err(Error::WindowTooLarge(format!(
            "M^t = {m}^{t} exceeds 2^{MAX_WINDOW_BITS}"
        )));
    }
    Ok(w)
}

/// Bounds `M <= P_min <= M^t` on the minimal period of a periodic pair.
pub fn period_bounds(m: u64, n: u64) -> Result<(u64, u64)> {
    let t = window_exponent(m, n)?;
    Ok((m, checked_window(m, t)?))
}

/// Checks whether `p` is a period of the residue sequence, which factors
/// through `Z / M^t`. Writing `p = M^j * p'` with `j` maximal, the
/// digit-splitting identity cancels the low `j` digit positions, so the
/// check reduces exactly to the window `M^(t-j)`:
/// `N^j * (b'(q + p' mod M^(t-j)) - b'(q)) = 0 mod M` for every q, where
/// b' reads t-j digits.
fn is_window_period(m: u64, n: u64, t: u32, candidate: u64) -> bool {
    let mut j = 0u32;
    let mut reduced = candidate;
    while j < t && reduced.is_multiple_of(m) {
        reduced /= m;
        j += 1;
    }
    let window = m.pow(t - j);
    let scale = arith::pow_mod(n, j as u64, m);
    for q in 0..window {
        let shifted = (q + reduced) % window;
        let diff = (residue_u64(shifted, m, n) + m - residue_u64(q, m, n)) % m;
        if arith::mul_mod(scale, diff, m) != 0 {
            return false;
        }
    }
    true
}

/// Minimal period by brute force: candidates are the divisors of `M^t` in
/// increasing order (any period of the purely periodic sequence is a
/// multiple of the minimal one, and `M^t` is proven to be a period), each
/// verified over one full residue window.
pub fn minimal_period(m: u64, n: u64) -> Result<u64> {
    let t = window_exponent(m, n)?;
    checked_window(m, t)?;
    let divisors = arith::divisors_of_power(m, t)
        .ok_or_else(|| Error::WindowTooLarge(format!("divisors of {m}^{t} overflow u64")))?;
    for p in divisors {
        if is_window_period(m, n, t, p) {
            return Ok(p);
        }
    }
    unreachable!("M^t itself is always a period");
}

/// Thm-level formula for prime-power pairs `M = p^a, N = p^b`: the minimal
/// period is `p^e` with `e = a*t - b*(t-1)` and `t = ceil(a/b)`.
pub fn prime_power_period(p: u64, a: u32, b: u32) -> Result<u64> {
    if !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a < 1 || b < 1 {
        return Err(Error::InvalidInput(
            "prime-power period needs exponents a, b >= 1".into(),
        ));
    }
    let t = ceil_div(a, b);
    let e = a * t - b * (t - 1);
    p.checked_pow(e)
        .ok_or_else(|| Error::WindowTooLarge(format!("{p}^{e} overflows u64")))
}

/// Conjectured minimal period for periodic pairs where every
/// `t_p = ceil(a_p / b_p)` is at most 2: the product of `p^(a_p t_p - b_p (t_p - 1))`.
/// Returns `None` when the hypothesis `t_p <= 2` fails for some prime.
pub fn conjectured_period(m: u64, n: u64) -> Result<Option<u64>> {
    if !is_ultimately_periodic(m, n)? {
        return Err(Error::NotPeriodic { m, n });
    }
    let mut acc: u64 = 1;
    for (p, a, b) in valuation_profile(m, n) {
        let t = ceil_div(a, b);
        if t > 2 {
            return Ok(None);
        }
        let e = a * t - b * (t - 1);
        acc = acc
            .checked_mul(p.checked_pow(e).ok_or_else(|| {
                Error::WindowTooLarge(format!("{p}^{e} overflows u64"))
            })?)
            .ok_or_else(|| Error::WindowTooLarge("conjectured period overflows u64".into()))?;
    }
    Ok(Some(acc))
}

/// Finite-window refutation of small periods for a non-periodic pair: for
/// every candidate `P <= M^k0 + M^2` (k0 the largest exponent in M's
/// factorization) some `n` below `4 * (M^k0 + M^2)` has
/// `b(n + P) != b(n)`. This is a proxy for the necessity direction, which
/// is a theorem, not a finite check.
pub fn probe_no_small_period(m: u64, n: u64) -> Result<bool> {
    if is_ultimately_periodic(m, n)? {
        return Err(Error::InvalidParameters(format!(
            "probe expects a non-periodic pair, got M={m}, N={n}"
        )));
    }
    let k0 = arith::factorize(m).iter().map(|&(_, e)| e).max().unwrap();
    let bound = m
        .checked_pow(k0)
        .and_then(|w| w.checked_add(m.checked_mul(m)?))
        .ok_or_else(|| Error::WindowTooLarge("probe bound overflows u64".into()))?;
    let window = bound
        .checked_mul(4)
        .ok_or_else(|| Error::WindowTooLarge("probe window overflows u64".into()))?;
    let values: Vec<u64> = (0..window).map(|i| residue_u64(i, m, n)).collect();
    for p in 1..=bound {
        let refuted = (0..window - p).any(|i| values[(i + p) as usize] != values[i as usize]);
        if !refuted {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Match,
    Mismatch,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaSource {
    /// Exact prime-power formula (a theorem).
    PrimePowerTheorem,
    /// Conjectured product formula, hypothesis `t_p <= 2`.
    Conjecture,
}

/// Everything the period analysis knows about one (M, N) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodReport {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub periodic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_period: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purely_periodic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_period: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_source: Option<FormulaSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<u64>,
    pub agreement: Agreement,
}

/// Returns `Some((p, a, b))` when `m = p^a` and `n = p^b` for one prime p.
fn prime_power_pair(m: u64, n: u64) -> Option<(u64, u32, u32)> {
    let fm = arith::factorize(m);
    let fn_ = arith::factorize(n);
    match (fm.as_slice(), fn_.as_slice()) {
        ([(p, a)], [(q, b)]) if p == q => Some((*p, *a, *b)),
        _ => None,
    }
}

/// Runs criterion, bounds, formula (when one applies), and the brute-force
/// search for one pair.
pub fn period_report(m: u64, n: u64) -> Result<PeriodReport> {
    if !is_ultimately_periodic(m, n)? {
        return Ok(PeriodReport {
            m,
            n,
            periodic: false,
            minimal_period: None,
            purely_periodic: None,
            formula_period: None,
            formula_source: None,
            lower_bound: None,
            upper_bound: None,
            agreement: Agreement::NotApplicable,
        });
    }
    let (lower, upper) = period_bounds(m, n)?;
    let observed = minimal_period(m, n)?;
    let (formula_period, formula_source) = if let Some((p, a, b)) = prime_power_pair(m, n) {
        (Some(prime_power_period(p, a, b)?), Some(FormulaSource::PrimePowerTheorem))
    } else if let Some(pred) = conjectured_period(m, n)? {
        (Some(pred), Some(FormulaSource::Conjecture))
    } else {
        (None, None)
    };
    let agreement = match formula_period {
        Some(f) if f == observed => Agreement::Match,
        Some(_) => Agreement::Mismatch,
        None => Agreement::NotApplicable,
    };
    Ok(PeriodReport {
        m,
        n,
        periodic: true,
        minimal_period: Some(observed),
        // the window argument establishes b(n + P) = b(n) from n = 0
        purely_periodic: Some(true),
        formula_period,
        formula_source,
        lower_bound: Some(lower),
        upper_bound: Some(upper),
        agreement,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub predicted: u64,
    pub observed: u64,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub pairs_tested: usize,
    pub pairs_skipped: usize,
    pub mismatches: usize,
    pub all_match: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
}

impl ScanReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter(|r| !r.matches)
    }
}

/// Compares the conjectured product formula against the brute-force
/// minimal period for every applicable pair in range. Pairs whose
/// hypothesis fails (not periodic, or some `t_p > 2`) are skipped and
/// counted. Work items run in parallel; records are merged in (M, N)
/// order regardless of completion order.
pub fn conjecture_scan(
    m_range: std::ops::RangeInclusive<u64>,
    n_limit: u64,
    workers: usize,
) -> Result<ScanReport> {
    let mut applicable = Vec::new();
    let mut skipped = 0usize;
    for m in m_range {
        if m < 2 {
            continue;
        }
        for n in 1..=n_limit {
            if !is_ultimately_periodic(m, n)? {
                continue; // outside the conjecture's universe entirely
            }
            match conjectured_period(m, n)? {
                Some(pred) => applicable.push((m, n, pred)),
                None => skipped += 1,
            }
        }
    }
    let run = |pairs: &[(u64, u64, u64)]| -> Result<Vec<ScanRecord>> {
        pairs
            .par_iter()
            .map(|&(m, n, predicted)| {
                let observed = minimal_period(m, n)?;
                Ok(ScanRecord { m, n, predicted, observed, matches: predicted == observed })
            })
            .collect()
    };
    let mut records = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
        pool.install(|| run(&applicable))?
    } else {
        run(&applicable)?
    };
    records.sort_by_key(|r| (r.m, r.n));
    let mismatches = records.iter().filter(|r| !r.matches).count();
    let summary = ScanSummary {
        pairs_tested: records.len(),
        pairs_skipped: skipped,
        mismatches,
        all_match: mismatches == 0,
    };
    Ok(ScanReport { records, summary })
}

/// One JSON line per record, then one summary line.
pub fn write_scan_jsonl(report: &ScanReport, mut sink: impl Write) -> std::io::Result<()> {
    for record in &report.records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut sink, &report.summary)?;
    sink.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain sequential scan of b over [0, limit): the naive oracle.
    fn naive_period(m: u64, n: u64, limit: u64) -> Option<u64> {
        let values: Vec<u64> = (0..limit).map(|i| residue_u64(i, m, n)).collect();
        'next: for p in 1..limit {
            for i in 0..(limit - p) {
                if values[i as usize] != values[(i + p) as usize] {
                    continue 'next;
                }
            }
            return Some(p);
        }
        None
    }

    #[test]
    fn criterion_examples() {
        assert!(is_ultimately_periodic(6, 12).unwrap());
        assert!(!is_ultimately_periodic(2, 1).unwrap());
        assert!(is_ultimately_periodic(9, 3).unwrap());
        assert!(matches!(is_ultimately_periodic(0, 1), Err(Error::InvalidBase(0))));
    }

    #[test]
    fn minimal_period_examples() {
        // b for (4,2) runs 0,1,2,3,2,3,0,1 and repeats with period 8, not 4
        assert_eq!(minimal_period(4, 2).unwrap(), 8);
        assert_eq!(naive_period(4, 2, 64).unwrap(), 8);
        assert_eq!(minimal_period(2, 2).unwrap(), 2);
        // bounds coincide at M^1
        assert_eq!(minimal_period(6, 6).unwrap(), 6);
        assert!(matches!(minimal_period(2, 1), Err(Error::NotPeriodic { .. })));
    }

    #[test]
    fn window_check_matches_naive_scan() {
        // the aligned-split reduction must agree with the naive full scan
        for (m, n) in [(4u64, 2u64), (8, 2), (8, 4), (9, 3), (2, 2), (6, 6), (12, 6), (16, 4)] {
            let t = window_exponent(m, n).unwrap();
            let w = m.pow(t);
            let fast = minimal_period(m, n).unwrap();
            let slow = naive_period(m, n, 4 * w).unwrap();
            assert_eq!(fast, slow, "disagreement at M={m}, N={n}");
        }
    }

    #[test]
    fn prime_power_formula_examples() {
        // t = 2, e = 3
        assert_eq!(prime_power_period(2, 2, 1).unwrap(), 8);
        // t = 1, e = a
        assert_eq!(prime_power_period(3, 1, 1).unwrap(), 3);
        // reconciled against the brute-force oracle on (M, N) = (8, 4):
        // t = ceil(3/2) = 2, e = 6 - 2 = 4, so period 16 -- and the oracle
        // agrees, see below
        assert_eq!(prime_power_period(2, 3, 2).unwrap(), 16);
        assert_eq!(minimal_period(8, 4).unwrap(), 16);
        assert_eq!(naive_period(8, 4, 256).unwrap(), 16);
        assert!(matches!(prime_power_period(6, 1, 1), Err(Error::NotPrime(6))));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(period_bounds(4, 2).unwrap(), (4, 16));
        assert_eq!(period_bounds(6, 6).unwrap(), (6, 6));
        // a2=2,b2=1 -> t=2; a3=1,b3=1 -> t=1
        assert_eq!(period_bounds(12, 6).unwrap(), (12, 144));
    }

    #[test]
    fn conjecture_examples() {
        assert_eq!(conjectured_period(4, 2).unwrap(), Some(8));
        // e2 = 2*2-1 = 3, e3 = 2*2-1 = 3: 8 * 27
        assert_eq!(conjectured_period(36, 6).unwrap(), Some(216));
        assert_eq!(minimal_period(36, 6).unwrap(), 216);
        // t2 = 3 > 2: hypothesis fails
        assert_eq!(conjectured_period(8, 2).unwrap(), None);
    }

    #[test]
    fn report_for_periodic_pair() {
        let r = period_report(4, 2).unwrap();
        assert!(r.periodic);
        assert_eq!(r.minimal_period, Some(8));
        assert_eq!(r.formula_period, Some(8));
        assert_eq!(r.formula_source, Some(FormulaSource::PrimePowerTheorem));
        assert_eq!(r.agreement, Agreement::Match);
        assert_eq!((r.lower_bound, r.upper_bound), (Some(4), Some(16)));
        assert_eq!(r.purely_periodic, Some(true));
    }

    #[test]
    fn report_for_nonperiodic_pair() {
        let r = period_report(2, 1).unwrap();
        assert!(!r.periodic);
        assert_eq!(r.minimal_period, None);
        assert_eq!(r.agreement, Agreement::NotApplicable);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"M":2,"N":1,"periodic":false,"agreement":"not-applicable"}"#);
    }

    #[test]
    fn probe_rejects_small_periods() {
        assert!(probe_no_small_period(2, 1).unwrap());
        assert!(probe_no_small_period(6, 4).unwrap());
        assert!(probe_no_small_period(10, 4).unwrap());
        assert!(probe_no_small_period(2, 3).unwrap());
        // periodic input is a usage error
        assert!(probe_no_small_period(4, 2).is_err());
    }

    #[test]
    fn scan_small_range() {
        let report = conjecture_scan(2..=8, 16, 0).unwrap();
        assert!(report.summary.all_match);
        assert!(report.summary.pairs_tested > 0);
        // (8, 2) has t = 3 and must be counted as skipped
        assert!(report.summary.pairs_skipped > 0);
        assert!(report.records.iter().all(|r| r.matches));
        // merged deterministically by (M, N)
        let mut sorted = report.records.clone();
        sorted.sort_by_key(|r| (r.m, r.n));
        assert_eq!(
            report.records.iter().map(|r| (r.m, r.n)).collect::<Vec<_>>(),
            sorted.iter().map(|r| (r.m, r.n)).collect::<Vec<_>>()
        );
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn scan_empty_range_is_empty() {
        let report = conjecture_scan(3..=2, 10, 0).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.summary.pairs_tested, 0);
        assert!(report.summary.all_match);
    }

    #[test]
    fn scan_jsonl_shape() {
        let report = conjecture_scan(4..=4, 2, 0).unwrap();
        let mut buf = Vec::new();
        write_scan_jsonl(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), report.records.len() + 1);
        assert_eq!(
            lines[0],
            r#"{"M":4,"N":2,"predicted":8,"observed":8,"match":true}"#
        );
        assert!(lines.last().unwrap().contains("\"all_match\":true"));
    }
}
