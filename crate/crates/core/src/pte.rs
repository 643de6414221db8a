//! Prouhet-Tarry-Escott solutions from digit-map partitions.
//!
//! Sorting `{0, .., M^(p+1) - 1}` into M blocks by the residue of the
//! shifted value produces M sets with equal k-th power sums for all
//! `k <= p` exactly when gcd(M, N) = 1. One certified solution exists per
//! unit residue N, giving phi(M) pairwise distinct partitions.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::digitmap::residue_u64;
use crate::error::{Error, Result};

mod biguint_table {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        table: &[Vec<BigUint>],
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(table.len()))?;
        for row in table {
            let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Vec<Vec<BigUint>>, D::Error> {
        use serde::de::Error as _;
        let raw: Vec<Vec<String>> = Vec::deserialize(deserializer)?;
        raw.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|s| s.parse::<BigUint>().map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// A digit-map partition with its certification state. `blocks[j]` holds
/// the elements whose shifted residue is `j`, sorted ascending.
/// `power_sums[j][k]` is the exact sum of k-th powers over block j (filled
/// by [`certify`]; k = 0 gives block sizes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PteSolution {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub p: u64,
    pub blocks: Vec<Vec<u64>>,
    #[serde(with = "biguint_table")]
    pub power_sums: Vec<Vec<BigUint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_degree: Option<u64>,
    /// Smallest k whose power sums differ across blocks, when
    /// certification failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_power: Option<u64>,
}

impl PteSolution {
    pub fn is_certified(&self) -> bool {
        self.certified_degree.is_some()
    }

    /// CSV rendering of the power-sum table: one row per block.
    pub fn power_sum_csv(&self) -> String {
        let mut out = String::from("block");
        let cols = self.power_sums.first().map_or(0, |r| r.len());
        for k in 0..cols {
            out.push_str(&format!(",k={k}"));
        }
        out.push('\n');
        for (j, row) in self.power_sums.iter().enumerate() {
            out.push_str(&j.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Partitions `{0, .., M^(p+1) - 1}` into M blocks by shifted residue.
/// Requires `1 <= N <= M - 1`; the result is uncertified.
pub fn build_partition(m: u64, n: u64, p: u64) -> Result<PteSolution> {
    if m < 2 {
        return Err(Error::InvalidBase(m));
    }
    if n == 0 || n >= m {
        return Err(Error::InvalidInput(format!(
            "N must satisfy 1 <= N <= M-1, got N={n} for M={m}"
        )));
    }
    let digits = u32::try_from(p + 1)
        .map_err(|_| Error::WindowTooLarge(format!("p = {p} too large")))?;
    let size = m
        .checked_pow(digits)
        .filter(|&s| s < 1u64 << 52)
        .ok_or_else(|| Error::WindowTooLarge(format!("M^(p+1) = {m}^{digits} too large")))?;
    let mut blocks = vec![Vec::new(); m as usize];
    for v in 0..size {
        blocks[residue_u64(v, m, n) as usize].push(v);
    }
    Ok(PteSolution {
        m,
        n,
        p,
        blocks,
        power_sums: Vec::new(),
        certified_degree: None,
        failing_power: None,
    })
}

/// Computes all power sums up to `degree` and certifies the solution if
/// every row is constant across blocks. Failure is a result (the table is
/// retained and the smallest failing k recorded), not an error.
pub fn certify(mut solution: PteSolution, degree: u64) -> Result<PteSolution> {
    if degree > solution.p {
        return Err(Error::InvalidParameters(format!(
            "certification degree {degree} exceeds construction degree {}",
            solution.p
        )));
    }
    let table: Vec<Vec<BigUint>> = solution
        .blocks
        .iter()
        .map(|block| {
            (0..=degree)
                .map(|k| {
                    block
                        .iter()
                        .map(|&v| BigUint::from(v).pow(k as u32))
                        .fold(BigUint::zero(), |acc, x| acc + x)
                })
                .collect()
        })
        .collect();
    let mut failing = None;
    'power: for k in 0..=degree {
        let first = &table[0][k as usize];
        for row in &table[1..] {
            if &row[k as usize] != first {
                failing = Some(k);
                break 'power;
            }
        }
    }
    solution.power_sums = table;
    match failing {
        None => {
            solution.certified_degree = Some(degree);
            solution.failing_power = None;
        }
        Some(k) => {
            solution.certified_degree = None;
            solution.failing_power = Some(k);
        }
    }
    Ok(solution)
}

/// One certified solution per N coprime to M in `{1, .., M-1}`. Checks
/// that certification succeeds for each (a theorem), that the partitions
/// are pairwise distinct, and that the count equals Euler's totient.
pub fn enumerate_solutions(m: u64, p: u64) -> Result<Vec<PteSolution>> {
    if m < 2 {
        return Err(Error::InvalidBase(m));
    }
    let units: Vec<u64> = (1..m).filter(|&n| m.gcd(&n) == 1).collect();
    let solutions: Vec<PteSolution> = units
        .par_iter()
        .map(|&n| certify(build_partition(m, n, p)?, p))
        .collect::<Result<_>>()?;
    for sol in &solutions {
        if !sol.is_certified() {
            return Err(Error::TheoremViolation {
                identity: "pte-certification".into(),
                witness: format!(
                    "partition for M={}, N={}, p={} failed at power {}",
                    sol.m,
                    sol.n,
                    sol.p,
                    sol.failing_power.unwrap()
                ),
            });
        }
    }
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            if a.blocks == b.blocks {
                return Err(Error::TheoremViolation {
                    identity: "pte-distinctness".into(),
                    witness: format!(
                        "partitions for N={} and N={} coincide at M={}, p={}",
                        a.n, b.n, m, p
                    ),
                });
            }
        }
    }
    let expected = arith::totient(m);
    if solutions.len() as u64 != expected {
        return Err(Error::TheoremViolation {
            identity: "pte-count".into(),
            witness: format!("got {} solutions, totient is {}", solutions.len(), expected),
        });
    }
    Ok(solutions)
}
