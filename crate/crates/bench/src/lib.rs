//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared inputs for the benchmarks live here so they stay in one place.

use num_bigint::BigUint;

/// A 256-bit input exercising the big-integer digit path.
pub fn wide_input() -> BigUint {
    (BigUint::from(0x9e37_79b9_7f4a_7c15u64) << 192u32)
        + (BigUint::from(0xbf58_476d_1ce4_e5b9u64) << 64u32)
        + BigUint::from(0x94d0_49bb_1331_11ebu64)
}
