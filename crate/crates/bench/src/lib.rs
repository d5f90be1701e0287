//! Shared inputs for the criterion benchmarks.

/// Moduli covering prime, prime-power and highly composite shapes.
pub const BENCH_MODULI: [u64; 4] = [1009, 1024, 2310, 10007];
