use serde::{Deserialize, Serialize};

use crate::kernel::KernelConfig;

/// Which route computes `sum_u chi(u) S(u)` for all characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMethod {
    /// Naive below `naive_limit`, fast above.
    Auto,
    Naive,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub kernel: KernelConfig,
    /// Pairs are summed up to `ab <= cutoff_factor * q`.
    pub cutoff_factor: u64,
    /// Largest admissible `|W_a(pi * cutoff / q)|`.
    pub tail_tolerance: f64,
    pub transform: TransformMethod,
    /// Moduli up to this use the quadratic transform under [`TransformMethod::Auto`].
    pub naive_limit: u64,
    /// Upper bound on the residue tables held at once.
    pub memory_budget_bytes: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            cutoff_factor: 16,
            tail_tolerance: 1e-16,
            transform: TransformMethod::Auto,
            naive_limit: 3000,
            memory_budget_bytes: 4 << 30,
        }
    }
}

impl PipelineConfig {
    pub fn cutoff(&self, q: u64) -> u64 {
        self.cutoff_factor * q
    }
}
