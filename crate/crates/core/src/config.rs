use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A jet coefficient below this (relative) counts as zero.
    pub zero: f64,
    /// Relative singular-value cutoff for ranks and null spaces.
    pub rank: f64,
    /// Residual allowed when checking identities (Jacobi, closure, Gram).
    pub identity: f64,
    /// Smallest acceptable |det| of a metric at the base point.
    pub degenerate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero: 1e-12, rank: 1e-9, identity: 1e-10, degenerate: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("zero", self.zero), ("rank", self.rank), ("identity", self.identity), ("degenerate", self.degenerate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Default truncation order for a covariant-derivative depth `r_max`.
pub fn default_order(r_max: u32) -> u32 {
    2 * (r_max + 3)
}
