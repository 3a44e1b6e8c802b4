use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds behind every floating-point decision in the crate.
///
/// Rank decisions count singular values above `rank_rtol · σ_max`.
/// Matrix equality uses `‖X − Y‖_F ≤ eq_atol + eq_rtol · max(‖X‖_F, ‖Y‖_F)`.
/// Nothing else in the crate hides a constant that decides rank or equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rank_rtol: f64,
    pub eq_atol: f64,
    pub eq_rtol: f64,
}

impl ToleranceConfig {
    pub const DEFAULT_RANK_RTOL: f64 = 1e-9;
    pub const DEFAULT_EQ_ATOL: f64 = 1e-10;
    pub const DEFAULT_EQ_RTOL: f64 = 1e-8;

    pub fn new(rank_rtol: f64, eq_atol: f64, eq_rtol: f64) -> Result<Self> {
        let tol = Self {
            rank_rtol,
            eq_atol,
            eq_rtol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rtol", self.rank_rtol),
            ("eq_atol", self.eq_atol),
            ("eq_rtol", self.eq_rtol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidTolerance(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    /// Largest admissible `‖X − Y‖_F` when `max(‖X‖_F, ‖Y‖_F) = scale`.
    #[inline]
    pub fn bound(&self, scale: f64) -> f64 {
        self.eq_atol + self.eq_rtol * scale
    }

    #[inline]
    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.bound(scale)
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rtol: Self::DEFAULT_RANK_RTOL,
            eq_atol: Self::DEFAULT_EQ_ATOL,
            eq_rtol: Self::DEFAULT_EQ_RTOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_nan() {
        assert!(ToleranceConfig::new(-1.0, 0.0, 0.0).is_err());
        assert!(ToleranceConfig::new(0.0, f64::NAN, 0.0).is_err());
        assert!(ToleranceConfig::new(0.0, 0.0, f64::INFINITY).is_err());
        assert!(ToleranceConfig::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn bound_is_affine_in_scale() {
        let tol = ToleranceConfig::default();
        assert_eq!(tol.bound(0.0), 1e-10);
        assert!((tol.bound(100.0) - (1e-10 + 1e-6)).abs() < 1e-20);
    }
}
