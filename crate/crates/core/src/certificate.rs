use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::matrix::CMatrix;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseKind {
    MoorePenrose,
    Group,
    Drazin,
    Core,
    CoreEp,
    OneThree,
    OneThreeW,
    WeightedCore,
    WeightedGdrazin,
    WeightedCoreEp,
    Bc,
}

impl InverseKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MoorePenrose => "moore_penrose",
            Self::Group => "group",
            Self::Drazin => "drazin",
            Self::Core => "core",
            Self::CoreEp => "core_ep",
            Self::OneThree => "one_three",
            Self::OneThreeW => "one_three_w",
            Self::WeightedCore => "weighted_core",
            Self::WeightedGdrazin => "weighted_gdrazin",
            Self::WeightedCoreEp => "weighted_core_ep",
            Self::Bc => "bc",
        }
    }
}

impl fmt::Display for InverseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One defining-equation check: passes iff `abs ≤ eq_atol + eq_rtol · scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(abs: f64, scale: f64) -> Self {
        Self { abs, scale }
    }

    /// `lhs = rhs` under the shared equality rule.
    pub fn equality(lhs: &CMatrix, rhs: &CMatrix) -> Self {
        Self {
            abs: lhs.distance(rhs),
            scale: lhs.frobenius_norm().max(rhs.frobenius_norm()),
        }
    }

    /// `m = 0`, scaled by the size of the factors that produced `m`.
    pub fn vanishing(m: &CMatrix, scale: f64) -> Self {
        Self {
            abs: m.frobenius_norm(),
            scale,
        }
    }

    pub fn hermitian(m: &CMatrix) -> Self {
        Self::equality(m, &m.adjoint())
    }

    /// Exact integer comparison (ranks); any difference fails.
    pub fn count(lhs: usize, rhs: usize) -> Self {
        Self {
            abs: lhs.abs_diff(rhs) as f64,
            scale: 0.0,
        }
    }

    /// `‖B^n‖_F` against `max(1, ‖B‖_F)^n`.
    pub fn nilpotency(b: &CMatrix, tol: &ToleranceConfig) -> Self {
        match b.nilpotency(tol) {
            Ok(nil) => Self {
                abs: nil.residual,
                scale: nil.scale,
            },
            Err(_) => Self {
                abs: f64::INFINITY,
                scale: 0.0,
            },
        }
    }

    pub fn passes(&self, tol: &ToleranceConfig) -> bool {
        tol.accepts(self.abs, self.scale)
    }

    /// `abs` divided by its allowed bound; `≤ 1` passes.
    pub fn ratio(&self, tol: &ToleranceConfig) -> f64 {
        let bound = tol.bound(self.scale);
        if bound > 0.0 {
            self.abs / bound
        } else if self.abs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct InverseCertificate {
    pub value: CMatrix,
    pub kind: InverseKind,
    pub residuals: BTreeMap<String, Residual>,
    pub exists: bool,
}

impl InverseCertificate {
    pub(crate) fn found(kind: InverseKind, value: CMatrix) -> Self {
        Self {
            value,
            kind,
            residuals: BTreeMap::new(),
            exists: true,
        }
    }

    /// Nonexistence: the value is the zero matrix and no residuals are recorded.
    pub(crate) fn absent(kind: InverseKind, n: usize) -> Self {
        Self {
            value: CMatrix::zeros(n, n),
            kind,
            residuals: BTreeMap::new(),
            exists: false,
        }
    }

    pub(crate) fn with(mut self, label: &str, r: Residual) -> Self {
        self.residuals.insert(label.to_owned(), r);
        self
    }

    pub(crate) fn push(&mut self, label: &str, r: Residual) {
        self.residuals.insert(label.to_owned(), r);
    }

    /// `exists` and every recorded residual within tolerance.
    pub fn verified(&self, tol: &ToleranceConfig) -> bool {
        self.exists && self.residuals.values().all(|r| r.passes(tol))
    }

    pub fn failing(&self, tol: &ToleranceConfig) -> Vec<&str> {
        self.residuals
            .iter()
            .filter(|(_, r)| !r.passes(tol))
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn worst_residual(&self) -> f64 {
        self.residuals.values().map(|r| r.abs).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_rule() {
        let tol = ToleranceConfig::default();
        assert!(Residual::new(1e-11, 0.0).passes(&tol));
        assert!(!Residual::new(1e-9, 0.0).passes(&tol));
        assert!(Residual::new(1e-9, 1.0).passes(&tol));
        assert!(Residual::count(3, 3).passes(&tol));
        assert!(!Residual::count(3, 2).passes(&tol));
        assert_eq!(Residual::count(3, 2).ratio(&tol), 1.0 / tol.eq_atol);
    }

    #[test]
    fn absent_certificate_is_zero_and_unverified() {
        let c = InverseCertificate::absent(InverseKind::Group, 3);
        assert_eq!(c.value, CMatrix::zeros(3, 3));
        assert!(c.residuals.is_empty());
        assert!(!c.verified(&ToleranceConfig::default()));
    }

    #[test]
    fn kind_names_are_snake_case() {
        assert_eq!(InverseKind::WeightedCoreEp.to_string(), "weighted_core_ep");
        assert_eq!(
            serde_json::to_string(&InverseKind::OneThreeW).unwrap(),
            "\"one_three_w\""
        );
    }
}
