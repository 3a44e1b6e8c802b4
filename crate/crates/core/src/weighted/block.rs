use crate::certificate::{InverseCertificate, Residual};
use crate::classic::spectral_projection_with_floor;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::tolerance::ToleranceConfig;

use super::{certify_core_ep, product_floor, w_core_ep_direct, PairIndex, WeightedPair};

/// Position of the off-diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// `M = [[a, b], [0, d]]`
    Upper,
    /// `M = [[a, 0], [b, d]]`
    Lower,
}

/// Weighted core-EP inverse of a block triangular `M` with weight
/// `diag(w, w)`, assembled from the inverses of the diagonal blocks:
///
/// ```text
/// upper:  [[xa, −xa·w·b·w·xd], [0, xd]]      requires (aw)^π·b = 0
/// lower:  [[xa, 0], [−xd·w·b·w·xa, xd]]      requires (dw)^π·b = 0
/// ```
///
/// The precondition is on `aw` (resp. `dw`), i.e. the off-diagonal block
/// must lie in `R((aw)^D)`. With `(wa)^π·b = 0` alone the formula is wrong
/// for general `w`; the two conditions agree when `w = I`.
///
/// The certificate compares the assembled matrix against a direct solve on
/// the `2n × 2n` pair and checks its defining system there.
pub fn block_triangular_core_ep(
    a: &CMatrix,
    b: &CMatrix,
    d: &CMatrix,
    w: &CMatrix,
    triangle: Triangle,
    tol: &ToleranceConfig,
) -> Result<InverseCertificate> {
    let n = a.ensure_square()?;
    for (name, m) in [("b", b), ("d", d), ("w", w)] {
        if m.ensure_square()? != n {
            return Err(Error::DimensionMismatch(format!("{name} must be {n}x{n}")));
        }
    }
    let guard = match triangle {
        Triangle::Upper => a,
        Triangle::Lower => d,
    };
    let guard_pair = WeightedPair::new(guard.clone(), w.clone())?;
    let pi =
        spectral_projection_with_floor(&guard_pair.aw(), product_floor(&guard_pair, tol), tol)?;
    let leak = pi.matmul(b);
    let precondition = Residual::vanishing(&leak, pi.frobenius_norm() * b.frobenius_norm());
    if !precondition.passes(tol) {
        return Err(Error::PreconditionViolated(format!(
            "off-diagonal block leaves the range of the core part: ‖(·w)^π b‖ = {:.3e}",
            precondition.abs
        )));
    }

    let xa = w_core_ep_direct(&WeightedPair::new(a.clone(), w.clone())?, tol)?.value;
    let xd = w_core_ep_direct(&WeightedPair::new(d.clone(), w.clone())?, tol)?.value;
    let zero = CMatrix::zeros(n, n);
    let (m, x) = match triangle {
        Triangle::Upper => {
            let corner = -&xa.matmul(w).matmul(b).matmul(w).matmul(&xd);
            (
                CMatrix::from_blocks(a, b, &zero, d)?,
                CMatrix::from_blocks(&xa, &corner, &zero, &xd)?,
            )
        }
        Triangle::Lower => {
            let corner = -&xd.matmul(w).matmul(b).matmul(w).matmul(&xa);
            (
                CMatrix::from_blocks(a, &zero, b, d)?,
                CMatrix::from_blocks(&xa, &zero, &corner, &xd)?,
            )
        }
    };
    let big = WeightedPair::new(m, CMatrix::block_diag(&[w, w]))?;
    let idx = PairIndex::new(&big, tol)?;
    let direct = w_core_ep_direct(&big, tol)?.value;
    let mut cert = certify_core_ep(&big, &idx, x.clone(), tol);
    cert.push("precondition", precondition);
    cert.push("matches direct 2n solve", Residual::equality(&x, &direct));
    Ok(cert)
}
