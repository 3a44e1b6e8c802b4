use std::collections::BTreeMap;

use crate::certificate::Residual;
use crate::classic::spectral_projection_with_floor;
use crate::error::Result;
use crate::matrix::CMatrix;
use crate::solver::{solve_constraints, MatrixConstraint};
use crate::svd::svd;
use crate::tolerance::ToleranceConfig;

use super::{product_floor, w_core, w_core_ep_direct, WeightedPair};

/// `A = z + y` with `z` weighted-core invertible, `yW` nilpotent and
/// `yWz = 0 = (Wz)*(Wy)`.
#[derive(Debug, Clone)]
pub struct CoreEPDecomposition {
    pub z: CMatrix,
    pub y: CMatrix,
    /// Weighted core inverse of `z`, equal to the weighted core-EP inverse of `A`.
    pub x: CMatrix,
    pub residuals: BTreeMap<String, Residual>,
}

impl CoreEPDecomposition {
    pub fn verified(&self, tol: &ToleranceConfig) -> bool {
        self.residuals.values().all(|r| r.passes(tol))
    }

    pub fn worst_residual(&self) -> f64 {
        self.residuals.values().map(|r| r.abs).fold(0.0, f64::max)
    }
}

/// Splits `A` into `z = AW·X·WA` and `y = A − z`, where `X` is the weighted
/// core-EP inverse of `A`.
pub fn core_ep_decompose(
    pair: &WeightedPair,
    tol: &ToleranceConfig,
) -> Result<CoreEPDecomposition> {
    let x_ep = w_core_ep_direct(pair, tol)?.value;
    let (a, w) = (&pair.a, &pair.w);
    let z = a.matmul(w).matmul(&x_ep).matmul(w).matmul(a);
    let y = a - &z;
    let wz = w.matmul(&z);
    let wy = w.matmul(&y);
    let nw = w.frobenius_norm();
    let (nz, ny) = (z.frobenius_norm(), y.frobenius_norm());

    let mut residuals = BTreeMap::new();
    residuals.insert(
        "ywz=0".to_owned(),
        Residual::vanishing(&y.matmul(&wz), ny * nw * nz),
    );
    residuals.insert(
        "(wz)*(wy)=0".to_owned(),
        Residual::vanishing(&wz.adjoint().matmul(&wy), nw * nz * nw * ny),
    );
    residuals.insert(
        "yw nilpotent".to_owned(),
        Residual::nilpotency(&y.matmul(w), tol),
    );
    let z_core = w_core(&pair.with_element(z.clone()), tol)?;
    residuals.insert(
        "z has weighted core inverse".to_owned(),
        Residual::count(usize::from(z_core.exists), 1),
    );
    let agreement = if z_core.exists {
        Residual::equality(&z_core.value, &x_ep)
    } else {
        Residual::new(f64::INFINITY, 0.0)
    };
    residuals.insert("core inverse of z = x".to_owned(), agreement);
    for (label, r) in &z_core.residuals {
        residuals.insert(format!("z: {label}"), *r);
    }
    Ok(CoreEPDecomposition {
        z,
        y,
        x: x_ep,
        residuals,
    })
}

/// The projection `p = I − W·z·W·x` built from the decomposition, and the
/// checks that make it a witness for weighted core-EP invertibility.
#[derive(Debug, Clone)]
pub struct PolarCertificate {
    pub p: CMatrix,
    /// `max(‖p² − p‖, ‖p* − p‖)`.
    pub projection_residual: f64,
    /// `‖p·WA − p·WA·p‖`.
    pub commute_residual: f64,
    pub nilpotency_witness: usize,
    pub nilpotency: Residual,
    /// `σ_min((WA)^m + p)` for `m = 1..=m_max`.
    pub invertibility_margins: Vec<f64>,
    /// `rank_rtol · σ_max((WA)^m + p)`, the threshold each margin must exceed.
    pub invertibility_thresholds: Vec<f64>,
    /// Whether `I − p = W·U` is solvable. Reported, not required.
    pub complement_in_weight_range: bool,
    pub(crate) scale: f64,
}

impl PolarCertificate {
    pub fn is_projection(&self, tol: &ToleranceConfig) -> bool {
        tol.accepts(self.projection_residual, self.scale)
    }

    pub fn passes(&self, tol: &ToleranceConfig) -> bool {
        self.is_projection(tol)
            && tol.accepts(self.commute_residual, self.scale)
            && self.nilpotency.passes(tol)
            && self
                .invertibility_margins
                .iter()
                .zip(&self.invertibility_thresholds)
                .all(|(m, t)| m > t)
    }
}

pub fn polar_projection(
    pair: &WeightedPair,
    m_max: usize,
    tol: &ToleranceConfig,
) -> Result<PolarCertificate> {
    let n = pair.n();
    let dec = core_ep_decompose(pair, tol)?;
    let w = &pair.w;
    let x = match w_core(&pair.with_element(dec.z.clone()), tol)? {
        c if c.exists => c.value,
        _ => dec.x.clone(),
    };
    let p = CMatrix::identity(n) - w.matmul(&dec.z).matmul(w).matmul(&x);
    let projection_residual = p.matmul(&p).distance(&p).max(p.adjoint().distance(&p));
    let wa = pair.wa();
    let pwa = p.matmul(&wa);
    let commute_residual = pwa.distance(&pwa.matmul(&p));
    let nil = pwa.nilpotency(tol)?;

    let mut margins = Vec::with_capacity(m_max);
    let mut thresholds = Vec::with_capacity(m_max);
    let mut power = CMatrix::identity(n);
    for _ in 0..m_max {
        power = power.matmul(&wa);
        let f = svd(&(&power + &p));
        margins.push(f.s.last().copied().unwrap_or(0.0));
        thresholds.push(tol.rank_rtol * f.sigma_max());
    }

    let complement = CMatrix::identity(n) - &p;
    let complement_in_weight_range = solve_constraints(
        (n, n),
        &[MatrixConstraint::left(w.clone(), complement)],
        tol,
    )?
    .feasible;

    Ok(PolarCertificate {
        scale: p.frobenius_norm().max(1.0),
        p,
        projection_residual,
        commute_residual,
        nilpotency_witness: nil.witness,
        nilpotency: Residual::new(nil.residual, nil.scale),
        invertibility_margins: margins,
        invertibility_thresholds: thresholds,
        complement_in_weight_range,
    })
}

/// Truth values of `(I − WAW·X)b = 0`, `(I − W·X·WA)b = 0` and
/// `(WA)^π·b = 0`, with `X` the weighted core-EP inverse.
pub fn annihilator_equivalence(
    pair: &WeightedPair,
    b: &CMatrix,
    tol: &ToleranceConfig,
) -> Result<[bool; 3]> {
    let n = pair.n();
    if b.ensure_square()? != n {
        return Err(crate::error::Error::DimensionMismatch(format!(
            "b must be {n}x{n}"
        )));
    }
    let x = w_core_ep_direct(pair, tol)?.value;
    let id = CMatrix::identity(n);
    let w = &pair.w;
    let projectors = [
        &id - &pair.waw().matmul(&x),
        &id - &w.matmul(&x).matmul(&pair.wa()),
        spectral_projection_with_floor(&pair.wa(), product_floor(pair, tol), tol)?,
    ];
    let nb = b.frobenius_norm();
    Ok(projectors.map(|p| tol.accepts(p.matmul(b).frobenius_norm(), p.frobenius_norm() * nb)))
}
