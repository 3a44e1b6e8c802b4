//! Weighted generalized inverses of a pair `(A, W)`.
//!
//! The weighted core-EP inverse `X` of `A` with weight `W` is the unique
//! solution of `A(WX)² = X`, `(WAWX)* = WAWX` and `(AW)^k = XW(AW)^{k+1}`
//! with `k = max(ind(AW), ind(WA))`. It can be reached three ways:
//!
//! * [`w_core_ep_direct`]: solve `WAW·X = (WA)^k((WA)^k)†` over
//!   `X ∈ R((AW)^k)` with the equation solver;
//! * [`w_core_ep_gdrazin`]: `(GW)²·G^{⊕#,W}` with `G` the weighted g-Drazin
//!   inverse;
//! * [`w_core_ep_13w`]: `(GW)²·T` with `T` a (1,3,w)-inverse of `G`.

mod block;
mod decomposition;

pub use block::{block_triangular_core_ep, Triangle};
pub use decomposition::{
    annihilator_equivalence, core_ep_decompose, polar_projection, CoreEPDecomposition,
    PolarCertificate,
};

use crate::certificate::{InverseCertificate, InverseKind, Residual};
use crate::classic::IndexData;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::solver::{solve_constraints, MatrixConstraint};
use crate::svd::{column_space_rank, pinv, svd};
use crate::tolerance::ToleranceConfig;

/// An element `A` together with its weight `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPair {
    pub a: CMatrix,
    pub w: CMatrix,
}

impl WeightedPair {
    pub fn new(a: CMatrix, w: CMatrix) -> Result<Self> {
        let n = a.ensure_square()?;
        let m = w.ensure_square()?;
        if n != m {
            return Err(Error::DimensionMismatch(format!(
                "A is {n}x{n} but W is {m}x{m}"
            )));
        }
        Ok(Self { a, w })
    }

    /// `(A, I)`.
    pub fn unweighted(a: CMatrix) -> Result<Self> {
        let n = a.ensure_square()?;
        Ok(Self {
            a,
            w: CMatrix::identity(n),
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn aw(&self) -> CMatrix {
        self.a.matmul(&self.w)
    }

    pub fn wa(&self) -> CMatrix {
        self.w.matmul(&self.a)
    }

    pub fn waw(&self) -> CMatrix {
        self.w.matmul(&self.a).matmul(&self.w)
    }

    /// The same weight with a different element.
    pub fn with_element(&self, a: CMatrix) -> Self {
        Self {
            a,
            w: self.w.clone(),
        }
    }
}

/// `max(ind(AW), ind(WA))` together with the index data of both products.
pub(crate) struct PairIndex {
    pub aw: IndexData,
    pub wa: IndexData,
}

impl PairIndex {
    pub fn new(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<Self> {
        let floor = product_floor(pair, tol);
        Ok(Self {
            aw: IndexData::with_floor(&pair.aw(), floor, tol)?,
            wa: IndexData::with_floor(&pair.wa(), floor, tol)?,
        })
    }

    pub fn k(&self) -> usize {
        self.aw.k.max(self.wa.k)
    }
}

/// `AW` and `WA` count as zero below `rank_rtol · σ_max(A) · σ_max(W)`,
/// the size of rounding error in forming the product.
pub(crate) fn product_floor(pair: &WeightedPair, tol: &ToleranceConfig) -> f64 {
    tol.rank_rtol * svd(&pair.a).sigma_max() * svd(&pair.w).sigma_max()
}

/// `max(ind(AW), ind(WA))`.
pub fn pair_index(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<usize> {
    Ok(PairIndex::new(pair, tol)?.k())
}

/// `A^{D,W} = A[(WA)^D]²`, cross-checked against `[(AW)^D]²A`.
pub fn w_gdrazin(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let idx = PairIndex::new(pair, tol)?;
    let d_wa = idx.wa.drazin();
    let d_aw = idx.aw.drazin();
    let x = pair.a.matmul(&d_wa).matmul(&d_wa);
    let x_alt = d_aw.matmul(&d_aw).matmul(&pair.a);
    let (a, w) = (&pair.a, &pair.w);
    let awx = a.matmul(w).matmul(&x);
    let xwa = x.matmul(w).matmul(a);
    let xwawx = xwa.matmul(w).matmul(&x);
    // A − AWXWA is nilpotent only after multiplying by W; (A − AWXWA)W = AW(AW)^π.
    let rest = a - &awx.matmul(w).matmul(a);
    Ok(
        InverseCertificate::found(InverseKind::WeightedGdrazin, x.clone())
            .with("awx=xwa", Residual::equality(&awx, &xwa))
            .with("xwawx=x", Residual::equality(&xwawx, &x))
            .with(
                "(a-awxwa)w nilpotent",
                Residual::nilpotency(&rest.matmul(w), tol),
            )
            .with("a[(wa)^d]^2=[(aw)^d]^2a", Residual::equality(&x, &x_alt)),
    )
}

/// `(AW)^#·AW·(WAW)†`, defined iff `ind(AW) ≤ 1`.
pub fn w_core(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let aw = pair.aw();
    let idx = IndexData::with_floor(&aw, product_floor(pair, tol), tol)?;
    if idx.k > 1 {
        return Ok(InverseCertificate::absent(
            InverseKind::WeightedCore,
            pair.n(),
        ));
    }
    let waw = pair.waw();
    let x = idx.drazin().matmul(&aw).matmul(&pinv(&waw, tol));
    Ok(certify_w_core(pair, x))
}

fn certify_w_core(pair: &WeightedPair, x: CMatrix) -> InverseCertificate {
    let (a, w) = (&pair.a, &pair.w);
    let aw = pair.aw();
    let waw = pair.waw();
    let wx = w.matmul(&x);
    let wawx = waw.matmul(&x);
    InverseCertificate::found(InverseKind::WeightedCore, x.clone())
        .with(
            "a(wx)^2=x",
            Residual::equality(&a.matmul(&wx).matmul(&wx), &x),
        )
        .with("(wawx)*=wawx", Residual::hermitian(&wawx))
        .with(
            "xw(aw)^2=aw",
            Residual::equality(&x.matmul(w).matmul(&aw).matmul(&aw), &aw),
        )
        .with(
            "(waw)x(waw)=waw",
            Residual::equality(&wawx.matmul(&waw), &waw),
        )
        .with("x(waw)x=x", Residual::equality(&x.matmul(&wawx), &x))
}

/// Minimum-norm solution of `AWXWA = A`, `(WAWX)* = WAWX`.
pub fn w_one_three(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let n = pair.n();
    let aw = pair.aw();
    let wa = pair.wa();
    let waw = pair.waw();
    let system = [
        MatrixConstraint::single(aw, wa, pair.a.clone()),
        MatrixConstraint::hermitian_left(waw, n),
    ];
    let solved = solve_constraints((n, n), &system, tol)?;
    if !solved.feasible {
        return Ok(InverseCertificate::absent(InverseKind::OneThreeW, n));
    }
    let x = solved.solution;
    let (a, w) = (&pair.a, &pair.w);
    let wawx = pair.waw().matmul(&x);
    let awxwa = a.matmul(w).matmul(&x).matmul(w).matmul(a);
    Ok(InverseCertificate::found(InverseKind::OneThreeW, x)
        .with("awxwa=a", Residual::equality(&awxwa, a))
        .with("(wawx)*=wawx", Residual::hermitian(&wawx)))
}

/// The (b,c)-inverse of `a`, tried as `b(cab)†c` and kept only if it passes
/// `xab = b`, `cax = c`, `x ∈ b·𝔄·x` and `x ∈ x·𝔄·c`.
pub fn bc_inverse(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    tol: &ToleranceConfig,
) -> Result<InverseCertificate> {
    let n = a.ensure_square()?;
    for (name, m) in [("b", b), ("c", c)] {
        if m.ensure_square()? != n {
            return Err(Error::DimensionMismatch(format!("{name} must be {n}x{n}")));
        }
    }
    let cab = c.matmul(a).matmul(b);
    let x = b.matmul(&pinv(&cab, tol)).matmul(c);
    let xab = x.matmul(a).matmul(b);
    let cax = c.matmul(a).matmul(&x);
    let left = solve_constraints(
        (n, n),
        &[MatrixConstraint::single(b.clone(), x.clone(), x.clone())],
        tol,
    )?;
    let right = solve_constraints(
        (n, n),
        &[MatrixConstraint::single(x.clone(), c.clone(), x.clone())],
        tol,
    )?;
    let scale_left = b.frobenius_norm().max(x.frobenius_norm());
    let scale_right = c.frobenius_norm().max(x.frobenius_norm());
    let cert = InverseCertificate::found(InverseKind::Bc, x)
        .with("xab=b", Residual::equality(&xab, b))
        .with("cax=c", Residual::equality(&cax, c))
        .with("x in b.A.x", Residual::new(left.residual, scale_left))
        .with("x in x.A.c", Residual::new(right.residual, scale_right));
    if cert.verified(tol) && left.feasible && right.feasible {
        Ok(cert)
    } else {
        Ok(InverseCertificate::absent(InverseKind::Bc, n))
    }
}

/// Selects how the weighted core-EP inverse is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreEpRoute {
    Direct,
    Gdrazin,
    OneThreeW,
}

pub fn w_core_ep(
    pair: &WeightedPair,
    route: CoreEpRoute,
    tol: &ToleranceConfig,
) -> Result<InverseCertificate> {
    match route {
        CoreEpRoute::Direct => w_core_ep_direct(pair, tol),
        CoreEpRoute::Gdrazin => w_core_ep_gdrazin(pair, tol),
        CoreEpRoute::OneThreeW => w_core_ep_13w(pair, tol),
    }
}

/// Solves `WAW·(AW)^k·Y = (WA)^k((WA)^k)†` and returns `X = (AW)^k·Y`.
///
/// `R((AW)^j)` and `R((WA)^j)` stop changing once `j` reaches the index of
/// the product, so each side uses the (normalized) power at its own index.
pub fn w_core_ep_direct(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let idx = PairIndex::new(pair, tol)?;
    let x = direct_value(pair, &idx, tol)?;
    Ok(certify_core_ep(pair, &idx, x, tol))
}

fn direct_value(pair: &WeightedPair, idx: &PairIndex, tol: &ToleranceConfig) -> Result<CMatrix> {
    let n = pair.n();
    if idx.aw.rank_k == 0 || idx.wa.rank_k == 0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let basis = &idx.aw.bk;
    let lhs = pair.waw().matmul(basis);
    let system = [MatrixConstraint::left(lhs, idx.wa.range_projector())];
    let solved = solve_constraints((n, n), &system, tol)?;
    if !solved.feasible {
        return Err(Error::Internal(format!(
            "weighted core-EP system infeasible (residual {:.3e})",
            solved.residual
        )));
    }
    Ok(basis.matmul(&solved.solution))
}

/// `(GW)²·G^{⊕#,W}` with `G = A^{D,W}`. Since `GW = (AW)^D` has index at most
/// one, the inner weighted core inverse always exists.
pub fn w_core_ep_gdrazin(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let g = w_gdrazin(pair, tol)?.value;
    let inner_pair = pair.with_element(g.clone());
    let inner = w_core(&inner_pair, tol)?;
    if !inner.exists {
        return Err(Error::Internal(
            "weighted core inverse of the weighted g-Drazin inverse does not exist".into(),
        ));
    }
    let gw = g.matmul(&pair.w);
    let x = gw.matmul(&gw).matmul(&inner.value);
    let idx = PairIndex::new(pair, tol)?;
    Ok(certify_core_ep(pair, &idx, x, tol))
}

/// Which power multiplies the (1,3,w)-inverse `T` of `G = A^{D,W}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneThreeForm {
    /// `(GW)²·T`.
    Weighted,
    /// `G²·T`; agrees with [`OneThreeForm::Weighted`] when `W = I` and in
    /// general does not give the weighted core-EP inverse.
    Plain,
}

/// `(GW)²·T` with `T` the minimum-norm (1,3,w)-inverse of `G = A^{D,W}`.
pub fn w_core_ep_13w(pair: &WeightedPair, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let (g, t) = gdrazin_and_one_three(pair, tol)?;
    core_ep_from_one_three(pair, &g, &t, OneThreeForm::Weighted, tol)
}

/// `G = A^{D,W}` and the minimum-norm (1,3,w)-inverse of `G`.
pub fn gdrazin_and_one_three(
    pair: &WeightedPair,
    tol: &ToleranceConfig,
) -> Result<(CMatrix, CMatrix)> {
    let g = w_gdrazin(pair, tol)?.value;
    let t = w_one_three(&pair.with_element(g.clone()), tol)?;
    if !t.exists {
        return Err(Error::Internal(
            "weighted g-Drazin inverse has no (1,3,w)-inverse".into(),
        ));
    }
    Ok((g, t.value))
}

/// Assembles and certifies the (1,3,w) representation from precomputed `G`, `T`.
pub fn core_ep_from_one_three(
    pair: &WeightedPair,
    g: &CMatrix,
    t: &CMatrix,
    form: OneThreeForm,
    tol: &ToleranceConfig,
) -> Result<InverseCertificate> {
    let head = match form {
        OneThreeForm::Weighted => g.matmul(&pair.w),
        OneThreeForm::Plain => g.clone(),
    };
    let x = head.matmul(&head).matmul(t);
    let idx = PairIndex::new(pair, tol)?;
    Ok(certify_core_ep(pair, &idx, x, tol))
}

/// Defining system of the weighted core-EP inverse, with the limit condition
/// in its exact finite form, plus the range conditions of the matrix
/// characterization.
pub(crate) fn certify_core_ep(
    pair: &WeightedPair,
    idx: &PairIndex,
    x: CMatrix,
    tol: &ToleranceConfig,
) -> InverseCertificate {
    let (a, w) = (&pair.a, &pair.w);
    let wx = w.matmul(&x);
    let wawx = pair.waw().matmul(&x);
    // (AW)^k = XW(AW)^{k+1}, divided through by σ_max(AW)^k.
    let k = idx.k();
    let bk = power_normalized(&idx.aw, k);
    let rhs = x.matmul(w).matmul(&pair.aw()).matmul(&bk);
    let mut cert = InverseCertificate::found(InverseKind::WeightedCoreEp, x.clone())
        .with(
            "a(wx)^2=x",
            Residual::equality(&a.matmul(&wx).matmul(&wx), &x),
        )
        .with("(wawx)*=wawx", Residual::hermitian(&wawx))
        .with("(aw)^k=xw(aw)^(k+1)", Residual::equality(&rhs, &bk))
        .with(
            "wawx=(wa)^k((wa)^k)+",
            Residual::equality(&wawx, &idx.wa.range_projector()),
        );
    let in_range = column_space_rank(&[&x, &idx.aw.range_projector()], tol).unwrap_or(usize::MAX);
    cert.push(
        "rank[x|(aw)^k]=rank((aw)^k)",
        Residual::count(in_range, idx.aw.rank_k),
    );
    cert
}

/// `(AW/σ)^k` for `k ≥ ind(AW)`.
fn power_normalized(data: &IndexData, k: usize) -> CMatrix {
    let mut p = data.bk.clone();
    for _ in data.k..k {
        p = p.matmul(&data.b);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::{core_ep, drazin};
    use crate::matrix::C64;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn fixture() -> (WeightedPair, CMatrix) {
        let r2 = 2f64.sqrt();
        let a = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, r2]]);
        let w = CMatrix::diag_real(&[1.0, 1.0 / r2]);
        let x = CMatrix::from_real(&[&[1.0, -1.0], &[0.0, r2]]);
        (WeightedPair::new(a, w).unwrap(), x)
    }

    fn shift(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn invertible() -> CMatrix {
        CMatrix::from_real(&[&[2.0, 1.0, 0.0], &[0.5, 3.0, -1.0], &[0.0, 1.0, 1.5]])
    }

    fn weight() -> CMatrix {
        CMatrix::from_fn(3, 3, |i, j| {
            C64::new(
                if i == j {
                    1.5
                } else {
                    0.2 * (i as f64 - j as f64)
                },
                0.1 * (i + j) as f64,
            )
        })
    }

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        a.distance(b) <= 1e-9 * (1.0 + b.frobenius_norm())
    }

    #[test]
    fn pair_rejects_mismatched_sizes() {
        assert!(WeightedPair::new(CMatrix::identity(2), CMatrix::identity(3)).is_err());
        assert!(WeightedPair::new(CMatrix::zeros(2, 3), CMatrix::identity(2)).is_err());
    }

    #[test]
    fn fixture_weighted_core() {
        let (pair, expected) = fixture();
        let c = w_core(&pair, &tol()).unwrap();
        assert!(c.exists);
        assert!(c.value.distance(&expected) < 1e-12);
        assert!(
            c.residuals.values().all(|r| r.abs <= 1e-10),
            "{:?}",
            c.residuals
        );
        assert!(pair.waw().matmul(&c.value).distance(&CMatrix::identity(2)) < 1e-12);
        let d = w_core_ep_direct(&pair, &tol()).unwrap();
        assert!(d.value.distance(&expected) < 1e-12);
    }

    #[test]
    fn weighted_core_reductions() {
        let a = invertible();
        let pair = WeightedPair::unweighted(a.clone()).unwrap();
        assert!(close(
            &w_core(&pair, &tol()).unwrap().value,
            &pinv(&a, &tol())
        ));
        let c = w_core(&WeightedPair::unweighted(shift(2)).unwrap(), &tol()).unwrap();
        assert!(!c.exists);
    }

    #[test]
    fn gdrazin_reductions() {
        let a = CMatrix::block_diag(&[&CMatrix::diag_real(&[3.0]), &shift(2)]);
        let g = w_gdrazin(&WeightedPair::unweighted(a.clone()).unwrap(), &tol()).unwrap();
        assert!(close(&g.value, &drazin(&a, &tol()).unwrap().value));
        assert!(g.verified(&tol()), "{:?}", g.failing(&tol()));
        let g = w_gdrazin(&WeightedPair::unweighted(shift(3)).unwrap(), &tol()).unwrap();
        assert_eq!(g.value, CMatrix::zeros(3, 3));
        let pair = WeightedPair::new(a, weight()).unwrap();
        let g = w_gdrazin(&pair, &tol()).unwrap();
        assert!(g.verified(&tol()), "{:?}", g.failing(&tol()));
    }

    #[test]
    fn one_three_w_reductions() {
        let a = CMatrix::block_diag(&[&CMatrix::diag_real(&[2.0]), &shift(2)]);
        let t = w_one_three(&WeightedPair::unweighted(a.clone()).unwrap(), &tol()).unwrap();
        assert!(t.verified(&tol()));
        let ax = a.matmul(&t.value);
        assert!(ax.matmul(&a).approx_eq(&a, &tol()));
        assert!(ax.adjoint().approx_eq(&ax, &tol()));
        let pair = WeightedPair::new(invertible(), weight()).unwrap();
        let t = w_one_three(&pair, &tol()).unwrap();
        assert!(t.verified(&tol()));
        let w_inv = pinv(&pair.w, &tol());
        let guess = w_inv.matmul(&pinv(&pair.a, &tol())).matmul(&w_inv);
        assert!(close(&t.value, &guess));
    }

    #[test]
    fn bc_reductions() {
        let a = invertible();
        let i = CMatrix::identity(3);
        let c = bc_inverse(&a, &i, &i, &tol()).unwrap();
        assert!(c.exists && close(&c.value, &pinv(&a, &tol())));
        let z = CMatrix::zeros(3, 3);
        let c = bc_inverse(&a, &z, &z, &tol()).unwrap();
        assert!(c.exists);
        assert_eq!(c.value, z);
        // b = c = E11 with a = E22 has cab = 0, so the candidate 0 fails xab = b.
        let e11 = CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let e22 = CMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(!bc_inverse(&e22, &e11, &e11, &tol()).unwrap().exists);
    }

    #[test]
    fn bc_inverse_reproduces_weighted_core() {
        let (pair, expected) = fixture();
        let t = tol();
        let b = drazin(&pair.aw(), &t).unwrap().value;
        let c = drazin(&pair.wa(), &t).unwrap().value.adjoint();
        let bc = bc_inverse(&pair.waw(), &b, &c, &t).unwrap();
        assert!(bc.exists);
        assert!(bc.value.distance(&expected) < 1e-10);
    }

    #[test]
    fn routes_reduce_to_core_ep_without_weight() {
        let a = CMatrix::block_diag(&[&invertible(), &shift(3)]);
        let pair = WeightedPair::unweighted(a.clone()).unwrap();
        let reference = core_ep(&a, &tol()).unwrap().value;
        for route in [
            CoreEpRoute::Direct,
            CoreEpRoute::Gdrazin,
            CoreEpRoute::OneThreeW,
        ] {
            let c = w_core_ep(&pair, route, &tol()).unwrap();
            assert!(close(&c.value, &reference), "{route:?}");
            assert!(c.verified(&tol()), "{route:?}: {:?}", c.failing(&tol()));
        }
        let pair = WeightedPair::unweighted(shift(4)).unwrap();
        for route in [
            CoreEpRoute::Direct,
            CoreEpRoute::Gdrazin,
            CoreEpRoute::OneThreeW,
        ] {
            assert!(
                w_core_ep(&pair, route, &tol())
                    .unwrap()
                    .value
                    .frobenius_norm()
                    < 1e-12
            );
        }
    }

    #[test]
    fn routes_agree_with_weight() {
        let a = CMatrix::block_diag(&[&CMatrix::diag_real(&[1.5]), &shift(2)]);
        let w = weight();
        let a = pinv(&w, &tol()).matmul(&a);
        let pair = WeightedPair::new(a, w).unwrap();
        let direct = w_core_ep_direct(&pair, &tol()).unwrap();
        assert!(direct.verified(&tol()), "{:?}", direct.failing(&tol()));
        let gd = w_core_ep_gdrazin(&pair, &tol()).unwrap();
        let tw = w_core_ep_13w(&pair, &tol()).unwrap();
        assert!(close(&gd.value, &direct.value));
        assert!(close(&tw.value, &direct.value));
        let (g, t) = gdrazin_and_one_three(&pair, &tol()).unwrap();
        let plain = core_ep_from_one_three(&pair, &g, &t, OneThreeForm::Plain, &tol()).unwrap();
        assert!(!close(&plain.value, &direct.value));
    }
}
