//! Unweighted generalized inverses.
//!
//! Everything index-related is computed on the spectrally normalized matrix
//! `B = A / σ_max(A)`. Powers of `B` have norm at most one, so the rank of
//! `B^k` can be judged against the fixed threshold `rank_rtol` instead of a
//! threshold that drifts with `σ_max(A)^k`. Results are scaled back at the end
//! (`A^D = B^D / σ_max`).

use crate::certificate::{InverseCertificate, InverseKind, Residual};
use crate::error::Result;
use crate::matrix::CMatrix;
use crate::svd::{column_space_rank, pinv, pinv_truncated, rank, svd};
use crate::tolerance::ToleranceConfig;

/// Index data of a square matrix, shared by the Drazin, core-EP and
/// weighted constructions.
#[derive(Debug, Clone)]
pub(crate) struct IndexData {
    /// Drazin index.
    pub k: usize,
    /// `σ_max(A)`; zero for the zero matrix.
    pub sigma: f64,
    /// `A / σ_max` (or `A` itself when zero).
    pub b: CMatrix,
    /// `B^k`.
    pub bk: CMatrix,
    /// `rank(A^k)`.
    pub rank_k: usize,
}

impl IndexData {
    pub fn new(a: &CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        Self::with_floor(a, 0.0, tol)
    }

    /// As [`IndexData::new`], but `a` counts as the zero matrix when
    /// `σ_max(a) ≤ floor`. Products whose exact value is zero come out of
    /// floating point as pure rounding noise, which normalization would
    /// otherwise blow up to a full-rank matrix.
    pub fn with_floor(a: &CMatrix, floor: f64, tol: &ToleranceConfig) -> Result<Self> {
        let n = a.ensure_square()?;
        let sigma = svd(a).sigma_max();
        if sigma <= floor {
            let zero = CMatrix::zeros(n, n);
            return Ok(Self {
                k: 1,
                sigma: 0.0,
                b: zero.clone(),
                bk: zero,
                rank_k: 0,
            });
        }
        if sigma == 0.0 {
            return Ok(Self {
                k: 1,
                sigma,
                b: a.clone(),
                bk: a.clone(),
                rank_k: 0,
            });
        }
        let b = a.scale_real(1.0 / sigma);
        let mut p = CMatrix::identity(n);
        let mut r_prev = n;
        for k in 0..=n {
            let next = p.matmul(&b);
            let r = svd(&next).rank_at(tol.rank_rtol);
            if r == r_prev {
                return Ok(Self {
                    k,
                    sigma,
                    b,
                    bk: p,
                    rank_k: r,
                });
            }
            p = next;
            r_prev = r;
        }
        // Ranks strictly decrease at most n times, so the loop always returns.
        unreachable!("index exceeds matrix size")
    }

    /// `B^D = B^k (B^{2k+1})† B^k`, truncated to the known rank.
    pub fn normalized_drazin(&self) -> CMatrix {
        if self.rank_k == 0 {
            return CMatrix::zeros(self.b.rows(), self.b.cols());
        }
        let mid = self.bk.matmul(&self.b).matmul(&self.bk);
        self.bk
            .matmul(&pinv_truncated(&mid, self.rank_k))
            .matmul(&self.bk)
    }

    pub fn drazin(&self) -> CMatrix {
        if self.rank_k == 0 {
            return CMatrix::zeros(self.b.rows(), self.b.cols());
        }
        self.normalized_drazin().scale_real(1.0 / self.sigma)
    }

    /// `A^k (A^k)†`, the orthogonal projector onto `R(A^k)`.
    pub fn range_projector(&self) -> CMatrix {
        self.bk.matmul(&pinv_truncated(&self.bk, self.rank_k))
    }

    /// `A^k` at its true scale.
    pub fn power_k(&self) -> CMatrix {
        if self.sigma == 0.0 {
            return self.bk.clone();
        }
        self.bk.scale_real(self.sigma.powi(self.k as i32))
    }
}

/// Smallest `k` with `rank(A^k) = rank(A^{k+1})`.
pub fn index(a: &CMatrix, tol: &ToleranceConfig) -> Result<usize> {
    Ok(IndexData::new(a, tol)?.k)
}

pub fn moore_penrose(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    a.ensure_square()?;
    let x = pinv(a, tol);
    let ax = a.matmul(&x);
    let xa = x.matmul(a);
    Ok(
        InverseCertificate::found(InverseKind::MoorePenrose, x.clone())
            .with("axa=a", Residual::equality(&ax.matmul(a), a))
            .with("xax=x", Residual::equality(&xa.matmul(&x), &x))
            .with("(ax)*=ax", Residual::hermitian(&ax))
            .with("(xa)*=xa", Residual::hermitian(&xa)),
    )
}

pub fn drazin(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let data = IndexData::new(a, tol)?;
    let x = data.drazin();
    let ax = a.matmul(&x);
    let xa = x.matmul(a);
    let ak = data.power_k();
    Ok(InverseCertificate::found(InverseKind::Drazin, x.clone())
        .with("ax=xa", Residual::equality(&ax, &xa))
        .with("xax=x", Residual::equality(&xa.matmul(&x), &x))
        .with("a^(k+1)x=a^k", Residual::equality(&ak.matmul(&ax), &ak))
        .with(
            "a-axa nilpotent",
            Residual::nilpotency(&(a - &ax.matmul(a)), tol),
        ))
}

pub fn group(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let data = IndexData::new(a, tol)?;
    if data.k > 1 {
        return Ok(InverseCertificate::absent(InverseKind::Group, a.rows()));
    }
    let x = data.drazin();
    let ax = a.matmul(&x);
    let xa = x.matmul(a);
    Ok(InverseCertificate::found(InverseKind::Group, x.clone())
        .with("axa=a", Residual::equality(&ax.matmul(a), a))
        .with("xax=x", Residual::equality(&xa.matmul(&x), &x))
        .with("ax=xa", Residual::equality(&ax, &xa)))
}

/// The canonical (1,3)-inverse, `A†`.
pub fn one_three(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    a.ensure_square()?;
    let x = pinv(a, tol);
    let ax = a.matmul(&x);
    Ok(InverseCertificate::found(InverseKind::OneThree, x)
        .with("axa=a", Residual::equality(&ax.matmul(a), a))
        .with("(ax)*=ax", Residual::hermitian(&ax)))
}

/// `A^# A A†`, defined when `ind(A) ≤ 1`.
pub fn core(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let data = IndexData::new(a, tol)?;
    if data.k > 1 {
        return Ok(InverseCertificate::absent(InverseKind::Core, a.rows()));
    }
    let x = data.drazin().matmul(a).matmul(&pinv(a, tol));
    let ax = a.matmul(&x);
    Ok(InverseCertificate::found(InverseKind::Core, x.clone())
        .with("ax^2=x", Residual::equality(&ax.matmul(&x), &x))
        .with("(ax)*=ax", Residual::hermitian(&ax))
        .with("xa^2=a", Residual::equality(&x.matmul(a).matmul(a), a)))
}

/// `A^D A^k (A^k)†`; always exists.
pub fn core_ep(a: &CMatrix, tol: &ToleranceConfig) -> Result<InverseCertificate> {
    let data = IndexData::new(a, tol)?;
    let x = if data.rank_k == 0 {
        CMatrix::zeros(a.rows(), a.cols())
    } else {
        data.normalized_drazin()
            .matmul(&data.range_projector())
            .scale_real(1.0 / data.sigma)
    };
    let mut cert = InverseCertificate::found(InverseKind::CoreEp, x.clone())
        .with("xax=x", Residual::equality(&x.matmul(a).matmul(&x), &x));
    // R(A^k) is represented by its orthogonal projector, whose nonzero
    // singular values are all one; A^k itself may be pure rounding noise.
    let rk = data.rank_k;
    let range = data.range_projector();
    let xs = x.adjoint();
    cert.push(
        "rank[x|a^k]=rank(a^k)",
        Residual::count(column_space_rank(&[&x, &range], tol)?, rk),
    );
    cert.push("rank(x)=rank(a^k)", Residual::count(rank(&x, tol), rk));
    cert.push(
        "rank[x*|a^k]=rank(a^k)",
        Residual::count(column_space_rank(&[&xs, &range], tol)?, rk),
    );
    Ok(cert)
}

/// `A^π = I − A A^D`.
pub fn spectral_projection(a: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    spectral_projection_with_floor(a, 0.0, tol)
}

/// [`spectral_projection`] with `a` treated as zero when `σ_max(a) ≤ floor`.
pub(crate) fn spectral_projection_with_floor(
    a: &CMatrix,
    floor: f64,
    tol: &ToleranceConfig,
) -> Result<CMatrix> {
    let data = IndexData::with_floor(a, floor, tol)?;
    Ok(CMatrix::identity(a.rows()) - a.matmul(&data.drazin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::solver::{solve_constraints, MatrixConstraint};
    use proptest::prelude::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
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

    fn three_plus_j2() -> CMatrix {
        CMatrix::block_diag(&[&CMatrix::diag_real(&[3.0]), &shift(2)])
    }

    fn invertible() -> CMatrix {
        CMatrix::from_real(&[&[2.0, 1.0, 0.0], &[0.5, 3.0, -1.0], &[0.0, 1.0, 1.5]])
    }

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        a.distance(b) <= 1e-10 * (1.0 + b.frobenius_norm())
    }

    /// `Q J Q⁻¹` with a fixed, well-conditioned complex `Q`.
    fn similar(j: &CMatrix) -> CMatrix {
        let n = j.rows();
        let q = CMatrix::from_fn(n, n, |r, c| {
            let d = if r == c { 2.0 } else { 0.0 };
            C64::new(
                d + 0.3 * ((r * 7 + c * 3) as f64).sin(),
                0.2 * ((r + 2 * c) as f64).cos(),
            )
        });
        q.matmul(j).matmul(&pinv(&q, &tol()))
    }

    #[test]
    fn index_examples() {
        assert_eq!(index(&invertible(), &tol()).unwrap(), 0);
        assert_eq!(index(&shift(2), &tol()).unwrap(), 2);
        assert_eq!(index(&three_plus_j2(), &tol()).unwrap(), 2);
        assert_eq!(index(&CMatrix::zeros(3, 3), &tol()).unwrap(), 1);
        assert_eq!(index(&shift(5), &tol()).unwrap(), 5);
        assert!(index(&CMatrix::zeros(2, 3), &tol()).is_err());
    }

    #[test]
    fn drazin_examples() {
        let a = invertible();
        let inv = pinv(&a, &tol());
        let d = drazin(&a, &tol()).unwrap();
        assert!(close(&d.value, &inv));
        assert!(d.verified(&tol()), "{:?}", d.failing(&tol()));
        assert_eq!(
            drazin(&shift(3), &tol()).unwrap().value,
            CMatrix::zeros(3, 3)
        );
        let expected =
            CMatrix::block_diag(&[&CMatrix::diag_real(&[1.0 / 3.0]), &CMatrix::zeros(2, 2)]);
        let d = drazin(&three_plus_j2(), &tol()).unwrap();
        assert!(close(&d.value, &expected));
        assert!(d.verified(&tol()));
    }

    #[test]
    fn group_examples() {
        let idem = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let g = group(&idem, &tol()).unwrap();
        assert!(g.exists && close(&g.value, &idem));
        assert!(g.verified(&tol()));
        let g = group(&shift(2), &tol()).unwrap();
        assert!(!g.exists);
        assert_eq!(g.value, CMatrix::zeros(2, 2));
        assert!(close(
            &group(&invertible(), &tol()).unwrap().value,
            &pinv(&invertible(), &tol())
        ));
    }

    #[test]
    fn one_three_examples() {
        let a = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let c = one_three(&a, &tol()).unwrap();
        assert!(c.verified(&tol()));
        // Minimum-norm solution of {AXA = A, (AX)* = AX} from the oracle.
        let sys = vec![
            MatrixConstraint::single(a.clone(), a.clone(), a.clone()),
            MatrixConstraint::hermitian_left(a.clone(), 2),
        ];
        let oracle = solve_constraints((2, 2), &sys, &tol()).unwrap();
        assert!(oracle.feasible);
        assert!(close(&c.value, &oracle.solution));
        assert!(close(
            &c.value,
            &CMatrix::from_real(&[&[0.5, 0.0], &[0.5, 0.0]])
        ));
        assert_eq!(
            one_three(&CMatrix::zeros(2, 2), &tol()).unwrap().value,
            CMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn core_examples() {
        let a = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let c = core(&a, &tol()).unwrap();
        assert!(c.verified(&tol()));
        assert!(close(
            &c.value,
            &CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]])
        ));
        // Oracle: X = A·Y with A·A·Y = A A†.
        let ypart = solve_constraints(
            (2, 2),
            &[MatrixConstraint::left(
                a.matmul(&a),
                a.matmul(&pinv(&a, &tol())),
            )],
            &tol(),
        )
        .unwrap();
        assert!(ypart.feasible);
        assert!(close(&a.matmul(&ypart.solution), &c.value));
        assert!(close(
            &core(&invertible(), &tol()).unwrap().value,
            &pinv(&invertible(), &tol())
        ));
        assert!(!core(&shift(2), &tol()).unwrap().exists);
    }

    #[test]
    fn core_ep_examples() {
        let c = core_ep(&invertible(), &tol()).unwrap();
        assert!(close(&c.value, &pinv(&invertible(), &tol())));
        assert!(c.verified(&tol()));
        let c = core_ep(&shift(3), &tol()).unwrap();
        assert_eq!(c.value, CMatrix::zeros(3, 3));
        let a = CMatrix::block_diag(&[&CMatrix::diag_real(&[2.0]), &shift(2)]);
        let c = core_ep(&a, &tol()).unwrap();
        let expected = CMatrix::block_diag(&[&CMatrix::diag_real(&[0.5]), &CMatrix::zeros(2, 2)]);
        assert!(close(&c.value, &expected));
        assert!(c.verified(&tol()), "{:?}", c.failing(&tol()));
        // Oracle: X = A^k Y with A·A^k·Y = A^k (A^k)†.
        let ak = a.power(2).unwrap();
        let sys = [MatrixConstraint::left(
            a.matmul(&ak),
            ak.matmul(&pinv(&ak, &tol())),
        )];
        let y = solve_constraints((3, 3), &sys, &tol()).unwrap();
        assert!(y.feasible);
        assert!(close(&ak.matmul(&y.solution), &expected));
    }

    #[test]
    fn spectral_projection_examples() {
        assert!(
            spectral_projection(&invertible(), &tol())
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
        assert_eq!(
            spectral_projection(&shift(3), &tol()).unwrap(),
            CMatrix::identity(3)
        );
        let p = spectral_projection(&three_plus_j2(), &tol()).unwrap();
        let expected = CMatrix::block_diag(&[&CMatrix::zeros(1, 1), &CMatrix::identity(2)]);
        assert!(close(&p, &expected));
    }

    fn jordan_like(core: &[f64], nil: usize) -> CMatrix {
        let c = CMatrix::from_fn(core.len(), core.len(), |i, j| {
            if i == j {
                C64::new(core[i], 0.5 * core[i])
            } else if j == i + 1 {
                C64::new(0.25, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        similar(&CMatrix::block_diag(&[&c, &shift(nil)]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn drazin_commutes_and_is_outer_inverse(
            core in proptest::collection::vec(prop_oneof![0.8f64..2.0, -2.0f64..-0.8], 1..5),
            nil in 0usize..4,
        ) {
            let a = jordan_like(&core, nil);
            let t = tol();
            prop_assert_eq!(index(&a, &t).unwrap(), nil);
            let d = drazin(&a, &t).unwrap();
            prop_assert!(d.verified(&t), "{:?}", d.failing(&t));
            let p = spectral_projection(&a, &t).unwrap();
            prop_assert!(p.matmul(&p).approx_eq(&p, &t));
            prop_assert!(p.matmul(&a).approx_eq(&a.matmul(&p), &t));
            prop_assert!(p.matmul(&a).is_nilpotent(&t).unwrap());
        }

        #[test]
        fn core_ep_extends_core(
            core_diag in proptest::collection::vec(prop_oneof![0.8f64..2.0, -2.0f64..-0.8], 1..5),
            nil in 0usize..2,
        ) {
            let a = jordan_like(&core_diag, nil);
            let t = tol();
            let c = core(&a, &t).unwrap();
            let e = core_ep(&a, &t).unwrap();
            prop_assert!(c.verified(&t), "{:?}", c.failing(&t));
            prop_assert!(e.verified(&t), "{:?}", e.failing(&t));
            prop_assert!(c.value.approx_eq(&e.value, &t));
        }

        #[test]
        fn core_ep_satisfies_unit_weight_definition(
            core_diag in proptest::collection::vec(0.8f64..2.0, 0..4),
            nil in 1usize..4,
        ) {
            let a = jordan_like(&core_diag, nil);
            let t = tol();
            let x = core_ep(&a, &t).unwrap().value;
            let k = index(&a, &t).unwrap() as u32;
            let ak = a.power(k).unwrap();
            prop_assert!(a.matmul(&x).matmul(&x).approx_eq(&x, &t));
            let ax = a.matmul(&x);
            prop_assert!(ax.adjoint().approx_eq(&ax, &t));
            prop_assert!(x.matmul(&ak).matmul(&a).approx_eq(&ak, &t));
        }
    }
}
