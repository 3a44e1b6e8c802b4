//! Brute-force oracle for linear matrix equations.
//!
//! A system of constraints on one unknown `X` (shape `rows × cols`) is
//! vectorized through `vec(L X R) = (Rᵀ ⊗ L) vec(X)` (column-major `vec`),
//! split into real and imaginary parts, stacked into one real system and
//! solved for the minimum-norm least-squares `X`.
//!
//! Two kinds of constraint exist:
//! * affine: `Σ Lᵢ X Rᵢ = C`;
//! * hermitian: `E(X) = Σ Lᵢ X Rᵢ` satisfies `E(X)* = E(X)`. This is only
//!   real-linear in `X` (it involves `conj(X)`), which is why the stacked
//!   system is real.
//!
//! When every term is a plain left multiplication (`Rᵢ = I`), the Kronecker
//! matrix is block diagonal with identical blocks. The solver then factors
//! one block and solves all columns of `X` against it. The minimum-norm
//! solution is the same; only the work changes.

use crate::error::{Error, Result};
use crate::lstsq::{min_norm_solve, RealMatrix};
use crate::matrix::{CMatrix, C64, ONE, ZERO};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Affine,
    Hermitian,
}

#[derive(Debug, Clone)]
pub struct MatrixConstraint {
    pub kind: ConstraintKind,
    /// `(left, right)` coefficient pairs, each contributing `left · X · right`.
    pub terms: Vec<(CMatrix, CMatrix)>,
    /// Right-hand side; present exactly for affine constraints.
    pub target: Option<CMatrix>,
}

impl MatrixConstraint {
    pub fn affine(terms: Vec<(CMatrix, CMatrix)>, target: CMatrix) -> Self {
        Self {
            kind: ConstraintKind::Affine,
            terms,
            target: Some(target),
        }
    }

    /// `left · X · right = target`
    pub fn single(left: CMatrix, right: CMatrix, target: CMatrix) -> Self {
        Self::affine(vec![(left, right)], target)
    }

    /// `left · X = target`
    pub fn left(left: CMatrix, target: CMatrix) -> Self {
        let n = target.cols();
        Self::affine(vec![(left, CMatrix::identity(n))], target)
    }

    /// `(Σ Lᵢ X Rᵢ)* = Σ Lᵢ X Rᵢ`
    pub fn hermitian(terms: Vec<(CMatrix, CMatrix)>) -> Self {
        Self {
            kind: ConstraintKind::Hermitian,
            terms,
            target: None,
        }
    }

    /// `(left · X)* = left · X`
    pub fn hermitian_left(left: CMatrix, x_cols: usize) -> Self {
        Self::hermitian(vec![(left, CMatrix::identity(x_cols))])
    }

    /// Output shape `(p, q)` of the constraint expression, checked against
    /// the unknown's shape.
    fn output_shape(&self, shape: (usize, usize)) -> Result<(usize, usize)> {
        let (r, c) = shape;
        let mut out: Option<(usize, usize)> = None;
        if self.terms.is_empty() {
            return Err(Error::DimensionMismatch("constraint has no terms".into()));
        }
        for (l, rt) in &self.terms {
            if l.cols() != r || rt.rows() != c {
                return Err(Error::DimensionMismatch(format!(
                    "term {}x{} · X({r}x{c}) · {}x{} is not conformable",
                    l.rows(),
                    l.cols(),
                    rt.rows(),
                    rt.cols()
                )));
            }
            let s = (l.rows(), rt.cols());
            if *out.get_or_insert(s) != s {
                return Err(Error::DimensionMismatch(
                    "terms produce different shapes".into(),
                ));
            }
        }
        let s = out.expect("nonempty");
        match (self.kind, &self.target) {
            (ConstraintKind::Affine, Some(t)) if (t.rows(), t.cols()) == s => Ok(s),
            (ConstraintKind::Affine, Some(t)) => Err(Error::DimensionMismatch(format!(
                "target is {}x{}, expression is {}x{}",
                t.rows(),
                t.cols(),
                s.0,
                s.1
            ))),
            (ConstraintKind::Affine, None) => Err(Error::DimensionMismatch(
                "affine constraint without target".into(),
            )),
            (ConstraintKind::Hermitian, None) if s.0 == s.1 => Ok(s),
            (ConstraintKind::Hermitian, None) => Err(Error::DimensionMismatch(
                "hermitian constraint on a non-square expression".into(),
            )),
            (ConstraintKind::Hermitian, Some(_)) => Err(Error::DimensionMismatch(
                "hermitian constraint must not carry a target".into(),
            )),
        }
    }

    fn expression(&self, x: &CMatrix) -> CMatrix {
        let mut acc: Option<CMatrix> = None;
        for (l, r) in &self.terms {
            let t = l.matmul(x).matmul(r);
            acc = Some(match acc {
                Some(a) => a + t,
                None => t,
            });
        }
        acc.expect("nonempty")
    }

    /// The constraint violation at `x`: `Σ Lᵢ X Rᵢ − C` or `E − E*`.
    pub fn violation(&self, x: &CMatrix) -> CMatrix {
        let e = self.expression(x);
        match self.kind {
            ConstraintKind::Affine => e - self.target.as_ref().expect("validated"),
            ConstraintKind::Hermitian => {
                let ea = e.adjoint();
                e - ea
            }
        }
    }

    fn max_input_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (l, r) in &self.terms {
            m = m.max(l.frobenius_norm()).max(r.frobenius_norm());
        }
        if let Some(t) = &self.target {
            m = m.max(t.frobenius_norm());
        }
        m
    }

    fn is_left_only(&self) -> bool {
        self.kind == ConstraintKind::Affine && self.terms.iter().all(|(_, r)| is_exact_identity(r))
    }
}

fn is_exact_identity(m: &CMatrix) -> bool {
    m.is_square()
        && (0..m.rows())
            .all(|i| (0..m.cols()).all(|j| m[(i, j)] == if i == j { ONE } else { ZERO }))
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: CMatrix,
    /// Frobenius norm of the stacked violations at `solution`, evaluated
    /// directly from the matrix expressions.
    pub residual: f64,
    pub feasible: bool,
}

/// Exact stacked residual of `x` against `constraints`.
pub fn stacked_residual(constraints: &[MatrixConstraint], x: &CMatrix) -> f64 {
    constraints
        .iter()
        .map(|c| c.violation(x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Feasibility rule shared with [`solve_constraints`]:
/// `residual ≤ eq_atol + eq_rtol · (max input Frobenius norm)`.
pub fn feasibility_bound(constraints: &[MatrixConstraint], tol: &ToleranceConfig) -> f64 {
    let scale = constraints
        .iter()
        .map(MatrixConstraint::max_input_norm)
        .fold(0.0, f64::max);
    tol.bound(scale)
}

pub fn solve_constraints(
    shape: (usize, usize),
    constraints: &[MatrixConstraint],
    tol: &ToleranceConfig,
) -> Result<SolveResult> {
    if constraints.is_empty() {
        return Err(Error::NoConstraints);
    }
    let (r, c) = shape;
    if r == 0 || c == 0 {
        return Err(Error::Empty);
    }
    let out_shapes = constraints
        .iter()
        .map(|k| k.output_shape(shape))
        .collect::<Result<Vec<_>>>()?;

    let solution = if constraints.iter().all(MatrixConstraint::is_left_only) {
        solve_left_only(shape, constraints, tol)
    } else {
        solve_general(shape, constraints, &out_shapes, tol)
    };
    let residual = stacked_residual(constraints, &solution);
    let feasible = residual <= feasibility_bound(constraints, tol);
    Ok(SolveResult {
        solution,
        residual,
        feasible,
    })
}

/// Stacked `G X = H` with `G = [Σ L for each constraint]`, solved column by
/// column against the real form `[[Re G, −Im G], [Im G, Re G]]`.
fn solve_left_only(
    shape: (usize, usize),
    constraints: &[MatrixConstraint],
    tol: &ToleranceConfig,
) -> CMatrix {
    let (r, c) = shape;
    let p_total: usize = constraints.iter().map(|k| k.terms[0].0.rows()).sum();
    let mut a = RealMatrix::zeros(2 * p_total, 2 * r);
    let mut b = RealMatrix::zeros(2 * p_total, c);
    let mut row0 = 0;
    for k in constraints {
        let p = k.terms[0].0.rows();
        let target = k.target.as_ref().expect("validated");
        for (l, _) in &k.terms {
            for i in 0..p {
                for j in 0..r {
                    let g = l[(i, j)];
                    *a.at(row0 + i, j) += g.re;
                    *a.at(row0 + i, r + j) -= g.im;
                    *a.at(p_total + row0 + i, j) += g.im;
                    *a.at(p_total + row0 + i, r + j) += g.re;
                }
            }
        }
        for i in 0..p {
            for j in 0..c {
                let h = target[(i, j)];
                *b.at(row0 + i, j) = h.re;
                *b.at(p_total + row0 + i, j) = h.im;
            }
        }
        row0 += p;
    }
    let x = min_norm_solve(&a, &b, tol.rank_rtol);
    CMatrix::from_fn(r, c, |i, j| C64::new(x.get(i, j), x.get(r + i, j)))
}

fn solve_general(
    shape: (usize, usize),
    constraints: &[MatrixConstraint],
    out_shapes: &[(usize, usize)],
    tol: &ToleranceConfig,
) -> CMatrix {
    let (r, c) = shape;
    let nv = r * c;
    let total_eq: usize = out_shapes.iter().map(|(p, q)| p * q).sum();
    let mut a = RealMatrix::zeros(2 * total_eq, 2 * nv);
    let mut b = RealMatrix::zeros(2 * total_eq, 1);

    let mut eq0 = 0;
    for (k, &(p, q)) in constraints.iter().zip(out_shapes) {
        let neq = p * q;
        // Complex coefficient blocks: `direct` acts on vec(X), `mirrored` on
        // conj(vec(X)).
        let mut direct = vec![ZERO; neq * nv];
        let mut mirrored = vec![ZERO; neq * nv];
        for (l, rt) in &k.terms {
            // vec(L X R)[i + p j] = Σ_{k,l} L[i,k] R[l,j] X[k,l]
            for j in 0..q {
                for i in 0..p {
                    let row = (i + p * j) * nv;
                    for ll in 0..c {
                        let rl = rt[(ll, j)];
                        if rl == ZERO {
                            continue;
                        }
                        for kk in 0..r {
                            direct[row + kk + r * ll] += l[(i, kk)] * rl;
                        }
                    }
                }
            }
            if k.kind == ConstraintKind::Hermitian {
                // E*[i,j] = conj(E[j,i]) = Σ conj(L[j,k] R[l,i]) conj(X[k,l])
                for j in 0..q {
                    for i in 0..p {
                        let row = (i + p * j) * nv;
                        for ll in 0..c {
                            let rl = rt[(ll, i)];
                            if rl == ZERO {
                                continue;
                            }
                            for kk in 0..r {
                                mirrored[row + kk + r * ll] += (l[(j, kk)] * rl).conj();
                            }
                        }
                    }
                }
            }
        }
        // Real rows for `direct·v − mirrored·conj(v)`, v = a + i b:
        //   Re: (Re D − Re M) a + (−Im D − Im M) b
        //   Im: (Im D − Im M) a + (Re D + Re M) b
        for e in 0..neq {
            let re_row = eq0 + e;
            let im_row = total_eq + eq0 + e;
            for v in 0..nv {
                let d = direct[e * nv + v];
                let m = mirrored[e * nv + v];
                *a.at(re_row, v) = d.re - m.re;
                *a.at(re_row, nv + v) = -d.im - m.im;
                *a.at(im_row, v) = d.im - m.im;
                *a.at(im_row, nv + v) = d.re + m.re;
            }
        }
        if let Some(t) = &k.target {
            for j in 0..q {
                for i in 0..p {
                    let z = t[(i, j)];
                    *b.at(eq0 + i + p * j, 0) = z.re;
                    *b.at(total_eq + eq0 + i + p * j, 0) = z.im;
                }
            }
        }
        eq0 += neq;
    }

    let x = min_norm_solve(&a, &b, tol.rank_rtol);
    // Unknown layout: [Re vec X; Im vec X], vec column-major.
    CMatrix::from_fn(r, c, |i, j| {
        C64::new(x.get(i + r * j, 0), x.get(nv + i + r * j, 0))
    })
}
