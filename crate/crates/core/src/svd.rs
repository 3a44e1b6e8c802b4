//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! This is the crate's single rank-revealing factorization. Column pairs are
//! swept in fixed cyclic order, so results are bit-for-bit deterministic for
//! fixed input. Jacobi is slower than bidiagonal QR but accurate in the small
//! singular values, and rank decisions depend on exactly those.

use crate::error::Result;
use crate::matrix::{CMatrix, C64, ZERO};
use crate::tolerance::ToleranceConfig;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U · diag(s) · V^*` with `s` sorted descending.
///
/// `u` is `m × r` and `v` is `n × r` with `r = min(m, n)`. Columns of `u`
/// belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `rank_rtol · σ_max`.
    pub fn rank(&self, tol: &ToleranceConfig) -> usize {
        self.rank_at(tol.rank_rtol * self.sigma_max())
    }

    pub(crate) fn rank_at(&self, threshold: f64) -> usize {
        self.s.iter().take_while(|&&s| s > threshold).count()
    }
}

pub fn svd(a: &CMatrix) -> Svd {
    if a.rows() >= a.cols() {
        jacobi(a)
    } else {
        let Svd { u, s, v } = jacobi(&a.adjoint());
        Svd { u: v, s, v: u }
    }
}

/// Jacobi iteration for `m ≥ n`. Works on column-major copies so the inner
/// loops stream contiguous memory.
fn jacobi(a: &CMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)]).collect())
        .collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| sq_norm(c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], phase, c, s);
                let (lo, hi) = vcols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], phase, c, s);
                // Recompute rather than update, so rounding cannot drift.
                norms[p] = sq_norm(&cols[p]);
                norms[q] = sq_norm(&cols[q]);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]).then(i.cmp(&j)));

    let mut u = CMatrix::zeros(m, n);
    let mut v = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sj = sig[j];
        s.push(sj);
        if sj > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sj;
            }
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Svd { u, s, v }
}

#[inline]
fn sq_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `x^* y`
#[inline]
fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// `(x, y) ← (c·x − s·φy, s·x + c·φy)`
#[inline]
fn rotate(x: &mut [C64], y: &mut [C64], phase: C64, c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = phase * *yi;
        *xi = a * c - b * s;
        *yi = a * s + b * c;
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).s
}

/// Numerical rank: singular values above `rank_rtol · σ_max`.
pub fn rank(a: &CMatrix, tol: &ToleranceConfig) -> usize {
    svd(a).rank(tol)
}

/// Rank of the column space spanned by several blocks side by side. Each
/// nonzero block is first scaled to unit Frobenius norm (ranges are unchanged
/// by scaling) so a large block cannot hide a small one below the threshold.
pub fn column_space_rank(blocks: &[&CMatrix], tol: &ToleranceConfig) -> Result<usize> {
    let scaled: Vec<CMatrix> = blocks
        .iter()
        .map(|b| {
            let f = b.frobenius_norm();
            if f > 0.0 {
                b.scale_real(1.0 / f)
            } else {
                (*b).clone()
            }
        })
        .collect();
    let refs: Vec<&CMatrix> = scaled.iter().collect();
    Ok(rank(&CMatrix::hcat(&refs)?, tol))
}

/// Moore–Penrose inverse, discarding singular values at or below
/// `rank_rtol · σ_max`.
pub fn pinv(a: &CMatrix, tol: &ToleranceConfig) -> CMatrix {
    let f = svd(a);
    let keep = f.rank(tol);
    assemble_pinv(a, &f, keep)
}

/// Pseudoinverse keeping exactly the `keep` largest singular values, for
/// callers that already know the rank.
pub(crate) fn pinv_truncated(a: &CMatrix, keep: usize) -> CMatrix {
    let f = svd(a);
    let keep = keep.min(f.s.iter().take_while(|&&s| s > 0.0).count());
    assemble_pinv(a, &f, keep)
}

fn assemble_pinv(a: &CMatrix, f: &Svd, keep: usize) -> CMatrix {
    let (m, n) = (a.rows(), a.cols());
    let mut out = CMatrix::zeros(n, m);
    for k in 0..keep {
        let inv = 1.0 / f.s[k];
        for i in 0..n {
            let vik = f.v[(i, k)] * inv;
            for j in 0..m {
                out[(i, j)] += vik * f.u[(j, k)].conj();
            }
        }
    }
    out
}

pub fn min_singular_value(a: &CMatrix) -> Result<f64> {
    a.ensure_square()?;
    Ok(svd(a).s.last().copied().unwrap_or(0.0))
}

/// Invertibility certificate: `σ_min > rank_rtol · σ_max`.
pub fn is_invertible(a: &CMatrix, tol: &ToleranceConfig) -> Result<bool> {
    let n = a.ensure_square()?;
    Ok(svd(a).rank(tol) == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn sample(m: usize, n: usize, salt: f64) -> CMatrix {
        CMatrix::from_fn(m, n, |i, j| {
            let x = (i as f64 + 1.3 * j as f64 + salt).sin();
            let y = (0.7 * i as f64 - j as f64 * salt).cos();
            C64::new(x, 0.5 * y)
        })
    }

    #[test]
    fn ranks_of_simple_matrices() {
        assert_eq!(rank(&CMatrix::identity(4), &tol()), 4);
        assert_eq!(rank(&CMatrix::zeros(3, 3), &tol()), 0);
        assert_eq!(
            rank(&CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 0.0]]), &tol()),
            1
        );
    }

    #[test]
    fn min_singular_values() {
        assert!((min_singular_value(&CMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(min_singular_value(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = CMatrix::diag_real(&[3.0, 0.5]);
        assert!((min_singular_value(&d).unwrap() - 0.5).abs() < 1e-15);
        assert!(min_singular_value(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn reconstructs_rectangular_input() {
        for (m, n) in [(5, 3), (3, 5), (4, 4)] {
            let a = sample(m, n, 0.37);
            let f = svd(&a);
            let us = CMatrix::from_fn(m, f.s.len(), |i, k| f.u[(i, k)] * f.s[k]);
            let back = us.matmul(&f.v.adjoint());
            assert!(back.distance(&a) < 1e-13 * a.frobenius_norm(), "{m}x{n}");
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn pinv_of_rank_one_example() {
        let a = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let expected = CMatrix::from_real(&[&[0.5, 0.0], &[0.5, 0.0]]);
        assert!(pinv(&a, &tol()).distance(&expected) < 1e-15);
    }

    #[test]
    fn pinv_of_invertible_is_inverse_and_of_zero_is_zero() {
        let a = CMatrix::from_real(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let inv = CMatrix::from_real(&[&[1.0, -1.0], &[-1.0, 2.0]]);
        assert!(pinv(&a, &tol()).distance(&inv) < 1e-14);
        assert_eq!(pinv(&CMatrix::zeros(3, 3), &tol()), CMatrix::zeros(3, 3));
    }

    #[test]
    fn penrose_equations_hold_for_rank_deficient_complex() {
        let b = sample(4, 2, 1.1);
        let c = sample(2, 4, -0.4);
        let a = b.matmul(&c);
        let x = pinv(&a, &tol());
        let t = tol();
        assert!(a.matmul(&x).matmul(&a).approx_eq(&a, &t));
        assert!(x.matmul(&a).matmul(&x).approx_eq(&x, &t));
        let ax = a.matmul(&x);
        assert!(ax.adjoint().approx_eq(&ax, &t));
        let xa = x.matmul(&a);
        assert!(xa.adjoint().approx_eq(&xa, &t));
        assert_eq!(rank(&a, &t), 2);
    }

    #[test]
    fn deterministic_for_fixed_bits() {
        let a = sample(6, 6, 2.5);
        let (f, g) = (svd(&a), svd(&a));
        assert_eq!(f.s, g.s);
        assert_eq!(f.u, g.u);
    }
}
