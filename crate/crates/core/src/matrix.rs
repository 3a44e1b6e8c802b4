//! Dense complex matrices.
//!
//! `CMatrix` stores entries row-major. Sizes in this crate are desk scale
//! (n ≤ 16), so products are plain triple loops ordered for row access.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, enforcing the type invariants.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    /// Convenience for real test fixtures. Panics on ragged or empty input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(r > 0 && c > 0, "empty matrix literal");
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix literal");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(
            &entries
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Block-diagonal matrix; empty blocks (size 0) are skipped.
    pub fn block_diag(blocks: &[&CMatrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn from_blocks(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> Result<Self> {
        let n = a.rows;
        for blk in [a, b, c, d] {
            if blk.rows != n || blk.cols != n {
                return Err(Error::DimensionMismatch(
                    "2x2 blocks must share one square size".into(),
                ));
            }
        }
        let mut m = Self::zeros(2 * n, 2 * n);
        m.set_block(0, 0, a);
        m.set_block(0, n, b);
        m.set_block(n, 0, c);
        m.set_block(n, n, d);
        Ok(m)
    }

    /// Horizontal concatenation `[m₁ | m₂ | …]`.
    pub fn hcat(blocks: &[&CMatrix]) -> Result<Self> {
        let r = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != r) {
            return Err(Error::DimensionMismatch(
                "hcat needs equal row counts".into(),
            ));
        }
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let mut c0 = 0;
        for b in blocks {
            m.set_block(0, c0, b);
            c0 += b.cols;
        }
        Ok(m)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            let src = i * block.cols;
            self.data[dst..dst + block.cols].copy_from_slice(&block.data[src..src + block.cols]);
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `‖self − other‖_F`; panics on shape mismatch.
    pub fn distance(&self, other: &CMatrix) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "distance: shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// The crate-wide equality rule:
    /// `‖X − Y‖_F ≤ eq_atol + eq_rtol · max(‖X‖_F, ‖Y‖_F)`.
    pub fn approx_eq(&self, other: &CMatrix, tol: &ToleranceConfig) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        tol.accepts(self.distance(other), scale)
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; m * n];
        for i in 0..m {
            let orow = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[p * n..(p + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMatrix {
            rows: m,
            cols: n,
            data: out,
        }
    }

    /// Product of a chain of matrices, left to right.
    pub fn product(factors: &[&CMatrix]) -> CMatrix {
        let (first, rest) = factors.split_first().expect("product of an empty chain");
        rest.iter().fold((*first).clone(), |acc, f| acc.matmul(f))
    }

    /// `A^k` by repeated squaring, with `A^0 = I`.
    pub fn power(&self, k: u32) -> Result<CMatrix> {
        let n = self.ensure_square()?;
        let mut result = CMatrix::identity(n);
        let mut base = self.clone();
        let mut e = k;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first {
                    base.clone()
                } else {
                    result.matmul(&base)
                };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        Ok(result)
    }

    /// Nilpotency test used wherever the algebra asks for a quasinilpotent
    /// element: `A` is declared nilpotent when
    /// `‖A^n‖_F ≤ eq_atol + eq_rtol · max(1, ‖A‖_F)^n`.
    ///
    /// The witness is the smallest `k ≤ n` for which the same bound (with
    /// exponent `k`) holds for `A^k`, or `n + 1` when none does.
    pub fn nilpotency(&self, tol: &ToleranceConfig) -> Result<Nilpotency> {
        let n = self.ensure_square()?;
        let base = self.frobenius_norm().max(1.0);
        let mut p = self.clone();
        let mut witness = None;
        let mut residual = 0.0;
        let mut scale = 1.0;
        for k in 1..=n {
            if k > 1 {
                p = p.matmul(self);
            }
            let norm = p.frobenius_norm();
            let s = base.powi(k as i32);
            if witness.is_none() && tol.accepts(norm, s) {
                witness = Some(k);
            }
            if k == n {
                residual = norm;
                scale = s;
            }
        }
        let nilpotent = tol.accepts(residual, scale);
        Ok(Nilpotency {
            nilpotent,
            witness: witness.unwrap_or(n + 1),
            residual,
            scale,
        })
    }

    pub fn is_nilpotent(&self, tol: &ToleranceConfig) -> Result<bool> {
        Ok(self.nilpotency(tol)?.nilpotent)
    }
}

/// Outcome of [`CMatrix::nilpotency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nilpotency {
    pub nilpotent: bool,
    pub witness: usize,
    /// `‖A^n‖_F`.
    pub residual: f64,
    /// `max(1, ‖A‖_F)^n`, the scale the residual was judged against.
    pub scale: f64,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul<CMatrix> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: CMatrix) -> CMatrix {
        self.matmul(&rhs)
    }
}

impl Mul<&CMatrix> for CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: CMatrix) -> CMatrix {
        self.matmul(&rhs)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add: shape mismatch"
        );
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub: shape mismatch"
        );
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add<&CMatrix> for CMatrix {
    type Output = CMatrix;

    fn add(mut self, rhs: &CMatrix) -> CMatrix {
        self += rhs;
        self
    }
}

impl Add for CMatrix {
    type Output = CMatrix;

    fn add(mut self, rhs: CMatrix) -> CMatrix {
        self += &rhs;
        self
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub<&CMatrix> for CMatrix {
    type Output = CMatrix;

    fn sub(mut self, rhs: &CMatrix) -> CMatrix {
        self -= rhs;
        self
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;

    fn sub(mut self, rhs: CMatrix) -> CMatrix {
        self -= &rhs;
        self
    }
}

impl Sub<CMatrix> for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: CMatrix) -> CMatrix {
        let mut out = self.clone();
        out -= &rhs;
        out
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>11.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjoint_conjugates_diagonal() {
        let a = CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)]);
        assert_eq!(a.adjoint(), CMatrix::diag(&[c(0.0, -1.0), c(1.0, 0.0)]));
    }

    #[test]
    fn adjoint_transposes_real() {
        let a = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(a.adjoint(), CMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]));
    }

    #[test]
    fn power_zero_is_identity_and_shift_squares_to_zero() {
        let n = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(n.power(0).unwrap(), CMatrix::identity(2));
        assert_eq!(n.power(2).unwrap(), CMatrix::zeros(2, 2));
        assert_eq!(n.power(1).unwrap(), n);
    }

    #[test]
    fn power_rejects_rectangular() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(
            a.power(2),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            c((i + 2 * j) as f64 * 0.3 - 0.7, (i as f64) - 0.5 * j as f64)
        });
        let p3 = a.power(3).unwrap();
        let direct = &(&a * &a) * &a;
        assert!(p3.distance(&direct) <= 1e-12 * direct.frobenius_norm());
        let p7 = a.power(7).unwrap();
        let split = a.power(3).unwrap() * a.power(4).unwrap();
        assert!(p7.distance(&split) <= 1e-12 * p7.frobenius_norm());
    }

    #[test]
    fn from_vec_enforces_invariants() {
        assert!(matches!(CMatrix::from_vec(0, 1, vec![]), Err(Error::Empty)));
        assert!(CMatrix::from_vec(2, 2, vec![ONE; 3]).is_err());
        assert!(matches!(
            CMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn strictly_upper_triangular_is_nilpotent() {
        let tol = ToleranceConfig::default();
        let a = CMatrix::from_real(&[&[0.0, 2.0, -1.0], &[0.0, 0.0, 3.0], &[0.0, 0.0, 0.0]]);
        let nil = a.nilpotency(&tol).unwrap();
        assert!(nil.nilpotent);
        assert!(nil.witness <= 3);
        assert!(!CMatrix::identity(3).is_nilpotent(&tol).unwrap());
    }

    #[test]
    fn truncated_weighted_shift_is_nilpotent() {
        // 8×8 section of x ↦ (x₂/3, x₃/4, …): superdiagonal 1/3, …, 1/9.
        let tol = ToleranceConfig::default();
        let mut d = CMatrix::zeros(8, 8);
        for i in 0..7 {
            d[(i, i + 1)] = c(1.0 / (i as f64 + 3.0), 0.0);
        }
        let nil = d.nilpotency(&tol).unwrap();
        assert!(nil.nilpotent);
        assert_eq!(nil.witness, 8);
    }

    #[test]
    fn blocks_and_hcat_place_entries() {
        let a = CMatrix::identity(2);
        let z = CMatrix::zeros(2, 2);
        let m = CMatrix::from_blocks(&a, &a, &z, &a.scale_real(2.0)).unwrap();
        assert_eq!(m[(0, 2)], ONE);
        assert_eq!(m[(3, 3)], c(2.0, 0.0));
        assert_eq!(m.block(2, 2, 2, 2), a.scale_real(2.0));
        let h = CMatrix::hcat(&[&a, &z]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
    }
}
