//! Minimum-norm real least squares via a complete orthogonal decomposition.
//!
//! `A P = Q [R11 R12; 0 0]` by Householder QR with column pivoting, then
//! `[R11 R12] = [S^T 0] Z^T` by a second (unpivoted) QR of the transpose.
//! The minimum-norm solution is `x = P Z [S^{-T} (Q^T b)₁; 0]`.

/// Dense real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

struct Reflector {
    /// Householder vector on rows `start..`.
    v: Vec<f64>,
    beta: f64,
    start: usize,
}

impl Reflector {
    /// Builds `H = I − β v vᵀ` mapping `x` onto `α e₁`; returns `(H, α)`.
    fn new(x: &[f64], start: usize) -> (Self, f64) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.to_vec();
        if norm == 0.0 {
            return (
                Self {
                    v,
                    beta: 0.0,
                    start,
                },
                0.0,
            );
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
        (Self { v, beta, start }, alpha)
    }

    #[inline]
    fn apply(&self, y: &mut [f64]) {
        if self.beta == 0.0 {
            return;
        }
        let tail = &mut y[self.start..self.start + self.v.len()];
        let s: f64 = self.v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
        let s = s * self.beta;
        for (t, a) in tail.iter_mut().zip(&self.v) {
            *t -= s * a;
        }
    }
}

/// Solves `min ‖X‖_F` over all minimizers of `‖A X − B‖_F`, one column of
/// `B` at a time but with a single factorization. Pivots whose magnitude is
/// at or below `rank_rtol` times the first pivot are treated as zero.
pub(crate) fn min_norm_solve(a: &RealMatrix, b: &RealMatrix, rank_rtol: f64) -> RealMatrix {
    assert_eq!(a.rows, b.rows, "lstsq: row mismatch");
    let (m, n) = (a.rows, a.cols);
    let nrhs = b.cols;
    let mut r = a.clone();
    let mut rhs = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);

    let mut rank = 0;
    let mut first_pivot = 0.0;
    for j in 0..steps {
        // Column pivoting on exact trailing norms.
        let mut best = j;
        let mut best_norm = -1.0;
        for k in j..n {
            let nk: f64 = r.col(k)[j..].iter().map(|v| v * v).sum();
            if nk > best_norm {
                best_norm = nk;
                best = k;
            }
        }
        let pivot = best_norm.sqrt();
        if j == 0 {
            first_pivot = pivot;
        }
        if pivot == 0.0 || pivot <= rank_rtol * first_pivot {
            break;
        }
        if best != j {
            perm.swap(j, best);
            for i in 0..m {
                r.data.swap(j * m + i, best * m + i);
            }
        }
        let (h, alpha) = Reflector::new(&r.col(j)[j..], j);
        {
            let c = r.col_mut(j);
            c[j] = alpha;
            for v in &mut c[j + 1..] {
                *v = 0.0;
            }
        }
        for k in j + 1..n {
            h.apply(r.col_mut(k));
        }
        for k in 0..nrhs {
            h.apply(rhs.col_mut(k));
        }
        rank += 1;
    }

    let mut x = RealMatrix::zeros(n, nrhs);
    if rank == 0 {
        return x;
    }

    // T = [R11 R12]^T is n × rank; factor T = Z [S; 0].
    let mut t = RealMatrix::zeros(n, rank);
    for i in 0..rank {
        for j in i..n {
            *t.at(j, i) = r.get(i, j);
        }
    }
    let mut z_reflectors = Vec::with_capacity(rank);
    for j in 0..rank {
        let (h, alpha) = Reflector::new(&t.col(j)[j..], j);
        {
            let c = t.col_mut(j);
            c[j] = alpha;
            for v in &mut c[j + 1..] {
                *v = 0.0;
            }
        }
        for k in j + 1..rank {
            h.apply(t.col_mut(k));
        }
        z_reflectors.push(h);
    }
    // Now S = t[0..rank, 0..rank] (upper triangular), and [R11 R12] = Sᵀ Zᵀ.
    for k in 0..nrhs {
        // Forward substitution Sᵀ w = c₁.
        let c = rhs.col(k);
        let mut w = vec![0.0; n];
        for i in 0..rank {
            let mut acc = c[i];
            for (p, wp) in w.iter().enumerate().take(i) {
                acc -= t.get(p, i) * wp;
            }
            w[i] = acc / t.get(i, i);
        }
        for h in z_reflectors.iter().rev() {
            h.apply(&mut w);
        }
        let xc = x.col_mut(k);
        for (i, &p) in perm.iter().enumerate() {
            xc[p] = w[i];
        }
    }
    x
}
