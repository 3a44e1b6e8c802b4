//! Random weighted pairs with a prescribed index of `WA`.
//!
//! A pair is assembled from explicit factors so that no matrix is ever
//! inverted numerically:
//!
//! * `J = diag(C, J_t(0))` where `C = U₁·diag(s)·U₂` has singular values in
//!   `[1, 1.5]` (so powers of `C` stay well conditioned) and `J_t(0)` is the
//!   nilpotent shift of size `t = target_index`;
//! * `Q = U·diag(q)·V*` with `q ∈ [1, 2]`, whose inverse `V·diag(1/q)·U*` is
//!   exact up to rounding.
//!
//! Weight modes:
//!
//! * identity: `W = I`, `A = Q·J·Q⁻¹`;
//! * invertible: random `W` with singular values in `[1, 2]`, `A = W⁻¹·Q·J·Q⁻¹`;
//! * singular: `W = Q·diag(W_c, S_w)·P⁻¹` and `A = P·diag(W_c⁻¹·C, S_a)·Q⁻¹`
//!   with `S_w` upper triangular with a zero on its diagonal and `S_a`
//!   strictly upper triangular. Then `WA = Q·diag(C, S_w·S_a)·Q⁻¹`; the
//!   nilpotent corner has size `max(t, 1)` but its index is whatever the
//!   random triangular factors give.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};
use crate::svd::svd;
use crate::tolerance::ToleranceConfig;
use crate::weighted::WeightedPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    Identity,
    RandomInvertible,
    RandomSingular,
}

impl WeightMode {
    pub const ALL: [WeightMode; 3] = [Self::Identity, Self::RandomInvertible, Self::RandomSingular];

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::RandomInvertible => "random_invertible",
            Self::RandomSingular => "random_singular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('_', "-") == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub target_index: usize,
    pub weight_mode: WeightMode,
    pub seed: u64,
    /// Upper bound on the condition number of every random factor.
    pub condition_cap: f64,
}

impl GeneratorSpec {
    pub const DEFAULT_CONDITION_CAP: f64 = 100.0;

    pub fn new(n: usize, target_index: usize, weight_mode: WeightMode, seed: u64) -> Self {
        Self {
            n,
            target_index,
            weight_mode,
            seed,
            condition_cap: Self::DEFAULT_CONDITION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        if self.target_index > self.n {
            return Err(Error::InvalidSpec(format!(
                "index {} exceeds n = {}",
                self.target_index, self.n
            )));
        }
        if self.condition_cap.is_nan() || self.condition_cap < 1.0 {
            return Err(Error::InvalidSpec(
                "condition cap must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn generate_pair(spec: &GeneratorSpec) -> Result<WeightedPair> {
    let (w, mut elements) = generate_family(spec, 1)?;
    WeightedPair::new(elements.remove(0), w)
}

/// One weight and `count` elements sharing it, each with the same target
/// index. Used by the block suites, which need `a` and `d` over a common `w`.
pub fn generate_family(spec: &GeneratorSpec, count: usize) -> Result<(CMatrix, Vec<CMatrix>)> {
    spec.validate()?;
    let mut g = Draw {
        rng: spec.rng(),
        cap: spec.condition_cap,
    };
    let (n, t) = (spec.n, spec.target_index);
    match spec.weight_mode {
        WeightMode::Identity => {
            let elements = (0..count).map(|_| g.element(n, t)).collect();
            Ok((CMatrix::identity(n), elements))
        }
        WeightMode::RandomInvertible => {
            let (w, w_inv) = g.invertible(n, 2.0);
            let elements = (0..count).map(|_| w_inv.matmul(&g.element(n, t))).collect();
            Ok((w, elements))
        }
        WeightMode::RandomSingular => {
            let s = t.max(1);
            let c_size = n - s;
            let (q, q_inv) = g.invertible(n, 2.0);
            let (p, p_inv) = g.invertible(n, 2.0);
            let (wc, wc_inv) = g.invertible(c_size, 2.0);
            let sw = g.triangular(s, true);
            let w = q.matmul(&CMatrix::block_diag(&[&wc, &sw])).matmul(&p_inv);
            let elements = (0..count)
                .map(|_| {
                    let c = g.core_block(c_size);
                    let sa = g.triangular(s, false);
                    let inner = CMatrix::block_diag(&[&wc_inv.matmul(&c), &sa]);
                    p.matmul(&inner).matmul(&q_inv)
                })
                .collect();
            Ok((w, elements))
        }
    }
}

/// Nilpotent `B` with `B·W·A = 0` and `B·W` nilpotent: `B = u·g*` with
/// `g ⟂ R(WA)` and `u ⟂ {g, W*g}`. Returns zero when no such `g`, `u` exist
/// (e.g. `WA` invertible, or `n = 2`).
pub fn nilpotent_annihilator(pair: &WeightedPair, seed: u64, tol: &ToleranceConfig) -> CMatrix {
    let n = pair.n();
    let zero = CMatrix::zeros(n, n);
    // N((WA)*) is spanned by the right singular vectors of (WA)* whose
    // singular values fall below the rank threshold.
    let f = svd(&pair.wa().adjoint());
    if f.rank(tol) == n {
        return zero;
    }
    let g: Vec<C64> = (0..n).map(|i| f.v[(i, n - 1)]).collect();
    let wg: Vec<C64> = (0..n)
        .map(|i| (0..n).map(|k| pair.w[(k, i)].conj() * g[k]).sum())
        .collect();
    let mut draw = Draw {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cap: GeneratorSpec::DEFAULT_CONDITION_CAP,
    };
    let mut u = draw.gaussian_vec(n);
    let before = norm(&u);
    for q in orthonormalize(&[g.clone(), wg]) {
        let proj: C64 = q.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
        for (x, qi) in u.iter_mut().zip(&q) {
            *x -= proj * qi;
        }
    }
    if norm(&u) <= tol.rank_rtol * before {
        return zero;
    }
    CMatrix::from_fn(n, n, |i, j| u[i] * g[j].conj())
}

/// Complex Gaussian `n × n` matrix, unit variance per entry.
pub fn gaussian_matrix(n: usize, seed: u64) -> CMatrix {
    Draw {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cap: GeneratorSpec::DEFAULT_CONDITION_CAP,
    }
    .gaussian(n, n)
}

struct Draw {
    rng: ChaCha8Rng,
    cap: f64,
}

impl Draw {
    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn gaussian_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| Complex64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2)
            .collect()
    }

    fn gaussian(&mut self, r: usize, c: usize) -> CMatrix {
        let mut m = CMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                m[(i, j)] =
                    Complex64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        m
    }

    fn unitary(&mut self, n: usize) -> CMatrix {
        let cols: Vec<Vec<C64>> = (0..n).map(|_| self.gaussian_vec(n)).collect();
        let q = orthonormalize(&cols);
        CMatrix::from_fn(n, n, |i, j| q[j][i])
    }

    fn spread(&mut self, n: usize, hi: f64) -> Vec<f64> {
        let hi = hi.min(self.cap).max(1.0);
        (0..n)
            .map(|_| {
                if hi > 1.0 {
                    self.rng.random_range(1.0..hi)
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// `(M, M⁻¹)` with singular values of `M` in `[1, hi]`.
    fn invertible(&mut self, n: usize, hi: f64) -> (CMatrix, CMatrix) {
        if n == 0 {
            return (CMatrix::zeros(0, 0), CMatrix::zeros(0, 0));
        }
        let u = self.unitary(n);
        let v = self.unitary(n);
        let s = self.spread(n, hi);
        let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
        let m = u.matmul(&CMatrix::diag_real(&s)).matmul(&v.adjoint());
        let m_inv = v.matmul(&CMatrix::diag_real(&inv)).matmul(&u.adjoint());
        (m, m_inv)
    }

    fn core_block(&mut self, n: usize) -> CMatrix {
        if n == 0 {
            return CMatrix::zeros(0, 0);
        }
        let u1 = self.unitary(n);
        let u2 = self.unitary(n);
        let s = self.spread(n, 1.5);
        u1.matmul(&CMatrix::diag_real(&s)).matmul(&u2)
    }

    fn jordan_like(&mut self, n: usize, t: usize) -> CMatrix {
        let c = self.core_block(n - t);
        let shift = CMatrix::from_fn(
            t,
            t,
            |i, j| if j == i + 1 { C64::new(1.0, 0.0) } else { ZERO },
        );
        CMatrix::block_diag(&[&c, &shift])
    }

    /// `Q·J·Q⁻¹` with `J = diag(C, J_t(0))`.
    fn element(&mut self, n: usize, t: usize) -> CMatrix {
        let j = self.jordan_like(n, t);
        self.similar(&j)
    }

    fn similar(&mut self, j: &CMatrix) -> CMatrix {
        let (q, q_inv) = self.invertible(j.rows(), 2.0);
        q.matmul(j).matmul(&q_inv)
    }

    /// `s × s` upper triangular. With `singular_diag`, the diagonal is
    /// random except one zero; otherwise it is strictly upper triangular
    /// with a unit superdiagonal plus noise.
    ///
    /// The zero never sits in the first diagonal slot when `s ≥ 2`, so the
    /// product with a strictly upper triangular factor is not identically
    /// zero.
    fn triangular(&mut self, s: usize, singular_diag: bool) -> CMatrix {
        let zero_at = if s > 1 {
            self.rng.random_range(1..s)
        } else {
            0
        };
        let mut m = CMatrix::zeros(s, s);
        for i in 0..s {
            for j in i..s {
                let v = if i == j {
                    if singular_diag && i != zero_at {
                        C64::new(self.rng.random_range(1.0..2.0), 0.0)
                    } else {
                        ZERO
                    }
                } else {
                    let base = if !singular_diag && j == i + 1 {
                        1.0
                    } else {
                        0.0
                    };
                    C64::new(base + 0.5 * self.normal(), 0.5 * self.normal())
                };
                m[(i, j)] = v;
            }
        }
        m
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt with one reorthogonalization pass; drops
/// (numerically) dependent vectors.
fn orthonormalize(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut x = v.clone();
        let original = norm(&x);
        for _ in 0..2 {
            for q in &out {
                let proj: C64 = q.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= proj * qi;
                }
            }
        }
        let nx = norm(&x);
        if nx > 1e-10 * original.max(f64::MIN_POSITIVE) {
            out.push(x.iter().map(|z| z / nx).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::index;
    use crate::svd::is_invertible;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(generate_pair(&GeneratorSpec::new(2, 3, WeightMode::Identity, 0)).is_err());
        assert!(generate_pair(&GeneratorSpec::new(0, 0, WeightMode::Identity, 0)).is_err());
        let mut s = GeneratorSpec::new(3, 1, WeightMode::Identity, 0);
        s.condition_cap = 0.5;
        assert!(generate_pair(&s).is_err());
    }

    #[test]
    fn extreme_indices() {
        let p = generate_pair(&GeneratorSpec::new(4, 0, WeightMode::Identity, 9)).unwrap();
        assert!(is_invertible(&p.a, &tol()).unwrap());
        let p = generate_pair(&GeneratorSpec::new(4, 4, WeightMode::Identity, 9)).unwrap();
        assert!(p.a.is_nilpotent(&tol()).unwrap());
        assert_eq!(index(&p.a, &tol()).unwrap(), 4);
    }

    #[test]
    fn prescribed_index_is_measured_for_invertible_weights() {
        for seed in 0..100u64 {
            let n = 2 + (seed as usize % 7);
            let t = (seed as usize / 7) % 4;
            if t > n {
                continue;
            }
            for mode in [WeightMode::Identity, WeightMode::RandomInvertible] {
                let p = generate_pair(&GeneratorSpec::new(n, t, mode, seed)).unwrap();
                assert_eq!(
                    index(&p.wa(), &tol()).unwrap(),
                    t,
                    "n={n} t={t} {mode:?} seed={seed}"
                );
            }
        }
        let p = generate_pair(&GeneratorSpec::new(6, 2, WeightMode::RandomInvertible, 42)).unwrap();
        assert_eq!(index(&p.wa(), &tol()).unwrap(), 2);
    }

    #[test]
    fn singular_weights_are_singular() {
        for seed in 0..20 {
            let p = generate_pair(&GeneratorSpec::new(
                5,
                seed as usize % 4,
                WeightMode::RandomSingular,
                seed,
            ))
            .unwrap();
            assert!(!is_invertible(&p.w, &tol()).unwrap());
            let k = index(&p.wa(), &tol()).unwrap();
            assert!((1..=5).contains(&k));
        }
    }

    #[test]
    fn deterministic() {
        let s = GeneratorSpec::new(5, 2, WeightMode::RandomSingular, 77);
        assert_eq!(generate_pair(&s).unwrap(), generate_pair(&s).unwrap());
        let other = GeneratorSpec { seed: 78, ..s };
        assert_ne!(generate_pair(&s).unwrap(), generate_pair(&other).unwrap());
    }

    #[test]
    fn family_shares_weight() {
        let s = GeneratorSpec::new(4, 2, WeightMode::RandomInvertible, 5);
        let (w, els) = generate_family(&s, 2).unwrap();
        assert_eq!(els.len(), 2);
        for a in els {
            let pair = WeightedPair::new(a, w.clone()).unwrap();
            assert_eq!(index(&pair.wa(), &tol()).unwrap(), 2);
        }
    }

    #[test]
    fn annihilator_is_nilpotent_and_kills_wa() {
        let t = tol();
        for seed in 0..10 {
            let pair = generate_pair(&GeneratorSpec::new(
                5,
                2,
                WeightMode::RandomInvertible,
                seed,
            ))
            .unwrap();
            let b = nilpotent_annihilator(&pair, seed + 100, &t);
            assert!(b.frobenius_norm() > 0.1);
            assert!(b.matmul(&pair.wa()).frobenius_norm() < 1e-10);
            assert!(b.is_nilpotent(&t).unwrap());
            assert!(b.matmul(&pair.w).is_nilpotent(&t).unwrap());
        }
        let pair = generate_pair(&GeneratorSpec::new(3, 0, WeightMode::Identity, 1)).unwrap();
        assert_eq!(nilpotent_annihilator(&pair, 1, &t), CMatrix::zeros(3, 3));
        assert!(svd(&pair.a).s.iter().all(|&s| s > 0.1));
    }
}
