//! Small dense complex linear algebra.
//!
//! The recovery pipeline needs exactly four kernels, all at modest sizes:
//! a Hermitian eigensolver for m×m blocks (cyclic complex Jacobi), a
//! rank-revealing least-squares factorization (Householder QR with column
//! pivoting), a spectral-norm estimator for operators too large to
//! materialize (power iteration on the squared operator), and compensated
//! summation (lives in [`crate::spectrum`]). They are hand-rolled so sizes,
//! determinism, and accuracy stay under our control, and each is tested
//! against algebraic identities rather than against itself.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = C64::new(1.0, 0.0);
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
        CMat { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for (a, b) in self.row(i).iter().zip(x.iter()) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    *out.at_mut(i, j) += aik * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// ⟨a, b⟩ = Σ conj(a_i)·b_i.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver (cyclic complex Jacobi)
// ---------------------------------------------------------------------------

pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Matching eigenvectors as matrix columns, if requested.
    pub vectors: Option<CMat>,
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// The input is symmetrized (A + A^H)/2 first, so tiny Hermiticity drift
/// from accumulation upstream is harmless.
pub fn hermitian_eigen(a: &CMat, want_vectors: bool) -> HermitianEigen {
    assert_eq!(a.rows, a.cols, "hermitian_eigen needs a square matrix");
    let n = a.rows;
    let mut w = CMat::from_fn(n, n, |i, j| 0.5 * (a.at(i, j) + a.at(j, i).conj()));
    let mut v = if want_vectors { Some(CMat::identity(n)) } else { None };
    let fro = w.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * fro;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += w.at(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let wpq = w.at(p, q);
                let r = wpq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase u makes the pivot real; a real Givens then kills it.
                let u = wpq / r;
                let alpha = w.at(p, p).re;
                let gamma = w.at(q, q).re;
                let tau = (gamma - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V = diag(1, conj(u)) · [[c, s], [−s, c]] in the (p,q) plane:
                // V[:,p] = (c, −conj(u)·s), V[:,q] = (s, conj(u)·c).
                let uc = u.conj();
                // Right application W ← W·V.
                for k in 0..n {
                    let wkp = w.at(k, p);
                    let wkq = w.at(k, q);
                    *w.at_mut(k, p) = c * wkp - uc * s * wkq;
                    *w.at_mut(k, q) = s * wkp + uc * c * wkq;
                }
                // Left application W ← V^H·W.
                for k in 0..n {
                    let wpk = w.at(p, k);
                    let wqk = w.at(q, k);
                    *w.at_mut(p, k) = c * wpk - u * s * wqk;
                    *w.at_mut(q, k) = s * wpk + u * c * wqk;
                }
                // Clean the annihilated pair and enforce real diagonal.
                *w.at_mut(p, q) = C64::new(0.0, 0.0);
                *w.at_mut(q, p) = C64::new(0.0, 0.0);
                let dpp = w.at(p, p).re;
                let dqq = w.at(q, q).re;
                *w.at_mut(p, p) = C64::new(dpp, 0.0);
                *w.at_mut(q, q) = C64::new(dqq, 0.0);
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm.at(k, p);
                        let vkq = vm.at(k, q);
                        *vm.at_mut(k, p) = c * vkp - uc * s * vkq;
                        *vm.at_mut(k, q) = s * vkp + uc * c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w.at(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|vm| CMat::from_fn(n, n, |i, j| vm.at(i, order[j])));
    HermitianEigen { values, vectors }
}

// ---------------------------------------------------------------------------
// Householder QR with column pivoting
// ---------------------------------------------------------------------------

/// A·P = Q·R with column pivoting; rank-revealing in the usual |R_jj| sense.
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Householder tail vectors; reflector j acts on rows j.. .
    reflectors: Vec<Vec<C64>>,
    /// 2/‖v‖² per reflector (0 means "skip": the column was already reduced).
    betas: Vec<f64>,
    /// R, upper triangular (cols × cols).
    r: CMat,
    /// perm[j] = original column index that ended up in position j.
    perm: Vec<usize>,
}

impl PivotedQr {
    /// Factor an n×m matrix with n ≥ m.
    pub fn new(a: &CMat) -> Self {
        let (n, m) = (a.rows, a.cols);
        assert!(n >= m, "QR expects a tall matrix, got {n}x{m}");
        let mut b = a.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut reflectors: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut betas = Vec::with_capacity(m);
        for j in 0..m {
            // Pivot: bring the column with the largest remaining norm to j.
            let mut best = j;
            let mut best_norm = -1.0f64;
            for l in j..m {
                let nrm: f64 = (j..n).map(|i| b.at(i, l).norm_sqr()).sum();
                if nrm > best_norm {
                    best_norm = nrm;
                    best = l;
                }
            }
            if best != j {
                for i in 0..n {
                    let tmp = b.at(i, j);
                    *b.at_mut(i, j) = b.at(i, best);
                    *b.at_mut(i, best) = tmp;
                }
                perm.swap(j, best);
            }
            // Householder vector for column j.
            let normx = best_norm.max(0.0).sqrt();
            let x0 = b.at(j, j);
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
            let alpha = -phase * normx;
            let mut v: Vec<C64> = (j..n).map(|i| b.at(i, j)).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            if beta > 0.0 {
                for l in j..m {
                    let mut dot = C64::new(0.0, 0.0);
                    for (t, vi) in v.iter().enumerate() {
                        dot += vi.conj() * b.at(j + t, l);
                    }
                    let scale = beta * dot;
                    for (t, vi) in v.iter().enumerate() {
                        *b.at_mut(j + t, l) -= scale * vi;
                    }
                }
            }
            // The reflector maps column j onto alpha·e_j exactly; store that.
            *b.at_mut(j, j) = alpha;
            for i in (j + 1)..n {
                *b.at_mut(i, j) = C64::new(0.0, 0.0);
            }
            reflectors.push(v);
            betas.push(beta);
        }
        let r = CMat::from_fn(m, m, |i, j| if i <= j { b.at(i, j) } else { C64::new(0.0, 0.0) });
        PivotedQr { rows: n, cols: m, reflectors, betas, r, perm }
    }

    pub fn r(&self) -> &CMat {
        &self.r
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Numerical rank: count of |R_jj| above rtol·|R_00|.
    pub fn rank(&self, rtol: f64) -> usize {
        let r00 = self.r.at(0, 0).norm();
        if r00 == 0.0 {
            return 0;
        }
        (0..self.cols).take_while(|&j| self.r.at(j, j).norm() > rtol * r00).count()
    }

    /// y ← Q^H y in place (length rows).
    pub fn apply_qh(&self, y: &mut [C64]) {
        assert_eq!(y.len(), self.rows);
        for (j, v) in self.reflectors.iter().enumerate() {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            let mut dot = C64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * y[j + t];
            }
            let scale = beta * dot;
            for (t, vi) in v.iter().enumerate() {
                y[j + t] -= scale * vi;
            }
        }
    }

    /// y ← Q y in place (length rows).
    pub fn apply_q(&self, y: &mut [C64]) {
        assert_eq!(y.len(), self.rows);
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            let mut dot = C64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * y[j + t];
            }
            let scale = beta * dot;
            for (t, vi) in v.iter().enumerate() {
                y[j + t] -= scale * vi;
            }
        }
    }

    /// Least-squares solution x (length cols) of A x ≈ b, full rank assumed.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.rows);
        let mut y = b.to_vec();
        self.apply_qh(&mut y);
        let z = self.back_substitute(&y[..self.cols]);
        let mut x = vec![C64::new(0.0, 0.0); self.cols];
        for (j, &pj) in self.perm.iter().enumerate() {
            x[pj] = z[j];
        }
        x
    }

    fn back_substitute(&self, y: &[C64]) -> Vec<C64> {
        let m = self.cols;
        let mut z = vec![C64::new(0.0, 0.0); m];
        for j in (0..m).rev() {
            let mut acc = y[j];
            for k in (j + 1)..m {
                acc -= self.r.at(j, k) * z[k];
            }
            z[j] = acc / self.r.at(j, j);
        }
        z
    }

    /// Moore–Penrose pseudoinverse A⁺ = P R^{-1} Q₁^H (cols × rows),
    /// valid at full column rank.
    pub fn pseudoinverse(&self) -> CMat {
        let (n, m) = (self.rows, self.cols);
        // Q1: first m columns of Q.
        let mut q1 = CMat::zeros(n, m);
        for k in 0..m {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[k] = C64::new(1.0, 0.0);
            self.apply_q(&mut e);
            for i in 0..n {
                *q1.at_mut(i, k) = e[i];
            }
        }
        // R^{-1} column by column.
        let mut rinv = CMat::zeros(m, m);
        for k in 0..m {
            let mut e = vec![C64::new(0.0, 0.0); m];
            e[k] = C64::new(1.0, 0.0);
            let col = self.back_substitute(&e);
            for i in 0..m {
                *rinv.at_mut(i, k) = col[i];
            }
        }
        let rq = rinv.matmul(&q1.conj_transpose()); // m×n
        let mut pinv = CMat::zeros(m, n);
        for j in 0..m {
            let src = rq.row(j).to_vec();
            pinv.row_mut(self.perm[j]).copy_from_slice(&src);
        }
        pinv
    }

    /// Smallest singular value of the factored matrix, from R.
    pub fn min_singular_value(&self) -> f64 {
        let m = self.cols;
        let gram = CMat::from_fn(m, m, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=i.min(j) {
                acc += self.r.at(k, i).conj() * self.r.at(k, j);
            }
            acc
        });
        let eig = hermitian_eigen(&gram, false);
        eig.values[0].max(0.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// spectral norm by squared power iteration
// ---------------------------------------------------------------------------

/// ‖A‖₂ of a Hermitian operator given only y ← A·x, via power iteration on
/// A² (so a dominant negative eigenvalue cannot stall convergence). The
/// start vector is drawn from a fixed-seed generator: the estimate is a
/// deterministic function of the operator.
pub fn hermitian_spectral_norm(
    dim: usize,
    mut matvec: impl FnMut(&[C64], &mut [C64]),
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = vec_norm(&v);
    for z in v.iter_mut() {
        *z /= norm;
    }
    let mut tmp = vec![C64::new(0.0, 0.0); dim];
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut prev = 0.0f64;
    for _ in 0..max_iters {
        matvec(&v, &mut tmp);
        matvec(&tmp, &mut w);
        // Rayleigh quotient of A²: ⟨v, A²v⟩ = ‖Av‖² ≥ 0.
        let theta: f64 = tmp.iter().map(|z| z.norm_sqr()).sum();
        let wnorm = vec_norm(&w);
        if wnorm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(w.iter()) {
            *vi = wi / wnorm;
        }
        let est = theta.sqrt();
        if (est - prev).abs() <= rel_tol * est.max(f64::MIN_POSITIVE) {
            return est;
        }
        prev = est;
    }
    prev
}
