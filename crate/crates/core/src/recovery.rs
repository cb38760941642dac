//! Weighted least-squares recovery from random samples, with certified
//! worst-case L∞ error evaluation and an experiment harness comparing the
//! achieved error against the optimal-information benchmark.
//!
//! The pipeline: draw i.i.d. nodes from the sampling density (identically 1
//! on the torus for these models), build truncated sample vectors whose
//! second-moment matrix should concentrate near a known diagonal, optionally
//! thin the node set to O(m) points with a barrier greedy that certifies
//! frame bounds, solve the least-squares system on the first m ranked
//! eigenfunctions, and evaluate the power function of the resulting linear
//! map on a tensor grid with a rigorous truncation remainder.
//!
//! Everything is deterministic given the seeds: node draws use a counter
//! stream cipher, and every iterative norm estimate derives its start vector
//! from the node seed.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::approx_number;
use crate::linalg::{cdot, hermitian_eigen, hermitian_spectral_norm, C64, CMat, PivotedQr};
use crate::model::{KernelModel, ModelError};
use crate::spectrum::{EigenEntry, Spectrum};

/// Hard cap on ranked-mode truncations anywhere in this module.
pub const TRUNCATION_CAP: usize = 100_000;

/// How far tail scans may look when estimating a sufficient truncation for
/// an error message.
const TRUNCATION_SCAN_CAP: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("section parameter m must be >= 1, got {m}")]
    InvalidSection { m: usize },
    #[error("need n >= m >= 1 nodes, got n = {n} with m = {m}")]
    BadNodeCount { n: usize, m: usize },
    #[error("evaluation point has dimension {got}, model has dimension {expected}")]
    BadPointDimension { expected: usize, got: usize },
    #[error("got {got} sample values for {expected} nodes")]
    SampleCountMismatch { expected: usize, got: usize },
    #[error("fit was built on {expected} nodes but {got} were supplied")]
    MismatchedFit { expected: usize, got: usize },
    #[error(
        "truncation K = {truncation} is too small; need K >= {required} before the \
         discarded modes are negligible"
    )]
    TruncationTooSmall { truncation: usize, required: usize },
    #[error(
        "accuracy target needs at least {required_at_least} ranked modes, above the \
         cap of {cap}"
    )]
    TruncationCapExceeded { cap: usize, required_at_least: usize },
    #[error(
        "design matrix is numerically rank deficient (sigma_min/sqrt(n) = {sv_min:.3e}); \
         add nodes or retry the draw"
    )]
    RankDeficient { sv_min: f64 },
    #[error("least-squares fit failed its reproduction check (max deviation {max_abs:.3e})")]
    ReproductionCheckFailed { max_abs: f64 },
    #[error("subsampling requires empirical deviation <= 1/2, measured {deviation:.3}")]
    SubsamplePrecondition { deviation: f64 },
    #[error(
        "subsampling stopped at {selected} nodes without meeting its targets \
         (head eigenvalue {head_min:.3}, target {target:.3})"
    )]
    SubsampleTargets { selected: usize, head_min: f64, target: f64 },
    #[error("worst-case-error grids support d <= 3, got d = {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("invalid experiment config: {0}")]
    BadConfig(String),
}

// ---------------------------------------------------------------------------
// density, nodes, eigenfunctions
// ---------------------------------------------------------------------------

/// The sampling density on the torus: the equal-weight mixture of the
/// normalized Christoffel function of the first m ranked modes and the
/// normalized tail kernel. Every eigenfunction here is a unimodular
/// exponential, so both mixture components are identically 1 and so is the
/// density; the value is returned analytically, no sum is formed. The
/// density therefore integrates to 1 and the ratio between any two points
/// is 1.
pub fn sampling_density(model: &KernelModel, m: usize, x: &[f64]) -> Result<f64, RecoveryError> {
    if m < 1 {
        return Err(RecoveryError::InvalidSection { m });
    }
    if x.len() != model.d() {
        return Err(RecoveryError::BadPointDimension { expected: model.d(), got: x.len() });
    }
    Ok(1.0)
}

/// η(x) = e^{2πi ⟨h, x⟩} for a signed frequency index h.
fn eigenfunction(index: &[i32], x: &[f64]) -> C64 {
    let mut dot = 0.0;
    for (h, xi) in index.iter().zip(x) {
        dot += *h as f64 * xi;
    }
    C64::from_polar(1.0, TAU * dot)
}

/// A batch of i.i.d. sample nodes on [0,1)^d with the density values they
/// were drawn from (identically 1, kept because downstream formulas divide
/// by them) and the section parameter m they serve.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub dim: usize,
    pub m: usize,
    pub seed: u64,
    /// Flat row-major coordinates; node i occupies [i·dim, (i+1)·dim).
    pub coords: Vec<f64>,
    /// Density value at each node.
    pub density: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// The nodes at the given indices, as a new set (used after
    /// subsampling). Indices must be in range; order is preserved.
    pub fn restrict(&self, keep: &[usize]) -> NodeSet {
        let mut coords = Vec::with_capacity(keep.len() * self.dim);
        let mut density = Vec::with_capacity(keep.len());
        for &i in keep {
            coords.extend_from_slice(self.point(i));
            density.push(self.density[i]);
        }
        NodeSet { dim: self.dim, m: self.m, seed: self.seed, coords, density }
    }
}

/// n i.i.d. draws from the sampling density, which is uniform on the torus
/// here. Reproducible: the same seed yields the same node set.
pub fn draw_nodes(
    model: &KernelModel,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<NodeSet, RecoveryError> {
    if m < 1 || n < m {
        return Err(RecoveryError::BadNodeCount { n, m });
    }
    let dim = model.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    Ok(NodeSet { dim, m, seed, coords, density: vec![1.0; n] })
}

// ---------------------------------------------------------------------------
// sample vectors and the concentration check
// ---------------------------------------------------------------------------

/// γ_m = max{σ_{m+1}, ((1/m)Σ_{k>m}σ_k²)^{1/2}}, the tail normalizer of the
/// sample vectors. Strictly positive for these models.
pub fn gamma_m(spectrum: &mut Spectrum, m: usize) -> f64 {
    let head = spectrum.value_at(m as u64 + 1).sqrt();
    let avg = (spectrum.tail_sum(m as u64) / m as f64).sqrt();
    head.max(avg)
}

/// Truncated sample vectors y_i: head block k ≤ m holds raw eigenfunction
/// values, tail block m < k ≤ K holds values scaled by σ_k/γ_m. Because
/// every eigenfunction is unimodular, |y_{i,k}|² equals the k-th diagonal
/// entry of the target second-moment matrix E for every node, so each row
/// norm is the deterministic value (Σ diag E)^{1/2} ≤ (2m)^{1/2}.
pub struct SampleVectors {
    pub m: usize,
    pub truncation: usize,
    pub gamma: f64,
    /// Diagonal of E: 1 on the head block, σ_k²/γ_m² on the tail block.
    pub e_diag: Vec<f64>,
    /// Σ_{k>K} σ_k², the discarded mass.
    pub tail_beyond: f64,
    /// σ_{K+1}², the largest discarded eigenvalue.
    pub next_value: f64,
    /// n × K, row i is y_i.
    pub rows: CMat,
}

impl SampleVectors {
    pub fn new(
        spectrum: &mut Spectrum,
        nodes: &NodeSet,
        truncation: usize,
    ) -> Result<Self, RecoveryError> {
        let m = nodes.m;
        if truncation <= m {
            return Err(RecoveryError::TruncationTooSmall { truncation, required: m + 1 });
        }
        if truncation > TRUNCATION_CAP {
            return Err(RecoveryError::TruncationCapExceeded {
                cap: TRUNCATION_CAP,
                required_at_least: truncation,
            });
        }
        let gamma = gamma_m(spectrum, m);
        let entries: Vec<EigenEntry> = spectrum.entries(truncation).to_vec();
        let tail_beyond = spectrum.tail_sum(truncation as u64);
        let next_value = spectrum.value_at(truncation as u64 + 1);
        let mut e_diag = vec![1.0; truncation];
        let mut scale = vec![1.0; truncation];
        for k in m..truncation {
            let ratio = entries[k].value / (gamma * gamma);
            e_diag[k] = ratio;
            scale[k] = ratio.sqrt();
        }
        let n = nodes.len();
        let mut rows = CMat::zeros(n, truncation);
        for i in 0..n {
            let x = nodes.point(i);
            let row = rows.row_mut(i);
            for k in 0..truncation {
                row[k] = eigenfunction(&entries[k].index, x) * scale[k];
            }
        }
        Ok(SampleVectors { m, truncation, gamma, e_diag, tail_beyond, next_value, rows })
    }

    /// The common squared norm of every row (exact, by unimodularity).
    pub fn row_norm_sq(&self) -> f64 {
        self.e_diag.iter().sum()
    }
}

/// Smallest K with σ_{K+1}²/γ_m² < 1e-6, i.e. the first truncation at which
/// no discarded eigenvalue of E exceeds 1e-6.
pub fn required_truncation(spectrum: &mut Spectrum, m: usize) -> Result<usize, RecoveryError> {
    let g2 = {
        let g = gamma_m(spectrum, m);
        g * g
    };
    let target = 1e-6 * g2;
    let ok = |s: &mut Spectrum, k: usize| s.value_at(k as u64 + 1) < target;
    let mut hi = m + 1;
    while !ok(spectrum, hi) {
        if hi >= TRUNCATION_CAP {
            return Err(RecoveryError::TruncationCapExceeded {
                cap: TRUNCATION_CAP,
                required_at_least: TRUNCATION_CAP,
            });
        }
        hi = (hi * 2).min(TRUNCATION_CAP);
    }
    let mut lo = m + 1; // invariant: everything below lo fails or is the floor
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(spectrum, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

/// Outcome of the concentration measurement. `deviation` is the headline
/// number: the measured spectral norm on the K-truncation plus a rigorous
/// allowance for the discarded modes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcentrationReport {
    pub deviation: f64,
    /// ‖(1/n)Σ_i y_i y_i^* − E‖ on the first K coordinates.
    pub norm_estimate: f64,
    /// Block bound on what the modes beyond K can add: the cross block is
    /// at most (Σ diag E · Σ_{k>K}σ_k²)^{1/2}/γ and the trailing diagonal
    /// block at most Σ_{k>K}σ_k²/γ², both deterministic by unimodularity.
    pub slack: f64,
    pub truncation: usize,
    pub gamma: f64,
}

/// Spectral-norm deviation of the empirical second-moment matrix of the
/// sample vectors from its mean E = diag(1,…,1, σ_{m+1}²/γ_m², …).
pub fn concentration_check(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    truncation: usize,
) -> Result<ConcentrationReport, RecoveryError> {
    let required = required_truncation(spectrum, nodes.m)?;
    if truncation < required {
        return Err(RecoveryError::TruncationTooSmall { truncation, required });
    }
    let sv = SampleVectors::new(spectrum, nodes, truncation)?;
    Ok(concentration_of(&sv, nodes.seed))
}

fn concentration_of(sv: &SampleVectors, seed: u64) -> ConcentrationReport {
    let n = sv.rows.rows;
    let k = sv.truncation;
    let inv_n = 1.0 / n as f64;
    let rows = &sv.rows;
    let e_diag = &sv.e_diag;
    let matvec = |v: &[C64], out: &mut [C64]| {
        out.fill(C64::new(0.0, 0.0));
        for i in 0..n {
            let row = rows.row(i);
            let c = cdot(row, v) * inv_n;
            for (o, &y) in out.iter_mut().zip(row) {
                *o += y * c;
            }
        }
        for (o, (&e, &vi)) in out.iter_mut().zip(e_diag.iter().zip(v)) {
            *o -= e * vi;
        }
    };
    let norm_estimate = hermitian_spectral_norm(k, matvec, 600, 1e-4, seed ^ 0x5EED_1234);
    let g2 = sv.gamma * sv.gamma;
    let slack = (sv.row_norm_sq() * sv.tail_beyond).sqrt() / sv.gamma + sv.tail_beyond / g2;
    ConcentrationReport {
        deviation: norm_estimate + slack,
        norm_estimate,
        slack,
        truncation: k,
        gamma: sv.gamma,
    }
}

// ---------------------------------------------------------------------------
// subsampling
// ---------------------------------------------------------------------------

/// Frame bounds of a node subset J, in the two normalizations the sandwich
/// inequality uses: the head block of (1/m)Σ_{i∈J} y_i y_i^* from below and
/// the per-sample average (1/|J|)Σ_{i∈J} y_i y_i^* from above, the latter
/// relative to the same average over the full input set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SubsampleCertificate {
    pub size: usize,
    /// λ_min of the head block of (1/m)Σ_{i∈J} y_i y_i^*.
    pub head_min_eigenvalue: f64,
    /// λ_max of (1/|J|)Σ_{i∈J} y_i y_i^* over the K-truncation.
    pub subset_max_eigenvalue: f64,
    /// λ_max of (1/n)Σ_{i} y_i y_i^* over the full input set.
    pub input_max_eigenvalue: f64,
    /// subset_max_eigenvalue / input_max_eigenvalue.
    pub upper_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Subsample {
    /// Selected node indices into the input set, ascending.
    pub indices: Vec<usize>,
    pub certificate: SubsampleCertificate,
}

/// Recompute the certificate for an arbitrary subset from scratch. This is
/// the same deterministic computation `subsample` performs, so a caller can
/// verify a returned certificate bit for bit.
pub fn certificate_for(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    indices: &[usize],
    truncation: usize,
) -> Result<SubsampleCertificate, RecoveryError> {
    let sv = SampleVectors::new(spectrum, nodes, truncation)?;
    Ok(certificate_of(&sv, nodes.seed, indices))
}

fn certificate_of(sv: &SampleVectors, seed: u64, indices: &[usize]) -> SubsampleCertificate {
    let m = sv.m;
    let k = sv.truncation;
    let n = sv.rows.rows;
    // Head block of (1/m) Σ_J y y^*.
    let mut head = CMat::zeros(m, m);
    for &i in indices {
        let row = sv.rows.row(i);
        for p in 0..m {
            for q in 0..m {
                *head.at_mut(p, q) += row[p] * row[q].conj();
            }
        }
    }
    for p in 0..m {
        for q in 0..m {
            *head.at_mut(p, q) /= m as f64;
        }
    }
    let head_min = hermitian_eigen(&head, false).values[0];
    // Per-sample averages over the truncated vectors, by power iteration.
    let average_max = |subset: &[usize], tag: u64| {
        let inv = 1.0 / subset.len() as f64;
        let matvec = |v: &[C64], out: &mut [C64]| {
            out.fill(C64::new(0.0, 0.0));
            for &i in subset {
                let row = sv.rows.row(i);
                let c = cdot(row, v) * inv;
                for (o, &y) in out.iter_mut().zip(row) {
                    *o += y * c;
                }
            }
        };
        hermitian_spectral_norm(k, matvec, 600, 1e-5, seed ^ tag)
    };
    let all: Vec<usize> = (0..n).collect();
    let subset_max = average_max(indices, 0x00FA_CADE);
    let input_max = average_max(&all, 0x00C0_FFEE);
    SubsampleCertificate {
        size: indices.len(),
        head_min_eigenvalue: head_min,
        subset_max_eigenvalue: subset_max,
        input_max_eigenvalue: input_max,
        upper_ratio: subset_max / input_max,
    }
}

/// Deterministic barrier-greedy thinning: pick nodes that lift the smallest
/// eigenvalue of the head-block sum until (1/m)Σ_{i∈J} has head eigenvalues
/// at least `lower_bound_target`·m, then keep picking by the same rule to
/// spread the per-sample average, never exceeding `target_size_factor`·m
/// nodes. If the input already fits the size budget it is returned whole.
pub fn subsample(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    truncation: usize,
    target_size_factor: f64,
    lower_bound_target: f64,
) -> Result<Subsample, RecoveryError> {
    let m = nodes.m;
    let n = nodes.len();
    if !(target_size_factor >= 1.0) || !(lower_bound_target > 0.0) {
        return Err(RecoveryError::BadConfig(format!(
            "subsample targets must satisfy factor >= 1 and lower bound > 0, got {target_size_factor} and {lower_bound_target}"
        )));
    }
    let cap = ((target_size_factor * m as f64).floor() as usize).max(m);
    let required = required_truncation(spectrum, m)?;
    if truncation < required {
        return Err(RecoveryError::TruncationTooSmall { truncation, required });
    }
    let sv = SampleVectors::new(spectrum, nodes, truncation)?;
    let mf = m as f64;
    let unnorm_target = lower_bound_target * mf * mf;

    if n <= cap {
        // No-op path: the input is already within the size budget, and no
        // subset can beat the full set's head bound anyway.
        let indices: Vec<usize> = (0..n).collect();
        let certificate = certificate_of(&sv, nodes.seed, &indices);
        if certificate.head_min_eigenvalue < lower_bound_target * mf {
            return Err(RecoveryError::SubsampleTargets {
                selected: n,
                head_min: certificate.head_min_eigenvalue,
                target: lower_bound_target * mf,
            });
        }
        return Ok(Subsample { indices, certificate });
    }

    let conc = concentration_of(&sv, nodes.seed);
    if conc.deviation > 0.5 {
        return Err(RecoveryError::SubsamplePrecondition { deviation: conc.deviation });
    }

    // Greedy selection on the head vectors (the first m coordinates of each
    // sample vector, each of squared norm exactly m).
    let mut picked = vec![false; n];
    let mut indices: Vec<usize> = Vec::new();
    let mut head_sum = CMat::zeros(m, m);
    let grow = |indices: &mut Vec<usize>, picked: &mut Vec<bool>, head_sum: &mut CMat| {
        let eig = hermitian_eigen(head_sum, true);
        let lambda_min = eig.values[0];
        let mean = eig.values.iter().sum::<f64>() / mf;
        let shift = (0.02 * (mean - lambda_min)).max(0.25);
        let ell = lambda_min - shift;
        let q = eig.vectors.expect("eigenvectors requested");
        let weights: Vec<f64> = eig.values.iter().map(|&l| 1.0 / ((l - ell) * (l - ell))).collect();
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if picked[i] {
                continue;
            }
            let row = sv.rows.row(i);
            let mut score = 0.0;
            for (qc, w) in weights.iter().enumerate() {
                let mut z = C64::new(0.0, 0.0);
                for p in 0..m {
                    z += q.at(p, qc).conj() * row[p];
                }
                score += w * z.norm_sqr();
            }
            let better = match best {
                None => true,
                Some((s, _)) => score > s,
            };
            if better {
                best = Some((score, i));
            }
        }
        let (_, i) = best.expect("candidates remain while |J| < n");
        picked[i] = true;
        indices.push(i);
        let row = sv.rows.row(i);
        for p in 0..m {
            for qx in 0..m {
                *head_sum.at_mut(p, qx) += row[p] * row[qx].conj();
            }
        }
    };

    // Phase 1: lift the head floor to the target.
    while indices.len() < cap {
        let lambda_min = hermitian_eigen(&head_sum, false).values[0];
        if lambda_min >= unnorm_target {
            break;
        }
        grow(&mut indices, &mut picked, &mut head_sum);
    }
    let lambda_min = hermitian_eigen(&head_sum, false).values[0];
    if lambda_min < unnorm_target {
        return Err(RecoveryError::SubsampleTargets {
            selected: indices.len(),
            head_min: lambda_min / mf,
            target: lower_bound_target * mf,
        });
    }
    // Phase 2: keep selecting to spread the per-sample average before
    // certifying; more spread lowers the upper frame bound.
    let goal = cap.min((2 * indices.len()).max(8 * m));
    while indices.len() < goal {
        grow(&mut indices, &mut picked, &mut head_sum);
    }

    indices.sort_unstable();
    let certificate = certificate_of(&sv, nodes.seed, &indices);
    if certificate.head_min_eigenvalue < lower_bound_target * mf {
        return Err(RecoveryError::SubsampleTargets {
            selected: indices.len(),
            head_min: certificate.head_min_eigenvalue,
            target: lower_bound_target * mf,
        });
    }
    Ok(Subsample { indices, certificate })
}

// ---------------------------------------------------------------------------
// least squares
// ---------------------------------------------------------------------------

/// A solved least-squares recovery problem on the span of the first m
/// ranked eigenfunctions.
#[derive(Clone, Debug)]
pub struct LeastSquaresFit {
    pub m: usize,
    /// Coefficients of the fitted expansion in the ranked eigenbasis.
    pub coefficients: Vec<C64>,
    /// σ_min(G)/√n, the conditioning of the normalized design matrix.
    pub sv_min_normalized: f64,
    /// Node subset the fit was computed on (None = all nodes given).
    pub subset: Option<Vec<usize>>,
    /// Ranked head frequencies h_1..h_m.
    pub modes: Vec<Vec<i32>>,
    /// The m×n pseudoinverse of the design matrix: row k maps samples to
    /// coefficient k. This matrix defines the linear recovery map
    /// independently of any particular sample values.
    pub pseudoinverse: CMat,
}

/// Solve min over the m-mode span of Σ_i |f(x^i) − g(x^i)|²/ρ(x^i) for the
/// sampled values. The density is 1, so the weights drop out. The solve
/// goes through a column-pivoted orthogonal factorization; the fit is
/// rejected if the design is numerically rank deficient, and the computed
/// pseudoinverse is verified to reproduce the m-mode span (G⁺G = I) to
/// 1e-10 before it is returned.
pub fn fit_least_squares(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    samples: &[C64],
) -> Result<LeastSquaresFit, RecoveryError> {
    let m = nodes.m;
    let n = nodes.len();
    if n < m {
        return Err(RecoveryError::BadNodeCount { n, m });
    }
    if samples.len() != n {
        return Err(RecoveryError::SampleCountMismatch { expected: n, got: samples.len() });
    }
    let entries: Vec<EigenEntry> = spectrum.entries(m).to_vec();
    let g = CMat::from_fn(n, m, |i, k| eigenfunction(&entries[k].index, nodes.point(i)));
    let qr = PivotedQr::new(&g);
    let sv_min_normalized = qr.min_singular_value() / (n as f64).sqrt();
    if !(sv_min_normalized > 1e-10) {
        return Err(RecoveryError::RankDeficient { sv_min: sv_min_normalized });
    }
    let coefficients = qr.solve(samples);
    let pseudoinverse = qr.pseudoinverse();
    // Reproduction check: G⁺G = I means every function already in the
    // m-mode span is recovered exactly from its samples.
    let mut max_abs = 0.0f64;
    for k in 0..m {
        for l in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += pseudoinverse.at(k, i) * g.at(i, l);
            }
            let target = if k == l { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            max_abs = max_abs.max((acc - target).norm());
        }
    }
    if max_abs > 1e-10 {
        return Err(RecoveryError::ReproductionCheckFailed { max_abs });
    }
    Ok(LeastSquaresFit {
        m,
        coefficients,
        sv_min_normalized,
        subset: None,
        modes: entries.into_iter().map(|e| e.index).collect(),
        pseudoinverse,
    })
}

impl LeastSquaresFit {
    /// Evaluate the fitted expansion at a point.
    pub fn evaluate(&self, x: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (c, h) in self.coefficients.iter().zip(&self.modes) {
            acc += c * eigenfunction(h, x);
        }
        acc
    }

    /// Real-output evaluation: ±h mode pairs folded into cosine and sine
    /// terms with real coefficients. For real-valued data this equals the
    /// real part of [`Self::evaluate`] up to floating-point reordering.
    pub fn evaluate_real(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (k, h) in self.modes.iter().enumerate() {
            let partner = self
                .modes
                .iter()
                .position(|q| q.len() == h.len() && q.iter().zip(h).all(|(a, b)| *a == -*b));
            if let Some(j) = partner {
                if j < k {
                    continue; // handled together with its mate
                }
            }
            let mut dot = 0.0;
            for (hj, xj) in h.iter().zip(x) {
                dot += *hj as f64 * xj;
            }
            let (s, c) = (TAU * dot).sin_cos();
            let ck = self.coefficients[k];
            match partner {
                Some(j) if j == k => total += ck.re, // the zero frequency
                Some(j) => {
                    let cj = self.coefficients[j];
                    total += (ck.re + cj.re) * c - (ck.im - cj.im) * s;
                }
                None => total += ck.re * c - ck.im * s,
            }
        }
        total
    }
}

// ---------------------------------------------------------------------------
// worst-case error of the fitted linear map
// ---------------------------------------------------------------------------

/// Grid estimate of the worst-case L∞ error. `lower` is the exact grid
/// maximum of the power function over the first K ranked modes; `upper`
/// additionally charges every grid point the rigorous truncation remainder
/// tail(K)·(1 + Σ_i|u_i(x)|)², so the pair brackets the true power-function
/// maximum over the grid. The maximum over all of [0,1]^d can exceed both by
/// the grid resolution effect; `grid_per_dim` is the knob.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WorstCaseError {
    pub lower: f64,
    pub upper: f64,
    pub truncation: usize,
    pub grid_per_dim: usize,
    /// Spacing of the tensor grid (1/grid_per_dim).
    pub grid_spacing: f64,
    /// Largest truncation remainder charged to any grid point, in squared
    /// units.
    pub remainder_max: f64,
}

/// Odometer over the tensor grid {0,…,per_dim−1}^dim. The digit vector
/// starts at zero; `advance` returns false once every point has been
/// visited.
struct GridIterator {
    per_dim: usize,
    digits: Vec<usize>,
}

impl GridIterator {
    fn new(dim: usize, per_dim: usize) -> Self {
        GridIterator { per_dim, digits: vec![0; dim] }
    }

    fn advance(&mut self) -> bool {
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.per_dim {
                return true;
            }
            *d = 0;
        }
        false
    }
}

/// Worst-case L∞ error of the linear map defined by `fit` (or of the zero
/// algorithm when `fit` is None, which measures the initial error), over a
/// tensor grid with `grid_per_dim` points per coordinate. The ranked-mode
/// truncation starts at `initial_truncation` (default max(64, 2m)) and
/// doubles until the largest remainder is below 1e-3 of the largest grid
/// value, erroring out with the estimated requirement if the cap does not
/// suffice.
pub fn worst_case_error(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    fit: Option<&LeastSquaresFit>,
    grid_per_dim: usize,
    initial_truncation: Option<usize>,
) -> Result<WorstCaseError, RecoveryError> {
    let d = nodes.dim;
    let m = nodes.m;
    let n = nodes.len();
    if d > 3 {
        return Err(RecoveryError::UnsupportedDimension { dim: d });
    }
    if grid_per_dim < 2 {
        return Err(RecoveryError::BadConfig(format!(
            "grid resolution must be at least 2 points per dimension, got {grid_per_dim}"
        )));
    }
    if let Some(f) = fit {
        if f.pseudoinverse.cols != n {
            return Err(RecoveryError::MismatchedFit { expected: f.pseudoinverse.cols, got: n });
        }
    }
    let p = grid_per_dim;
    let grid_total = p.pow(d as u32);
    let roots: Vec<C64> = (0..p).map(|r| C64::from_polar(1.0, TAU * r as f64 / p as f64)).collect();

    // Head-mode values and the weight-sum Σ_i |u_i(x)| at every grid point;
    // both are independent of the truncation, so they are computed once.
    let head: Vec<EigenEntry> = spectrum.entries(m).to_vec();
    let mut head_vals = CMat::zeros(grid_total, m);
    let mut weight_sums = vec![0.0f64; grid_total];
    {
        // Plain transpose of the pseudoinverse so each node's weights sit in
        // one contiguous row.
        let pinv_t: Option<CMat> =
            fit.map(|f| CMat::from_fn(n, m, |i, k| f.pseudoinverse.at(k, i)));
        let mut it = GridIterator::new(d, p);
        let mut g = 0usize;
        loop {
            let row = head_vals.row_mut(g);
            for (k, e) in head.iter().enumerate() {
                row[k] = grid_eigenfunction(&e.index, &it.digits, &roots);
            }
            if let Some(pt) = &pinv_t {
                let mut s = 0.0;
                for i in 0..n {
                    let pr = pt.row(i);
                    let mut u = C64::new(0.0, 0.0);
                    for k in 0..m {
                        u += pr[k] * row[k];
                    }
                    s += u.norm();
                }
                weight_sums[g] = s;
            }
            g += 1;
            if !it.advance() {
                break;
            }
        }
    }

    let mut k_modes = initial_truncation.unwrap_or_else(|| (2 * m).max(64)).max(m).min(TRUNCATION_CAP);
    loop {
        let entries: Vec<EigenEntry> = spectrum.entries(k_modes).to_vec();
        let tail = spectrum.tail_sum(k_modes as u64);
        // W = N G⁺ᵀ, the K×m matrix sending head-mode values at x to the
        // predicted mode values of the recovery; its head block is the
        // identity by the reproduction property.
        let w = fit.map(|f| {
            let mut w = CMat::zeros(k_modes, m);
            let mut eta = vec![C64::new(0.0, 0.0); k_modes];
            let mut col = vec![C64::new(0.0, 0.0); m];
            for i in 0..n {
                let x = nodes.point(i);
                for (l, e) in entries.iter().enumerate() {
                    eta[l] = eigenfunction(&e.index, x);
                }
                for (k, c) in col.iter_mut().enumerate() {
                    *c = f.pseudoinverse.at(k, i);
                }
                for l in 0..k_modes {
                    let row = w.row_mut(l);
                    let yl = eta[l];
                    for k in 0..m {
                        row[k] += yl * col[k];
                    }
                }
            }
            w
        });
        // Per-mode grid residues for the root table.
        let residues: Vec<Vec<usize>> = entries
            .iter()
            .map(|e| e.index.iter().map(|&h| h.rem_euclid(p as i32) as usize).collect())
            .collect();

        let mut max_h2 = 0.0f64;
        let mut max_rem = 0.0f64;
        let mut max_combined = 0.0f64;
        let mut t = vec![C64::new(0.0, 0.0); k_modes];
        let mut it = GridIterator::new(d, p);
        let mut g = 0usize;
        loop {
            let hv = head_vals.row(g);
            if let Some(w) = &w {
                for (l, tl) in t.iter_mut().enumerate() {
                    let row = w.row(l);
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..m {
                        acc += row[k] * hv[k];
                    }
                    *tl = acc;
                }
            }
            let mut h2 = 0.0;
            for (l, e) in entries.iter().enumerate() {
                let mut idx = 0usize;
                for (rj, dj) in residues[l].iter().zip(&it.digits) {
                    idx = (idx + rj * dj) % p;
                }
                let diff = roots[idx] - t[l];
                h2 += e.value * diff.norm_sqr();
            }
            let rem = tail * (1.0 + weight_sums[g]) * (1.0 + weight_sums[g]);
            max_h2 = max_h2.max(h2);
            max_rem = max_rem.max(rem);
            max_combined = max_combined.max(h2 + rem);
            g += 1;
            if !it.advance() {
                break;
            }
        }

        if max_rem <= 1e-3 * max_h2 {
            return Ok(WorstCaseError {
                lower: max_h2.sqrt(),
                upper: max_combined.sqrt(),
                truncation: k_modes,
                grid_per_dim: p,
                grid_spacing: 1.0 / p as f64,
                remainder_max: max_rem,
            });
        }
        if k_modes >= TRUNCATION_CAP {
            let s_max = weight_sums.iter().cloned().fold(0.0f64, f64::max);
            let factor = (1.0 + s_max) * (1.0 + s_max);
            let target = 1e-3 * max_h2 / factor;
            let mut probe = k_modes;
            let required = loop {
                if spectrum.tail_sum(probe as u64) <= target {
                    break probe;
                }
                if probe >= TRUNCATION_SCAN_CAP {
                    break probe;
                }
                probe *= 2;
            };
            return Err(RecoveryError::TruncationCapExceeded {
                cap: TRUNCATION_CAP,
                required_at_least: required,
            });
        }
        k_modes = (k_modes * 2).min(TRUNCATION_CAP);
    }
}

fn grid_eigenfunction(index: &[i32], digits: &[usize], roots: &[C64]) -> C64 {
    let p = roots.len();
    let mut idx = 0usize;
    for (&h, &dj) in index.iter().zip(digits) {
        let r = h.rem_euclid(p as i32) as usize;
        idx = (idx + r * dj) % p;
    }
    roots[idx]
}

/// Power function value h(x)² of the fitted map at a single point, with the
/// truncation remainder bound, computed directly from the K-mode expansion
/// (no grid machinery). Returns (h², remainder).
pub fn power_function_at(
    spectrum: &mut Spectrum,
    nodes: &NodeSet,
    fit: Option<&LeastSquaresFit>,
    truncation: usize,
    x: &[f64],
) -> Result<(f64, f64), RecoveryError> {
    let d = nodes.dim;
    let m = nodes.m;
    let n = nodes.len();
    if x.len() != d {
        return Err(RecoveryError::BadPointDimension { expected: d, got: x.len() });
    }
    if let Some(f) = fit {
        if f.pseudoinverse.cols != n {
            return Err(RecoveryError::MismatchedFit { expected: f.pseudoinverse.cols, got: n });
        }
    }
    let k_modes = truncation.max(m);
    let entries: Vec<EigenEntry> = spectrum.entries(k_modes).to_vec();
    let tail = spectrum.tail_sum(k_modes as u64);
    // Weights u_i(x) of the linear map at x.
    let weights: Vec<C64> = match fit {
        None => vec![C64::new(0.0, 0.0); n],
        Some(f) => {
            let mut u = vec![C64::new(0.0, 0.0); n];
            for (k, e) in entries.iter().take(m).enumerate() {
                let hx = eigenfunction(&e.index, x);
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui += f.pseudoinverse.at(k, i) * hx;
                }
            }
            u
        }
    };
    let s: f64 = weights.iter().map(|u| u.norm()).sum();
    let mut h2 = 0.0;
    for e in &entries {
        let mut pred = C64::new(0.0, 0.0);
        if fit.is_some() {
            for (i, ui) in weights.iter().enumerate() {
                pred += eigenfunction(&e.index, nodes.point(i)) * ui;
            }
        }
        let diff = eigenfunction(&e.index, x) - pred;
        h2 += e.value * diff.norm_sqr();
    }
    Ok((h2, tail * (1.0 + s) * (1.0 + s)))
}

/// Worst-case L∞ error of the rank-m spectral projection. For this
/// eigenbasis the projection's power function is constant in x, so the
/// supremum equals (Σ_{k>m} λ_k)^{1/2} exactly; no grid is needed.
pub fn projection_worst_case_error(spectrum: &mut Spectrum, m: usize) -> f64 {
    spectrum.tail_sum(m as u64).sqrt()
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

/// When to measure the concentration deviation during an experiment. The
/// measurement costs a power iteration per trial, so the default measures
/// the first trial of every m and reuses nothing for the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationPolicy {
    Off,
    FirstTrial,
    All,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: KernelModel,
    pub m_values: Vec<usize>,
    /// Independent trials (seeds) per m.
    pub trials: usize,
    pub master_seed: u64,
    /// Node-count rule n = ceil(beta · m · ln(m+1)).
    pub beta: f64,
    pub subsample: bool,
    pub subsample_factor: f64,
    pub subsample_lower_bound: f64,
    pub grid_per_dim: usize,
    pub concentration: ConcentrationPolicy,
}

impl ExperimentConfig {
    pub fn new(model: KernelModel) -> Self {
        ExperimentConfig {
            model,
            m_values: vec![8, 16, 32],
            trials: 10,
            master_seed: 0,
            beta: 10.0,
            subsample: false,
            subsample_factor: 40.0,
            subsample_lower_bound: 0.5,
            grid_per_dim: 64,
            concentration: ConcentrationPolicy::FirstTrial,
        }
    }
}

/// One completed trial. `error` is the upper grid estimate (the headline
/// measured error), `ratio` compares it against the optimal-information
/// benchmark a_{m+1}, and `bound_constant` is the constant the error fits
/// against the half-tail envelope, which should stay stable across m.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub model_id: String,
    pub dim: usize,
    pub m: usize,
    pub n: usize,
    pub subset_size: Option<usize>,
    pub trial: usize,
    pub seed: u64,
    pub beta: f64,
    pub error: f64,
    pub error_lower: f64,
    /// a_{m+1}: the minimal worst-case error of any rank-m linear method.
    pub benchmark: f64,
    pub ratio: f64,
    /// Σ_{k≥⌊m/2⌋} σ_k², the envelope the bound chain compares against.
    pub bound_tail: f64,
    /// error² / bound_tail.
    pub bound_constant: f64,
    /// The sampling-theorem right-hand side with N(k) = k (see
    /// [`theorem_error_envelope`]).
    pub theorem_rhs: f64,
    pub concentration: Option<f64>,
    pub wall_ms: u64,
}

#[derive(Debug)]
pub struct TrialFailure {
    pub m: usize,
    pub trial: usize,
    pub error: RecoveryError,
}

/// All completed reports plus any per-trial failures (partial results are
/// kept so callers can flush what succeeded).
#[derive(Debug)]
pub struct ExperimentRun {
    pub reports: Vec<ExperimentReport>,
    pub failures: Vec<TrialFailure>,
}

/// Per-trial seed: mixes (master, m, trial) through a finalizer so distinct
/// trials get unrelated streams.
pub fn trial_seed(master: u64, m: usize, trial: usize) -> u64 {
    let mut z = master
        ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Node-count rule n = ceil(beta · m · ln(m+1)).
pub fn node_count(beta: f64, m: usize) -> usize {
    (beta * m as f64 * ((m + 1) as f64).ln()).ceil() as usize
}

/// The sampling-theorem error envelope at section m, with the cumulative
/// mode count N(k) specialized to k: the two competing terms
/// (N(m)/m)·Σ_{k>m}σ_k² and (1/m)Σ_{k≥⌊m/4⌋}N(4k)σ_k²/k·2m collapse onto
/// 8·Σ_{k≥⌊m/4⌋}σ_k², and the max form is kept so the collapse stays
/// checkable.
pub fn theorem_error_envelope(spectrum: &mut Spectrum, m: usize) -> f64 {
    let quarter = (m / 4).max(1);
    let first = spectrum.tail_sum(m as u64);
    let second = 8.0 * spectrum.tail_sum(quarter as u64 - 1);
    first.max(second)
}

/// Run the full experiment grid: for every (m, trial) pair draw nodes,
/// optionally subsample, fit the least-squares map on a probe sampled from
/// the first excluded mode, and measure the worst-case error of the fitted
/// linear map (which does not depend on the probe). Trials parallelize;
/// each owns an RNG stream derived from (master seed, m, trial).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, RecoveryError> {
    config.model.validate()?;
    if config.m_values.is_empty() {
        return Err(RecoveryError::BadConfig("need at least one m value".into()));
    }
    if config.m_values.iter().any(|&m| m < 1) {
        return Err(RecoveryError::BadConfig("every m must be >= 1".into()));
    }
    if config.trials < 1 {
        return Err(RecoveryError::BadConfig("need at least one trial".into()));
    }
    if !(config.beta >= 1.0) || !config.beta.is_finite() {
        return Err(RecoveryError::BadConfig(format!(
            "beta must be a finite value >= 1, got {}",
            config.beta
        )));
    }
    if config.grid_per_dim < 2 {
        return Err(RecoveryError::BadConfig(format!(
            "grid resolution must be at least 2, got {}",
            config.grid_per_dim
        )));
    }
    let pairs: Vec<(usize, usize)> = config
        .m_values
        .iter()
        .flat_map(|&m| (0..config.trials).map(move |t| (m, t)))
        .collect();
    let results: Vec<Result<ExperimentReport, TrialFailure>> = pairs
        .par_iter()
        .map(|&(m, trial)| {
            run_trial(config, m, trial).map_err(|error| TrialFailure { m, trial, error })
        })
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(f) => failures.push(f),
        }
    }
    Ok(ExperimentRun { reports, failures })
}

fn run_trial(
    config: &ExperimentConfig,
    m: usize,
    trial: usize,
) -> Result<ExperimentReport, RecoveryError> {
    let start = Instant::now();
    let mut spectrum = Spectrum::new(config.model.clone())?;
    let seed = trial_seed(config.master_seed, m, trial);
    let n = node_count(config.beta, m);
    let mut nodes = draw_nodes(&config.model, m, n, seed)?;
    let measure_concentration = match config.concentration {
        ConcentrationPolicy::Off => false,
        ConcentrationPolicy::FirstTrial => trial == 0,
        ConcentrationPolicy::All => true,
    };
    let concentration = if measure_concentration {
        let k = required_truncation(&mut spectrum, m)?;
        Some(concentration_check(&mut spectrum, &nodes, k)?.deviation)
    } else {
        None
    };
    let mut subset_size = None;
    let mut subset_indices = None;
    if config.subsample {
        let k = required_truncation(&mut spectrum, m)?;
        let sub = subsample(
            &mut spectrum,
            &nodes,
            k,
            config.subsample_factor,
            config.subsample_lower_bound,
        )?;
        subset_size = Some(sub.indices.len());
        nodes = nodes.restrict(&sub.indices);
        subset_indices = Some(sub.indices);
    }
    // Probe: the first excluded mode, the direction the recovery cannot
    // represent. The measured worst-case error is a property of the linear
    // map alone; the probe only exercises the solve path.
    let probe = spectrum.entries(m + 1).to_vec();
    let samples: Vec<C64> =
        (0..nodes.len()).map(|i| eigenfunction(&probe[m].index, nodes.point(i))).collect();
    let mut fit = fit_least_squares(&mut spectrum, &nodes, &samples)?;
    fit.subset = subset_indices;
    let wce = worst_case_error(&mut spectrum, &nodes, Some(&fit), config.grid_per_dim, None)?;
    let benchmark = approx_number(&mut spectrum, m as u64);
    let bound_tail = spectrum.tail_sum(((m / 2).max(1) - 1) as u64);
    let theorem_rhs = theorem_error_envelope(&mut spectrum, m);
    Ok(ExperimentReport {
        model_id: format!("{}(d={})", config.model.family_name(), config.model.d()),
        dim: config.model.d(),
        m,
        n,
        subset_size,
        trial,
        seed,
        beta: config.beta,
        error: wce.upper,
        error_lower: wce.lower,
        benchmark,
        ratio: wce.upper / benchmark,
        bound_tail,
        bound_constant: wce.upper * wce.upper / bound_tail,
        theorem_rhs,
        concentration,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceFamily;

    fn ek1() -> KernelModel {
        KernelModel::exp_korobov(
            1,
            SequenceFamily::Constant { c: 1.0 },
            SequenceFamily::Constant { c: 1.0 },
            0.5,
        )
        .unwrap()
    }

    fn wk2() -> KernelModel {
        KernelModel::weighted_korobov(
            2,
            SequenceFamily::Constant { c: 2.0 },
            SequenceFamily::PowerLaw { c: 1.0, beta: 3.0 },
        )
        .unwrap()
    }

    fn spectrum_of(model: &KernelModel) -> Spectrum {
        Spectrum::new(model.clone()).unwrap()
    }

    #[test]
    fn density_is_the_constant_one() {
        let model = ek1();
        assert_eq!(sampling_density(&model, 5, &[0.3]).unwrap(), 1.0);
        assert_eq!(sampling_density(&model, 1, &[0.999]).unwrap(), 1.0);
        let a = sampling_density(&model, 7, &[0.1]).unwrap();
        let b = sampling_density(&model, 7, &[0.9]).unwrap();
        assert_eq!(a / b, 1.0);
        assert!(matches!(
            sampling_density(&model, 0, &[0.1]),
            Err(RecoveryError::InvalidSection { m: 0 })
        ));
        assert!(matches!(
            sampling_density(&model, 3, &[0.1, 0.2]),
            Err(RecoveryError::BadPointDimension { .. })
        ));
    }

    #[test]
    fn draw_nodes_validates_and_reproduces() {
        let model = ek1();
        assert!(matches!(
            draw_nodes(&model, 4, 0, 1),
            Err(RecoveryError::BadNodeCount { n: 0, m: 4 })
        ));
        assert!(matches!(draw_nodes(&model, 0, 5, 1), Err(RecoveryError::BadNodeCount { .. })));
        let a = draw_nodes(&model, 4, 50, 123).unwrap();
        let b = draw_nodes(&model, 4, 50, 123).unwrap();
        assert_eq!(a.coords, b.coords);
        let c = draw_nodes(&model, 4, 50, 124).unwrap();
        assert_ne!(a.coords, c.coords);
        assert!(a.coords.iter().all(|&x| (0.0..1.0).contains(&x)));
        assert!(a.density.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn empirical_first_mode_mean_is_small() {
        let model = ek1();
        let n = 100_000;
        let nodes = draw_nodes(&model, 1, n, 7).unwrap();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += eigenfunction(&[1], nodes.point(i));
        }
        let mean = acc / n as f64;
        assert!(mean.norm() < 0.02, "|mean| = {}", mean.norm());
    }

    #[test]
    fn sample_vector_norms_match_the_diagonal() {
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 4, 30, 5).unwrap();
        let model = s.model().clone();
        let k = required_truncation(&mut s, 4).unwrap();
        let sv = SampleVectors::new(&mut s, &nodes, k).unwrap();
        let expected = sv.row_norm_sq();
        assert!(expected <= 2.0 * 4.0 + 1e-12, "row norm bound: {expected}");
        for i in 0..nodes.len() {
            let got: f64 = sv.rows.row(i).iter().map(|z| z.norm_sqr()).sum();
            assert!((got - expected).abs() <= 1e-10 * expected);
        }
        // γ_m agrees with its definition.
        let g = gamma_m(&mut s, 4);
        let direct = s.value_at(5).sqrt().max((s.tail_sum(4) / 4.0).sqrt());
        assert_eq!(g, direct);
        drop(model);
    }

    #[test]
    fn gamma_inequality_against_half_tail() {
        // max{σ_{m+1}², (1/m)Σ_{k>m}σ_k²} ≤ (2/m)Σ_{k≥⌊m/2⌋}σ_k².
        for model in [ek1(), wk2()] {
            let mut s = spectrum_of(&model);
            for m in [4usize, 8, 16, 32] {
                let lhs = s.value_at(m as u64 + 1).max(s.tail_sum(m as u64) / m as f64);
                let rhs = 2.0 / m as f64 * s.tail_sum((m as u64 / 2).max(1) - 1);
                assert!(
                    lhs <= rhs * (1.0 + 1e-12),
                    "m = {m}: lhs = {lhs:.6e}, rhs = {rhs:.6e}"
                );
            }
        }
    }

    #[test]
    fn concentration_requires_a_wide_enough_truncation() {
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 4, 100, 3).unwrap();
        let err = concentration_check(&mut s, &nodes, 5).unwrap_err();
        match err {
            RecoveryError::TruncationTooSmall { truncation: 5, required } => {
                assert!(required > 5);
                let report = concentration_check(&mut s, &nodes, required).unwrap();
                assert!(report.deviation.is_finite());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn concentration_head_column_is_exactly_one_for_m1() {
        // With m = 1 the single head mode is the zero frequency, so the
        // head column of every sample vector is 1 and the empirical head
        // entry matches its target exactly.
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 1, 40, 9).unwrap();
        let k = required_truncation(&mut s, 1).unwrap();
        let sv = SampleVectors::new(&mut s, &nodes, k).unwrap();
        let head_avg: f64 = (0..nodes.len()).map(|i| sv.rows.row(i)[0].norm_sqr()).sum::<f64>()
            / nodes.len() as f64;
        assert_eq!(head_avg, 1.0);
    }

    #[test]
    fn degenerate_equal_nodes_fail_to_concentrate() {
        let mut s = spectrum_of(&ek1());
        let n = 50;
        let nodes = NodeSet {
            dim: 1,
            m: 4,
            seed: 0,
            coords: vec![0.37; n],
            density: vec![1.0; n],
        };
        let k = required_truncation(&mut s, 4).unwrap();
        let report = concentration_check(&mut s, &nodes, k).unwrap();
        assert!(report.deviation > 0.5, "deviation = {}", report.deviation);
    }

    #[test]
    fn iid_nodes_concentrate_at_moderate_size() {
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 4, 10_000, 11).unwrap();
        let k = required_truncation(&mut s, 4).unwrap();
        let report = concentration_check(&mut s, &nodes, k).unwrap();
        assert!(report.deviation < 0.25, "deviation = {}", report.deviation);
        assert!(report.slack < 1e-2, "slack = {}", report.slack);
    }

    #[test]
    fn subsample_no_op_when_already_small() {
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 4, 100, 21).unwrap();
        let k = required_truncation(&mut s, 4).unwrap();
        let sub = subsample(&mut s, &nodes, k, 40.0, 0.5).unwrap();
        assert_eq!(sub.indices, (0..100).collect::<Vec<_>>());
        assert!(sub.certificate.head_min_eigenvalue >= 0.5 * 4.0);
    }

    #[test]
    fn subsample_greedy_meets_targets_and_certificate_recomputes() {
        let mut s = spectrum_of(&ek1());
        let m = 4;
        let nodes = draw_nodes(s.model(), m, 600, 2).unwrap();
        let k = required_truncation(&mut s, m).unwrap();
        let factor = 20.0;
        let sub = subsample(&mut s, &nodes, k, factor, 0.5).unwrap();
        let cap = (factor * m as f64) as usize;
        assert!(sub.indices.len() <= cap, "|J| = {}", sub.indices.len());
        assert!(
            sub.certificate.head_min_eigenvalue >= 0.5 * m as f64,
            "head = {}",
            sub.certificate.head_min_eigenvalue
        );
        assert!(sub.certificate.upper_ratio <= 4.0, "ratio = {}", sub.certificate.upper_ratio);
        let again = certificate_for(&mut s, &nodes, &sub.indices, k).unwrap();
        assert!(
            (again.head_min_eigenvalue - sub.certificate.head_min_eigenvalue).abs() <= 1e-9
        );
        assert!(
            (again.subset_max_eigenvalue - sub.certificate.subset_max_eigenvalue).abs() <= 1e-9
        );
        assert!((again.input_max_eigenvalue - sub.certificate.input_max_eigenvalue).abs() <= 1e-9);
    }

    #[test]
    fn fit_reproduces_the_head_span() {
        let mut s = spectrum_of(&ek1());
        let m = 4;
        let nodes = draw_nodes(s.model(), m, 60, 31).unwrap();
        let entries = s.entries(m + 1).to_vec();
        // f = third ranked eigenfunction: the solve returns the unit vector.
        let samples: Vec<C64> =
            (0..60).map(|i| eigenfunction(&entries[2].index, nodes.point(i))).collect();
        let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
        for (k, c) in fit.coefficients.iter().enumerate() {
            let want = if k == 2 { 1.0 } else { 0.0 };
            assert!((c - C64::new(want, 0.0)).norm() <= 1e-10, "k = {k}, c = {c}");
        }
        // f = 0 gives zero coefficients.
        let zeros = vec![C64::new(0.0, 0.0); 60];
        let fit0 = fit_least_squares(&mut s, &nodes, &zeros).unwrap();
        assert!(fit0.coefficients.iter().all(|c| c.norm() <= 1e-14));
        // Random elements of the head span reproduce to 1e-10 relative.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let coeff: Vec<C64> = (0..m)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let samples: Vec<C64> = (0..60)
                .map(|i| {
                    let x = nodes.point(i);
                    coeff
                        .iter()
                        .zip(&entries)
                        .map(|(c, e)| c * eigenfunction(&e.index, x))
                        .sum()
                })
                .collect();
            let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
            let scale = coeff.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            for (got, want) in fit.coefficients.iter().zip(&coeff) {
                assert!((got - want).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn fit_of_first_excluded_mode_matches_pseudoinverse_bound() {
        let mut s = spectrum_of(&ek1());
        let m = 4;
        let n = 400;
        let nodes = draw_nodes(s.model(), m, n, 17).unwrap();
        let entries = s.entries(m + 1).to_vec();
        let samples: Vec<C64> =
            (0..n).map(|i| eigenfunction(&entries[m].index, nodes.point(i))).collect();
        let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
        // Two computation paths for the same quantity.
        let direct = fit.pseudoinverse.matvec(&samples);
        for (a, b) in fit.coefficients.iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-10);
        }
        let norm: f64 = fit.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let sample_norm: f64 = samples.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let bound = 2.0 / fit.sv_min_normalized * sample_norm / (n as f64).sqrt();
        assert!(norm <= bound, "norm = {norm}, bound = {bound}");
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mut s = spectrum_of(&ek1());
        // All nodes equal: the design matrix has rank 1.
        let n = 10;
        let nodes = NodeSet {
            dim: 1,
            m: 4,
            seed: 0,
            coords: vec![0.2; n],
            density: vec![1.0; n],
        };
        let samples = vec![C64::new(1.0, 0.0); n];
        assert!(matches!(
            fit_least_squares(&mut s, &nodes, &samples),
            Err(RecoveryError::RankDeficient { .. })
        ));
    }

    #[test]
    fn null_algorithm_error_is_the_initial_error() {
        let mut s = spectrum_of(&ek1());
        let nodes = draw_nodes(s.model(), 4, 10, 3).unwrap();
        let trace = s.trace();
        let wce = worst_case_error(&mut s, &nodes, None, 32, None).unwrap();
        assert!((wce.upper - trace.sqrt()).abs() <= 1e-12 * trace.sqrt());
        assert!(wce.lower <= wce.upper);
        assert!(wce.lower >= (1.0 - 2e-3) * trace.sqrt());
    }

    #[test]
    fn grid_maximum_matches_pointwise_recomputation() {
        let mut s = spectrum_of(&ek1());
        let m = 4;
        let nodes = draw_nodes(s.model(), m, 40, 13).unwrap();
        let entries = s.entries(m + 1).to_vec();
        let samples: Vec<C64> =
            (0..40).map(|i| eigenfunction(&entries[m].index, nodes.point(i))).collect();
        let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
        let p = 16;
        let wce = worst_case_error(&mut s, &nodes, Some(&fit), p, None).unwrap();
        let mut max_h2 = 0.0f64;
        let mut max_combined = 0.0f64;
        for g in 0..p {
            let x = [g as f64 / p as f64];
            let (h2, rem) =
                power_function_at(&mut s, &nodes, Some(&fit), wce.truncation, &x).unwrap();
            max_h2 = max_h2.max(h2);
            max_combined = max_combined.max(h2 + rem);
        }
        assert!((wce.lower - max_h2.sqrt()).abs() <= 1e-10 * wce.lower.max(1e-300));
        assert!((wce.upper - max_combined.sqrt()).abs() <= 1e-10 * wce.upper.max(1e-300));
    }

    #[test]
    fn error_split_inequality_holds_on_random_draws() {
        let mut s = spectrum_of(&ek1());
        let m = 4;
        let n = 80;
        let nodes = draw_nodes(s.model(), m, n, 4).unwrap();
        let modes = 60usize;
        let entries = s.entries(modes).to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..3 {
            // Random element of the unit ball: coefficients c_l with
            // Σ |c_l|²/λ_l = 1.
            let mut coeff: Vec<C64> = (0..modes)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm_sq: f64 =
                coeff.iter().zip(&entries).map(|(c, e)| c.norm_sqr() / e.value).sum();
            let scale = norm_sq.sqrt();
            for c in coeff.iter_mut() {
                *c /= scale;
            }
            let eval = |x: &[f64], cs: &[C64], lo: usize, hi: usize| -> C64 {
                cs[lo..hi]
                    .iter()
                    .zip(&entries[lo..hi])
                    .map(|(c, e)| c * eigenfunction(&e.index, x))
                    .sum()
            };
            let samples: Vec<C64> =
                (0..n).map(|i| eval(nodes.point(i), &coeff, 0, modes)).collect();
            let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
            let grid = 128;
            let mut lhs = 0.0f64;
            let mut proj_err = 0.0f64;
            let mut mid_err = 0.0f64;
            for g in 0..grid {
                let x = [g as f64 / grid as f64];
                let f_val = eval(&x, &coeff, 0, modes);
                let p_val = eval(&x, &coeff, 0, m);
                let a_val = fit.evaluate(&x);
                lhs = lhs.max((f_val - a_val).norm());
                proj_err = proj_err.max((f_val - p_val).norm());
                mid_err = mid_err.max((p_val - a_val).norm());
            }
            assert!(
                lhs <= 2.0 * proj_err.max(mid_err) + 1e-9,
                "lhs = {lhs}, split = {}",
                proj_err.max(mid_err)
            );
        }
    }

    #[test]
    fn projection_error_sits_inside_its_bracket() {
        for model in [ek1(), wk2()] {
            let mut s = spectrum_of(&model);
            for m in [8usize, 16] {
                let err = projection_worst_case_error(&mut s, m);
                let lower = approx_number(&mut s, m as u64);
                let upper = (8.0 * s.tail_sum((m as u64 / 4) - 1)).sqrt();
                assert!(err >= lower - 1e-6);
                assert!(err <= upper + 1e-6, "m = {m}: err = {err}, upper = {upper}");
            }
        }
    }

    #[test]
    fn evaluate_real_agrees_with_complex_evaluation() {
        let mut s = spectrum_of(&ek1());
        let m = 5;
        let n = 50;
        let nodes = draw_nodes(s.model(), m, n, 6).unwrap();
        // Real-valued samples: cos of the first nonzero mode.
        let entries = s.entries(m).to_vec();
        let samples: Vec<C64> = (0..n)
            .map(|i| {
                let v = eigenfunction(&entries[1].index, nodes.point(i));
                C64::new(v.re, 0.0)
            })
            .collect();
        let fit = fit_least_squares(&mut s, &nodes, &samples).unwrap();
        for g in 0..17 {
            let x = [g as f64 / 17.0];
            let complex = fit.evaluate(&x).re;
            let real = fit.evaluate_real(&x);
            assert!((complex - real).abs() <= 1e-12 * (1.0 + complex.abs()));
        }
    }

    #[test]
    fn experiment_reports_are_deterministic_and_sane() {
        let config = ExperimentConfig {
            m_values: vec![4, 8],
            trials: 2,
            master_seed: 42,
            grid_per_dim: 32,
            ..ExperimentConfig::new(ek1())
        };
        let run1 = run_experiment(&config).unwrap();
        let run2 = run_experiment(&config).unwrap();
        assert!(run1.failures.is_empty());
        assert_eq!(run1.reports.len(), 4);
        for (a, b) in run1.reports.iter().zip(&run2.reports) {
            assert_eq!(a.error, b.error);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.ratio, b.ratio);
        }
        let mut s = spectrum_of(&ek1());
        for rep in &run1.reports {
            assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
            assert!(rep.error >= rep.error_lower);
            assert!(rep.bound_constant.is_finite() && rep.bound_constant > 0.0);
            assert_eq!(rep.n, node_count(10.0, rep.m));
            assert!(rep.subset_size.is_none());
            // The first trial of each m measures concentration, the rest skip.
            assert_eq!(rep.concentration.is_some(), rep.trial == 0);
            // With N(k) = k the envelope collapses onto the quarter tail.
            let direct = 8.0 * s.tail_sum((rep.m as u64 / 4).max(1) - 1);
            assert_eq!(rep.theorem_rhs, direct);
        }
    }

    #[test]
    fn trial_seeds_are_pairwise_distinct() {
        let mut seen = std::collections::HashSet::new();
        for m in [4usize, 8, 16, 32] {
            for t in 0..10 {
                assert!(seen.insert(trial_seed(7, m, t)));
            }
        }
    }
}
