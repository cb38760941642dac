//! Validated kernel models for the two supported families.
//!
//! Both families live on the torus [0,1]^d with eigenfunctions e^{2πi k·x};
//! the eigenvalue attached to a frequency k ∈ Z^d factors over coordinates:
//!
//! - Weighted Korobov: factor 1 at h = 0 and g_j·|h|^{-2 r_j} at |h| ≥ 1,
//!   with 1 ≥ g_1 ≥ g_2 ≥ … > 0 and 1/2 < r_1 ≤ r_2 ≤ ….
//! - Exponential Korobov: factor ω^{a_j·|h|^{b_j}} (so 1 at h = 0), with
//!   0 < a_1 ≤ a_2 ≤ …, inf_j b_j > 0, and ω ∈ (0,1).
//!
//! The h = 0 factor is 1 by convention in both families, so the largest
//! eigenvalue is exactly 1 and per-coordinate factors are nonincreasing in
//! |h|. Coordinate sums Σ_{h∈Z} factor(h) are what the trace needs:
//! 1 + 2 g_j ζ(2 r_j) for Korobov, 1 + 2 Σ_{h≥1} ω^{a_j h^{b_j}} for the
//! exponential family.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequence::{SequenceError, SequenceFamily, SequenceRole};
use crate::zeta::zeta;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("dimension must satisfy 1 <= d <= {max}, got {d}", max = MAX_DIMENSION)]
    InvalidDimension { d: usize },
    #[error("omega must lie strictly inside (0, 1), got {omega}")]
    OmegaOutOfRange { omega: f64 },
    #[error("coordinate sum for coordinate {coord} did not converge within {cap} terms (b too close to zero)")]
    CoordinateSumDiverged { coord: usize, cap: u64 },
}

/// Upper sanity bound on the dimension.
pub const MAX_DIMENSION: usize = 1 << 24;

/// Term cap for the exponential-family coordinate sums.
const COORD_SUM_TERM_CAP: u64 = 10_000_000;

/// A validated kernel model. Construct via [`KernelModel::weighted_korobov`]
/// or [`KernelModel::exp_korobov`]; the serde representation tags the family
/// so model files read naturally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelModel {
    WeightedKorobov { d: usize, r: SequenceFamily, g: SequenceFamily },
    ExpKorobov { d: usize, a: SequenceFamily, b: SequenceFamily, omega: f64 },
}

impl KernelModel {
    pub fn weighted_korobov(
        d: usize,
        r: SequenceFamily,
        g: SequenceFamily,
    ) -> Result<Self, ModelError> {
        let model = KernelModel::WeightedKorobov { d, r, g };
        model.validate()?;
        Ok(model)
    }

    pub fn exp_korobov(
        d: usize,
        a: SequenceFamily,
        b: SequenceFamily,
        omega: f64,
    ) -> Result<Self, ModelError> {
        let model = KernelModel::ExpKorobov { d, a, b, omega };
        model.validate()?;
        Ok(model)
    }

    /// Re-run all invariant checks (constructors call this).
    pub fn validate(&self) -> Result<(), ModelError> {
        let d = self.d();
        if d == 0 || d > MAX_DIMENSION {
            return Err(ModelError::InvalidDimension { d });
        }
        match self {
            KernelModel::WeightedKorobov { r, g, .. } => {
                r.validate_for_role(SequenceRole::KorobovSmoothness)?;
                g.validate_for_role(SequenceRole::KorobovWeight)?;
                check_prefix_monotone(r, d, false, SequenceRole::KorobovSmoothness)?;
                check_prefix_monotone(g, d, true, SequenceRole::KorobovWeight)?;
            }
            KernelModel::ExpKorobov { a, b, omega, .. } => {
                if !omega.is_finite() || *omega <= 0.0 || *omega >= 1.0 {
                    return Err(ModelError::OmegaOutOfRange { omega: *omega });
                }
                a.validate_for_role(SequenceRole::ExpWeight)?;
                b.validate_for_role(SequenceRole::ExpExponent)?;
                check_prefix_monotone(a, d, false, SequenceRole::ExpWeight)?;
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        match self {
            KernelModel::WeightedKorobov { d, .. } | KernelModel::ExpKorobov { d, .. } => *d,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelModel::WeightedKorobov { .. } => "weighted_korobov",
            KernelModel::ExpKorobov { .. } => "exp_korobov",
        }
    }

    /// Per-coordinate eigenvalue factor at frequency magnitude h ≥ 0 for
    /// coordinate `coord` (1-based). Equals 1 at h = 0 and is nonincreasing
    /// in h.
    pub fn coordinate_factor(&self, coord: usize, h: u64) -> f64 {
        debug_assert!(coord >= 1 && coord <= self.d());
        if h == 0 {
            return 1.0;
        }
        let hf = h as f64;
        match self {
            KernelModel::WeightedKorobov { r, g, .. } => {
                let rj = r.eval(coord as u64);
                let gj = g.eval(coord as u64);
                gj * hf.powf(-2.0 * rj)
            }
            KernelModel::ExpKorobov { a, b, omega, .. } => {
                let aj = a.eval(coord as u64);
                let bj = b.eval(coord as u64);
                omega.powf(aj * hf.powf(bj))
            }
        }
    }

    /// Σ_{h∈Z} coordinate_factor(coord, |h|): closed form for Korobov,
    /// adaptively truncated series for the exponential family.
    pub fn coordinate_sum(&self, coord: usize) -> Result<f64, ModelError> {
        match self {
            KernelModel::WeightedKorobov { r, g, .. } => {
                let rj = r.eval(coord as u64);
                let gj = g.eval(coord as u64);
                Ok(1.0 + 2.0 * gj * zeta(2.0 * rj))
            }
            KernelModel::ExpKorobov { .. } => {
                let mut sum = 0.0f64;
                let mut comp = 0.0f64;
                for h in 1..=COORD_SUM_TERM_CAP {
                    let term = self.coordinate_factor(coord, h);
                    let t = sum + term;
                    comp += if sum.abs() >= term.abs() {
                        (sum - t) + term
                    } else {
                        (term - t) + sum
                    };
                    sum = t;
                    if term < 1e-18 * (sum + comp) {
                        return Ok(1.0 + 2.0 * (sum + comp));
                    }
                }
                Err(ModelError::CoordinateSumDiverged { coord, cap: COORD_SUM_TERM_CAP })
            }
        }
    }

    /// The model whose eigenvalues are the p-th powers (p ≥ 1) of this
    /// model's. Both families are closed under entrywise powering:
    /// Korobov maps (r, g) to (p·r, g^p), the exponential family maps a to
    /// p·a. Used by the L_q error bounds.
    pub fn powered(&self, p: f64) -> Result<Self, ModelError> {
        assert!(p >= 1.0 && p.is_finite(), "powered requires p >= 1, got {p}");
        match self {
            KernelModel::WeightedKorobov { d, r, g } => {
                KernelModel::weighted_korobov(*d, seq_scale(r, p), seq_pow(g, p))
            }
            KernelModel::ExpKorobov { d, a, b, omega } => {
                KernelModel::exp_korobov(*d, seq_scale(a, p), b.clone(), *omega)
            }
        }
    }
}

/// Exact monotonicity check over the first `d` entries (the coordinates the
/// model actually uses); `decreasing` selects the direction.
fn check_prefix_monotone(
    seq: &SequenceFamily,
    d: usize,
    decreasing: bool,
    role: SequenceRole,
) -> Result<(), ModelError> {
    let mut prev = seq.eval(1);
    for j in 2..=d as u64 {
        let v = seq.eval(j);
        let bad = if decreasing { v > prev } else { v < prev };
        if bad {
            return Err(SequenceError::ConstraintViolated {
                role: role.name(),
                constraint: if decreasing { "nonincreasing" } else { "nondecreasing" },
                j,
            }
            .into());
        }
        prev = v;
    }
    Ok(())
}

/// Entrywise p-th power of a sequence, staying inside the closed-form kinds.
fn seq_pow(seq: &SequenceFamily, p: f64) -> SequenceFamily {
    match seq {
        SequenceFamily::Constant { c } => SequenceFamily::Constant { c: c.powf(p) },
        SequenceFamily::PowerLaw { c, beta } => {
            SequenceFamily::PowerLaw { c: c.powf(p), beta: beta * p }
        }
        SequenceFamily::LogPower { c, gamma, beta } => {
            SequenceFamily::LogPower { c: c.powf(p), gamma: gamma * p, beta: beta * p }
        }
        SequenceFamily::ExpGrowth { c, rho } => {
            SequenceFamily::ExpGrowth { c: c.powf(p), rho: rho.powf(p) }
        }
        SequenceFamily::Tabulated { values } => {
            SequenceFamily::Tabulated { values: values.iter().map(|v| v.powf(p)).collect() }
        }
    }
}

/// Entrywise scaling by k > 0, staying inside the closed-form kinds.
fn seq_scale(seq: &SequenceFamily, k: f64) -> SequenceFamily {
    match seq {
        SequenceFamily::Constant { c } => SequenceFamily::Constant { c: c * k },
        SequenceFamily::PowerLaw { c, beta } => SequenceFamily::PowerLaw { c: c * k, beta: *beta },
        SequenceFamily::LogPower { c, gamma, beta } => {
            SequenceFamily::LogPower { c: c * k, gamma: *gamma, beta: *beta }
        }
        SequenceFamily::ExpGrowth { c, rho } => {
            SequenceFamily::ExpGrowth { c: c * k, rho: *rho }
        }
        SequenceFamily::Tabulated { values } => {
            SequenceFamily::Tabulated { values: values.iter().map(|v| v * k).collect() }
        }
    }
}
