//! Tractability classification for the two kernel families.
//!
//! A tractability notion asks how the information complexity n(ε, d) may
//! grow jointly in the accuracy ε and the dimension d. For the families in
//! [`crate::model`] every notion reduces to an analytic condition on the
//! weight sequences alone, and those conditions are decided here
//! symbolically for closed-form sequences. Tabulated sequences carry only
//! finite evidence, so they route through [`estimate_liminf`] and produce
//! `Unknown` whenever the window is inconclusive.
//!
//! Verdicts are tri-state. `Unknown` shows up in three honest situations:
//! a limit that sits exactly on its decision threshold, a combination with
//! no stated criterion that the implication lattice cannot resolve, and
//! tabulated data whose trend does not justify extrapolation.

use serde::{Deserialize, Serialize};

use crate::complexity::Criterion;
use crate::sequence::{SequenceError, SequenceFamily, SequenceRole};

/// Error-decay scale: algebraic notions measure growth against powers of
/// 1/ε, exponential notions against powers of (1 + ln 1/ε).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Alg,
    Exp,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Alg => "alg",
            Mode::Exp => "exp",
        }
    }
}

/// Tractability notion. The core chain SPT ⇒ PT ⇒ QPT ⇒ UWT ⇒ WT is
/// ordered from strongest to weakest; (s,t)-weak tractability is a
/// two-parameter refinement of WT (t weights the dimension, s the
/// accuracy).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Spt,
    Pt,
    Qpt,
    Uwt,
    Wt,
    StWt { s: f64, t: f64 },
}

impl Notion {
    pub fn name(self) -> &'static str {
        match self {
            Notion::Spt => "spt",
            Notion::Pt => "pt",
            Notion::Qpt => "qpt",
            Notion::Uwt => "uwt",
            Notion::Wt => "wt",
            Notion::StWt { .. } => "st_wt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holds {
    Yes,
    No,
    Unknown,
}

impl Holds {
    pub fn name(self) -> &'static str {
        match self {
            Holds::Yes => "yes",
            Holds::No => "no",
            Holds::Unknown => "unknown",
        }
    }
}

/// The evaluated analytic quantity behind a verdict (a liminf, limit, or
/// partial-sum ratio) plus a human-readable account of the decision.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub quantity: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TractabilityVerdict {
    pub notion: Notion,
    pub mode: Mode,
    pub criterion: Criterion,
    pub holds: Holds,
    pub certificate: Certificate,
}

/// How to resolve the uniform-weak-tractability liminf when it lands
/// exactly on its threshold. The two source theorems disagree there (one
/// states the condition with ≥, the other with >), so the default refuses
/// to pick a side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UwtBoundary {
    #[default]
    Unknown,
    Inclusive,
    Strict,
}

#[derive(Clone, Debug, Default)]
pub struct ClassifierOptions {
    pub uwt_boundary: UwtBoundary,
    /// Inclusive 1-based j-range used when estimating limits from
    /// tabulated data; defaults to the last three quarters of the table.
    pub tabulated_window: Option<(usize, usize)>,
}

#[derive(Debug, thiserror::Error)]
pub enum TractabilityError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("(s,t) parameters must be positive, got s={s}, t={t}")]
    InvalidStParameters { s: f64, t: f64 },
    #[error("omega must lie in (0,1), got {0}")]
    InvalidOmega(f64),
    #[error("estimation window holds {len} points but at least 8 are required")]
    WindowTooShort { len: usize },
    #[error("window [{start}, {end}] exceeds the tabulated length {len}")]
    WindowOutOfRange { start: usize, end: usize, len: usize },
    #[error("transform {0} needs ln j, so the window must start at j >= 2")]
    WindowNeedsJAtLeastTwo(String),
    #[error("implication lattice violated: {stronger} = yes but {weaker} = no")]
    LatticeViolation { stronger: &'static str, weaker: &'static str },
}

// ---------------------------------------------------------------------------
// numeric liminf estimation for tabulated sequences
// ---------------------------------------------------------------------------

/// Named functionals of a sequence value v at position j; each is the
/// left-hand side of one of the analytic tractability conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    /// ln(1/v) / ln j
    LnInvOverLnJ,
    /// v / ln j
    OverLnJ,
    /// ln(v) / j
    LnOverJ,
    /// ln(v) / ln j
    LnOverLnJ,
    /// v itself
    Identity,
    /// j^e · v · max(1, ln(1/v))
    PolyWeightedLnInv { exponent: f64 },
    /// j^e · v · ω^v
    PolyWeightedOmegaPow { exponent: f64, omega: f64 },
    /// v / j^e
    OverPolyJ { exponent: f64 },
}

impl Transform {
    pub fn apply(&self, j: usize, v: f64) -> f64 {
        let jf = j as f64;
        match *self {
            Transform::LnInvOverLnJ => (1.0 / v).ln() / jf.ln(),
            Transform::OverLnJ => v / jf.ln(),
            Transform::LnOverJ => v.ln() / jf,
            Transform::LnOverLnJ => v.ln() / jf.ln(),
            Transform::Identity => v,
            Transform::PolyWeightedLnInv { exponent } => {
                jf.powf(exponent) * v * (1.0 / v).ln().max(1.0)
            }
            Transform::PolyWeightedOmegaPow { exponent, omega } => {
                jf.powf(exponent) * v * omega.powf(v)
            }
            Transform::OverPolyJ { exponent } => v / jf.powf(exponent),
        }
    }

    fn needs_ln_j(&self) -> bool {
        matches!(
            self,
            Transform::LnInvOverLnJ | Transform::OverLnJ | Transform::LnOverLnJ
        )
    }

    fn label(&self) -> String {
        match *self {
            Transform::LnInvOverLnJ => "ln(1/v_j)/ln j".into(),
            Transform::OverLnJ => "v_j/ln j".into(),
            Transform::LnOverJ => "ln(v_j)/j".into(),
            Transform::LnOverLnJ => "ln(v_j)/ln j".into(),
            Transform::Identity => "v_j".into(),
            Transform::PolyWeightedLnInv { exponent } => {
                format!("j^{exponent:.4}·v_j·ln+(1/v_j)")
            }
            Transform::PolyWeightedOmegaPow { exponent, omega } => {
                format!("j^{exponent:.4}·v_j·{omega:.4}^v_j")
            }
            Transform::OverPolyJ { exponent } => format!("v_j/j^{exponent:.4}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Rising,
    Falling,
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateConfidence {
    High,
    Low,
}

#[derive(Clone, Debug)]
pub struct LiminfEstimate {
    /// Suffix-minimum estimate of the liminf over the window.
    pub estimate: f64,
    pub trend: Trend,
    pub confidence: EstimateConfidence,
    /// Asymptote of an `α + β/ln j` fit when that model explains the data
    /// well; a better extrapolation than the raw suffix minimum.
    pub asymptote: Option<f64>,
}

/// Estimate the liminf of `transform` applied to a tabulated sequence over
/// a 1-based inclusive j-window. The estimate is the minimum over the
/// second half of the window (a running suffix minimum); the trend comes
/// from fitting `α + β/ln j`, which matches the convergence shape of every
/// transform used here.
pub fn estimate_liminf(
    values: &[f64],
    transform: &Transform,
    window: (usize, usize),
) -> Result<LiminfEstimate, TractabilityError> {
    let (start, end) = window;
    if start < 1 || end > values.len() || start > end {
        return Err(TractabilityError::WindowOutOfRange { start, end, len: values.len() });
    }
    if transform.needs_ln_j() && start < 2 {
        return Err(TractabilityError::WindowNeedsJAtLeastTwo(transform.label()));
    }
    let len = end - start + 1;
    if len < 8 {
        return Err(TractabilityError::WindowTooShort { len });
    }
    let ts: Vec<(usize, f64)> =
        (start..=end).map(|j| (j, transform.apply(j, values[j - 1]))).collect();

    let min_from = |from: usize| -> f64 {
        ts[from..].iter().map(|&(_, t)| t).fold(f64::INFINITY, f64::min)
    };
    let estimate = min_from(len / 2);
    let quarter_min = min_from(3 * len / 4);

    // Least-squares fit t = alpha + beta * (1/ln j); j is clamped to 2 so a
    // window touching j = 1 cannot produce a leverage point at ln 1 = 0.
    let xs: Vec<f64> = ts.iter().map(|&(j, _)| 1.0 / (j.max(2) as f64).ln()).collect();
    let n = len as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_t = ts.iter().map(|&(_, t)| t).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxt = 0.0;
    for (x, &(_, t)) in xs.iter().zip(ts.iter()) {
        sxx += (x - mean_x) * (x - mean_x);
        sxt += (x - mean_x) * (t - mean_t);
    }
    let beta = if sxx > 0.0 { sxt / sxx } else { 0.0 };
    let alpha = mean_t - beta * mean_x;
    let mut ss_res = 0.0;
    for (x, &(_, t)) in xs.iter().zip(ts.iter()) {
        let fit = alpha + beta * x;
        ss_res += (t - fit) * (t - fit);
    }
    let rms = (ss_res / n).sqrt();
    let scale = mean_t.abs().max(1.0);
    let good_fit = rms <= 0.01 * scale;

    // Predicted drift over the window decides the trend, but only when the
    // slope stands out from the residual scatter (an oscillating sequence
    // must read as flat, not as a drift).
    let drift = beta * (xs.last().unwrap() - xs[0]);
    let se_beta = if sxx > 0.0 { rms / sxx.sqrt() } else { 0.0 };
    let significant = beta.abs() > 2.0 * se_beta;
    let trend = if !significant || drift.abs() <= 0.02 * scale {
        Trend::Flat
    } else if drift > 0.0 {
        Trend::Falling
    } else {
        Trend::Rising
    };

    let stabilized = (estimate - quarter_min).abs() <= 0.01 * estimate.abs().max(1.0);
    let confidence = if len >= 32 && (good_fit || (trend == Trend::Flat && stabilized)) {
        EstimateConfidence::High
    } else {
        EstimateConfidence::Low
    };

    Ok(LiminfEstimate {
        estimate,
        trend,
        confidence,
        asymptote: if good_fit { Some(alpha) } else { None },
    })
}

// ---------------------------------------------------------------------------
// symbolic limits per sequence kind
// ---------------------------------------------------------------------------

/// Limit of a nonnegative analytic quantity: either a finite value or +∞.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Lim {
    Val(f64),
    PosInf,
}

/// liminf of ln(1/g_j)/ln j for a nonincreasing weight sequence.
fn liminf_ln_inv_over_ln_j(g: &SequenceFamily) -> Option<Lim> {
    match *g {
        SequenceFamily::Constant { .. } => Some(Lim::Val(0.0)),
        SequenceFamily::PowerLaw { beta, .. } => Some(Lim::Val(beta)),
        SequenceFamily::LogPower { beta, .. } => Some(Lim::Val(beta)),
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho < 1.0 { Lim::PosInf } else { Lim::Val(0.0) })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// liminf of a_j/ln j for a nondecreasing weight sequence.
fn liminf_over_ln_j(a: &SequenceFamily) -> Option<Lim> {
    match *a {
        SequenceFamily::Constant { .. } => Some(Lim::Val(0.0)),
        SequenceFamily::PowerLaw { beta, .. } => {
            Some(if beta < 0.0 { Lim::PosInf } else { Lim::Val(0.0) })
        }
        SequenceFamily::LogPower { c, gamma, beta } => Some(if beta < 0.0 {
            Lim::PosInf
        } else if gamma > 1.0 {
            Lim::PosInf
        } else if gamma == 1.0 {
            Lim::Val(c)
        } else {
            Lim::Val(0.0)
        }),
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho > 1.0 { Lim::PosInf } else { Lim::Val(0.0) })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// liminf of ln(a_j)/j.
fn liminf_ln_over_j(a: &SequenceFamily) -> Option<Lim> {
    match *a {
        SequenceFamily::Constant { .. }
        | SequenceFamily::PowerLaw { .. }
        | SequenceFamily::LogPower { .. } => Some(Lim::Val(0.0)),
        SequenceFamily::ExpGrowth { rho, .. } => Some(Lim::Val(rho.ln())),
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// limit of ln(a_j)/ln j (exists for every closed-form kind).
fn lim_ln_over_ln_j(a: &SequenceFamily) -> Option<Lim> {
    match *a {
        SequenceFamily::Constant { .. } => Some(Lim::Val(0.0)),
        SequenceFamily::PowerLaw { beta, .. } => Some(Lim::Val(-beta)),
        SequenceFamily::LogPower { beta, .. } => Some(Lim::Val(-beta)),
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho > 1.0 { Lim::PosInf } else { Lim::Val(0.0) })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// limit of the sequence itself.
fn lim_value(seq: &SequenceFamily) -> Option<Lim> {
    match *seq {
        SequenceFamily::Constant { c } => Some(Lim::Val(c)),
        SequenceFamily::PowerLaw { c, beta } => Some(if beta > 0.0 {
            Lim::Val(0.0)
        } else if beta == 0.0 {
            Lim::Val(c)
        } else {
            Lim::PosInf
        }),
        SequenceFamily::LogPower { c, gamma, beta } => Some(if beta > 0.0 {
            Lim::Val(0.0)
        } else if beta < 0.0 {
            Lim::PosInf
        } else if gamma > 0.0 {
            Lim::PosInf
        } else if gamma == 0.0 {
            Lim::Val(c)
        } else {
            Lim::Val(0.0)
        }),
        SequenceFamily::ExpGrowth { c, rho } => Some(if rho < 1.0 {
            Lim::Val(0.0)
        } else if rho == 1.0 {
            Lim::Val(c)
        } else {
            Lim::PosInf
        }),
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// limit of j^e · g_j · ln+(1/g_j) with e > 0, for nonincreasing g.
fn lim_poly_weighted_ln_inv(g: &SequenceFamily, e: f64) -> Option<Lim> {
    match *g {
        SequenceFamily::Constant { .. } => Some(Lim::PosInf),
        SequenceFamily::PowerLaw { beta, .. } => {
            Some(if beta > e { Lim::Val(0.0) } else { Lim::PosInf })
        }
        SequenceFamily::LogPower { c, gamma, beta } => Some(if beta > e {
            Lim::Val(0.0)
        } else if beta < e {
            Lim::PosInf
        } else if gamma + 1.0 > 0.0 {
            Lim::PosInf
        } else if gamma + 1.0 == 0.0 {
            Lim::Val(c * beta)
        } else {
            Lim::Val(0.0)
        }),
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho < 1.0 { Lim::Val(0.0) } else { Lim::PosInf })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// limit of j^e · a_j · ω^{a_j} with e > 0, for nondecreasing a.
fn lim_poly_weighted_omega_pow(a: &SequenceFamily, e: f64, omega: f64) -> Option<Lim> {
    let cw = -omega.ln(); // decay rate of ω^x = e^{-cw·x}
    match *a {
        SequenceFamily::Constant { .. } => Some(Lim::PosInf),
        SequenceFamily::PowerLaw { beta, .. } => {
            Some(if beta < 0.0 { Lim::Val(0.0) } else { Lim::PosInf })
        }
        SequenceFamily::LogPower { c, gamma, beta } => Some(if beta < 0.0 {
            Lim::Val(0.0)
        } else if gamma > 1.0 {
            Lim::Val(0.0)
        } else if gamma == 1.0 && c * cw > e {
            Lim::Val(0.0)
        } else {
            // gamma = 1 at or below the exponent threshold, or gamma < 1:
            // the decay of ω^{a_j} is too slow against j^e.
            Lim::PosInf
        }),
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho > 1.0 { Lim::Val(0.0) } else { Lim::PosInf })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// limit of a_j / j^q with q > 0, for nondecreasing a.
fn lim_over_poly_j(a: &SequenceFamily, q: f64) -> Option<Lim> {
    match *a {
        SequenceFamily::Constant { .. } => Some(Lim::Val(0.0)),
        SequenceFamily::PowerLaw { c, beta } => {
            let p = -beta;
            Some(if p > q {
                Lim::PosInf
            } else if p == q {
                Lim::Val(c)
            } else {
                Lim::Val(0.0)
            })
        }
        SequenceFamily::LogPower { c, gamma, beta } => {
            let p = -beta;
            Some(if p > q {
                Lim::PosInf
            } else if p == q {
                if gamma > 0.0 {
                    Lim::PosInf
                } else if gamma == 0.0 {
                    Lim::Val(c)
                } else {
                    Lim::Val(0.0)
                }
            } else {
                Lim::Val(0.0)
            })
        }
        SequenceFamily::ExpGrowth { rho, .. } => {
            Some(if rho > 1.0 { Lim::PosInf } else { Lim::Val(0.0) })
        }
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// Does Σ 1/b_j converge?
fn sum_inv_converges(b: &SequenceFamily) -> Option<bool> {
    match *b {
        SequenceFamily::Constant { .. } => Some(false),
        SequenceFamily::PowerLaw { beta, .. } => Some(-beta > 1.0),
        SequenceFamily::LogPower { gamma, beta, .. } => {
            let p = -beta;
            Some(if p > 1.0 {
                true
            } else if p == 1.0 {
                gamma > 1.0
            } else {
                false
            })
        }
        SequenceFamily::ExpGrowth { rho, .. } => Some(rho > 1.0),
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// Is sup_d (1/ln+ d) Σ_{j≤d} g_j ln+(1/g_j) finite?
fn bounded_log_average_wk(g: &SequenceFamily) -> Option<bool> {
    match *g {
        SequenceFamily::Constant { .. } => Some(false),
        SequenceFamily::PowerLaw { beta, .. } => Some(beta > 1.0),
        SequenceFamily::LogPower { gamma, beta, .. } => Some(if beta > 1.0 {
            true
        } else if beta == 1.0 {
            // terms behave like (ln j)^{gamma+1}/j; the running average
            // against ln d stays bounded exactly when gamma <= -1.
            gamma <= -1.0
        } else {
            false
        }),
        SequenceFamily::ExpGrowth { rho, .. } => Some(rho < 1.0),
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// Is sup_d (1/ln+ d) Σ_{j≤d} a_j ω^{a_j} finite?
fn bounded_log_average_ek(a: &SequenceFamily, omega: f64) -> Option<bool> {
    let cw = -omega.ln();
    match *a {
        SequenceFamily::Constant { .. } => Some(false),
        SequenceFamily::PowerLaw { beta, .. } => Some(beta < 0.0),
        SequenceFamily::LogPower { c, gamma, beta } => Some(if beta < 0.0 {
            true
        } else if gamma > 1.0 {
            true
        } else if gamma == 1.0 {
            // terms ~ c ln j · j^{-c·cw}: summable iff c·cw > 1.
            c * cw > 1.0
        } else {
            false
        }),
        SequenceFamily::ExpGrowth { rho, .. } => Some(rho > 1.0),
        SequenceFamily::Tabulated { .. } => None,
    }
}

/// Numeric value of the running log-average sup over d ≤ cap, for the
/// certificate of the bounded-partial-sum criteria.
fn log_average_sup_numeric(term: impl Fn(usize) -> f64, cap: usize) -> f64 {
    let mut sum = 0.0;
    let mut sup = f64::NEG_INFINITY;
    for d in 1..=cap {
        sum += term(d);
        let ratio = sum / (d as f64).ln().max(1.0);
        if ratio > sup {
            sup = ratio;
        }
    }
    sup
}

// ---------------------------------------------------------------------------
// criterion evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct CritEval {
    holds: Holds,
    quantity: Option<f64>,
    detail: String,
}

impl CritEval {
    fn yes(quantity: Option<f64>, detail: impl Into<String>) -> Self {
        CritEval { holds: Holds::Yes, quantity, detail: detail.into() }
    }
    fn no(quantity: Option<f64>, detail: impl Into<String>) -> Self {
        CritEval { holds: Holds::No, quantity, detail: detail.into() }
    }
    fn unknown(quantity: Option<f64>, detail: impl Into<String>) -> Self {
        CritEval { holds: Holds::Unknown, quantity, detail: detail.into() }
    }
}

/// Boundary handling for liminf-vs-threshold comparisons: equality defers
/// to the policy (always `Unknown` except for the UWT flag).
fn compare_liminf(
    lim: Lim,
    threshold: f64,
    label: &str,
    at_equality: UwtBoundary,
) -> CritEval {
    match lim {
        Lim::PosInf => CritEval::yes(
            None,
            format!("{label} diverges to infinity, above the threshold {threshold:.6}"),
        ),
        Lim::Val(v) => {
            if v > threshold {
                CritEval::yes(
                    Some(v),
                    format!("{label} = {v:.6} exceeds the threshold {threshold:.6}"),
                )
            } else if v < threshold {
                CritEval::no(
                    Some(v),
                    format!("{label} = {v:.6} falls below the threshold {threshold:.6}"),
                )
            } else {
                match at_equality {
                    UwtBoundary::Unknown => CritEval::unknown(
                        Some(v),
                        format!(
                            "{label} sits exactly at the threshold {threshold:.6}; \
                             the strict and inclusive readings disagree here"
                        ),
                    ),
                    UwtBoundary::Inclusive => CritEval::yes(
                        Some(v),
                        format!(
                            "{label} equals the threshold {threshold:.6} and the \
                             inclusive reading accepts equality"
                        ),
                    ),
                    UwtBoundary::Strict => CritEval::no(
                        Some(v),
                        format!(
                            "{label} equals the threshold {threshold:.6} and the \
                             strict reading rejects equality"
                        ),
                    ),
                }
            }
        }
    }
}

/// Decide "the limit of this quantity is zero".
fn limit_is_zero(lim: Lim, label: &str) -> CritEval {
    match lim {
        Lim::Val(v) if v == 0.0 => CritEval::yes(Some(0.0), format!("{label} tends to zero")),
        Lim::Val(v) => CritEval::no(
            Some(v),
            format!("{label} tends to {v:.6}, which is nonzero"),
        ),
        Lim::PosInf => CritEval::no(None, format!("{label} diverges instead of vanishing")),
    }
}

/// Decide "the limit of this quantity is +∞".
fn limit_is_infinite(lim: Lim, label: &str) -> CritEval {
    match lim {
        Lim::PosInf => CritEval::yes(None, format!("{label} diverges to infinity")),
        Lim::Val(v) => CritEval::no(
            Some(v),
            format!("{label} stays bounded (limit {v:.6})"),
        ),
    }
}

// ---------------------------------------------------------------------------
// numeric fallback decisions for tabulated sequences
// ---------------------------------------------------------------------------

enum NumericGoal {
    LiminfVsThreshold { threshold: f64, at_equality: UwtBoundary },
    LimitIsInfinite,
    LimitIsZero,
}

fn default_window(len: usize) -> (usize, usize) {
    (2.max(len / 4), len)
}

fn numeric_verdict(
    values: &[f64],
    transform: &Transform,
    window: Option<(usize, usize)>,
    goal: NumericGoal,
) -> CritEval {
    let window = window.unwrap_or_else(|| default_window(values.len()));
    let est = match estimate_liminf(values, transform, window) {
        Ok(e) => e,
        Err(err) => {
            return CritEval::unknown(None, format!("tabulated data insufficient: {err}"))
        }
    };
    let label = transform.label();
    let decision = est.asymptote.unwrap_or(est.estimate);
    let high = est.confidence == EstimateConfidence::High;
    match goal {
        NumericGoal::LiminfVsThreshold { threshold, at_equality } => {
            let margin = 0.05 * threshold.abs().max(1.0);
            if high && decision > threshold + margin {
                CritEval::yes(
                    Some(est.estimate),
                    format!(
                        "tabulated evidence: {label} ≈ {decision:.4} stays above \
                         {threshold:.4} with a clear margin"
                    ),
                )
            } else if decision < threshold - margin && est.trend != Trend::Rising {
                CritEval::no(
                    Some(est.estimate),
                    format!(
                        "tabulated evidence: {label} ≈ {decision:.4} stays below \
                         {threshold:.4} and is not rising"
                    ),
                )
            } else if high && (decision - threshold).abs() <= margin {
                // Within the margin the boundary policy applies, as it would
                // for an exact symbolic tie.
                match at_equality {
                    UwtBoundary::Inclusive if decision >= threshold - margin => CritEval::yes(
                        Some(est.estimate),
                        format!("tabulated {label} ≈ {decision:.4} meets the inclusive threshold"),
                    ),
                    UwtBoundary::Strict => CritEval::no(
                        Some(est.estimate),
                        format!("tabulated {label} ≈ {decision:.4} fails the strict threshold"),
                    ),
                    _ => CritEval::unknown(
                        Some(est.estimate),
                        format!(
                            "tabulated {label} ≈ {decision:.4} is indistinguishable from \
                             the threshold {threshold:.4}"
                        ),
                    ),
                }
            } else {
                CritEval::unknown(
                    Some(est.estimate),
                    format!("tabulated trend for {label} is inconclusive near {threshold:.4}"),
                )
            }
        }
        NumericGoal::LimitIsInfinite => {
            if high && matches!(est.trend, Trend::Flat | Trend::Falling) {
                CritEval::no(
                    Some(est.estimate),
                    format!(
                        "tabulated {label} ≈ {decision:.4} shows no growth, so divergence \
                         to infinity is not supported"
                    ),
                )
            } else {
                CritEval::unknown(
                    Some(est.estimate),
                    format!(
                        "a finite table cannot certify that {label} diverges; trend is \
                         inconclusive"
                    ),
                )
            }
        }
        NumericGoal::LimitIsZero => {
            if decision.abs() <= 1e-3 && est.trend != Trend::Rising {
                CritEval::yes(
                    Some(est.estimate),
                    format!("tabulated {label} ≈ {decision:.2e} has decayed to zero"),
                )
            } else if decision > 0.05 && (est.trend == Trend::Rising || high) {
                CritEval::no(
                    Some(est.estimate),
                    format!("tabulated {label} ≈ {decision:.4} is bounded away from zero"),
                )
            } else {
                CritEval::unknown(
                    Some(est.estimate),
                    format!("tabulated trend for {label} does not settle whether it vanishes"),
                )
            }
        }
    }
}

fn tabulated_values(seq: &SequenceFamily) -> Option<&[f64]> {
    match seq {
        SequenceFamily::Tabulated { values } => Some(values),
        _ => None,
    }
}

/// Evaluate a liminf-style criterion, falling back to tabulated evidence.
fn eval_liminf_criterion(
    seq: &SequenceFamily,
    symbolic: Option<Lim>,
    transform: Transform,
    threshold: f64,
    label: &str,
    at_equality: UwtBoundary,
    options: &ClassifierOptions,
) -> CritEval {
    match symbolic {
        Some(lim) => compare_liminf(lim, threshold, label, at_equality),
        None => numeric_verdict(
            tabulated_values(seq).expect("symbolic evaluation only fails for tabulated input"),
            &transform,
            options.tabulated_window,
            NumericGoal::LiminfVsThreshold { threshold, at_equality },
        ),
    }
}

fn eval_limit_zero_criterion(
    seq: &SequenceFamily,
    symbolic: Option<Lim>,
    transform: Transform,
    label: &str,
    options: &ClassifierOptions,
) -> CritEval {
    match symbolic {
        Some(lim) => limit_is_zero(lim, label),
        None => numeric_verdict(
            tabulated_values(seq).expect("symbolic evaluation only fails for tabulated input"),
            &transform,
            options.tabulated_window,
            NumericGoal::LimitIsZero,
        ),
    }
}

fn eval_limit_infinite_criterion(
    seq: &SequenceFamily,
    symbolic: Option<Lim>,
    transform: Transform,
    label: &str,
    options: &ClassifierOptions,
) -> CritEval {
    match symbolic {
        Some(lim) => limit_is_infinite(lim, label),
        None => numeric_verdict(
            tabulated_values(seq).expect("symbolic evaluation only fails for tabulated input"),
            &transform,
            options.tabulated_window,
            NumericGoal::LimitIsInfinite,
        ),
    }
}

// ---------------------------------------------------------------------------
// per-family classification
// ---------------------------------------------------------------------------

const CHAIN: [&str; 5] = ["spt", "pt", "qpt", "uwt", "wt"];

/// Core-chain verdicts with implication closure applied.
/// Index order: SPT, PT, QPT, UWT, WT.
fn close_chain(mut evals: [CritEval; 5]) -> Result<[CritEval; 5], TractabilityError> {
    // A Yes propagates to every weaker notion; a No to every stronger one.
    for i in 0..5 {
        if evals[i].holds == Holds::Yes {
            for k in (i + 1)..5 {
                match evals[k].holds {
                    Holds::No => {
                        return Err(TractabilityError::LatticeViolation {
                            stronger: CHAIN[i],
                            weaker: CHAIN[k],
                        })
                    }
                    Holds::Unknown => {
                        evals[k] = CritEval::yes(
                            None,
                            format!("implied: {} already holds", CHAIN[i]),
                        );
                    }
                    Holds::Yes => {}
                }
            }
        }
    }
    for k in (0..5).rev() {
        if evals[k].holds == Holds::No {
            for i in 0..k {
                match evals[i].holds {
                    Holds::Yes => {
                        return Err(TractabilityError::LatticeViolation {
                            stronger: CHAIN[i],
                            weaker: CHAIN[k],
                        })
                    }
                    Holds::Unknown => {
                        evals[i] = CritEval::no(
                            None,
                            format!("ruled out: {} already fails", CHAIN[k]),
                        );
                    }
                    Holds::No => {}
                }
            }
        }
    }
    Ok(evals)
}

struct CoreChain {
    evals: [CritEval; 5],
}

impl CoreChain {
    fn get(&self, notion: Notion) -> &CritEval {
        match notion {
            Notion::Spt => &self.evals[0],
            Notion::Pt => &self.evals[1],
            Notion::Qpt => &self.evals[2],
            Notion::Uwt => &self.evals[3],
            Notion::Wt => &self.evals[4],
            Notion::StWt { .. } => unreachable!("(s,t) notions live outside the core chain"),
        }
    }
}

fn validate_st(s: f64, t: f64) -> Result<(), TractabilityError> {
    if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
        return Err(TractabilityError::InvalidStParameters { s, t });
    }
    Ok(())
}

/// Weighted-power-decay family: core chain under a given error criterion.
fn wk_core_chain(
    g: &SequenceFamily,
    criterion: Criterion,
    options: &ClassifierOptions,
) -> Result<CoreChain, TractabilityError> {
    let label = "liminf ln(1/g_j)/ln j";
    let lim = liminf_ln_inv_over_ln_j(g);
    let spt = eval_liminf_criterion(
        g,
        lim,
        Transform::LnInvOverLnJ,
        1.0,
        label,
        UwtBoundary::Unknown,
        options,
    );
    let pt = spt.clone();
    let uwt = eval_liminf_criterion(
        g,
        lim,
        Transform::LnInvOverLnJ,
        1.0,
        label,
        options.uwt_boundary,
        options,
    );
    let wt = eval_limit_zero_criterion(g, lim_value(g), Transform::Identity, "g_j", options);
    let qpt_nor = qpt_eval_wk(g, options);
    let qpt = match criterion {
        Criterion::Nor => qpt_nor,
        Criterion::Abs => match qpt_nor.holds {
            // The absolute problem is at least as hard (the initial error
            // is never below one), so a normalized-criterion No carries over.
            Holds::No => CritEval::no(
                qpt_nor.quantity,
                format!(
                    "fails under the normalized criterion and the absolute problem is at \
                     least as hard: {}",
                    qpt_nor.detail
                ),
            ),
            _ => CritEval::unknown(
                None,
                "no stated criterion for this combination; left to the implication lattice",
            ),
        },
    };
    Ok(CoreChain { evals: close_chain([spt, pt, qpt, uwt, wt])? })
}

fn qpt_eval_wk(g: &SequenceFamily, options: &ClassifierOptions) -> CritEval {
    let label = "sup_d (1/ln+ d)·Σ_{j≤d} g_j·ln+(1/g_j)";
    match bounded_log_average_wk(g) {
        Some(finite) => {
            let sup = log_average_sup_numeric(|j| {
                let v = g.eval(j as u64);
                v * (1.0 / v).ln().max(1.0)
            }, 4096);
            if finite {
                CritEval::yes(Some(sup), format!("{label} stays bounded (≈ {sup:.4} at depth 4096)"))
            } else {
                CritEval::no(Some(sup), format!("{label} grows without bound (≈ {sup:.4} by depth 4096)"))
            }
        }
        None => {
            let values = tabulated_values(g).unwrap();
            numeric_bounded_log_average(values, |v| v * (1.0 / v).ln().max(1.0), label, options)
        }
    }
}

/// Trend test on the running log-average ratio for tabulated data: a
/// rising ratio rules the sup out, anything else is inconclusive.
fn numeric_bounded_log_average(
    values: &[f64],
    term: impl Fn(f64) -> f64,
    label: &str,
    options: &ClassifierOptions,
) -> CritEval {
    let len = values.len();
    let (start, end) = options.tabulated_window.unwrap_or_else(|| default_window(len));
    if end > len || end - start + 1 < 8 || start < 2 {
        return CritEval::unknown(None, "tabulated data insufficient for the partial-sum ratio");
    }
    let mut sum = 0.0;
    for v in &values[..start - 1] {
        sum += term(*v);
    }
    let mut ratios = Vec::with_capacity(end - start + 1);
    for d in start..=end {
        sum += term(values[d - 1]);
        ratios.push(sum / (d as f64).ln().max(1.0));
    }
    // Linear fit of the ratio against ln d.
    let n = ratios.len() as f64;
    let xs: Vec<f64> = (start..=end).map(|d| (d as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ratios.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ratios.iter()) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let drift = slope * (xs.last().unwrap() - xs[0]);
    let sup = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if drift > 0.05 * mean_y.abs().max(1.0) {
        CritEval::no(
            Some(sup),
            format!("{label}: the running ratio keeps rising over the table, so the sup diverges"),
        )
    } else {
        CritEval::unknown(
            Some(sup),
            format!("{label}: a finite table cannot certify the sup is finite"),
        )
    }
}

fn qpt_eval_ek(a: &SequenceFamily, omega: f64, options: &ClassifierOptions) -> CritEval {
    let label = "sup_d (1/ln+ d)·Σ_{j≤d} a_j·ω^{a_j}";
    match bounded_log_average_ek(a, omega) {
        Some(finite) => {
            let sup = log_average_sup_numeric(|j| {
                let v = a.eval(j as u64);
                if !v.is_finite() {
                    // Overflowed growth sequence: ω^v underflows first.
                    return 0.0;
                }
                v * omega.powf(v)
            }, 4096);
            if finite {
                CritEval::yes(Some(sup), format!("{label} stays bounded (≈ {sup:.4} at depth 4096)"))
            } else {
                CritEval::no(Some(sup), format!("{label} grows without bound (≈ {sup:.4} by depth 4096)"))
            }
        }
        None => {
            let values = tabulated_values(a).unwrap();
            numeric_bounded_log_average(values, |v| v * omega.powf(v), label, options)
        }
    }
}

/// Exponential-weight family, algebraic notions.
fn ek_alg_core_chain(
    a: &SequenceFamily,
    omega: f64,
    criterion: Criterion,
    options: &ClassifierOptions,
) -> Result<CoreChain, TractabilityError> {
    let theta = 1.0 / (1.0 / omega).ln();
    let label = "liminf a_j/ln j";
    let lim = liminf_over_ln_j(a);
    let spt = eval_liminf_criterion(
        a,
        lim,
        Transform::OverLnJ,
        theta,
        label,
        UwtBoundary::Unknown,
        options,
    );
    let pt = spt.clone();
    let uwt = eval_liminf_criterion(
        a,
        lim,
        Transform::OverLnJ,
        theta,
        label,
        options.uwt_boundary,
        options,
    );
    let wt =
        eval_limit_infinite_criterion(a, lim_value(a), Transform::Identity, "a_j", options);
    let qpt_nor = qpt_eval_ek(a, omega, options);
    let qpt = match criterion {
        Criterion::Nor => qpt_nor,
        Criterion::Abs => match qpt_nor.holds {
            Holds::No => CritEval::no(
                qpt_nor.quantity,
                format!(
                    "fails under the normalized criterion and the absolute problem is at \
                     least as hard: {}",
                    qpt_nor.detail
                ),
            ),
            _ => CritEval::unknown(
                None,
                "no stated criterion for this combination; left to the implication lattice",
            ),
        },
    };
    Ok(CoreChain { evals: close_chain([spt, pt, qpt, uwt, wt])? })
}

/// Exponential-weight family, exponential notions.
fn ek_exp_core_chain(
    a: &SequenceFamily,
    b: &SequenceFamily,
    options: &ClassifierOptions,
) -> Result<CoreChain, TractabilityError> {
    // SPT/PT: Σ 1/b_j < ∞ together with liminf ln(a_j)/j > 0.
    let b_part = match sum_inv_converges(b) {
        Some(true) => CritEval::yes(None, "Σ 1/b_j converges".to_string()),
        Some(false) => CritEval::no(None, "Σ 1/b_j diverges".to_string()),
        None => CritEval::unknown(
            None,
            "tabulated exponents carry no tail rule, so the convergence of Σ 1/b_j is undecidable",
        ),
    };
    let a_part = eval_liminf_criterion(
        a,
        liminf_ln_over_j(a),
        Transform::LnOverJ,
        0.0,
        "liminf ln(a_j)/j",
        UwtBoundary::Unknown,
        options,
    );
    let spt = match (b_part.holds, a_part.holds) {
        (Holds::No, _) => CritEval::no(b_part.quantity, b_part.detail.clone()),
        (_, Holds::No) => CritEval::no(a_part.quantity, a_part.detail.clone()),
        (Holds::Yes, Holds::Yes) => CritEval::yes(
            a_part.quantity,
            format!("{}; {}", b_part.detail, a_part.detail),
        ),
        _ => CritEval::unknown(
            a_part.quantity,
            format!("{}; {}", b_part.detail, a_part.detail),
        ),
    };
    let pt = spt.clone();
    let qpt = CritEval::unknown(
        None,
        "no stated criterion for this combination; left to the implication lattice",
    );
    let uwt = eval_limit_infinite_criterion(
        a,
        lim_ln_over_ln_j(a),
        Transform::LnOverLnJ,
        "ln(a_j)/ln j",
        options,
    );
    let wt =
        eval_limit_infinite_criterion(a, lim_value(a), Transform::Identity, "a_j", options);
    Ok(CoreChain { evals: close_chain([spt, pt, qpt, uwt, wt])? })
}

fn wk_st_wt(
    g: &SequenceFamily,
    s: f64,
    t: f64,
    chain: &CoreChain,
    options: &ClassifierOptions,
) -> Result<CritEval, TractabilityError> {
    validate_st(s, t)?;
    if t > 1.0 {
        return Ok(CritEval::yes(None, "holds for every admissible family when t > 1"));
    }
    if t == 1.0 {
        let wt = chain.get(Notion::Wt);
        return Ok(CritEval {
            holds: wt.holds,
            quantity: wt.quantity,
            detail: format!("equivalent to plain weak tractability at t = 1: {}", wt.detail),
        });
    }
    let e = 1.0 - t;
    Ok(eval_limit_zero_criterion(
        g,
        lim_poly_weighted_ln_inv(g, e),
        Transform::PolyWeightedLnInv { exponent: e },
        &format!("j^{e:.4}·g_j·ln+(1/g_j)"),
        options,
    ))
}

fn ek_alg_st_wt(
    a: &SequenceFamily,
    omega: f64,
    s: f64,
    t: f64,
    chain: &CoreChain,
    options: &ClassifierOptions,
) -> Result<CritEval, TractabilityError> {
    validate_st(s, t)?;
    if t > 1.0 {
        return Ok(CritEval::yes(None, "holds for every admissible family when t > 1"));
    }
    if t == 1.0 {
        let wt = chain.get(Notion::Wt);
        return Ok(CritEval {
            holds: wt.holds,
            quantity: wt.quantity,
            detail: format!("equivalent to plain weak tractability at t = 1: {}", wt.detail),
        });
    }
    let e = 1.0 - t;
    Ok(eval_limit_zero_criterion(
        a,
        lim_poly_weighted_omega_pow(a, e, omega),
        Transform::PolyWeightedOmegaPow { exponent: e, omega },
        &format!("j^{e:.4}·a_j·ω^(a_j)"),
        options,
    ))
}

fn ek_exp_st_wt(
    a: &SequenceFamily,
    omega: f64,
    s: f64,
    t: f64,
    chain: &CoreChain,
    options: &ClassifierOptions,
) -> Result<CritEval, TractabilityError> {
    validate_st(s, t)?;
    if t > 1.0 {
        return Ok(CritEval::yes(None, "holds for every admissible family when t > 1"));
    }
    if s < 1.0 {
        // Covers every t ≤ 1: the weight must outgrow j^{(1-s)/s}.
        let q = (1.0 - s) / s;
        return Ok(eval_limit_infinite_criterion(
            a,
            lim_over_poly_j(a, q),
            Transform::OverPolyJ { exponent: q },
            &format!("a_j/j^{q:.4}"),
            options,
        ));
    }
    if t == 1.0 {
        // s ≥ 1 at t = 1 is plain weak tractability.
        let wt = chain.get(Notion::Wt);
        return Ok(CritEval {
            holds: wt.holds,
            quantity: wt.quantity,
            detail: format!("equivalent to plain weak tractability at t = 1: {}", wt.detail),
        });
    }
    if s == 1.0 {
        return Ok(eval_limit_infinite_criterion(
            a,
            {
                // lim a_j/ln j must be infinite; reuse the liminf helper and
                // demand divergence.
                match liminf_over_ln_j(a) {
                    Some(Lim::PosInf) => Some(Lim::PosInf),
                    Some(Lim::Val(v)) => Some(Lim::Val(v)),
                    None => None,
                }
            },
            Transform::OverLnJ,
            "a_j/ln j",
            options,
        ));
    }
    // s > 1, t < 1.
    let e = 1.0 - t;
    Ok(eval_limit_zero_criterion(
        a,
        lim_poly_weighted_omega_pow(a, e, omega),
        Transform::PolyWeightedOmegaPow { exponent: e, omega },
        &format!("j^{e:.4}·a_j·ω^(a_j)"),
        options,
    ))
}

// ---------------------------------------------------------------------------
// public classification API
// ---------------------------------------------------------------------------

/// Classify one tractability notion for the polynomially decaying family
/// with weights `g` and smoothness `r`.
///
/// Exponential-mode notions are reported `No` across the board for this
/// family: its eigenvalues decay only polynomially, so complexity cannot
/// scale with powers of (1 + ln 1/ε). That blanket answer is a reporting
/// convention for the (s,t) variants, where sufficiently large s and t can
/// in fact rescue the notion; the certificate says so.
pub fn classify_weighted_korobov(
    g: &SequenceFamily,
    r: &SequenceFamily,
    mode: Mode,
    notion: Notion,
    criterion: Criterion,
) -> Result<TractabilityVerdict, TractabilityError> {
    classify_weighted_korobov_with(g, r, mode, notion, criterion, &ClassifierOptions::default())
}

pub fn classify_weighted_korobov_with(
    g: &SequenceFamily,
    r: &SequenceFamily,
    mode: Mode,
    notion: Notion,
    criterion: Criterion,
    options: &ClassifierOptions,
) -> Result<TractabilityVerdict, TractabilityError> {
    g.validate_for_role(SequenceRole::KorobovWeight)?;
    r.validate_for_role(SequenceRole::KorobovSmoothness)?;
    if let Notion::StWt { s, t } = notion {
        validate_st(s, t)?;
    }
    if mode == Mode::Exp {
        return Ok(TractabilityVerdict {
            notion,
            mode,
            criterion,
            holds: Holds::No,
            certificate: Certificate {
                quantity: None,
                detail: "polynomial eigenvalue decay: complexity grows polynomially in 1/ε, \
                         so no exponential-scale notion holds (reported as a convention for \
                         the (s,t) variants)"
                    .to_string(),
            },
        });
    }
    let chain = wk_core_chain(g, criterion, options)?;
    let eval = match notion {
        Notion::StWt { s, t } => wk_st_wt(g, s, t, &chain, options)?,
        core => chain.get(core).clone(),
    };
    Ok(TractabilityVerdict {
        notion,
        mode,
        criterion,
        holds: eval.holds,
        certificate: Certificate { quantity: eval.quantity, detail: eval.detail },
    })
}

/// Classify one tractability notion for the exponentially decaying family
/// with weights `a`, exponents `b`, and base `omega`.
pub fn classify_exp_korobov(
    a: &SequenceFamily,
    b: &SequenceFamily,
    omega: f64,
    mode: Mode,
    notion: Notion,
    criterion: Criterion,
) -> Result<TractabilityVerdict, TractabilityError> {
    classify_exp_korobov_with(a, b, omega, mode, notion, criterion, &ClassifierOptions::default())
}

pub fn classify_exp_korobov_with(
    a: &SequenceFamily,
    b: &SequenceFamily,
    omega: f64,
    mode: Mode,
    notion: Notion,
    criterion: Criterion,
    options: &ClassifierOptions,
) -> Result<TractabilityVerdict, TractabilityError> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(TractabilityError::InvalidOmega(omega));
    }
    a.validate_for_role(SequenceRole::ExpWeight)?;
    b.validate_for_role(SequenceRole::ExpExponent)?;
    if let Notion::StWt { s, t } = notion {
        validate_st(s, t)?;
    }
    let chain = match mode {
        Mode::Alg => ek_alg_core_chain(a, omega, criterion, options)?,
        Mode::Exp => ek_exp_core_chain(a, b, options)?,
    };
    let eval = match (mode, notion) {
        (Mode::Alg, Notion::StWt { s, t }) => ek_alg_st_wt(a, omega, s, t, &chain, options)?,
        (Mode::Exp, Notion::StWt { s, t }) => ek_exp_st_wt(a, omega, s, t, &chain, options)?,
        (_, core) => chain.get(core).clone(),
    };
    Ok(TractabilityVerdict {
        notion,
        mode,
        criterion,
        holds: eval.holds,
        certificate: Certificate { quantity: eval.quantity, detail: eval.detail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(c: f64, beta: f64) -> SequenceFamily {
        SequenceFamily::PowerLaw { c, beta }
    }

    fn constant(c: f64) -> SequenceFamily {
        SequenceFamily::Constant { c }
    }

    fn smoothness_one() -> SequenceFamily {
        constant(1.0)
    }

    fn wk(
        g: &SequenceFamily,
        notion: Notion,
        criterion: Criterion,
    ) -> TractabilityVerdict {
        classify_weighted_korobov(g, &smoothness_one(), Mode::Alg, notion, criterion).unwrap()
    }

    #[test]
    fn strongly_tractable_when_weights_decay_fast() {
        let v = wk(&power(1.0, 2.0), Notion::Spt, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes);
        assert_eq!(v.certificate.quantity, Some(2.0));
        let v = wk(&power(1.0, 2.0), Notion::Pt, Criterion::Nor);
        assert_eq!(v.holds, Holds::Yes);
    }

    #[test]
    fn flat_weights_are_not_weakly_tractable() {
        let v = wk(&constant(1.0), Notion::Wt, Criterion::Nor);
        assert_eq!(v.holds, Holds::No);
        // And everything stronger collapses with it.
        for notion in [Notion::Spt, Notion::Pt, Notion::Qpt, Notion::Uwt] {
            assert_eq!(wk(&constant(1.0), notion, Criterion::Abs).holds, Holds::No);
        }
    }

    #[test]
    fn st_weak_tractability_matches_hand_limits() {
        // t > 1 holds unconditionally.
        let v = wk(&constant(1.0), Notion::StWt { s: 0.3, t: 1.5 }, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes);
        // t = 1 is plain weak tractability.
        let v = wk(&power(1.0, 3.0), Notion::StWt { s: 2.0, t: 1.0 }, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes);
        // t = 1/2 with g_j = j^{-1/2}: j^{1/2}·j^{-1/2}·(ln j)/2 diverges.
        let v = wk(&power(1.0, 0.5), Notion::StWt { s: 1.0, t: 0.5 }, Criterion::Abs);
        assert_eq!(v.holds, Holds::No);
        // g_j = j^{-2} vanishes fast enough for any t.
        let v = wk(&power(1.0, 2.0), Notion::StWt { s: 1.0, t: 0.25 }, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes);
    }

    #[test]
    fn uwt_boundary_is_policy_controlled() {
        let g = power(1.0, 1.0); // liminf exactly 1
        let v = wk(&g, Notion::Uwt, Criterion::Abs);
        assert_eq!(v.holds, Holds::Unknown);
        let mut opts = ClassifierOptions::default();
        opts.uwt_boundary = UwtBoundary::Inclusive;
        let v = classify_weighted_korobov_with(
            &g,
            &smoothness_one(),
            Mode::Alg,
            Notion::Uwt,
            Criterion::Abs,
            &opts,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        opts.uwt_boundary = UwtBoundary::Strict;
        let v = classify_weighted_korobov_with(
            &g,
            &smoothness_one(),
            Mode::Alg,
            Notion::Uwt,
            Criterion::Abs,
            &opts,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::No);
    }

    #[test]
    fn boundary_weights_lose_stronger_notions_through_the_lattice() {
        // g_j = 1/j: the liminf ties at 1 (Unknown on its own), but the
        // bounded-log-average criterion fails, which rules out everything
        // at least as strong.
        let g = power(1.0, 1.0);
        assert_eq!(wk(&g, Notion::Qpt, Criterion::Nor).holds, Holds::No);
        assert_eq!(wk(&g, Notion::Spt, Criterion::Nor).holds, Holds::No);
        assert_eq!(wk(&g, Notion::Pt, Criterion::Abs).holds, Holds::No);
        assert_eq!(wk(&g, Notion::Wt, Criterion::Abs).holds, Holds::Yes);
        assert_eq!(wk(&g, Notion::Uwt, Criterion::Abs).holds, Holds::Unknown);
    }

    #[test]
    fn qpt_gap_family_stays_unknown_under_abs() {
        // g_j = 0.5·(ln(j+1))^{-1}/j keeps the log-average bounded (QPT-NOR
        // yes) while the liminf ties at 1, so nothing decides QPT-ABS.
        let g = SequenceFamily::LogPower { c: 0.5, gamma: -1.0, beta: 1.0 };
        assert_eq!(wk(&g, Notion::Qpt, Criterion::Nor).holds, Holds::Yes);
        assert_eq!(wk(&g, Notion::Qpt, Criterion::Abs).holds, Holds::Unknown);
    }

    #[test]
    fn exponential_notions_rejected_for_polynomial_decay() {
        let v = classify_weighted_korobov(
            &power(1.0, 2.0),
            &smoothness_one(),
            Mode::Exp,
            Notion::Spt,
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::No);
        assert!(v.certificate.detail.contains("polynomial eigenvalue decay"));
    }

    #[test]
    fn exp_family_alg_notions() {
        let omega: f64 = 0.5;
        let theta = 1.0 / (1.0 / omega).ln();
        let b = power(1.0, -2.0); // b_j = j^2
        // a_j = 2θ·ln(j+1): liminf a_j/ln j = 2θ > θ.
        let a = SequenceFamily::LogPower { c: 2.0 * theta, gamma: 1.0, beta: 0.0 };
        let v = classify_exp_korobov(&a, &b, omega, Mode::Alg, Notion::Spt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        assert!((v.certificate.quantity.unwrap() - 2.0 * theta).abs() < 1e-15);
        // Exactly at the threshold: Unknown by default.
        let a_tie = SequenceFamily::LogPower { c: theta, gamma: 1.0, beta: 0.0 };
        let v = classify_exp_korobov(&a_tie, &b, omega, Mode::Alg, Notion::Uwt, Criterion::Nor)
            .unwrap();
        assert_eq!(v.holds, Holds::Unknown);
        // Constant weights are not even weakly tractable.
        let v = classify_exp_korobov(&constant(1.0), &b, omega, Mode::Alg, Notion::Wt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::No);
    }

    #[test]
    fn exp_family_exp_notions() {
        let b_good = power(1.0, -2.0); // Σ j^{-2} converges
        let b_bad = constant(1.0); // Σ 1 diverges
        let a_exp = SequenceFamily::ExpGrowth { c: 1.0, rho: std::f64::consts::E };
        let v = classify_exp_korobov(&a_exp, &b_good, 0.5, Mode::Exp, Notion::Spt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        let v = classify_exp_korobov(&a_exp, &b_bad, 0.5, Mode::Exp, Notion::Spt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::No);
        // Polynomial a: UWT fails (ln a_j / ln j stays bounded), and that
        // caps SPT through the lattice even though ln(a_j)/j ties at 0.
        let a_poly = power(1.0, -5.0);
        let v = classify_exp_korobov(&a_poly, &b_good, 0.5, Mode::Exp, Notion::Uwt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::No);
        let v = classify_exp_korobov(&a_poly, &b_good, 0.5, Mode::Exp, Notion::Spt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::No);
        // But a_j → ∞ still gives plain weak tractability.
        let v = classify_exp_korobov(&a_poly, &b_good, 0.5, Mode::Exp, Notion::Wt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        // EXP-UWT for exponentially growing a.
        let v = classify_exp_korobov(&a_exp, &b_good, 0.5, Mode::Exp, Notion::Uwt, Criterion::Nor)
            .unwrap();
        assert_eq!(v.holds, Holds::Yes);
    }

    #[test]
    fn exp_family_exp_st_grid() {
        let b = power(1.0, -2.0);
        let omega = 0.5;
        // s = 1/2 needs a_j to outgrow j^{(1-s)/s} = j.
        let v = classify_exp_korobov(
            &power(1.0, -2.0),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 0.5, t: 1.0 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        let v = classify_exp_korobov(
            &power(1.0, -0.5),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 0.5, t: 1.0 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::No);
        // Exactly a_j = c·j: finite nonzero limit, decisively No.
        let v = classify_exp_korobov(
            &power(3.0, -1.0),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 0.5, t: 0.7 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::No);
        // s = 1, t < 1: a_j/ln j must diverge; a_j = j does.
        let v = classify_exp_korobov(
            &power(1.0, -1.0),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 1.0, t: 0.5 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        // s > 1, t < 1: j^{1-t}·a_j·ω^{a_j} → 0 for polynomially growing a.
        let v = classify_exp_korobov(
            &power(1.0, -1.0),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 2.0, t: 0.5 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::Yes);
        // Same slot with constant a fails.
        let v = classify_exp_korobov(
            &constant(2.0),
            &b,
            omega,
            Mode::Exp,
            Notion::StWt { s: 2.0, t: 0.5 },
            Criterion::Abs,
        )
        .unwrap();
        assert_eq!(v.holds, Holds::No);
    }

    #[test]
    fn tabulated_weights_classify_through_the_estimator() {
        let values: Vec<f64> = (1..=4096u64).map(|j| (j as f64).powi(-2)).collect();
        let g = SequenceFamily::Tabulated { values };
        let v = wk(&g, Notion::Spt, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes, "detail: {}", v.certificate.detail);
        let v = wk(&g, Notion::Wt, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes);
        // A tabulated constant is flat and clearly below the threshold.
        let g = SequenceFamily::Tabulated { values: vec![0.5; 4096] };
        let v = wk(&g, Notion::Spt, Criterion::Abs);
        assert_eq!(v.holds, Holds::No, "detail: {}", v.certificate.detail);
        let v = wk(&g, Notion::Wt, Criterion::Abs);
        assert_eq!(v.holds, Holds::No);
    }

    #[test]
    fn tabulated_exponent_sequence_cannot_decide_series() {
        let a = SequenceFamily::ExpGrowth { c: 1.0, rho: 2.0 };
        let b = SequenceFamily::Tabulated { values: (1..=64).map(|j| j as f64).collect() };
        let v = classify_exp_korobov(&a, &b, 0.5, Mode::Exp, Notion::Spt, Criterion::Abs)
            .unwrap();
        assert_eq!(v.holds, Holds::Unknown, "detail: {}", v.certificate.detail);
    }

    #[test]
    fn estimator_matches_contract_examples() {
        // Power decay: the transform is exactly 2 for every j.
        let values: Vec<f64> = (1..=10_000u64).map(|j| (j as f64).powi(-2)).collect();
        let est = estimate_liminf(&values, &Transform::LnInvOverLnJ, (2, 10_000)).unwrap();
        assert!((est.estimate - 2.0).abs() < 0.01, "estimate {}", est.estimate);
        assert_eq!(est.trend, Trend::Flat);
        assert_eq!(est.confidence, EstimateConfidence::High);
        // Constant one: identically zero.
        let values = vec![1.0; 512];
        let est = estimate_liminf(&values, &Transform::LnInvOverLnJ, (2, 512)).unwrap();
        assert!(est.estimate.abs() < 1e-12);
        assert_eq!(est.trend, Trend::Flat);
        // Alternating table: flat with the minimum branch as estimate.
        let values: Vec<f64> =
            (0..256).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let est = estimate_liminf(&values, &Transform::Identity, (1, 256)).unwrap();
        assert_eq!(est.trend, Trend::Flat);
        assert_eq!(est.estimate, 1.0);
    }

    #[test]
    fn estimator_recovers_asymptote_of_scaled_power_decay() {
        // g_j = 0.5·j^{-2}: transform = 2 + ln 2/ln j, falling toward 2.
        let values: Vec<f64> = (1..=10_000u64).map(|j| 0.5 * (j as f64).powi(-2)).collect();
        let est = estimate_liminf(&values, &Transform::LnInvOverLnJ, (16, 10_000)).unwrap();
        let alpha = est.asymptote.expect("the 1/ln j model fits this data exactly");
        assert!((alpha - 2.0).abs() < 1e-6, "asymptote {alpha}");
        // Classification still says Yes thanks to the asymptote.
        let g = SequenceFamily::Tabulated { values };
        let v = wk(&g, Notion::Spt, Criterion::Abs);
        assert_eq!(v.holds, Holds::Yes, "detail: {}", v.certificate.detail);
    }

    #[test]
    fn estimator_rejects_bad_windows() {
        let values = vec![1.0; 32];
        assert!(matches!(
            estimate_liminf(&values, &Transform::Identity, (1, 6)),
            Err(TractabilityError::WindowTooShort { .. })
        ));
        assert!(matches!(
            estimate_liminf(&values, &Transform::LnInvOverLnJ, (1, 32)),
            Err(TractabilityError::WindowNeedsJAtLeastTwo(_))
        ));
        assert!(matches!(
            estimate_liminf(&values, &Transform::Identity, (1, 64)),
            Err(TractabilityError::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        assert!(matches!(
            classify_weighted_korobov(
                &power(1.0, 2.0),
                &smoothness_one(),
                Mode::Alg,
                Notion::StWt { s: -1.0, t: 0.5 },
                Criterion::Abs,
            ),
            Err(TractabilityError::InvalidStParameters { .. })
        ));
        assert!(matches!(
            classify_exp_korobov(
                &constant(1.0),
                &constant(1.0),
                1.5,
                Mode::Alg,
                Notion::Wt,
                Criterion::Abs,
            ),
            Err(TractabilityError::InvalidOmega(_))
        ));
        // Rising g violates the weight role.
        assert!(classify_weighted_korobov(
            &power(1.0, -1.0),
            &smoothness_one(),
            Mode::Alg,
            Notion::Wt,
            Criterion::Abs,
        )
        .is_err());
    }
}
