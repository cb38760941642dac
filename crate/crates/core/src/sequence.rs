//! Parameter sequences for kernel models.
//!
//! Kernel families are parameterized by positive sequences (weights,
//! smoothness exponents). A sequence is either closed-form — so classifiers
//! can reason about its asymptotics symbolically — or an explicit finite
//! list, padded by its last value beyond the end.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A positive real sequence indexed from j = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceFamily {
    /// c, c, c, …
    Constant { c: f64 },
    /// c · j^{-beta}
    PowerLaw { c: f64, beta: f64 },
    /// c · ln(j+1)^{gamma} · j^{-beta}
    LogPower { c: f64, gamma: f64, beta: f64 },
    /// c · rho^j
    ExpGrowth { c: f64, rho: f64 },
    /// Explicit values; entries beyond the list repeat the last value.
    Tabulated { values: Vec<f64> },
}

/// Constraint profile a sequence must satisfy to be usable in a model slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceRole {
    /// Korobov weights g: 1 ≥ g_1 ≥ g_2 ≥ … > 0.
    KorobovWeight,
    /// Korobov smoothness r: 1/2 < r_1 ≤ r_2 ≤ ….
    KorobovSmoothness,
    /// Exponential-family weights a: 0 < a_1 ≤ a_2 ≤ ….
    ExpWeight,
    /// Exponential-family exponents b: b_j > 0 with inf_j b_j > 0.
    ExpExponent,
}

impl SequenceRole {
    pub fn name(self) -> &'static str {
        match self {
            SequenceRole::KorobovWeight => "g",
            SequenceRole::KorobovSmoothness => "r",
            SequenceRole::ExpWeight => "a",
            SequenceRole::ExpExponent => "b",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SequenceError {
    #[error("sequence parameter {name} is not finite")]
    NonFiniteParameter { name: &'static str },
    #[error("tabulated sequence is empty")]
    EmptyTabulated,
    #[error("sequence {role} must be positive; entry {j} is {value}")]
    NonPositive { role: &'static str, j: u64, value: f64 },
    #[error("sequence {role} violates `{constraint}` at j = {j}")]
    ConstraintViolated { role: &'static str, constraint: &'static str, j: u64 },
}

/// Window length used for the numeric monotonicity check of sequence kinds
/// whose direction is not decidable from parameters alone (log-power mixes,
/// tabulated lists are checked over their full length).
const VALIDATION_WINDOW: u64 = 4096;

impl SequenceFamily {
    /// Convenience constructor for an explicit list.
    pub fn tabulated(values: Vec<f64>) -> Self {
        SequenceFamily::Tabulated { values }
    }

    /// j-th entry, j ≥ 1. Tabulated sequences repeat their last value.
    pub fn eval(&self, j: u64) -> f64 {
        debug_assert!(j >= 1);
        let x = j as f64;
        match self {
            SequenceFamily::Constant { c } => *c,
            SequenceFamily::PowerLaw { c, beta } => c * x.powf(-beta),
            SequenceFamily::LogPower { c, gamma, beta } => {
                c * (x + 1.0).ln().powf(*gamma) * x.powf(-beta)
            }
            SequenceFamily::ExpGrowth { c, rho } => c * rho.powf(x),
            SequenceFamily::Tabulated { values } => {
                let idx = (j as usize - 1).min(values.len() - 1);
                values[idx]
            }
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, SequenceFamily::Tabulated { .. })
    }

    fn check_parameters_finite(&self) -> Result<(), SequenceError> {
        let bad = |name| SequenceError::NonFiniteParameter { name };
        match self {
            SequenceFamily::Constant { c } => {
                if !c.is_finite() {
                    return Err(bad("c"));
                }
            }
            SequenceFamily::PowerLaw { c, beta } => {
                if !c.is_finite() {
                    return Err(bad("c"));
                }
                if !beta.is_finite() {
                    return Err(bad("beta"));
                }
            }
            SequenceFamily::LogPower { c, gamma, beta } => {
                if !c.is_finite() {
                    return Err(bad("c"));
                }
                if !gamma.is_finite() {
                    return Err(bad("gamma"));
                }
                if !beta.is_finite() {
                    return Err(bad("beta"));
                }
            }
            SequenceFamily::ExpGrowth { c, rho } => {
                if !c.is_finite() {
                    return Err(bad("c"));
                }
                if !rho.is_finite() {
                    return Err(bad("rho"));
                }
            }
            SequenceFamily::Tabulated { values } => {
                if values.is_empty() {
                    return Err(SequenceError::EmptyTabulated);
                }
                if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
                    return Err(SequenceError::NonPositive {
                        role: "tabulated",
                        j: pos as u64 + 1,
                        value: values[pos],
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether the sequence, as an infinite object, is eventually nonincreasing
    /// (`false` also for "cannot tell"). Closed forms answer from parameters.
    fn asymptotically_nonincreasing(&self) -> bool {
        match self {
            SequenceFamily::Constant { .. } => true,
            SequenceFamily::PowerLaw { beta, .. } => *beta >= 0.0,
            SequenceFamily::LogPower { gamma, beta, .. } => {
                *beta > 0.0 || (*beta == 0.0 && *gamma <= 0.0)
            }
            SequenceFamily::ExpGrowth { rho, .. } => *rho <= 1.0,
            SequenceFamily::Tabulated { .. } => true, // constant past the end
        }
    }

    fn asymptotically_nondecreasing(&self) -> bool {
        match self {
            SequenceFamily::Constant { .. } => true,
            SequenceFamily::PowerLaw { beta, .. } => *beta <= 0.0,
            SequenceFamily::LogPower { gamma, beta, .. } => {
                *beta < 0.0 || (*beta == 0.0 && *gamma >= 0.0)
            }
            SequenceFamily::ExpGrowth { rho, .. } => *rho >= 1.0,
            SequenceFamily::Tabulated { .. } => true,
        }
    }

    fn window_len(&self) -> u64 {
        match self {
            SequenceFamily::Tabulated { values } => values.len() as u64,
            _ => VALIDATION_WINDOW,
        }
    }

    /// Validate the sequence for a model slot. Closed-form kinds are checked
    /// from their parameters plus a finite monotonicity window; tabulated
    /// lists are checked exhaustively (the pad rule keeps them monotone past
    /// the end).
    pub fn validate_for_role(&self, role: SequenceRole) -> Result<(), SequenceError> {
        self.check_parameters_finite()?;
        let name = role.name();
        let window = self.window_len();
        // Positivity over the window (and closed-form positivity via c > 0).
        let c_positive = match self {
            SequenceFamily::Constant { c }
            | SequenceFamily::PowerLaw { c, .. }
            | SequenceFamily::LogPower { c, .. }
            | SequenceFamily::ExpGrowth { c, .. } => *c > 0.0,
            SequenceFamily::Tabulated { .. } => true,
        };
        if !c_positive {
            return Err(SequenceError::NonPositive { role: name, j: 1, value: self.eval(1) });
        }
        for j in 1..=window {
            let v = self.eval(j);
            // +inf is allowed here: growth sequences may overflow deep into
            // the window, and the role checks below still police direction.
            if !(v > 0.0) {
                return Err(SequenceError::NonPositive { role: name, j, value: v });
            }
        }
        let fail = |constraint, j| SequenceError::ConstraintViolated { role: name, constraint, j };
        match role {
            SequenceRole::KorobovWeight => {
                if !self.asymptotically_nonincreasing() {
                    return Err(fail("nonincreasing", window));
                }
                if self.eval(1) > 1.0 {
                    return Err(fail("g_1 <= 1", 1));
                }
                for j in 2..=window {
                    if self.eval(j) > self.eval(j - 1) {
                        return Err(fail("nonincreasing", j));
                    }
                }
            }
            SequenceRole::KorobovSmoothness => {
                if !self.asymptotically_nondecreasing() {
                    return Err(fail("nondecreasing", window));
                }
                if self.eval(1) <= 0.5 {
                    return Err(fail("r_1 > 1/2", 1));
                }
                for j in 2..=window {
                    if self.eval(j) < self.eval(j - 1) {
                        return Err(fail("nondecreasing", j));
                    }
                }
            }
            SequenceRole::ExpWeight => {
                if !self.asymptotically_nondecreasing() {
                    return Err(fail("nondecreasing", window));
                }
                for j in 2..=window {
                    if self.eval(j) < self.eval(j - 1) {
                        return Err(fail("nondecreasing", j));
                    }
                }
            }
            SequenceRole::ExpExponent => {
                // inf_j b_j > 0: positivity is already checked on the window;
                // the infimum condition is a statement about the tail.
                let tail_positive = match self {
                    SequenceFamily::Constant { c } => *c > 0.0,
                    SequenceFamily::PowerLaw { beta, .. } => *beta <= 0.0,
                    SequenceFamily::LogPower { gamma, beta, .. } => {
                        *beta < 0.0 || (*beta == 0.0 && *gamma >= 0.0)
                    }
                    SequenceFamily::ExpGrowth { rho, .. } => *rho >= 1.0,
                    SequenceFamily::Tabulated { .. } => true, // padded by last value > 0
                };
                if !tail_positive {
                    return Err(fail("inf b_j > 0", window));
                }
            }
        }
        Ok(())
    }
}
