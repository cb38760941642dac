//! Approximation numbers, L_q error bounds, and information complexity.
//!
//! For these spectra the minimal worst-case error of rank-n approximation
//! from arbitrary linear information is the square root of the eigenvalue
//! tail: a_{n+1} = (Σ_{k>n} λ_k)^{1/2}, with a_1 = sqrt(trace) the initial
//! error. The information complexity n(ε) is the smallest n with
//! a_{n+1} ≤ ε·CRI, where CRI = 1 (absolute criterion) or sqrt(trace)
//! (normalized). Tails are monotone with no closed-form inverse, so the
//! search streams the enumerated spectrum and returns the first rank whose
//! tail crosses the target, using the same compensated-sum expressions as
//! [`Spectrum::tail_sum`] — the two-sided bracketing invariant therefore
//! holds exactly, not just within a tolerance.

use thiserror::Error;

use crate::model::ModelError;
use crate::spectrum::{partial_in_group, CompensatedSum, MagnitudeEnumerator, Spectrum};

/// Error criterion: absolute, or normalized by the initial error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Abs,
    Nor,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Abs => "abs",
            Criterion::Nor => "nor",
        }
    }
}

/// Rank cap for complexity searches; beyond it the search reports the
/// bracketing tail instead of running away on slowly decaying spectra.
pub const DEFAULT_COMPLEXITY_CAP: u64 = 10_000_000;

/// Default constants for [`std_complexity_bound`]: the multiplier 2·c1 on
/// the sample count and the error inflation c2. c1 matches the oversampling
/// constant of the subsampled least-squares construction; the construction
/// leaves c2 as an unnamed absolute constant and we pin c2 = 30 (≈ √864,
/// the product of the concentration and subsampling losses).
pub const DEFAULT_C1: u64 = 43_200;
pub const DEFAULT_C2: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum ComplexityError {
    #[error("epsilon must be a positive finite real, got {eps}")]
    InvalidEpsilon { eps: f64 },
    #[error("lq error bounds require 2 < q < ∞, got {q}")]
    InvalidQ { q: f64 },
    #[error("constants must satisfy c1 >= 1 and c2 >= 1, got c1 = {c1}, c2 = {c2}")]
    InvalidConstants { c1: u64, c2: f64 },
    #[error("trace overflowed f64; the normalized criterion is undefined here")]
    TraceOverflow,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of an inverse-tail search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(u64),
    /// No rank within `cap` reached the target; `tail_at_cap` and `target`
    /// bracket the shortfall.
    CapExceeded { cap: u64, tail_at_cap: f64, target: f64 },
}

impl SearchOutcome {
    pub fn found(self) -> Option<u64> {
        match self {
            SearchOutcome::Found(n) => Some(n),
            SearchOutcome::CapExceeded { .. } => None,
        }
    }
}

/// a_{n+1} = sqrt(Σ_{k>n} λ_k): the minimal worst-case error of any rank-n
/// linear method, attained by the spectral projection onto the top n modes.
pub fn approx_number(spectrum: &mut Spectrum, n: u64) -> f64 {
    spectrum.tail_sum(n).sqrt()
}

/// Worst-case L_q error bound for 2 < q < ∞ after n optimally chosen linear
/// functionals: (Σ_{k>n} λ_k^{q/(q−2)})^{(q−2)/(2q)}. The powered eigenvalue
/// family is the spectrum of the entrywise-powered model (both families are
/// closed under powering), so the tail is computed exactly the same way.
pub fn lq_error_bound(spectrum: &Spectrum, n: u64, q: f64) -> Result<f64, ComplexityError> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(ComplexityError::InvalidQ { q });
    }
    let p = q / (q - 2.0);
    let powered = spectrum.model().powered(p)?;
    let mut ps = Spectrum::new(powered)?;
    let exponent = (q - 2.0) / (2.0 * q);
    Ok(ps.tail_sum(n).powf(exponent))
}

fn criterion_scale(spectrum: &Spectrum, criterion: Criterion) -> Result<f64, ComplexityError> {
    match criterion {
        Criterion::Abs => Ok(1.0),
        Criterion::Nor => {
            if spectrum.trace_overflowed() {
                return Err(ComplexityError::TraceOverflow);
            }
            Ok(spectrum.trace().sqrt())
        }
    }
}

/// Smallest n ≤ cap with a_{n+1} ≤ ε·CRI.
///
/// The comparison runs in approximation-number units (square roots of
/// tails), never on squared thresholds, so the returned n satisfies the
/// exact bracketing `approx_number(n) ≤ ε·CRI < approx_number(n−1)` as
/// recomputed through [`Spectrum::tail_sum`]. In particular the normalized
/// criterion at ε = 1 yields n = 0 even though squaring `trace().sqrt()`
/// can land just below the trace. Streams the enumerated spectrum group by
/// group with the shared compensated-sum recipe; memory is O(frontier)
/// regardless of n.
pub fn info_complexity(
    spectrum: &mut Spectrum,
    eps: f64,
    criterion: Criterion,
    cap: u64,
) -> Result<SearchOutcome, ComplexityError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ComplexityError::InvalidEpsilon { eps });
    }
    let threshold = eps * criterion_scale(spectrum, criterion)?;
    let met = |tail: f64| tail.max(0.0).sqrt() <= threshold;
    let trace = spectrum.trace();
    if met(trace - 0.0) {
        return Ok(SearchOutcome::Found(0));
    }
    let mut en = MagnitudeEnumerator::new(spectrum.model().clone());
    let mut acc = CompensatedSum::default();
    let mut rank: u64 = 0;
    loop {
        let g = en.next_group();
        let snapshot = acc.value();
        let end_off = g.mult as u64;
        let tail_end = trace - partial_in_group(snapshot, g.value, end_off);
        if met(tail_end) {
            for off in 1..=end_off {
                let tail = trace - partial_in_group(snapshot, g.value, off);
                if met(tail) {
                    return Ok(SearchOutcome::Found(rank + off));
                }
            }
            unreachable!("tail at group end already met the target");
        }
        acc.add(g.value * g.mult as f64);
        rank += end_off;
        if rank >= cap {
            let over = rank - cap;
            let tail_at_cap =
                (trace - partial_in_group(snapshot, g.value, end_off - over)).max(0.0);
            return Ok(SearchOutcome::CapExceeded {
                cap,
                tail_at_cap,
                target: threshold * threshold,
            });
        }
    }
}

/// Upper bound on the standard-information complexity: 2·c1·n_all(ε/c2).
/// The bound dominates n_all(ε) for every c1 ≥ 1, c2 ≥ 1 by monotonicity.
pub fn std_complexity_bound(
    spectrum: &mut Spectrum,
    eps: f64,
    criterion: Criterion,
    c1: u64,
    c2: f64,
    cap: u64,
) -> Result<SearchOutcome, ComplexityError> {
    if c1 < 1 || !(c2 >= 1.0) || !c2.is_finite() {
        return Err(ComplexityError::InvalidConstants { c1, c2 });
    }
    match info_complexity(spectrum, eps / c2, criterion, cap)? {
        SearchOutcome::Found(n) => Ok(SearchOutcome::Found(2 * c1 * n)),
        capped => Ok(capped),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::KernelModel;
    use crate::sequence::SequenceFamily;

    fn ek_half() -> Spectrum {
        Spectrum::new(
            KernelModel::exp_korobov(
                1,
                SequenceFamily::Constant { c: 1.0 },
                SequenceFamily::Constant { c: 1.0 },
                0.5,
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn wk(d: usize, r: f64, g: f64) -> Spectrum {
        Spectrum::new(
            KernelModel::weighted_korobov(
                d,
                SequenceFamily::Constant { c: r },
                SequenceFamily::Constant { c: g },
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hand_tail_oracle_exp_half() {
        // λ = 1, 1/2, 1/2, 1/4, 1/4, …; trace = 3; tail(3) = 1 exactly.
        let mut s = ek_half();
        assert_eq!(s.tail_sum(3), 1.0);
        assert_eq!(approx_number(&mut s, 3), 1.0);
        let initial = approx_number(&mut s, 0);
        assert!((initial - 1.7320508075688772935).abs() < 1e-15);
    }

    #[test]
    fn info_complexity_of_one_is_three() {
        let mut s = ek_half();
        let got = info_complexity(&mut s, 1.0, Criterion::Abs, DEFAULT_COMPLEXITY_CAP).unwrap();
        assert_eq!(got, SearchOutcome::Found(3));
    }

    #[test]
    fn bracketing_invariant_holds_exactly() {
        for mut s in [ek_half(), wk(1, 2.0, 1.0), wk(2, 2.0, 0.5)] {
            for criterion in [Criterion::Abs, Criterion::Nor] {
                for i in 0..30 {
                    let eps = 10f64.powf(-3.0 * i as f64 / 29.0); // 1 .. 1e-3
                    let scale = criterion_scale(&s, criterion).unwrap();
                    let threshold = eps * scale;
                    match info_complexity(&mut s, eps, criterion, DEFAULT_COMPLEXITY_CAP).unwrap()
                    {
                        SearchOutcome::Found(n) => {
                            assert!(approx_number(&mut s, n) <= threshold);
                            if n > 0 {
                                assert!(approx_number(&mut s, n - 1) > threshold);
                            }
                        }
                        SearchOutcome::CapExceeded { .. } => panic!("cap hit on fast spectrum"),
                    }
                }
            }
        }
    }

    #[test]
    fn nor_equals_abs_at_scaled_epsilon() {
        for mut s in [ek_half(), wk(2, 2.0, 0.5)] {
            let scale = s.trace().sqrt();
            for i in 0..20 {
                let eps = 10f64.powf(-2.0 * i as f64 / 19.0);
                let nor =
                    info_complexity(&mut s, eps, Criterion::Nor, DEFAULT_COMPLEXITY_CAP).unwrap();
                let abs = info_complexity(&mut s, eps * scale, Criterion::Abs, DEFAULT_COMPLEXITY_CAP)
                    .unwrap();
                assert_eq!(nor, abs);
            }
        }
    }

    #[test]
    fn normalized_eps_one_needs_no_information() {
        // The initial error equals 1·(initial error) exactly, so n = 0, even
        // for traces like 3 whose sqrt squares back to 2.9999999999999996.
        for mut s in [ek_half(), wk(1, 1.0, 1.0), wk(3, 2.0, 0.5)] {
            let got = info_complexity(&mut s, 1.0, Criterion::Nor, DEFAULT_COMPLEXITY_CAP).unwrap();
            assert_eq!(got, SearchOutcome::Found(0));
        }
    }

    #[test]
    fn complexity_is_monotone_in_epsilon() {
        let mut s = wk(2, 2.0, 1.0);
        let mut prev = 0u64;
        for i in 0..25 {
            let eps = 10f64.powf(-(i as f64) / 8.0);
            let n = info_complexity(&mut s, eps, Criterion::Abs, DEFAULT_COMPLEXITY_CAP)
                .unwrap()
                .found()
                .unwrap();
            assert!(n >= prev, "n(ε) must grow as ε shrinks");
            prev = n;
        }
    }

    #[test]
    fn cap_exceeded_reports_bracketing_tail() {
        // Korobov r = 1 tails decay like 1/n; a tiny ε blows past a small cap.
        let mut s = wk(1, 1.0, 1.0);
        let cap = 10_000;
        match info_complexity(&mut s, 1e-8, Criterion::Abs, cap).unwrap() {
            SearchOutcome::CapExceeded { cap: c, tail_at_cap, target } => {
                assert_eq!(c, cap);
                assert!(tail_at_cap > target);
                assert_eq!(tail_at_cap, s.tail_sum(cap));
            }
            SearchOutcome::Found(n) => panic!("unexpected success at n = {n}"),
        }
    }

    #[test]
    fn lq_bound_matches_hand_values() {
        // q = 4 ⇒ powered exponent p = 2, outer exponent 1/4.
        let s = ek_half();
        let at0 = lq_error_bound(&s, 0, 4.0).unwrap();
        assert!((at0 - 1.1362193664674993685).abs() < 1e-14, "got {at0}");
        let at1 = lq_error_bound(&s, 1, 4.0).unwrap();
        assert!((at1 - 0.90360200360984483196).abs() < 1e-14, "got {at1}");
        assert!(lq_error_bound(&s, 0, 2.0).is_err());
        assert!(lq_error_bound(&s, 0, f64::INFINITY).is_err());
    }

    #[test]
    fn std_bound_dominates_and_equals_scaled_search() {
        let mut s = ek_half();
        for eps in [0.5, 0.1, 0.01] {
            let n_all = info_complexity(&mut s, eps, Criterion::Abs, DEFAULT_COMPLEXITY_CAP)
                .unwrap()
                .found()
                .unwrap();
            let inner = info_complexity(
                &mut s,
                eps / DEFAULT_C2,
                Criterion::Abs,
                DEFAULT_COMPLEXITY_CAP,
            )
            .unwrap()
            .found()
            .unwrap();
            let bound = std_complexity_bound(
                &mut s,
                eps,
                Criterion::Abs,
                DEFAULT_C1,
                DEFAULT_C2,
                DEFAULT_COMPLEXITY_CAP,
            )
            .unwrap()
            .found()
            .unwrap();
            assert_eq!(bound, 2 * DEFAULT_C1 * inner);
            assert!(n_all <= bound);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut s = ek_half();
        assert!(matches!(
            info_complexity(&mut s, 0.0, Criterion::Abs, 100),
            Err(ComplexityError::InvalidEpsilon { .. })
        ));
        assert!(matches!(
            std_complexity_bound(&mut s, 0.5, Criterion::Abs, 0, 30.0, 100),
            Err(ComplexityError::InvalidConstants { .. })
        ));
    }
}
