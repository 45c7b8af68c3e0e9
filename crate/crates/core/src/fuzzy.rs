//! Scalar fuzzy measures used to steer belief revision: the degree of
//! conflict inside a belief function, and its significance under a tunable
//! exponent.

use thiserror::Error;

use crate::belief::BeliefValue;

/// Slack allowed when checking that committed beliefs stay within the unit
/// interval; absorbs rounding from upstream combinations.
const COMMITTED_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FuzzyError {
    #[error("fuzzy degrees must lie in [0, 1], got {0}")]
    ValueOutOfRange(f64),
    #[error("belief in a statement and its complement sum to {0}, beyond 1")]
    CommittedBeyondUnit(f64),
    #[error("significance exponent must be a positive finite number, got {0}")]
    BadExponent(f64),
}

/// A fuzzy membership degree: a number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FuzzyDegree(f64);

impl FuzzyDegree {
    pub fn new(value: f64) -> Result<FuzzyDegree, FuzzyError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(FuzzyError::ValueOutOfRange(value));
        }
        Ok(FuzzyDegree(value))
    }

    /// Clamp to `[0, 1]`, absorbing arithmetic residue.
    pub(crate) fn clamped(value: f64) -> FuzzyDegree {
        FuzzyDegree(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Degree of conflict carried by a belief function over a statement and its
/// complement: twice the smaller of the two committed beliefs.
///
/// The measure is zero when either side is unsupported and reaches 1 exactly
/// when both sides carry belief one half. Discounting a source scales both
/// committed beliefs down and therefore never increases the conflict.
pub fn conflict(bel: BeliefValue, bel_complement: BeliefValue) -> Result<FuzzyDegree, FuzzyError> {
    let total = bel.value() + bel_complement.value();
    if total > 1.0 + COMMITTED_SLACK {
        return Err(FuzzyError::CommittedBeyondUnit(total));
    }
    Ok(FuzzyDegree::clamped(
        2.0 * bel.value().min(bel_complement.value()),
    ))
}

/// Significance of a conflict degree: the conflict raised to `gamma`.
///
/// Exponents above 1 demand higher conflict before revision looks justified;
/// `gamma = 1` passes the conflict through unchanged.
pub fn significance(c: FuzzyDegree, gamma: f64) -> Result<FuzzyDegree, FuzzyError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(FuzzyError::BadExponent(gamma));
    }
    Ok(FuzzyDegree::clamped(c.value().powf(gamma)))
}
