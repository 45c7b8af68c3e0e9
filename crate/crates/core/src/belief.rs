//! Frames of discernment, mass functions, belief and plausibility, Dempster's
//! rule of combination, and discounting.
//!
//! Support is allocated to *subsets* of a frame rather than to single
//! hypotheses, which lets a source express partial ignorance by committing
//! mass to coarser sets, up to the whole frame. Subsets are encoded as
//! bitmasks over the frame's label list, so a frame holds at most
//! [`MAX_FRAME_LABELS`] hypotheses and every set operation is a couple of
//! word-level instructions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Frames hold at most this many hypotheses; subsets fit in a `u16`.
pub const MAX_FRAME_LABELS: usize = 16;

/// Accepted deviation from 1 when normalizing user-supplied assignments.
/// Tolerates inputs quoted to a few decimals.
pub const MASS_SUM_TOLERANCE: f64 = 1e-6;

/// Combination is indeterminate once the retained (non-conflicting) mass
/// drops to this level, i.e. the conflict mass reaches `1 - CONFLICT_EPSILON`.
pub const CONFLICT_EPSILON: f64 = 1e-12;

/// Errors raised by frame construction and mass-function algebra.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BeliefError {
    #[error("a frame needs at least one hypothesis label")]
    EmptyFrame,
    #[error("a frame holds at most {MAX_FRAME_LABELS} labels, got {0}")]
    TooManyLabels(usize),
    #[error("duplicate hypothesis label `{0}`")]
    DuplicateLabel(String),
    #[error("hypothesis labels must be non-empty")]
    EmptyLabel,
    #[error("unknown hypothesis label `{0}`")]
    UnknownLabel(String),
    #[error("subset refers to hypotheses outside the frame")]
    SubsetOutOfFrame,
    #[error("the empty set cannot carry mass")]
    EmptyFocalSet,
    #[error("mass values must be non-negative, got {0}")]
    NegativeMass(f64),
    #[error("mass values sum to {0}, expected 1 within {MASS_SUM_TOLERANCE}")]
    MassSum(f64),
    #[error("mass functions are defined over different frames")]
    FrameMismatch,
    #[error("total conflict: the sources flatly contradict each other and Dempster's rule is indeterminate")]
    TotalConflict,
    #[error("discount rate must lie in [0, 1], got {0}")]
    RateOutOfRange(f64),
    #[error("belief values must lie in [0, 1], got {0}")]
    ValueOutOfRange(f64),
    #[error("cannot combine an empty list of mass functions")]
    EmptyCombination,
}

/// A set of hypotheses, encoded as a bitmask over a frame's labels.
///
/// Bit `i` set means `labels[i]` belongs to the subset. The encoding is only
/// meaningful relative to the [`Frame`] that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u16);

impl Subset {
    /// The empty set.
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u16) -> Subset {
        Subset(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Number of hypotheses in the subset.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }
}

/// An ordered list of distinct hypothesis labels defining the universal set.
///
/// Label order is declaration order and fixes the subset bit encoding, so two
/// frames are interchangeable only when their label lists are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    /// Build a frame from 1..=16 distinct, non-empty labels.
    pub fn new<I, S>(labels: I) -> Result<Frame, BeliefError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(BeliefError::EmptyFrame);
        }
        if labels.len() > MAX_FRAME_LABELS {
            return Err(BeliefError::TooManyLabels(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(BeliefError::EmptyLabel);
            }
            if labels[..i].contains(label) {
                return Err(BeliefError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Frame { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The universal set: every hypothesis in the frame.
    pub fn theta(&self) -> Subset {
        Subset(((1u32 << self.labels.len()) - 1) as u16)
    }

    /// The subset containing exactly one label.
    pub fn singleton(&self, label: &str) -> Result<Subset, BeliefError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| Subset(1 << i))
            .ok_or_else(|| BeliefError::UnknownLabel(label.to_string()))
    }

    /// The subset containing the given labels.
    pub fn subset<'a, I>(&self, labels: I) -> Result<Subset, BeliefError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut bits = Subset::EMPTY;
        for label in labels {
            bits = bits.union(self.singleton(label)?);
        }
        Ok(bits)
    }

    /// Complement relative to this frame's universal set.
    pub fn complement(&self, s: Subset) -> Subset {
        Subset(self.theta().0 & !s.0)
    }

    /// Whether the subset only uses hypotheses from this frame.
    pub fn contains(&self, s: Subset) -> bool {
        s.is_subset_of(self.theta())
    }

    /// Labels belonging to the subset, in frame order.
    pub fn subset_labels(&self, s: Subset) -> Vec<&str> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, _)| s.0 & (1 << i) != 0)
            .map(|(_, l)| l.as_str())
            .collect()
    }

    /// Render a subset as `{a,b}`.
    pub fn format_subset(&self, s: Subset) -> String {
        format!("{{{}}}", self.subset_labels(s).join(","))
    }
}

/// A degree of belief: a number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BeliefValue(f64);

impl BeliefValue {
    pub fn new(value: f64) -> Result<BeliefValue, BeliefError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(BeliefError::ValueOutOfRange(value));
        }
        Ok(BeliefValue(value))
    }

    /// Clamp to `[0, 1]`, absorbing arithmetic residue from sums of masses.
    pub(crate) fn clamped(value: f64) -> BeliefValue {
        BeliefValue(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for BeliefValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.0)
    }
}

/// A basic support assignment: positive mass on non-empty subsets of a frame,
/// normalized to sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<Subset, f64>,
}

impl MassFunction {
    /// The vacuous mass function: all support on the universal set.
    pub fn vacuous(frame: &Frame) -> MassFunction {
        let mut focal = BTreeMap::new();
        focal.insert(frame.theta(), 1.0);
        MassFunction {
            frame: frame.clone(),
            focal,
        }
    }

    /// Build from `(subset, value)` assignments.
    ///
    /// Values must be non-negative, subsets non-empty and within the frame.
    /// Repeated subsets accumulate. The total must lie within
    /// [`MASS_SUM_TOLERANCE`] of 1 and is renormalized to exactly 1.
    pub fn from_assignments(
        frame: &Frame,
        entries: &[(Subset, f64)],
    ) -> Result<MassFunction, BeliefError> {
        let mut focal: BTreeMap<Subset, f64> = BTreeMap::new();
        for &(subset, value) in entries {
            if subset.is_empty() {
                return Err(BeliefError::EmptyFocalSet);
            }
            if !frame.contains(subset) {
                return Err(BeliefError::SubsetOutOfFrame);
            }
            if value < 0.0 || value.is_nan() {
                return Err(BeliefError::NegativeMass(value));
            }
            *focal.entry(subset).or_insert(0.0) += value;
        }
        let sum: f64 = focal.values().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(BeliefError::MassSum(sum));
        }
        Ok(Self::from_raw(frame.clone(), focal))
    }

    /// Normalize a positive-sum map into a mass function, dropping zeros.
    fn from_raw(frame: Frame, focal: BTreeMap<Subset, f64>) -> MassFunction {
        let sum: f64 = focal.values().sum();
        debug_assert!(sum > 0.0, "mass functions need positive total support");
        let focal = focal
            .into_iter()
            .map(|(s, v)| (s, v / sum))
            .filter(|&(_, v)| v > 0.0)
            .collect();
        MassFunction { frame, focal }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Focal elements and their masses, in ascending subset-bit order.
    pub fn focal(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.focal.iter().map(|(&s, &v)| (s, v))
    }

    /// Mass on a specific subset (0 when not focal).
    pub fn mass(&self, subset: Subset) -> f64 {
        self.focal.get(&subset).copied().unwrap_or(0.0)
    }

    /// Mass committed to the universal set: the uncommitted remainder.
    pub fn theta_mass(&self) -> f64 {
        self.mass(self.frame.theta())
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.contains_key(&self.frame.theta())
    }

    /// Total mass committed to subsets of `s`.
    pub fn belief(&self, s: Subset) -> Result<BeliefValue, BeliefError> {
        if !self.frame.contains(s) {
            return Err(BeliefError::SubsetOutOfFrame);
        }
        let sum = self
            .focal
            .iter()
            .filter(|(a, _)| a.is_subset_of(s))
            .map(|(_, v)| v)
            .sum();
        Ok(BeliefValue::clamped(sum))
    }

    /// Mass not committed against `s`: `1 - belief(complement)`.
    pub fn plausibility(&self, s: Subset) -> Result<BeliefValue, BeliefError> {
        let against = self.belief(self.frame.complement(s))?;
        Ok(BeliefValue::clamped(1.0 - against.value()))
    }

    /// Dempster's rule: intersect focal elements pairwise, weight by the
    /// product of masses, and renormalize to exclude empty intersections.
    pub fn combine(&self, other: &MassFunction) -> Result<MassFunction, BeliefError> {
        if self.frame != other.frame {
            return Err(BeliefError::FrameMismatch);
        }
        let mut combined: BTreeMap<Subset, f64> = BTreeMap::new();
        for (a, ma) in self.focal() {
            for (b, mb) in other.focal() {
                let meet = a.intersection(b);
                if !meet.is_empty() {
                    *combined.entry(meet).or_insert(0.0) += ma * mb;
                }
            }
        }
        let retained: f64 = combined.values().sum();
        if retained <= CONFLICT_EPSILON {
            return Err(BeliefError::TotalConflict);
        }
        Ok(Self::from_raw(self.frame.clone(), combined))
    }

    /// Move a fraction `rate` of every commitment onto the universal set,
    /// modeling doubt in the source's reliability.
    pub fn discount(&self, rate: f64) -> Result<MassFunction, BeliefError> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(BeliefError::RateOutOfRange(rate));
        }
        if rate == 0.0 {
            return Ok(self.clone());
        }
        let theta = self.frame.theta();
        let mut focal: BTreeMap<Subset, f64> = self
            .focal
            .iter()
            .map(|(&s, &v)| (s, (1.0 - rate) * v))
            .collect();
        *focal.entry(theta).or_insert(0.0) += rate;
        Ok(Self::from_raw(self.frame.clone(), focal))
    }
}

/// Left fold of Dempster's rule over a non-empty sequence of mass functions.
pub fn combine_all<'a, I>(masses: I) -> Result<MassFunction, BeliefError>
where
    I: IntoIterator<Item = &'a MassFunction>,
{
    let mut iter = masses.into_iter();
    let first = iter.next().ok_or(BeliefError::EmptyCombination)?;
    iter.try_fold(first.clone(), |acc, m| acc.combine(m))
}
