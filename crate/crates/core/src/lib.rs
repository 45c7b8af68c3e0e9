//! Non-monotonic probabilistic reasoning over Dempster-Shafer belief
//! functions.
//!
//! The crate combines two styles of reasoning about uncertain evidence.
//! Quantitatively, support for hypotheses is carried by mass functions over
//! a frame of discernment, aggregated with Dempster's rule and weakened by
//! discounting. Qualitatively, every statement and rule is treated as a
//! revisable assumption: the engine tracks which reasons currently back each
//! conclusion, measures how much of that backing is itself unsupported, and
//! when two lines of reasoning collide it traces the conflict to the most
//! suspect assumption and discounts the evidence behind it.
//!
//! Fuzzy measures provide the glue between the two layers: conflict inside a
//! belief function, significance of that conflict, graded in/out membership
//! of reasons on support lists, and the foundations and supposition scores
//! that steer dependency-directed backtracking.
//!
//! # Modules
//!
//! - [`belief`]: frames, mass functions, belief and plausibility, Dempster's
//!   rule, discounting.
//! - [`fuzzy`]: conflict and significance measures.
//! - [`network`]: statements, rules, derived support lists, propagation.
//! - [`revision`]: foundations, suppositions, culprit selection, and the
//!   revision loop.
//! - [`kb`]: the knowledge-base and mass-file text formats.
//! - [`report`]: human-readable tables and line-delimited JSON records.
//! - [`cli`]: the `nmp` command-line tool (`check`, `infer`, `resolve`,
//!   `combine`).
//!
//! # Combining conflicting reports
//!
//! ```
//! use nmp::belief::{Frame, MassFunction};
//!
//! let frame = Frame::new(["field", "forest", "building"])?;
//! let a = MassFunction::from_assignments(&frame, &[
//!     (frame.singleton("field")?, 0.99),
//!     (frame.singleton("forest")?, 0.01),
//! ])?;
//! let b = MassFunction::from_assignments(&frame, &[
//!     (frame.singleton("forest")?, 0.01),
//!     (frame.singleton("building")?, 0.99),
//! ])?;
//!
//! // Taken at face value, all support lands on the hypothesis neither
//! // source considered likely.
//! let raw = a.combine(&b)?;
//! assert!((raw.mass(frame.singleton("forest")?) - 1.0).abs() < 1e-9);
//!
//! // Doubting each source slightly yields a bimodal, far more plausible
//! // picture.
//! let soft = a.discount(0.01)?.combine(&b.discount(0.02)?)?;
//! assert!(soft.belief(frame.singleton("field")?)?.value() > 0.6);
//! # Ok::<(), nmp::belief::BeliefError>(())
//! ```
//!
//! # Resolving the conflict instead
//!
//! ```
//! use nmp::kb::parse_kb;
//! use nmp::revision::{resolve_loop, EngineParams};
//!
//! let kb = parse_kb("\
//! statement building
//! evidence photo for building yes=0.99 no=0.01 discount=0.01
//! evidence humint for building yes=0.01 no=0.99 discount=0.02
//! query building
//! ")?;
//! let outcome = resolve_loop(&kb, &EngineParams::for_kb(&kb)).unwrap();
//! assert!(outcome.revisions > 0);
//! // The engine raised the discounts of the clashing sources.
//! assert!(outcome.kb.source("photo").unwrap().discount > 0.01);
//! # Ok::<(), nmp::kb::KbError>(())
//! ```

pub mod belief;
pub mod cli;
pub mod fuzzy;
pub mod kb;
pub mod network;
pub mod report;
pub mod revision;

pub use belief::{combine_all, BeliefError, BeliefValue, Frame, MassFunction, Subset};
pub use fuzzy::{conflict, significance, FuzzyDegree};
pub use kb::{parse_kb, parse_mass_file, serialize_kb, KbError, KnowledgeBase};
pub use network::{build_network, BeliefState, Network, NetworkError, SupportPair};
pub use revision::{
    apply_revision, foundations, resolve_loop, select_culprit, select_revision_target,
    suppositions, EngineParams, ResolveOutcome, RevisionError, RevisionTrace,
};
