//! Assumption tracking and belief revision: foundations and supposition
//! measures, culprit selection, the revision gate, and the loop that
//! discounts culprits until the conflict no longer justifies revision.
//!
//! When a monitored statement carries significant conflict, the engine traces
//! the statement's support back through reason chains (its foundations),
//! scores every statement and rule on how much the target makes it a
//! supposition (foundations strength capped by its own assumption degree),
//! and picks the maximal supposition as the culprit. The culprit's weakest
//! reason is then revised — one discount step on the underlying source — as
//! long as the conflict's significance outweighs the reason's in-membership.

use std::collections::HashMap;

use thiserror::Error;

use crate::belief::BeliefValue;
use crate::fuzzy::{self, FuzzyDegree};
use crate::kb::KnowledgeBase;
use crate::network::{build_network, BeliefState, Network, NetworkError, SupportPair};

/// A source is treated as fully discounted once its rate is this close to 1.
pub const SATURATION_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RevisionError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("`{0}` has no foundations to trace")]
    EmptyFoundations(String),
    #[error("`{0}` is already fully discounted")]
    FullyDiscounted(String),
    #[error("`{0}` has no sources to revise")]
    NotRevisable(String),
    #[error("invalid engine parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("resolution aborted: {source}")]
    Aborted {
        source: Box<RevisionError>,
        trace: Box<RevisionTrace>,
    },
}

/// Tunable parameters of the revision loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    /// Significance exponent applied to conflict degrees.
    pub gamma: f64,
    /// Step size of one discount revision: `r <- r + delta * (1 - r)`.
    pub delta: f64,
    /// Upper bound on loop iterations.
    pub max_iter: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            gamma: 1.0,
            delta: 0.25,
            max_iter: 100,
        }
    }
}

impl EngineParams {
    /// Defaults overridden by the knowledge base's `param` declarations.
    pub fn for_kb(kb: &KnowledgeBase) -> EngineParams {
        let d = EngineParams::default();
        EngineParams {
            gamma: kb.params.gamma.unwrap_or(d.gamma),
            delta: kb.params.delta.unwrap_or(d.delta),
            max_iter: kb.params.max_iter.unwrap_or(d.max_iter),
        }
    }

    pub fn validate(&self) -> Result<(), RevisionError> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(RevisionError::InvalidParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(RevisionError::InvalidParams(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        if self.max_iter == 0 {
            return Err(RevisionError::InvalidParams(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Graded reachability of elements from a target through reason chains:
/// for each pair and element, the best chain's weakest in-membership.
#[derive(Debug, Clone)]
pub struct Foundations {
    target: String,
    pairs: Vec<(SupportPair, f64)>,
    elements: Vec<(String, f64)>,
}

impl Foundations {
    pub fn target(&self) -> &str {
        &self.target
    }

    /// Pair degrees, in discovery order.
    pub fn pairs(&self) -> &[(SupportPair, f64)] {
        &self.pairs
    }

    /// Element degrees, in declaration order.
    pub fn elements(&self) -> &[(String, f64)] {
        &self.elements
    }

    pub fn element(&self, id: &str) -> Option<f64> {
        self.elements.iter().find(|(e, _)| e == id).map(|&(_, d)| d)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Compute the foundations of `target` by max-min dynamic programming over
/// the support graph: a pair's degree is the in-membership of the weakest
/// link on the strongest chain reaching it; an element's degree is the best
/// degree among pairs containing it.
pub fn foundations(
    net: &Network,
    beliefs: &BeliefState,
    target: &str,
) -> Result<Foundations, RevisionError> {
    if !net.is_statement(target) && net.source(target).is_none() {
        return Err(RevisionError::UnknownId(target.to_string()));
    }

    // Reachable elements and their in-degrees within the reachable subgraph.
    let mut indegree: HashMap<&str, usize> = HashMap::new();
    let mut stack = vec![target];
    let mut seen: HashMap<&str, ()> = HashMap::new();
    seen.insert(target, ());
    while let Some(owner) = stack.pop() {
        for pair in net.support_list(owner) {
            for member in pair.members() {
                *indegree.entry(member).or_insert(0) += 1;
                if seen.insert(member, ()).is_none() {
                    stack.push(member);
                }
            }
        }
    }

    // Relax owners in topological order so each owner's degree is final
    // before its support list extends the chains.
    let mut degree: HashMap<&str, f64> = HashMap::new();
    degree.insert(target, 1.0);
    let mut pairs = Vec::new();
    let mut ready = vec![target];
    while let Some(owner) = ready.pop() {
        let owner_degree = degree[owner];
        for pair in net.support_list(owner) {
            let mu_in = net.mu_in(pair, beliefs)?.value();
            let reach = owner_degree.min(mu_in);
            pairs.push((pair.clone(), reach));
            for member in pair.members() {
                let d = degree.entry(member).or_insert(0.0);
                *d = d.max(reach);
                let remaining = indegree.get_mut(member).expect("counted above");
                *remaining -= 1;
                if *remaining == 0 {
                    ready.push(member);
                }
            }
        }
    }

    let elements = net
        .declaration_order()
        .filter(|id| *id != target)
        .filter_map(|id| degree.get(id).map(|&d| (id.to_string(), d)))
        .collect();
    Ok(Foundations {
        target: target.to_string(),
        pairs,
        elements,
    })
}

/// Supposition degrees relative to `target`: for every element in the
/// foundations, the smaller of its foundations degree and its assumption
/// degree. These are the candidates for retraction, in declaration order.
pub fn suppositions(
    net: &Network,
    beliefs: &BeliefState,
    target: &str,
) -> Result<Vec<(String, f64)>, RevisionError> {
    let found = foundations(net, beliefs, target)?;
    let mut out = Vec::with_capacity(found.elements().len());
    for (id, reach) in found.elements() {
        let assumption = net.mu_assumption(id, beliefs)?.value();
        out.push((id.clone(), reach.min(assumption)));
    }
    Ok(out)
}

/// Pick the culprit: the element with the maximal supposition degree, ties
/// broken toward the earliest declaration.
pub fn select_culprit(
    net: &Network,
    beliefs: &BeliefState,
    target: &str,
) -> Result<(String, f64), RevisionError> {
    let candidates = suppositions(net, beliefs, target)?;
    candidates
        .into_iter()
        .reduce(|best, next| if next.1 > best.1 { next } else { best })
        .ok_or_else(|| RevisionError::EmptyFoundations(target.to_string()))
}

/// The reason chosen for revision and the element inside it to revise.
#[derive(Debug, Clone, PartialEq)]
pub struct RevisionTarget {
    /// The culprit's most-out support pair; `None` when the culprit has no
    /// reasons at all and is revised directly.
    pub pair: Option<SupportPair>,
    pub mu_out: f64,
    pub mu_in: f64,
    /// The statement or source to revise.
    pub element: String,
}

/// Pick what to revise for a culprit: the most-out pair on its support list,
/// and within that pair the member with the larger uncommitted mass (ties
/// prefer the statement). A culprit without reasons is revised directly and
/// offers no resistance.
pub fn select_revision_target(
    net: &Network,
    beliefs: &BeliefState,
    culprit: &str,
) -> Result<RevisionTarget, RevisionError> {
    let list = net.support_list(culprit);
    if list.is_empty() {
        return Ok(RevisionTarget {
            pair: None,
            mu_out: 1.0,
            mu_in: 0.0,
            element: culprit.to_string(),
        });
    }
    let mut best: Option<(&SupportPair, f64)> = None;
    for pair in list {
        let out = net.mu_out(pair, beliefs)?.value();
        if best.is_none_or(|(_, b)| out > b) {
            best = Some((pair, out));
        }
    }
    let (pair, mu_out) = best.expect("non-empty support list");
    let element = match (&pair.statement, &pair.rule) {
        (Some(stmt), Some(rule)) => {
            let stmt_theta = beliefs
                .theta_mass(stmt)
                .ok_or_else(|| RevisionError::UnknownId(stmt.clone()))?;
            let rule_theta = net.source_theta_mass(rule)?;
            if stmt_theta >= rule_theta {
                stmt.clone()
            } else {
                rule.clone()
            }
        }
        (Some(stmt), None) => stmt.clone(),
        (None, Some(rule)) => rule.clone(),
        (None, None) => unreachable!("support pairs have at least one member"),
    };
    Ok(RevisionTarget {
        pair: Some(pair.clone()),
        mu_out,
        mu_in: 1.0 - mu_out,
        element,
    })
}

/// Apply one discount revision to an element, returning the revised
/// knowledge base.
///
/// A source's discount moves a quarter-step (by `delta`) toward 1:
/// `r <- r + delta * (1 - r)`, strictly raising its uncommitted mass.
/// Revising a statement discounts every source concluding it, since a
/// statement's support function is the combination of its sources.
pub fn apply_revision(
    kb: &KnowledgeBase,
    element: &str,
    delta: f64,
) -> Result<KnowledgeBase, RevisionError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(RevisionError::InvalidParams(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    let step = |r: f64| r + delta * (1.0 - r);
    let mut revised = kb.clone();
    if kb.source(element).is_some() {
        let src = revised
            .sources
            .iter_mut()
            .find(|s| s.id == element)
            .expect("present above");
        if src.discount >= 1.0 - SATURATION_EPSILON {
            return Err(RevisionError::FullyDiscounted(element.to_string()));
        }
        src.discount = step(src.discount);
        return Ok(revised);
    }
    if kb.is_statement(element) {
        let mut any_source = false;
        let mut any_revised = false;
        for src in revised
            .sources
            .iter_mut()
            .filter(|s| s.consequent == element)
        {
            any_source = true;
            if src.discount < 1.0 - SATURATION_EPSILON {
                src.discount = step(src.discount);
                any_revised = true;
            }
        }
        if !any_source {
            return Err(RevisionError::NotRevisable(element.to_string()));
        }
        if !any_revised {
            return Err(RevisionError::FullyDiscounted(element.to_string()));
        }
        return Ok(revised);
    }
    Err(RevisionError::UnknownId(element.to_string()))
}

/// One loop iteration's measurements and, when the gate passed, the applied
/// revision.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// The monitored statement with the most significant conflict.
    pub statement: String,
    pub mu_conflict: f64,
    pub mu_signif: f64,
    pub culprit: Option<String>,
    pub mu_supposition: Option<f64>,
    /// Statement member of the chosen pair (`None` for the marker slot or
    /// when no pair was chosen).
    pub pair_statement: Option<String>,
    pub pair_rule: Option<String>,
    pub mu_out: Option<f64>,
    pub mu_in: Option<f64>,
    pub gate_passed: bool,
    pub revised: Option<String>,
    pub theta_before: Option<f64>,
    pub theta_after: Option<f64>,
}

/// Append-only log of the revision loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RevisionTrace {
    entries: Vec<TraceEntry>,
}

impl RevisionTrace {
    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of applied revisions recorded.
    pub fn revisions(&self) -> usize {
        self.entries.iter().filter(|e| e.revised.is_some()).count()
    }

    fn push(&mut self, entry: TraceEntry) {
        self.entries.push(entry);
    }
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The knowledge base declares no statements.
    NoStatements,
    /// No monitored statement carries any conflict.
    NoConflict,
    /// Conflict significance fell short of the chosen reason's resistance.
    GateFailed,
    /// The iteration bound was reached.
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::NoStatements => "no-statements",
            StopReason::NoConflict => "no-conflict",
            StopReason::GateFailed => "gate-failed",
            StopReason::MaxIterations => "max-iterations",
        };
        f.write_str(s)
    }
}

/// Result of a completed resolve loop.
#[derive(Debug, Clone)]
pub struct ResolveOutcome {
    /// The knowledge base with all applied discount revisions.
    pub kb: KnowledgeBase,
    /// Beliefs propagated from the final knowledge base.
    pub beliefs: BeliefState,
    pub trace: RevisionTrace,
    pub revisions: usize,
    pub stopped: StopReason,
}

/// Conflict carried by one statement's propagated mass: twice the smaller
/// committed belief between its poles.
pub fn statement_conflict(beliefs: &BeliefState, id: &str) -> Option<FuzzyDegree> {
    let yes = beliefs.bel_yes(id)?;
    let no = beliefs.bel_no(id)?;
    Some(pole_conflict(yes, no))
}

fn pole_conflict(yes: BeliefValue, no: BeliefValue) -> FuzzyDegree {
    // Pole beliefs come from one normalized mass function, so their sum
    // cannot exceed 1 beyond rounding.
    fuzzy::conflict(yes, no).expect("pole beliefs within the unit interval")
}

fn abort(error: RevisionError, trace: RevisionTrace) -> RevisionError {
    RevisionError::Aborted {
        source: Box::new(error),
        trace: Box::new(trace),
    }
}

/// Run the conflict-resolution loop.
///
/// Each iteration propagates beliefs, measures conflict on every monitored
/// statement (declared queries, else all statements), and takes the most
/// significant one. If its significance is zero there is nothing to resolve
/// and the loop stops. Otherwise the culprit and revision target are
/// selected; the revision applies only when the significance is at least the
/// chosen reason's in-membership, else the loop stops. Every measurement,
/// gate evaluation, and applied revision is recorded in the trace. The loop
/// is bounded by `params.max_iter`.
pub fn resolve_loop(
    kb: &KnowledgeBase,
    params: &EngineParams,
) -> Result<ResolveOutcome, RevisionError> {
    params.validate()?;
    let mut kb = kb.clone();
    let mut trace = RevisionTrace::default();
    let monitored = kb.monitored();

    let mut net = build_network(&kb)?;
    let mut beliefs = match net.propagate() {
        Ok(b) => b,
        Err(e) => return Err(abort(e.into(), trace)),
    };

    if kb.statements.is_empty() {
        return Ok(ResolveOutcome {
            kb,
            beliefs,
            trace,
            revisions: 0,
            stopped: StopReason::NoStatements,
        });
    }

    let mut revisions = 0usize;
    let mut stopped = StopReason::MaxIterations;
    for iteration in 1..=params.max_iter {
        // The statement whose conflict is most significant drives this round.
        let mut best: Option<(&str, f64, f64)> = None;
        for stmt in &monitored {
            let conflict =
                statement_conflict(&beliefs, stmt).expect("monitored statements are propagated");
            let signif = fuzzy::significance(conflict, params.gamma)
                .expect("params validated")
                .value();
            if best.is_none_or(|(_, _, s)| signif > s) {
                best = Some((stmt, conflict.value(), signif));
            }
        }
        let (statement, mu_conflict, mu_signif) = best
            .map(|(s, c, g)| (s.to_string(), c, g))
            .expect("non-empty KB");

        if mu_signif <= 0.0 {
            trace.push(TraceEntry {
                iteration,
                statement,
                mu_conflict,
                mu_signif,
                culprit: None,
                mu_supposition: None,
                pair_statement: None,
                pair_rule: None,
                mu_out: None,
                mu_in: None,
                gate_passed: false,
                revised: None,
                theta_before: None,
                theta_after: None,
            });
            stopped = StopReason::NoConflict;
            break;
        }

        let (culprit, mu_supposition) = match select_culprit(&net, &beliefs, &statement) {
            Ok(c) => c,
            Err(e) => return Err(abort(e, trace)),
        };
        let target = match select_revision_target(&net, &beliefs, &culprit) {
            Ok(t) => t,
            Err(e) => return Err(abort(e, trace)),
        };
        let gate_passed = mu_signif >= target.mu_in;

        let mut entry = TraceEntry {
            iteration,
            statement,
            mu_conflict,
            mu_signif,
            culprit: Some(culprit),
            mu_supposition: Some(mu_supposition),
            pair_statement: target.pair.as_ref().and_then(|p| p.statement.clone()),
            pair_rule: target.pair.as_ref().and_then(|p| p.rule.clone()),
            mu_out: Some(target.mu_out),
            mu_in: Some(target.mu_in),
            gate_passed,
            revised: None,
            theta_before: None,
            theta_after: None,
        };

        if !gate_passed {
            trace.push(entry);
            stopped = StopReason::GateFailed;
            break;
        }

        entry.theta_before = element_theta(&net, &beliefs, &target.element);
        let revised_kb = match apply_revision(&kb, &target.element, params.delta) {
            Ok(k) => k,
            Err(e) => {
                trace.push(entry);
                return Err(abort(e, trace));
            }
        };
        let revised_net = match build_network(&revised_kb) {
            Ok(n) => n,
            Err(e) => {
                trace.push(entry);
                return Err(abort(e.into(), trace));
            }
        };
        match revised_net.propagate() {
            Ok(new_beliefs) => {
                entry.revised = Some(target.element.clone());
                entry.theta_after = element_theta(&revised_net, &new_beliefs, &target.element);
                trace.push(entry);
                revisions += 1;
                kb = revised_kb;
                net = revised_net;
                beliefs = new_beliefs;
            }
            Err(e) => {
                entry.revised = Some(target.element.clone());
                entry.theta_after = revised_net.source_theta_mass(&target.element).ok();
                trace.push(entry);
                return Err(abort(e.into(), trace));
            }
        }
    }

    Ok(ResolveOutcome {
        kb,
        beliefs,
        trace,
        revisions,
        stopped,
    })
}

/// Uncommitted mass of an element: a statement's propagated mass on the
/// universal set, or a source's discounted base mass on it.
fn element_theta(net: &Network, beliefs: &BeliefState, id: &str) -> Option<f64> {
    if net.is_statement(id) {
        beliefs.theta_mass(id)
    } else {
        net.source_theta_mass(id).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    fn setup(text: &str) -> (KnowledgeBase, Network, BeliefState) {
        let kb = parse_kb(text).unwrap();
        let net = build_network(&kb).unwrap();
        let beliefs = net.propagate().unwrap();
        (kb, net, beliefs)
    }

    /// Exhaustive chain enumeration, used as the oracle for the max-min DP.
    fn brute_force_foundations(
        net: &Network,
        beliefs: &BeliefState,
        target: &str,
    ) -> HashMap<String, f64> {
        fn walk(
            net: &Network,
            beliefs: &BeliefState,
            owner: &str,
            strength: f64,
            best: &mut HashMap<String, f64>,
        ) {
            for pair in net.support_list(owner) {
                let mu_in = net.mu_in(pair, beliefs).unwrap().value();
                let reach = strength.min(mu_in);
                for member in pair.members() {
                    let d = best.entry(member.to_string()).or_insert(0.0);
                    *d = d.max(reach);
                    walk(net, beliefs, member, reach, best);
                }
            }
        }
        let mut best = HashMap::new();
        walk(net, beliefs, target, 1.0, &mut best);
        best
    }

    const TWO_ANALYSTS: &str = "\
statement building
evidence photo for building yes=0.99 no=0.01 discount=0.01
evidence humint for building yes=0.01 no=0.99 discount=0.02
query building
";

    #[test]
    fn foundations_of_a_direct_pair_is_its_in_membership() {
        let (_, net, beliefs) = setup(
            "\
statement b
evidence e for b yes=0.7 no=0.1 unknown=0.2
",
        );
        let found = foundations(&net, &beliefs, "b").unwrap();
        assert!((found.element("e").unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(found.pairs().len(), 1);
    }

    #[test]
    fn foundations_chains_take_the_weakest_link() {
        // Pair (t, r1) on b has mu_in .8; the evidence pair under t has .6.
        let (_, net, beliefs) = setup(
            "\
statement t
statement b
evidence e for t yes=0.5 no=0.1 unknown=0.4
rule r1 if t then b yes=0.7 no=0.1 unknown=0.2
",
        );
        let found = foundations(&net, &beliefs, "b").unwrap();
        assert!((found.element("r1").unwrap() - 0.8).abs() < 1e-12);
        assert!((found.element("t").unwrap() - 0.8).abs() < 1e-12);
        assert!((found.element("e").unwrap() - 0.6).abs() < 1e-12);
    }

    /// Two chains reach the shared statement `s`: through t1 with link
    /// strengths (.9, .7) and through t2 with (.5, .95). The stronger
    /// chain's weakest link wins.
    const DIAMOND: &str = "\
statement s
statement t1
statement t2
statement b
evidence es for s yes=0.5 no=0.2 unknown=0.3
rule r3 if s then t1 yes=0.4 no=0.3 unknown=0.3
rule r4 if s then t2 yes=0.9 no=0.05 unknown=0.05
rule r1 if t1 then b yes=0.6 no=0.3 unknown=0.1
rule r2 if t2 then b yes=0.2 no=0.3 unknown=0.5
";

    #[test]
    fn foundations_diamond_takes_the_best_chain() {
        let (_, net, beliefs) = setup(DIAMOND);
        let found = foundations(&net, &beliefs, "b").unwrap();
        assert!((found.element("s").unwrap() - 0.7).abs() < 1e-9);
        assert!((found.element("t1").unwrap() - 0.9).abs() < 1e-9);
        assert!((found.element("t2").unwrap() - 0.5).abs() < 1e-9);
        assert!((found.element("r3").unwrap() - 0.7).abs() < 1e-9);
        assert!((found.element("r4").unwrap() - 0.5).abs() < 1e-9);

        let oracle = brute_force_foundations(&net, &beliefs, "b");
        for (id, degree) in found.elements() {
            assert_eq!(oracle[id], *degree, "element {id}");
        }
        assert_eq!(oracle.len(), found.elements().len());
    }

    #[test]
    fn foundations_rejects_unknown_targets() {
        let (_, net, beliefs) = setup("statement b\n");
        assert_eq!(
            foundations(&net, &beliefs, "ghost").unwrap_err(),
            RevisionError::UnknownId("ghost".into())
        );
        assert!(foundations(&net, &beliefs, "b").unwrap().is_empty());
    }

    #[test]
    fn suppositions_cap_foundations_by_assumption() {
        let (_, net, beliefs) = setup(DIAMOND);
        let supp: HashMap<String, f64> = suppositions(&net, &beliefs, "b")
            .unwrap()
            .into_iter()
            .collect();
        // es has no reasons: assumption 1, so its supposition is its reach.
        assert!((supp["es"] - 0.7).abs() < 1e-9);
        // s's only reason pair carries mu_out .3: assumption .3 caps reach .7.
        assert!((supp["s"] - 0.3).abs() < 1e-9);
        // Zero assumption forces a zero supposition regardless of reach.
        let (_, net, beliefs) = setup(
            "\
statement t
statement b
evidence et for t yes=1 no=0
rule r if t then b yes=0.6 no=0.4
evidence eb for b yes=0.3 no=0.2 unknown=0.5
",
        );
        let supp: HashMap<String, f64> = suppositions(&net, &beliefs, "b")
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(supp["t"], 0.0);
    }

    #[test]
    fn culprit_is_the_maximal_supposition() {
        let (_, net, beliefs) = setup(DIAMOND);
        // Suppositions: s and t1 are capped at .3 by their reasons' out-ness,
        // t2 at .05; the reasonless rules keep their full reach, and r1's .9
        // tops the list.
        let (culprit, degree) = select_culprit(&net, &beliefs, "b").unwrap();
        assert_eq!(culprit, "r1");
        assert!((degree - 0.9).abs() < 1e-9);
    }

    #[test]
    fn culprit_ties_break_toward_declaration_order() {
        let (_, net, beliefs) = setup(
            "\
statement b
evidence e1 for b yes=0.4 no=0.3 unknown=0.3
evidence e2 for b yes=0.3 no=0.4 unknown=0.3
",
        );
        // Both sources leave .3 uncommitted: suppositions tie at .7.
        let (culprit, degree) = select_culprit(&net, &beliefs, "b").unwrap();
        assert_eq!(culprit, "e1");
        assert!((degree - 0.7).abs() < 1e-9);
    }

    #[test]
    fn culprit_on_a_bare_statement_errors() {
        let (_, net, beliefs) = setup("statement b\n");
        assert_eq!(
            select_culprit(&net, &beliefs, "b").unwrap_err(),
            RevisionError::EmptyFoundations("b".into())
        );
    }

    #[test]
    fn three_node_chain_culprit_by_hand() {
        // b <- r1(t), t <- et. Reach: r1 = t = .9 (pair out .1), et = .6.
        // Assumptions: r1 has none (1), t's single reason is .4 out, et 1.
        // Suppositions: r1 = .9, t = min(.9, .4) = .4, et = .6.
        let (_, net, beliefs) = setup(
            "\
statement t
statement b
evidence et for t yes=0.5 no=0.1 unknown=0.4
rule r1 if t then b yes=0.7 no=0.2 unknown=0.1
",
        );
        let supp: HashMap<String, f64> = suppositions(&net, &beliefs, "b")
            .unwrap()
            .into_iter()
            .collect();
        assert!((supp["r1"] - 0.9).abs() < 1e-12);
        assert!((supp["t"] - 0.4).abs() < 1e-12);
        assert!((supp["et"] - 0.6).abs() < 1e-12);
        let (culprit, degree) = select_culprit(&net, &beliefs, "b").unwrap();
        assert_eq!(culprit, "r1");
        assert!((degree - 0.9).abs() < 1e-12);
    }

    #[test]
    fn revision_target_takes_the_most_out_pair() {
        // Culprit b has two reason pairs with mu_out .2 and .6.
        let (_, net, beliefs) = setup(
            "\
statement t
statement u
statement b
evidence et for t yes=0.5 no=0.3 unknown=0.2
evidence eu for u yes=0.2 no=0.2 unknown=0.6
rule r1 if t then b yes=0.6 no=0.1 unknown=0.3
rule r2 if u then b yes=0.1 no=0.2 unknown=0.7
",
        );
        let target = select_revision_target(&net, &beliefs, "b").unwrap();
        let pair = target.pair.unwrap();
        assert_eq!(pair.statement.as_deref(), Some("u"));
        assert_eq!(pair.rule.as_deref(), Some("r2"));
        assert!((target.mu_out - 0.6).abs() < 1e-12);
        assert!((target.mu_in - 0.4).abs() < 1e-12);
        // u leaves .6 open, r2 leaves .7: revise the rule.
        assert_eq!(target.element, "r2");
    }

    #[test]
    fn revision_target_prefers_the_statement_on_ties_and_larger_theta() {
        // Statement theta .4 vs rule theta .1: revise the statement.
        let (_, net, beliefs) = setup(
            "\
statement t
statement b
evidence et for t yes=0.4 no=0.2 unknown=0.4
rule r if t then b yes=0.5 no=0.4 unknown=0.1
",
        );
        let target = select_revision_target(&net, &beliefs, "b").unwrap();
        assert_eq!(target.element, "t");
        assert!((target.mu_out - 0.1).abs() < 1e-12);

        // Equal uncommitted masses: the statement still wins.
        let (_, net, beliefs) = setup(
            "\
statement t
statement b
evidence et for t yes=0.4 no=0.3 unknown=0.3
rule r if t then b yes=0.5 no=0.2 unknown=0.3
",
        );
        let target = select_revision_target(&net, &beliefs, "b").unwrap();
        assert_eq!(target.element, "t");
    }

    #[test]
    fn culprit_without_reasons_is_revised_directly() {
        let (_, net, beliefs) = setup(TWO_ANALYSTS);
        let target = select_revision_target(&net, &beliefs, "photo").unwrap();
        assert_eq!(target.pair, None);
        assert_eq!(target.element, "photo");
        assert_eq!(target.mu_out, 1.0);
        assert_eq!(target.mu_in, 0.0);
    }

    #[test]
    fn apply_revision_steps_the_discount() {
        let kb = parse_kb(TWO_ANALYSTS).unwrap();
        let revised = apply_revision(&kb, "photo", 0.25).unwrap();
        assert!((revised.source("photo").unwrap().discount - 0.2575).abs() < 1e-12);
        assert_eq!(revised.source("humint").unwrap().discount, 0.02);

        let mut kb2 = kb.clone();
        kb2.sources[0].discount = 0.0;
        let revised = apply_revision(&kb2, "photo", 1.0).unwrap();
        assert_eq!(revised.source("photo").unwrap().discount, 1.0);

        let mut saturated = kb.clone();
        saturated.sources[0].discount = 0.9999999995;
        assert_eq!(
            apply_revision(&saturated, "photo", 0.25).unwrap_err(),
            RevisionError::FullyDiscounted("photo".into())
        );

        assert_eq!(
            apply_revision(&kb, "ghost", 0.25).unwrap_err(),
            RevisionError::UnknownId("ghost".into())
        );
    }

    #[test]
    fn apply_revision_on_a_statement_discounts_its_sources() {
        let kb = parse_kb(TWO_ANALYSTS).unwrap();
        let revised = apply_revision(&kb, "building", 0.5).unwrap();
        assert!((revised.source("photo").unwrap().discount - 0.505).abs() < 1e-12);
        assert!((revised.source("humint").unwrap().discount - 0.51).abs() < 1e-12);

        let bare = parse_kb("statement b\n").unwrap();
        assert_eq!(
            apply_revision(&bare, "b", 0.25).unwrap_err(),
            RevisionError::NotRevisable("b".into())
        );
    }

    #[test]
    fn resolve_loop_discounts_the_conflicting_analysts() {
        let kb = parse_kb(TWO_ANALYSTS).unwrap();
        let params = EngineParams {
            max_iter: 4,
            ..EngineParams::default()
        };
        let outcome = resolve_loop(&kb, &params).unwrap();
        assert_eq!(outcome.revisions, 4);
        assert_eq!(outcome.stopped, StopReason::MaxIterations);
        let entries = outcome.trace.entries();
        assert_eq!(entries.len(), 4);

        // Round 1: combined beliefs .5979 for / .3980 against.
        let e1 = &entries[0];
        assert!((e1.mu_conflict - 0.795_960).abs() < 1e-5);
        assert_eq!(e1.mu_signif, e1.mu_conflict);
        assert_eq!(e1.culprit.as_deref(), Some("photo"));
        assert!((e1.mu_supposition.unwrap() - 0.99).abs() < 1e-12);
        assert!(e1.gate_passed);
        assert_eq!(e1.revised.as_deref(), Some("photo"));
        assert!((e1.theta_before.unwrap() - 0.01).abs() < 1e-12);
        assert!((e1.theta_after.unwrap() - 0.2575).abs() < 1e-12);

        // The culprit alternates as each discount overtakes the other's
        // supposition degree.
        assert_eq!(entries[1].culprit.as_deref(), Some("humint"));
        assert!((entries[1].theta_after.unwrap() - 0.265).abs() < 1e-12);
        assert_eq!(entries[2].culprit.as_deref(), Some("photo"));
        assert!((entries[2].theta_after.unwrap() - 0.443_125).abs() < 1e-12);
        assert_eq!(entries[3].culprit.as_deref(), Some("humint"));
        assert!((entries[3].theta_after.unwrap() - 0.448_75).abs() < 1e-12);

        // Every applied revision passed its recorded gate and strictly
        // raised the revised element's uncommitted mass.
        for e in entries {
            assert!(e.mu_signif >= e.mu_in.unwrap());
            assert!(e.theta_after.unwrap() > e.theta_before.unwrap());
        }

        // Conflict shrinks as the sources are discounted.
        let final_conflict = statement_conflict(&outcome.beliefs, "building")
            .unwrap()
            .value();
        assert!(final_conflict < entries[0].mu_conflict);
    }

    #[test]
    fn resolve_loop_stops_on_zero_conflict() {
        let outcome = resolve_loop(
            &parse_kb(
                "\
statement a
statement b
evidence e1 for a yes=1 no=0
evidence e2 for a yes=1 no=0
rule r if a then b yes=1 no=0
query b
",
            )
            .unwrap(),
            &EngineParams::default(),
        )
        .unwrap();
        assert_eq!(outcome.revisions, 0);
        assert_eq!(outcome.stopped, StopReason::NoConflict);
        assert_eq!(outcome.trace.len(), 1);
        let entry = &outcome.trace.entries()[0];
        assert_eq!(entry.mu_conflict, 0.0);
        assert!(!entry.gate_passed);
        assert_eq!(entry.culprit, None);
    }

    #[test]
    fn resolve_loop_gate_fails_against_well_backed_reasons() {
        // Mild conflict on b; the culprit's only reason is mostly out
        // (mu_in .1), but the significance .0068 is smaller still.
        let kb = parse_kb(
            "\
statement t
statement b
evidence e1 for b yes=0.97 no=0.03
evidence e2 for b yes=0.9 no=0.1
evidence et for t yes=0.1 no=0 unknown=0.9
reason e1 includes t
reason e2 includes t
query b
",
        )
        .unwrap();
        let outcome = resolve_loop(&kb, &EngineParams::default()).unwrap();
        assert_eq!(outcome.revisions, 0);
        assert_eq!(outcome.stopped, StopReason::GateFailed);
        let entry = &outcome.trace.entries()[0];
        assert_eq!(entry.culprit.as_deref(), Some("e1"));
        assert!((entry.mu_in.unwrap() - 0.1).abs() < 1e-9);
        assert!(entry.mu_signif < entry.mu_in.unwrap());
        assert!(!entry.gate_passed);
        assert_eq!(entry.revised, None);
    }

    #[test]
    fn resolve_loop_can_revise_a_statement_through_its_sources() {
        // Suppositions: e1 and e2 score .7 (their declared reason t leaves
        // .7 uncommitted), t itself only .3. The culprit e1's weakest reason
        // is the pair (t, -), whose only member is the statement t, so the
        // revision redirects onto t's evidence.
        let kb = parse_kb(
            "\
statement t
statement b
evidence e1 for b yes=0.6 no=0.4
evidence e2 for b yes=0.4 no=0.6
evidence et for t yes=0.3 no=0 unknown=0.7
reason e1 includes t
reason e2 includes t
query b
",
        )
        .unwrap();
        let params = EngineParams {
            max_iter: 1,
            ..EngineParams::default()
        };
        let outcome = resolve_loop(&kb, &params).unwrap();
        assert_eq!(outcome.revisions, 1);
        let entry = &outcome.trace.entries()[0];
        // Evenly split opposed sources: maximal conflict.
        assert!((entry.mu_conflict - 1.0).abs() < 1e-12);
        assert_eq!(entry.culprit.as_deref(), Some("e1"));
        assert!((entry.mu_supposition.unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(entry.pair_statement.as_deref(), Some("t"));
        assert_eq!(entry.pair_rule, None);
        assert!((entry.mu_in.unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(entry.revised.as_deref(), Some("t"));
        // t's uncommitted mass grows once its evidence is discounted.
        assert!((entry.theta_before.unwrap() - 0.7).abs() < 1e-12);
        assert!(entry.theta_after.unwrap() > entry.theta_before.unwrap());
        assert!((outcome.kb.source("et").unwrap().discount - 0.25).abs() < 1e-12);
        // The sources for b itself stay untouched.
        assert_eq!(outcome.kb.source("e1").unwrap().discount, 0.0);
    }

    #[test]
    fn resolve_loop_aborts_once_the_locked_culprit_saturates() {
        // A single conflicted statement with one dominant source: the loop
        // keeps discounting it, and after enough quarter-steps the source is
        // fully discounted and the next revision attempt must abort with the
        // partial trace.
        let kb = parse_kb(
            "\
statement a
evidence e for a yes=0.6 no=0.4
query a
",
        )
        .unwrap();
        let params = EngineParams {
            max_iter: 200,
            ..EngineParams::default()
        };
        let err = resolve_loop(&kb, &params).unwrap_err();
        match err {
            RevisionError::Aborted { source, trace } => {
                assert_eq!(*source, RevisionError::FullyDiscounted("e".into()));
                // Revisions ran until the discount rate crossed saturation:
                // 0.75^72 is still above 1e-9, 0.75^73 is below it.
                assert_eq!(trace.revisions(), 73);
                // The final entry records the measurement whose revision
                // could not be applied.
                let last = trace.entries().last().unwrap();
                assert!(last.gate_passed);
                assert_eq!(last.revised, None);
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn resolve_loop_on_an_empty_kb_is_a_no_op() {
        let outcome = resolve_loop(&KnowledgeBase::default(), &EngineParams::default()).unwrap();
        assert!(outcome.trace.is_empty());
        assert_eq!(outcome.revisions, 0);
        assert_eq!(outcome.stopped, StopReason::NoStatements);
    }

    #[test]
    fn resolve_loop_aborts_on_total_conflict_with_an_empty_trace() {
        let kb = parse_kb(
            "\
statement b
evidence e1 for b yes=1 no=0
evidence e2 for b yes=0 no=1
",
        )
        .unwrap();
        let err = resolve_loop(&kb, &EngineParams::default()).unwrap_err();
        match err {
            RevisionError::Aborted { source, trace } => {
                assert!(trace.is_empty());
                assert!(matches!(
                    *source,
                    RevisionError::Network(NetworkError::Propagation { .. })
                ));
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn resolve_loop_still_revises_unvouched_sources_under_conflict() {
        // Every reason pair starts fully committed (zero uncommitted mass),
        // yet the sources themselves carry no reasons at all, so they remain
        // pure suppositions with no resistance: residual conflict keeps the
        // engine discounting them until the bound.
        let kb = parse_kb(
            "\
statement a
evidence e1 for a yes=0.999 no=0.001
evidence e2 for a yes=0.999 no=0.001
query a
",
        )
        .unwrap();
        let net = build_network(&kb).unwrap();
        let beliefs = net.propagate().unwrap();
        for pair in net.support_list("a") {
            assert_eq!(net.mu_out(pair, &beliefs).unwrap().value(), 0.0);
        }
        let outcome = resolve_loop(&kb, &EngineParams::default()).unwrap();
        let first = &outcome.trace.entries()[0];
        assert!(first.mu_conflict > 0.0);
        assert_eq!(first.mu_in, Some(0.0));
        assert_eq!(outcome.stopped, StopReason::MaxIterations);
        assert_eq!(outcome.revisions, 100);
    }

    #[test]
    fn monitored_set_defaults_to_queries_else_all() {
        // x carries maximal conflict but only y is queried.
        let text = "\
statement x
statement y
evidence ex for x yes=0.5 no=0.5
evidence ey for y yes=0.9 no=0.1
query y
";
        let params = EngineParams {
            max_iter: 1,
            ..EngineParams::default()
        };
        let outcome = resolve_loop(&parse_kb(text).unwrap(), &params).unwrap();
        assert_eq!(outcome.trace.entries()[0].statement, "y");
        assert!((outcome.trace.entries()[0].mu_conflict - 0.2).abs() < 1e-12);

        // Without queries, every statement is monitored and x drives.
        let unqueried = text.replace("query y\n", "");
        let outcome = resolve_loop(&parse_kb(&unqueried).unwrap(), &params).unwrap();
        assert_eq!(outcome.trace.entries()[0].statement, "x");
        assert_eq!(outcome.trace.entries()[0].mu_conflict, 1.0);
    }

    #[test]
    fn engine_params_merge_and_validate() {
        let kb = parse_kb("param gamma=2 delta=0.5\nparam maxiter=9\n").unwrap();
        let p = EngineParams::for_kb(&kb);
        assert_eq!(p.gamma, 2.0);
        assert_eq!(p.delta, 0.5);
        assert_eq!(p.max_iter, 9);

        let p = EngineParams::for_kb(&KnowledgeBase::default());
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.delta, 0.25);
        assert_eq!(p.max_iter, 100);

        assert!(EngineParams {
            gamma: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EngineParams {
            delta: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EngineParams {
            max_iter: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn suppositions_never_exceed_their_bounds() {
        for text in [TWO_ANALYSTS, DIAMOND] {
            let (_, net, beliefs) = setup(text);
            for target in net.statements() {
                let found = foundations(&net, &beliefs, target).unwrap();
                for (id, supp) in suppositions(&net, &beliefs, target).unwrap() {
                    let reach = found.element(&id).unwrap();
                    let assumption = net.mu_assumption(&id, &beliefs).unwrap().value();
                    assert!(supp <= reach + 1e-15);
                    assert!(supp <= assumption + 1e-15);
                    assert!((0.0..=1.0).contains(&supp));
                }
            }
        }
    }
}
