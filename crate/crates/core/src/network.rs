//! Statements, rules, automatically derived support lists, and propagation of
//! belief through an acyclic rule network.
//!
//! Every statement is binary: its mass function lives over the shared frame
//! `{yes, no}`, with the universal set carrying whatever support is
//! uncommitted. Evidence declarations compile to rules with no antecedents,
//! so a single propagation mechanism covers both.
//!
//! A statement's support list holds `(statement, rule)` pairs: one pair per
//! antecedent of each rule concluding it (or a single `(-, rule)` pair for an
//! antecedent-free source), followed by declared extra reasons as
//! `(statement, -)` pairs. A rule's support list holds its declared reasons
//! only. A pair is "out" to the degree its members leave support uncommitted:
//! the smaller of the statement's and the rule's mass on the universal set.

use std::collections::HashMap;

use thiserror::Error;

use crate::belief::{combine_all, BeliefError, BeliefValue, Frame, MassFunction, Subset};
use crate::fuzzy::FuzzyDegree;
use crate::kb::KnowledgeBase;

/// The `yes` pole of a statement's binary frame.
pub const YES: Subset = Subset::from_bits(0b01);
/// The `no` pole of a statement's binary frame.
pub const NO: Subset = Subset::from_bits(0b10);

/// The binary frame shared by every statement.
pub fn binary_frame() -> Frame {
    Frame::new(["yes", "no"]).expect("static labels are valid")
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{0}` is not a statement")]
    NotAStatement(String),
    #[error("rule `{0}` lists its consequent among its antecedents")]
    ConsequentAmongAntecedents(String),
    #[error("rule `{rule}` repeats antecedent `{statement}`")]
    DuplicateAntecedent { rule: String, statement: String },
    #[error("duplicate reason `{statement}` for `{target}`")]
    DuplicateReason { target: String, statement: String },
    #[error("cycle detected through `{0}`")]
    Cycle(String),
    #[error("combining evidence for `{statement}`: {source}")]
    Propagation {
        statement: String,
        source: BeliefError,
    },
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// One reason pair on a support list.
///
/// `statement` is `None` for the distinguished empty-antecedent marker of an
/// evidence source; `rule` is `None` for a declared reason, which backs its
/// target directly without a linking rule. At least one member is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPair {
    pub target: String,
    pub statement: Option<String>,
    pub rule: Option<String>,
}

impl SupportPair {
    /// Render as `(statement, rule)` with `-` for an absent member.
    pub fn label(&self) -> String {
        format!(
            "({},{})",
            self.statement.as_deref().unwrap_or("-"),
            self.rule.as_deref().unwrap_or("-")
        )
    }

    /// The statement and rule ids present in the pair.
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.statement
            .as_deref()
            .into_iter()
            .chain(self.rule.as_deref())
    }
}

/// A compiled support source: evidence or rule, with its base assignment
/// over the consequent's poles and its current discount rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub id: String,
    pub antecedents: Vec<String>,
    pub consequent: String,
    pub base: MassFunction,
    pub discount: f64,
}

/// An immutable, validated rule network: statements, sources, derived
/// support lists, and a topological evaluation order.
#[derive(Debug, Clone)]
pub struct Network {
    frame: Frame,
    statements: Vec<String>,
    sources: Vec<Source>,
    statement_index: HashMap<String, usize>,
    source_index: HashMap<String, usize>,
    /// Source indices concluding each statement, in declaration order.
    incoming: Vec<Vec<usize>>,
    /// Support list per element id.
    support: HashMap<String, Vec<SupportPair>>,
    /// Statement indices in evaluation order.
    topo: Vec<usize>,
}

/// Propagated masses, one per statement, over the shared binary frame.
#[derive(Debug, Clone)]
pub struct BeliefState {
    order: Vec<String>,
    masses: HashMap<String, MassFunction>,
}

impl BeliefState {
    fn new(order: Vec<String>) -> BeliefState {
        BeliefState {
            order,
            masses: HashMap::new(),
        }
    }

    /// Statement ids in declaration order.
    pub fn statements(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn mass(&self, id: &str) -> Option<&MassFunction> {
        self.masses.get(id)
    }

    /// Belief committed to the statement holding.
    pub fn bel_yes(&self, id: &str) -> Option<BeliefValue> {
        self.masses.get(id).map(|m| m.belief(YES).expect("pole"))
    }

    /// Belief committed against the statement.
    pub fn bel_no(&self, id: &str) -> Option<BeliefValue> {
        self.masses.get(id).map(|m| m.belief(NO).expect("pole"))
    }

    pub fn plausibility_yes(&self, id: &str) -> Option<BeliefValue> {
        self.masses
            .get(id)
            .map(|m| m.plausibility(YES).expect("pole"))
    }

    /// Uncommitted mass: support the statement's evidence leaves open.
    pub fn theta_mass(&self, id: &str) -> Option<f64> {
        self.masses.get(id).map(MassFunction::theta_mass)
    }
}

pub fn build_network(kb: &KnowledgeBase) -> Result<Network, NetworkError> {
    let frame = binary_frame();

    // Validate id uniqueness across statements and sources.
    let mut statement_index = HashMap::new();
    for (i, s) in kb.statements.iter().enumerate() {
        if statement_index.insert(s.clone(), i).is_some() {
            return Err(NetworkError::DuplicateId(s.clone()));
        }
    }
    let mut source_index = HashMap::new();
    for (i, src) in kb.sources.iter().enumerate() {
        if statement_index.contains_key(&src.id) {
            return Err(NetworkError::DuplicateId(src.id.clone()));
        }
        if source_index.insert(src.id.clone(), i).is_some() {
            return Err(NetworkError::DuplicateId(src.id.clone()));
        }
    }

    // Compile sources, validating references and base assignments.
    let mut sources = Vec::with_capacity(kb.sources.len());
    let mut incoming = vec![Vec::new(); kb.statements.len()];
    for (i, decl) in kb.sources.iter().enumerate() {
        let consequent_ix = *statement_index
            .get(&decl.consequent)
            .ok_or_else(|| unknown_statement(kb, &decl.consequent))?;
        for (n, ante) in decl.antecedents.iter().enumerate() {
            if !statement_index.contains_key(ante) {
                return Err(unknown_statement(kb, ante));
            }
            if ante == &decl.consequent {
                return Err(NetworkError::ConsequentAmongAntecedents(decl.id.clone()));
            }
            if decl.antecedents[..n].contains(ante) {
                return Err(NetworkError::DuplicateAntecedent {
                    rule: decl.id.clone(),
                    statement: ante.clone(),
                });
            }
        }
        let base = MassFunction::from_assignments(
            &frame,
            &[
                (YES, decl.yes),
                (NO, decl.no),
                (frame.theta(), decl.unknown),
            ],
        )?;
        if !(0.0..=1.0).contains(&decl.discount) {
            return Err(NetworkError::Belief(BeliefError::RateOutOfRange(
                decl.discount,
            )));
        }
        incoming[consequent_ix].push(i);
        sources.push(Source {
            id: decl.id.clone(),
            antecedents: decl.antecedents.clone(),
            consequent: decl.consequent.clone(),
            base,
            discount: decl.discount,
        });
    }

    // Validate declared reasons and queries.
    for reason in &kb.reasons {
        if !statement_index.contains_key(&reason.target)
            && !source_index.contains_key(&reason.target)
        {
            return Err(NetworkError::UnknownId(reason.target.clone()));
        }
        if !statement_index.contains_key(&reason.statement) {
            return Err(unknown_statement(kb, &reason.statement));
        }
    }
    for query in &kb.queries {
        if !statement_index.contains_key(query) {
            return Err(unknown_statement(kb, query));
        }
    }

    // Topological order of statements over antecedent -> consequent edges,
    // preferring declaration order among the ready.
    let n = kb.statements.len();
    let mut indegree = vec![0usize; n];
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for src in &sources {
        let c = statement_index[&src.consequent];
        for a in &src.antecedents {
            edges[statement_index[a]].push(c);
            indegree[c] += 1;
        }
    }
    let mut topo = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while topo.len() < n {
        let next = (0..n).find(|&i| !placed[i] && indegree[i] == 0);
        match next {
            Some(i) => {
                placed[i] = true;
                topo.push(i);
                for &c in &edges[i] {
                    indegree[c] -= 1;
                }
            }
            None => {
                let stuck = (0..n).find(|&i| !placed[i]).expect("unplaced node");
                return Err(NetworkError::Cycle(kb.statements[stuck].clone()));
            }
        }
    }

    // Derive support lists: per statement, one pair per (antecedent, rule)
    // for each concluding rule, then declared reasons; per rule, declared
    // reasons only.
    let mut support: HashMap<String, Vec<SupportPair>> = HashMap::new();
    for (si, stmt) in kb.statements.iter().enumerate() {
        let mut pairs = Vec::new();
        for &src_ix in &incoming[si] {
            let src = &sources[src_ix];
            if src.antecedents.is_empty() {
                pairs.push(SupportPair {
                    target: stmt.clone(),
                    statement: None,
                    rule: Some(src.id.clone()),
                });
            } else {
                for ante in &src.antecedents {
                    pairs.push(SupportPair {
                        target: stmt.clone(),
                        statement: Some(ante.clone()),
                        rule: Some(src.id.clone()),
                    });
                }
            }
        }
        support.insert(stmt.clone(), pairs);
    }
    for src in &sources {
        support.insert(src.id.clone(), Vec::new());
    }
    for reason in &kb.reasons {
        let pair = SupportPair {
            target: reason.target.clone(),
            statement: Some(reason.statement.clone()),
            rule: None,
        };
        let list = support.get_mut(&reason.target).expect("validated target");
        if list.contains(&pair) {
            return Err(NetworkError::DuplicateReason {
                target: reason.target.clone(),
                statement: reason.statement.clone(),
            });
        }
        list.push(pair);
    }

    let network = Network {
        frame,
        statements: kb.statements.clone(),
        sources,
        statement_index,
        source_index,
        incoming,
        support,
        topo,
    };
    network.check_support_acyclic()?;
    Ok(network)
}

fn unknown_statement(kb: &KnowledgeBase, id: &str) -> NetworkError {
    if kb.source(id).is_some() {
        NetworkError::NotAStatement(id.to_string())
    } else {
        NetworkError::UnknownId(id.to_string())
    }
}

impl Network {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn statements(&self) -> &[String] {
        &self.statements
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn is_statement(&self, id: &str) -> bool {
        self.statement_index.contains_key(id)
    }

    pub fn source(&self, id: &str) -> Option<&Source> {
        self.source_index.get(id).map(|&i| &self.sources[i])
    }

    /// Every element id, statements first, each group in declaration order.
    /// Argmax ties throughout the engine break toward the earliest entry.
    pub fn declaration_order(&self) -> impl Iterator<Item = &str> {
        self.statements
            .iter()
            .map(String::as_str)
            .chain(self.sources.iter().map(|s| s.id.as_str()))
    }

    /// The support list of a statement or rule (empty when it has none).
    pub fn support_list(&self, id: &str) -> &[SupportPair] {
        self.support.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Mass a source leaves on the universal set once its own discount is
    /// applied: its out-ness as a reason. Grows under revision.
    pub fn source_theta_mass(&self, id: &str) -> Result<f64, NetworkError> {
        let src = self
            .source(id)
            .ok_or_else(|| NetworkError::UnknownId(id.to_string()))?;
        Ok((1.0 - src.discount) * src.base.theta_mass() + src.discount)
    }

    /// Degree to which a source's antecedents currently hold: the weakest
    /// antecedent belief, or 1 for an antecedent-free source.
    pub fn activation(&self, id: &str, beliefs: &BeliefState) -> Result<FuzzyDegree, NetworkError> {
        let src = self
            .source(id)
            .ok_or_else(|| NetworkError::UnknownId(id.to_string()))?;
        self.activation_of(src, beliefs)
    }

    fn activation_of(
        &self,
        src: &Source,
        beliefs: &BeliefState,
    ) -> Result<FuzzyDegree, NetworkError> {
        let mut level = 1.0f64;
        for ante in &src.antecedents {
            let bel = beliefs
                .bel_yes(ante)
                .ok_or_else(|| NetworkError::UnknownId(ante.clone()))?;
            level = level.min(bel.value());
        }
        Ok(FuzzyDegree::clamped(level))
    }

    /// The support function a source currently contributes: its base
    /// assignment discounted by both its own discount and any shortfall in
    /// antecedent belief. A fully active source contributes
    /// `discount(base, discount)`; an inactive one contributes nothing.
    pub fn effective_mass(
        &self,
        id: &str,
        beliefs: &BeliefState,
    ) -> Result<MassFunction, NetworkError> {
        let src = self
            .source(id)
            .ok_or_else(|| NetworkError::UnknownId(id.to_string()))?;
        self.effective_mass_of(src, beliefs)
    }

    fn effective_mass_of(
        &self,
        src: &Source,
        beliefs: &BeliefState,
    ) -> Result<MassFunction, NetworkError> {
        let activation = self.activation_of(src, beliefs)?.value();
        let rate = 1.0 - (1.0 - src.discount) * activation;
        Ok(src.base.discount(rate.clamp(0.0, 1.0))?)
    }

    /// Propagate belief through the network: statements in topological
    /// order, each becoming the Dempster combination of the effective masses
    /// of its sources, or vacuous when it has none.
    pub fn propagate(&self) -> Result<BeliefState, NetworkError> {
        self.propagate_in(&self.topo)
    }

    fn propagate_in(&self, order: &[usize]) -> Result<BeliefState, NetworkError> {
        let mut beliefs = BeliefState::new(self.statements.clone());
        for &si in order {
            let stmt = &self.statements[si];
            let sources = &self.incoming[si];
            let mass = if sources.is_empty() {
                MassFunction::vacuous(&self.frame)
            } else {
                let effective: Vec<MassFunction> = sources
                    .iter()
                    .map(|&i| self.effective_mass_of(&self.sources[i], &beliefs))
                    .collect::<Result<_, _>>()?;
                combine_all(effective.iter()).map_err(|e| NetworkError::Propagation {
                    statement: stmt.clone(),
                    source: e,
                })?
            };
            beliefs.masses.insert(stmt.clone(), mass);
        }
        Ok(beliefs)
    }

    /// Out-membership of a support pair: the smaller uncommitted mass among
    /// its members (the statement's propagated mass on the universal set,
    /// the rule's discounted base mass on the universal set).
    pub fn mu_out(
        &self,
        pair: &SupportPair,
        beliefs: &BeliefState,
    ) -> Result<FuzzyDegree, NetworkError> {
        let mut level = 1.0f64;
        let mut present = false;
        if let Some(stmt) = &pair.statement {
            let theta = beliefs
                .theta_mass(stmt)
                .ok_or_else(|| NetworkError::UnknownId(stmt.clone()))?;
            level = level.min(theta);
            present = true;
        }
        if let Some(rule) = &pair.rule {
            level = level.min(self.source_theta_mass(rule)?);
            present = true;
        }
        debug_assert!(present, "support pairs have at least one member");
        Ok(FuzzyDegree::clamped(level))
    }

    /// In-membership: the complement of [`Network::mu_out`].
    pub fn mu_in(
        &self,
        pair: &SupportPair,
        beliefs: &BeliefState,
    ) -> Result<FuzzyDegree, NetworkError> {
        Ok(FuzzyDegree::clamped(
            1.0 - self.mu_out(pair, beliefs)?.value(),
        ))
    }

    /// Degree to which an element is an assumption: the mean out-membership
    /// of its reasons. An element with no reasons rests entirely on
    /// supposition and scores 1.
    pub fn mu_assumption(
        &self,
        id: &str,
        beliefs: &BeliefState,
    ) -> Result<FuzzyDegree, NetworkError> {
        if !self.support.contains_key(id) {
            return Err(NetworkError::UnknownId(id.to_string()));
        }
        let pairs = self.support_list(id);
        if pairs.is_empty() {
            return Ok(FuzzyDegree::clamped(1.0));
        }
        let mut total = 0.0;
        for pair in pairs {
            total += self.mu_out(pair, beliefs)?.value();
        }
        Ok(FuzzyDegree::clamped(total / pairs.len() as f64))
    }

    /// Reject support graphs with cycles (possible only through declared
    /// reasons, since rule edges reverse an already-acyclic graph).
    fn check_support_acyclic(&self) -> Result<(), NetworkError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let ids: Vec<&str> = self.declaration_order().collect();
        let mut marks: HashMap<&str, Mark> = ids.iter().map(|&id| (id, Mark::New)).collect();
        for &root in &ids {
            if marks[root] != Mark::New {
                continue;
            }
            // Iterative DFS; the second visit of an entry closes the node.
            let mut stack = vec![(root, false)];
            while let Some((node, closing)) = stack.pop() {
                if closing {
                    marks.insert(node, Mark::Done);
                    continue;
                }
                match marks[node] {
                    Mark::Open => return Err(NetworkError::Cycle(node.to_string())),
                    Mark::Done => continue,
                    Mark::New => {}
                }
                marks.insert(node, Mark::Open);
                stack.push((node, true));
                for pair in self.support_list(node) {
                    for member in pair.members() {
                        let member = self
                            .support
                            .get_key_value(member)
                            .map(|(k, _)| k.as_str())
                            .expect("validated member");
                        match marks[member] {
                            Mark::Open => return Err(NetworkError::Cycle(member.to_string())),
                            Mark::New => stack.push((member, false)),
                            Mark::Done => {}
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
