//! The knowledge-base text format and the mass-file format.
//!
//! Both formats are line-oriented UTF-8 with `#` comments. A knowledge base
//! declares binary statements, evidence and rules that assign support to
//! them, extra reasons backing statements or rules, the statements to monitor
//! for conflict, and engine parameter overrides:
//!
//! ```text
//! statement <id>
//! evidence <id> for <stmt> yes=<f> no=<f> [unknown=<f>] [discount=<f>]
//! rule <id> if <stmt>[,<stmt>]* then <stmt> yes=<f> no=<f> [unknown=<f>] [discount=<f>]
//! reason <target-id> includes <stmt-id>
//! query <stmt-id>
//! param gamma=<f> | delta=<f> | maxiter=<int>
//! ```
//!
//! `unknown` defaults to `1 - yes - no`; the three must total 1 within 1e-6.
//!
//! A mass file carries one support function over an explicit frame:
//!
//! ```text
//! frame H1 H2 H3
//! mass {H1}=0.99 {H2}=0.01
//! discount 0.01
//! ```

use thiserror::Error;

use crate::belief::{BeliefError, Frame, MassFunction, Subset};

/// Tolerance on `yes + no + unknown` in source declarations.
pub const KB_MASS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown id `{id}`")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: masses sum to {sum}, expected 1")]
    MassSum { line: usize, sum: f64 },
    #[error("{0}")]
    Invalid(String),
}

impl KbError {
    fn syntax(line: usize, message: impl Into<String>) -> KbError {
        KbError::Syntax {
            line,
            message: message.into(),
        }
    }
}

/// A source of support for one statement: either free-standing evidence
/// (no antecedents) or a rule conditioned on antecedent statements.
///
/// `yes`, `no` and `unknown` describe the base support assignment over the
/// consequent's poles and the universal set; `discount` is the source's
/// current unreliability rate, raised by the revision engine.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDecl {
    pub id: String,
    pub antecedents: Vec<String>,
    pub consequent: String,
    pub yes: f64,
    pub no: f64,
    pub unknown: f64,
    pub discount: f64,
}

impl SourceDecl {
    pub fn is_evidence(&self) -> bool {
        self.antecedents.is_empty()
    }
}

/// A declared extra reason: `statement` backs `target` (a statement or rule).
#[derive(Debug, Clone, PartialEq)]
pub struct ReasonDecl {
    pub target: String,
    pub statement: String,
}

/// Engine parameter overrides declared in the KB.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamOverrides {
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub max_iter: Option<usize>,
}

/// A parsed knowledge base. Plain data; structural validation beyond
/// reference resolution (acyclicity, support lists) happens at network build.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    pub statements: Vec<String>,
    pub sources: Vec<SourceDecl>,
    pub reasons: Vec<ReasonDecl>,
    pub queries: Vec<String>,
    pub params: ParamOverrides,
}

impl KnowledgeBase {
    pub fn is_statement(&self, id: &str) -> bool {
        self.statements.iter().any(|s| s == id)
    }

    pub fn source(&self, id: &str) -> Option<&SourceDecl> {
        self.sources.iter().find(|s| s.id == id)
    }

    /// Statements whose conflict the engine monitors: the declared queries,
    /// or every statement when none are declared.
    pub fn monitored(&self) -> Vec<String> {
        if self.queries.is_empty() {
            self.statements.clone()
        } else {
            self.queries.clone()
        }
    }
}

const RESERVED: [&str; 4] = ["if", "then", "for", "includes"];

fn check_id(token: &str, line: usize) -> Result<String, KbError> {
    if token.is_empty() || RESERVED.contains(&token) || token.chars().any(|c| "={},#".contains(c)) {
        return Err(KbError::syntax(line, format!("invalid id `{token}`")));
    }
    Ok(token.to_string())
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64, KbError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            KbError::syntax(line, format!("expected a number for {what}, got `{token}`"))
        })
}

/// Key=value tail of an evidence or rule line.
struct MassSpec {
    yes: f64,
    no: f64,
    unknown: f64,
    discount: f64,
}

fn parse_mass_spec(tokens: &[&str], line: usize) -> Result<MassSpec, KbError> {
    let mut yes = None;
    let mut no = None;
    let mut unknown = None;
    let mut discount = None;
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| KbError::syntax(line, format!("expected key=value, got `{token}`")))?;
        let value = parse_f64(value, line, key)?;
        let slot = match key {
            "yes" => &mut yes,
            "no" => &mut no,
            "unknown" => &mut unknown,
            "discount" => &mut discount,
            _ => return Err(KbError::syntax(line, format!("unknown key `{key}`"))),
        };
        if slot.replace(value).is_some() {
            return Err(KbError::syntax(line, format!("duplicate key `{key}`")));
        }
    }
    let yes = yes.ok_or_else(|| KbError::syntax(line, "missing yes=<f>"))?;
    let no = no.ok_or_else(|| KbError::syntax(line, "missing no=<f>"))?;
    for (name, v) in [("yes", yes), ("no", no)] {
        if v < 0.0 {
            return Err(KbError::syntax(
                line,
                format!("{name} must be non-negative"),
            ));
        }
    }
    let unknown = match unknown {
        Some(u) => {
            if u < 0.0 {
                return Err(KbError::syntax(line, "unknown must be non-negative"));
            }
            let sum = yes + no + u;
            if (sum - 1.0).abs() > KB_MASS_TOLERANCE {
                return Err(KbError::MassSum { line, sum });
            }
            u
        }
        None => {
            let u = 1.0 - yes - no;
            if u < -KB_MASS_TOLERANCE {
                return Err(KbError::MassSum {
                    line,
                    sum: yes + no,
                });
            }
            // Sub-1e-12 remainders are arithmetic residue of 1 - yes - no,
            // not declared ignorance; keep such sources exactly categorical.
            if u.abs() < 1e-12 {
                0.0
            } else {
                u
            }
        }
    };
    let discount = discount.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&discount) {
        return Err(KbError::syntax(line, "discount must lie in [0, 1]"));
    }
    Ok(MassSpec {
        yes,
        no,
        unknown,
        discount,
    })
}

/// Parse a knowledge base from text. Forward references are allowed; all
/// references are resolved after the whole file is read.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, KbError> {
    let mut kb = KnowledgeBase::default();
    // Lines that referenced each id, for error reporting in the resolve pass.
    let mut source_lines = Vec::new();
    let mut reason_lines = Vec::new();
    let mut query_lines = Vec::new();
    let mut seen_params: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "statement" => {
                if tokens.len() != 2 {
                    return Err(KbError::syntax(line, "expected `statement <id>`"));
                }
                let id = check_id(tokens[1], line)?;
                if kb.is_statement(&id) || kb.source(&id).is_some() {
                    return Err(KbError::DuplicateId { line, id });
                }
                kb.statements.push(id);
            }
            "evidence" => {
                if tokens.len() < 5 || tokens[2] != "for" {
                    return Err(KbError::syntax(
                        line,
                        "expected `evidence <id> for <stmt> yes=<f> no=<f> ...`",
                    ));
                }
                let id = check_id(tokens[1], line)?;
                if kb.is_statement(&id) || kb.source(&id).is_some() {
                    return Err(KbError::DuplicateId { line, id });
                }
                let consequent = check_id(tokens[3], line)?;
                let spec = parse_mass_spec(&tokens[4..], line)?;
                kb.sources.push(SourceDecl {
                    id,
                    antecedents: Vec::new(),
                    consequent,
                    yes: spec.yes,
                    no: spec.no,
                    unknown: spec.unknown,
                    discount: spec.discount,
                });
                source_lines.push(line);
            }
            "rule" => {
                let then_pos = tokens.iter().position(|t| *t == "then").ok_or_else(|| {
                    KbError::syntax(line, "expected `rule <id> if <stmt>,... then <stmt> ...`")
                })?;
                if tokens.len() < 3
                    || tokens[2] != "if"
                    || then_pos < 4
                    || then_pos + 2 > tokens.len()
                {
                    return Err(KbError::syntax(
                        line,
                        "expected `rule <id> if <stmt>,... then <stmt> yes=<f> no=<f> ...`",
                    ));
                }
                let id = check_id(tokens[1], line)?;
                if kb.is_statement(&id) || kb.source(&id).is_some() {
                    return Err(KbError::DuplicateId { line, id });
                }
                let mut antecedents = Vec::new();
                for token in &tokens[3..then_pos] {
                    for part in token.split(',').filter(|p| !p.is_empty()) {
                        let ante = check_id(part, line)?;
                        if antecedents.contains(&ante) {
                            return Err(KbError::syntax(
                                line,
                                format!("duplicate antecedent `{ante}`"),
                            ));
                        }
                        antecedents.push(ante);
                    }
                }
                if antecedents.is_empty() {
                    return Err(KbError::syntax(
                        line,
                        "a rule needs at least one antecedent",
                    ));
                }
                let consequent = check_id(tokens[then_pos + 1], line)?;
                if antecedents.contains(&consequent) {
                    return Err(KbError::syntax(
                        line,
                        "a rule's consequent cannot appear among its antecedents",
                    ));
                }
                let spec = parse_mass_spec(&tokens[then_pos + 2..], line)?;
                kb.sources.push(SourceDecl {
                    id,
                    antecedents,
                    consequent,
                    yes: spec.yes,
                    no: spec.no,
                    unknown: spec.unknown,
                    discount: spec.discount,
                });
                source_lines.push(line);
            }
            "reason" => {
                if tokens.len() != 4 || tokens[2] != "includes" {
                    return Err(KbError::syntax(
                        line,
                        "expected `reason <target-id> includes <stmt-id>`",
                    ));
                }
                let target = check_id(tokens[1], line)?;
                let statement = check_id(tokens[3], line)?;
                if kb
                    .reasons
                    .iter()
                    .any(|r| r.target == target && r.statement == statement)
                {
                    return Err(KbError::syntax(
                        line,
                        format!("duplicate reason `{statement}` for `{target}`"),
                    ));
                }
                kb.reasons.push(ReasonDecl { target, statement });
                reason_lines.push(line);
            }
            "query" => {
                if tokens.len() != 2 {
                    return Err(KbError::syntax(line, "expected `query <stmt-id>`"));
                }
                let id = check_id(tokens[1], line)?;
                if kb.queries.contains(&id) {
                    return Err(KbError::syntax(line, format!("duplicate query `{id}`")));
                }
                kb.queries.push(id);
                query_lines.push(line);
            }
            "param" => {
                if tokens.len() < 2 {
                    return Err(KbError::syntax(line, "expected `param <key>=<value>`"));
                }
                for token in &tokens[1..] {
                    let (key, value) = token.split_once('=').ok_or_else(|| {
                        KbError::syntax(line, format!("expected key=value, got `{token}`"))
                    })?;
                    if seen_params.iter().any(|k| k == key) {
                        return Err(KbError::syntax(line, format!("duplicate param `{key}`")));
                    }
                    match key {
                        "gamma" => {
                            let v = parse_f64(value, line, "gamma")?;
                            if v <= 0.0 {
                                return Err(KbError::syntax(line, "gamma must be positive"));
                            }
                            kb.params.gamma = Some(v);
                        }
                        "delta" => {
                            let v = parse_f64(value, line, "delta")?;
                            if !(0.0..=1.0).contains(&v) {
                                return Err(KbError::syntax(line, "delta must lie in [0, 1]"));
                            }
                            kb.params.delta = Some(v);
                        }
                        "maxiter" => {
                            let v: usize = value.parse().map_err(|_| {
                                KbError::syntax(line, format!("expected an integer, got `{value}`"))
                            })?;
                            if v == 0 {
                                return Err(KbError::syntax(line, "maxiter must be at least 1"));
                            }
                            kb.params.max_iter = Some(v);
                        }
                        _ => return Err(KbError::syntax(line, format!("unknown param `{key}`"))),
                    }
                    seen_params.push(key.to_string());
                }
            }
            other => {
                return Err(KbError::syntax(
                    line,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    // Resolve references now that every declaration is in.
    for (source, &line) in kb.sources.iter().zip(&source_lines) {
        for id in source.antecedents.iter().chain([&source.consequent]) {
            if !kb.is_statement(id) {
                return Err(KbError::UnknownId {
                    line,
                    id: id.clone(),
                });
            }
        }
    }
    for (reason, &line) in kb.reasons.iter().zip(&reason_lines) {
        if !kb.is_statement(&reason.target) && kb.source(&reason.target).is_none() {
            return Err(KbError::UnknownId {
                line,
                id: reason.target.clone(),
            });
        }
        if !kb.is_statement(&reason.statement) {
            return Err(KbError::UnknownId {
                line,
                id: reason.statement.clone(),
            });
        }
    }
    for (query, &line) in kb.queries.iter().zip(&query_lines) {
        if !kb.is_statement(query) {
            return Err(KbError::UnknownId {
                line,
                id: query.clone(),
            });
        }
    }
    Ok(kb)
}

/// Render a knowledge base back into the text format. Parsing the output
/// yields a knowledge base equal to the input.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for s in &kb.statements {
        out.push_str(&format!("statement {s}\n"));
    }
    for src in &kb.sources {
        if src.is_evidence() {
            out.push_str(&format!(
                "evidence {} for {} yes={} no={} unknown={} discount={}\n",
                src.id, src.consequent, src.yes, src.no, src.unknown, src.discount
            ));
        } else {
            out.push_str(&format!(
                "rule {} if {} then {} yes={} no={} unknown={} discount={}\n",
                src.id,
                src.antecedents.join(","),
                src.consequent,
                src.yes,
                src.no,
                src.unknown,
                src.discount
            ));
        }
    }
    for r in &kb.reasons {
        out.push_str(&format!("reason {} includes {}\n", r.target, r.statement));
    }
    for q in &kb.queries {
        out.push_str(&format!("query {q}\n"));
    }
    if let Some(g) = kb.params.gamma {
        out.push_str(&format!("param gamma={g}\n"));
    }
    if let Some(d) = kb.params.delta {
        out.push_str(&format!("param delta={d}\n"));
    }
    if let Some(m) = kb.params.max_iter {
        out.push_str(&format!("param maxiter={m}\n"));
    }
    out
}

/// A parsed mass file: a frame, a support function over it, and an optional
/// discount to apply before combination.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFile {
    pub frame: Frame,
    pub mass: MassFunction,
    pub discount: Option<f64>,
}

impl MassFile {
    /// The declared mass with its discount applied.
    pub fn effective(&self) -> MassFunction {
        match self.discount {
            // Rate validated at parse time.
            Some(rate) => self.mass.discount(rate).expect("validated rate"),
            None => self.mass.clone(),
        }
    }
}

fn belief_to_kb_error(err: BeliefError, line: usize) -> KbError {
    match err {
        BeliefError::MassSum(sum) => KbError::MassSum { line, sum },
        other => KbError::syntax(line, other.to_string()),
    }
}

/// Parse `{a,b}=0.5`-style entries from the remainder of a mass line.
fn parse_subset_entries(
    rest: &str,
    line: usize,
    frame: &Frame,
) -> Result<Vec<(Subset, f64)>, KbError> {
    let mut entries = Vec::new();
    let mut s = rest.trim_start();
    while !s.is_empty() {
        if !s.starts_with('{') {
            return Err(KbError::syntax(
                line,
                format!("expected `{{labels}}=value`, got `{s}`"),
            ));
        }
        let close = s
            .find('}')
            .ok_or_else(|| KbError::syntax(line, "unterminated `{`"))?;
        let inner = &s[1..close];
        let after = &s[close + 1..];
        let value_str = after
            .strip_prefix('=')
            .ok_or_else(|| KbError::syntax(line, "expected `=` after subset"))?;
        let end = value_str
            .find(char::is_whitespace)
            .unwrap_or(value_str.len());
        let value = parse_f64(&value_str[..end], line, "mass")?;
        let labels: Vec<&str> = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        if labels.is_empty() {
            return Err(KbError::syntax(line, "empty subset cannot carry mass"));
        }
        let subset = frame
            .subset(labels)
            .map_err(|e| belief_to_kb_error(e, line))?;
        entries.push((subset, value));
        s = value_str[end..].trim_start();
    }
    Ok(entries)
}

/// Parse a mass file: one `frame` line, one `mass` line, and at most one
/// `discount` line, with the frame declared before the mass.
pub fn parse_mass_file(text: &str) -> Result<MassFile, KbError> {
    let mut frame: Option<Frame> = None;
    let mut mass: Option<MassFunction> = None;
    let mut discount: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (directive, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        match directive {
            "frame" => {
                if frame.is_some() {
                    return Err(KbError::syntax(line, "duplicate frame line"));
                }
                let labels: Vec<&str> = rest.split_whitespace().collect();
                frame = Some(Frame::new(labels).map_err(|e| belief_to_kb_error(e, line))?);
            }
            "mass" => {
                if mass.is_some() {
                    return Err(KbError::syntax(line, "duplicate mass line"));
                }
                let frame = frame
                    .as_ref()
                    .ok_or_else(|| KbError::syntax(line, "mass line before frame line"))?;
                let entries = parse_subset_entries(rest, line, frame)?;
                mass = Some(
                    MassFunction::from_assignments(frame, &entries)
                        .map_err(|e| belief_to_kb_error(e, line))?,
                );
            }
            "discount" => {
                if discount.is_some() {
                    return Err(KbError::syntax(line, "duplicate discount line"));
                }
                let rate = parse_f64(rest.trim(), line, "discount")?;
                if !(0.0..=1.0).contains(&rate) {
                    return Err(KbError::syntax(line, "discount must lie in [0, 1]"));
                }
                discount = Some(rate);
            }
            other => {
                return Err(KbError::syntax(
                    line,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let frame = frame.ok_or_else(|| KbError::Invalid("mass file lacks a frame line".into()))?;
    let mass = mass.ok_or_else(|| KbError::Invalid("mass file lacks a mass line".into()))?;
    Ok(MassFile {
        frame,
        mass,
        discount,
    })
}

/// The knowledge base for the running two-analyst example: one statement,
/// two near-certain but opposed evidence sources, lightly discounted.
#[cfg(test)]
pub(crate) const CONFLICTING_ANALYSTS_KB: &str = "\
# Two reliable sources flatly disagree about one statement.
statement building
evidence photo for building yes=0.99 no=0.01 discount=0.01
evidence humint for building yes=0.01 no=0.99 discount=0.02
query building
";
