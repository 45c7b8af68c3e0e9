//! Rendering of propagation results, revision traces, and combined mass
//! functions.
//!
//! Every number in the human format is printed to four decimals. The machine
//! format is line-delimited JSON, one record per statement, conflict
//! measurement, or trace entry, carrying full precision.

use std::io::{self, Write};

use serde::Serialize;

use crate::belief::{MassFunction, Subset};
use crate::fuzzy;
use crate::network::BeliefState;
use crate::revision::{statement_conflict, RevisionTrace, StopReason, TraceEntry};

#[derive(Debug, Clone)]
pub struct StatementRow {
    pub id: String,
    pub bel: f64,
    pub pl: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct ConflictRow {
    pub statement: String,
    pub mu_conflict: f64,
}

/// Per-statement belief table plus conflict per monitored statement.
#[derive(Debug, Clone)]
pub struct Report {
    pub statements: Vec<StatementRow>,
    pub conflicts: Vec<ConflictRow>,
}

impl Report {
    pub fn from_state(beliefs: &BeliefState, monitored: &[String]) -> Report {
        let statements = beliefs
            .statements()
            .map(|id| StatementRow {
                id: id.to_string(),
                bel: beliefs.bel_yes(id).expect("propagated").value(),
                pl: beliefs.plausibility_yes(id).expect("propagated").value(),
                theta: beliefs.theta_mass(id).expect("propagated"),
            })
            .collect();
        let conflicts = monitored
            .iter()
            .map(|id| ConflictRow {
                statement: id.clone(),
                mu_conflict: statement_conflict(beliefs, id).expect("monitored").value(),
            })
            .collect();
        Report {
            statements,
            conflicts,
        }
    }

    pub fn write_human(&self, w: &mut dyn Write) -> io::Result<()> {
        let width = self
            .statements
            .iter()
            .map(|r| r.id.len())
            .max()
            .unwrap_or(0)
            .max("statement".len());
        writeln!(
            w,
            "{:<width$}  {:>8}  {:>8}  {:>8}",
            "statement", "bel", "pl", "theta"
        )?;
        for row in &self.statements {
            writeln!(
                w,
                "{:<width$}  {:>8.4}  {:>8.4}  {:>8.4}",
                row.id, row.bel, row.pl, row.theta
            )?;
        }
        for c in &self.conflicts {
            writeln!(w, "conflict({}) = {:.4}", c.statement, c.mu_conflict)?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: &mut dyn Write) -> io::Result<()> {
        #[derive(Serialize)]
        struct StatementRecord<'a> {
            record: &'static str,
            id: &'a str,
            bel: f64,
            pl: f64,
            theta: f64,
        }
        #[derive(Serialize)]
        struct ConflictRecord<'a> {
            record: &'static str,
            statement: &'a str,
            mu_conflict: f64,
        }
        for row in &self.statements {
            let rec = StatementRecord {
                record: "statement",
                id: &row.id,
                bel: row.bel,
                pl: row.pl,
                theta: row.theta,
            };
            serde_json::to_writer(&mut *w, &rec)?;
            writeln!(w)?;
        }
        for c in &self.conflicts {
            let rec = ConflictRecord {
                record: "conflict",
                statement: &c.statement,
                mu_conflict: c.mu_conflict,
            };
            serde_json::to_writer(&mut *w, &rec)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// One trace line per iteration, fields in trace order.
pub fn write_trace_human(trace: &RevisionTrace, w: &mut dyn Write) -> io::Result<()> {
    for e in trace.iter() {
        let pair = if e.pair_statement.is_some() || e.pair_rule.is_some() || e.culprit.is_some() {
            format!(
                "({},{})",
                e.pair_statement.as_deref().unwrap_or("-"),
                e.pair_rule.as_deref().unwrap_or("-")
            )
        } else {
            "-".into()
        };
        let theta = match (e.theta_before, e.theta_after) {
            (Some(b), Some(a)) => format!("{b:.4}->{a:.4}"),
            _ => "-".into(),
        };
        writeln!(
            w,
            "iter={} statement={} conflict={:.4} signif={:.4} culprit={} supposition={} pair={} out={} in={} gate={} revised={} theta={}",
            e.iteration,
            e.statement,
            e.mu_conflict,
            e.mu_signif,
            e.culprit.as_deref().unwrap_or("-"),
            fmt_opt(e.mu_supposition),
            pair,
            fmt_opt(e.mu_out),
            fmt_opt(e.mu_in),
            if e.gate_passed { "pass" } else { "fail" },
            e.revised.as_deref().unwrap_or("-"),
            theta,
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    record: &'static str,
    iteration: usize,
    statement: &'a str,
    mu_conflict: f64,
    mu_signif: f64,
    culprit: Option<&'a str>,
    mu_supposition: Option<f64>,
    pair_statement: Option<&'a str>,
    pair_rule: Option<&'a str>,
    mu_out: Option<f64>,
    mu_in: Option<f64>,
    gate_passed: bool,
    revised: Option<&'a str>,
    theta_before: Option<f64>,
    theta_after: Option<f64>,
}

impl<'a> TraceRecord<'a> {
    fn from_entry(e: &'a TraceEntry) -> TraceRecord<'a> {
        TraceRecord {
            record: "trace",
            iteration: e.iteration,
            statement: &e.statement,
            mu_conflict: e.mu_conflict,
            mu_signif: e.mu_signif,
            culprit: e.culprit.as_deref(),
            mu_supposition: e.mu_supposition,
            pair_statement: e.pair_statement.as_deref(),
            pair_rule: e.pair_rule.as_deref(),
            mu_out: e.mu_out,
            mu_in: e.mu_in,
            gate_passed: e.gate_passed,
            revised: e.revised.as_deref(),
            theta_before: e.theta_before,
            theta_after: e.theta_after,
        }
    }
}

/// One JSON record per iteration, fields in trace order.
pub fn write_trace_json(trace: &RevisionTrace, w: &mut dyn Write) -> io::Result<()> {
    for e in trace.iter() {
        serde_json::to_writer(&mut *w, &TraceRecord::from_entry(e))?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_resolve_summary_human(
    iterations: usize,
    revisions: usize,
    stopped: StopReason,
    w: &mut dyn Write,
) -> io::Result<()> {
    writeln!(
        w,
        "iterations={iterations} revisions={revisions} stopped={stopped}"
    )
}

pub fn write_resolve_summary_json(
    iterations: usize,
    revisions: usize,
    stopped: StopReason,
    w: &mut dyn Write,
) -> io::Result<()> {
    #[derive(Serialize)]
    struct ResultRecord {
        record: &'static str,
        iterations: usize,
        revisions: usize,
        stopped: String,
    }
    serde_json::to_writer(
        &mut *w,
        &ResultRecord {
            record: "result",
            iterations,
            revisions,
            stopped: stopped.to_string(),
        },
    )?;
    writeln!(w)
}

/// Subsets worth tabulating for a combined mass: every non-empty subset on
/// frames of up to three labels, singletons on larger ones.
fn table_subsets(m: &MassFunction) -> Vec<Subset> {
    let n = m.frame().len();
    if n <= 3 {
        (1..=m.frame().theta().bits())
            .map(Subset::from_bits)
            .collect()
    } else {
        (0..n).map(|i| Subset::from_bits(1 << i)).collect()
    }
}

/// Unordered binary partitions of frames with at most three labels.
fn partitions(m: &MassFunction) -> Vec<(Subset, Subset)> {
    if m.frame().len() > 3 {
        return Vec::new();
    }
    let theta = m.frame().theta().bits();
    (1..theta)
        .filter(|&s| s < theta & !s)
        .map(|s| (Subset::from_bits(s), Subset::from_bits(theta & !s)))
        .collect()
}

/// Combined-mass report: focal masses, a belief/plausibility table, and the
/// conflict of every binary partition on small frames.
pub fn write_combined_human(m: &MassFunction, w: &mut dyn Write) -> io::Result<()> {
    let frame = m.frame();
    writeln!(w, "frame: {}", frame.labels().join(" "))?;
    for (s, v) in m.focal() {
        writeln!(w, "m({}) = {:.4}", frame.format_subset(s), v)?;
    }
    for s in table_subsets(m) {
        writeln!(
            w,
            "bel({}) = {:.4}  pl({}) = {:.4}",
            frame.format_subset(s),
            m.belief(s).expect("in frame").value(),
            frame.format_subset(s),
            m.plausibility(s).expect("in frame").value(),
        )?;
    }
    for (s, comp) in partitions(m) {
        let c = fuzzy::conflict(
            m.belief(s).expect("in frame"),
            m.belief(comp).expect("in frame"),
        )
        .expect("beliefs of complementary subsets");
        writeln!(
            w,
            "conflict({} | {}) = {:.4}",
            frame.format_subset(s),
            frame.format_subset(comp),
            c.value()
        )?;
    }
    Ok(())
}

pub fn write_combined_json(m: &MassFunction, w: &mut dyn Write) -> io::Result<()> {
    #[derive(Serialize)]
    struct FrameRecord<'a> {
        record: &'static str,
        labels: &'a [String],
    }
    #[derive(Serialize)]
    struct MassRecord<'a> {
        record: &'static str,
        subset: Vec<&'a str>,
        value: f64,
    }
    #[derive(Serialize)]
    struct BeliefRecord<'a> {
        record: &'static str,
        subset: Vec<&'a str>,
        bel: f64,
        pl: f64,
    }
    #[derive(Serialize)]
    struct PartitionRecord<'a> {
        record: &'static str,
        subset: Vec<&'a str>,
        complement: Vec<&'a str>,
        mu_conflict: f64,
    }

    let frame = m.frame();
    serde_json::to_writer(
        &mut *w,
        &FrameRecord {
            record: "frame",
            labels: frame.labels(),
        },
    )?;
    writeln!(w)?;
    for (s, v) in m.focal() {
        serde_json::to_writer(
            &mut *w,
            &MassRecord {
                record: "mass",
                subset: frame.subset_labels(s),
                value: v,
            },
        )?;
        writeln!(w)?;
    }
    for s in table_subsets(m) {
        serde_json::to_writer(
            &mut *w,
            &BeliefRecord {
                record: "belief",
                subset: frame.subset_labels(s),
                bel: m.belief(s).expect("in frame").value(),
                pl: m.plausibility(s).expect("in frame").value(),
            },
        )?;
        writeln!(w)?;
    }
    for (s, comp) in partitions(m) {
        let c = fuzzy::conflict(
            m.belief(s).expect("in frame"),
            m.belief(comp).expect("in frame"),
        )
        .expect("beliefs of complementary subsets");
        serde_json::to_writer(
            &mut *w,
            &PartitionRecord {
                record: "conflict",
                subset: frame.subset_labels(s),
                complement: frame.subset_labels(comp),
                mu_conflict: c.value(),
            },
        )?;
        writeln!(w)?;
    }
    Ok(())
}
