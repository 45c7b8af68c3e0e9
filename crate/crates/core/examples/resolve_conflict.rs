//! Run the full conflict-resolution loop on two flatly opposed sources.
//!
//! Each round the engine measures the conflict on the queried statement,
//! traces its foundations, scores every statement and rule as a supposition,
//! and discounts the maximal one - as long as the conflict's significance
//! outweighs the chosen reason's resistance. Here the two sources take
//! turns being the culprit, and their discounts climb until the conflict is
//! negligible.
//!
//! ```bash
//! cargo run -p nmp --example resolve_conflict
//! ```

use nmp::kb::parse_kb;
use nmp::network::build_network;
use nmp::revision::{resolve_loop, statement_conflict, suppositions, EngineParams};

const KB: &str = "\
statement building

evidence photo for building yes=0.99 no=0.01 discount=0.01
evidence humint for building yes=0.01 no=0.99 discount=0.02

query building
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = parse_kb(KB)?;

    // What the engine sees before revising anything.
    let net = build_network(&kb)?;
    let beliefs = net.propagate()?;
    println!(
        "initial: bel(building) = {:.4}, bel(not building) = {:.4}, conflict = {:.4}",
        beliefs.bel_yes("building").unwrap().value(),
        beliefs.bel_no("building").unwrap().value(),
        statement_conflict(&beliefs, "building").unwrap().value(),
    );
    println!("initial suppositions:");
    for (id, degree) in suppositions(&net, &beliefs, "building")? {
        println!("  {id}: {degree:.4}");
    }

    let params = EngineParams {
        max_iter: 12,
        ..EngineParams::for_kb(&kb)
    };
    let outcome = resolve_loop(&kb, &params)?;

    println!("\nrevision trace:");
    for e in outcome.trace.iter() {
        match (&e.culprit, &e.revised) {
            (Some(culprit), Some(revised)) => println!(
                "  round {:>2}: conflict {:.4} -> culprit {culprit} (supposition {:.4}), \
                 discounted {revised}: theta {:.4} -> {:.4}",
                e.iteration,
                e.mu_conflict,
                e.mu_supposition.unwrap(),
                e.theta_before.unwrap(),
                e.theta_after.unwrap(),
            ),
            _ => println!(
                "  round {:>2}: conflict {:.4} -> stop",
                e.iteration, e.mu_conflict
            ),
        }
    }

    println!(
        "\nafter {} revisions ({}):",
        outcome.revisions, outcome.stopped
    );
    println!(
        "  photo discount: {:.4}, humint discount: {:.4}",
        outcome.kb.source("photo").unwrap().discount,
        outcome.kb.source("humint").unwrap().discount,
    );
    println!(
        "  bel(building) = {:.4}, bel(not building) = {:.4}, conflict = {:.4}",
        outcome.beliefs.bel_yes("building").unwrap().value(),
        outcome.beliefs.bel_no("building").unwrap().value(),
        statement_conflict(&outcome.beliefs, "building")
            .unwrap()
            .value(),
    );
    println!("\nthe engine reacted to the clash by doubting both sources, not by averaging them");
    Ok(())
}
