//! Build a rule network from a knowledge base and propagate belief through
//! it, then inspect the derived support lists and assumption degrees.
//!
//! Statements are binary; evidence and rules assign support to their `yes`
//! and `no` poles, with the remainder left on the universal set. A rule's
//! contribution is scaled by its weakest antecedent belief and by its own
//! discount. Each statement combines its sources with Dempster's rule.
//!
//! ```bash
//! cargo run -p nmp --example propagate_rules
//! ```

use nmp::kb::parse_kb;
use nmp::network::build_network;

const KB: &str = "\
# Region labeling: one texture cue chained behind a scanner reading,
# one opposing analyst report.
statement region_textured
statement training_match
statement building

evidence scanner for region_textured yes=0.85 no=0.05 discount=0.05
evidence priors for training_match yes=0.6 no=0.1 discount=0.2

rule texture_cue if region_textured then building yes=0.7 no=0.3 discount=0.1
reason texture_cue includes training_match

evidence analyst for building yes=0.1 no=0.9 discount=0.05

query building
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = parse_kb(KB)?;
    let net = build_network(&kb)?;
    let beliefs = net.propagate()?;

    println!("propagated beliefs:\n");
    println!(
        "{:<16} {:>8} {:>8} {:>8}",
        "statement", "bel", "pl", "theta"
    );
    for id in net.statements() {
        println!(
            "{:<16} {:>8.4} {:>8.4} {:>8.4}",
            id,
            beliefs.bel_yes(id).unwrap().value(),
            beliefs.plausibility_yes(id).unwrap().value(),
            beliefs.theta_mass(id).unwrap(),
        );
    }

    println!("\nrule activation and contributed mass:");
    for source in net.sources() {
        let activation = net.activation(&source.id, &beliefs)?;
        let mass = net.effective_mass(&source.id, &beliefs)?;
        println!(
            "  {:<12} activation = {:.4}  contributes m(yes) = {:.4}, m(theta) = {:.4}",
            source.id,
            activation.value(),
            mass.mass(nmp::network::YES),
            mass.theta_mass(),
        );
    }

    println!("\nsupport lists (reason pairs with in/out membership):");
    for id in net.declaration_order() {
        let pairs = net.support_list(id);
        if pairs.is_empty() {
            continue;
        }
        println!("  {id}:");
        for pair in pairs {
            println!(
                "    {:<24} out = {:.4}  in = {:.4}",
                pair.label(),
                net.mu_out(pair, &beliefs)?.value(),
                net.mu_in(pair, &beliefs)?.value(),
            );
        }
        println!(
            "    assumption degree = {:.4}",
            net.mu_assumption(id, &beliefs)?.value()
        );
    }
    println!("\nelements with no reasons rest purely on supposition (degree 1)");
    Ok(())
}
