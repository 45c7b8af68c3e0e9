//! Parse, validate, and serialize the knowledge-base and mass-file formats.
//!
//! ```bash
//! cargo run -p nmp --example kb_files
//! ```

use nmp::belief::combine_all;
use nmp::kb::{parse_kb, parse_mass_file, serialize_kb};
use nmp::network::build_network;

const KB: &str = "\
# A chain with a declared extra reason and engine parameters.
statement region_textured
statement building

evidence scanner for region_textured yes=0.85 no=0.05 discount=0.05
rule texture_cue if region_textured then building yes=0.7 no=0.3 discount=0.1
query building
param gamma=2 delta=0.5 maxiter=20
";

const MASS_A: &str = "\
frame field forest building
mass {field}=0.99 {forest}=0.01
discount 0.01
";

const MASS_B: &str = "\
frame field forest building
mass {forest}=0.01 {building}=0.99
discount 0.02
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = parse_kb(KB)?;
    println!(
        "parsed: {} statements, {} sources, {} queries, gamma = {:?}",
        kb.statements.len(),
        kb.sources.len(),
        kb.queries.len(),
        kb.params.gamma,
    );
    build_network(&kb)?;
    println!("network builds: references resolve and the rule graph is acyclic");

    let round_tripped = parse_kb(&serialize_kb(&kb))?;
    assert_eq!(round_tripped, kb);
    println!("\nserialized form reparses to an identical knowledge base:\n");
    print!("{}", serialize_kb(&kb));

    // Malformed input carries the offending line number.
    let err = parse_kb("statement b\nevidence e for b yes=0.7 no=0.4\n").unwrap_err();
    println!("\novercommitted evidence rejected: {err}");
    let err = parse_kb(
        "statement a\nstatement b\nrule r if a then b yes=1 no=0\nrule r2 if b then a yes=1 no=0\n",
    )
    .map(|kb| build_network(&kb))
    .expect("parses")
    .unwrap_err();
    println!("rule cycle rejected: {err}");

    // Mass files: one frame, one support function, an optional discount.
    let a = parse_mass_file(MASS_A)?;
    let b = parse_mass_file(MASS_B)?;
    let combined = combine_all([&a.effective(), &b.effective()])?;
    println!("\ncombined mass files:");
    for (subset, value) in combined.focal() {
        println!(
            "  m({}) = {value:.4}",
            combined.frame().format_subset(subset)
        );
    }
    Ok(())
}
