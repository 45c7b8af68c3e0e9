//! Combine two conflicting analyst reports over a three-way frame.
//!
//! Taken at face value, Dempster's rule hands all support to the one
//! hypothesis both analysts dismissed. Discounting each report a little
//! produces a far more plausible bimodal picture, and discounting harder
//! nearly balances the two main candidates.
//!
//! ```bash
//! cargo run -p nmp --example combine_reports
//! ```

use nmp::belief::{BeliefError, Frame, MassFunction};

fn print_mass(label: &str, m: &MassFunction) {
    println!("{label}");
    for (subset, value) in m.focal() {
        println!("  m({}) = {value:.4}", m.frame().format_subset(subset));
    }
}

fn main() -> Result<(), BeliefError> {
    let frame = Frame::new(["field", "forest", "building"])?;
    let field = frame.singleton("field")?;
    let forest = frame.singleton("forest")?;
    let building = frame.singleton("building")?;

    // A photo interpreter is near-certain the region is a field; an
    // independent human-intelligence report is near-certain it is a
    // building. Both leave a sliver on forest.
    let photo = MassFunction::from_assignments(&frame, &[(field, 0.99), (forest, 0.01)])?;
    let humint = MassFunction::from_assignments(&frame, &[(forest, 0.01), (building, 0.99)])?;

    print_mass("photo report:", &photo);
    print_mass("humint report:", &humint);

    let raw = photo.combine(&humint)?;
    print_mass("\ncombined at face value:", &raw);
    println!("  (all support lands on the option neither analyst believed)");

    let soft = photo.discount(0.01)?.combine(&humint.discount(0.02)?)?;
    print_mass("\ncombined after 1% / 2% discounts:", &soft);
    println!(
        "  bel(field) = {:.4}, pl(field) = {:.4}",
        soft.belief(field)?.value(),
        soft.plausibility(field)?.value()
    );

    let heavy = photo.discount(0.29)?.combine(&humint.discount(0.30)?)?;
    print_mass("\ncombined after 29% / 30% discounts:", &heavy);
    println!(
        "  bel(field) = {:.4} vs bel(building) = {:.4}: nearly balanced",
        heavy.belief(field)?.value(),
        heavy.belief(building)?.value()
    );

    // Fully categorical contradiction leaves nothing to normalize.
    let yes = MassFunction::from_assignments(&frame, &[(field, 1.0)])?;
    let no = MassFunction::from_assignments(&frame, &[(building, 1.0)])?;
    match yes.combine(&no) {
        Err(BeliefError::TotalConflict) => {
            println!("\ncategorical contradiction: combination is indeterminate")
        }
        other => println!("\nunexpected: {other:?}"),
    }
    Ok(())
}
