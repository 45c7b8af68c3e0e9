//! Measure the conflict inside a belief function and its significance.
//!
//! The conflict over a statement and its complement is twice the smaller of
//! the two committed beliefs: zero when either side is unsupported, one when
//! both sides carry exactly half. Raising the measure to an exponent gamma
//! sets how much conflict counts as significant.
//!
//! ```bash
//! cargo run -p nmp --example measure_conflict
//! ```

use nmp::belief::{BeliefError, Frame, MassFunction};
use nmp::fuzzy::{conflict, significance};

fn main() -> Result<(), BeliefError> {
    let frame = Frame::new(["field", "forest", "building"])?;
    let field = frame.singleton("field")?;
    let photo = MassFunction::from_assignments(
        &frame,
        &[(field, 0.99), (frame.singleton("forest")?, 0.01)],
    )?;
    let humint = MassFunction::from_assignments(
        &frame,
        &[
            (frame.singleton("forest")?, 0.01),
            (frame.singleton("building")?, 0.99),
        ],
    )?;

    println!("conflict over the split (field | not field):\n");
    println!(
        "{:>10}  {:>10}  {:>10}  {:>10}",
        "discounts", "bel(S)", "bel(~S)", "conflict"
    );
    for (ra, rb) in [(0.01, 0.02), (0.10, 0.10), (0.29, 0.30), (0.60, 0.60)] {
        let combined = photo.discount(ra)?.combine(&humint.discount(rb)?)?;
        let bel = combined.belief(field)?;
        let against = combined.belief(frame.complement(field))?;
        let c = conflict(bel, against).expect("complementary beliefs");
        println!(
            "{:>10}  {:>10.4}  {:>10.4}  {:>10.4}",
            format!("{:.0}%/{:.0}%", ra * 100.0, rb * 100.0),
            bel.value(),
            against.value(),
            c.value()
        );
    }

    // Discounting a single source always shrinks its own conflict; the
    // conflict of a *combination* may grow as normalization weakens.
    let combined = photo.discount(0.29)?.combine(&humint.discount(0.30)?)?;
    let c = conflict(
        combined.belief(field)?,
        combined.belief(frame.complement(field))?,
    )
    .expect("complementary beliefs");
    println!(
        "\nsignificance of the {:.4} conflict under different exponents:\n",
        c.value()
    );
    for gamma in [0.5, 1.0, 2.0, 4.0] {
        let s = significance(c, gamma).expect("positive gamma");
        println!("  gamma = {gamma:<4}  significance = {:.4}", s.value());
    }
    println!("\nlarger gamma demands more conflict before revision engages");
    Ok(())
}
