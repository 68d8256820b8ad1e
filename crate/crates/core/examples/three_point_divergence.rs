//! Two linear scorers on three points: the error-optimal one loses under a
//! right-tail criterion, and the best-case tail needs a strong tilt.

use critlab::surrogate::{divergence_report, ThreePointExample};
use critlab::CriterionSpec;

fn main() -> critlab::Result<()> {
    let specs: Vec<CriterionSpec> = [
        "expected",
        "tilted:3",
        "tilted:-3",
        "tilted:-25",
        "cvar:0.9",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<critlab::Result<_>>()?;
    for (a, p) in [(2.0, 0.9), (1.5, 0.6), (8.0, 0.9)] {
        let ex = ThreePointExample::new(a, p)?;
        println!("a = {a}, p = {p}");
        print!("{}", divergence_report(&ex, &specs)?.to_table());
        println!();
    }
    Ok(())
}
