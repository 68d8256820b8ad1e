//! Loss-restraining criteria can prefer a classifier with strictly worse
//! error. Both constructions build a two-member class that shows it.

use critlab::surrogate::{prop4_witness_inner, prop4_witness_outer, DiscreteClassificationProblem};
use critlab::{DispersionFunction, MarginPenalty};

fn main() -> critlab::Result<()> {
    let problem = DiscreteClassificationProblem::uniform(&[1.0, 0.0])?;
    for phi in [MarginPenalty::Logistic, MarginPenalty::Exponential] {
        for rho in [DispersionFunction::Abs, DispersionFunction::PseudoHuber] {
            let inner = prop4_witness_inner(&problem, phi, &rho)?;
            let outer = prop4_witness_outer(&problem, phi, &rho)?;
            println!("{phi} / {rho}");
            println!("  inner (b = {:?}, theta = {:.6})", inner.b, inner.theta);
            print!("{}", indent(&inner.report.to_text()));
            println!("  outer (theta = {:.6})", outer.theta);
            print!("{}", indent(&outer.report.to_text()));
        }
    }
    Ok(())
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}\n")).collect()
}
