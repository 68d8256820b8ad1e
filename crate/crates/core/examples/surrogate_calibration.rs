//! Minimizing a tilted OCE of a calibrated surrogate over every possible
//! score vector recovers the Bayes classifier on small discrete problems.

use critlab::surrogate::{desk_problems, oce_bayes_check, DEFAULT_SWEEP_BUDGET};
use critlab::{DispersionFunction, MarginPenalty};

fn main() -> critlab::Result<()> {
    let phis = [
        MarginPenalty::Logistic,
        MarginPenalty::Exponential,
        MarginPenalty::Quadratic,
    ];
    let rhos = [
        DispersionFunction::exp_tilt(0.5)?,
        DispersionFunction::exp_tilt(1.0)?,
    ];
    println!(
        "{:<14} {:<12} {:<8} {:>10} {:>10} {:>7}",
        "problem", "phi", "rho", "bayes", "achieved", "sweeps"
    );
    for (name, problem) in desk_problems() {
        for phi in phis {
            for rho in &rhos {
                let check = oce_bayes_check(&problem, phi, rho, DEFAULT_SWEEP_BUDGET)?;
                println!(
                    "{name:<14} {phi:<12} {:<8} {:>10.6} {:>10.6} {:>7}",
                    rho.to_string(),
                    check.bayes_err,
                    check.achieved_err,
                    check.sweeps
                );
            }
        }
    }
    Ok(())
}
