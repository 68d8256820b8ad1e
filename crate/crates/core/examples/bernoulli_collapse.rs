//! Which criteria, applied to zero-one losses, pick the same classifiers as
//! plain error minimization.

use critlab::collapse::{cvar_regime, variantile_extremes, RandomSuite, DEFAULT_TIE_TOL};
use critlab::{bernoulli_claim, check_collapse, CriterionSpec, FiniteHypothesisClass};

fn main() -> critlab::Result<()> {
    let class = FiniteHypothesisClass::from_errs(&[0.12, 0.3, 0.12, 0.45])?;
    for s in [
        "expected",
        "quantile:0.9",
        "cvar:0.5",
        "oce:tilt:2",
        "dro:2:0.5",
        "variantile:0.5",
    ] {
        let spec: CriterionSpec = s.parse()?;
        let report = check_collapse(&spec, &class, DEFAULT_TIE_TOL)?;
        print!("{}", report.to_text());
        match bernoulli_claim(&spec) {
            Some(claim) => println!("  predicted {claim}: {}\n", report.satisfies(claim)),
            None => println!("  no prediction\n"),
        }
    }

    for beta in [0.5, 0.7, 0.95] {
        println!("cvar:{beta} regime: {}", cvar_regime(&class, beta)?);
    }
    for tau in [0.1, 0.5, 0.9] {
        println!(
            "variantile:{tau} argmin: {}",
            variantile_extremes(&class, tau, DEFAULT_TIE_TOL)?
        );
    }

    // Many random classes at once.
    let suite = RandomSuite {
        seed: 7,
        classes: 50,
        max_size: 20,
    };
    let specs: Vec<_> = ["quantile:0.5", "oce:tilt:1", "orlicz:0.1"]
        .iter()
        .map(|s| {
            let spec: CriterionSpec = s.parse()?;
            let claim = bernoulli_claim(&spec).expect("monotone criteria carry a prediction");
            Ok((spec, claim))
        })
        .collect::<critlab::Result<_>>()?;
    let outcome = critlab::collapse::run_suite(&suite, &specs, DEFAULT_TIE_TOL, 2)?;
    println!(
        "\n{} checks, {} violations",
        outcome.checks,
        outcome.violations.len()
    );
    Ok(())
}
