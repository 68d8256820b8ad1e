//! Every criterion evaluated on one loss distribution, with the minimizing
//! threshold where the criterion has one.

use critlab::{eval_criterion, CriterionSpec, EmpiricalLossDist};

fn main() -> critlab::Result<()> {
    let d = EmpiricalLossDist::new(vec![0.1, 0.4, 0.9, 2.5], vec![0.4, 0.3, 0.2, 0.1])?;
    let specs = [
        "expected",
        "quantile:0.8",
        "cvar:0.8",
        "oce:cvar:0.8",
        "tilted:1",
        "tilted:-1",
        "oce:tilt:1",
        "dro:2:0.5",
        "orlicz:0.1",
        "variantile:0.5",
        "variantile:0.9",
        "inner:abs:0.3",
        "outer:pseudo-huber:0.3",
    ];
    println!("{:<24} {:>12} {:>12}", "criterion", "value", "theta");
    for s in specs {
        let spec: CriterionSpec = s.parse()?;
        let r = eval_criterion(&spec, &d)?;
        let theta = r
            .minimizer_theta
            .map_or("-".to_string(), |t| format!("{t:.6}"));
        println!("{:<24} {:>12.6} {:>12}", spec.to_string(), r.value, theta);
    }
    Ok(())
}
