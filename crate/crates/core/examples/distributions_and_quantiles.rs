//! Finite loss distributions: canonical form, CDF and both quantiles.

use critlab::{BernoulliSpec, EmpiricalLossDist};

fn main() -> critlab::Result<()> {
    // Duplicate atoms are merged and the support is sorted.
    let d = EmpiricalLossDist::new(vec![2.0, 0.5, 2.0, 1.0], vec![0.1, 0.4, 0.2, 0.3])?;
    println!("atoms: {:?}", d.atoms().collect::<Vec<_>>());
    println!("mean {:.4}, min {}, max {}", d.mean(), d.min(), d.max());
    for x in [0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("F({x}) = {:.2}", d.cdf(x));
    }
    for beta in [0.1, 0.4, 0.7, 0.95] {
        println!(
            "beta {beta:<4}: left quantile {}, right quantile {}",
            d.left_quantile(beta)?,
            d.right_quantile(beta)?
        );
    }

    // The zero-one loss of a classifier with error p.
    let b = BernoulliSpec::new(0.3)?.to_empirical();
    println!(
        "Bernoulli(0.3): zero-one {} mean {}",
        b.is_zero_one(),
        b.mean()
    );
    for beta in [0.5, 0.7, 0.71] {
        println!("  Q_{beta} = {}", b.left_quantile(beta)?);
    }
    Ok(())
}
