//! Flooding keeps the average training loss near its threshold while ERM
//! drives it toward zero; test accuracy barely differs.

use critlab::harness::format::num;
use critlab::train::{init_model, train, Arch, BlobSpec, LossKind, Method, Split, TrainConfig};
use critlab::MarginPenalty;

fn main() -> critlab::Result<()> {
    let splits = BlobSpec::binary().splits([2000, 500, 500], 0)?;
    let arch = Arch::Mlp { hidden: 16 };
    let methods = [
        Method::Erm,
        Method::Flooding { theta: 0.3 },
        Method::SoftAd { theta: 0.3 },
        Method::Cvar { beta: 0.5 },
        Method::Tilted { gamma: 1.0 },
        Method::Dro { eps: 0.5 },
    ];
    println!(
        "{:<14} {:>12} {:>10} {:>10}",
        "method", "train loss", "test acc", "norm"
    );
    for method in methods {
        let config = TrainConfig {
            method,
            loss: LossKind::Margin(MarginPenalty::Logistic),
            ..TrainConfig::default()
        };
        let out = train(init_model(arch, &splits, config.seed)?, &splits, &config)?;
        let tr = out
            .record
            .last(Split::Train)
            .expect("trained at least one epoch");
        let te = out
            .record
            .last(Split::Test)
            .expect("trained at least one epoch");
        println!(
            "{:<14} {:>12} {:>10} {:>10}",
            method.to_string(),
            num(tr.loss),
            num(te.acc),
            num(tr.norm)
        );
    }
    Ok(())
}
