//! Acceptance suite (plain `main`, no libtest harness, so the report is
//! always shown). Prints one PASS/FAIL line per criterion, then asserts
//! that the results match the recorded expectations: everything passes
//! except the sub-checks listed in `KNOWN_RED`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use critlab::collapse::{
    cvar_regime, run_suite, variantile_extremes, CvarRegime, RandomSuite, VariantileExtreme,
};
use critlab::criteria::g_tau;
use critlab::harness::config::{bundled, BUNDLED};
use critlab::harness::{run_config, RunConfig};
use critlab::surrogate::{
    desk_problems, divergence_report, oce_bayes_check, prop4_witness_inner, prop4_witness_outer,
    DiscreteClassificationProblem, ThreePointExample, Winner, DEFAULT_SWEEP_BUDGET,
};
use critlab::train::{
    init_model, step, train, Arch, BlobSpec, Dataset, LossKind, Method, Model, Split, StepState,
    TrainConfig,
};
use critlab::{
    bernoulli_claim, check_collapse, eval_criterion, CollapseClaim, CriterionSpec,
    DispersionFunction, EmpiricalLossDist, FiniteHypothesisClass, MarginPenalty,
};

const TOL: f64 = 1e-9;

/// `(criterion, sub-check)` pairs that are expected to fail. See the
/// README's "Known deviations" section.
const KNOWN_RED: &[(u32, &str)] = &[(6, "tilted(-3) winner is s2 at a=2, p=0.9")];

struct Outcome {
    id: u32,
    title: &'static str,
    checks: Vec<(String, bool)>,
    seconds: f64,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.0.push((name.into(), ok));
    }
}

fn run(id: u32, title: &'static str, f: impl FnOnce(&mut Checks)) -> Outcome {
    let start = Instant::now();
    let mut checks = Checks::new();
    f(&mut checks);
    Outcome {
        id,
        title,
        checks: checks.0,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn spec(s: &str) -> CriterionSpec {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn suite_specs(names: &[&str]) -> Vec<(CriterionSpec, CollapseClaim)> {
    names
        .iter()
        .map(|s| {
            let sp = spec(s);
            let claim = bernoulli_claim(&sp).expect("monotone criterion has a prediction");
            (sp, claim)
        })
        .collect()
}

fn c1_quantile_suite(c: &mut Checks) {
    let start = Instant::now();
    let betas: Vec<String> = (1..20)
        .map(|i| format!("quantile:{}", i as f64 * 0.05))
        .collect();
    let names: Vec<&str> = betas.iter().map(String::as_str).collect();
    let specs = suite_specs(&names);
    c.check(
        "every quantile predicts inclusion",
        specs
            .iter()
            .all(|(_, claim)| *claim == CollapseClaim::Inclusion),
    );
    let out = run_suite(&RandomSuite::default(), &specs, TOL, 1).unwrap();
    c.check(
        format!("{} checks, {} violations", out.checks, out.violations.len()),
        out.violations.is_empty() && out.checks == 200 * 19,
    );
    c.check("runtime < 5 s", start.elapsed().as_secs_f64() < 5.0);
}

fn c2_monotone_suite(c: &mut Checks) {
    let start = Instant::now();
    let expected = [
        ("oce:tilt:0.5", CollapseClaim::Equality),
        ("oce:tilt:1", CollapseClaim::Equality),
        ("oce:tilt:2", CollapseClaim::Equality),
        ("oce:cvar:0.3", CollapseClaim::Inclusion),
        ("oce:cvar:0.7", CollapseClaim::Inclusion),
        ("dro:2:0.1", CollapseClaim::Inclusion),
        ("dro:2:0.5", CollapseClaim::Inclusion),
        ("orlicz:0.1", CollapseClaim::Equality),
    ];
    let specs: Vec<_> = expected
        .iter()
        .map(|(s, claim)| (spec(s), *claim))
        .collect();
    let out = run_suite(&RandomSuite::default(), &specs, TOL, 1).unwrap();
    for (s, claim) in &expected {
        let bad = out.violations.iter().filter(|v| v.criterion == *s).count();
        c.check(format!("{s} {claim}: {bad} violations"), bad == 0);
    }
    c.check("runtime < 60 s", start.elapsed().as_secs_f64() < 60.0);
}

fn random_dist(rng: &mut ChaCha8Rng) -> EmpiricalLossDist {
    let n = rng.random_range(1..=10);
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    EmpiricalLossDist::new(values, raw.iter().map(|w| w / total).collect()).unwrap()
}

fn c3_closed_forms(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_cvar, mut worst_tilt) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = random_dist(&mut rng);
        let beta = rng.random_range(0.05..0.95);
        let gamma = rng.random_range(0.1..3.0);
        let closed = eval_criterion(&CriterionSpec::cvar(beta).unwrap(), &d)
            .unwrap()
            .value;
        let generic = eval_criterion(
            &CriterionSpec::oce(DispersionFunction::cvar_hinge(beta).unwrap()).unwrap(),
            &d,
        )
        .unwrap()
        .value;
        worst_cvar = worst_cvar.max((closed - generic).abs());
        let closed = eval_criterion(&CriterionSpec::tilted(gamma).unwrap(), &d)
            .unwrap()
            .value;
        let generic = eval_criterion(
            &CriterionSpec::oce(DispersionFunction::exp_tilt(gamma).unwrap()).unwrap(),
            &d,
        )
        .unwrap()
        .value;
        worst_tilt = worst_tilt.max((closed - generic).abs());
    }
    c.check(
        format!("cvar max gap {worst_cvar:.2e} < 1e-7"),
        worst_cvar < 1e-7,
    );
    c.check(
        format!("tilted max gap {worst_tilt:.2e} < 1e-7"),
        worst_tilt < 1e-7,
    );
}

fn c4_cvar_regimes(c: &mut Checks) {
    for beta in [0.3, 0.5, 0.7, 0.9] {
        let cut = 1.0 - beta;
        // Built so the regime is known: all errors above 1 - β, all at or
        // below it (including the boundary), or straddling it.
        let trivial: Vec<f64> = [0.01, 0.05, 0.08].iter().map(|d| cut + d).collect();
        let coincide: Vec<f64> = [0.2, 0.6, 1.0].iter().map(|f| cut * f).collect();
        let intermediate = vec![cut * 0.5, cut + 0.02, cut + 0.05];
        let cases = [
            ("trivial", trivial, CvarRegime::TrivialAllOptimal),
            ("coincide", coincide, CvarRegime::Coincide),
            ("intermediate", intermediate, CvarRegime::Intermediate),
        ];
        let cvar = CriterionSpec::cvar(beta).unwrap();
        for (name, errs, want) in cases {
            let class = FiniteHypothesisClass::from_errs(&errs).unwrap();
            let got = cvar_regime(&class, beta).unwrap();
            let r = check_collapse(&cvar, &class, TOL).unwrap();
            let implication = match want {
                CvarRegime::TrivialAllOptimal => {
                    r.spread < 1e-9 && r.criterion_argmin.len() == class.len()
                }
                CvarRegime::Coincide => r.equality,
                CvarRegime::Intermediate => r.inclusion_12a,
            };
            c.check(
                format!("beta {beta} {name}: verdict {got}, spread {:.1e}", r.spread),
                got == want && implication,
            );
        }
    }
}

fn c5_variantile(c: &mut Checks) {
    let worst = (1..100)
        .map(|i| {
            let p = i as f64 / 100.0;
            (g_tau(0.5, p).unwrap() - p * (1.0 - p)).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        format!("g_0.5(p) = p(1-p), max gap {worst:.1e}"),
        worst < 1e-9,
    );
    let h = 1e-3;
    for t in 1..10 {
        let tau = t as f64 / 10.0;
        let concave = (1..100).all(|i| {
            let p = i as f64 / 100.0;
            let g = |x: f64| g_tau(tau, x).unwrap();
            g(p - h) - 2.0 * g(p) + g(p + h) < 0.0
        });
        c.check(format!("g_{tau} strictly concave on the grid"), concave);
    }
    let classes = RandomSuite {
        seed: 5,
        classes: 100,
        max_size: 50,
    }
    .generate()
    .unwrap();
    for t in 1..10 {
        let tau = t as f64 / 10.0;
        let mixed = classes
            .iter()
            .filter(|cl| variantile_extremes(cl, tau, TOL).unwrap() == VariantileExtreme::Mixed)
            .count();
        c.check(
            format!("variantile:{tau} mixtures on 100 classes: {mixed}"),
            mixed == 0,
        );
    }
}

/// Logistic losses of the two scorers, worked out by hand: inliers have
/// margin +2 under s1 and -2 under s2, the outlier -2a under s1 and +2a
/// under s2.
fn three_point_losses(a: f64, p: f64) -> [[(f64, f64); 2]; 2] {
    let l = |m: f64| (1.0 + (-m).exp()).ln();
    [
        [(l(2.0), p), (l(-2.0 * a), 1.0 - p)],
        [(l(-2.0), p), (l(2.0 * a), 1.0 - p)],
    ]
}

fn c6_three_point(c: &mut Checks) {
    let (a, p) = (2.0, 0.9);
    let [s1, s2] = three_point_losses(a, p);
    let mean = |d: &[(f64, f64); 2]| d.iter().map(|(l, w)| l * w).sum::<f64>();
    let tilt = |d: &[(f64, f64); 2], g: f64| {
        (d.iter().map(|(l, w)| w * (g * l).exp()).sum::<f64>()).ln() / g
    };
    let ex = ThreePointExample::new(a, p).unwrap();
    let report = divergence_report(
        &ex,
        &[spec("expected"), spec("tilted:3"), spec("tilted:-3")],
    )
    .unwrap();
    let winner = |i: usize| report.rows[i].winner;
    let agree = report
        .rows
        .iter()
        .zip([mean(&s1), tilt(&s1, 3.0), tilt(&s1, -3.0)])
        .all(|(r, o)| (r.s1 - o).abs() < 1e-12)
        && report
            .rows
            .iter()
            .zip([mean(&s2), tilt(&s2, 3.0), tilt(&s2, -3.0)])
            .all(|(r, o)| (r.s2 - o).abs() < 1e-12);
    c.check("library values match hand-derived losses", agree);
    c.check(
        format!(
            "expected winner is s1 ({:.6} vs {:.6})",
            mean(&s1),
            mean(&s2)
        ),
        winner(0) == Winner::S1 && mean(&s1) < mean(&s2),
    );
    c.check(
        format!(
            "tilted(3) winner is s2 ({:.6} vs {:.6})",
            tilt(&s1, 3.0),
            tilt(&s2, 3.0)
        ),
        winner(1) == Winner::S2 && tilt(&s2, 3.0) < tilt(&s1, 3.0),
    );
    for a in [1.5, 2.0, 4.0, 8.0] {
        let r = divergence_report(&ThreePointExample::new(a, p).unwrap(), &[]).unwrap();
        let [s1, s2] = three_point_losses(a, p);
        let max = |d: &[(f64, f64); 2]| d[0].0.max(d[1].0);
        let min = |d: &[(f64, f64); 2]| d[0].0.min(d[1].0);
        c.check(
            format!("ordering facts at a={a}"),
            r.max_loss_s2_below
                && r.min_loss_s2_below
                && max(&s2) < max(&s1)
                && min(&s2) < min(&s1),
        );
    }
    c.check(
        format!(
            "tilted(-3) winner is s2 at a=2, p=0.9 (s1 {:.6} vs s2 {:.6}, library says {})",
            tilt(&s1, -3.0),
            tilt(&s2, -3.0),
            winner(2)
        ),
        winner(2) == Winner::S2,
    );
}

fn c7_bayes(c: &mut Checks) {
    let start = Instant::now();
    let phis = [
        MarginPenalty::Logistic,
        MarginPenalty::Exponential,
        MarginPenalty::Quadratic,
    ];
    let rhos = [
        DispersionFunction::exp_tilt(0.5).unwrap(),
        DispersionFunction::exp_tilt(1.0).unwrap(),
    ];
    let problems: Vec<_> = desk_problems()
        .into_iter()
        .filter(|(_, p)| p.points().len() <= 4)
        .collect();
    c.check(
        format!("{} bundled problems", problems.len()),
        !problems.is_empty(),
    );
    for (name, problem) in &problems {
        let oracle: f64 = problem
            .points()
            .iter()
            .map(|p| p.mass * p.beta.min(1.0 - p.beta))
            .sum();
        let mut worst = 0.0f64;
        for phi in phis {
            for rho in &rhos {
                let r = oce_bayes_check(problem, phi, rho, DEFAULT_SWEEP_BUDGET).unwrap();
                worst = worst.max((r.achieved_err - oracle).abs());
            }
        }
        c.check(format!("{name}: worst gap {worst:.1e}"), worst < 1e-6);
    }
    c.check("runtime < 30 s", start.elapsed().as_secs_f64() < 30.0);
}

fn c8_witnesses(c: &mut Checks) {
    let problem = DiscreteClassificationProblem::uniform(&[1.0, 0.0]).unwrap();
    for phi in [MarginPenalty::Logistic, MarginPenalty::Exponential] {
        for rho in [DispersionFunction::Abs, DispersionFunction::PseudoHuber] {
            let inner = prop4_witness_inner(&problem, phi, &rho).unwrap();
            c.check(format!("inner {phi}/{rho} disjoint"), inner.report.disjoint);
            let outer = prop4_witness_outer(&problem, phi, &rho).unwrap();
            let flipped = outer
                .report
                .values
                .iter()
                .find(|v| v.id == "h_flipped")
                .map(|v| v.value);
            c.check(
                format!("outer {phi}/{rho} disjoint, C_out(flipped) = {flipped:?}"),
                outer.report.disjoint && flipped == Some(0.0),
            );
        }
    }
}

fn audit_data(rng: &mut ChaCha8Rng, classes: usize) -> Dataset {
    let n = 6;
    let features: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let labels: Vec<i32> = (0..n)
        .map(|i| {
            if classes == 2 {
                if i % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                (i % classes) as i32
            }
        })
        .collect();
    Dataset::new(2, features, labels).unwrap()
}

/// Relative error of the analytic direction against central differences of
/// the method objective, over parameters and (for joint methods) `θ`.
fn audit_once(
    model: &Model,
    data: &Dataset,
    loss: LossKind,
    method: Method,
    theta: Option<f64>,
) -> f64 {
    let idx: Vec<usize> = (0..data.len()).collect();
    let batch = model.loss_and_grad(data, &idx, loss).unwrap();
    let (mut analytic, theta_dir) = method.direction(&batch, theta).unwrap();
    analytic.extend(theta_dir);
    let objective = |params: &[f64], theta: Option<f64>| {
        let m = Model::from_params(
            model.arch(),
            model.input_dim(),
            model.output_dim(),
            params.to_vec(),
        )
        .unwrap();
        let losses = m.loss_and_grad(data, &idx, loss).unwrap().losses;
        method.objective(&losses, theta)
    };
    let h = 1e-6;
    let mut numeric = Vec::with_capacity(analytic.len());
    let base = model.params().to_vec();
    for i in 0..base.len() {
        let (mut up, mut down) = (base.clone(), base.clone());
        up[i] += h;
        down[i] -= h;
        numeric.push((objective(&up, theta) - objective(&down, theta)) / (2.0 * h));
    }
    if let Some(t) = theta.filter(|_| method.has_joint_theta()) {
        numeric.push((objective(&base, Some(t + h)) - objective(&base, Some(t - h))) / (2.0 * h));
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = analytic
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(numeric.iter().map(|b| b * b).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn c9_gradient_audit(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let methods = [
        Method::Erm,
        Method::Tilted { gamma: 1.5 },
        Method::Tilted { gamma: -1.0 },
        Method::Cvar { beta: 0.5 },
        Method::Dro { eps: 0.5 },
        Method::Flooding { theta: 0.3 },
        Method::SoftAd { theta: 0.3 },
    ];
    let setups = [
        (Arch::Linear, LossKind::Margin(MarginPenalty::Logistic), 2),
        (
            Arch::Mlp { hidden: 5 },
            LossKind::Margin(MarginPenalty::Logistic),
            2,
        ),
        (Arch::Linear, LossKind::CrossEntropy, 3),
        (Arch::Mlp { hidden: 5 }, LossKind::CrossEntropy, 3),
    ];
    for (arch, loss, classes) in setups {
        for method in methods {
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let data = audit_data(&mut rng, classes);
                let out = if classes == 2 { 1 } else { classes };
                let mut model = Model::init(arch, 2, out, &mut rng).unwrap();
                // Non-zero biases so hidden units sit away from the ReLU kink.
                model
                    .params_mut()
                    .iter_mut()
                    .for_each(|w| *w += rng.random_range(-0.3..0.3));
                let theta = method.has_joint_theta().then(|| rng.random_range(0.2..0.9));
                worst = worst.max(audit_once(&model, &data, loss, method, theta));
            }
            c.check(
                format!("{arch} {loss} {method}: worst rel err {worst:.1e}"),
                worst < 1e-5,
            );
        }
    }
}

fn c10_update_rules(c: &mut Checks) {
    let splits = BlobSpec::binary().splits([200, 10, 10], 10).unwrap();
    let idx: Vec<usize> = (0..50).collect();
    let base = TrainConfig::default();
    let model = init_model(Arch::Mlp { hidden: 8 }, &splits, 10).unwrap();
    let delta = |method: Method, model: &Model| {
        let mut m = model.clone();
        let config = TrainConfig {
            method,
            ..base.clone()
        };
        let mut state = StepState::new(&m, &method);
        step(&mut m, &mut state, &splits.train, &idx, &config).unwrap()
    };
    let erm = delta(Method::Erm, &model);
    let mean = model
        .loss_and_grad(&splits.train, &idx, base.loss)
        .unwrap()
        .mean_loss();
    for theta in [mean - 0.2, mean + 0.2, mean] {
        let s = if mean - theta >= 0.0 { 1.0 } else { -1.0 };
        let flood = delta(Method::Flooding { theta }, &model);
        let exact = flood.iter().zip(&erm).all(|(f, e)| *f == s * e);
        c.check(
            format!(
                "flooding(theta = mean {:+.1}) = {s:+} x erm step",
                theta - mean
            ),
            exact,
        );
    }

    // A zero linear scorer gives every example the same loss, log 2.
    let zero = Model::from_params(Arch::Linear, 2, 1, vec![0.0; 3]).unwrap();
    let soft = delta(Method::SoftAd { theta: 2f64.ln() }, &zero);
    let norm = soft.iter().map(|d| d * d).sum::<f64>().sqrt();
    c.check(
        format!("softad step norm {norm:.1e} at equal losses"),
        norm < 1e-12,
    );

    let tilt = delta(Method::Tilted { gamma: 1e-8 }, &model);
    let diff = tilt
        .iter()
        .zip(&erm)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let rel = diff / erm.iter().map(|b| b * b).sum::<f64>().sqrt();
    c.check(
        format!("tilted(1e-8) vs erm rel diff {rel:.1e}"),
        rel < 1e-6,
    );
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn c11_training(c: &mut Checks, sweep_csv: &str, sweep_seconds: f64) {
    let start = Instant::now();
    let rows = csv_rows(sweep_csv);
    c.check(format!("{} method rows", rows.len()), rows.len() == 5);
    for r in &rows {
        let acc: f64 = r[4].parse().unwrap();
        c.check(
            format!("{} selected {} test acc {acc}", r[0], r[1]),
            acc >= 0.97,
        );
    }
    let splits = BlobSpec::binary().splits([2000, 500, 500], 0).unwrap();
    let arch = Arch::Mlp { hidden: 16 };
    for seed in 0..5 {
        let final_loss = |method: Method| {
            let config = TrainConfig {
                method,
                seed,
                ..TrainConfig::default()
            };
            let out = train(init_model(arch, &splits, seed).unwrap(), &splits, &config).unwrap();
            out.record.last(Split::Train).unwrap().loss
        };
        let flood = final_loss(Method::Flooding { theta: 0.3 });
        let erm = final_loss(Method::Erm);
        c.check(
            format!("seed {seed}: flooding(0.3) train loss {flood:.4} in [0.15, 0.45], erm {erm:.4} < 0.05"),
            (0.15..=0.45).contains(&flood) && erm < 0.05,
        );
    }
    let total = sweep_seconds + start.elapsed().as_secs_f64();
    c.check(
        format!("single-core runtime {total:.0} s < 600 s"),
        total < 600.0,
    );
}

fn main() {
    let mut outcomes = vec![
        run(1, "quantile collapse suite", c1_quantile_suite),
        run(2, "monotone criteria suite", c2_monotone_suite),
        run(3, "closed forms vs generic OCE", c3_closed_forms),
        run(4, "CVaR regimes", c4_cvar_regimes),
        run(5, "variantile extremes", c5_variantile),
        run(6, "three-point divergence", c6_three_point),
        run(7, "OCE Bayes consistency", c7_bayes),
        run(8, "loss-restraining witnesses", c8_witnesses),
        run(9, "gradient audit", c9_gradient_audit),
        run(10, "update-rule identities", c10_update_rules),
    ];

    // Every bundled config, run twice; the sweep's first run also feeds
    // criterion 11.
    let start = Instant::now();
    let mut sweep_csv = String::new();
    let mut sweep_seconds = 0.0;
    let mut determinism = Checks::new();
    for (name, text) in BUNDLED {
        let cfg = RunConfig::parse(text, None).unwrap();
        let t = Instant::now();
        let first = run_config(&cfg, 1).unwrap();
        if name == "blobs_sweep" {
            sweep_seconds = t.elapsed().as_secs_f64();
            sweep_csv = first.file("sweep.csv").unwrap().to_string();
        }
        let second = run_config(&cfg, 3).unwrap();
        let csvs = |o: &critlab::harness::RunOutcome| {
            o.files
                .iter()
                .filter(|(n, _)| n.ends_with(".csv"))
                .cloned()
                .collect::<Vec<_>>()
        };
        determinism.check(
            format!("{name}: {} CSVs byte-identical", csvs(&first).len()),
            !csvs(&first).is_empty() && csvs(&first) == csvs(&second) && first.failures.is_empty(),
        );
    }
    assert!(bundled("blobs_sweep").is_some());
    let determinism = Outcome {
        id: 12,
        title: "determinism of bundled configs",
        checks: determinism.0,
        seconds: start.elapsed().as_secs_f64(),
    };
    let mut training = run(11, "desk-scale training analog", |c| {
        c11_training(c, &sweep_csv, sweep_seconds)
    });
    training.seconds += sweep_seconds;
    outcomes.push(training);
    outcomes.push(determinism);

    println!();
    for o in &outcomes {
        println!(
            "acceptance {:>2} {} {} ({:.1} s)",
            o.id,
            if o.passed() { "PASS" } else { "FAIL" },
            o.title,
            o.seconds
        );
        for (name, ok) in &o.checks {
            if !ok || std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
                println!("    {} {name}", if *ok { "ok  " } else { "FAIL" });
            }
        }
    }

    let mut unexpected = Vec::new();
    for o in &outcomes {
        for (name, ok) in &o.checks {
            let known = KNOWN_RED
                .iter()
                .any(|(id, prefix)| *id == o.id && name.starts_with(prefix));
            if *ok == known {
                unexpected.push(format!(
                    "criterion {}: `{name}` {}",
                    o.id,
                    if *ok { "now passes" } else { "fails" }
                ));
            }
        }
    }
    for (id, prefix) in KNOWN_RED {
        let seen = outcomes
            .iter()
            .filter(|o| o.id == *id)
            .flat_map(|o| &o.checks)
            .any(|(n, _)| n.starts_with(prefix));
        assert!(seen, "known-red check `{prefix}` was not run");
    }
    assert!(
        unexpected.is_empty(),
        "unexpected acceptance results:\n{}",
        unexpected.join("\n")
    );
}
