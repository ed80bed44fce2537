// Temporary experiment: desk-scale Table 2 check (deleted before delivery).
use gevmiss::inference::Estimator;
use gevmiss::simulation::{run_study, RawDistribution, SimulationConfig};
use std::time::Instant;

#[test]
#[ignore]
fn table2_experiment() {
    let mut config = SimulationConfig::new(RawDistribution::Exponential);
    config.reps = 1000;
    config.seed = 1;
    config.estimators = vec![Estimator::Adjust, Estimator::Naive];
    config.compute_ci = false;

    let t0 = Instant::now();
    let out = run_study(&config).unwrap();
    println!("elapsed (no CI): {:?}", t0.elapsed());

    for est in [Estimator::Adjust, Estimator::Naive] {
        let s = &out.summary.estimators[&est];
        let d = s.param_diff_vs_full.as_ref().unwrap();
        println!(
            "{est}: n={} mu bias={:+.4} (mcse {:.5}) sd={:.4} | sigma bias={:+.4} | xi bias={:+.4} | failures={}",
            d.n_used, d.mu.bias, d.mu.bias_mcse, d.mu.sd, d.sigma.bias, d.xi.bias, s.failures
        );
        println!(
            "   rl: bias={:+.4} median_bias={:+.4} sd={:.4}",
            s.return_level.bias, s.return_level.median_bias, s.return_level.sd
        );
    }
    println!("true rl = {}", out.summary.true_return_level);
}

#[test]
#[ignore]
fn table2_with_ci_timing() {
    let mut config = SimulationConfig::new(RawDistribution::Exponential);
    config.reps = 100;
    config.seed = 1;
    config.estimators = vec![Estimator::Adjust, Estimator::Naive];
    config.compute_ci = true;

    let t0 = Instant::now();
    let out = run_study(&config).unwrap();
    println!("elapsed (100 reps, CI): {:?}", t0.elapsed());
    for est in [Estimator::Adjust, Estimator::Naive, Estimator::Full] {
        let s = &out.summary.estimators[&est];
        println!(
            "{est}: coverage={:?} n_ci={}",
            s.return_level.coverage, s.return_level.n_ci
        );
    }
}

#[test]
#[ignore]
fn weight2_iid_experiment() {
    let mut config = SimulationConfig::new(RawDistribution::Exponential);
    config.reps = 1000;
    config.seed = 3;
    config.estimators = vec![Estimator::Weight2, Estimator::Weight1, Estimator::Discard];
    config.compute_ci = false;

    let out = run_study(&config).unwrap();
    for est in [Estimator::Weight2, Estimator::Weight1, Estimator::Discard] {
        let s = &out.summary.estimators[&est];
        let d = s.param_diff_vs_full.as_ref().unwrap();
        println!(
            "{est}: n={} mu bias={:+.4} sd={:.4} | sigma bias={:+.4} | xi bias={:+.4} | failures={}",
            d.n_used, d.mu.bias, d.mu.sd, d.sigma.bias, d.xi.bias, s.failures
        );
    }
}

#[test]
#[ignore]
fn maxar_experiment() {
    let mut config = SimulationConfig::new(RawDistribution::Maxar1 { theta: 0.5 });
    config.reps = 1000;
    config.seed = 2;
    config.estimators = vec![Estimator::Adjust, Estimator::Weight2];
    config.compute_ci = false;

    let t0 = Instant::now();
    let out = run_study(&config).unwrap();
    println!("elapsed: {:?}", t0.elapsed());
    for est in [Estimator::Adjust, Estimator::Weight2] {
        let d = out.summary.estimators[&est]
            .param_diff_vs_full
            .as_ref()
            .unwrap()
            .clone();
        println!("{est}: mu bias={:+.4} (mcse {:.5})", d.mu.bias, d.mu.bias_mcse);
    }
}
