use std::path::Path;

use proptest::prelude::*;

use thermal_mbqc_lab::experiments::{
    binomial_stderr, bootstrap_stderr, chance_level, run_logical_error_experiment, ExperimentConfig, Model,
};
use thermal_mbqc_lab::output::{read_result_csv, result_csv};

fn small(model: Model) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(model);
    c.sizes = vec![2, 3];
    c.temperatures = match model {
        Model::Fch => vec![0.4, 0.8],
        Model::Ich => vec![2.0, 3.0],
        Model::Sc => vec![4.0, 5.0],
    };
    c.trials = 60;
    c.batch = 25;
    c.equilibration = 20;
    c.seed = 17;
    c
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    for model in [Model::Fch, Model::Ich, Model::Sc] {
        let cfg = small(model);
        let a = in_pool(1, || run_logical_error_experiment(&cfg).unwrap());
        let b = in_pool(4, || run_logical_error_experiment(&cfg).unwrap());
        assert_eq!(result_csv(&a, &[]), result_csv(&b, &[]), "{model:?}");
    }
}

#[test]
fn run_round_trips_through_csv() {
    let table = run_logical_error_experiment(&small(Model::Ich)).unwrap();
    assert_eq!(table.rows.len(), 4);
    for r in &table.rows {
        assert!((0.0..=1.0).contains(&r.p_fail));
        assert_eq!(r.stderr, binomial_stderr(r.p_fail, r.trials));
    }
    let text = result_csv(&table, &[]);
    assert_eq!(read_result_csv(&text, Path::new("run.csv")).unwrap(), table);
}

#[test]
fn hot_failure_rate_approaches_chance_level() {
    let chance = chance_level(3, 400, 2).unwrap();
    let mut cfg = small(Model::Fch);
    cfg.sizes = vec![3];
    cfg.temperatures = vec![50.0];
    cfg.trials = 400;
    let hot = run_logical_error_experiment(&cfg).unwrap().rows[0].p_fail;
    let sigma = (binomial_stderr(chance, 400).powi(2) + binomial_stderr(hot, 400).powi(2)).sqrt();
    assert!((hot - chance).abs() < 4.0 * sigma, "{hot} vs {chance}");
    assert!(chance > 0.5, "{chance}");
}

#[test]
fn different_seeds_differ() {
    let a = run_logical_error_experiment(&small(Model::Fch)).unwrap();
    let mut cfg = small(Model::Fch);
    cfg.seed += 1;
    let b = run_logical_error_experiment(&cfg).unwrap();
    assert_ne!(a.rows, b.rows);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn binomial_formula_matches_bootstrap(trials in 200usize..1500, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let failures = (frac * trials as f64).round() as usize;
        let p = failures as f64 / trials as f64;
        let boot = bootstrap_stderr(failures, trials, 1500, seed);
        let formula = binomial_stderr(p, trials);
        prop_assert!((boot / formula - 1.0).abs() < 0.1, "{} vs {}", boot, formula);
    }
}
