mod common;

use bayesreg::adaptive::{mrse_objective, run_adaptive, run_nonadaptive, settings_grid, AdaptiveConfig, Scheme};
use bayesreg::models::{HomodynePhase, ThreePath};
use bayesreg::region::{lambda_crit, mrse_plausible};
use bayesreg::{FisherMatrix, MlOptions, ParamSpace, RegionSpec, Setting, StatisticalModel};
use common::{random_spd, rng};
use rand::Rng;

fn homodyne_config(spec: RegionSpec, seed: u64) -> AdaptiveConfig {
    AdaptiveConfig {
        steps: 4,
        total_copies: 2000,
        replicates: 5,
        grid_size: 16,
        spec,
        initial_setting: Setting::new(vec![1.837]),
        seed,
        ml: MlOptions::default(),
    }
}

#[test]
fn runs_are_reproducible_across_thread_pools() {
    let model = HomodynePhase::new(0.7).unwrap();
    let config = homodyne_config(RegionSpec::FixedC { c0: 0.95 }, 5);
    let run_in = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&run_adaptive(&model, &[1.179], &config).unwrap()).unwrap())
    };
    assert_eq!(run_in(1), run_in(3));
}

#[test]
fn run_records_have_the_expected_shape() {
    let model = HomodynePhase::new(0.7).unwrap();
    let config = homodyne_config(RegionSpec::Plausible, 6);
    let grid = settings_grid(model.setting_space(), config.grid_size).unwrap();
    let adaptive = run_adaptive(&model, &[1.179], &config).unwrap();
    let fixed = run_nonadaptive(&model, &[1.179], &config).unwrap();
    assert_eq!(adaptive.scheme, Scheme::Adaptive);
    assert_eq!(fixed.scheme, Scheme::Nonadaptive);
    for record in [&adaptive, &fixed] {
        assert_eq!(record.steps.len(), 4);
        assert_eq!(record.steps[0].setting, vec![1.837]);
        for (k, step) in record.steps.iter().enumerate() {
            assert_eq!(step.k, k + 1);
            assert!(model.param_space().contains(&step.ml));
            assert!(step.mrse_pred > 0.0);
        }
    }
    assert!(fixed.steps.iter().all(|s| s.setting == vec![1.837]));
    for step in &adaptive.steps[1..] {
        assert!(grid.iter().any(|g| g.values() == step.setting.as_slice()));
    }
    // paired seeds share the first batch
    assert_eq!(adaptive.steps[0].ml, fixed.steps[0].ml);
}

#[test]
fn fixed_credibility_objective_scales_inversely() {
    let mut rng = rng(41);
    for _ in 0..500 {
        let d = rng.random_range(1..=3);
        let f = FisherMatrix::new(random_spd(d, 50.0, &mut rng)).unwrap();
        let k = rng.random_range(1.1..100.0);
        let space = ParamSpace::unit(d).unwrap();
        let spec = RegionSpec::FixedC { c0: rng.random_range(0.1..0.99) };
        let a = mrse_objective(&spec, &f, &space);
        let b = mrse_objective(&spec, &f.scaled(k), &space);
        assert!((a / b - k).abs() < 1e-9 * k);
    }
}

#[test]
fn objectives_fall_as_information_grows() {
    let mut rng = rng(42);
    for _ in 0..500 {
        let d = rng.random_range(1..=3);
        let f = FisherMatrix::new(random_spd(d, 1e3, &mut rng)).unwrap();
        let space = ParamSpace::unit(d).unwrap();
        for spec in [RegionSpec::FixedS { s0: 0.01 }, RegionSpec::FixedC { c0: 0.9 }, RegionSpec::Plausible] {
            let a = mrse_objective(&spec, &f, &space);
            let b = mrse_objective(&spec, &f.scaled(1e3), &space);
            assert!(b < a, "{spec:?}");
        }
    }
}

#[test]
fn plausible_objective_is_the_plausible_mrse() {
    let mut rng = rng(43);
    let mut checked = 0;
    while checked < 300 {
        let d = rng.random_range(1..=3);
        let f = FisherMatrix::new(random_spd(d, 1e3, &mut rng)).unwrap();
        let space = ParamSpace::with_volume(d, rng.random_range(0.5..3.0)).unwrap();
        if lambda_crit(&f, &space).unwrap().degenerate {
            continue;
        }
        let a = mrse_objective(&RegionSpec::Plausible, &f, &space);
        let b = mrse_plausible(&f, &space).unwrap();
        assert!((a - b).abs() < 1e-10 * b);
        checked += 1;
    }
}

#[test]
fn singular_information_is_never_preferred() {
    let space = ParamSpace::unit(2).unwrap();
    let singular = FisherMatrix::diagonal(&[1.0, 0.0]);
    for spec in [RegionSpec::FixedS { s0: 0.1 }, RegionSpec::FixedC { c0: 0.9 }, RegionSpec::Plausible] {
        assert_eq!(mrse_objective(&spec, &singular, &space), f64::INFINITY);
    }
}

#[test]
fn three_path_adaptive_run_stays_in_bounds() {
    let model = ThreePath::new();
    let config = AdaptiveConfig {
        steps: 3,
        total_copies: 1500,
        replicates: 3,
        grid_size: 64,
        spec: RegionSpec::FixedC { c0: 0.9 },
        initial_setting: Setting::new(vec![0.0, 0.0]),
        seed: 7,
        ml: MlOptions {
            grid_points: 41,
            ..MlOptions::default()
        },
    };
    let record = run_adaptive(&model, &[0.5, 1.0], &config).unwrap();
    assert_eq!(record.steps.len(), 3);
    for step in &record.steps {
        assert!(model.setting_space().contains(&step.setting));
        assert!(model.param_space().contains(&step.ml));
    }
    let last = record.last();
    assert!(last.mrse_true.unwrap() < record.steps[0].mrse_true.unwrap());
}
