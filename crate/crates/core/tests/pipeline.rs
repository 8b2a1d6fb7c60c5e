use chansense::{
    estimate_reporting_channel, generate_dense_channel, generate_sparse_channel, indirect_ls,
    indirect_sparse, make_training_signal, run_experiment, simulate_link, simulate_probe,
    EstimatorKind, ExperimentConfig, LinkSetup, LsConfig, MatrixModes, Metric, NoiseLevel,
    NoiseSpec, ScalarField, SparseStageConfig, TrainingScheme,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn small(seed: u64, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_taps: 40,
        training_len: 25,
        sparse_k: 6,
        head_region: 5,
        head_count: 4,
        trials,
        master_seed: seed,
        ..ExperimentConfig::default()
    }
}

#[test]
fn complex_field_link_round_trips_without_noise() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let h1 = generate_sparse_channel(30, 4, 5, 2, &mut rng).unwrap();
    let h3 = chansense::channel_model::generate_dense_channel_with(
        30,
        0.1,
        ScalarField::Complex,
        chansense::PowerNormalization::Realized,
        &mut rng,
    )
    .unwrap();
    let x =
        make_training_signal(20, TrainingScheme::Bpsk, Some(&mut rng as &mut dyn RngCore)).unwrap();
    let setup = LinkSetup {
        relay_gain: 2.5,
        field: ScalarField::Complex,
        ..LinkSetup::default()
    };
    let obs = simulate_link(&x, &h1, None, &h3, &setup, &mut rng).unwrap();
    let est = indirect_ls(
        &obs.z,
        &x,
        &h3,
        MatrixModes::default(),
        &LsConfig::default(),
        2.5,
    )
    .unwrap();
    assert!((&est.h_hat - h1.taps()).norm() < 1e-9);
    let sparse = indirect_sparse(
        &obs.z,
        &x,
        &h3,
        MatrixModes::default(),
        &LsConfig::default(),
        &SparseStageConfig::default(),
        2.5,
    )
    .unwrap();
    assert!((&sparse.h_hat - h1.taps()).norm() < 1e-6);
}

#[test]
fn estimated_relay_channel_feeds_the_estimator() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let h1 = generate_sparse_channel(40, 6, 5, 4, &mut rng).unwrap();
    let h3 = generate_dense_channel(40, 0.05, &mut rng).unwrap();
    let x =
        make_training_signal(25, TrainingScheme::Bpsk, Some(&mut rng as &mut dyn RngCore)).unwrap();
    let setup = LinkSetup {
        noise: NoiseSpec::uniform(NoiseLevel::SnrDb(30.0)),
        ..LinkSetup::default()
    };
    let obs = simulate_link(&x, &h1, None, &h3, &setup, &mut rng).unwrap();
    let probe = make_training_signal(
        200,
        TrainingScheme::Bpsk,
        Some(&mut rng as &mut dyn RngCore),
    )
    .unwrap();
    let back = simulate_probe(
        &probe,
        &h3,
        NoiseLevel::SnrDb(30.0),
        ScalarField::Real,
        &mut rng,
    )
    .unwrap();
    let h3_hat = estimate_reporting_channel(&probe, &back, 40, &LsConfig::default()).unwrap();
    assert!((h3_hat.taps() - h3.taps()).norm() < 0.1);
    let est = indirect_ls(
        &obs.z,
        &x,
        &h3_hat,
        MatrixModes::default(),
        &LsConfig::default(),
        1.0,
    )
    .unwrap();
    assert!((&est.h_hat - h1.taps()).norm() / h1.taps().norm() < 0.5);
}

#[test]
fn sparse_beats_ls_on_a_small_experiment() {
    let res = run_experiment(&small(3, 60)).unwrap();
    for metric in Metric::ALL {
        assert!(
            res.median(EstimatorKind::IndirectSparseIrls, metric)
                < res.median(EstimatorKind::IndirectLs, metric),
            "{metric}"
        );
    }
}

#[test]
fn higher_snr_lowers_every_median() {
    let lo = run_experiment(&small(4, 40)).unwrap();
    let hi_cfg = ExperimentConfig {
        snr1_db: NoiseLevel::SnrDb(20.0),
        snr2_db: NoiseLevel::SnrDb(20.0),
        snr3_db: NoiseLevel::SnrDb(20.0),
        ..small(4, 40)
    };
    let hi = run_experiment(&hi_cfg).unwrap();
    for s in &lo.summary {
        assert!(hi.median(s.estimator, s.metric) < s.median);
    }
}

#[test]
fn l1_estimator_runs_in_experiments() {
    let cfg = ExperimentConfig {
        estimators: vec![EstimatorKind::IndirectSparseL1],
        ..small(5, 10)
    };
    let res = run_experiment(&cfg).unwrap();
    let s = res
        .summary_for(EstimatorKind::IndirectSparseL1, Metric::Overall)
        .unwrap();
    assert_eq!((s.included, s.failed), (10, 0));
    assert!(s.median.is_finite());
}

#[test]
fn ramp_training_is_identical_across_trials() {
    let cfg = ExperimentConfig {
        training_scheme: TrainingScheme::Ramp,
        ..small(6, 2)
    };
    let a = chansense::experiment::draw_trial(&cfg, 0).unwrap();
    let b = chansense::experiment::draw_trial(&cfg, 1).unwrap();
    assert_eq!(a.x, b.x);
    assert_ne!(a.h1.taps(), b.h1.taps());
    let bpsk = small(6, 2);
    let c = chansense::experiment::draw_trial(&bpsk, 0).unwrap();
    let d = chansense::experiment::draw_trial(&bpsk, 1).unwrap();
    assert_ne!(c.x, d.x);
}
