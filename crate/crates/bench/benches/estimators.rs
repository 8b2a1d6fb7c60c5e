use chansense::{
    generate_dense_channel, generate_sparse_channel, indirect_ls, indirect_sparse,
    irls_sparse_solve, l1_sparse_solve, make_training_signal, simulate_link, ConvolutionMatrix,
    LinkSetup, LsConfig, MatrixMode, MatrixModes, NoiseLevel, NoiseSpec, SparseSolverConfig,
    SparseStageConfig, TrainingScheme,
};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

// Reference-sized link: N=100 taps, M=50 training symbols, K=15, 10 dB.
fn reference_link() -> (
    chansense::CVector,
    chansense::TrainingSignal,
    chansense::ChannelImpulseResponse,
) {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let h1 = generate_sparse_channel(100, 15, 10, 10, &mut rng).unwrap();
    let h3 = generate_dense_channel(100, 0.05, &mut rng).unwrap();
    let x =
        make_training_signal(50, TrainingScheme::Bpsk, Some(&mut rng as &mut dyn RngCore)).unwrap();
    let setup = LinkSetup {
        noise: NoiseSpec::uniform(NoiseLevel::SnrDb(10.0)),
        ..LinkSetup::default()
    };
    let obs = simulate_link(&x, &h1, None, &h3, &setup, &mut rng).unwrap();
    (obs.z, x, h3)
}

fn bench_pipeline(c: &mut Criterion) {
    let (z, x, h3) = reference_link();
    let modes = MatrixModes::default();
    let ls = LsConfig::default();
    c.bench_function("indirect_ls/n100_m50", |b| {
        b.iter(|| indirect_ls(&z, &x, &h3, modes, &ls, 1.0).unwrap())
    });
    c.bench_function("indirect_sparse_irls/n100_m50", |b| {
        b.iter(|| {
            indirect_sparse(&z, &x, &h3, modes, &ls, &SparseStageConfig::default(), 1.0).unwrap()
        })
    });
}

fn bench_solvers(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let x =
        make_training_signal(50, TrainingScheme::Bpsk, Some(&mut rng as &mut dyn RngCore)).unwrap();
    let a = ConvolutionMatrix::new(x.samples().clone(), 100, MatrixMode::Full)
        .unwrap()
        .to_dense();
    let h = generate_sparse_channel(100, 15, 10, 10, &mut rng).unwrap();
    let b = &a * h.taps();
    let cfg = SparseSolverConfig {
        lambda: 0.5,
        ..SparseSolverConfig::default()
    };
    c.bench_function("irls_sparse_solve/149x100", |bch| {
        bch.iter(|| irls_sparse_solve(&a, &b, &cfg).unwrap())
    });
    c.bench_function("l1_sparse_solve/149x100", |bch| {
        bch.iter(|| l1_sparse_solve(&a, &b, 0.5, 2000, 1e-6).unwrap())
    });
    c.bench_function("ls_solve/149x100", |bch| {
        bch.iter(|| chansense::ls_solve(&a, &b, &LsConfig::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_pipeline, bench_solvers
}
criterion_main!(benches);
