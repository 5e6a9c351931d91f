use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use voxskel_bench::ball;
use voxskel_core::diff::{skeletonize_diff, GradientTape, NoiseParams};
use voxskel_core::{
    boolean_simple_mask, skeletonize, Detector, Iterations, PeelConfig, ProbabilityVolume,
};

fn peel(c: &mut Criterion) {
    let mut g = c.benchmark_group("skeletonize");
    g.sample_size(10);
    for r in [8, 16, 24] {
        let v = ball(r);
        for detector in [Detector::Boolean, Detector::Euler] {
            let cfg = PeelConfig::new(detector, Iterations::UntilStable);
            g.bench_with_input(BenchmarkId::new(detector.name(), r), &v, |b, v| {
                b.iter(|| skeletonize(black_box(v), &cfg))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    let v = ball(12);
    g.bench_function("boolean_mask_r12", |b| {
        b.iter(|| boolean_simple_mask(black_box(&v)))
    });
    let p = ProbabilityVolume::from_binary_soft(&ball(6), 0.2, 0.8).unwrap();
    let cfg = PeelConfig::new(Detector::Boolean, Iterations::Fixed(1));
    g.bench_function("diff_forward_backward_r6", |b| {
        b.iter(|| {
            let mut tape = GradientTape::new(p.shape().padded(1));
            let d = skeletonize_diff(&mut tape, &p, &cfg, &NoiseParams::default()).unwrap();
            let ones = vec![1.0; p.shape().len()];
            d.input_gradient(&tape, &ones).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, peel);
criterion_main!(benches);
