//! Criterion suite for the data-parallel inner loops. Benchmark ids carry the
//! iteration mode, so running once with the default features and once with
//! `--no-default-features` produces a par/seq comparison in the same report:
//!
//! ```sh
//! cargo bench -p fockmix
//! cargo bench -p fockmix --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fockmix::detection::{monte_carlo_clicks, similarity_sweep, BetaSchedule, DetectorConfig};
use fockmix::metrics::fidelity_curve;
use fockmix::nonlocality::{j3, j3_curve_state, j3_extremize, CurveSource, Direction, J3Params, OptimizerSettings};
use fockmix::optics::{beam_splitter, mix_cs_sv, BeamSplitterSpec, CutoffSpec};
use fockmix::states::{coherent, squeezed_vacuum, CoherentParams, SqueezeParams};
use fockmix::Complex64;

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "par"
    } else {
        "seq"
    }
}

fn bench_beam_splitter(c: &mut Criterion) {
    let mut group = c.benchmark_group("beam_splitter");
    for cutoff in [30usize, 60] {
        let coh = coherent(&CoherentParams { magnitude: 0.75, phase: 0.0 }, cutoff);
        let sv = squeezed_vacuum(&SqueezeParams { r: 0.3, theta: 0.0 }, cutoff);
        let input = coh.tensor(&sv).unwrap();
        group.bench_with_input(
            BenchmarkId::new(format!("cutoff{cutoff}"), mode()),
            &input,
            |b, input| b.iter(|| beam_splitter(input, &BeamSplitterSpec::balanced())),
        );
    }
    group.finish();
}

fn bench_j3(c: &mut Criterion) {
    let state = j3_curve_state(0.5, CurveSource::Mixed, CutoffSpec::Fixed(30)).unwrap();

    let params = J3Params {
        alpha: Complex64::new(0.4, 0.1),
        beta: Complex64::new(-0.2, 0.3),
        gamma: Complex64::new(0.1, -0.5),
        delta: Complex64::new(0.6, 0.2),
    };
    c.bench_with_input(BenchmarkId::new("j3_eval", mode()), &state, |b, s| {
        b.iter(|| j3(s, &params))
    });

    let settings = OptimizerSettings { restarts: 16, max_iters: 400, ..Default::default() };
    c.bench_with_input(BenchmarkId::new("j3_extremize_r16", mode()), &state, |b, s| {
        b.iter(|| j3_extremize(s, Direction::Min, &settings))
    });
}

fn bench_mix_pipeline(c: &mut Criterion) {
    c.bench_function(&format!("mix_cs_sv_adaptive/{}", mode()), |b| {
        b.iter(|| {
            mix_cs_sv(
                &CoherentParams { magnitude: 0.6, phase: 0.0 },
                &SqueezeParams { r: 0.33, theta: std::f64::consts::PI },
                CutoffSpec::Adaptive { tail_tol: 1e-10 },
            )
            .unwrap()
        })
    });
}

fn bench_fidelity_curve(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=150).map(|k| 0.02 * k as f64).collect();
    c.bench_function(&format!("fidelity_curve_151pts/{}", mode()), |b| {
        b.iter(|| fidelity_curve(&grid, 0.0, 30))
    });
}

fn bench_monte_carlo(c: &mut Criterion) {
    let weights = vec![1.0 / 8.0; 8];
    c.bench_function(&format!("monte_carlo_clicks_200k/{}", mode()), |b| {
        b.iter(|| monte_carlo_clicks(5, &weights, 200_000, 11))
    });
}

fn bench_similarity_sweep(c: &mut Criterion) {
    let cfg = DetectorConfig::default();
    let grid: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
    c.bench_function(&format!("similarity_sweep_11pts/{}", mode()), |b| {
        b.iter(|| {
            similarity_sweep(&grid, BetaSchedule::default(), &cfg, CutoffSpec::Fixed(24)).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_beam_splitter,
    bench_j3,
    bench_mix_pipeline,
    bench_fidelity_curve,
    bench_monte_carlo,
    bench_similarity_sweep
);
criterion_main!(benches);
