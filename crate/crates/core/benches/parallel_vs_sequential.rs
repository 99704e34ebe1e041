use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixdenoise::imgcore::add_gaussian_noise;
use mixdenoise::multiscale::Method;
use mixdenoise::tld::{sparse_code_with, tld_denoise, variable_sparsity_update_with};
use mixdenoise::wavelets::{forward, inverse};
use mixdenoise::{Exec, Image, MsConfig, NoiseSpec, SubbandKind, TldConfig, TldDenoiser, Transform};
use nalgebra::DMatrix;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn scene(side: usize) -> Image {
    let clean = Image::from_fn(side, side, |r, c| {
        let (r, c) = (r as f64, c as f64);
        128.0 + 60.0 * (r * 0.05).sin() * (c * 0.08).cos() + 40.0 * ((r + c) * 0.3).sin()
    });
    add_gaussian_noise(&clean, NoiseSpec::new(25.0, 1).unwrap()).unwrap()
}

fn patches(n: usize, count: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, count, |i, j| (((i * 7919 + j * 104_729) % 1000) as f64 - 500.0) / 10.0)
}

fn wavelets(c: &mut Criterion) {
    let img = scene(512);
    let mut g = c.benchmark_group("wavelets_512");
    for kind in [SubbandKind::Dwt, SubbandKind::Iuwt] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(format!("{}_round_trip", kind.name()), name), &exec, |b, &e| {
                b.iter(|| inverse(&forward(kind, &img, 3, e).unwrap(), e).unwrap())
            });
        }
    }
    g.finish();
}

fn coding(c: &mut Criterion) {
    let y = patches(121, 20_000);
    let w = Transform::dct(11);
    let mut g = c.benchmark_group("coding_121x20000");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("sparse_code", name), &exec, |b, &e| {
            b.iter(|| sparse_code_with(&w, &y, &[12], e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("variable_sparsity", name), &exec, |b, &e| {
            b.iter(|| variable_sparsity_update_with(&w, &y, 25.0, 1.04, e).unwrap())
        });
    }
    g.finish();
}

fn denoising(c: &mut Criterion) {
    let img = scene(128);
    let mut g = c.benchmark_group("denoise_128");
    for (name, exec) in MODES {
        let deterministic = exec == Exec::Sequential;
        let cfg = TldConfig { iters: 4, deterministic, ..TldConfig::default() };
        g.bench_with_input(BenchmarkId::new("tld", name), &cfg, |b, cfg| {
            b.iter(|| tld_denoise(&img, 25.0, cfg).unwrap())
        });
        let ms = MsConfig { deterministic, ..MsConfig::default() };
        let d = TldDenoiser::new(cfg.clone());
        g.bench_with_input(BenchmarkId::new("mtld", name), &ms, |b, ms| {
            b.iter(|| Method::Mtld.run(&img, 25.0, ms, &d).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = wavelets, coding, denoising
}
criterion_main!(benches);
