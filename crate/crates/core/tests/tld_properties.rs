use mixdenoise::tld::{
    objective_gradient, sparse_code, tld_denoise, tld_denoise_detailed, transform_update,
    variable_sparsity_update,
};
use mixdenoise::{Image, TldConfig, Transform};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(n: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-50.0..50.0f64, n * cols).prop_map(move |d| DMatrix::from_vec(n, cols, d))
}

fn well_conditioned(n: usize) -> impl Strategy<Value = Transform> {
    prop::collection::vec(-0.3..0.3f64, n * n).prop_map(move |d| {
        let m = DMatrix::identity(n, n) + DMatrix::from_vec(n, n, d) / n as f64;
        Transform::new(m).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn full_sparsity_reproduces_patches(
        (w, y) in (2usize..=5).prop_flat_map(|n| (well_conditioned(n), matrix(n, 12)))
    ) {
        let n = w.dim();
        let x = sparse_code(&w, &y, &[n]).unwrap().to_dense();
        let back = w.inverse().unwrap() * x;
        prop_assert!((back - &y).amax() < 1e-9);
    }

    #[test]
    fn support_sizes_respect_the_level(
        (w, y, l) in (2usize..=5).prop_flat_map(|n| (well_conditioned(n), matrix(n, 9), 1..=n))
    ) {
        let codes = sparse_code(&w, &y, &[l]).unwrap();
        prop_assert!(codes.support_sizes().iter().all(|&s| s <= l));
    }

    #[test]
    fn vsu_residual_bound(
        (w, y) in (2usize..=5).prop_flat_map(|n| (well_conditioned(n), matrix(n, 10))),
        sigma in 0.5..20.0f64,
        c in 0.5..1.5f64,
    ) {
        let n = w.dim();
        let (u, codes) = variable_sparsity_update(&w, &y, sigma, c).unwrap();
        let bound = n as f64 * c * c * sigma * sigma;
        for (i, &l) in codes.support_sizes().iter().enumerate() {
            let r = (y.column(i) - u.column(i)).norm_squared();
            if l < n {
                prop_assert!(r <= bound * (1.0 + 1e-12) + 1e-12, "{r} > {bound}");
            }
        }
    }

    #[test]
    fn closed_form_update_is_stationary(
        (y, x) in (2usize..=4).prop_flat_map(|n| (matrix(n, 20), matrix(n, 20))),
        lambda in 0.1..100.0f64,
        mu in 0.1..3.0f64,
    ) {
        let n = y.nrows();
        let w0 = Transform::identity(n);
        let codes = sparse_code(&w0, &x, &[n]).unwrap();
        let w = transform_update(&y, &codes, lambda, mu).unwrap();
        let g = objective_gradient(&w, &y, &codes, lambda, mu).unwrap();
        let scale = (y.norm_squared() + lambda).max(1.0);
        prop_assert!(g.amax() < 1e-8 * scale, "{}", g.amax());
    }
}

fn texture(w: usize, h: usize, k: f64) -> Image {
    Image::from_fn(w, h, |r, c| {
        let (r, c) = (r as f64, c as f64);
        128.0 + 70.0 * (r * 0.3 * k).sin() * (c * 0.21).cos() + 20.0 * ((r + 2.0 * c) * 0.9).sin()
    })
}

#[test]
fn objective_never_increases_on_varied_images() {
    let cfg = TldConfig { p: 5, iters: 6, ..TldConfig::default() };
    for k in 1..=3 {
        let out = tld_denoise_detailed(&texture(36, 30, k as f64), 15.0, &cfg).unwrap();
        for pair in out.objective_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs());
        }
    }
}

#[test]
fn offset_equivariance_on_integer_images() {
    let img = texture(30, 26, 1.0).map(f64::round);
    let cfg = TldConfig { p: 4, iters: 3, deterministic: true, ..TldConfig::default() };
    let a = tld_denoise(&img, 20.0, &cfg).unwrap();
    let b = tld_denoise(&img.map(|v| v - 64.0), 20.0, &cfg).unwrap();
    assert!(a.max_abs_diff(&b.map(|v| v + 64.0)).unwrap() < 1e-9);
}

#[test]
fn denoising_improves_psnr() {
    use mixdenoise::imgcore::{add_gaussian_noise, psnr};
    let clean = texture(64, 64, 1.0);
    let noisy = add_gaussian_noise(&clean, mixdenoise::NoiseSpec::new(25.0, 3).unwrap()).unwrap();
    let cfg = TldConfig { p: 6, iters: 4, ..TldConfig::default() };
    let out = tld_denoise(&noisy, 25.0, &cfg).unwrap();
    assert!(psnr(&clean, &out).unwrap() > psnr(&clean, &noisy).unwrap() + 3.0);
}
