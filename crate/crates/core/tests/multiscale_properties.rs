use mixdenoise::imgcore::add_gaussian_noise;
use mixdenoise::multiscale::{CountingDenoiser, IdentityDenoiser, Method};
use mixdenoise::{Image, MsConfig, NoiseSpec, Result};
use proptest::prelude::*;

struct Shrink;

impl mixdenoise::Denoiser for Shrink {
    fn denoise(&self, img: &Image, _sigma: f64) -> Result<Image> {
        let m = img.mean();
        Ok(img.map(|v| m + 0.8 * (v - m)))
    }
    fn name(&self) -> String {
        "shrink".into()
    }
}

fn image() -> impl Strategy<Value = Image> {
    (16usize..=48, 16usize..=48).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0..255.0f64, w * h).prop_map(move |d| Image::new(w, h, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_is_a_fixpoint(img in image(), j in 1usize..=3, k in 1usize..=3) {
        let cfg = MsConfig::with_scales(j, k);
        for m in Method::ALL {
            let out = m.run(&img, 25.0, &cfg, &IdentityDenoiser).unwrap();
            prop_assert!(out.relative_max_diff(&img).unwrap() < 1e-8, "{m}");
        }
    }

    #[test]
    fn constants_are_fixed(v in 0.0..255.0f64, j in 1usize..=3) {
        let img = Image::filled(24, 20, v);
        let cfg = MsConfig::with_scales(j, j);
        for m in Method::ALL {
            let out = m.run(&img, 25.0, &cfg, &Shrink).unwrap();
            prop_assert!(out.max_abs_diff(&img).unwrap() < 1e-6, "{m}");
        }
    }

    #[test]
    fn call_counts(img in image(), j in 1usize..=3) {
        let cfg = MsConfig::with_scales(j, j);
        let c = CountingDenoiser::new(Shrink);
        Method::Mtld.run(&img, 10.0, &cfg, &c).unwrap();
        prop_assert_eq!(c.calls(), 3 * j + 1);
        c.reset();
        Method::Fmmtld.run(&img, 10.0, &cfg, &c).unwrap();
        prop_assert!(c.calls() <= 2 * j);
    }
}

#[test]
fn higher_versions_reduce_to_first() {
    let clean = Image::from_fn(40, 36, |r, c| 120.0 + 60.0 * ((r * c) as f64 * 0.01).sin());
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(20.0, 4).unwrap()).unwrap();
    let cfg = MsConfig::with_scales(1, 1);
    let a = Method::Mmtld.run(&noisy, 20.0, &cfg, &Shrink).unwrap();
    let b = Method::Mmtld1.run(&noisy, 20.0, &cfg, &Shrink).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
    let a = Method::Fmmtld.run(&noisy, 20.0, &cfg, &Shrink).unwrap();
    let b = Method::Fmmtld1.run(&noisy, 20.0, &cfg, &Shrink).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
}
