use mixdenoise::imgcore::{
    add_gaussian_noise, aggregate_patches, extract_patches, psnr, read_image, ssim, write_image,
};
use mixdenoise::{Image, NoiseSpec};
use proptest::prelude::*;

fn image() -> impl Strategy<Value = Image> {
    sized(4)
}

fn sized(min: usize) -> impl Strategy<Value = Image> {
    (min..=24, min..=24).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0..255.0f64, w * h).prop_map(move |d| Image::new(w, h, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn patch_round_trip(img in image(), p in 1usize..=4) {
        let pm = extract_patches(&img, p).unwrap();
        let (w, h) = img.dims();
        let back = aggregate_patches(&pm, pm.columns(), w, h).unwrap();
        prop_assert!(back.max_abs_diff(&img).unwrap() < 1e-10);
    }

    #[test]
    fn psnr_is_symmetric(a in image(), shift in -20.0..20.0f64) {
        let b = a.map(|v| v + shift * (v / 255.0));
        let (x, y) = (psnr(&a, &b).unwrap(), psnr(&b.clone().with_peak(255.0), &a).unwrap());
        prop_assert!(x == y || (x - y).abs() < 1e-12);
    }

    #[test]
    fn ssim_of_self_is_one(a in sized(mixdenoise::imgcore::SSIM_WINDOW)) {
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_is_a_pure_function(a in image(), sigma in 0.0..60.0f64, seed in any::<u64>()) {
        let spec = NoiseSpec::new(sigma, seed).unwrap();
        prop_assert_eq!(add_gaussian_noise(&a, spec).unwrap(), add_gaussian_noise(&a, spec).unwrap());
    }
}

#[test]
fn noise_statistics() {
    let img = Image::filled(256, 256, 100.0);
    let noisy = add_gaussian_noise(&img, NoiseSpec::new(25.0, 11).unwrap()).unwrap();
    let n = noisy.data().len() as f64;
    let mean = noisy.data().iter().sum::<f64>() / n;
    let var = noisy.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!((mean - 100.0).abs() < 0.3, "{mean}");
    assert!((var.sqrt() - 25.0).abs() < 0.3, "{}", var.sqrt());
}

#[test]
fn png_and_pgm_round_trip_8_bit_values() {
    let dir = tempfile::tempdir().unwrap();
    let img = Image::from_fn(13, 7, |r, c| ((r * 13 + c) * 3 % 256) as f64);
    for name in ["a.png", "a.pgm"] {
        let path = dir.path().join(name);
        write_image(&img, &path).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
    }
}
