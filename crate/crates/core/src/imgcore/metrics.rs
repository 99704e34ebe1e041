use super::Image;
use crate::error::{Error, Result};

/// Side of the SSIM Gaussian window.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Quality and cost record for one denoising run.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub method: String,
    /// dB; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssim: f64,
    /// Wall-clock seconds of the denoise call.
    pub runtime: f64,
}

impl DenoiseReport {
    pub fn measure(
        method: impl Into<String>,
        reference: &Image,
        output: &Image,
        runtime: f64,
    ) -> Result<Self> {
        Ok(Self {
            method: method.into(),
            psnr: psnr(reference, output)?,
            ssim: ssim(reference, output)?,
            runtime: runtime.max(0.0),
        })
    }
}

pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    reference.ensure_same_dims(test)?;
    let sum: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.data().len() as f64)
}

/// `10 log10(peak^2 / MSE)` using the reference image's peak. Identical
/// images give `+inf`.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    let m = mse(reference, test)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = reference.peak();
    Ok(10.0 * (peak * peak / m).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable 'valid' filtering of a row-major plane.
fn filter_valid(src: &[f64], width: usize, height: usize, win: &[f64]) -> Vec<f64> {
    let k = win.len();
    let ow = width - k + 1;
    let oh = height - k + 1;
    let mut tmp = vec![0.0; ow * height];
    for r in 0..height {
        let row = &src[r * width..(r + 1) * width];
        for c in 0..ow {
            tmp[r * ow + c] = win.iter().zip(&row[c..c + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            let mut s = 0.0;
            for (i, wv) in win.iter().enumerate() {
                s += wv * tmp[(r + i) * ow + c];
            }
            out[r * ow + c] = s;
        }
    }
    out
}

/// Mean structural similarity over all fully contained 11x11 Gaussian
/// windows (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range = reference peak).
pub fn ssim(reference: &Image, test: &Image) -> Result<f64> {
    reference.ensure_same_dims(test)?;
    let (w, h) = reference.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let win = gaussian_window();
    let x = reference.data();
    let y = test.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &win);
    let mu_y = filter_valid(y, w, h, &win);
    let e_xx = filter_valid(&xx, w, h, &win);
    let e_yy = filter_valid(&yy, w, h, &win);
    let e_xy = filter_valid(&xy, w, h, &win);

    let l = reference.peak();
    let c1 = (SSIM_K1 * l).powi(2);
    let c2 = (SSIM_K2 * l).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
            / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::{add_gaussian_noise, NoiseSpec};

    /// Direct 2-D window evaluation with explicit means and central moments.
    #[allow(clippy::needless_range_loop)]
    fn ssim_oracle(a: &Image, b: &Image) -> f64 {
        let k = SSIM_WINDOW;
        let s = SSIM_SIGMA;
        let mut win = vec![vec![0.0; k]; k];
        let mut total_w = 0.0;
        for (i, row) in win.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let di = i as f64 - 5.0;
                let dj = j as f64 - 5.0;
                *v = (-(di * di + dj * dj) / (2.0 * s * s)).exp();
                total_w += *v;
            }
        }
        let c1 = (0.01f64 * 255.0).powi(2);
        let c2 = (0.03f64 * 255.0).powi(2);
        let (w, h) = a.dims();
        let mut acc = 0.0;
        let mut count = 0usize;
        for r in 0..=h - k {
            for c in 0..=w - k {
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..k {
                    for j in 0..k {
                        let g = win[i][j] / total_w;
                        ma += g * a.get(r + i, c + j);
                        mb += g * b.get(r + i, c + j);
                    }
                }
                let (mut va, mut vb, mut cab) = (0.0, 0.0, 0.0);
                for i in 0..k {
                    for j in 0..k {
                        let g = win[i][j] / total_w;
                        let da = a.get(r + i, c + j) - ma;
                        let db = b.get(r + i, c + j) - mb;
                        va += g * da * da;
                        vb += g * db * db;
                        cab += g * da * db;
                    }
                }
                acc += ((2.0 * ma * mb + c1) * (2.0 * cab + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn psnr_known_values() {
        let a = Image::zeros(4, 4);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = Image::filled(4, 4, 1.0);
        // 10 log10(255^2)
        assert!((psnr(&a, &b).unwrap() - 48.130_803_608_679_1).abs() < 1e-9);
        let white = Image::filled(4, 4, 255.0);
        assert!(psnr(&a, &white).unwrap().abs() < 1e-12);
        assert!(psnr(&a, &Image::zeros(4, 5)).is_err());
    }

    #[test]
    fn psnr_is_symmetric() {
        let a = Image::from_fn(9, 7, |r, c| (r * 13 + c * 5) as f64);
        let b = Image::from_fn(9, 7, |r, c| (r * 11 + c * 3) as f64);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn ssim_of_identical_images_is_one() {
        let a = Image::from_fn(20, 17, |r, c| ((r * 37 + c * 11) % 200) as f64);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let flat = Image::filled(16, 16, 128.0);
        assert!((ssim(&flat, &flat).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_rejects_small_or_mismatched() {
        let a = Image::zeros(10, 20);
        assert!(matches!(ssim(&a, &a), Err(Error::Dimension(_))));
        assert!(ssim(&Image::zeros(12, 12), &Image::zeros(13, 12)).is_err());
    }

    #[test]
    fn ssim_matches_loop_oracle_on_noisy_ramp() {
        let ramp = Image::from_fn(64, 64, |r, c| 2.0 * c as f64 + r as f64);
        let noisy = add_gaussian_noise(&ramp, NoiseSpec::new(25.0, 2024).unwrap()).unwrap();
        let fast = ssim(&ramp, &noisy).unwrap();
        let slow = ssim_oracle(&ramp, &noisy);
        assert!(fast > 0.0 && fast < 1.0);
        assert!((fast - slow).abs() < 1e-6, "{fast} vs {slow}");
    }
}
