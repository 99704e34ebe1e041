//! Multiscale compositions over any single-scale [`Denoiser`].
//!
//! * [`mtld`]: denoise every subband of a J-scale decomposition.
//! * [`mmtld1`] / [`mmtld`]: mix the approximation of the multiscale result
//!   with the details of the single-scale result, in one pass or over all
//!   mixing scales.
//! * [`fmmtld1`] / [`fmmtld`]: denoise only low-pass planes and take every
//!   detail subband from a denoised finer level.

mod denoisers;

pub use denoisers::{CallRecord, CountingDenoiser, IdentityDenoiser, MemoDenoiser};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::par::{self, Exec};
use crate::wavelets::{self, mix_subbands, SubbandKind};

/// A single-scale denoiser.
///
/// Implementations must be pure: equal inputs give equal outputs, and the
/// output has the input's dimensions. Inputs may be signed detail planes.
pub trait Denoiser: Sync {
    fn denoise(&self, img: &Image, sigma: f64) -> Result<Image>;
    fn name(&self) -> String;
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn denoise(&self, img: &Image, sigma: f64) -> Result<Image> {
        (**self).denoise(img, sigma)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Noise level used for each subband.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SigmaRule {
    /// The image noise level for every subband.
    #[default]
    Same,
    /// The image noise level times a constant factor.
    Scaled(f64),
}

impl SigmaRule {
    pub fn apply(self, sigma: f64) -> f64 {
        match self {
            SigmaRule::Same => sigma,
            SigmaRule::Scaled(f) => sigma * f,
        }
    }
}

/// Parameters shared by the compositions.
#[derive(Debug, Clone, PartialEq)]
pub struct MsConfig {
    /// Denoising-stage scales `J`.
    pub scales: usize,
    /// Mixing-stage scales `K`.
    pub mix_scales: usize,
    /// Transform of the denoising stage (and of both FMMTLD stages).
    pub denoise_bank: SubbandKind,
    /// Transform of the MMTLD mixing stage.
    pub mix_bank: SubbandKind,
    pub sigma_rule: SigmaRule,
    /// FMMTLD-2 denoises both pyramid levels in every pass, including levels
    /// that are already the output of an earlier pass.
    pub literal_fmmtld: bool,
    /// Single-threaded transforms and subband loops.
    pub deterministic: bool,
}

impl Default for MsConfig {
    fn default() -> Self {
        Self {
            scales: 1,
            mix_scales: 1,
            denoise_bank: SubbandKind::Dwt,
            mix_bank: SubbandKind::Iuwt,
            sigma_rule: SigmaRule::Same,
            literal_fmmtld: false,
            deterministic: false,
        }
    }
}

impl MsConfig {
    pub fn with_scales(scales: usize, mix_scales: usize) -> Self {
        Self {
            scales,
            mix_scales,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.mix_scales == 0 {
            return Err(Error::Config(format!(
                "scales must be >= 1, got J = {} and K = {}",
                self.scales, self.mix_scales
            )));
        }
        if let SigmaRule::Scaled(f) = self.sigma_rule {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::Config(format!("sigma factor must be >= 0, got {f}")));
            }
        }
        Ok(())
    }

    fn exec(&self) -> Exec {
        Exec::from_deterministic(self.deterministic)
    }

    pub fn describe(&self) -> String {
        let rule = match self.sigma_rule {
            SigmaRule::Same => "same".to_string(),
            SigmaRule::Scaled(f) => format!("x{f}"),
        };
        format!(
            "J={} K={} wt={} wtx={} sigma={} literal_fmmtld={}",
            self.scales,
            self.mix_scales,
            self.denoise_bank.name(),
            self.mix_bank.name(),
            rule,
            self.literal_fmmtld
        )
    }
}

/// Denoises every subband of a J-scale decomposition and inverts it.
pub fn mtld(img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
    cfg.validate()?;
    let exec = cfg.exec();
    let sb = wavelets::forward(cfg.denoise_bank, img, cfg.scales, exec)?;
    let planes: Vec<&Image> = sb.planes().collect();
    let sigma_s = cfg.sigma_rule.apply(sigma);
    let denoised = par::map_indexed(planes.len(), exec, |i| d.denoise(planes[i], sigma_s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    wavelets::inverse(&sb.with_planes(denoised)?, exec)
}

/// One mixing pass: approximation of `approx_from`, details of `details_from`.
fn mix_once(
    details_from: &Image,
    approx_from: &Image,
    kind: SubbandKind,
    scales: usize,
    exec: Exec,
) -> Result<Image> {
    let s = wavelets::forward(kind, details_from, scales, exec)?;
    let m = wavelets::forward(kind, approx_from, scales, exec)?;
    wavelets::inverse(&mix_subbands(&m, &s)?, exec)
}

/// Single-pass mixing at `K` scales of the single-scale and MTLD results.
pub fn mmtld1(img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
    cfg.validate()?;
    let single = d.denoise(img, sigma)?;
    let multi = mtld(img, sigma, cfg, d)?;
    mix_once(&single, &multi, cfg.mix_bank, cfg.mix_scales, cfg.exec())
}

/// Mixing repeated for `k = K, K-1, ..., 1`, each pass taking the details of
/// the previous result and the approximation of the MTLD result.
pub fn mmtld(img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
    cfg.validate()?;
    let single = d.denoise(img, sigma)?;
    let multi = mtld(img, sigma, cfg, d)?;
    let mut temp = single;
    for k in (1..=cfg.mix_scales).rev() {
        temp = mix_once(&temp, &multi, cfg.mix_bank, k, cfg.exec())?;
    }
    Ok(temp)
}

/// Denoised J-scale approximation combined with the detail subbands of the
/// denoised image.
pub fn fmmtld1(img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
    cfg.validate()?;
    let exec = cfg.exec();
    let kind = cfg.denoise_bank;
    let single = d.denoise(img, sigma)?;
    let from_single = wavelets::forward(kind, &single, cfg.scales, exec)?;
    let mut from_noisy = wavelets::forward(kind, img, cfg.scales, exec)?;
    let approx = d.denoise(from_noisy.approx(), cfg.sigma_rule.apply(sigma))?;
    *from_noisy.approx_mut() = approx;
    wavelets::inverse(&mix_subbands(&from_noisy, &from_single)?, exec)
}

/// Pyramid of approximations `A[0] = img, A[s] = approx(WT(A[s-1], 1))`,
/// recombined coarse to fine: each level keeps the details of its own
/// denoised version and takes the denoised coarser level as approximation.
///
/// By default every pyramid level is denoised once; with
/// [`MsConfig::literal_fmmtld`] the coarse level is denoised again in every
/// pass even when it already is the output of the previous pass.
pub fn fmmtld(img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
    cfg.validate()?;
    let exec = cfg.exec();
    let kind = cfg.denoise_bank;
    let sigma_s = cfg.sigma_rule.apply(sigma);
    let mut levels = vec![img.clone()];
    for s in 1..=cfg.scales {
        let sb = wavelets::forward(kind, &levels[s - 1], 1, exec)?;
        levels.push(sb.approx().clone());
    }
    for s in (1..=cfg.scales).rev() {
        // level s - 1 is still the raw pyramid level here
        let fine = if s - 1 == 0 {
            d.denoise(&levels[0], sigma)?
        } else {
            d.denoise(&levels[s - 1], sigma_s)?
        };
        let coarse = if s == cfg.scales || cfg.literal_fmmtld {
            d.denoise(&levels[s], sigma_s)?
        } else {
            levels[s].clone()
        };
        let mut sb = wavelets::forward(kind, &fine, 1, exec)?;
        if sb.approx().dims() != coarse.dims() {
            return Err(Error::Dimension(format!(
                "denoiser changed a {:?} plane to {:?}",
                sb.approx().dims(),
                coarse.dims()
            )));
        }
        *sb.approx_mut() = coarse;
        levels[s - 1] = wavelets::inverse(&sb, exec)?;
    }
    Ok(levels.swap_remove(0))
}

/// The compositions plus the bare single-scale denoiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Single,
    Mtld,
    Mmtld1,
    Mmtld,
    Fmmtld1,
    Fmmtld,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Single,
        Method::Mtld,
        Method::Mmtld1,
        Method::Mmtld,
        Method::Fmmtld1,
        Method::Fmmtld,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Single => "tld",
            Method::Mtld => "mtld",
            Method::Mmtld1 => "mmtld1",
            Method::Mmtld => "mmtld",
            Method::Fmmtld1 => "fmmtld1",
            Method::Fmmtld => "fmmtld",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Single => "TLD",
            Method::Mtld => "MTLD",
            Method::Mmtld1 => "MMTLD-1",
            Method::Mmtld => "MMTLD",
            Method::Fmmtld1 => "FMMTLD-1",
            Method::Fmmtld => "FMMTLD",
        }
    }

    pub fn run(self, img: &Image, sigma: f64, cfg: &MsConfig, d: &dyn Denoiser) -> Result<Image> {
        match self {
            Method::Single => d.denoise(img, sigma),
            Method::Mtld => mtld(img, sigma, cfg, d),
            Method::Mmtld1 => mmtld1(img, sigma, cfg, d),
            Method::Mmtld => mmtld(img, sigma, cfg, d),
            Method::Fmmtld1 => fmmtld1(img, sigma, cfg, d),
            Method::Fmmtld => fmmtld(img, sigma, cfg, d),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Method::ALL
            .into_iter()
            .find(|m| m.id() == key)
            .or(match key.as_str() {
                "single" => Some(Method::Single),
                "mmtld2" => Some(Method::Mmtld),
                "fmmtld2" => Some(Method::Fmmtld),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic, constant-preserving, non-linear stand-in for a denoiser.
    struct Shrink;

    impl Denoiser for Shrink {
        fn denoise(&self, img: &Image, sigma: f64) -> Result<Image> {
            let m = img.mean();
            Ok(img.map(|v| {
                let d = v - m;
                m + d.signum() * (d.abs() - 0.1 * sigma).max(0.0)
            }))
        }
        fn name(&self) -> String {
            "shrink".into()
        }
    }

    fn sample(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |r, c| {
            100.0 + 50.0 * ((r as f64) * 0.4).sin() + ((r * 31 + c * 17) % 23) as f64
        })
    }

    #[test]
    fn identity_is_a_fixpoint() {
        let img = sample(40, 34);
        for j in 1..=3 {
            let cfg = MsConfig::with_scales(j, j);
            for m in Method::ALL {
                let out = m.run(&img, 25.0, &cfg, &IdentityDenoiser).unwrap();
                assert!(out.relative_max_diff(&img).unwrap() < 1e-8, "{m} J={j}");
            }
        }
    }

    #[test]
    fn versions_agree_at_one_scale() {
        let img = sample(32, 30);
        let cfg = MsConfig::default();
        let a = mmtld(&img, 20.0, &cfg, &Shrink).unwrap();
        let b = mmtld1(&img, 20.0, &cfg, &Shrink).unwrap();
        assert_eq!(a, b);
        let a = fmmtld(&img, 20.0, &cfg, &Shrink).unwrap();
        let b = fmmtld1(&img, 20.0, &cfg, &Shrink).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
    }

    #[test]
    fn mixing_takes_the_right_planes() {
        let img = sample(32, 32);
        let single = Shrink.denoise(&img, 30.0).unwrap();
        // an orthonormal mixing transform hands back exactly the mixed planes
        let cfg = MsConfig { mix_bank: SubbandKind::Dwt, ..MsConfig::default() };
        let out = mmtld(&img, 30.0, &cfg, &Shrink).unwrap();
        let multi = mtld(&img, 30.0, &cfg, &Shrink).unwrap();
        let so = wavelets::dwt_forward(&out, 1).unwrap();
        let ss = wavelets::dwt_forward(&single, 1).unwrap();
        let sm = wavelets::dwt_forward(&multi, 1).unwrap();
        assert!(so.approx().max_abs_diff(sm.approx()).unwrap() < 1e-9);
        for b in 0..3 {
            assert!(so.details()[0][b].max_abs_diff(&ss.details()[0][b]).unwrap() < 1e-9);
        }
        // the starlet is redundant: the output is single - a_1(single) + a_1(multi)
        let cfg = MsConfig::default();
        let out = mmtld(&img, 30.0, &cfg, &Shrink).unwrap();
        let a_single = wavelets::iuwt_forward(&single, 1).unwrap().approx().clone();
        let a_multi = wavelets::iuwt_forward(&multi, 1).unwrap().approx().clone();
        let expect = Image::from_fn(32, 32, |r, c| {
            single.get(r, c) - a_single.get(r, c) + a_multi.get(r, c)
        });
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-9);
    }

    #[test]
    fn call_counts() {
        let img = sample(48, 48);
        for j in 1..=3 {
            let cfg = MsConfig::with_scales(j, 1);
            let counter = CountingDenoiser::new(IdentityDenoiser);
            mtld(&img, 10.0, &cfg, &counter).unwrap();
            assert_eq!(counter.calls(), 3 * j + 1);
            let counter = CountingDenoiser::new(IdentityDenoiser);
            fmmtld(&img, 10.0, &cfg, &counter).unwrap();
            assert_eq!(counter.calls(), j + 1);
            let literal = MsConfig { literal_fmmtld: true, ..cfg };
            let counter = CountingDenoiser::new(IdentityDenoiser);
            fmmtld(&img, 10.0, &literal, &counter).unwrap();
            assert_eq!(counter.calls(), 2 * j);
        }
    }

    #[test]
    fn constants_are_fixed_points() {
        let img = Image::filled(36, 36, 42.0);
        for m in Method::ALL {
            let out = m.run(&img, 25.0, &MsConfig::with_scales(2, 2), &Shrink).unwrap();
            assert!(out.max_abs_diff(&img).unwrap() < 1e-6, "{m}");
        }
    }

    #[test]
    fn method_ids_parse() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert_eq!("MMTLD-2".parse::<Method>().unwrap(), Method::Mmtld);
        assert!(matches!("bm3d".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn rejects_zero_scales() {
        let img = sample(16, 16);
        let cfg = MsConfig::with_scales(0, 1);
        assert!(mtld(&img, 1.0, &cfg, &IdentityDenoiser).is_err());
        assert!(mmtld(&img, 1.0, &MsConfig::with_scales(1, 0), &IdentityDenoiser).is_err());
    }
}
