use crate::error::{Error, Result};
use crate::imgcore::{add_gaussian_noise, psnr, Image, NoiseSpec};
use crate::multiscale::{Denoiser, MemoDenoiser, Method, MsConfig};

/// PSNR gains over the single-scale denoiser at one scale count.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scales: usize,
    pub mtld: f64,
    pub mmtld: f64,
    pub fmmtld: f64,
}

/// Runs MTLD, MMTLD and FMMTLD at `J = K = 1..=max_scales` on a seeded noisy
/// copy of `clean` and reports their gain over the single-scale result.
pub fn scale_sweep(
    clean: &Image,
    sigma: f64,
    max_scales: usize,
    seed: u64,
    base: &MsConfig,
    denoiser: &dyn Denoiser,
) -> Result<Vec<SweepRow>> {
    if max_scales == 0 {
        return Err(Error::InvalidParameter("max_scales must be >= 1".into()));
    }
    let noisy = add_gaussian_noise(clean, NoiseSpec::new(sigma, seed)?)?;
    let memo = MemoDenoiser::new(denoiser);
    let single = psnr(clean, &memo.denoise(&noisy, sigma)?)?;
    (1..=max_scales)
        .map(|j| {
            let ms = MsConfig { scales: j, mix_scales: j, ..base.clone() };
            let gain = |m: Method| -> Result<f64> { Ok(psnr(clean, &m.run(&noisy, sigma, &ms, &memo)?)? - single) };
            Ok(SweepRow {
                scales: j,
                mtld: gain(Method::Mtld)?,
                mmtld: gain(Method::Mmtld)?,
                fmmtld: gain(Method::Fmmtld)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scales", "mtld_gain", "mmtld_gain", "fmmtld_gain"])?;
    for r in rows {
        w.write_record([
            r.scales.to_string(),
            r.mtld.to_string(),
            r.mmtld.to_string(),
            r.fmmtld.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Format(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}
