//! Wavelet decompositions used by the multiscale denoisers.
//!
//! * Decimated 2-D DWT with a periodized discrete Meyer bank (denoising stage).
//! * Isotropic undecimated wavelet transform with the B3-spline ("Astro")
//!   kernel (mixing stage).
//!
//! Both use periodic boundaries. Odd DWT levels are padded to even size by
//! repeating the last row/column; the padding is recorded in
//! [`SubbandSet::level_dims`] and cropped away by the inverse.

mod dwt;
mod iuwt;
mod meyer;

use std::path::Path;

pub use dwt::{dwt_forward, dwt_forward_with, dwt_inverse, dwt_inverse_with};
pub use iuwt::{iuwt_forward, iuwt_forward_with, iuwt_inverse, B3_KERNEL};

use crate::error::{Error, Result};
use crate::imgcore::{write_raw, Image};
use crate::par::Exec;

/// Decomposition family of a [`SubbandSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubbandKind {
    Dwt,
    Iuwt,
}

impl SubbandKind {
    pub fn name(self) -> &'static str {
        match self {
            SubbandKind::Dwt => "dwt",
            SubbandKind::Iuwt => "iuwt",
        }
    }
}

impl std::str::FromStr for SubbandKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dwt" | "meyer" | "dmey" => Ok(SubbandKind::Dwt),
            "iuwt" | "starlet" | "b3" | "astro" => Ok(SubbandKind::Iuwt),
            other => Err(Error::InvalidParameter(format!("unknown wavelet `{other}`"))),
        }
    }
}

/// Approximate plane plus per-scale detail planes of one decomposition.
///
/// For [`SubbandKind::Dwt`] every scale holds `[LH, HL, HH]` (LH: horizontal
/// high-pass, vertical low-pass); for [`SubbandKind::Iuwt`] one plane per
/// scale. Scales are ordered finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    kind: SubbandKind,
    approx: Image,
    details: Vec<Vec<Image>>,
    level_dims: Vec<(usize, usize)>,
}

impl SubbandSet {
    pub fn from_parts(
        kind: SubbandKind,
        approx: Image,
        details: Vec<Vec<Image>>,
        level_dims: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let sb = Self {
            kind,
            approx,
            details,
            level_dims,
        };
        sb.validate()?;
        Ok(sb)
    }

    /// Checks plane counts and dimensions against the recorded level sizes.
    pub fn validate(&self) -> Result<()> {
        let scales = self.details.len();
        if scales == 0 || self.level_dims.len() != scales {
            return Err(Error::Dimension(format!(
                "{} detail scales but {} recorded level sizes",
                scales,
                self.level_dims.len()
            )));
        }
        let per_scale = match self.kind {
            SubbandKind::Dwt => 3,
            SubbandKind::Iuwt => 1,
        };
        for (s, bands) in self.details.iter().enumerate() {
            if bands.len() != per_scale {
                return Err(Error::Dimension(format!(
                    "scale {} has {} planes, expected {per_scale}",
                    s + 1,
                    bands.len()
                )));
            }
            let expect = self.band_dims(s);
            if let Some(b) = bands.iter().find(|b| b.dims() != expect) {
                return Err(Error::Dimension(format!(
                    "scale {} plane is {:?}, expected {:?}",
                    s + 1,
                    b.dims(),
                    expect
                )));
            }
        }
        let expect = self.band_dims(scales - 1);
        if self.approx.dims() != expect {
            return Err(Error::Dimension(format!(
                "approximate plane is {:?}, expected {expect:?}",
                self.approx.dims()
            )));
        }
        Ok(())
    }

    fn band_dims(&self, s: usize) -> (usize, usize) {
        let (w, h) = self.level_dims[s];
        match self.kind {
            SubbandKind::Dwt => (w.div_ceil(2), h.div_ceil(2)),
            SubbandKind::Iuwt => (w, h),
        }
    }

    pub fn kind(&self) -> SubbandKind {
        self.kind
    }

    pub fn scales(&self) -> usize {
        self.details.len()
    }

    pub fn approx(&self) -> &Image {
        &self.approx
    }

    pub fn approx_mut(&mut self) -> &mut Image {
        &mut self.approx
    }

    pub fn details(&self) -> &[Vec<Image>] {
        &self.details
    }

    /// Input dimensions seen by each decomposition level, finest first.
    pub fn level_dims(&self) -> &[(usize, usize)] {
        &self.level_dims
    }

    pub fn zero_details(&mut self) {
        for band in self.details.iter_mut().flatten() {
            band.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Number of planes (approximate plus details).
    pub fn plane_count(&self) -> usize {
        1 + self.details.iter().map(Vec::len).sum::<usize>()
    }

    /// All planes, approximate first, then details finest first.
    pub fn planes(&self) -> impl Iterator<Item = &Image> {
        std::iter::once(&self.approx).chain(self.details.iter().flatten())
    }

    /// Replaces every plane with `f(plane)`, in [`SubbandSet::planes`] order.
    /// The mapped planes must keep their dimensions.
    pub fn try_map_planes(&self, mut f: impl FnMut(&Image) -> Result<Image>) -> Result<Self> {
        let approx = f(&self.approx)?;
        let mut details = Vec::with_capacity(self.details.len());
        for bands in &self.details {
            details.push(bands.iter().map(&mut f).collect::<Result<Vec<_>>>()?);
        }
        Self::from_parts(self.kind, approx, details, self.level_dims.clone())
    }

    /// Builds a set from already transformed planes in [`SubbandSet::planes`] order.
    pub fn with_planes(&self, planes: Vec<Image>) -> Result<Self> {
        if planes.len() != self.plane_count() {
            return Err(Error::Dimension(format!(
                "expected {} planes, got {}",
                self.plane_count(),
                planes.len()
            )));
        }
        let mut it = planes.into_iter();
        let approx = it.next().unwrap();
        let details = self
            .details
            .iter()
            .map(|bands| it.by_ref().take(bands.len()).collect())
            .collect();
        Self::from_parts(self.kind, approx, details, self.level_dims.clone())
    }

    /// Writes one raw-float file per plane as `<tag>_s<scale>_<band>.f64`.
    pub fn dump(&self, dir: impl AsRef<Path>, tag: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let names: &[&str] = match self.kind {
            SubbandKind::Dwt => &["LH", "HL", "HH"],
            SubbandKind::Iuwt => &["D"],
        };
        for (s, bands) in self.details.iter().enumerate() {
            for (band, name) in bands.iter().zip(names) {
                write_raw(band, dir.join(format!("{tag}_s{}_{name}.f64", s + 1)))?;
            }
        }
        write_raw(
            &self.approx,
            dir.join(format!("{tag}_s{}_LL.f64", self.scales())),
        )?;
        Ok(())
    }
}

/// Forward transform of the given kind.
pub fn forward(kind: SubbandKind, img: &Image, scales: usize, exec: Exec) -> Result<SubbandSet> {
    match kind {
        SubbandKind::Dwt => dwt_forward_with(img, scales, exec),
        SubbandKind::Iuwt => iuwt_forward_with(img, scales, exec),
    }
}

/// Inverse transform matching `sb.kind()`.
pub fn inverse(sb: &SubbandSet, exec: Exec) -> Result<Image> {
    match sb.kind() {
        SubbandKind::Dwt => dwt_inverse_with(sb, sb.scales(), exec),
        SubbandKind::Iuwt => iuwt_inverse(sb, sb.scales()),
    }
}

/// New set with the approximate plane of `approx_source` and the detail
/// planes of `detail_source`.
pub fn mix_subbands(approx_source: &SubbandSet, detail_source: &SubbandSet) -> Result<SubbandSet> {
    if approx_source.kind != detail_source.kind {
        return Err(Error::KindMismatch(format!(
            "cannot mix {} approximation with {} details",
            approx_source.kind.name(),
            detail_source.kind.name()
        )));
    }
    if approx_source.scales() != detail_source.scales()
        || approx_source.level_dims != detail_source.level_dims
    {
        return Err(Error::Dimension(format!(
            "subband sets disagree: {} scales {:?} vs {} scales {:?}",
            approx_source.scales(),
            approx_source.level_dims,
            detail_source.scales(),
            detail_source.level_dims
        )));
    }
    SubbandSet::from_parts(
        approx_source.kind,
        approx_source.approx.clone(),
        detail_source.details.clone(),
        approx_source.level_dims.clone(),
    )
}

/// Filter taps of a bank.
///
/// For the DWT the taps are the periodized Meyer filters for one signal
/// length; for the IUWT the analysis low-pass is the B3 kernel, the analysis
/// high-pass is `delta - B3`, and synthesis is plain summation.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub analysis_lo: Vec<f64>,
    pub analysis_hi: Vec<f64>,
    pub synthesis_lo: Vec<f64>,
    pub synthesis_hi: Vec<f64>,
}

impl FilterBank {
    /// Periodized Meyer bank for signals of even length `len`.
    pub fn meyer(len: usize) -> Result<Self> {
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "Meyer bank needs an even length >= 2, got {len}"
            )));
        }
        let (h, g) = meyer::MeyerBank::new(len).taps();
        Ok(Self {
            synthesis_lo: h.clone(),
            synthesis_hi: g.clone(),
            analysis_lo: h,
            analysis_hi: g,
        })
    }

    pub fn b3_spline() -> Self {
        let mut hi: Vec<f64> = B3_KERNEL.iter().map(|v| -v).collect();
        hi[2] += 1.0;
        Self {
            analysis_lo: B3_KERNEL.to_vec(),
            analysis_hi: hi,
            synthesis_lo: vec![1.0],
            synthesis_hi: vec![1.0],
        }
    }
}
