use super::{SubbandKind, SubbandSet};
use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::par::{self, Exec};

/// B3-spline smoothing kernel `(1, 4, 6, 4, 1) / 16`.
pub const B3_KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Separable periodic convolution with the B3 kernel dilated by `step`.
fn smooth(img: &Image, step: usize, exec: Exec) -> Image {
    let (w, h) = img.dims();
    let src = img.data();
    let offs = |len: usize, i: usize, k: usize| -> usize {
        // i + (k - 2) * step, wrapped into [0, len)
        let shift = (2 * step) % len;
        let d = (k * step) % len;
        (i + len - shift + d) % len
    };
    let rows = par::map_indexed(h, exec, |r| {
        let row = &src[r * w..(r + 1) * w];
        (0..w)
            .map(|c| {
                B3_KERNEL
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t * row[offs(w, c, k)])
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    let tmp = rows.concat();
    let rows = par::map_indexed(h, exec, |r| {
        (0..w)
            .map(|c| {
                B3_KERNEL
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t * tmp[offs(h, r, k) * w + c])
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    Image::from_raw_parts(w, h, rows.concat())
}

/// K-scale isotropic undecimated (starlet) transform with periodic borders.
/// Details are `a_{j} - a_{j+1}`, finest first; the approximate plane is `a_K`.
pub fn iuwt_forward(img: &Image, scales: usize) -> Result<SubbandSet> {
    iuwt_forward_with(img, scales, Exec::Parallel)
}

pub fn iuwt_forward_with(img: &Image, scales: usize, exec: Exec) -> Result<SubbandSet> {
    if scales == 0 {
        return Err(Error::InvalidParameter("IUWT needs at least one scale".into()));
    }
    let mut details = Vec::with_capacity(scales);
    let mut current = img.clone();
    for j in 0..scales {
        let next = smooth(&current, 1 << j, exec);
        let d = current.zip_map(&next, |a, b| a - b)?;
        details.push(vec![d]);
        current = next;
    }
    SubbandSet::from_parts(
        SubbandKind::Iuwt,
        current,
        details,
        vec![img.dims(); scales],
    )
}

/// Additive reconstruction: approximate plane plus every detail plane.
pub fn iuwt_inverse(sb: &SubbandSet, scales: usize) -> Result<Image> {
    if sb.kind() != SubbandKind::Iuwt {
        return Err(Error::KindMismatch("iuwt_inverse needs an IUWT subband set".into()));
    }
    if sb.scales() != scales {
        return Err(Error::InvalidParameter(format!(
            "subband set has {} scales, inverse asked for {scales}",
            sb.scales()
        )));
    }
    sb.validate()?;
    // sum coarse to fine so the telescoping sum cancels in the same order it was built
    let mut out = sb.approx().clone();
    for s in (0..scales).rev() {
        out = out.zip_map(&sb.details()[s][0], |a, d| a + d)?;
    }
    Ok(out)
}
