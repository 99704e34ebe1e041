use super::meyer::MeyerBank;
use super::{SubbandKind, SubbandSet};
use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::par::{self, Exec};

/// Pads odd axes to even length by repeating the last row/column.
fn pad_even(img: &Image) -> (Vec<f64>, usize, usize) {
    let (w, h) = img.dims();
    let pw = w + w % 2;
    let ph = h + h % 2;
    if (pw, ph) == (w, h) {
        return (img.data().to_vec(), w, h);
    }
    let mut out = Vec::with_capacity(pw * ph);
    for r in 0..ph {
        let src = img.row(r.min(h - 1));
        out.extend_from_slice(src);
        if pw > w {
            out.push(src[w - 1]);
        }
    }
    (out, pw, ph)
}

fn transpose(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            out[c * h + r] = data[r * w + c];
        }
    }
    out
}

/// Analyzes every row of a `w x h` plane; returns `(lo, hi)`, each `w/2 x h`.
fn analyze_rows(data: &[f64], w: usize, h: usize, exec: Exec) -> (Vec<f64>, Vec<f64>) {
    let bank = MeyerBank::new(w);
    let half = w / 2;
    let rows = par::map_indexed(h, exec, |r| {
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        bank.analyze(&data[r * w..(r + 1) * w], &mut lo, &mut hi);
        (lo, hi)
    });
    let mut lo = Vec::with_capacity(half * h);
    let mut hi = Vec::with_capacity(half * h);
    for (l, g) in rows {
        lo.extend(l);
        hi.extend(g);
    }
    (lo, hi)
}

/// Inverse of [`analyze_rows`]: `lo`/`hi` are `half x h`, output `2*half x h`.
fn synthesize_rows(lo: &[f64], hi: &[f64], half: usize, h: usize, exec: Exec) -> Vec<f64> {
    let w = 2 * half;
    let bank = MeyerBank::new(w);
    let rows = par::map_indexed(h, exec, |r| {
        let mut x = vec![0.0; w];
        bank.synthesize(
            &lo[r * half..(r + 1) * half],
            &hi[r * half..(r + 1) * half],
            &mut x,
        );
        x
    });
    rows.concat()
}

fn analyze_cols(data: &[f64], w: usize, h: usize, exec: Exec) -> (Vec<f64>, Vec<f64>) {
    let t = transpose(data, w, h);
    let (lo, hi) = analyze_rows(&t, h, w, exec);
    (transpose(&lo, h / 2, w), transpose(&hi, h / 2, w))
}

fn synthesize_cols(lo: &[f64], hi: &[f64], w: usize, half_h: usize, exec: Exec) -> Vec<f64> {
    let lt = transpose(lo, w, half_h);
    let ht = transpose(hi, w, half_h);
    let t = synthesize_rows(&lt, &ht, half_h, w, exec);
    transpose(&t, 2 * half_h, w)
}

/// One analysis level: returns `(LL, [LH, HL, HH])`.
///
/// `LH` is horizontally high-pass and vertically low-pass, `HL` the reverse.
pub(crate) fn analyze_level(img: &Image, exec: Exec) -> (Image, [Image; 3]) {
    let (data, pw, ph) = pad_even(img);
    let (l, hgh) = analyze_rows(&data, pw, ph, exec);
    let hw = pw / 2;
    let hh = ph / 2;
    let (ll, hl) = analyze_cols(&l, hw, ph, exec);
    let (lh, hh_band) = analyze_cols(&hgh, hw, ph, exec);
    let mk = |d: Vec<f64>| Image::from_raw_parts(hw, hh, d);
    (mk(ll), [mk(lh), mk(hl), mk(hh_band)])
}

/// One synthesis level, cropped to `out_dims = (width, height)`.
pub(crate) fn synthesize_level(
    ll: &Image,
    bands: &[Image],
    out_dims: (usize, usize),
    exec: Exec,
) -> Image {
    let (hw, hh) = ll.dims();
    let l = synthesize_cols(ll.data(), bands[1].data(), hw, hh, exec);
    let hgh = synthesize_cols(bands[0].data(), bands[2].data(), hw, hh, exec);
    let full = synthesize_rows(&l, &hgh, hw, 2 * hh, exec);
    let padded = Image::from_raw_parts(2 * hw, 2 * hh, full);
    if padded.dims() == out_dims {
        padded
    } else {
        padded
            .crop(0, 0, out_dims.0, out_dims.1)
            .expect("synthesis output covers the recorded dims")
    }
}

pub(crate) fn level_dims_for(dims: (usize, usize), scales: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(scales);
    let mut d = dims;
    for s in 0..scales {
        if d.0 < 2 || d.1 < 2 {
            return Err(Error::Dimension(format!(
                "image {}x{} is too small for a {scales}-scale DWT (level {} input is {}x{})",
                dims.0,
                dims.1,
                s + 1,
                d.0,
                d.1
            )));
        }
        out.push(d);
        d = (d.0.div_ceil(2), d.1.div_ceil(2));
    }
    Ok(out)
}

/// J-scale periodic 2-D DWT with the discrete Meyer bank.
pub fn dwt_forward(img: &Image, scales: usize) -> Result<SubbandSet> {
    dwt_forward_with(img, scales, Exec::Parallel)
}

pub fn dwt_forward_with(img: &Image, scales: usize, exec: Exec) -> Result<SubbandSet> {
    if scales == 0 {
        return Err(Error::InvalidParameter("DWT needs at least one scale".into()));
    }
    let level_dims = level_dims_for(img.dims(), scales)?;
    let mut details = Vec::with_capacity(scales);
    let mut current = img.clone();
    for _ in 0..scales {
        let (ll, bands) = analyze_level(&current, exec);
        details.push(bands.to_vec());
        current = ll;
    }
    SubbandSet::from_parts(SubbandKind::Dwt, current, details, level_dims)
}

/// Inverse of [`dwt_forward`]; `scales` must match the set.
pub fn dwt_inverse(sb: &SubbandSet, scales: usize) -> Result<Image> {
    dwt_inverse_with(sb, scales, Exec::Parallel)
}

pub fn dwt_inverse_with(sb: &SubbandSet, scales: usize, exec: Exec) -> Result<Image> {
    if sb.kind() != SubbandKind::Dwt {
        return Err(Error::KindMismatch("dwt_inverse needs a DWT subband set".into()));
    }
    if sb.scales() != scales {
        return Err(Error::InvalidParameter(format!(
            "subband set has {} scales, inverse asked for {scales}",
            sb.scales()
        )));
    }
    sb.validate()?;
    let mut current = sb.approx().clone();
    for s in (0..scales).rev() {
        current = synthesize_level(&current, &sb.details()[s], sb.level_dims()[s], exec);
    }
    Ok(current)
}
