use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Image;
use crate::error::{Error, Result};

/// Reads a binary (P5) PGM. 8-bit and 16-bit (big-endian) samples are
/// supported; the image peak is set to the file's maxval.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;
    let mut next_token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = next_token()?;
    if magic != "P5" {
        return Err(Error::Format(format!("expected P5 magic, found {magic:?}")));
    }
    let parse = |s: String, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PGM {what}: {s:?}")))
    };
    let width = parse(next_token()?, "width")?;
    let height = parse(next_token()?, "height")?;
    let maxval = parse(next_token()?, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let need = width * height * sample_bytes;
    if bytes.len() < pos + need {
        return Err(Error::Format(format!(
            "PGM raster truncated: need {need} bytes, have {}",
            bytes.len().saturating_sub(pos)
        )));
    }
    let raster = &bytes[pos..pos + need];
    let data: Vec<f64> = if sample_bytes == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    Ok(Image::new(width, height, data)?.with_peak(maxval.max(255) as f64))
}

/// Writes an 8-bit binary PGM; samples are rounded and clamped to [0, 255].
pub fn write_pgm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(&img.to_u8())?;
    out.flush()?;
    Ok(())
}

/// Writes an 8-bit grayscale PNG; samples are rounded and clamped.
pub fn write_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.to_u8())
        .ok_or_else(|| Error::Format("image buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Reads a PGM (by `.pgm` extension) or any PNG. Color PNGs are converted to
/// luma.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    if has_extension(path, "pgm") {
        return read_pgm(path);
    }
    if has_extension(path, "f64") {
        return read_raw(path);
    }
    let dynimg = image::open(path)?;
    let gray = dynimg.to_luma8();
    let (w, h) = gray.dimensions();
    let data = gray.into_raw().into_iter().map(|v| v as f64).collect();
    Image::new(w as usize, h as usize, data)
}

/// Writes PGM, raw float, or PNG depending on the extension.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if has_extension(path, "pgm") {
        write_pgm(img, path)
    } else if has_extension(path, "f64") {
        write_raw(img, path)
    } else {
        write_png(img, path)
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Raw float exchange format: `u32` width, `u32` height (both little-endian),
/// then `width * height` little-endian `f64` samples in row-major order.
pub fn write_raw(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&(img.width() as u32).to_le_bytes())?;
    out.write_all(&(img.height() as u32).to_le_bytes())?;
    for v in img.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::Format("raw file shorter than its header".into()));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != width * height * 8 {
        return Err(Error::Format(format!(
            "raw body has {} bytes, expected {}",
            body.len(),
            width * height * 8
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(width, height, data)
}
