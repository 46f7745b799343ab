//! Two-stage result decoding: read the PNG header, pick a power-of-two subsample
//! factor that brings the longer side within the bound, then decode and reduce.

use std::io::Cursor;

use image::codecs::png::PngDecoder;
use image::ImageDecoder;
use privscan_core::RasterImage;
use thiserror::Error;

pub const MAX_DECODE_DIM: u32 = 2000;
const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("not a PNG: {0}")]
    NotAPng(String),
    #[error("corrupt PNG: {0}")]
    CorruptImage(String),
}

/// Smallest power of two `f` with `max(w, h) / f <= max_dim` (exact division).
pub fn subsample_factor(width: u32, height: u32, max_dim: u32) -> u32 {
    let longest = u64::from(width.max(height));
    let mut f = 1u32;
    while longest > u64::from(max_dim.max(1)) * u64::from(f) {
        f *= 2;
    }
    f
}

/// Width and height from the PNG header, without decoding pixel data.
pub fn png_dimensions(png: &[u8]) -> Result<(u32, u32), DecodeError> {
    if !png.starts_with(PNG_SIGNATURE) {
        return Err(DecodeError::NotAPng("missing PNG signature".to_string()));
    }
    let decoder = PngDecoder::new(Cursor::new(png)).map_err(|e| DecodeError::NotAPng(e.to_string()))?;
    Ok(decoder.dimensions())
}

/// Each output pixel is the mean of an `f x f` block; partial edge blocks are dropped.
fn box_reduce(img: &RasterImage, f: u32) -> RasterImage {
    let (w, h) = ((img.width() / f).max(1), (img.height() / f).max(1));
    let (bw, bh) = (f.min(img.width()), f.min(img.height()));
    let n = bw * bh;
    let mut pixels = Vec::with_capacity((w * h * 4) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0u32; 4];
            for dy in 0..bh {
                for dx in 0..bw {
                    let p = img.pixel(x * f + dx, y * f + dy);
                    for c in 0..4 {
                        acc[c] += u32::from(p[c]);
                    }
                }
            }
            pixels.extend(acc.map(|a| ((a + n / 2) / n) as u8));
        }
    }
    RasterImage::new(w, h, pixels).expect("dimensions match buffer")
}

/// Decodes `png` at `floor(w/f) x floor(h/f)` with `f` from [`subsample_factor`].
pub fn decode_two_stage(png: &[u8], max_dim: u32) -> Result<RasterImage, DecodeError> {
    let (w, h) = png_dimensions(png)?;
    let f = subsample_factor(w, h, max_dim);
    let full = RasterImage::from_png(png).map_err(|e| DecodeError::CorruptImage(e.to_string()))?;
    Ok(if f == 1 { full } else { box_reduce(&full, f) })
}
