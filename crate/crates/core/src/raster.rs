//! 8-bit RGBA raster and PNG codec helpers.

use std::io::Cursor;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ImageEncoder, RgbaImage};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image must be at least 1x1, got {0}x{1}")]
    Empty(u32, u32),
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("png decode failed: {0}")]
    Decode(String),
}

pub type Rgba = [u8; 4];

#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RasterImage({}x{})", self.width, self.height)
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Empty(width, height));
        }
        let expected = width as usize * height as usize * 4;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize { expected, actual: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: Rgba) -> Result<Self, RasterError> {
        let n = width as usize * height as usize;
        Self::new(width, height, color.repeat(n))
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 4
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> Rgba {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2], self.pixels[i + 3]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, c: Rgba) {
        if x < self.width && y < self.height {
            let i = self.offset(x, y);
            self.pixels[i..i + 4].copy_from_slice(&c);
        }
    }

    /// Source-over blend of `c` with coverage `alpha` in [0, 1].
    pub fn blend_pixel(&mut self, x: u32, y: u32, c: Rgba, alpha: f32) {
        if x >= self.width || y >= self.height || alpha <= 0.0 {
            return;
        }
        let a = (alpha * f32::from(c[3]) / 255.0).clamp(0.0, 1.0);
        let i = self.offset(x, y);
        for k in 0..3 {
            let dst = f32::from(self.pixels[i + k]);
            self.pixels[i + k] = (dst + (f32::from(c[k]) - dst) * a).round() as u8;
        }
        let dst_a = f32::from(self.pixels[i + 3]) / 255.0;
        self.pixels[i + 3] = ((a + dst_a * (1.0 - a)) * 255.0).round() as u8;
    }

    /// Rows `[top, bottom)` as a new image.
    pub fn crop_rows(&self, top: u32, bottom: u32) -> Result<Self, RasterError> {
        let start = self.offset(0, top.min(self.height));
        let end = self.offset(0, bottom.min(self.height));
        Self::new(self.width, bottom.saturating_sub(top), self.pixels[start..end.max(start)].to_vec())
    }

    /// Luma in [0, 1] using Rec. 601 weights.
    pub fn to_gray<T: Scalar>(&self) -> Vec<T> {
        self.pixels.chunks_exact(4).map(|p| luma(p[0], p[1], p[2])).collect()
    }

    pub fn alpha<T: Scalar>(&self) -> Vec<T> {
        let s = T::from_f64_lossy(1.0 / 255.0);
        self.pixels.chunks_exact(4).map(|p| T::from_f64_lossy(f64::from(p[3])) * s).collect()
    }

    pub fn resize(&self, width: u32, height: u32) -> Self {
        let out = image::imageops::resize(
            &self.to_rgba_image(),
            width.max(1),
            height.max(1),
            image::imageops::FilterType::Triangle,
        );
        Self::from(out)
    }

    pub fn to_rgba_image(&self) -> RgbaImage {
        RgbaImage::from_raw(self.width, self.height, self.pixels.clone()).expect("buffer size checked")
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, RasterError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| RasterError::Decode(e.to_string()))?;
        let rgba = img.into_rgba8();
        if rgba.width() == 0 || rgba.height() == 0 {
            return Err(RasterError::Empty(rgba.width(), rgba.height()));
        }
        Ok(Self::from(rgba))
    }

    /// Lossless PNG with fixed encoder settings, so identical pixels give identical bytes.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Cursor::new(Vec::new());
        PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive)
            .write_image(&self.pixels, self.width, self.height, image::ExtendedColorType::Rgba8)
            .expect("in-memory png encode");
        out.into_inner()
    }
}

impl From<RgbaImage> for RasterImage {
    fn from(img: RgbaImage) -> Self {
        let (width, height) = img.dimensions();
        Self { width, height, pixels: img.into_raw() }
    }
}

#[inline]
pub(crate) fn luma<T: Scalar>(r: u8, g: u8, b: u8) -> T {
    let v = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    T::from_f64_lossy(v / 255.0)
}
