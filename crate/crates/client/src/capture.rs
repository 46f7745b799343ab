//! Preparing a screen capture for upload: crop system bars, blank the host's own
//! widgets, and encode losslessly.

use privscan_core::{BoundingBox, RasterImage};
use thiserror::Error;

/// Largest upload the service accepts.
pub const MAX_UPLOAD_BYTES: usize = 5 * 1024 * 1024;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("insets {top}+{bottom} (or an exclusion box) do not fit a {width}x{height} capture")]
pub struct InsetsExceedImageError {
    pub top: u32,
    pub bottom: u32,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("encoded capture is {size} bytes; the upload limit is {limit}")]
pub struct CaptureTooLargeError {
    pub size: usize,
    pub limit: usize,
}

/// Regions that are not app content: status bar rows, navigation bar rows and
/// boxes such as a floating scan button.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaptureInsets {
    pub top_px: u32,
    pub bottom_px: u32,
    /// In capture coordinates, before cropping.
    pub exclusion_boxes: Vec<BoundingBox>,
}

impl CaptureInsets {
    pub fn rows(top_px: u32, bottom_px: u32) -> Self {
        Self { top_px, bottom_px, exclusion_boxes: Vec::new() }
    }
}

/// Median of each channel over the outermost pixel ring.
fn median_border(img: &RasterImage) -> [u8; 4] {
    let (w, h) = (img.width(), img.height());
    let mut ring = Vec::new();
    for x in 0..w {
        ring.push(img.pixel(x, 0));
        ring.push(img.pixel(x, h - 1));
    }
    for y in 1..h.saturating_sub(1) {
        ring.push(img.pixel(0, y));
        ring.push(img.pixel(w - 1, y));
    }
    let mut out = [0; 4];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut channel: Vec<u8> = ring.iter().map(|p| p[c]).collect();
        channel.sort_unstable();
        *slot = channel[channel.len() / 2];
    }
    out
}

/// Fills exclusion boxes with the median border color, then crops the inset rows.
pub fn sanitize_capture(capture: &RasterImage, insets: &CaptureInsets) -> Result<RasterImage, InsetsExceedImageError> {
    let (w, h) = (capture.width(), capture.height());
    let err = || InsetsExceedImageError { top: insets.top_px, bottom: insets.bottom_px, width: w, height: h };
    if u64::from(insets.top_px) + u64::from(insets.bottom_px) >= u64::from(h) {
        return Err(err());
    }
    if insets.exclusion_boxes.iter().any(|b| !b.fits_within(w, h)) {
        return Err(err());
    }
    let mut img = capture.clone();
    if !insets.exclusion_boxes.is_empty() {
        let fill = median_border(capture);
        for b in &insets.exclusion_boxes {
            for y in b.top()..b.bottom() {
                for x in b.left()..b.right() {
                    img.set_pixel(x, y, fill);
                }
            }
        }
    }
    if insets.top_px == 0 && insets.bottom_px == 0 {
        return Ok(img);
    }
    Ok(img.crop_rows(insets.top_px, h - insets.bottom_px).expect("rows checked above"))
}

/// Lossless PNG of at most [`MAX_UPLOAD_BYTES`].
pub fn compress_capture(image: &RasterImage) -> Result<Vec<u8>, CaptureTooLargeError> {
    let png = image.to_png();
    if png.len() > MAX_UPLOAD_BYTES {
        return Err(CaptureTooLargeError { size: png.len(), limit: MAX_UPLOAD_BYTES });
    }
    Ok(png)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insets_crop_rows() {
        let img = RasterImage::filled(108, 200, [1, 2, 3, 255]).unwrap();
        let out = sanitize_capture(&img, &CaptureInsets::rows(6, 4)).unwrap();
        assert_eq!((out.width(), out.height()), (108, 190));
    }

    #[test]
    fn no_insets_is_identity() {
        let mut img = RasterImage::filled(20, 30, [9, 9, 9, 255]).unwrap();
        img.set_pixel(3, 4, [200, 0, 0, 255]);
        assert_eq!(sanitize_capture(&img, &CaptureInsets::default()).unwrap(), img);
    }

    #[test]
    fn insets_must_leave_rows() {
        let img = RasterImage::filled(10, 10, [0, 0, 0, 255]).unwrap();
        assert!(sanitize_capture(&img, &CaptureInsets::rows(5, 5)).is_err());
        let outside = CaptureInsets { exclusion_boxes: vec![BoundingBox::new(5, 5, 11, 8).unwrap()], ..Default::default() };
        assert!(sanitize_capture(&img, &outside).is_err());
    }

    #[test]
    fn exclusions_take_the_border_color() {
        let mut img = RasterImage::filled(20, 20, [240, 240, 240, 255]).unwrap();
        for y in 5..10 {
            for x in 5..10 {
                img.set_pixel(x, y, [10, 20, 30, 255]);
            }
        }
        let insets = CaptureInsets { exclusion_boxes: vec![BoundingBox::new(4, 4, 11, 11).unwrap()], ..Default::default() };
        let out = sanitize_capture(&img, &insets).unwrap();
        assert!((4..11).all(|y| (4..11).all(|x| out.pixel(x, y) == [240, 240, 240, 255])));
    }

    #[test]
    fn compression_is_lossless() {
        let img = RasterImage::filled(100, 100, [255, 255, 255, 255]).unwrap();
        assert_eq!(RasterImage::from_png(&compress_capture(&img).unwrap()).unwrap(), img);
    }
}
