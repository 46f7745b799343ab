use std::path::{Path, PathBuf};

use privscan_core::RasterImage;

/// Writes `<dir>/<stem>-<data_type>.png` and returns its path.
pub fn save_image(image: &RasterImage, data_type: &str, dir: &Path, stem: &str) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{stem}-{data_type}.png"));
    std::fs::write(&path, image.to_png())?;
    Ok(path)
}
