use std::io::BufWriter;
use std::path::Path;

use image::{ImageFormat, RgbaImage};

use super::{io_err, PersistError, Result};

/// Writes an RGBA8 PNG.
pub fn export_png(image: &RgbaImage, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    image
        .write_to(&mut BufWriter::new(file), ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => PersistError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => PersistError::Encode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

/// Reads a PNG of any color type as RGBA8.
pub fn import_png(path: &Path) -> Result<RgbaImage> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map(|img| img.into_rgba8())
        .map_err(|e| PersistError::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}
