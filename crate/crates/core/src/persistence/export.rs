use std::path::{Path, PathBuf};

use image::RgbaImage;

use super::{export_png, io_err, write_obj, Result};
use crate::geometry::Mesh;

const OBJ_NAME: &str = "model.obj";
const MTL_NAME: &str = "model.mtl";
const TEXTURE_NAME: &str = "texture.png";
const MATERIAL: &str = "painted";

/// Files written by [`export_colored_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelPaths {
    pub obj: PathBuf,
    pub mtl: PathBuf,
    pub texture: PathBuf,
}

/// Writes `model.obj`, `model.mtl` and `texture.png` into `out_dir`, with the
/// material's diffuse map pointing at the texture.
pub fn export_colored_model(mesh: &Mesh, texture: &RgbaImage, out_dir: &Path) -> Result<ModelPaths> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let paths = ModelPaths {
        obj: out_dir.join(OBJ_NAME),
        mtl: out_dir.join(MTL_NAME),
        texture: out_dir.join(TEXTURE_NAME),
    };
    export_png(texture, &paths.texture)?;
    let mtl = format!(
        "newmtl {MATERIAL}\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nd 1\nillum 1\nmap_Kd {TEXTURE_NAME}\n"
    );
    std::fs::write(&paths.mtl, mtl).map_err(io_err(&paths.mtl))?;
    std::fs::write(&paths.obj, write_obj(mesh, Some((MTL_NAME, MATERIAL)))).map_err(io_err(&paths.obj))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lat_long_sphere;
    use crate::persistence::{import_png, load_obj, PersistError};

    #[test]
    fn white_model_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = lat_long_sphere(16, 8, 1.0);
        let tex = RgbaImage::from_pixel(32, 32, image::Rgba([255; 4]));
        let paths = export_colored_model(&mesh, &tex, &dir.path().join("out")).unwrap();
        let back = load_obj(&paths.obj).unwrap();
        assert_eq!(back.triangle_count(), mesh.triangle_count());
        assert_eq!(back.vertex_count(), mesh.vertex_count());
        assert!(import_png(&paths.texture).unwrap().pixels().all(|p| p.0 == [255; 4]));
        let mtl = std::fs::read_to_string(&paths.mtl).unwrap();
        assert!(mtl.contains("map_Kd texture.png"));
        assert!(std::fs::read_to_string(&paths.obj).unwrap().starts_with("mtllib model.mtl\n"));
    }

    #[test]
    fn unwritable_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let mesh = lat_long_sphere(8, 4, 1.0);
        let err = export_colored_model(&mesh, &RgbaImage::new(2, 2), &file.join("sub")).unwrap_err();
        assert!(matches!(err, PersistError::Io { .. }));
    }
}
