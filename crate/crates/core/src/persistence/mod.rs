//! On-disk formats: OBJ meshes, PNG textures, relation files, scripts, and
//! the colored-model export (OBJ + MTL + PNG).
//!
//! Every loader reports failures with the file path and, where the format has
//! them, a line or record index.

mod export;
mod obj;
mod relations;
mod script;
mod texture;

pub use export::{export_colored_model, ModelPaths};
pub use obj::{load_obj, parse_obj, read_obj, write_obj, ObjModel};
pub use relations::{load_relations, relations_from_str, relations_to_string, save_relations, RELATION_FILE_VERSION};
pub use script::{parse_script, parse_script_str, script_to_string, SCRIPT_FILE_VERSION};
pub use texture::{export_png, import_png};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::relation::RelationError;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    ObjSyntax { path: PathBuf, line: usize, message: String },
    #[error("{}{}: mesh has no texture coordinates; a UV-mapped mesh is required", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    NoUv { path: PathBuf, line: Option<usize> },
    #[error("{}: {source}", path.display())]
    Mesh {
        path: PathBuf,
        #[source]
        source: GeometryError,
    },
    #[error("{}: cannot decode PNG: {message}", path.display())]
    Decode { path: PathBuf, message: String },
    #[error("{}: cannot encode PNG: {message}", path.display())]
    Encode { path: PathBuf, message: String },
    #[error("{}: unsupported format version {found}, expected {expected}", path.display())]
    Version { path: PathBuf, found: String, expected: u32 },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: record {index}: unknown command {name:?}", path.display())]
    UnknownCommand { path: PathBuf, index: usize, name: String },
    #[error("{}: record {index}: {message}", path.display())]
    BadRecord { path: PathBuf, index: usize, message: String },
    #[error("{}: {source}", path.display())]
    Relation {
        path: PathBuf,
        #[source]
        source: RelationError,
    },
}

pub type Result<T, E = PersistError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}
