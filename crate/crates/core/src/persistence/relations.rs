//! Relation file (`*.relations.json`).
//!
//! ```json
//! { "version": 1, "f": 8.0,
//!   "image_canvas": { "width": 600, "height": 600 },
//!   "uv_canvas": { "width": 1024, "height": 1024 },
//!   "groups": [ { "id": 0, "label_color": [255, 0, 0, 255],
//!                 "pic_points": [ { "x": 300, "y": 60, "radius": 16 } ],
//!                 "word_points": [ { "x": 512, "y": 20, "radius": 32 } ] } ] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, read_text, PersistError, Result};
use crate::relation::{RelationGroup, RelationSet};

pub const RELATION_FILE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Dims {
    width: u32,
    height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    version: u32,
    f: f64,
    image_canvas: Dims,
    uv_canvas: Dims,
    groups: Vec<RelationGroup>,
}

pub fn relations_to_string(set: &RelationSet) -> String {
    let (iw, ih) = set.image_dims();
    let (uw, uh) = set.uv_dims();
    let file = RelationFile {
        version: RELATION_FILE_VERSION,
        f: set.f(),
        image_canvas: Dims { width: iw, height: ih },
        uv_canvas: Dims { width: uw, height: uh },
        groups: set.groups().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("relation file serializes")
}

/// Parses relation-file text. `path` only labels diagnostics.
pub fn relations_from_str(text: &str, path: &Path) -> Result<RelationSet> {
    let format = |e: serde_json::Error| PersistError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(format)?;
    match value.get("version") {
        Some(v) if v.as_u64() == Some(RELATION_FILE_VERSION as u64) => {}
        Some(v) => {
            return Err(PersistError::Version {
                path: path.to_path_buf(),
                found: v.to_string(),
                expected: RELATION_FILE_VERSION,
            })
        }
        None => {
            return Err(PersistError::Format {
                path: path.to_path_buf(),
                message: "missing \"version\"".into(),
            })
        }
    }
    let file: RelationFile = serde_json::from_str(text).map_err(format)?;
    RelationSet::from_groups(
        file.f,
        (file.image_canvas.width, file.image_canvas.height),
        (file.uv_canvas.width, file.uv_canvas.height),
        file.groups,
    )
    .map_err(|source| PersistError::Relation {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_relations(set: &RelationSet, path: &Path) -> Result<()> {
    std::fs::write(path, relations_to_string(set)).map_err(io_err(path))
}

pub fn load_relations(path: &Path) -> Result<RelationSet> {
    relations_from_str(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::MarkerPoint;
    use crate::pixel::Rgba;

    fn two_groups() -> RelationSet {
        let g = |id, x| RelationGroup {
            id,
            label_color: Rgba::rgb(10, 20, 30),
            pic_points: vec![MarkerPoint { x, y: 5, radius: 3 }, MarkerPoint { x: 1, y: 2, radius: 32 }],
            word_points: vec![MarkerPoint { x: 1000, y: 1023, radius: 7 }],
        };
        RelationSet::from_groups(12.5, (600, 400), (1024, 1024), vec![g(0, 10), g(3, 20)]).unwrap()
    }

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.relations.json");
        for set in [RelationSet::new(8.0, (10, 10), (20, 20)).unwrap(), two_groups()] {
            save_relations(&set, &path).unwrap();
            assert_eq!(load_relations(&path).unwrap(), set);
        }
    }

    #[test]
    fn version_and_unknown_fields() {
        let p = Path::new("x.json");
        let text = relations_to_string(&two_groups());
        let v99 = text.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(relations_from_str(&v99, p), Err(PersistError::Version { .. })));
        let extra = text.replacen("\"f\"", "\"color_space\": 1, \"f\"", 1);
        assert!(matches!(relations_from_str(&extra, p), Err(PersistError::Format { .. })));
        assert!(matches!(relations_from_str("{", p), Err(PersistError::Format { .. })));
        let bad_f = text.replace("12.5", "0.0");
        assert!(matches!(relations_from_str(&bad_f, p), Err(PersistError::Relation { .. })));
    }
}
