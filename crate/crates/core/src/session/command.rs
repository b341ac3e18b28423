use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geometry::CameraSpec;
use crate::pixel::{Rect, Rgba};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Creator,
    User,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Creator => "creator",
            Mode::User => "user",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanvasKind {
    Image,
    Uv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportTarget {
    /// Composite of the image canvas as PNG.
    Image,
    /// Composite of the UV canvas as PNG.
    Uv,
    /// OBJ + MTL + texture directory.
    Model,
    /// Relation file.
    Relations,
}

/// One step of the creator/user workflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    SetMode { mode: Mode },
    SetColor { color: Rgba },
    SetBrushRadius { radius: u32 },
    /// Screen pixels raycast through the current camera.
    StrokeModelScreen { points: Vec<[i64; 2]> },
    /// Texture coordinates, bypassing the camera.
    StrokeModelUv { points: Vec<[f64; 2]> },
    StrokeImage { points: Vec<[i32; 2]> },
    SetCamera { camera: CameraSpec },
    Revoke {},
    SaveGroup {},
    Fill { point: [i32; 2] },
    Export { target: ExportTarget, path: PathBuf },
}

impl Command {
    pub const NAMES: &'static [&'static str] = &[
        "set_mode",
        "set_color",
        "set_brush_radius",
        "stroke_model_screen",
        "stroke_model_uv",
        "stroke_image",
        "set_camera",
        "revoke",
        "save_group",
        "fill",
        "export",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::SetMode { .. } => "set_mode",
            Command::SetColor { .. } => "set_color",
            Command::SetBrushRadius { .. } => "set_brush_radius",
            Command::StrokeModelScreen { .. } => "stroke_model_screen",
            Command::StrokeModelUv { .. } => "stroke_model_uv",
            Command::StrokeImage { .. } => "stroke_image",
            Command::SetCamera { .. } => "set_camera",
            Command::Revoke {} => "revoke",
            Command::SaveGroup {} => "save_group",
            Command::Fill { .. } => "fill",
            Command::Export { .. } => "export",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirtyRegion {
    pub canvas: CanvasKind,
    pub rect: Rect,
}

/// What a command changed. Fields that do not apply are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandOutcome {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dirty: Vec<DirtyRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamps_added: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub committed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<Vec<u32>>,
    /// Matched groups left alone because they were already filled in another color.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locked: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exported: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CommandOutcome {
    pub(crate) fn mark_dirty(&mut self, canvas: CanvasKind, rect: Option<Rect>) {
        if let Some(rect) = rect {
            match self.dirty.iter_mut().find(|d| d.canvas == canvas) {
                Some(d) => d.rect = d.rect.union(&rect),
                None => self.dirty.push(DirtyRegion { canvas, rect }),
            }
        }
    }

    pub fn dirty_rect(&self, canvas: CanvasKind) -> Option<Rect> {
        self.dirty.iter().find(|d| d.canvas == canvas).map(|d| d.rect)
    }
}

/// An ordered command list with its replay options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Script {
    pub camera: Option<CameraSpec>,
    pub continue_on_error: bool,
    pub commands: Vec<Command>,
}

impl Script {
    pub fn new(commands: Vec<Command>) -> Self {
        Self {
            commands,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub command: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<CommandOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

/// Per-command record of a script run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    /// Index of the command that stopped the run, if one did.
    pub aborted_at: Option<usize>,
}

impl Transcript {
    /// Ran to the end (failures allowed only under continue-on-error).
    pub fn completed(&self) -> bool {
        self.aborted_at.is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(|e| !e.ok)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.as_ref())
            .flat_map(|o| o.warnings.iter().map(String::as_str))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let c: Command = serde_json::from_str(r#"{"cmd":"stroke_image","points":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(c, Command::StrokeImage { points: vec![[1, 2], [3, 4]] });
        let c: Command = serde_json::from_str(r#"{"cmd":"revoke"}"#).unwrap();
        assert_eq!(c.name(), "revoke");
        assert!(serde_json::from_str::<Command>(r#"{"cmd":"revoke","extra":1}"#).is_err());
        assert!(serde_json::from_str::<Command>(r#"{"cmd":"set_mode","mode":"admin"}"#).is_err());
        let json = serde_json::to_string(&Command::SetMode { mode: Mode::User }).unwrap();
        assert_eq!(json, r#"{"cmd":"set_mode","mode":"user"}"#);
    }

    #[test]
    fn names_cover_every_variant() {
        for name in Command::NAMES {
            let probe = format!(r#"{{"cmd":"{name}"}}"#);
            // Either parses (unit variants) or fails on a missing field, never on the tag.
            if let Err(e) = serde_json::from_str::<Command>(&probe) {
                assert!(e.to_string().contains("missing field"), "{name}: {e}");
            }
        }
    }
}
