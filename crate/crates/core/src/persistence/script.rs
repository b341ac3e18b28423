//! Script file (`*.paintscript.json`).
//!
//! ```json
//! { "version": 1, "continue_on_error": false,
//!   "camera": { "position": [0, 3, 0], "target": [0, 0, 0], "up": [0, 0, -1],
//!               "vfov_degrees": 60, "viewport": [800, 800] },
//!   "commands": [ { "cmd": "stroke_image", "points": [[300, 60]] },
//!                 { "cmd": "save_group" } ] }
//! ```
//!
//! Records are numbered from 0 in diagnostics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, PersistError, Result};
use crate::geometry::CameraSpec;
use crate::session::{Command, Script};

pub const SCRIPT_FILE_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptHeader {
    version: u32,
    #[serde(default)]
    camera: Option<CameraSpec>,
    #[serde(default)]
    continue_on_error: bool,
    commands: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct ScriptOut<'a> {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    camera: Option<&'a CameraSpec>,
    continue_on_error: bool,
    commands: &'a [Command],
}

pub fn script_to_string(script: &Script) -> String {
    serde_json::to_string_pretty(&ScriptOut {
        version: SCRIPT_FILE_VERSION,
        camera: script.camera.as_ref(),
        continue_on_error: script.continue_on_error,
        commands: &script.commands,
    })
    .expect("script serializes")
}

/// Parses script text. `path` only labels diagnostics.
pub fn parse_script_str(text: &str, path: &Path) -> Result<Script> {
    let header: ScriptHeader = serde_json::from_str(text).map_err(|e| PersistError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if header.version != SCRIPT_FILE_VERSION {
        return Err(PersistError::Version {
            path: path.to_path_buf(),
            found: header.version.to_string(),
            expected: SCRIPT_FILE_VERSION,
        });
    }
    let commands = header
        .commands
        .into_iter()
        .enumerate()
        .map(|(index, record)| {
            let bad = |message: String| PersistError::BadRecord {
                path: path.to_path_buf(),
                index,
                message,
            };
            let name = record
                .get("cmd")
                .ok_or_else(|| bad("missing \"cmd\"".into()))?
                .as_str()
                .ok_or_else(|| bad("\"cmd\" must be a string".into()))?;
            if !Command::NAMES.contains(&name) {
                return Err(PersistError::UnknownCommand {
                    path: path.to_path_buf(),
                    index,
                    name: name.to_string(),
                });
            }
            serde_json::from_value(record).map_err(|e| bad(e.to_string()))
        })
        .collect::<Result<Vec<Command>>>()?;
    Ok(Script {
        camera: header.camera,
        continue_on_error: header.continue_on_error,
        commands,
    })
}

pub fn parse_script(path: &Path) -> Result<Script> {
    parse_script_str(&read_text(path)?, path)
}
