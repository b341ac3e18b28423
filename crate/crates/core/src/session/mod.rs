//! Deterministic interpreter for the creator/user workflow.
//!
//! A [`Session`] owns the mesh, both canvases, the saved relations and the
//! group being marked. Every state change goes through [`Session::apply`],
//! which either applies a [`Command`] completely or leaves the session as it
//! was and returns an error.

mod command;

pub use command::{
    CanvasKind, Command, CommandOutcome, DirtyRegion, ErrorInfo, ExportTarget, Mode, Script, Transcript,
    TranscriptEntry,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::RgbaImage;
use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use crate::canvas::{BrushStamp, CanvasError, PaintCanvas, StampLimits, DEFAULT_UV_CANVAS_SIZE};
use crate::geometry::{uv_to_pixel, AccelIndex, Camera, CameraSpec, GeometryError, Mesh, DEFAULT_MAX_T};
use crate::persistence::{self, PersistError};
use crate::pixel::{PixelPos, Rgba};
use crate::relation::{GroupDraft, MissingSide, RelationError, RelationSet, DEFAULT_F};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{command} is not available in {mode} mode")]
    Mode { command: &'static str, mode: Mode },
    #[error("missing data: {0} has no markers")]
    MissingData(MissingSide),
    #[error("{0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Canvas(CanvasError),
    #[error(transparent)]
    Relation(RelationError),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

impl From<CanvasError> for SessionError {
    fn from(e: CanvasError) -> Self {
        match e {
            CanvasError::RadiusOutOfRange { .. } | CanvasError::TranslucentStamp(_) => SessionError::Range(e.to_string()),
            other => SessionError::Canvas(other),
        }
    }
}

impl From<RelationError> for SessionError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::MissingData(side) => SessionError::MissingData(side),
            other => SessionError::Relation(other),
        }
    }
}

impl SessionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Mode { .. } => "MODE",
            SessionError::MissingData(_) => "MISSING_DATA",
            SessionError::Range(_) => "RANGE",
            SessionError::Geometry(GeometryError::PixelOutOfViewport { .. }) => "RANGE",
            SessionError::Persist(PersistError::Io { .. }) => "IO",
            _ => "INVALID",
        }
    }

    pub fn info(&self) -> ErrorInfo {
        ErrorInfo {
            code: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

pub type Result<T, E = SessionError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub uv_width: u32,
    pub uv_height: u32,
    pub f: f64,
    pub min_radius: u32,
    pub max_radius: u32,
    pub default_radius: u32,
    pub pending_warn_threshold: usize,
    pub max_t: f64,
    pub camera: CameraSpec,
    pub default_color: Rgba,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            uv_width: DEFAULT_UV_CANVAS_SIZE,
            uv_height: DEFAULT_UV_CANVAS_SIZE,
            f: DEFAULT_F,
            min_radius: 1,
            max_radius: 32,
            default_radius: 32,
            pending_warn_threshold: 3000,
            max_t: DEFAULT_MAX_T,
            camera: CameraSpec {
                position: Vector3::new(0.0, 0.0, 3.0),
                target: Vector3::zeros(),
                up: Vector3::y(),
                vfov_degrees: 60.0,
                viewport: [800, 800],
            },
            default_color: Rgba::RED,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SessionError::Config(m));
        if self.uv_width == 0 || self.uv_height == 0 {
            return bad("uv canvas must be at least 1x1".into());
        }
        if !(self.f.is_finite() && self.f > 0.0) {
            return bad(format!("f must be finite and > 0, got {}", self.f));
        }
        if self.min_radius == 0 || self.min_radius > self.max_radius {
            return bad(format!("radius range [{}, {}] is empty or includes 0", self.min_radius, self.max_radius));
        }
        if !(self.min_radius..=self.max_radius).contains(&self.default_radius) {
            return bad(format!("default radius {} outside range", self.default_radius));
        }
        if self.pending_warn_threshold == 0 {
            return bad("pending warn threshold must be positive".into());
        }
        if !(self.max_t.is_finite() && self.max_t > 0.0) {
            return bad(format!("max_t must be finite and > 0, got {}", self.max_t));
        }
        if !self.default_color.is_opaque() {
            return bad("default color must be opaque".into());
        }
        Camera::new(self.camera)?;
        Ok(())
    }

    fn limits(&self) -> StampLimits {
        StampLimits {
            min_radius: self.min_radius,
            max_radius: self.max_radius,
            warn_threshold: self.pending_warn_threshold,
        }
    }
}

pub struct Session {
    config: SessionConfig,
    mode: Mode,
    mesh: Mesh,
    accel: AccelIndex,
    camera: Camera,
    image: PaintCanvas,
    uv: PaintCanvas,
    relations: RelationSet,
    draft: GroupDraft,
    color: Rgba,
    radius: u32,
    filled: BTreeMap<u32, Rgba>,
    export_root: Option<PathBuf>,
}

impl Session {
    /// Starts in Creator mode with a white UV canvas and an image canvas
    /// whose base is `image`.
    pub fn new(config: SessionConfig, mesh: Mesh, image: RgbaImage, overlay: Option<RgbaImage>) -> Result<Self> {
        config.validate()?;
        let limits = config.limits();
        let image = PaintCanvas::with_base(image, overlay)?.with_limits(limits);
        let uv = PaintCanvas::new(config.uv_width, config.uv_height, Rgba::WHITE, None)?.with_limits(limits);
        let relations = RelationSet::new(config.f, image.dimensions(), uv.dimensions())?;
        Ok(Self {
            accel: AccelIndex::build(&mesh),
            camera: Camera::new(config.camera)?,
            mode: Mode::Creator,
            mesh,
            image,
            uv,
            relations,
            draft: GroupDraft::default(),
            color: config.default_color,
            radius: config.default_radius,
            filled: BTreeMap::new(),
            export_root: None,
            config,
        })
    }

    /// Relative export paths resolve against this directory.
    pub fn set_export_root(&mut self, dir: impl Into<PathBuf>) {
        self.export_root = Some(dir.into());
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn color(&self) -> Rgba {
        self.color
    }

    pub fn brush_radius(&self) -> u32 {
        self.radius
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn accel(&self) -> &AccelIndex {
        &self.accel
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn image_canvas(&self) -> &PaintCanvas {
        &self.image
    }

    pub fn uv_canvas(&self) -> &PaintCanvas {
        &self.uv
    }

    pub fn canvas(&self, kind: CanvasKind) -> &PaintCanvas {
        match kind {
            CanvasKind::Image => &self.image,
            CanvasKind::Uv => &self.uv,
        }
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    pub fn draft(&self) -> &GroupDraft {
        &self.draft
    }

    /// Swaps in a stored relation set made for canvases of the same sizes.
    pub fn replace_relations(&mut self, set: RelationSet) -> Result<()> {
        set.check_dims(self.image.dimensions(), self.uv.dimensions())?;
        self.relations = set;
        self.filled.clear();
        Ok(())
    }

    fn require(&self, mode: Mode, command: &'static str) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(SessionError::Mode {
                command,
                mode: self.mode,
            })
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.export_root {
            Some(root) if path.is_relative() => root.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Applies one command. On error the session is unchanged.
    pub fn apply(&mut self, command: &Command) -> Result<CommandOutcome> {
        let name = command.name();
        let mut out = CommandOutcome::default();
        match command {
            Command::SetMode { mode } => {
                if self.mode == Mode::Creator && *mode == Mode::User {
                    let discarded = self.image.pending().len() + self.uv.pending().len();
                    if discarded > 0 || !self.draft.is_empty() {
                        let msg = format!("switching to user mode discarded {discarded} unsaved stamps");
                        log::warn!("{msg}");
                        out.warnings.push(msg);
                    }
                    self.revoke_all(&mut out);
                }
                self.mode = *mode;
            }
            Command::SetColor { color } => {
                if !color.is_opaque() {
                    return Err(SessionError::Range(format!("color {color} is not opaque")));
                }
                self.color = *color;
            }
            Command::SetBrushRadius { radius } => {
                self.config.limits().check_radius(*radius)?;
                self.radius = *radius;
            }
            Command::SetCamera { camera } => {
                self.camera = Camera::new(*camera)?;
            }
            Command::StrokeModelScreen { points } => {
                self.require(Mode::Creator, name)?;
                let rays = points
                    .iter()
                    .map(|&[x, y]| self.camera.screen_ray(x, y))
                    .collect::<Result<Vec<_>, _>>()?;
                let hits = self.accel.intersect_batch(&self.mesh, &rays, self.config.max_t);
                let (w, h) = self.uv.dimensions();
                let centers: Vec<PixelPos> = hits
                    .iter()
                    .flatten()
                    .map(|hit| {
                        let (px, py) = uv_to_pixel(hit.uv, w, h);
                        PixelPos::new(px as i32, py as i32)
                    })
                    .collect();
                out.missed = Some(points.len() - centers.len());
                self.stamp_model(&centers, &mut out)?;
            }
            Command::StrokeModelUv { points } => {
                self.require(Mode::Creator, name)?;
                if let Some(p) = points.iter().find(|p| !p.iter().all(|c| c.is_finite())) {
                    return Err(SessionError::Range(format!("uv {p:?} is not finite")));
                }
                let (w, h) = self.uv.dimensions();
                let centers: Vec<PixelPos> = points
                    .iter()
                    .map(|&[u, v]| {
                        let (px, py) = uv_to_pixel(Vector2::new(u, v), w, h);
                        PixelPos::new(px as i32, py as i32)
                    })
                    .collect();
                self.stamp_model(&centers, &mut out)?;
            }
            Command::StrokeImage { points } => {
                self.require(Mode::Creator, name)?;
                let (w, h) = self.image.dimensions();
                let centers: Vec<PixelPos> = points.iter().map(|&[x, y]| PixelPos::new(x, y)).collect();
                if let Some(p) = centers.iter().find(|p| !p.within(w, h)) {
                    return Err(SessionError::Range(format!(
                        "image point ({}, {}) outside {w}x{h} canvas",
                        p.x, p.y
                    )));
                }
                let stamps: Vec<BrushStamp> = centers
                    .iter()
                    .map(|&c| BrushStamp::new(c, self.radius, self.color))
                    .collect();
                for s in &stamps {
                    let receipt = self.image.add_pending_stamp(*s)?;
                    self.draft.record_image_marker(s);
                    out.mark_dirty(CanvasKind::Image, receipt.dirty);
                    if receipt.crossed_warn_threshold {
                        out.warnings.push(threshold_warning(CanvasKind::Image, receipt.count));
                    }
                }
                out.stamps_added = Some(stamps.len());
                out.pending = Some(self.image.pending().len());
            }
            Command::Revoke {} => {
                self.require(Mode::Creator, name)?;
                self.revoke_all(&mut out);
            }
            Command::SaveGroup {} => {
                self.require(Mode::Creator, name)?;
                self.draft.label_color.get_or_insert(self.color);
                let id = self.relations.save_group(&mut self.draft)?;
                out.committed = Some(self.image.commit_pending() + self.uv.commit_pending());
                out.group_id = Some(id);
            }
            Command::Fill { point } => {
                self.require(Mode::User, name)?;
                let pos = PixelPos::new(point[0], point[1]);
                let (w, h) = self.image.dimensions();
                if !pos.within(w, h) {
                    return Err(SessionError::Range(format!(
                        "fill point ({}, {}) outside {w}x{h} image",
                        pos.x, pos.y
                    )));
                }
                let matched = self.relations.lookup_groups(pos);
                let (open, locked): (Vec<u32>, Vec<u32>) = matched
                    .iter()
                    .partition(|id| self.filled.get(id).is_none_or(|c| *c == self.color));
                let fill = self
                    .relations
                    .fill_groups(&open, self.color, &mut self.image, &mut self.uv);
                for id in &open {
                    self.filled.insert(*id, self.color);
                }
                out.mark_dirty(CanvasKind::Image, fill.image_dirty);
                out.mark_dirty(CanvasKind::Uv, fill.uv_dirty);
                out.matched = Some(matched);
                out.locked = locked;
            }
            Command::Export { target, path } => {
                let path = self.resolve(path);
                match target {
                    ExportTarget::Image => {
                        persistence::export_png(&self.image.composite(), &path)?;
                        out.exported.push(path);
                    }
                    ExportTarget::Uv => {
                        persistence::export_png(&self.uv.composite(), &path)?;
                        out.exported.push(path);
                    }
                    ExportTarget::Model => {
                        let paths = persistence::export_colored_model(&self.mesh, &self.uv.composite(), &path)?;
                        out.exported.extend([paths.obj, paths.mtl, paths.texture]);
                    }
                    ExportTarget::Relations => {
                        persistence::save_relations(&self.relations, &path)?;
                        out.exported.push(path);
                    }
                }
            }
        }
        Ok(out)
    }

    fn stamp_model(&mut self, centers: &[PixelPos], out: &mut CommandOutcome) -> Result<()> {
        for &c in centers {
            let stamp = BrushStamp::new(c, self.radius, self.color);
            let receipt = self.uv.add_pending_stamp(stamp)?;
            self.draft.record_model_marker(&stamp);
            out.mark_dirty(CanvasKind::Uv, receipt.dirty);
            if receipt.crossed_warn_threshold {
                out.warnings.push(threshold_warning(CanvasKind::Uv, receipt.count));
            }
        }
        out.stamps_added = Some(centers.len());
        out.pending = Some(self.uv.pending().len());
        Ok(())
    }

    fn revoke_all(&mut self, out: &mut CommandOutcome) {
        out.mark_dirty(CanvasKind::Image, self.image.pending_bounds());
        out.mark_dirty(CanvasKind::Uv, self.uv.pending_bounds());
        out.removed = Some(self.image.revoke_pending() + self.uv.revoke_pending());
        self.draft.clear();
    }

    /// Applies `script` in order, stopping at the first failure unless the
    /// script continues on error.
    pub fn run_script(&mut self, script: &Script) -> Transcript {
        let mut transcript = Transcript::default();
        if let Some(camera) = script.camera {
            if let Err(e) = Camera::new(camera).map(|c| self.camera = c) {
                transcript.entries.push(TranscriptEntry {
                    index: 0,
                    command: "header.camera".into(),
                    ok: false,
                    outcome: None,
                    error: Some(SessionError::from(e).info()),
                });
                transcript.aborted_at = Some(0);
                return transcript;
            }
        }
        for (index, command) in script.commands.iter().enumerate() {
            let result = self.apply(command);
            let failed = result.is_err();
            let (outcome, error) = match result {
                Ok(o) => (Some(o), None),
                Err(e) => {
                    log::info!("command {index} ({}) failed: {e}", command.name());
                    (None, Some(e.info()))
                }
            };
            transcript.entries.push(TranscriptEntry {
                index,
                command: command.name().to_string(),
                ok: !failed,
                outcome,
                error,
            });
            if failed && !script.continue_on_error {
                transcript.aborted_at = Some(index);
                break;
            }
        }
        transcript
    }
}

fn threshold_warning(canvas: CanvasKind, count: usize) -> String {
    let name = match canvas {
        CanvasKind::Image => "image",
        CanvasKind::Uv => "uv",
    };
    format!("{count} pending stamps on the {name} canvas exceed the soft limit; save to merge them")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lat_long_sphere;

    fn session() -> Session {
        let image = RgbaImage::from_pixel(64, 64, image::Rgba([255; 4]));
        let config = SessionConfig {
            uv_width: 128,
            uv_height: 128,
            ..SessionConfig::default()
        };
        Session::new(config, lat_long_sphere(16, 8, 1.0), image, None).unwrap()
    }

    #[test]
    fn starts_in_creator_mode() {
        let s = session();
        assert_eq!(s.mode(), Mode::Creator);
        assert_eq!(s.uv_canvas().dimensions(), (128, 128));
        assert_eq!(s.image_canvas().dimensions(), (64, 64));
        assert!(s.relations().is_empty());
        assert_eq!(s.brush_radius(), 32);
    }

    #[test]
    fn overlay_mismatch_and_bad_config_rejected() {
        let image = RgbaImage::new(64, 64);
        let mesh = lat_long_sphere(8, 4, 1.0);
        assert!(Session::new(SessionConfig::default(), mesh.clone(), image.clone(), Some(RgbaImage::new(8, 8))).is_err());
        let cfg = SessionConfig { f: 0.0, ..SessionConfig::default() };
        assert!(matches!(Session::new(cfg, mesh, image, None), Err(SessionError::Config(_))));
    }

    #[test]
    fn mode_gating() {
        let mut s = session();
        assert_eq!(s.apply(&Command::Fill { point: [1, 1] }).unwrap_err().code(), "MODE");
        s.apply(&Command::SetMode { mode: Mode::User }).unwrap();
        for c in [
            Command::StrokeImage { points: vec![[1, 1]] },
            Command::StrokeModelUv { points: vec![[0.5, 0.5]] },
            Command::StrokeModelScreen { points: vec![[400, 400]] },
            Command::Revoke {},
            Command::SaveGroup {},
        ] {
            assert_eq!(s.apply(&c).unwrap_err().code(), "MODE", "{}", c.name());
        }
        assert!(s.draft().is_empty());
        assert!(s.uv_canvas().pending().is_empty() && s.image_canvas().pending().is_empty());
    }

    #[test]
    fn radius_range_enforced() {
        let mut s = session();
        assert_eq!(s.apply(&Command::SetBrushRadius { radius: 0 }).unwrap_err().code(), "RANGE");
        assert_eq!(s.apply(&Command::SetBrushRadius { radius: 33 }).unwrap_err().code(), "RANGE");
        s.apply(&Command::SetBrushRadius { radius: 5 }).unwrap();
        assert_eq!(s.brush_radius(), 5);
        assert_eq!(s.apply(&Command::SetColor { color: Rgba([1, 1, 1, 7]) }).unwrap_err().code(), "RANGE");
    }

    #[test]
    fn stroke_image_out_of_bounds_is_atomic() {
        let mut s = session();
        let err = s.apply(&Command::StrokeImage { points: vec![[1, 1], [64, 3]] }).unwrap_err();
        assert_eq!(err.code(), "RANGE");
        assert!(s.image_canvas().pending().is_empty() && s.draft().is_empty());
    }

    #[test]
    fn screen_stroke_counts_misses() {
        let mut s = session();
        // Corners of the default view miss the unit sphere; the center hits.
        let out = s
            .apply(&Command::StrokeModelScreen { points: vec![[400, 400], [0, 0], [799, 799]] })
            .unwrap();
        assert_eq!(out.missed, Some(2));
        assert_eq!(out.stamps_added, Some(1));
        assert_eq!(s.draft().word_points.len(), 1);
        assert_eq!(s.apply(&Command::StrokeModelScreen { points: vec![[800, 0]] }).unwrap_err().code(), "RANGE");
    }

    #[test]
    fn revoke_clears_pending_and_draft() {
        let mut s = session();
        s.apply(&Command::StrokeImage { points: vec![[10, 10], [20, 20]] }).unwrap();
        s.apply(&Command::StrokeModelUv { points: vec![[0.5, 0.5]] }).unwrap();
        let out = s.apply(&Command::Revoke {}).unwrap();
        assert_eq!(out.removed, Some(3));
        assert_eq!(out.dirty.len(), 2);
        assert!(s.draft().is_empty());
        assert_eq!(&s.image_canvas().composite(), s.image_canvas().base());
        assert_eq!(&s.uv_canvas().composite(), s.uv_canvas().base());
    }

    #[test]
    fn switching_to_user_discards_unsaved_work() {
        let mut s = session();
        s.apply(&Command::StrokeImage { points: vec![[10, 10]] }).unwrap();
        let out = s.apply(&Command::SetMode { mode: Mode::User }).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert!(s.draft().is_empty() && s.image_canvas().pending().is_empty());
    }

    #[test]
    fn save_missing_data_leaves_state() {
        let mut s = session();
        s.apply(&Command::StrokeModelUv { points: vec![[0.5, 0.5]] }).unwrap();
        let err = s.apply(&Command::SaveGroup {}).unwrap_err();
        assert_eq!(err.code(), "MISSING_DATA");
        assert_eq!(s.uv_canvas().pending().len(), 1);
        assert_eq!(s.draft().word_points.len(), 1);
        assert!(s.relations().is_empty());
    }

    #[test]
    fn fill_locks_group_to_first_color() {
        let mut s = session();
        s.apply(&Command::StrokeImage { points: vec![[10, 10]] }).unwrap();
        s.apply(&Command::StrokeModelUv { points: vec![[0.5, 0.5]] }).unwrap();
        assert_eq!(s.apply(&Command::SaveGroup {}).unwrap().group_id, Some(0));
        s.apply(&Command::SetMode { mode: Mode::User }).unwrap();
        s.apply(&Command::SetColor { color: Rgba::rgb(0, 0, 255) }).unwrap();
        let out = s.apply(&Command::Fill { point: [12, 10] }).unwrap();
        assert_eq!(out.matched, Some(vec![0]));
        assert!(out.locked.is_empty());
        let blue = s.uv_canvas().base().clone();
        s.apply(&Command::SetColor { color: Rgba::RED }).unwrap();
        let out = s.apply(&Command::Fill { point: [12, 10] }).unwrap();
        assert_eq!(out.locked, vec![0]);
        assert!(out.dirty.is_empty());
        assert_eq!(s.uv_canvas().base(), &blue);
    }

    #[test]
    fn script_aborts_with_index_unless_continuing() {
        let mut s = session();
        let cmds = vec![
            Command::SetBrushRadius { radius: 4 },
            Command::SaveGroup {},
            Command::SetBrushRadius { radius: 5 },
        ];
        let t = s.run_script(&Script::new(cmds.clone()));
        assert_eq!(t.aborted_at, Some(1));
        assert_eq!(t.entries.len(), 2);
        assert_eq!(t.entries[1].error.as_ref().unwrap().code, "MISSING_DATA");
        let mut s = session();
        let t = s.run_script(&Script {
            continue_on_error: true,
            ..Script::new(cmds)
        });
        assert!(t.completed());
        assert_eq!(t.failures().count(), 1);
        assert_eq!(s.brush_radius(), 5);
        assert!(session().run_script(&Script::default()).entries.is_empty());
    }
}
