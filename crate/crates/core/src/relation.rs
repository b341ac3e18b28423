//! Marker groups that tie regions of the front-view image to regions of the
//! model's UV texture, and the distance-threshold fill that colors through them.
//!
//! Each group lists image-canvas markers (`pic_points`) and UV-canvas markers
//! (`word_points`). A fill tap matches a group when it lands strictly closer
//! than `f` image pixels to any of the group's image markers; every matched
//! group is then re-stamped on both canvases in the fill color.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canvas::{BrushStamp, PaintCanvas};
use crate::pixel::{PixelPos, Rect, Rgba};

pub const DEFAULT_F: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationError {
    #[error("missing data: {0} has no markers")]
    MissingData(MissingSide),
    #[error("distance threshold f must be finite and > 0, got {0}")]
    InvalidThreshold(f64),
    #[error("invalid relation group {id}: {reason}")]
    InvalidGroup { id: u32, reason: String },
    #[error("canvas dimensions {got:?} do not match relation set {want:?}")]
    DimensionMismatch { want: (u32, u32), got: (u32, u32) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingSide {
    Image,
    Model,
    Both,
}

impl std::fmt::Display for MissingSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MissingSide::Image => "the image",
            MissingSide::Model => "the model",
            MissingSide::Both => "neither image nor model",
        })
    }
}

/// A marker center plus the brush radius it was painted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerPoint {
    pub x: i32,
    pub y: i32,
    pub radius: u32,
}

impl MarkerPoint {
    pub fn position(&self) -> PixelPos {
        PixelPos::new(self.x, self.y)
    }

    fn from_stamp(stamp: &BrushStamp) -> Self {
        Self {
            x: stamp.center.x,
            y: stamp.center.y,
            radius: stamp.radius,
        }
    }

    fn stamp(&self, color: Rgba) -> BrushStamp {
        BrushStamp::new(self.position(), self.radius, color)
    }
}

/// A saved correspondence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationGroup {
    pub id: u32,
    pub label_color: Rgba,
    pub pic_points: Vec<MarkerPoint>,
    pub word_points: Vec<MarkerPoint>,
}

impl RelationGroup {
    /// True iff some image marker lies strictly closer than `f` to `pos`.
    pub fn have_point(&self, pos: PixelPos, f: f64) -> bool {
        self.pic_points.iter().any(|m| m.position().distance(pos) < f)
    }
}

/// The group being marked, not yet saved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupDraft {
    pub pic_points: Vec<MarkerPoint>,
    pub word_points: Vec<MarkerPoint>,
    pub label_color: Option<Rgba>,
}

impl GroupDraft {
    pub fn record_image_marker(&mut self, stamp: &BrushStamp) {
        self.pic_points.push(MarkerPoint::from_stamp(stamp));
        self.label_color.get_or_insert(stamp.color);
    }

    pub fn record_model_marker(&mut self, stamp: &BrushStamp) {
        self.word_points.push(MarkerPoint::from_stamp(stamp));
        self.label_color.get_or_insert(stamp.color);
    }

    pub fn is_empty(&self) -> bool {
        self.pic_points.is_empty() && self.word_points.is_empty()
    }

    pub fn clear(&mut self) {
        *self = GroupDraft::default();
    }

    fn missing(&self) -> Option<MissingSide> {
        match (self.pic_points.is_empty(), self.word_points.is_empty()) {
            (true, true) => Some(MissingSide::Both),
            (true, false) => Some(MissingSide::Image),
            (false, true) => Some(MissingSide::Model),
            (false, false) => None,
        }
    }
}

/// Saved groups plus the fill threshold and the canvas sizes they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet {
    groups: Vec<RelationGroup>,
    f: f64,
    image_dims: (u32, u32),
    uv_dims: (u32, u32),
}

/// What a fill changed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FillOutcome {
    pub matched: Vec<u32>,
    pub image_dirty: Option<Rect>,
    pub uv_dirty: Option<Rect>,
}

impl RelationSet {
    pub fn new(f: f64, image_dims: (u32, u32), uv_dims: (u32, u32)) -> Result<Self, RelationError> {
        if !(f.is_finite() && f > 0.0) {
            return Err(RelationError::InvalidThreshold(f));
        }
        Ok(Self {
            groups: Vec::new(),
            f,
            image_dims,
            uv_dims,
        })
    }

    /// Rebuilds a set from stored groups, checking every group invariant.
    pub fn from_groups(
        f: f64,
        image_dims: (u32, u32),
        uv_dims: (u32, u32),
        groups: Vec<RelationGroup>,
    ) -> Result<Self, RelationError> {
        let mut set = Self::new(f, image_dims, uv_dims)?;
        let mut last: Option<u32> = None;
        for g in &groups {
            let invalid = |reason: String| RelationError::InvalidGroup { id: g.id, reason };
            if last.is_some_and(|l| g.id <= l) {
                return Err(invalid("ids must be strictly increasing".into()));
            }
            last = Some(g.id);
            if g.pic_points.is_empty() || g.word_points.is_empty() {
                return Err(invalid("a saved group needs image and model markers".into()));
            }
            for (points, (w, h), side) in [
                (&g.pic_points, image_dims, "image"),
                (&g.word_points, uv_dims, "uv"),
            ] {
                if let Some(m) = points.iter().find(|m| m.radius == 0 || !m.position().within(w, h)) {
                    return Err(invalid(format!(
                        "{side} marker ({}, {}) r={} outside a {w}x{h} canvas or zero radius",
                        m.x, m.y, m.radius
                    )));
                }
            }
        }
        set.groups = groups;
        Ok(set)
    }

    pub fn groups(&self) -> &[RelationGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn set_f(&mut self, f: f64) -> Result<(), RelationError> {
        if !(f.is_finite() && f > 0.0) {
            return Err(RelationError::InvalidThreshold(f));
        }
        self.f = f;
        Ok(())
    }

    pub fn image_dims(&self) -> (u32, u32) {
        self.image_dims
    }

    pub fn uv_dims(&self) -> (u32, u32) {
        self.uv_dims
    }

    pub fn group(&self, id: u32) -> Option<&RelationGroup> {
        self.groups
            .binary_search_by_key(&id, |g| g.id)
            .ok()
            .map(|i| &self.groups[i])
    }

    fn next_id(&self) -> u32 {
        self.groups.last().map_or(0, |g| g.id + 1)
    }

    /// Moves a complete draft into the set and resets the draft. A draft
    /// missing either side is rejected and left as it was.
    pub fn save_group(&mut self, draft: &mut GroupDraft) -> Result<u32, RelationError> {
        if let Some(side) = draft.missing() {
            return Err(RelationError::MissingData(side));
        }
        let id = self.next_id();
        let draft = std::mem::take(draft);
        self.groups.push(RelationGroup {
            id,
            label_color: draft.label_color.unwrap_or(Rgba::BLACK),
            pic_points: draft.pic_points,
            word_points: draft.word_points,
        });
        Ok(id)
    }

    /// Ids of every group with an image marker strictly within `f` of `pos`, ascending.
    pub fn lookup_groups(&self, pos: PixelPos) -> Vec<u32> {
        self.groups
            .iter()
            .filter(|g| g.have_point(pos, self.f))
            .map(|g| g.id)
            .collect()
    }

    /// Colors every group matched at `pos` on both canvases, straight into
    /// their base layers.
    pub fn fill(
        &self,
        pos: PixelPos,
        color: Rgba,
        image_canvas: &mut PaintCanvas,
        uv_canvas: &mut PaintCanvas,
    ) -> FillOutcome {
        let ids = self.lookup_groups(pos);
        self.fill_groups(&ids, color, image_canvas, uv_canvas)
    }

    /// Stamps the markers of the given groups. Unknown ids are skipped.
    pub fn fill_groups(
        &self,
        ids: &[u32],
        color: Rgba,
        image_canvas: &mut PaintCanvas,
        uv_canvas: &mut PaintCanvas,
    ) -> FillOutcome {
        let mut out = FillOutcome::default();
        for &id in ids {
            let Some(group) = self.group(id) else { continue };
            for m in &group.pic_points {
                out.image_dirty = Rect::merge(out.image_dirty, image_canvas.stamp_base(&m.stamp(color)));
            }
            for m in &group.word_points {
                out.uv_dirty = Rect::merge(out.uv_dirty, uv_canvas.stamp_base(&m.stamp(color)));
            }
            out.matched.push(id);
        }
        out
    }

    /// Checks that the set was made for canvases of these sizes.
    pub fn check_dims(&self, image_dims: (u32, u32), uv_dims: (u32, u32)) -> Result<(), RelationError> {
        if self.image_dims != image_dims {
            return Err(RelationError::DimensionMismatch {
                want: self.image_dims,
                got: image_dims,
            });
        }
        if self.uv_dims != uv_dims {
            return Err(RelationError::DimensionMismatch {
                want: self.uv_dims,
                got: uv_dims,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marker(x: i32, y: i32, radius: u32) -> MarkerPoint {
        MarkerPoint { x, y, radius }
    }

    fn group_at(x: i32, y: i32) -> RelationGroup {
        RelationGroup {
            id: 0,
            label_color: Rgba::RED,
            pic_points: vec![marker(x, y, 4)],
            word_points: vec![marker(10, 10, 4)],
        }
    }

    #[test]
    fn have_point_is_strict() {
        let g = group_at(100, 100);
        assert!(g.have_point(PixelPos::new(100, 100), 8.0));
        assert!(!g.have_point(PixelPos::new(108, 100), 8.0));
        assert!(g.have_point(PixelPos::new(105, 104), 8.0));
        assert!(g.have_point(PixelPos::new(107, 100), 8.0));
        assert!(!g.have_point(PixelPos::new(109, 100), 8.0));
    }

    #[test]
    fn record_markers_keep_order() {
        let mut d = GroupDraft::default();
        d.record_image_marker(&BrushStamp::new((100, 100), 16, Rgba::RED));
        assert_eq!(d.pic_points, vec![marker(100, 100, 16)]);
        d.record_model_marker(&BrushStamp::new((512, 512), 32, Rgba::RED));
        assert_eq!(d.word_points, vec![marker(512, 512, 32)]);
        for i in 0..50 {
            d.record_image_marker(&BrushStamp::new((i, 2 * i), 3, Rgba::RED));
        }
        assert_eq!(d.pic_points.len(), 51);
        assert!(d.pic_points[1..].iter().enumerate().all(|(i, m)| m.x == i as i32 && m.y == 2 * i as i32));
    }

    #[test]
    fn save_assigns_sequential_ids_and_resets_draft() {
        let mut set = RelationSet::new(8.0, (600, 600), (1024, 1024)).unwrap();
        let mut d = GroupDraft::default();
        for i in 0..3 {
            d.record_image_marker(&BrushStamp::new((10 + i, 10), 4, Rgba::RED));
        }
        for i in 0..5 {
            d.record_model_marker(&BrushStamp::new((100 + i, 10), 4, Rgba::RED));
        }
        assert_eq!(set.save_group(&mut d), Ok(0));
        assert!(d.is_empty());
        assert_eq!(set.groups()[0].pic_points.len(), 3);
        assert_eq!(set.groups()[0].word_points.len(), 5);
        d.record_image_marker(&BrushStamp::new((1, 1), 4, Rgba::RED));
        d.record_model_marker(&BrushStamp::new((1, 1), 4, Rgba::RED));
        assert_eq!(set.save_group(&mut d), Ok(1));
    }

    #[test]
    fn save_rejects_missing_side_without_mutation() {
        let mut set = RelationSet::new(8.0, (600, 600), (1024, 1024)).unwrap();
        let mut d = GroupDraft::default();
        d.record_model_marker(&BrushStamp::new((5, 5), 4, Rgba::RED));
        let before = d.clone();
        assert_eq!(set.save_group(&mut d), Err(RelationError::MissingData(MissingSide::Image)));
        assert_eq!(d, before);
        let mut d = GroupDraft::default();
        d.record_image_marker(&BrushStamp::new((5, 5), 4, Rgba::RED));
        assert_eq!(set.save_group(&mut d), Err(RelationError::MissingData(MissingSide::Model)));
        assert_eq!(
            set.save_group(&mut GroupDraft::default()),
            Err(RelationError::MissingData(MissingSide::Both))
        );
        assert!(set.is_empty());
    }

    #[test]
    fn threshold_must_be_positive() {
        for f in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(RelationSet::new(f, (1, 1), (1, 1)).is_err());
        }
    }

    #[test]
    fn lookup_returns_all_matches_ascending() {
        let groups = vec![
            RelationGroup { id: 0, ..group_at(100, 100) },
            RelationGroup { id: 1, ..group_at(300, 300) },
            RelationGroup { id: 2, ..group_at(104, 100) },
        ];
        let set = RelationSet::from_groups(8.0, (600, 600), (64, 64), groups).unwrap();
        assert_eq!(set.lookup_groups(PixelPos::new(102, 100)), vec![0, 2]);
        assert_eq!(set.lookup_groups(PixelPos::new(300, 305)), vec![1]);
        assert!(set.lookup_groups(PixelPos::new(500, 500)).is_empty());
    }

    #[test]
    fn from_groups_validates() {
        let dup = vec![group_at(1, 1), group_at(2, 2)];
        assert!(RelationSet::from_groups(8.0, (600, 600), (64, 64), dup).is_err());
        let outside = vec![group_at(700, 1)];
        assert!(RelationSet::from_groups(8.0, (600, 600), (64, 64), outside).is_err());
        let mut empty = group_at(1, 1);
        empty.word_points.clear();
        assert!(RelationSet::from_groups(8.0, (600, 600), (64, 64), vec![empty]).is_err());
    }

    #[test]
    fn fill_stamps_both_canvases_and_is_idempotent() {
        let set = RelationSet::from_groups(8.0, (64, 64), (64, 64), vec![group_at(20, 20)]).unwrap();
        let mut image = PaintCanvas::new(64, 64, Rgba::WHITE, None).unwrap();
        let mut uv = PaintCanvas::new(64, 64, Rgba::WHITE, None).unwrap();
        let out = set.fill(PixelPos::new(23, 20), Rgba::RED, &mut image, &mut uv);
        assert_eq!(out.matched, vec![0]);
        assert_eq!(image.base().get_pixel(20, 20).0, Rgba::RED.0);
        assert_eq!(uv.base().get_pixel(10, 10).0, Rgba::RED.0);
        let (i1, u1) = (image.base().clone(), uv.base().clone());
        set.fill(PixelPos::new(23, 20), Rgba::RED, &mut image, &mut uv);
        assert_eq!((image.base(), uv.base()), (&i1, &u1));

        let miss = set.fill(PixelPos::new(50, 50), Rgba::BLACK, &mut image, &mut uv);
        assert!(miss.matched.is_empty() && miss.uv_dirty.is_none());
        assert_eq!((image.base(), uv.base()), (&i1, &u1));
    }
}
