//! Paintable RGBA canvases.
//!
//! A canvas has a committed base layer, an ordered list of pending stamps that
//! can be revoked as a whole, and an optional display-only overlay that is
//! alpha-blended above the paint. [`PaintCanvas::composite`] is the only way
//! to observe what the canvas looks like.

mod stamp;

pub use stamp::{rasterize_stamp, BrushStamp};

use image::RgbaImage;
use thiserror::Error;

use crate::pixel::{Rect, Rgba};

pub const DEFAULT_UV_CANVAS_SIZE: u32 = 1024;
pub const DEFAULT_MAX_RADIUS: u32 = 32;
pub const DEFAULT_PENDING_WARN: usize = 3000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanvasError {
    #[error("canvas dimensions must be at least 1x1, got {width}x{height}")]
    EmptyCanvas { width: u32, height: u32 },
    #[error("overlay is {got_w}x{got_h} but canvas is {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("brush radius {radius} outside [{min}, {max}]")]
    RadiusOutOfRange { radius: u32, min: u32, max: u32 },
    #[error("brush color {0} is not opaque")]
    TranslucentStamp(Rgba),
}

/// Radius range and soft pending-count limit applied to pending stamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StampLimits {
    pub min_radius: u32,
    pub max_radius: u32,
    pub warn_threshold: usize,
}

impl Default for StampLimits {
    fn default() -> Self {
        Self {
            min_radius: 1,
            max_radius: DEFAULT_MAX_RADIUS,
            warn_threshold: DEFAULT_PENDING_WARN,
        }
    }
}

impl StampLimits {
    pub fn check_radius(&self, radius: u32) -> Result<(), CanvasError> {
        if (self.min_radius..=self.max_radius).contains(&radius) {
            Ok(())
        } else {
            Err(CanvasError::RadiusOutOfRange {
                radius,
                min: self.min_radius,
                max: self.max_radius,
            })
        }
    }
}

/// Result of [`PaintCanvas::add_pending_stamp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingReceipt {
    pub count: usize,
    /// Set only on the stamp that first pushes the count past the warn threshold.
    pub crossed_warn_threshold: bool,
    pub dirty: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaintCanvas {
    base: RgbaImage,
    pending: Vec<BrushStamp>,
    overlay: Option<RgbaImage>,
    background: Rgba,
    limits: StampLimits,
    warned: bool,
}

fn check_dims(canvas: (u32, u32), other: &RgbaImage) -> Result<(), CanvasError> {
    let (gw, gh) = other.dimensions();
    if (gw, gh) != canvas {
        return Err(CanvasError::DimensionMismatch {
            want_w: canvas.0,
            want_h: canvas.1,
            got_w: gw,
            got_h: gh,
        });
    }
    Ok(())
}

impl PaintCanvas {
    /// A canvas filled with `background`.
    pub fn new(width: u32, height: u32, background: Rgba, overlay: Option<RgbaImage>) -> Result<Self, CanvasError> {
        if width == 0 || height == 0 {
            return Err(CanvasError::EmptyCanvas { width, height });
        }
        let base = RgbaImage::from_pixel(width, height, image::Rgba(background.0));
        Self::assemble(base, background, overlay)
    }

    /// A canvas whose base layer starts as `base`.
    pub fn with_base(base: RgbaImage, overlay: Option<RgbaImage>) -> Result<Self, CanvasError> {
        let (width, height) = base.dimensions();
        if width == 0 || height == 0 {
            return Err(CanvasError::EmptyCanvas { width, height });
        }
        Self::assemble(base, Rgba::WHITE, overlay)
    }

    fn assemble(base: RgbaImage, background: Rgba, overlay: Option<RgbaImage>) -> Result<Self, CanvasError> {
        if let Some(o) = &overlay {
            check_dims(base.dimensions(), o)?;
        }
        Ok(Self {
            base,
            pending: Vec::new(),
            overlay,
            background,
            limits: StampLimits::default(),
            warned: false,
        })
    }

    pub fn with_limits(mut self, limits: StampLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn width(&self) -> u32 {
        self.base.width()
    }

    pub fn height(&self) -> u32 {
        self.base.height()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.base.dimensions()
    }

    pub fn base(&self) -> &RgbaImage {
        &self.base
    }

    pub fn pending(&self) -> &[BrushStamp] {
        &self.pending
    }

    pub fn overlay(&self) -> Option<&RgbaImage> {
        self.overlay.as_ref()
    }

    pub fn background(&self) -> Rgba {
        self.background
    }

    pub fn limits(&self) -> StampLimits {
        self.limits
    }

    /// Queues a revocable stamp.
    pub fn add_pending_stamp(&mut self, stamp: BrushStamp) -> Result<PendingReceipt, CanvasError> {
        self.limits.check_radius(stamp.radius)?;
        if !stamp.color.is_opaque() {
            return Err(CanvasError::TranslucentStamp(stamp.color));
        }
        self.pending.push(stamp);
        let count = self.pending.len();
        let crossed = !self.warned && count > self.limits.warn_threshold;
        if crossed {
            self.warned = true;
            log::warn!(
                "{count} pending stamps exceed the soft limit of {}; save to merge them",
                self.limits.warn_threshold
            );
        }
        Ok(PendingReceipt {
            count,
            crossed_warn_threshold: crossed,
            dirty: stamp.bounds(self.width(), self.height()),
        })
    }

    /// Bounding rectangle of all pending stamps.
    pub fn pending_bounds(&self) -> Option<Rect> {
        let (w, h) = self.dimensions();
        self.pending
            .iter()
            .fold(None, |acc, s| Rect::merge(acc, s.bounds(w, h)))
    }

    /// Drops every pending stamp. The base layer is untouched.
    pub fn revoke_pending(&mut self) -> usize {
        self.warned = false;
        std::mem::take(&mut self.pending).len()
    }

    /// Rasterizes the pending stamps into the base layer in insertion order.
    pub fn commit_pending(&mut self) -> usize {
        self.warned = false;
        let pending = std::mem::take(&mut self.pending);
        for stamp in &pending {
            rasterize_stamp(&mut self.base, stamp);
        }
        pending.len()
    }

    /// Paints a stamp straight into the base layer, skipping the pending stage
    /// and the radius limits.
    pub fn stamp_base(&mut self, stamp: &BrushStamp) -> Option<Rect> {
        rasterize_stamp(&mut self.base, stamp)
    }

    pub fn set_overlay(&mut self, overlay: RgbaImage) -> Result<(), CanvasError> {
        check_dims(self.dimensions(), &overlay)?;
        self.overlay = Some(overlay);
        Ok(())
    }

    pub fn clear_overlay(&mut self) {
        self.overlay = None;
    }

    /// Base, then pending stamps in order, then the overlay. Rows are
    /// processed in parallel when the `parallel` feature is enabled; the
    /// output is bit-identical to [`Self::composite_seq`].
    pub fn composite(&self) -> RgbaImage {
        let mut out = self.base.clone();
        let width = self.width();
        let row_len = 4 * width as usize;
        let pending = &self.pending;
        let overlay = self.overlay.as_ref().map(|o| o.as_raw().as_slice());
        crate::par::for_each_row(&mut out, row_len, |y, row| {
            for stamp in pending {
                if let Some((x0, x1)) = stamp.row_span(y as u32, width) {
                    stamp::fill_span(row, x0, x1, stamp.color);
                }
            }
            if let Some(o) = overlay {
                blend_row(row, &o[y * row_len..(y + 1) * row_len]);
            }
        });
        out
    }

    /// Stamp-by-stamp reference compositor.
    pub fn composite_seq(&self) -> RgbaImage {
        let mut out = self.base.clone();
        for stamp in &self.pending {
            rasterize_stamp(&mut out, stamp);
        }
        if let Some(o) = &self.overlay {
            blend_row(&mut out, o.as_raw());
        }
        out
    }
}

/// Straight-alpha "over" of `src` onto `dst`, both packed RGBA8.
fn blend_row(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.chunks_exact_mut(4).zip(src.chunks_exact(4)) {
        let a = s[3] as u32;
        match a {
            0 => {}
            255 => d.copy_from_slice(s),
            _ => {
                let inv = 255 - a;
                for c in 0..3 {
                    d[c] = ((s[c] as u32 * a + d[c] as u32 * inv + 127) / 255) as u8;
                }
                d[3] = (a + (d[3] as u32 * inv + 127) / 255) as u8;
            }
        }
    }
}
