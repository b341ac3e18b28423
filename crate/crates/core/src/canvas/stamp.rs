use image::RgbaImage;
use serde::{Deserialize, Serialize};

use crate::pixel::{PixelPos, Rect, Rgba};

/// One hard-edged opaque disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrushStamp {
    pub center: PixelPos,
    pub radius: u32,
    pub color: Rgba,
}

impl BrushStamp {
    pub fn new(center: impl Into<PixelPos>, radius: u32, color: Rgba) -> Self {
        Self {
            center: center.into(),
            radius,
            color,
        }
    }

    /// Horizontal extent `[x0, x1)` of the disc on row `y`, clipped to `width`.
    #[inline]
    pub(crate) fn row_span(&self, y: u32, width: u32) -> Option<(u32, u32)> {
        let dy = (y as i64 - self.center.y as i64).unsigned_abs();
        let r = self.radius as u64;
        if dy > r {
            return None;
        }
        let half = (r * r - dy * dy).isqrt() as i64;
        let x0 = (self.center.x as i64 - half).max(0);
        let x1 = (self.center.x as i64 + half + 1).min(width as i64);
        (x0 < x1).then_some((x0 as u32, x1 as u32))
    }

    /// Bounding rectangle of the disc clipped to a `width` x `height` grid.
    pub fn bounds(&self, width: u32, height: u32) -> Option<Rect> {
        let r = self.radius as i64;
        let (cx, cy) = (self.center.x as i64, self.center.y as i64);
        let x0 = (cx - r).max(0);
        let y0 = (cy - r).max(0);
        let x1 = (cx + r + 1).min(width as i64);
        let y1 = (cy + r + 1).min(height as i64);
        (x0 < x1 && y0 < y1).then(|| Rect {
            x: x0 as u32,
            y: y0 as u32,
            width: (x1 - x0) as u32,
            height: (y1 - y0) as u32,
        })
    }
}

#[inline]
pub(crate) fn fill_span(row: &mut [u8], x0: u32, x1: u32, color: Rgba) {
    for px in row[4 * x0 as usize..4 * x1 as usize].chunks_exact_mut(4) {
        px.copy_from_slice(&color.0);
    }
}

/// Sets every pixel within euclidean distance `radius` of the center to the
/// stamp color. Returns the touched rectangle, or `None` when fully clipped.
pub fn rasterize_stamp(buffer: &mut RgbaImage, stamp: &BrushStamp) -> Option<Rect> {
    let (w, h) = buffer.dimensions();
    let rect = stamp.bounds(w, h)?;
    let row_len = 4 * w as usize;
    let raw: &mut [u8] = buffer;
    for y in rect.y..rect.bottom() {
        if let Some((x0, x1)) = stamp.row_span(y, w) {
            let start = y as usize * row_len;
            fill_span(&mut raw[start..start + row_len], x0, x1, stamp.color);
        }
    }
    Some(rect)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colored(buf: &RgbaImage, color: Rgba) -> Vec<(u32, u32)> {
        buf.enumerate_pixels()
            .filter(|(_, _, p)| p.0 == color.0)
            .map(|(x, y, _)| (x, y))
            .collect()
    }

    #[test]
    fn radius_one_is_plus_shape() {
        let mut buf = RgbaImage::new(5, 5);
        rasterize_stamp(&mut buf, &BrushStamp::new((2, 2), 1, Rgba::RED));
        assert_eq!(colored(&buf, Rgba::RED), vec![(2, 1), (1, 2), (2, 2), (3, 2), (2, 3)]);
    }

    #[test]
    fn fully_outside_is_noop() {
        let mut buf = RgbaImage::new(5, 5);
        assert_eq!(rasterize_stamp(&mut buf, &BrushStamp::new((-10, 2), 3, Rgba::RED)), None);
        assert_eq!(rasterize_stamp(&mut buf, &BrushStamp::new((2, 9), 3, Rgba::RED)), None);
        assert!(colored(&buf, Rgba::RED).is_empty());
    }

    #[test]
    fn disc_matches_exhaustive_scan() {
        for radius in 1..=32u32 {
            for center in [(40, 40), (3, 70), (79, 0), (-5, 20)] {
                let mut buf = RgbaImage::new(80, 80);
                let stamp = BrushStamp::new(center, radius, Rgba::RED);
                rasterize_stamp(&mut buf, &stamp);
                let r2 = (radius * radius) as i64;
                let expected: Vec<(u32, u32)> = (0..80u32)
                    .flat_map(|y| (0..80u32).map(move |x| (x, y)))
                    .filter(|&(x, y)| {
                        let dx = x as i64 - center.0 as i64;
                        let dy = y as i64 - center.1 as i64;
                        dx * dx + dy * dy <= r2
                    })
                    .collect();
                let mut got = colored(&buf, Rgba::RED);
                got.sort_by_key(|&(x, y)| (y, x));
                assert_eq!(got, expected, "radius {radius} center {center:?}");
            }
        }
    }

    #[test]
    fn bounds_clip() {
        let s = BrushStamp::new((0, 0), 4, Rgba::RED);
        assert_eq!(s.bounds(10, 10), Some(Rect { x: 0, y: 0, width: 5, height: 5 }));
    }
}
