//! Triangle meshes, rays, and the mapping from a ray hit to a texel.
//!
//! All positions are in model units and all texture coordinates are unitless.
//! UV `v` grows upward while pixel rows grow downward; [`uv_to_pixel`] is the
//! only place that flips between the two.

mod bvh;
mod camera;
mod intersect;
mod sphere;

pub use bvh::AccelIndex;
pub use camera::Camera;
pub use intersect::{intersect_exhaustive, intersect_triangle, TriangleHit};
pub use sphere::lat_long_sphere;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default raycast range, in model units.
pub const DEFAULT_MAX_T: f64 = 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("triangle index {index} out of range (mesh has {count} triangles)")]
    TriangleOutOfRange { index: usize, count: usize },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("pixel ({x}, {y}) outside {width}x{height} viewport")]
    PixelOutOfViewport { x: i64, y: i64, width: u32, height: u32 },
    #[error("ray direction must be nonzero and finite")]
    InvalidRay,
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// A triangle mesh with one combined index space for positions and UVs.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    positions: Vec<Vector3<f64>>,
    uvs: Vec<Vector2<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl Mesh {
    /// Builds a mesh after checking index bounds, the position/uv pairing,
    /// and that no triangle has zero area.
    pub fn new(
        positions: Vec<Vector3<f64>>,
        uvs: Vec<Vector2<f64>>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(GeometryError::InvalidMesh("mesh has no triangles".into()));
        }
        if positions.len() != uvs.len() {
            return Err(GeometryError::InvalidMesh(format!(
                "{} positions but {} uvs",
                positions.len(),
                uvs.len()
            )));
        }
        if let Some(p) = positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidMesh(format!("vertex {p} is not finite")));
        }
        if let Some(p) = uvs.iter().position(|uv| !uv.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidMesh(format!("uv {p} is not finite")));
        }
        for (i, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v as usize >= positions.len()) {
                return Err(GeometryError::InvalidMesh(format!(
                    "triangle {i} references vertex {bad} but mesh has {} vertices",
                    positions.len()
                )));
            }
        }
        if let Some(i) = degenerate_triangles(&positions, &triangles).first() {
            return Err(GeometryError::InvalidMesh(format!("triangle {i} has zero area")));
        }
        Ok(Self {
            positions,
            uvs,
            triangles,
        })
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn uvs(&self) -> &[Vector2<f64>] {
        &self.uvs
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_positions(&self, index: usize) -> [Vector3<f64>; 3] {
        let [a, b, c] = self.triangles[index];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Component-wise min and max over all UVs.
    pub fn uv_bounds(&self) -> (Vector2<f64>, Vector2<f64>) {
        let mut lo = Vector2::repeat(f64::INFINITY);
        let mut hi = Vector2::repeat(f64::NEG_INFINITY);
        for uv in &self.uvs {
            lo = lo.inf(uv);
            hi = hi.sup(uv);
        }
        (lo, hi)
    }

    /// Interpolates the texture coordinate at barycentric weights `(w_a, w_b, w_c)`.
    pub fn interpolate_uv(&self, triangle_index: usize, barycentric: [f64; 3]) -> Result<Vector2<f64>> {
        let tri = self
            .triangles
            .get(triangle_index)
            .ok_or(GeometryError::TriangleOutOfRange {
                index: triangle_index,
                count: self.triangles.len(),
            })?;
        let [a, b, c] = tri.map(|v| self.uvs[v as usize]);
        Ok(a * barycentric[0] + b * barycentric[1] + c * barycentric[2])
    }
}

/// Indices of triangles whose area is zero up to rounding.
pub fn degenerate_triangles(positions: &[Vector3<f64>], triangles: &[[u32; 3]]) -> Vec<usize> {
    triangles
        .iter()
        .enumerate()
        .filter(|(_, tri)| {
            let [a, b, c] = tri.map(|v| positions[v as usize]);
            let (e1, e2) = (b - a, c - a);
            let scale = e1.norm_squared().max(e2.norm_squared()).max((c - b).norm_squared());
            e1.cross(&e2).norm() <= f64::EPSILON * scale
        })
        .map(|(i, _)| i)
        .collect()
}

/// A half-line with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    direction: Vector3<f64>,
}

impl Ray {
    /// Normalizes `direction`; fails when it is zero or not finite.
    pub fn new(origin: Vector3<f64>, direction: Vector3<f64>) -> Result<Self> {
        let len = direction.norm();
        if !(len.is_finite() && len > 0.0) || !origin.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidRay);
        }
        Ok(Self {
            origin,
            direction: direction / len,
        })
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.direction * t
    }
}

/// The nearest intersection of a ray with a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub triangle_index: usize,
    pub t: f64,
    pub barycentric: [f64; 3],
    pub uv: Vector2<f64>,
}

/// Maps a texture coordinate to the texel containing it. `v = 1` is row 0.
/// Coordinates outside `[0, 1]` are clamped to the border texels.
pub fn uv_to_pixel(uv: Vector2<f64>, width: u32, height: u32) -> (u32, u32) {
    let px = (uv.x * width as f64).floor();
    let py = ((1.0 - uv.y) * height as f64).floor();
    let clamp = |v: f64, n: u32| {
        if v.is_nan() {
            0
        } else {
            v.clamp(0.0, (n.max(1) - 1) as f64) as u32
        }
    };
    (clamp(px, width), clamp(py, height))
}

/// Texture coordinate of a texel center; the inverse of [`uv_to_pixel`].
pub fn pixel_center_to_uv(px: u32, py: u32, width: u32, height: u32) -> Vector2<f64> {
    Vector2::new(
        (px as f64 + 0.5) / width as f64,
        1.0 - (py as f64 + 0.5) / height as f64,
    )
}

/// Serializable camera parameters, validated into a [`Camera`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub position: Vector3<f64>,
    pub target: Vector3<f64>,
    pub up: Vector3<f64>,
    pub vfov_degrees: f64,
    pub viewport: [u32; 2],
}
