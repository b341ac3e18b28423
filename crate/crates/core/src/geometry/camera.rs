use nalgebra::Vector3;

use super::{CameraSpec, GeometryError, Ray, Result};

/// Pinhole camera. Pixel `(0, 0)` is the top-left corner of the viewport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    spec: CameraSpec,
    forward: Vector3<f64>,
    right: Vector3<f64>,
    up: Vector3<f64>,
    tan_half_fov: f64,
}

impl Camera {
    pub fn new(spec: CameraSpec) -> Result<Self> {
        let invalid = |msg: &str| Err(GeometryError::InvalidCamera(msg.to_string()));
        let finite = |v: &Vector3<f64>| v.iter().all(|c| c.is_finite());
        if !(finite(&spec.position) && finite(&spec.target) && finite(&spec.up)) {
            return invalid("non-finite vector");
        }
        if !(spec.vfov_degrees > 0.0 && spec.vfov_degrees < 180.0) {
            return invalid("vertical field of view must be in (0, 180) degrees");
        }
        if spec.viewport[0] == 0 || spec.viewport[1] == 0 {
            return invalid("viewport must be at least 1x1");
        }
        let view = spec.target - spec.position;
        if view.norm() == 0.0 {
            return invalid("position equals target");
        }
        let forward = view.normalize();
        let side = forward.cross(&spec.up);
        if side.norm() <= 1e-12 * spec.up.norm() {
            return invalid("up is parallel to the view direction");
        }
        let right = side.normalize();
        let up = right.cross(&forward);
        Ok(Self {
            spec,
            forward,
            right,
            up,
            tan_half_fov: (spec.vfov_degrees.to_radians() / 2.0).tan(),
        })
    }

    /// Convenience constructor for a square-pixel camera.
    pub fn look_at(
        position: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        vfov_degrees: f64,
        viewport: [u32; 2],
    ) -> Result<Self> {
        Self::new(CameraSpec {
            position,
            target,
            up,
            vfov_degrees,
            viewport,
        })
    }

    pub fn spec(&self) -> &CameraSpec {
        &self.spec
    }

    pub fn viewport(&self) -> [u32; 2] {
        self.spec.viewport
    }

    /// Ray through the center of pixel `(x, y)`.
    pub fn screen_ray(&self, x: i64, y: i64) -> Result<Ray> {
        let [w, h] = self.spec.viewport;
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            return Err(GeometryError::PixelOutOfViewport {
                x,
                y,
                width: w,
                height: h,
            });
        }
        let ndc_x = 2.0 * (x as f64 + 0.5) / w as f64 - 1.0;
        let ndc_y = 1.0 - 2.0 * (y as f64 + 0.5) / h as f64;
        let aspect = w as f64 / h as f64;
        let dir = self.forward
            + self.right * (ndc_x * self.tan_half_fov * aspect)
            + self.up * (ndc_y * self.tan_half_fov);
        Ray::new(self.spec.position, dir)
    }
}

impl TryFrom<CameraSpec> for Camera {
    type Error = GeometryError;

    fn try_from(spec: CameraSpec) -> Result<Self> {
        Self::new(spec)
    }
}
