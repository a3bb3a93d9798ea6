use crate::error::{Error, Result};
use crate::image::{Image, Rgb};
use crate::Vec3;

/// Pinhole camera. The same camera renders every pass and projects the
/// control paintings onto the proxy geometry.
#[derive(Clone, Debug)]
pub struct Camera {
    position: Vec3,
    look_at: Vec3,
    up: Vec3,
    vfov_deg: f64,
    aspect: f64,
    forward: Vec3,
    right: Vec3,
    true_up: Vec3,
    half_height: f64,
    half_width: f64,
}

/// Result of [`Camera::project_uv`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    /// Normalized image coordinates: `u` grows rightward, `v` downward.
    Inside { u: f64, v: f64 },
    /// Behind the camera or outside the field of view.
    Outside,
}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, up: Vec3, vfov_deg: f64, aspect: f64) -> Result<Self> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if !finite(&position) || !finite(&look_at) || !finite(&up) {
            return Err(Error::validation("camera: vectors must be finite"));
        }
        if !(vfov_deg > 0.0 && vfov_deg < 180.0) {
            return Err(Error::validation(format!(
                "camera: vfov_deg must lie in (0, 180), got {vfov_deg}"
            )));
        }
        if !(aspect > 0.0) || !aspect.is_finite() {
            return Err(Error::validation(format!("camera: aspect must be positive, got {aspect}")));
        }
        let view = look_at - position;
        if view.norm() < 1e-12 {
            return Err(Error::validation("camera: position and look_at coincide"));
        }
        let forward = view.normalize();
        let side = forward.cross(&up);
        if up.norm() < 1e-12 || side.norm() < 1e-9 * up.norm() {
            return Err(Error::validation("camera: up vector is zero or parallel to the view direction"));
        }
        let right = side.normalize();
        let true_up = right.cross(&forward);
        let half_height = (vfov_deg.to_radians() / 2.0).tan();
        Ok(Camera {
            position,
            look_at,
            up: up.normalize(),
            vfov_deg,
            aspect,
            forward,
            right,
            true_up,
            half_height,
            half_width: half_height * aspect,
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn look_at(&self) -> Vec3 {
        self.look_at
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn vfov_deg(&self) -> f64 {
        self.vfov_deg
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    /// Unbounded perspective projection. `None` for points on or behind the
    /// image plane through the camera center.
    pub fn project(&self, point: Vec3) -> Option<(f64, f64)> {
        let d = point - self.position;
        let depth = d.dot(&self.forward);
        if depth <= 0.0 {
            return None;
        }
        let x = d.dot(&self.right) / depth;
        let y = d.dot(&self.true_up) / depth;
        Some((
            0.5 + x / (2.0 * self.half_width),
            0.5 - y / (2.0 * self.half_height),
        ))
    }

    /// Project `point` into normalized image coordinates; the full field of
    /// view covers `[0, 1]^2`.
    pub fn project_uv(&self, point: Vec3) -> Result<Projection> {
        if (point - self.position).norm() < 1e-12 {
            return Err(Error::Degenerate("projected point coincides with the camera".into()));
        }
        Ok(match self.project(point) {
            Some((u, v)) if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) => {
                Projection::Inside { u, v }
            }
            _ => Projection::Outside,
        })
    }

    /// Unit direction of the ray through normalized image point `(u, v)`.
    /// Exact inverse of [`Camera::project`].
    pub fn ray_direction(&self, u: f64, v: f64) -> Vec3 {
        let x = (2.0 * u - 1.0) * self.half_width;
        let y = (1.0 - 2.0 * v) * self.half_height;
        (self.forward + self.right * x + self.true_up * y).normalize()
    }
}

/// Bilinear texture lookup with clamp-to-edge addressing.
///
/// `(0, 0)` is the top-left corner of the image and `(1, 1)` the bottom-right,
/// so texel `(i, j)` has its center at `((i + 0.5) / w, (j + 0.5) / h)`. This
/// matches the pixel-center rays of the renderer, making camera projection
/// followed by sampling an exact round trip at matching resolutions.
pub fn sample_texture(image: &Image, u: f64, v: f64) -> Rgb {
    let (w, h) = image.dims();
    let x = u * w as f64 - 0.5;
    let y = v * h as f64 - 0.5;
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let clamp_x = |i: f64| i.clamp(0.0, (w - 1) as f64) as usize;
    let clamp_y = |j: f64| j.clamp(0.0, (h - 1) as f64) as usize;
    let (xa, xb) = (clamp_x(x0), clamp_x(x0 + 1.0));
    let (ya, yb) = (clamp_y(y0), clamp_y(y0 + 1.0));
    let top = image.get(xa, ya) * (1.0 - fx) + image.get(xb, ya) * fx;
    let bottom = image.get(xa, yb) * (1.0 - fx) + image.get(xb, yb) * fx;
    top * (1.0 - fy) + bottom * fy
}
