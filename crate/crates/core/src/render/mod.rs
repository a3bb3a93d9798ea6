//! Deterministic ray tracer for the three rendered animations.
//!
//! * [`PassKind::ShadowTexture`] (`t0`) and [`PassKind::DiffuseTexture`] (`t1`)
//!   show the projected control paintings with mirror reflections and no
//!   lighting of any kind.
//! * [`PassKind::Weight`] (`w`) shades one flat material per object with
//!   Blinn-Phong and soft shadows from the area light.
//!
//! Every pixel of the weight pass draws its random numbers from its own
//! ChaCha stream keyed by `(seed, frame)` and selected by `(x, y)`, so output
//! does not depend on how pixels are scheduled across threads.

mod geometry;
mod sequence;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use geometry::{reflect, FrameGeometry, HitRecord, Ray, RAY_EPSILON, TIE_EPSILON};
pub use sequence::{pass_fingerprint, render_sequence, FrameRange, RenderJob};

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};
use crate::scene::{sample_texture, AreaLight, Material, Scene};
use crate::Vec3;

/// Default number of shadow rays per shaded point.
pub const DEFAULT_LIGHT_SAMPLES: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PassKind {
    #[serde(rename = "t0")]
    ShadowTexture,
    #[serde(rename = "t1")]
    DiffuseTexture,
    #[serde(rename = "w")]
    Weight,
}

impl PassKind {
    pub const ALL: [PassKind; 3] = [PassKind::ShadowTexture, PassKind::DiffuseTexture, PassKind::Weight];

    /// File prefix: `t0`, `t1` or `w`.
    pub fn name(self) -> &'static str {
        match self {
            PassKind::ShadowTexture => "t0",
            PassKind::DiffuseTexture => "t1",
            PassKind::Weight => "w",
        }
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PassKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t0" => Ok(PassKind::ShadowTexture),
            "t1" => Ok(PassKind::DiffuseTexture),
            "w" => Ok(PassKind::Weight),
            other => Err(Error::invalid(format!("unknown pass `{other}` (expected t0, t1 or w)"))),
        }
    }
}

fn check_frame(scene: &Scene, frame: u32) -> Result<()> {
    let count = scene.timeline().frame_count();
    if frame >= count {
        return Err(Error::invalid(format!(
            "frame {frame} outside timeline 0..={}",
            count - 1
        )));
    }
    Ok(())
}

/// Schlick's approximation of Fresnel reflectance.
pub fn schlick(cos_theta: f64, eta: f64) -> f64 {
    let r0 = ((eta - 1.0) / (eta + 1.0)).powi(2);
    r0 + (1.0 - r0) * (1.0 - cos_theta.clamp(0.0, 1.0)).powi(5)
}

fn effective_reflectance(material: &Material, scene: &Scene, ray: &Ray, hit: &HitRecord) -> f64 {
    if scene.settings.fresnel {
        let cos = -ray.direction().dot(&hit.normal);
        material.ks * schlick(cos, material.eta)
    } else {
        material.ks
    }
}

fn mirror_ray(ray: &Ray, hit: &HitRecord) -> Ray {
    Ray::new(
        hit.point + hit.normal * RAY_EPSILON,
        reflect(ray.direction(), hit.normal),
    )
}

fn render_pixels(scene: &Scene, shade: impl Fn(usize, usize, Ray) -> Rgb + Sync) -> Image {
    let (w, h) = (scene.width(), scene.height());
    let camera = scene.camera();
    let mut pixels = vec![Rgb::BLACK; w * h];
    pixels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            let u = (x as f64 + 0.5) / w as f64;
            let v = (y as f64 + 0.5) / h as f64;
            let ray = Ray::new(camera.position(), camera.ray_direction(u, v));
            *px = shade(x, y, ray);
        }
    });
    Image::from_pixels(w, h, pixels).expect("scene dimensions are valid")
}

/// Render one frame of an unlit texture pass (`t0` or `t1`).
pub fn render_texture_pass(scene: &Scene, kind: PassKind, frame: u32) -> Result<Image> {
    if kind == PassKind::Weight {
        return Err(Error::invalid("render_texture_pass needs t0 or t1, got w"));
    }
    check_frame(scene, frame)?;
    let geometry = FrameGeometry::new(scene, frame as f64);
    Ok(render_pixels(scene, |_, _, ray| trace_texture(&geometry, kind, &ray, 0)))
}

fn trace_texture(geometry: &FrameGeometry<'_>, kind: PassKind, ray: &Ray, depth: u32) -> Rgb {
    let scene = geometry.scene();
    let Some(hit) = geometry.intersect(ray) else {
        return scene.settings.background;
    };
    let material = &scene.materials()[hit.material];
    let texture = match kind {
        PassKind::ShadowTexture => &material.shadow_texture,
        _ => &material.diffuse_texture,
    };
    let local = sample_texture(texture, hit.uv.0, hit.uv.1);
    let kf = effective_reflectance(material, scene, ray, &hit);
    if kf > 0.0 && depth < scene.settings.max_depth {
        let reflected = trace_texture(geometry, kind, &mirror_ray(ray, &hit), depth + 1);
        local * (1.0 - kf) + reflected * kf
    } else {
        local
    }
}

/// Per-pixel random stream: key from `(seed, frame)`, stream from `(x, y)`.
pub fn pixel_rng(seed: u64, frame: u32, x: usize, y: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&frame.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((y as u64) << 32) | x as u64);
    rng
}

/// Side length of the stratified sampling grid: `ceil(sqrt(samples))`.
pub fn strata_per_side(samples: u32) -> u32 {
    let mut n = (samples.max(1) as f64).sqrt().ceil() as u32;
    while n > 1 && (n - 1) * (n - 1) >= samples {
        n -= 1;
    }
    while n * n < samples {
        n += 1;
    }
    n
}

/// Fraction of jittered-stratified points on `light` visible from `origin`.
///
/// The grid has `ceil(sqrt(samples))^2` cells with one point per cell.
pub fn visibility_fraction(
    geometry: &FrameGeometry<'_>,
    light: &AreaLight,
    origin: Vec3,
    samples: u32,
    rng: &mut impl Rng,
) -> f64 {
    let n = strata_per_side(samples);
    let mut visible = 0u32;
    for i in 0..n {
        for j in 0..n {
            let a = (i as f64 + rng.random::<f64>()) / n as f64;
            let b = (j as f64 + rng.random::<f64>()) / n as f64;
            let to_light = light.point(a, b) - origin;
            let dist = to_light.norm();
            if dist <= 2.0 * RAY_EPSILON {
                visible += 1;
                continue;
            }
            let ray = Ray::new(origin, to_light);
            if !geometry.occluded(&ray, dist - RAY_EPSILON) {
                visible += 1;
            }
        }
    }
    visible as f64 / (n * n) as f64
}

/// Render one frame of the lit weight pass, clamped to `[0, 1]`.
pub fn render_weight_pass(scene: &Scene, frame: u32, light_samples: u32, seed: u64) -> Result<Image> {
    check_frame(scene, frame)?;
    if light_samples < 1 {
        return Err(Error::invalid("light_samples must be at least 1"));
    }
    Ok(render_weight_unclamped(scene, frame, light_samples, seed).clamped())
}

/// Weight pass before the final clamp. Exposed for monotonicity checks.
pub fn render_weight_unclamped(scene: &Scene, frame: u32, light_samples: u32, seed: u64) -> Image {
    let geometry = FrameGeometry::new(scene, frame as f64);
    let light = scene.light_at(frame as f64);
    render_pixels(scene, |x, y, ray| {
        let mut rng = pixel_rng(seed, frame, x, y);
        trace_weight(&geometry, &light, light_samples, &ray, 0, &mut rng)
    })
}

fn trace_weight(
    geometry: &FrameGeometry<'_>,
    light: &AreaLight,
    samples: u32,
    ray: &Ray,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Rgb {
    let scene = geometry.scene();
    let Some(hit) = geometry.intersect(ray) else {
        return scene.settings.background;
    };
    let material = &scene.materials()[hit.material];
    let local = shade_blinn_phong(geometry, light, material, samples, ray, &hit, rng);
    let kf = effective_reflectance(material, scene, ray, &hit);
    if kf > 0.0 && depth < scene.settings.max_depth {
        let reflected = trace_weight(geometry, light, samples, &mirror_ray(ray, &hit), depth + 1, rng);
        local * (1.0 - kf) + reflected * kf
    } else {
        local
    }
}

/// `ambient * base + visibility * (diffuse + specular)`, lit from the light's
/// center direction.
fn shade_blinn_phong(
    geometry: &FrameGeometry<'_>,
    light: &AreaLight,
    material: &Material,
    samples: u32,
    ray: &Ray,
    hit: &HitRecord,
    rng: &mut ChaCha8Rng,
) -> Rgb {
    let ambient = light.ambient * material.base_color;
    let to_light = (light.center() - hit.point).normalize();
    let n_dot_l = hit.normal.dot(&to_light);
    if n_dot_l <= 0.0 {
        return ambient;
    }
    let origin = hit.point + hit.normal * RAY_EPSILON;
    let visibility = visibility_fraction(geometry, light, origin, samples, rng);
    if visibility == 0.0 {
        return ambient;
    }
    let half = (to_light - ray.direction()).normalize();
    let specular = hit.normal.dot(&half).max(0.0).powf(material.shininess);
    let direct = light.emission * material.base_color * n_dot_l + light.emission * specular;
    ambient + direct * visibility
}

/// Either pass kind; `light_samples` and `seed` only matter for `w`.
pub fn render_pass(scene: &Scene, kind: PassKind, frame: u32, light_samples: u32, seed: u64) -> Result<Image> {
    match kind {
        PassKind::Weight => render_weight_pass(scene, frame, light_samples, seed),
        _ => render_texture_pass(scene, kind, frame),
    }
}
