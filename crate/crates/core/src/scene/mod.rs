//! Scene description: proxy meshes, per-object materials, camera, area light
//! and animation timeline.
//!
//! A scene is usually read from a JSON document with [`load_scene`] or
//! [`parse_scene`]; relative file references resolve against the directory
//! holding the document. Programmatic construction goes through
//! [`Scene::new`], which enforces the same invariants.

mod camera;
mod config;
mod obj;
mod timeline;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use camera::{sample_texture, Camera, Projection};
pub use config::{
    load_scene, parse_scene, CameraConfig, LightConfig, MaterialConfig, MeshConfig, PassesConfig,
    PoseKey, RenderConfig, SceneConfig, TranslationKey,
};
pub use obj::{load_obj, parse_obj, TriMesh, MIN_TRIANGLE_AREA};
pub use timeline::{Keyframe, Lerp, Pose, Timeline, Track, TrackId, TrackValue};

use crate::error::{Error, Result};
use crate::image::{BitDepth, Image, Rgb};
use crate::Vec3;

/// Reflectance record shared by every triangle of one object.
#[derive(Clone, Debug)]
pub struct Material {
    pub id: String,
    /// Mirror reflection coefficient in `[0, 1]`.
    pub ks: f64,
    /// Index of refraction; only modulates reflection strength (Fresnel mode).
    pub eta: f64,
    /// Flat color used by the weight pass.
    pub base_color: Rgb,
    /// Blinn-Phong exponent.
    pub shininess: f64,
    /// Control painting for the unlit, fully shadowed look.
    pub shadow_texture: Arc<Image>,
    /// Control painting for the fully illuminated diffuse look.
    pub diffuse_texture: Arc<Image>,
}

impl Material {
    fn validate(&self, width: usize, height: usize) -> Result<()> {
        let id = &self.id;
        if !(0.0..=1.0).contains(&self.ks) {
            return Err(Error::validation(format!("material `{id}`: ks = {} outside [0, 1]", self.ks)));
        }
        if !(self.eta >= 1.0) || !self.eta.is_finite() {
            return Err(Error::validation(format!("material `{id}`: eta = {} must be >= 1", self.eta)));
        }
        if !(self.shininess > 0.0) || !self.shininess.is_finite() {
            return Err(Error::validation(format!(
                "material `{id}`: shininess = {} must be positive",
                self.shininess
            )));
        }
        if !self.base_color.is_finite() || self.base_color.0.iter().any(|&c| c < 0.0) {
            return Err(Error::validation(format!(
                "material `{id}`: base_color must be finite and non-negative"
            )));
        }
        for (name, tex) in [("shadow", &self.shadow_texture), ("diffuse", &self.diffuse_texture)] {
            if tex.dims() != (width, height) {
                return Err(Error::validation(format!(
                    "material `{id}`: {name} texture is {}x{}, render target is {width}x{height}",
                    tex.width(),
                    tex.height()
                )));
            }
        }
        Ok(())
    }
}

/// A proxy mesh in its rest pose, with its material index.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub name: String,
    pub geometry: TriMesh,
    pub material: usize,
    /// Rotation pivot for the mesh's transform track.
    pub pivot: Vec3,
}

impl Mesh {
    pub fn new(name: impl Into<String>, geometry: TriMesh, material: usize) -> Self {
        let pivot = geometry.bounds_center();
        Mesh {
            name: name.into(),
            geometry,
            material,
            pivot,
        }
    }
}

/// Rectangular area light `corner + a * edge_u + b * edge_v`, `a, b` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaLight {
    pub corner: Vec3,
    pub edge_u: Vec3,
    pub edge_v: Vec3,
    pub emission: Rgb,
    pub ambient: Rgb,
}

impl AreaLight {
    pub fn new(corner: Vec3, edge_u: Vec3, edge_v: Vec3, emission: Rgb, ambient: Rgb) -> Result<Self> {
        let light = AreaLight {
            corner,
            edge_u,
            edge_v,
            emission,
            ambient,
        };
        light.validate()?;
        Ok(light)
    }

    fn validate(&self) -> Result<()> {
        if !(self.edge_u.cross(&self.edge_v).norm() > 0.0) {
            return Err(Error::validation("light: edge_u x edge_v must be non-zero"));
        }
        for (name, c) in [("emission", self.emission), ("ambient", self.ambient)] {
            if !c.is_finite() || c.0.iter().any(|&v| v < 0.0) {
                return Err(Error::validation(format!("light: {name} channels must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn translated(&self, offset: Vec3) -> AreaLight {
        AreaLight {
            corner: self.corner + offset,
            ..self.clone()
        }
    }

    pub fn center(&self) -> Vec3 {
        self.corner + (self.edge_u + self.edge_v) * 0.5
    }

    /// Point at rectangle coordinates `(a, b)`.
    pub fn point(&self, a: f64, b: f64) -> Vec3 {
        self.corner + self.edge_u * a + self.edge_v * b
    }
}

/// Renderer knobs that are part of the scene document.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderSettings {
    /// Maximum number of mirror bounces.
    pub max_depth: u32,
    /// Modulate `ks` with Schlick's Fresnel term using the material's `eta`.
    pub fresnel: bool,
    /// Color returned by rays that leave the scene.
    pub background: Rgb,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            max_depth: 3,
            fresnel: false,
            background: Rgb::BLACK,
        }
    }
}

/// Where pass files go by default and at what depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PassOutput {
    pub output_dir: PathBuf,
    pub bitdepth: BitDepth,
}

impl Default for PassOutput {
    fn default() -> Self {
        PassOutput {
            output_dir: PathBuf::from("out"),
            bitdepth: BitDepth::Sixteen,
        }
    }
}

/// Everything needed to render any frame of any pass. Immutable once built.
#[derive(Clone, Debug)]
pub struct Scene {
    width: usize,
    height: usize,
    camera: Camera,
    light: AreaLight,
    materials: Vec<Material>,
    meshes: Vec<Mesh>,
    timeline: Timeline,
    pub settings: RenderSettings,
    pub output: PassOutput,
}

impl Scene {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: usize,
        height: usize,
        camera: Camera,
        light: AreaLight,
        materials: Vec<Material>,
        meshes: Vec<Mesh>,
        timeline: Timeline,
        settings: RenderSettings,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "render dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        light.validate()?;
        for (i, m) in materials.iter().enumerate() {
            if materials[..i].iter().any(|o| o.id == m.id) {
                return Err(Error::validation(format!("material `{}` defined twice", m.id)));
            }
            m.validate(width, height)?;
        }
        for (i, mesh) in meshes.iter().enumerate() {
            if mesh.material >= materials.len() {
                return Err(Error::validation(format!(
                    "mesh {i} (`{}`) references missing material {}",
                    mesh.name, mesh.material
                )));
            }
            let n = mesh.geometry.vertices.len();
            if let Some(t) = mesh.geometry.triangles.iter().position(|t| t.iter().any(|&v| v as usize >= n)) {
                return Err(Error::validation(format!(
                    "mesh {i} (`{}`): triangle {t} has an out-of-range vertex index",
                    mesh.name
                )));
            }
            if let Some(t) = (0..mesh.geometry.triangles.len())
                .find(|&t| !(mesh.geometry.triangle_area(t) > MIN_TRIANGLE_AREA))
            {
                return Err(Error::validation(format!(
                    "mesh {i} (`{}`): triangle {t} is degenerate",
                    mesh.name
                )));
            }
        }
        if !settings.background.is_finite() {
            return Err(Error::validation("render.background must be finite"));
        }
        Ok(Scene {
            width,
            height,
            camera,
            light,
            materials,
            meshes,
            timeline,
            settings,
            output: PassOutput::default(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    /// The light in its rest position, before the light track is applied.
    pub fn light(&self) -> &AreaLight {
        &self.light
    }

    pub fn light_at(&self, frame: f64) -> AreaLight {
        self.light.translated(self.timeline.light_offset(frame))
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn meshes(&self) -> &[Mesh] {
        &self.meshes
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    /// Copy of the scene with a different timeline (used to perturb tracks).
    pub fn with_timeline(&self, timeline: Timeline) -> Scene {
        Scene {
            timeline,
            ..self.clone()
        }
    }

    pub fn with_light(&self, light: AreaLight) -> Result<Scene> {
        light.validate()?;
        Ok(Scene {
            light,
            ..self.clone()
        })
    }

    pub fn with_settings(&self, settings: RenderSettings) -> Scene {
        Scene {
            settings,
            ..self.clone()
        }
    }

    /// World-space vertices of `mesh` at `frame`.
    pub fn mesh_vertices_at(&self, mesh: usize, frame: f64) -> Vec<Vec3> {
        let m = &self.meshes[mesh];
        let pose = self.timeline.mesh_pose(mesh, frame);
        m.geometry.vertices.iter().map(|&v| pose.apply(v, m.pivot)).collect()
    }
}

pub(crate) fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
