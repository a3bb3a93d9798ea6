//! JSON scene documents.
//!
//! Unknown keys are rejected everywhere. Schema problems become
//! [`Error::Config`] carrying the JSON path of the offending value; invariant
//! violations become [`Error::Validation`] naming the entity.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{resolve, AreaLight, Camera, Keyframe, Material, Mesh, PassOutput, Pose, RenderSettings, Scene, Timeline, Track};
use crate::error::{Error, Result};
use crate::image::{load_png, BitDepth, Image, Rgb};
use crate::Vec3;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub render: RenderConfig,
    pub camera: CameraConfig,
    pub light: LightConfig,
    pub materials: Vec<MaterialConfig>,
    pub meshes: Vec<MeshConfig>,
    #[serde(default)]
    pub passes: PassesConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub frames: u32,
    pub fps: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    #[serde(default)]
    pub fresnel: bool,
    #[serde(default)]
    pub background: [f64; 3],
}

fn default_max_depth() -> u32 {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    pub vfov_deg: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightConfig {
    pub corner: [f64; 3],
    pub edge_u: [f64; 3],
    pub edge_v: [f64; 3],
    pub emission: [f64; 3],
    pub ambient: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<Vec<TranslationKey>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationKey {
    pub frame: f64,
    pub translation: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub id: String,
    pub ks: f64,
    pub eta: f64,
    pub base_color: [f64; 3],
    pub shininess: f64,
    pub shadow_texture: String,
    pub diffuse_texture: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub obj_path: String,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<Vec<PoseKey>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseKey {
    pub frame: f64,
    pub translation: [f64; 3],
    #[serde(default)]
    pub rotation_deg: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassesConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub bitdepth: BitDepth,
}

fn default_output_dir() -> String {
    "out".into()
}

impl Default for PassesConfig {
    fn default() -> Self {
        PassesConfig {
            output_dir: default_output_dir(),
            bitdepth: BitDepth::default(),
        }
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Read and build the scene stored at `path`.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scene(&text, base)
}

/// Build a scene from JSON text; relative paths resolve against `base_dir`.
pub fn parse_scene(text: &str, base_dir: &Path) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SceneConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    build_scene(&config, base_dir)
}

pub(crate) fn build_scene(config: &SceneConfig, base_dir: &Path) -> Result<Scene> {
    let r = &config.render;
    let camera = Camera::new(
        vec3(config.camera.position),
        vec3(config.camera.look_at),
        vec3(config.camera.up),
        config.camera.vfov_deg,
        r.width as f64 / r.height.max(1) as f64,
    )?;

    let l = &config.light;
    let light = AreaLight::new(
        vec3(l.corner),
        vec3(l.edge_u),
        vec3(l.edge_v),
        Rgb(l.emission),
        Rgb(l.ambient),
    )?;

    let mut timeline = Timeline::new(r.frames, r.fps)?;
    if let Some(keys) = &l.track {
        let keys = keys
            .iter()
            .map(|k| Keyframe {
                frame: k.frame,
                value: vec3(k.translation),
            })
            .collect();
        let track = Track::new(keys).map_err(|e| Error::validation(format!("light track: {e}")))?;
        timeline = timeline.with_light_track(track);
    }

    let mut textures: HashMap<String, Arc<Image>> = HashMap::new();
    let mut texture = |rel: &str| -> Result<Arc<Image>> {
        if let Some(t) = textures.get(rel) {
            return Ok(t.clone());
        }
        let img = Arc::new(load_png(resolve(base_dir, rel))?);
        textures.insert(rel.to_string(), img.clone());
        Ok(img)
    };
    let mut materials = Vec::with_capacity(config.materials.len());
    for m in &config.materials {
        materials.push(Material {
            id: m.id.clone(),
            ks: m.ks,
            eta: m.eta,
            base_color: Rgb(m.base_color),
            shininess: m.shininess,
            shadow_texture: texture(&m.shadow_texture)?,
            diffuse_texture: texture(&m.diffuse_texture)?,
        });
    }

    let mut meshes = Vec::with_capacity(config.meshes.len());
    for (i, mc) in config.meshes.iter().enumerate() {
        let material = materials.iter().position(|m| m.id == mc.material).ok_or_else(|| {
            Error::validation(format!(
                "mesh {i} (`{}`) references unknown material `{}`",
                mc.obj_path, mc.material
            ))
        })?;
        let geometry = super::load_obj(resolve(base_dir, &mc.obj_path))?;
        meshes.push(Mesh::new(mc.obj_path.clone(), geometry, material));
        if let Some(keys) = &mc.track {
            let keys = keys
                .iter()
                .map(|k| Keyframe {
                    frame: k.frame,
                    value: Pose {
                        translation: vec3(k.translation),
                        rotation_deg: vec3(k.rotation_deg),
                    },
                })
                .collect();
            let track = Track::new(keys)
                .map_err(|e| Error::validation(format!("mesh {i} (`{}`) track: {e}", mc.obj_path)))?;
            timeline = timeline.with_mesh_track(i, track);
        }
    }

    let settings = RenderSettings {
        max_depth: r.max_depth,
        fresnel: r.fresnel,
        background: Rgb(r.background),
    };
    let mut scene = Scene::new(r.width, r.height, camera, light, materials, meshes, timeline, settings)?;
    scene.output = PassOutput {
        output_dir: resolve(base_dir, &config.passes.output_dir),
        bitdepth: config.passes.bitdepth,
    };
    Ok(scene)
}
