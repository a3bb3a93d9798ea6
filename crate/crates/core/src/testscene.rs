//! Procedural test scenes with synthetic control paintings.
//!
//! * `registration`: one view-filling quad with a checkerboard painting.
//! * `mirrorbox`: a floating sphere over a perfect mirror floor.
//! * `pond`: a reflective water plane with lily pads, a flower and a light
//!   that sweeps across the sky.
//!
//! Each generator writes `scene.json`, the OBJ meshes and one shadow/diffuse
//! texture pair per material into the target directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{save_png, BitDepth, Image, Rgb};
use crate::scene::{
    AreaLight, Camera, CameraConfig, LightConfig, Material, MaterialConfig, Mesh, MeshConfig, PassesConfig,
    RenderConfig, RenderSettings, Scene, SceneConfig, Timeline, TranslationKey, TriMesh,
};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestScene {
    Pond,
    Mirrorbox,
    Registration,
}

impl TestScene {
    pub fn name(self) -> &'static str {
        match self {
            TestScene::Pond => "pond",
            TestScene::Mirrorbox => "mirrorbox",
            TestScene::Registration => "registration",
        }
    }

    /// Square render size used when none is requested.
    pub fn default_size(self) -> usize {
        match self {
            TestScene::Registration => 512,
            TestScene::Pond | TestScene::Mirrorbox => 256,
        }
    }
}

impl FromStr for TestScene {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pond" => Ok(TestScene::Pond),
            "mirrorbox" => Ok(TestScene::Mirrorbox),
            "registration" => Ok(TestScene::Registration),
            other => Err(Error::invalid(format!(
                "unknown test scene `{other}` (expected pond, mirrorbox or registration)"
            ))),
        }
    }
}

/// Geometry constants of the `mirrorbox` scene, exposed for analytic checks.
pub mod mirrorbox {
    pub const SPHERE_CENTER: [f64; 3] = [0.0, 1.0, 0.0];
    pub const SPHERE_RADIUS: f64 = 0.5;
    pub const CAMERA_POSITION: [f64; 3] = [0.0, 1.0, 5.0];
    pub const CAMERA_LOOK_AT: [f64; 3] = [0.0, 0.0, 0.0];
    pub const VFOV_DEG: f64 = 45.0;
}

/// Write `scene` into `dir` and return the path of its `scene.json`.
pub fn generate(scene: TestScene, dir: &Path, size: Option<usize>) -> Result<PathBuf> {
    let size = size.unwrap_or(scene.default_size());
    if size == 0 {
        return Err(Error::invalid("test scene size must be at least 1"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let config = match scene {
        TestScene::Registration => registration(dir, size)?,
        TestScene::Mirrorbox => mirror_box(dir, size)?,
        TestScene::Pond => pond(dir, size)?,
    };
    let path = dir.join("scene.json");
    let mut text = serde_json::to_string_pretty(&config).expect("config serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

struct ObjWriter {
    text: String,
    vertices: usize,
}

impl ObjWriter {
    fn new(comment: &str) -> Self {
        ObjWriter {
            text: format!("# {comment}\n"),
            vertices: 0,
        }
    }

    /// Returns the 1-based index of the new vertex.
    fn vertex(&mut self, p: [f64; 3]) -> usize {
        writeln!(self.text, "v {} {} {}", p[0], p[1], p[2]).unwrap();
        self.vertices += 1;
        self.vertices
    }

    fn face(&mut self, idx: &[usize]) {
        self.text.push('f');
        for i in idx {
            write!(self.text, " {i}").unwrap();
        }
        self.text.push('\n');
    }

    fn save(&self, dir: &Path, name: &str) -> Result<String> {
        let path = dir.join(name);
        std::fs::write(&path, &self.text).map_err(|e| Error::io(&path, e))?;
        Ok(name.to_string())
    }
}

/// Axis-aligned quad given by four corners, wound counter-clockwise.
fn quad(corners: [[f64; 3]; 4]) -> ObjWriter {
    let mut obj = ObjWriter::new("quad");
    let idx: Vec<usize> = corners.iter().map(|&c| obj.vertex(c)).collect();
    obj.face(&idx);
    obj
}

/// Horizontal regular polygon (lily pad) centered at `c`.
fn disc(c: [f64; 3], radius: f64, sides: usize) -> ObjWriter {
    let mut obj = ObjWriter::new("disc");
    let idx: Vec<usize> = (0..sides)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            obj.vertex([c[0] + radius * a.cos(), c[1], c[2] - radius * a.sin()])
        })
        .collect();
    obj.face(&idx);
    obj
}

/// Pyramid with a regular polygon base (flower bud) standing on `base`.
fn cone(base: [f64; 3], radius: f64, height: f64, sides: usize) -> ObjWriter {
    let mut obj = ObjWriter::new("cone");
    let apex = obj.vertex([base[0], base[1] + height, base[2]]);
    let ring: Vec<usize> = (0..sides)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            obj.vertex([base[0] + radius * a.cos(), base[1], base[2] - radius * a.sin()])
        })
        .collect();
    for k in 0..sides {
        obj.face(&[apex, ring[k], ring[(k + 1) % sides]]);
    }
    let mut bottom = ring.clone();
    bottom.reverse();
    obj.face(&bottom);
    obj
}

fn uv_sphere(center: [f64; 3], radius: f64, segments: usize, rings: usize) -> ObjWriter {
    let mut obj = ObjWriter::new("uv sphere");
    let point = |ring: usize, seg: usize| {
        let theta = std::f64::consts::PI * ring as f64 / rings as f64;
        let phi = std::f64::consts::TAU * seg as f64 / segments as f64;
        [
            center[0] + radius * theta.sin() * phi.cos(),
            center[1] + radius * theta.cos(),
            center[2] + radius * theta.sin() * phi.sin(),
        ]
    };
    let top = obj.vertex(point(0, 0));
    let mut grid = Vec::new();
    for r in 1..rings {
        grid.push((0..segments).map(|s| obj.vertex(point(r, s))).collect::<Vec<_>>());
    }
    let bottom = obj.vertex(point(rings, 0));
    for s in 0..segments {
        let n = (s + 1) % segments;
        obj.face(&[top, grid[0][n], grid[0][s]]);
        for r in 0..rings - 2 {
            obj.face(&[grid[r][s], grid[r][n], grid[r + 1][n], grid[r + 1][s]]);
        }
        obj.face(&[bottom, grid[rings - 2][s], grid[rings - 2][n]]);
    }
    obj
}

/// Flat painted field with soft brush-like modulation.
fn painting(size: usize, base: Rgb, amplitude: f64, phase: f64) -> Image {
    Image::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64 / size as f64, y as f64 / size as f64);
        let stroke = (fx * 37.0 + 3.0 * (fy * 5.0 + phase).sin()).sin() * 0.6
            + (fy * 23.0 + 2.0 * (fx * 7.0 - phase).cos()).sin() * 0.4;
        base.map(|c| (c * (1.0 + amplitude * stroke)).clamp(0.02, 0.98))
    })
    .expect("size checked by caller")
}

fn write_pair(dir: &Path, name: &str, shadow: &Image, diffuse: &Image) -> Result<(String, String)> {
    let s = format!("{name}_shadow.png");
    let d = format!("{name}_diffuse.png");
    save_png(shadow, dir.join(&s), BitDepth::Eight)?;
    save_png(diffuse, dir.join(&d), BitDepth::Eight)?;
    Ok((s, d))
}

fn material(id: &str, ks: f64, eta: f64, base: [f64; 3], shininess: f64, tex: (String, String)) -> MaterialConfig {
    MaterialConfig {
        id: id.into(),
        ks,
        eta,
        base_color: base,
        shininess,
        shadow_texture: tex.0,
        diffuse_texture: tex.1,
    }
}

fn mesh(obj_path: String, material: &str) -> MeshConfig {
    MeshConfig {
        obj_path,
        material: material.into(),
        track: None,
    }
}

fn render_config(size: usize, frames: u32) -> RenderConfig {
    RenderConfig {
        width: size,
        height: size,
        frames,
        fps: 12.0,
        max_depth: 3,
        fresnel: false,
        background: [0.0; 3],
    }
}

/// Checkerboard with 8 squares per side.
pub fn checkerboard(size: usize, a: Rgb, b: Rgb) -> Image {
    let cell = (size / 8).max(1);
    Image::from_fn(size, size, |x, y| if (x / cell + y / cell).is_multiple_of(2) { a } else { b })
        .expect("size checked by caller")
}

fn registration(dir: &Path, size: usize) -> Result<SceneConfig> {
    // vfov 40 at distance 5 spans +-1.82; the quad overfills the view.
    let h = 2.5;
    let z = -5.0;
    let canvas = quad([[-h, -h, z], [h, -h, z], [h, h, z], [-h, h, z]]).save(dir, "canvas.obj")?;
    let diffuse = checkerboard(size, Rgb::new(0.9, 0.8, 0.6), Rgb::new(0.6, 0.25, 0.15));
    let shadow = checkerboard(size, Rgb::new(0.35, 0.3, 0.4), Rgb::new(0.15, 0.08, 0.15));
    let tex = write_pair(dir, "checker", &shadow, &diffuse)?;
    Ok(SceneConfig {
        render: render_config(size, 1),
        camera: CameraConfig {
            position: [0.0, 0.0, 0.0],
            look_at: [0.0, 0.0, -1.0],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 40.0,
        },
        light: LightConfig {
            corner: [-0.5, 3.0, -2.0],
            edge_u: [1.0, 0.0, 0.0],
            edge_v: [0.0, 0.0, 1.0],
            emission: [1.0; 3],
            ambient: [0.1; 3],
            track: None,
        },
        materials: vec![material("canvas", 0.0, 1.0, [0.8; 3], 16.0, tex)],
        meshes: vec![mesh(canvas, "canvas")],
        passes: PassesConfig::default(),
    })
}

fn mirror_box(dir: &Path, size: usize) -> Result<SceneConfig> {
    use mirrorbox::*;
    let floor = quad([
        [-30.0, 0.0, 12.0],
        [30.0, 0.0, 12.0],
        [30.0, 0.0, -40.0],
        [-30.0, 0.0, -40.0],
    ])
    .save(dir, "floor.obj")?;
    let sphere = uv_sphere(SPHERE_CENTER, SPHERE_RADIUS, 48, 24).save(dir, "sphere.obj")?;
    let floor_tex = write_pair(
        dir,
        "floor",
        &Image::new(size, size, Rgb::new(0.05, 0.05, 0.2))?,
        &Image::new(size, size, Rgb::new(0.2, 0.2, 0.6))?,
    )?;
    let sphere_tex = write_pair(
        dir,
        "sphere",
        &Image::new(size, size, Rgb::new(0.4, 0.05, 0.05))?,
        &Image::new(size, size, Rgb::new(0.9, 0.1, 0.1))?,
    )?;
    Ok(SceneConfig {
        render: render_config(size, 1),
        camera: CameraConfig {
            position: CAMERA_POSITION,
            look_at: CAMERA_LOOK_AT,
            up: [0.0, 1.0, 0.0],
            vfov_deg: VFOV_DEG,
        },
        light: LightConfig {
            corner: [-0.5, 4.0, -0.5],
            edge_u: [1.0, 0.0, 0.0],
            edge_v: [0.0, 0.0, 1.0],
            emission: [1.0; 3],
            ambient: [0.1; 3],
            track: None,
        },
        materials: vec![
            material("mirror", 1.0, 1.5, [0.7, 0.7, 0.75], 200.0, floor_tex),
            material("ball", 0.0, 1.5, [0.8, 0.3, 0.3], 32.0, sphere_tex),
        ],
        meshes: vec![mesh(floor, "mirror"), mesh(sphere, "ball")],
        passes: PassesConfig::default(),
    })
}

fn pond(dir: &Path, size: usize) -> Result<SceneConfig> {
    let water = quad([
        [-12.0, 0.0, 8.0],
        [12.0, 0.0, 8.0],
        [12.0, 0.0, -20.0],
        [-12.0, 0.0, -20.0],
    ])
    .save(dir, "water.obj")?;
    let pads = [
        ([-1.3, 0.02, 0.4], 0.55),
        ([0.6, 0.02, -0.6], 0.7),
        ([1.7, 0.02, 1.0], 0.45),
        ([-0.4, 0.02, 1.6], 0.35),
        ([-2.2, 0.02, -1.4], 0.6),
    ];
    let mut meshes = Vec::new();
    meshes.push(mesh(water, "water"));
    for (i, (c, r)) in pads.iter().enumerate() {
        let name = disc(*c, *r, 12).save(dir, &format!("pad{i}.obj"))?;
        meshes.push(mesh(name, "pad"));
    }
    let flower = cone([0.6, 0.02, -0.6], 0.25, 0.7, 8).save(dir, "flower.obj")?;
    meshes.push(mesh(flower, "flower"));

    let water_tex = write_pair(
        dir,
        "water",
        &painting(size, Rgb::new(0.08, 0.12, 0.28), 0.25, 0.3),
        &painting(size, Rgb::new(0.55, 0.75, 0.8), 0.12, 0.3),
    )?;
    let pad_tex = write_pair(
        dir,
        "pad",
        &painting(size, Rgb::new(0.06, 0.18, 0.1), 0.3, 1.1),
        &painting(size, Rgb::new(0.45, 0.75, 0.3), 0.15, 1.1),
    )?;
    let flower_tex = write_pair(
        dir,
        "flower",
        &painting(size, Rgb::new(0.35, 0.12, 0.28), 0.2, 2.0),
        &painting(size, Rgb::new(0.95, 0.6, 0.7), 0.1, 2.0),
    )?;

    Ok(SceneConfig {
        render: render_config(size, 8),
        camera: CameraConfig {
            position: [0.0, 2.2, 6.0],
            look_at: [0.0, 0.2, 0.0],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 40.0,
        },
        light: LightConfig {
            corner: [-0.75, 4.0, -3.75],
            edge_u: [1.5, 0.0, 0.0],
            edge_v: [0.0, 0.0, 1.5],
            emission: [0.9, 0.85, 0.75],
            ambient: [0.12, 0.12, 0.15],
            track: Some(vec![
                TranslationKey {
                    frame: 0.0,
                    translation: [-4.0, 0.0, 0.0],
                },
                TranslationKey {
                    frame: 7.0,
                    translation: [4.0, 0.0, 0.0],
                },
            ]),
        },
        materials: vec![
            material("water", 0.6, 1.33, [0.35, 0.45, 0.5], 80.0, water_tex),
            material("pad", 0.0, 1.4, [0.4, 0.7, 0.35], 12.0, pad_tex),
            material("flower", 0.0, 1.4, [0.95, 0.7, 0.75], 24.0, flower_tex),
        ],
        meshes,
        passes: PassesConfig::default(),
    })
}

/// A floor point under a unit square light whose left half is hidden by a
/// plate halfway up.
///
/// The light spans `x, z` in `[-0.5, 0.5]` at height 4 and the plate covers
/// `x < 0` at height 2, so seen from the returned point (the origin) the
/// plate's edge bisects the light exactly.
pub fn half_occluded() -> Result<(Scene, Vec3)> {
    let size = 4;
    let tex = Arc::new(Image::new(size, size, Rgb::splat(0.5))?);
    let material = Material {
        id: "gray".into(),
        ks: 0.0,
        eta: 1.0,
        base_color: Rgb::WHITE,
        shininess: 16.0,
        shadow_texture: tex.clone(),
        diffuse_texture: tex,
    };
    let tri = |vertices: Vec<Vec3>| TriMesh {
        vertices,
        triangles: vec![[0, 1, 2], [0, 2, 3]],
    };
    let floor = tri(vec![
        Vec3::new(-3.0, 0.0, 3.0),
        Vec3::new(3.0, 0.0, 3.0),
        Vec3::new(3.0, 0.0, -3.0),
        Vec3::new(-3.0, 0.0, -3.0),
    ]);
    let plate = tri(vec![
        Vec3::new(-5.0, 2.0, 5.0),
        Vec3::new(0.0, 2.0, 5.0),
        Vec3::new(0.0, 2.0, -5.0),
        Vec3::new(-5.0, 2.0, -5.0),
    ]);
    let scene = Scene::new(
        size,
        size,
        Camera::new(Vec3::new(0.0, 1.0, 6.0), Vec3::zeros(), Vec3::y(), 40.0, 1.0)?,
        AreaLight::new(
            Vec3::new(-0.5, 4.0, -0.5),
            Vec3::x(),
            Vec3::z(),
            Rgb::WHITE,
            Rgb::splat(0.1),
        )?,
        vec![material],
        vec![Mesh::new("floor", floor, 0), Mesh::new("plate", plate, 0)],
        Timeline::new(1, 24.0)?,
        RenderSettings::default(),
    )?;
    Ok((scene, Vec3::zeros()))
}
