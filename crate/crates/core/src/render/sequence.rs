use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::{render_pass, PassKind};
use crate::error::{Error, Result};
use crate::image::{save_png, BitDepth, Image};
use crate::manifest::{manifest_path, Manifest, PassName};
use crate::scene::Scene;
use crate::Vec3;

/// Inclusive frame range `first..=last`, written `first..last` on the
/// command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameRange {
    pub first: u32,
    pub last: u32,
}

impl FrameRange {
    pub fn new(first: u32, last: u32) -> Result<Self> {
        if first > last {
            return Err(Error::invalid(format!("frame range {first}..{last} is reversed")));
        }
        Ok(FrameRange { first, last })
    }

    /// Every frame of a timeline with `frame_count` frames.
    pub fn all(frame_count: u32) -> Self {
        FrameRange {
            first: 0,
            last: frame_count.saturating_sub(1),
        }
    }

    pub fn len(&self) -> u32 {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

impl fmt::Display for FrameRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl FromStr for FrameRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad frame number `{t}` in range `{s}`")))
        };
        match s.split_once("..") {
            Some((a, b)) => FrameRange::new(parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let f = parse(s)?;
                Ok(FrameRange { first: f, last: f })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenderJob {
    pub kind: PassKind,
    pub frames: FrameRange,
    pub light_samples: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub bitdepth: BitDepth,
}

struct Fingerprint(Sha256);

impl Fingerprint {
    fn tag(&mut self, s: &str) {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.update(v.to_bits().to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.update(v.to_le_bytes());
    }

    fn vec3(&mut self, v: &Vec3) {
        v.iter().for_each(|&c| self.f64(c));
    }

    fn rgb(&mut self, c: crate::image::Rgb) {
        c.0.iter().for_each(|&v| self.f64(v));
    }

    fn image(&mut self, img: &Image) {
        self.u64(img.width() as u64);
        self.u64(img.height() as u64);
        img.pixels().iter().for_each(|&p| self.rgb(p));
    }
}

/// Digest of every scene input that can change the frames of `kind`.
///
/// Texture passes ignore the light entirely and the flat shading colors;
/// the weight pass ignores the control paintings. Frame count and fps are
/// excluded because the frame range is recorded separately.
pub fn pass_fingerprint(scene: &Scene, kind: PassKind, light_samples: u32, bitdepth: BitDepth) -> String {
    let mut fp = Fingerprint(Sha256::new());
    fp.tag("baryflow-pass-v1");
    fp.tag(kind.name());
    fp.u64(u8::from(bitdepth) as u64);
    fp.u64(scene.width() as u64);
    fp.u64(scene.height() as u64);

    let cam = scene.camera();
    fp.vec3(&cam.position());
    fp.vec3(&cam.look_at());
    fp.vec3(&cam.up());
    fp.f64(cam.vfov_deg());

    let settings = &scene.settings;
    fp.u64(settings.max_depth as u64);
    fp.u64(settings.fresnel as u64);
    fp.rgb(settings.background);

    for m in scene.materials() {
        fp.tag(&m.id);
        fp.f64(m.ks);
        fp.f64(m.eta);
        match kind {
            PassKind::ShadowTexture => fp.image(&m.shadow_texture),
            PassKind::DiffuseTexture => fp.image(&m.diffuse_texture),
            PassKind::Weight => {
                fp.rgb(m.base_color);
                fp.f64(m.shininess);
            }
        }
    }

    for (i, mesh) in scene.meshes().iter().enumerate() {
        fp.u64(mesh.material as u64);
        fp.vec3(&mesh.pivot);
        fp.u64(mesh.geometry.vertices.len() as u64);
        mesh.geometry.vertices.iter().for_each(|v| fp.vec3(v));
        fp.u64(mesh.geometry.triangles.len() as u64);
        for t in &mesh.geometry.triangles {
            t.iter().for_each(|&k| fp.u64(k as u64));
        }
        match scene.timeline().mesh_track(i) {
            Some(track) => {
                fp.u64(track.keys().len() as u64);
                for k in track.keys() {
                    fp.f64(k.frame);
                    fp.vec3(&k.value.translation);
                    fp.vec3(&k.value.rotation_deg);
                }
            }
            None => fp.u64(0),
        }
    }

    if kind == PassKind::Weight {
        let light = scene.light();
        fp.vec3(&light.corner);
        fp.vec3(&light.edge_u);
        fp.vec3(&light.edge_v);
        fp.rgb(light.emission);
        fp.rgb(light.ambient);
        match scene.timeline().light_track() {
            Some(track) => {
                fp.u64(track.keys().len() as u64);
                for k in track.keys() {
                    fp.f64(k.frame);
                    fp.vec3(&k.value);
                }
            }
            None => fp.u64(0),
        }
        fp.u64(light_samples as u64);
    }
    hex::encode(fp.0.finalize())
}

/// Render `job.frames` of one pass into `job.output_dir`.
///
/// The manifest is written first with `complete: false` and only flipped to
/// `true` after the last frame is on disk, so an interrupted run is visible as
/// such.
pub fn render_sequence(scene: &Scene, job: &RenderJob) -> Result<Manifest> {
    let count = scene.timeline().frame_count();
    if job.frames.last >= count {
        return Err(Error::invalid(format!(
            "frame range {} outside timeline 0..{}",
            job.frames,
            count - 1
        )));
    }
    std::fs::create_dir_all(&job.output_dir).map_err(|e| Error::io(&job.output_dir, e))?;
    let pass = PassName::from(job.kind);
    let path = manifest_path(&job.output_dir, pass);
    let mut manifest = Manifest {
        pass,
        frames: [job.frames.first, job.frames.last],
        seed: job.seed,
        config_sha256: pass_fingerprint(scene, job.kind, job.light_samples, job.bitdepth),
        complete: false,
        composite: None,
    };
    manifest.write(&path)?;
    for (frame, file) in manifest.frame_paths(&job.output_dir) {
        let image = render_pass(scene, job.kind, frame, job.light_samples, job.seed)?;
        save_png(&image, &file, job.bitdepth)?;
    }
    manifest.complete = true;
    manifest.write(&path)?;
    Ok(manifest)
}
