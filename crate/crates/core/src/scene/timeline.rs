//! Keyframe tracks with piecewise-linear interpolation.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Rotation3;

use crate::error::{Error, Result};
use crate::Vec3;

pub trait Lerp: Clone {
    fn lerp(&self, other: &Self, t: f64) -> Self;
}

impl Lerp for f64 {
    fn lerp(&self, other: &Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl Lerp for Vec3 {
    fn lerp(&self, other: &Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

/// Rigid pose: Euler rotation (degrees, applied X then Y then Z) about a
/// pivot, followed by a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation_deg: Vec3,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            translation: Vec3::zeros(),
            rotation_deg: Vec3::zeros(),
        }
    }

    pub fn apply(&self, point: Vec3, pivot: Vec3) -> Vec3 {
        let r = self.rotation_deg.map(f64::to_radians);
        let rotation = Rotation3::from_euler_angles(r.x, r.y, r.z);
        rotation * (point - pivot) + pivot + self.translation
    }
}

impl Lerp for Pose {
    fn lerp(&self, other: &Self, t: f64) -> Self {
        Pose {
            translation: self.translation.lerp(&other.translation, t),
            rotation_deg: self.rotation_deg.lerp(&other.rotation_deg, t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Keyframe<T> {
    pub frame: f64,
    pub value: T,
}

/// Non-empty list of keyframes with strictly increasing frames.
#[derive(Clone, Debug, PartialEq)]
pub struct Track<T> {
    keys: Vec<Keyframe<T>>,
}

impl<T: Lerp> Track<T> {
    pub fn new(keys: Vec<Keyframe<T>>) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::validation("track has no keyframes"));
        }
        if keys.iter().any(|k| !k.frame.is_finite()) {
            return Err(Error::validation("track keyframe frames must be finite"));
        }
        if let Some(w) = keys.windows(2).find(|w| w[1].frame <= w[0].frame) {
            return Err(Error::validation(format!(
                "track keyframes must be strictly increasing (frame {} follows {})",
                w[1].frame, w[0].frame
            )));
        }
        Ok(Track { keys })
    }

    pub fn keys(&self) -> &[Keyframe<T>] {
        &self.keys
    }

    /// Linear between bracketing keys, constant outside the keyed range.
    pub fn sample(&self, frame: f64) -> T {
        let first = &self.keys[0];
        let last = &self.keys[self.keys.len() - 1];
        if frame <= first.frame {
            return first.value.clone();
        }
        if frame >= last.frame {
            return last.value.clone();
        }
        let i = self.keys.partition_point(|k| k.frame <= frame);
        let (a, b) = (&self.keys[i - 1], &self.keys[i]);
        let t = (frame - a.frame) / (b.frame - a.frame);
        a.value.lerp(&b.value, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrackId {
    Light,
    Mesh(usize),
}

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackId::Light => write!(f, "light"),
            TrackId::Mesh(i) => write!(f, "mesh[{i}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrackValue {
    Translation(Vec3),
    Pose(Pose),
}

#[derive(Clone, Debug)]
pub struct Timeline {
    frame_count: u32,
    fps: f64,
    light: Option<Track<Vec3>>,
    meshes: BTreeMap<usize, Track<Pose>>,
}

impl Timeline {
    pub fn new(frame_count: u32, fps: f64) -> Result<Self> {
        if frame_count < 1 {
            return Err(Error::validation("render.frames must be at least 1"));
        }
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::validation(format!("render.fps must be positive, got {fps}")));
        }
        Ok(Timeline {
            frame_count,
            fps,
            light: None,
            meshes: BTreeMap::new(),
        })
    }

    pub fn with_light_track(mut self, track: Track<Vec3>) -> Self {
        self.light = Some(track);
        self
    }

    pub fn with_mesh_track(mut self, mesh: usize, track: Track<Pose>) -> Self {
        self.meshes.insert(mesh, track);
        self
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn light_track(&self) -> Option<&Track<Vec3>> {
        self.light.as_ref()
    }

    pub fn mesh_track(&self, mesh: usize) -> Option<&Track<Pose>> {
        self.meshes.get(&mesh)
    }

    pub fn interpolate_track(&self, id: TrackId, frame: f64) -> Result<TrackValue> {
        match id {
            TrackId::Light => self
                .light
                .as_ref()
                .map(|t| TrackValue::Translation(t.sample(frame))),
            TrackId::Mesh(i) => self.meshes.get(&i).map(|t| TrackValue::Pose(t.sample(frame))),
        }
        .ok_or_else(|| Error::Lookup(id.to_string()))
    }

    /// Light translation at `frame`; zero for an untracked light.
    pub fn light_offset(&self, frame: f64) -> Vec3 {
        self.light.as_ref().map_or_else(Vec3::zeros, |t| t.sample(frame))
    }

    /// Mesh pose at `frame`; identity for an untracked mesh.
    pub fn mesh_pose(&self, mesh: usize, frame: f64) -> Pose {
        self.meshes.get(&mesh).map_or_else(Pose::identity, |t| t.sample(frame))
    }
}
