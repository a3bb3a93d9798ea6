//! Dynamic still-life paintings by barycentric compositing.
//!
//! A registered proxy scene is rendered three times per frame: two unlit
//! passes that carry the projected shadow and lit control paintings (plus
//! mirror reflections of them), and one lit pass with a single flat material
//! per object. The lit pass is then used, per pixel and per channel, as the
//! interpolation weight between the two painting passes.
//!
//! Module map:
//! * [`image`] and [`filters`]: linear float images, PNG I/O, weight filters.
//! * [`scene`]: proxy meshes, materials, camera projection, keyframe tracks.
//! * [`render`]: ray tracer for the `t0`, `t1` and `w` passes.
//! * [`composite`]: the compositing formulas and the weight manipulator chain.
//! * [`manifest`]: on-disk sequence layout shared with external renderers.
//! * [`pipeline`]: cached end-to-end runs.
//! * [`testscene`]: procedural scenes standing in for real artwork.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composite;
pub mod error;
pub mod filters;
pub mod image;
pub mod manifest;
pub mod pipeline;
pub mod render;
pub mod scene;
pub mod testscene;

pub use error::{Error, Result};

/// World-space vector type used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
