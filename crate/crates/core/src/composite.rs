//! Barycentric compositing of the two texture animations.
//!
//! Each output channel is `c = t1 * w + t0 * (1 - w)`: the weight animation
//! picks, per pixel and per channel, how far to move from the shadow painting
//! toward the fully lit painting. White weight reproduces `t1`, black weight
//! reproduces `t0`. The weight image can be reshaped by a
//! [`ManipulatorChain`] before compositing without touching either texture
//! pass, which is what makes re-styling cheap: no frame has to be re-rendered.
//!
//! The classical linear formula `c = t1 * w` is the special case `t0 = 0`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{dither, gaussian_blur, hue_shift, saturate, DitherSpec};
use crate::image::{load_png, save_png, BitDepth, Image, Rgb};
use crate::manifest::{
    file_sha256, manifest_path, sha256_hex, CompositeRecord, InputDigests, Manifest, PassName,
};

const WEIGHT_GRID: f64 = (1u64 << 53) as f64;

/// Snap `w` to multiples of 2^-53 so that `1 - w` is exact and
/// `weights(1 - w)` is precisely `weights(w)` swapped.
fn weights(w: f64) -> (f64, f64) {
    let w = (w * WEIGHT_GRID).round_ties_even() / WEIGHT_GRID;
    (w, 1.0 - w)
}

fn blend(t0: f64, t1: f64, w: f64) -> f64 {
    let (t0, t1) = (t0.clamp(0.0, 1.0), t1.clamp(0.0, 1.0));
    let (w1, w0) = weights(w.clamp(0.0, 1.0));
    // The clamp keeps rounding from stepping outside the segment [t0, t1].
    (t1 * w1 + t0 * w0).clamp(t0.min(t1), t0.max(t1))
}

fn check_same_dims(reference: &Image, ref_name: &str, other: &Image, other_name: &str) -> Result<()> {
    if reference.dims() != other.dims() {
        return Err(Error::Shape(format!(
            "{other_name} is {}x{} but {ref_name} is {}x{}",
            other.width(),
            other.height(),
            reference.width(),
            reference.height()
        )));
    }
    Ok(())
}

/// Per pixel and channel: `t1 * w + t0 * (1 - w)`, inputs clamped to `[0, 1]`.
pub fn composite_frame(t0: &Image, t1: &Image, w: &Image) -> Result<Image> {
    check_same_dims(t0, "t0", t1, "t1")?;
    check_same_dims(t0, "t0", w, "w")?;
    let pixels = t0
        .pixels()
        .iter()
        .zip(t1.pixels())
        .zip(w.pixels())
        .map(|((a, b), c)| Rgb([0, 1, 2].map(|k| blend(a[k], b[k], c[k]))))
        .collect();
    Image::from_pixels(t0.width(), t0.height(), pixels)
}

/// `t1 * w`, i.e. [`composite_frame`] with an all-black `t0`.
pub fn classical_composite(t1: &Image, w: &Image) -> Result<Image> {
    check_same_dims(t1, "t1", w, "w")?;
    let pixels = t1
        .pixels()
        .iter()
        .zip(w.pixels())
        .map(|(b, c)| Rgb([0, 1, 2].map(|k| blend(0.0, b[k], c[k]))))
        .collect();
    Image::from_pixels(t1.width(), t1.height(), pixels)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    #[default]
    Barycentric,
    Classical,
}

impl Formula {
    pub fn apply(self, t0: &Image, t1: &Image, w: &Image) -> Result<Image> {
        match self {
            Formula::Barycentric => composite_frame(t0, t1, w),
            Formula::Classical => {
                check_same_dims(t0, "t0", t1, "t1")?;
                classical_composite(t1, w)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formula::Barycentric => "barycentric",
            Formula::Classical => "classical",
        })
    }
}

impl FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "barycentric" => Ok(Formula::Barycentric),
            "classical" => Ok(Formula::Classical),
            other => Err(Error::invalid(format!(
                "unknown formula `{other}` (expected barycentric or classical)"
            ))),
        }
    }
}

/// One weight-image manipulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manipulator {
    HueShift { degrees: f64 },
    Saturate { factor: f64 },
    GaussianBlur { sigma: f64 },
    Dither(DitherSpec),
}

impl Manipulator {
    fn validate(&self) -> Result<()> {
        match *self {
            Manipulator::HueShift { degrees } if !degrees.is_finite() => {
                Err(Error::invalid("hue shift must be finite"))
            }
            Manipulator::Saturate { factor } if !(factor >= 0.0) || !factor.is_finite() => {
                Err(Error::invalid(format!("saturation factor {factor} must be >= 0")))
            }
            Manipulator::GaussianBlur { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
                Err(Error::invalid(format!("blur sigma {sigma} must be > 0")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, image: &Image) -> Result<Image> {
        match self {
            Manipulator::HueShift { degrees } => hue_shift(image, *degrees),
            Manipulator::Saturate { factor } => saturate(image, *factor),
            Manipulator::GaussianBlur { sigma } => gaussian_blur(image, *sigma),
            Manipulator::Dither(spec) => Ok(dither(image, spec)),
        }
    }
}

/// Ordered list of manipulations applied to the weight image only.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Manipulator>", into = "Vec<Manipulator>")]
pub struct ManipulatorChain {
    steps: Vec<Manipulator>,
}

impl ManipulatorChain {
    pub fn new(steps: Vec<Manipulator>) -> Result<Self> {
        steps.iter().try_for_each(Manipulator::validate)?;
        Ok(ManipulatorChain { steps })
    }

    pub fn identity() -> Self {
        ManipulatorChain::default()
    }

    pub fn steps(&self) -> &[Manipulator] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn apply(&self, w: &Image) -> Result<Image> {
        let mut out = w.clone();
        for step in &self.steps {
            out = step.apply(&out)?;
        }
        Ok(out)
    }
}

impl TryFrom<Vec<Manipulator>> for ManipulatorChain {
    type Error = Error;
    fn try_from(steps: Vec<Manipulator>) -> Result<Self> {
        ManipulatorChain::new(steps)
    }
}

impl From<ManipulatorChain> for Vec<Manipulator> {
    fn from(chain: ManipulatorChain) -> Self {
        chain.steps
    }
}

/// Apply `chain` to a weight image, left to right.
pub fn apply_chain(chain: &ManipulatorChain, w: &Image) -> Result<Image> {
    chain.apply(w)
}

/// A compositing run over three rendered sequences.
#[derive(Clone, Debug)]
pub struct CompositeJob {
    /// Paths of the `t0`, `t1` and `w` manifests; frames sit next to them.
    pub t0: PathBuf,
    pub t1: PathBuf,
    pub w: PathBuf,
    pub chain: ManipulatorChain,
    pub formula: Formula,
    pub output_dir: PathBuf,
    pub bitdepth: BitDepth,
}

struct Input {
    manifest: Manifest,
    dir: PathBuf,
    digest: String,
}

fn read_input(path: &Path, expected: PassName) -> Result<Input> {
    let manifest = Manifest::read(path)?;
    if manifest.pass != expected {
        return Err(Error::validation(format!(
            "{}: expected a {expected} manifest, found {}",
            path.display(),
            manifest.pass
        )));
    }
    if !manifest.complete {
        return Err(Error::validation(format!(
            "{}: {expected} sequence is incomplete",
            path.display()
        )));
    }
    Ok(Input {
        digest: file_sha256(path)?,
        dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        manifest,
    })
}

/// Composite every frame of the three input sequences into `c_<frame>.png`.
pub fn composite_sequence(job: &CompositeJob) -> Result<Manifest> {
    let t0 = read_input(&job.t0, PassName::T0)?;
    let t1 = read_input(&job.t1, PassName::T1)?;
    let w = read_input(&job.w, PassName::W)?;
    let range = t0.manifest.range();
    for other in [&t1, &w] {
        if other.manifest.range() != range {
            return Err(Error::validation(format!(
                "frame ranges differ: t0 covers {range}, {} covers {}",
                other.manifest.pass,
                other.manifest.range()
            )));
        }
    }

    std::fs::create_dir_all(&job.output_dir).map_err(|e| Error::io(&job.output_dir, e))?;
    let record = CompositeRecord {
        formula: job.formula,
        chain: job.chain.clone(),
        inputs: InputDigests {
            t0: t0.digest.clone(),
            t1: t1.digest.clone(),
            w: w.digest.clone(),
        },
    };
    let config = serde_json::to_vec(&(&record, u8::from(job.bitdepth))).expect("record serializes");
    let mut manifest = Manifest {
        pass: PassName::C,
        frames: [range.first, range.last],
        seed: w.manifest.seed,
        config_sha256: sha256_hex(&config),
        complete: false,
        composite: Some(record),
    };
    let path = manifest_path(&job.output_dir, PassName::C);
    manifest.write(&path)?;

    let frames: Vec<u32> = range.iter().collect();
    let results: Vec<Result<()>> = frames
        .par_iter()
        .map(|&f| {
            let load = |input: &Input| {
                let file = input.dir.join(crate::manifest::frame_file_name(input.manifest.pass, f));
                load_png(&file)
            };
            let (a, b, weight) = (load(&t0)?, load(&t1)?, load(&w)?);
            let weight = job.chain.apply(&weight)?;
            let c = job.formula.apply(&a, &b, &weight)?;
            save_png(
                &c,
                job.output_dir.join(crate::manifest::frame_file_name(PassName::C, f)),
                job.bitdepth,
            )
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;

    manifest.complete = true;
    manifest.write(&path)?;
    Ok(manifest)
}
