//! Linear-light float images and PNG I/O.
//!
//! Pixels are stored as linear RGB in `f64`. PNG files are always sRGB encoded,
//! so decoding applies the sRGB EOTF and encoding applies its inverse. Values
//! may leave `[0, 1]` while an image is being worked on; they are clamped when
//! written to disk.

use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::path::Path;

use ::image::{DynamicImage, ImageBuffer, ImageError};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear-light RGB triple.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rgb(pub [f64; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0.0; 3]);
    pub const WHITE: Rgb = Rgb([1.0; 3]);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb([r, g, b])
    }

    pub const fn splat(v: f64) -> Self {
        Rgb([v; 3])
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Rgb(self.0.map(f))
    }

    pub fn zip_with(self, other: Rgb, f: impl Fn(f64, f64) -> f64) -> Self {
        Rgb([
            f(self.0[0], other.0[0]),
            f(self.0[1], other.0[1]),
            f(self.0[2], other.0[2]),
        ])
    }

    pub fn clamp01(self) -> Self {
        self.map(|c| c.clamp(0.0, 1.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn max_channel(&self) -> f64 {
        self.0[0].max(self.0[1]).max(self.0[2])
    }
}

impl Add for Rgb {
    type Output = Rgb;
    fn add(self, rhs: Rgb) -> Rgb {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for Rgb {
    type Output = Rgb;
    fn sub(self, rhs: Rgb) -> Rgb {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for Rgb {
    type Output = Rgb;
    fn mul(self, rhs: Rgb) -> Rgb {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for Rgb {
    type Output = Rgb;
    fn mul(self, rhs: f64) -> Rgb {
        self.map(|a| a * rhs)
    }
}

impl Index<usize> for Rgb {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Rgb {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// PNG sample depth used when writing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BitDepth {
    Eight,
    #[default]
    Sixteen,
}

impl TryFrom<u8> for BitDepth {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(format!("bit depth must be 8 or 16, got {other}")),
        }
    }
}

impl From<BitDepth> for u8 {
    fn from(d: BitDepth) -> u8 {
        match d {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }
}

/// Row-major grid of linear RGB pixels. Dimensions are always at least 1x1.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Image {
    /// Image filled with a single color. `Image::new(w, h, Rgb::WHITE)` is the
    /// white image used as the identity weight.
    pub fn new(width: usize, height: usize, fill: Rgb) -> Result<Self> {
        check_dims(width, height)?;
        if !fill.is_finite() {
            return Err(Error::invalid("fill color must be finite"));
        }
        Ok(Image {
            width,
            height,
            pixels: vec![fill; width * height],
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Rgb) -> Result<Self> {
        check_dims(width, height)?;
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    /// Apply `f` to every pixel, producing a new image of the same size.
    pub fn map(&self, f: impl Fn(Rgb) -> Rgb) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn clamped(&self) -> Image {
        self.map(Rgb::clamp01)
    }

    /// Per-channel mean over all pixels.
    pub fn channel_means(&self) -> [f64; 3] {
        let n = self.pixels.len() as f64;
        let mut sum = [0.0; 3];
        for p in &self.pixels {
            for c in 0..3 {
                sum[c] += p[c];
            }
        }
        sum.map(|s| s / n)
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert_eq!(self.dims(), other.dims(), "image dimensions differ");
        self.pixels
            .iter()
            .zip(&other.pixels)
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.pixels.iter().all(Rgb::is_finite)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// sRGB electro-optical transfer function: encoded value to linear light.
pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Inverse of [`srgb_to_linear`].
pub fn linear_to_srgb(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

/// Read an 8- or 16-bit RGB/RGBA PNG into linear light. Alpha is discarded.
pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = ::image::open(path).map_err(|e| image_error(path, e))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<Rgb> = match decoded {
        DynamicImage::ImageRgb8(buf) => {
            let lut = srgb8_lut();
            buf.pixels()
                .map(|p| Rgb(p.0.map(|c| lut[c as usize])))
                .collect()
        }
        DynamicImage::ImageRgba8(buf) => {
            let lut = srgb8_lut();
            buf.pixels()
                .map(|p| Rgb::new(lut[p.0[0] as usize], lut[p.0[1] as usize], lut[p.0[2] as usize]))
                .collect()
        }
        DynamicImage::ImageRgb16(buf) => buf
            .pixels()
            .map(|p| Rgb(p.0.map(decode16)))
            .collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| Rgb::new(decode16(p.0[0]), decode16(p.0[1]), decode16(p.0[2])))
            .collect(),
        other => {
            return Err(Error::format(
                path,
                format!(
                    "unsupported PNG color type {:?}; expected 8- or 16-bit RGB or RGBA",
                    other.color()
                ),
            ))
        }
    };
    Image::from_pixels(w, h, pixels)
}

/// Write `image` as an sRGB-encoded RGB PNG. Channels are clamped to `[0, 1]`.
pub fn save_png(image: &Image, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (image.width as u32, image.height as u32);
    let result = match depth {
        BitDepth::Eight => {
            let raw: Vec<u8> = image
                .pixels
                .iter()
                .flat_map(|p| p.0.map(|c| encode(c, 255.0) as u8))
                .collect();
            ImageBuffer::<::image::Rgb<u8>, _>::from_raw(w, h, raw)
                .expect("buffer length matches dimensions")
                .save_with_format(path, ::image::ImageFormat::Png)
        }
        BitDepth::Sixteen => {
            let raw: Vec<u16> = image
                .pixels
                .iter()
                .flat_map(|p| p.0.map(|c| encode(c, 65535.0) as u16))
                .collect();
            ImageBuffer::<::image::Rgb<u16>, _>::from_raw(w, h, raw)
                .expect("buffer length matches dimensions")
                .save_with_format(path, ::image::ImageFormat::Png)
        }
    };
    result.map_err(|e| image_error(path, e))
}

fn encode(linear: f64, scale: f64) -> f64 {
    (linear_to_srgb(linear.clamp(0.0, 1.0)) * scale).round()
}

fn decode16(v: u16) -> f64 {
    srgb_to_linear(v as f64 / 65535.0)
}

fn srgb8_lut() -> [f64; 256] {
    std::array::from_fn(|i| srgb_to_linear(i as f64 / 255.0))
}

fn image_error(path: &Path, e: ImageError) -> Error {
    match e {
        ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}
