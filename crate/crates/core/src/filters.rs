//! Weight-image manipulations: hue rotation, saturation scaling, gaussian blur
//! and dithering. All of them are pure functions returning a new [`Image`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

/// Hue in degrees `[0, 360)`, saturation and value.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Hsv {
    h: f64,
    s: f64,
    v: f64,
}

fn rgb_to_hsv(c: Rgb) -> Hsv {
    let [r, g, b] = c.0;
    let v = c.max_channel();
    let min = r.min(g).min(b);
    let delta = v - min;
    if v <= 0.0 || delta <= 0.0 {
        return Hsv { h: 0.0, s: 0.0, v };
    }
    let s = delta / v;
    let h = if v == r {
        (g - b) / delta
    } else if v == g {
        2.0 + (b - r) / delta
    } else {
        4.0 + (r - g) / delta
    };
    Hsv {
        h: (h * 60.0).rem_euclid(360.0),
        s,
        v,
    }
}

// The largest channel is always `v` itself, never a recomputed sum.
fn hsv_to_rgb(hsv: Hsv) -> Rgb {
    let Hsv { h, s, v } = hsv;
    if s <= 0.0 {
        return Rgb::splat(v);
    }
    let h6 = h.rem_euclid(360.0) / 60.0;
    let sector = (h6.floor() as i64).rem_euclid(6);
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector {
        0 => Rgb::new(v, t, p),
        1 => Rgb::new(q, v, p),
        2 => Rgb::new(p, v, t),
        3 => Rgb::new(p, q, v),
        4 => Rgb::new(t, p, v),
        _ => Rgb::new(v, p, q),
    }
}

/// Rotate every pixel's HSV hue by `degrees`. Gray pixels are untouched.
pub fn hue_shift(image: &Image, degrees: f64) -> Result<Image> {
    if !degrees.is_finite() {
        return Err(Error::invalid("hue rotation must be finite"));
    }
    let shift = degrees.rem_euclid(360.0);
    if shift == 0.0 {
        return Ok(image.clone());
    }
    Ok(image.map(|p| {
        let mut hsv = rgb_to_hsv(p);
        if hsv.s <= 0.0 {
            return p;
        }
        hsv.h = (hsv.h + shift).rem_euclid(360.0);
        hsv_to_rgb(hsv)
    }))
}

/// Scale HSV saturation by `factor`, clamped to `[0, 1]`.
pub fn saturate(image: &Image, factor: f64) -> Result<Image> {
    if !(factor >= 0.0) || !factor.is_finite() {
        return Err(Error::invalid(format!(
            "saturation factor must be finite and non-negative, got {factor}"
        )));
    }
    if factor == 1.0 {
        return Ok(image.clone());
    }
    Ok(image.map(|p| {
        let mut hsv = rgb_to_hsv(p);
        if hsv.s <= 0.0 {
            return p;
        }
        hsv.s = (hsv.s * factor).clamp(0.0, 1.0);
        hsv_to_rgb(hsv)
    }))
}

/// Normalized 1-D gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable gaussian blur with clamp-to-edge addressing.
pub fn gaussian_blur(image: &Image, sigma: f64) -> Result<Image> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "blur sigma must be finite and positive, got {sigma}"
        )));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = image.dims();

    let horizontal = Image::from_fn(w, h, |x, y| {
        let mut acc = Rgb::BLACK;
        for (k, weight) in kernel.iter().enumerate() {
            let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
            acc = acc + image.get(sx, y) * *weight;
        }
        acc
    })?;
    Image::from_fn(w, h, |x, y| {
        let mut acc = Rgb::BLACK;
        for (k, weight) in kernel.iter().enumerate() {
            let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
            acc = acc + horizontal.get(x, sy) * *weight;
        }
        acc
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DitherMethod {
    #[serde(rename = "ordered-bayer-8x8")]
    OrderedBayer8x8,
    #[default]
    FloydSteinberg,
}

impl std::str::FromStr for DitherMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered-bayer-8x8" | "bayer" | "ordered" => Ok(DitherMethod::OrderedBayer8x8),
            "floyd-steinberg" | "fs" => Ok(DitherMethod::FloydSteinberg),
            other => Err(Error::invalid(format!("unknown dither method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDitherSpec")]
pub struct DitherSpec {
    method: DitherMethod,
    levels: u32,
}

#[derive(Deserialize)]
struct RawDitherSpec {
    method: DitherMethod,
    levels: u32,
}

impl TryFrom<RawDitherSpec> for DitherSpec {
    type Error = Error;
    fn try_from(raw: RawDitherSpec) -> Result<Self> {
        DitherSpec::new(raw.method, raw.levels)
    }
}

impl DitherSpec {
    pub fn new(method: DitherMethod, levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid(format!(
                "dither needs at least 2 levels, got {levels}"
            )));
        }
        Ok(DitherSpec { method, levels })
    }

    pub fn method(&self) -> DitherMethod {
        self.method
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// The `k`-th quantization level, `k / (levels - 1)`.
    pub fn level(&self, k: u32) -> f64 {
        k as f64 / (self.levels - 1) as f64
    }
}

/// `levels[:method]`, e.g. `4` or `2:ordered-bayer-8x8`.
impl std::str::FromStr for DitherSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (levels, method) = match s.split_once(':') {
            Some((l, m)) => (l, m.parse()?),
            None => (s, DitherMethod::default()),
        };
        let levels = levels
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad dither levels `{levels}`")))?;
        DitherSpec::new(method, levels)
    }
}

impl Default for DitherSpec {
    fn default() -> Self {
        DitherSpec {
            method: DitherMethod::FloydSteinberg,
            levels: 2,
        }
    }
}

const BAYER_8X8: [[u8; 8]; 8] = [
    [0, 32, 8, 40, 2, 34, 10, 42],
    [48, 16, 56, 24, 50, 18, 58, 26],
    [12, 44, 4, 36, 14, 46, 6, 38],
    [60, 28, 52, 20, 62, 30, 54, 22],
    [3, 35, 11, 43, 1, 33, 9, 41],
    [51, 19, 59, 27, 49, 17, 57, 25],
    [15, 47, 7, 39, 13, 45, 5, 37],
    [63, 31, 55, 23, 61, 29, 53, 21],
];

/// Quantize every channel to `spec.levels()` evenly spaced values.
pub fn dither(image: &Image, spec: &DitherSpec) -> Image {
    match spec.method {
        DitherMethod::OrderedBayer8x8 => dither_ordered(image, spec),
        DitherMethod::FloydSteinberg => dither_floyd_steinberg(image, spec),
    }
}

fn dither_ordered(image: &Image, spec: &DitherSpec) -> Image {
    let steps = (spec.levels - 1) as f64;
    let (w, h) = image.dims();
    Image::from_fn(w, h, |x, y| {
        let threshold = (BAYER_8X8[y % 8][x % 8] as f64 + 0.5) / 64.0;
        image.get(x, y).map(|c| {
            let scaled = c.clamp(0.0, 1.0) * steps;
            let base = scaled.floor();
            let k = if scaled - base > threshold { base + 1.0 } else { base };
            spec.level(k.min(steps) as u32)
        })
    })
    .expect("dimensions come from a valid image")
}

// Plain left-to-right raster scan; the result must not depend on scheduling.
fn dither_floyd_steinberg(image: &Image, spec: &DitherSpec) -> Image {
    let steps = (spec.levels - 1) as f64;
    let (w, h) = image.dims();
    let mut work: Vec<Rgb> = image.pixels().iter().map(|p| p.clamp01()).collect();
    let mut out = vec![Rgb::BLACK; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let old = work[i];
            let new = old.map(|c| {
                let k = (c * steps).round().clamp(0.0, steps);
                spec.level(k as u32)
            });
            out[i] = new;
            let err = old - new;
            let mut spread = |dx: isize, dy: usize, weight: f64| {
                let nx = x as isize + dx;
                let ny = y + dy;
                if nx >= 0 && (nx as usize) < w && ny < h {
                    let j = ny * w + nx as usize;
                    work[j] = work[j] + err * weight;
                }
            };
            spread(1, 0, 7.0 / 16.0);
            spread(-1, 1, 3.0 / 16.0);
            spread(0, 1, 5.0 / 16.0);
            spread(1, 1, 1.0 / 16.0);
        }
    }
    Image::from_pixels(w, h, out).expect("dimensions come from a valid image")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &Image, b: &Image, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "max abs diff {d} > {tol}");
    }

    fn sample_image() -> Image {
        Image::from_fn(17, 11, |x, y| {
            Rgb::new(
                (x as f64 * 0.37).sin() * 0.5 + 0.5,
                (y as f64 * 0.23).cos() * 0.4 + 0.45,
                ((x + y) as f64 * 0.11).sin() * 0.3 + 0.5,
            )
        })
        .unwrap()
    }

    #[test]
    fn hue_rotation_of_primaries() {
        let red = Image::new(1, 1, Rgb::new(1.0, 0.0, 0.0)).unwrap();
        let out = hue_shift(&red, 120.0).unwrap();
        assert_close(&out, &Image::new(1, 1, Rgb::new(0.0, 1.0, 0.0)).unwrap(), 1e-12);
        let out = hue_shift(&red, 240.0).unwrap();
        assert_close(&out, &Image::new(1, 1, Rgb::new(0.0, 0.0, 1.0)).unwrap(), 1e-12);
    }

    #[test]
    fn hue_shift_leaves_gray_alone() {
        let gray = Image::new(3, 3, Rgb::splat(0.37)).unwrap();
        for angle in [13.0, 90.0, -45.0, 720.5] {
            assert_eq!(hue_shift(&gray, angle).unwrap(), gray);
        }
    }

    #[test]
    fn hue_shift_identity_angles() {
        let img = sample_image();
        assert_close(&hue_shift(&img, 0.0).unwrap(), &img, 1e-6);
        assert_close(&hue_shift(&img, 360.0).unwrap(), &img, 1e-6);
        assert_close(&hue_shift(&img, -720.0).unwrap(), &img, 1e-6);
    }

    #[test]
    fn hue_shift_preserves_value_exactly() {
        let img = sample_image();
        let out = hue_shift(&img, 77.0).unwrap();
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            assert_eq!(a.max_channel(), b.max_channel());
        }
    }

    #[test]
    fn hue_shift_rejects_non_finite() {
        assert!(hue_shift(&sample_image(), f64::NAN).is_err());
    }

    #[test]
    fn saturate_cases() {
        let img = sample_image();
        assert_close(&saturate(&img, 1.0).unwrap(), &img, 1e-6);

        let px = Image::new(1, 1, Rgb::new(0.8, 0.2, 0.2)).unwrap();
        let out = saturate(&px, 0.0).unwrap();
        assert_close(&out, &Image::new(1, 1, Rgb::splat(0.8)).unwrap(), 1e-15);

        let gray = Image::new(2, 2, Rgb::splat(0.6)).unwrap();
        assert_eq!(saturate(&gray, 3.5).unwrap(), gray);

        assert!(matches!(saturate(&img, -0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn saturate_boosts_and_clamps() {
        let px = Image::new(1, 1, Rgb::new(0.8, 0.4, 0.4)).unwrap();
        let out = saturate(&px, 10.0).unwrap();
        assert_close(&out, &Image::new(1, 1, Rgb::new(0.8, 0.0, 0.0)).unwrap(), 1e-15);
    }

    #[test]
    fn blur_constant_image_is_fixed_point() {
        let img = Image::new(9, 7, Rgb::new(0.3, 0.6, 0.9)).unwrap();
        for sigma in [0.3, 1.0, 2.5, 10.0] {
            assert_close(&gaussian_blur(&img, sigma).unwrap(), &img, 1e-6);
        }
    }

    #[test]
    fn blur_impulse_matches_direct_2d_convolution() {
        let n = 21;
        let mut img = Image::new(n, n, Rgb::BLACK).unwrap();
        img.set(10, 10, Rgb::WHITE);
        let out = gaussian_blur(&img, 1.0).unwrap();

        // Independent oracle: unnormalized 2-D gaussian, normalized over its
        // full (2r+1)^2 support.
        let r = 3i64;
        let mut total = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                total += (-((dx * dx + dy * dy) as f64) / 2.0).exp();
            }
        }
        for y in 0..n {
            for x in 0..n {
                let (dx, dy) = (x as i64 - 10, y as i64 - 10);
                let expect = if dx.abs() <= r && dy.abs() <= r {
                    (-((dx * dx + dy * dy) as f64) / 2.0).exp() / total
                } else {
                    0.0
                };
                assert!((out.get(x, y)[0] - expect).abs() < 1e-12);
            }
        }
        let sum: f64 = out.pixels().iter().map(|p| p[0]).sum();
        assert!((sum - 1.0).abs() < 1e-3);
        assert!((out.get(10, 10)[0] - 0.159_241).abs() < 1e-5);
    }

    #[test]
    fn blur_semigroup_on_smooth_image() {
        let img = Image::from_fn(48, 48, |x, y| {
            let v = 0.5 + 0.4 * (x as f64 * 0.2).sin() * (y as f64 * 0.15).cos();
            Rgb::splat(v)
        })
        .unwrap();
        let twice = gaussian_blur(&gaussian_blur(&img, 0.5).unwrap(), 0.5).unwrap();
        let once = gaussian_blur(&img, 0.5f64.sqrt()).unwrap();
        assert_close(&twice, &once, 1e-2);
    }

    #[test]
    fn blur_rejects_bad_sigma() {
        let img = sample_image();
        assert!(gaussian_blur(&img, 0.0).is_err());
        assert!(gaussian_blur(&img, -1.0).is_err());
        assert!(gaussian_blur(&img, f64::INFINITY).is_err());
    }

    #[test]
    fn dither_spec_validation() {
        assert!(DitherSpec::new(DitherMethod::FloydSteinberg, 1).is_err());
        assert!(DitherSpec::new(DitherMethod::OrderedBayer8x8, 2).is_ok());
    }

    #[test]
    fn dither_fixed_points() {
        let binary = Image::from_fn(9, 9, |x, y| Rgb::splat(((x * 7 + y * 3) % 2) as f64)).unwrap();
        for method in [DitherMethod::FloydSteinberg, DitherMethod::OrderedBayer8x8] {
            let spec = DitherSpec::new(method, 2).unwrap();
            assert_eq!(dither(&binary, &spec), binary);

            let half = Image::new(8, 8, Rgb::splat(0.5)).unwrap();
            let spec3 = DitherSpec::new(method, 3).unwrap();
            assert_eq!(dither(&half, &spec3), half);
        }
    }

    #[test]
    fn floyd_steinberg_mid_gray_mean() {
        let half = Image::new(64, 64, Rgb::splat(0.5)).unwrap();
        let out = dither(&half, &DitherSpec::default());
        for m in out.channel_means() {
            assert!((0.48..=0.52).contains(&m), "mean {m}");
        }
        assert!(out.pixels().iter().all(|p| p.0.iter().all(|&c| c == 0.0 || c == 1.0)));
    }

    #[test]
    fn ordered_dither_mid_gray_mean() {
        let half = Image::new(64, 64, Rgb::splat(0.5)).unwrap();
        let spec = DitherSpec::new(DitherMethod::OrderedBayer8x8, 2).unwrap();
        let out = dither(&half, &spec);
        for m in out.channel_means() {
            assert!((0.48..=0.52).contains(&m), "mean {m}");
        }
    }

    #[test]
    fn dither_spec_serde() {
        let spec = DitherSpec::new(DitherMethod::OrderedBayer8x8, 4).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"method":"ordered-bayer-8x8","levels":4}"#);
        let back: DitherSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<DitherSpec>(r#"{"method":"floyd-steinberg","levels":1}"#).is_err());
    }
}
