use baryflow::filters::{dither, gaussian_blur, hue_shift, saturate, DitherMethod, DitherSpec};
use baryflow::image::{Image, Rgb};
use proptest::prelude::*;

fn image_strategy(max_side: usize) -> impl Strategy<Value = Image> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::array::uniform3(0.0f64..=1.0), w * h)
            .prop_map(move |px| Image::from_pixels(w, h, px.into_iter().map(Rgb).collect()).unwrap())
    })
}

/// Pixels whose channels are pairwise at least `gap` apart.
fn distinct_pixel(gap: f64) -> impl Strategy<Value = Rgb> {
    prop::array::uniform3(0.0f64..=1.0).prop_filter("distinct channels", move |c| {
        (c[0] - c[1]).abs() > gap && (c[1] - c[2]).abs() > gap && (c[0] - c[2]).abs() > gap
    })
    .prop_map(Rgb)
}

proptest! {
    #[test]
    fn hue_shift_is_inverted_by_negative_shift(px in distinct_pixel(1e-3), deg in -720.0f64..720.0) {
        let img = Image::new(1, 1, px).unwrap();
        let back = hue_shift(&hue_shift(&img, deg).unwrap(), -deg).unwrap();
        prop_assert!(back.max_abs_diff(&img) <= 1e-5);
    }

    #[test]
    fn three_thirds_of_a_turn_is_identity(img in image_strategy(6)) {
        let mut out = img.clone();
        for _ in 0..3 {
            out = hue_shift(&out, 120.0).unwrap();
        }
        prop_assert!(out.max_abs_diff(&img) <= 1e-5);
    }

    #[test]
    fn hue_shift_keeps_value(img in image_strategy(6), deg in -360.0f64..360.0) {
        let out = hue_shift(&img, deg).unwrap();
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            prop_assert_eq!(a.max_channel(), b.max_channel());
        }
    }

    #[test]
    fn saturation_factors_compose(img in image_strategy(6), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        // Factors below one never clamp.
        let twice = saturate(&saturate(&img, a).unwrap(), b).unwrap();
        let once = saturate(&img, a * b).unwrap();
        prop_assert!(twice.max_abs_diff(&once) <= 1e-6);
    }

    #[test]
    fn blur_stays_within_input_range(img in image_strategy(12), sigma in 0.2f64..4.0) {
        let out = gaussian_blur(&img, sigma).unwrap();
        for c in 0..3 {
            let lo = img.pixels().iter().map(|p| p[c]).fold(f64::INFINITY, f64::min);
            let hi = img.pixels().iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max);
            for p in out.pixels() {
                prop_assert!(p[c] >= lo - 1e-6 && p[c] <= hi + 1e-6);
            }
        }
    }

    #[test]
    fn dither_output_lies_in_level_set(
        img in image_strategy(12),
        levels in 2u32..9,
        bayer in any::<bool>(),
    ) {
        let method = if bayer { DitherMethod::OrderedBayer8x8 } else { DitherMethod::FloydSteinberg };
        let spec = DitherSpec::new(method, levels).unwrap();
        let allowed: Vec<f64> = (0..levels).map(|k| spec.level(k)).collect();
        for p in dither(&img, &spec).pixels() {
            for c in p.0 {
                prop_assert!(allowed.contains(&c), "{c} not a level of {levels}");
            }
        }
    }
}

#[test]
fn dither_spec_flag_syntax() {
    let s: DitherSpec = "2".parse().unwrap();
    assert_eq!((s.levels(), s.method()), (2, DitherMethod::FloydSteinberg));
    let s: DitherSpec = "4:ordered-bayer-8x8".parse().unwrap();
    assert_eq!((s.levels(), s.method()), (4, DitherMethod::OrderedBayer8x8));
    assert!("1".parse::<DitherSpec>().is_err());
    assert!("2:halftone".parse::<DitherSpec>().is_err());
    assert!("two".parse::<DitherSpec>().is_err());
}

#[test]
fn floyd_steinberg_ignores_thread_pool() {
    let img = Image::from_fn(40, 30, |x, y| Rgb::new(x as f64 / 40.0, y as f64 / 30.0, 0.37)).unwrap();
    let spec = DitherSpec::new(DitherMethod::FloydSteinberg, 3).unwrap();
    let serial = dither(&img, &spec);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let pooled = pool.install(|| dither(&img, &spec));
    assert_eq!(serial, pooled);
}
