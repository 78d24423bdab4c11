//! Synthetic image rendering: noisy two-level scenes with one elliptical
//! target whose outline is the ground-truth segmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::synth::corrupt::CorruptionKind;

pub const FOREGROUND_LEVEL: f64 = 0.8;
pub const BACKGROUND_LEVEL: f64 = 0.2;
pub const PIXEL_NOISE_SD: f64 = 0.05;
pub const AXIS_RANGE: (f64, f64) = (6.0, 14.0);

/// Binary segmentation mask with row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), height * width, "mask data size mismatch");
        Mask {
            height,
            width,
            data,
        }
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Mask {
            height,
            width,
            data: vec![false; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, y: usize, x: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// Provenance of a synthetic image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub seed: u64,
    pub corruption: CorruptionKind,
    pub severity: u8,
}

/// One synthetic image with its ground-truth mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    height: usize,
    width: usize,
    /// Row-major intensities in [0, 1].
    pub pixels: Vec<f64>,
    pub mask: Mask,
    pub meta: ImageMeta,
}

impl SynthImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>, mask: Mask, meta: ImageMeta) -> Self {
        assert_eq!(pixels.len(), height * width, "pixel data size mismatch");
        assert!(mask.height() == height && mask.width() == width);
        SynthImage {
            height,
            width,
            pixels,
            mask,
            meta,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// Standard normal draw via Box-Muller; two uniforms per sample keeps the
/// draw order independent of call history.
pub(crate) fn sample_normal(rng: &mut impl Rng, mean: f64, sd: f64) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], keeps ln finite
    let u2: f64 = rng.gen();
    mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub(crate) fn clip_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Renders one uncorrupted scene: background at 0.2, one random ellipse
/// at 0.8, pixel noise sd 0.05, everything clipped to [0, 1].
///
/// The ellipse center stays at least a quarter of the smaller image side
/// away from the borders, so default-size targets lie fully in frame.
pub fn render_image(height: usize, width: usize, seed: u64) -> SynthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = (height.min(width) as f64) / 4.0;
    let cx = rng.gen_range(margin..(width as f64 - margin));
    let cy = rng.gen_range(margin..(height as f64 - margin));
    let a = rng.gen_range(AXIS_RANGE.0..AXIS_RANGE.1);
    let b = rng.gen_range(AXIS_RANGE.0..AXIS_RANGE.1);
    let theta = rng.gen_range(0.0..std::f64::consts::PI);
    let (sin_t, cos_t) = theta.sin_cos();

    let mut mask = Mask::empty(height, width);
    for y in 0..height {
        for x in 0..width {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let u = (dx * cos_t + dy * sin_t) / a;
            let v = (-dx * sin_t + dy * cos_t) / b;
            if u * u + v * v <= 1.0 {
                mask.set(y, x, true);
            }
        }
    }

    let mut pixels = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            let level = if mask.get(y, x) {
                FOREGROUND_LEVEL
            } else {
                BACKGROUND_LEVEL
            };
            pixels.push(clip_unit(sample_normal(&mut rng, level, PIXEL_NOISE_SD)));
        }
    }

    SynthImage::new(
        height,
        width,
        pixels,
        mask,
        ImageMeta {
            seed,
            corruption: CorruptionKind::None,
            severity: 0,
        },
    )
}
