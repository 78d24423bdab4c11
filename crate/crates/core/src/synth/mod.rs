//! Self-contained toy segmentation benchmark: scene rendering, a corruption
//! suite with severities 0..=5, a pixelwise segmentation model, mask
//! metrics and two detection scorers, wired end to end into score tables.

mod corrupt;
mod image;
mod io;
mod mask_metrics;
mod model;
mod scorer;
mod world;

pub use corrupt::{
    corrupt, CorruptionKind, BLUR_HALF_WIDTH, CONTRAST_FACTOR, GAMMA_EXPONENT, MAX_SEVERITY,
    NOISE_SIGMA, OCCLUSION_SIDE,
};
pub use image::{render_image, ImageMeta, Mask, SynthImage};
pub use io::{
    load_world, read_image, save_world, write_image, ManifestImage, Split, WorldManifest,
    MANIFEST_NAME,
};
pub use mask_metrics::{avg_fp, dsc};
pub use model::{
    augment_with_noise, fit_dice_optimal, fit_toy_model, mean_dice, ToyModel, SCALE_FLOOR,
};
pub use scorer::{
    intensity_histogram, score_entropy, score_ihf, EntropyScorer, IhfScorer, OodScorer, IHF_BINS,
    IHF_MIN_TRAIN, IHF_RIDGE,
};
pub use world::{
    generate_world, run_benchmark, PerfMetric, SynthWorld, WorldConfig, DEFAULT_IMAGE_SIDE,
};
