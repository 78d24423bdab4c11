//! On-disk world format: a JSON manifest plus one flat binary file per
//! image.
//!
//! Image file layout, little-endian: u32 height, u32 width, then
//! height*width f64 pixels row-major, then height*width mask bytes (0/1).
//! The f64 dump round-trips bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::write_atomic;
use crate::synth::corrupt::CorruptionKind;
use crate::synth::image::{ImageMeta, Mask, SynthImage};
use crate::synth::world::{SynthWorld, WorldConfig};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    IdTest,
    Ood,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    /// Path relative to the manifest directory.
    pub path: String,
    pub split: Split,
    pub seed: u64,
    pub corruption: CorruptionKind,
    pub severity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldManifest {
    pub version: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_id_test: usize,
    pub n_ood_per_config: usize,
    pub height: usize,
    pub width: usize,
    pub kinds: Vec<CorruptionKind>,
    pub images: Vec<ManifestImage>,
}

pub fn write_image(image: &SynthImage, path: &Path) -> Result<()> {
    let (h, w) = (image.height(), image.width());
    let mut bytes = Vec::with_capacity(8 + h * w * 9);
    bytes.extend_from_slice(&(h as u32).to_le_bytes());
    bytes.extend_from_slice(&(w as u32).to_le_bytes());
    for &v in &image.pixels {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend(image.mask.data().iter().map(|&b| b as u8));
    write_atomic(path, &bytes)
}

pub fn read_image(path: &Path, meta: ImageMeta) -> Result<SynthImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let fail = |message: &str| Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    if bytes.len() < 8 {
        return Err(fail("image file shorter than its header"));
    }
    let h = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n = h * w;
    let expected = 8 + n * 8 + n;
    if bytes.len() != expected {
        return Err(fail(&format!(
            "image file has {} bytes, expected {expected} for {h}x{w}",
            bytes.len()
        )));
    }
    let mut pixels = Vec::with_capacity(n);
    for i in 0..n {
        let start = 8 + i * 8;
        pixels.push(f64::from_le_bytes(bytes[start..start + 8].try_into().unwrap()));
    }
    let mask_bytes = &bytes[8 + n * 8..];
    let mask = Mask::new(h, w, mask_bytes.iter().map(|&b| b != 0).collect());
    Ok(SynthImage::new(h, w, pixels, mask, meta))
}

/// Writes the manifest and every image under `dir`, returning the manifest
/// path. File names are deterministic, so identical worlds serialize to
/// byte-identical trees.
pub fn save_world(world: &SynthWorld, dir: &Path) -> Result<PathBuf> {
    let images_dir = dir.join("images");
    fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;

    let mut entries = Vec::new();
    let dump = |split: Split,
                    prefix: &str,
                    images: &[SynthImage],
                    entries: &mut Vec<ManifestImage>|
     -> Result<()> {
        for (i, img) in images.iter().enumerate() {
            let rel = format!("images/{prefix}-{i:05}.img");
            write_image(img, &dir.join(&rel))?;
            entries.push(ManifestImage {
                path: rel,
                split,
                seed: img.meta.seed,
                corruption: img.meta.corruption,
                severity: img.meta.severity,
            });
        }
        Ok(())
    };
    dump(Split::Train, "train", &world.train, &mut entries)?;
    dump(Split::IdTest, "id-test", &world.id_test, &mut entries)?;
    dump(Split::Ood, "ood", &world.ood, &mut entries)?;

    let manifest = WorldManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: world.config.seed,
        n_train: world.config.n_train,
        n_id_test: world.config.n_id_test,
        n_ood_per_config: world.config.n_ood_per_config,
        height: world.config.height,
        width: world.config.width,
        kinds: world.config.kinds.clone(),
        images: entries,
    };
    let path = dir.join(MANIFEST_NAME);
    let json = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    write_atomic(&path, json.as_bytes())?;
    Ok(path)
}

/// Loads a world saved by [`save_world`].
pub fn load_world(dir: &Path) -> Result<SynthWorld> {
    let manifest_path = dir.join(MANIFEST_NAME);
    let raw = fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: WorldManifest = serde_json::from_slice(&raw).map_err(|e| Error::Parse {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;

    let mut train = Vec::new();
    let mut id_test = Vec::new();
    let mut ood = Vec::new();
    for entry in &manifest.images {
        let image = read_image(
            &dir.join(&entry.path),
            ImageMeta {
                seed: entry.seed,
                corruption: entry.corruption,
                severity: entry.severity,
            },
        )?;
        match entry.split {
            Split::Train => train.push(image),
            Split::IdTest => id_test.push(image),
            Split::Ood => ood.push(image),
        }
    }
    Ok(SynthWorld {
        config: WorldConfig {
            seed: manifest.seed,
            n_train: manifest.n_train,
            n_id_test: manifest.n_id_test,
            n_ood_per_config: manifest.n_ood_per_config,
            kinds: manifest.kinds,
            height: manifest.height,
            width: manifest.width,
        },
        train,
        id_test,
        ood,
    })
}
