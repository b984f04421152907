//! File formats: binary tensors, dataset manifests, detection lists, and PNG helpers.

pub mod detections;
pub mod manifest;
pub mod tensor;

use std::path::Path;

use image::{GrayImage, RgbImage, RgbaImage};

use crate::error::Result;

pub use detections::{read_detections, write_detections, DetectionRecord, DetectionsFile, FrameDetections};
pub use manifest::{
    read_manifest, write_manifest, DatasetManifest, FrameRecord, LabelFlags, ObjectRecord, PlaneRecord,
};
pub use tensor::{read_tensor, write_tensor};

pub fn load_rgba(path: impl AsRef<Path>) -> Result<RgbaImage> {
    Ok(image::open(path)?.to_rgba8())
}

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(image::open(path)?.to_rgb8())
}

pub fn save_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn save_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
