//! JSON file of decoded detections, grouped by frame.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::{ObjectRecord, QUATERNION_TOLERANCE};
use crate::error::{Error, Result};
use crate::geom::{OrientedBox3, Rotation3, Vec3};
use crate::pose_decoder::DecodedObject;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    /// Peak cell `(gx, gy)`.
    pub peak: [usize; 2],
    pub confidence: f64,
    pub vertices2d: Vec<[f64; 2]>,
    /// Recovered rotation `(w, x, y, z)`.
    pub rotation: [f64; 4],
    /// Box center with unit depth.
    pub translation_dir: [f64; 3],
    pub size_ratios: [f64; 3],
    pub residual: f64,
    /// Metric box, present when a ground plane resolved the scale.
    #[serde(default)]
    pub metric: Option<ObjectRecord>,
}

impl DetectionRecord {
    pub fn from_decoded(d: &DecodedObject) -> Self {
        let s = &d.solution;
        DetectionRecord {
            peak: [d.detection.peak.gx, d.detection.peak.gy],
            confidence: d.detection.confidence(),
            vertices2d: d.detection.vertices2d.iter().map(|v| [v.x, v.y]).collect(),
            rotation: s.rotation.wxyz(),
            translation_dir: s.translation_dir.into(),
            size_ratios: s.size_ratios.into(),
            residual: s.residual,
            metric: d.metric.as_ref().map(ObjectRecord::from_box),
        }
    }

    pub fn metric_box(&self) -> Result<Option<OrientedBox3>> {
        self.metric.as_ref().map(ObjectRecord::to_box).transpose()
    }

    pub fn rotation(&self) -> Result<Rotation3> {
        let [w, x, y, z] = self.rotation;
        Rotation3::from_wxyz(w, x, y, z, QUATERNION_TOLERANCE)
    }

    pub fn translation_dir(&self) -> Vec3 {
        Vec3::from(self.translation_dir)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub frame: usize,
    pub detections: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub version: u64,
    pub frames: Vec<FrameDetections>,
}

impl DetectionsFile {
    pub fn new() -> Self {
        DetectionsFile {
            version: 1,
            frames: Vec::new(),
        }
    }

    /// Concatenates files; frames keep their ids.
    pub fn merge(files: impl IntoIterator<Item = DetectionsFile>) -> Self {
        let mut out = DetectionsFile::new();
        for f in files {
            out.frames.extend(f.frames);
        }
        out.frames.sort_by_key(|f| f.frame);
        out
    }
}

impl Default for DetectionsFile {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_detections(path: impl AsRef<Path>, dets: &DetectionsFile) -> Result<()> {
    let mut s = serde_json::to_string_pretty(dets)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<DetectionsFile> {
    let f: DetectionsFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if f.version != 1 {
        return Err(Error::schema("version", format!("unsupported version {}", f.version)));
    }
    for (i, fr) in f.frames.iter().enumerate() {
        for (k, d) in fr.detections.iter().enumerate() {
            if d.vertices2d.len() != 8 {
                return Err(Error::schema(
                    format!("frames[{i}].detections[{k}].vertices2d"),
                    "expected 8 vertices",
                ));
            }
        }
    }
    Ok(f)
}
