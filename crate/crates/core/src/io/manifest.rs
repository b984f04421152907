//! Dataset manifest: camera, frames, per-frame boxes, ground planes and label flags.
//!
//! Reading validates the whole document and reports the first violation with
//! its location (`frames[2].objects[0].rotation`). Unknown keys at any level
//! are kept and written back; known keys are written in a fixed order and
//! unknown ones sorted, so output is deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec3};

pub const MANIFEST_VERSION: u64 = 1;
/// Allowed deviation of stored quaternions from unit norm.
pub const QUATERNION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl CameraRecord {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)
    }

    pub fn from_intrinsics(cam: &CameraIntrinsics) -> Self {
        CameraRecord {
            fx: cam.fx,
            fy: cam.fy,
            cx: cam.cx,
            cy: cam.cy,
            width: cam.width,
            height: cam.height,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub normal: [f64; 3],
    pub d: f64,
}

impl PlaneRecord {
    pub fn plane(&self) -> Result<Plane3> {
        Plane3::new(Vec3::from(self.normal), self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    /// Unit quaternion `(w, x, y, z)`.
    pub rotation: [f64; 4],
    pub center: [f64; 3],
    pub size: [f64; 3],
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl ObjectRecord {
    pub fn to_box(&self) -> Result<OrientedBox3> {
        let [w, x, y, z] = self.rotation;
        OrientedBox3::new(
            Rotation3::from_wxyz(w, x, y, z, QUATERNION_TOLERANCE)?,
            Vec3::from(self.center),
            Vec3::from(self.size),
        )
    }

    pub fn from_box(b: &OrientedBox3) -> Self {
        ObjectRecord {
            rotation: b.rotation.wxyz(),
            center: b.center.into(),
            size: b.size.into(),
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFlags {
    pub pose: bool,
    pub segmentation: bool,
    pub coordinate_map: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneRecord>,
    pub objects: Vec<ObjectRecord>,
    pub labels: LabelFlags,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl FrameRecord {
    pub fn boxes(&self) -> Result<Vec<OrientedBox3>> {
        self.objects.iter().map(ObjectRecord::to_box).collect()
    }

    pub fn plane(&self) -> Result<Option<Plane3>> {
        self.plane.as_ref().map(PlaneRecord::plane).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u64,
    pub camera: CameraRecord,
    pub frames: Vec<FrameRecord>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl DatasetManifest {
    pub fn new(cam: &CameraIntrinsics) -> Self {
        DatasetManifest {
            version: MANIFEST_VERSION,
            camera: CameraRecord::from_intrinsics(cam),
            frames: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn camera(&self) -> Result<CameraIntrinsics> {
        self.camera.intrinsics()
    }

    /// Parses and validates a manifest document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        validate(&value)?;
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    DatasetManifest::from_json_str(&fs::read_to_string(path)?)
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &DatasetManifest) -> Result<()> {
    validate(&serde_json::to_value(manifest)?)?;
    fs::write(path, manifest.to_json_string()?)?;
    Ok(())
}

/// Resolves a manifest-relative path.
pub fn resolve_path(manifest_path: &Path, relative: &str) -> PathBuf {
    manifest_path.parent().unwrap_or_else(|| Path::new(".")).join(relative)
}

fn field<'a>(obj: &'a Map<String, Value>, loc: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(join(loc, key), "missing required field"))
}

fn join(loc: &str, key: &str) -> String {
    if loc.is_empty() {
        key.to_string()
    } else {
        format!("{loc}.{key}")
    }
}

fn as_object<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(loc, "expected an object"))
}

fn number(v: &Value, loc: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(loc, "expected a finite number"))
}

fn numbers<const N: usize>(v: &Value, loc: &str) -> Result<[f64; N]> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == N)
        .ok_or_else(|| Error::schema(loc, format!("expected an array of {N} numbers")))?;
    let mut out = [0.0; N];
    for (k, x) in arr.iter().enumerate() {
        out[k] = number(x, &format!("{loc}[{k}]"))?;
    }
    Ok(out)
}

fn relative_path(v: &Value, loc: &str) -> Result<()> {
    let s = v.as_str().ok_or_else(|| Error::schema(loc, "expected a string path"))?;
    if s.is_empty() {
        return Err(Error::schema(loc, "path is empty"));
    }
    if Path::new(s).is_absolute() {
        return Err(Error::schema(loc, "path must be relative to the manifest"));
    }
    Ok(())
}

fn validate_camera(v: &Value) -> Result<()> {
    let obj = as_object(v, "camera")?;
    let mut vals = [0.0; 4];
    for (k, key) in ["fx", "fy", "cx", "cy"].iter().enumerate() {
        vals[k] = number(field(obj, "camera", key)?, &join("camera", key))?;
    }
    let mut size = [0u32; 2];
    for (k, key) in ["width", "height"].iter().enumerate() {
        size[k] = field(obj, "camera", key)?
            .as_u64()
            .and_then(|x| u32::try_from(x).ok())
            .filter(|x| *x > 0)
            .ok_or_else(|| Error::schema(join("camera", key), "expected a positive integer"))?;
    }
    CameraIntrinsics::new(vals[0], vals[1], vals[2], vals[3], size[0], size[1])
        .map_err(|e| Error::schema("camera", e.to_string()))?;
    Ok(())
}

fn validate_object(v: &Value, loc: &str) -> Result<()> {
    let obj = as_object(v, loc)?;
    let rot_loc = join(loc, "rotation");
    let q = numbers::<4>(field(obj, loc, "rotation")?, &rot_loc)?;
    let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > QUATERNION_TOLERANCE {
        return Err(Error::schema(rot_loc, format!("quaternion norm {norm} is not unit")));
    }
    numbers::<3>(field(obj, loc, "center")?, &join(loc, "center"))?;
    let size_loc = join(loc, "size");
    let size = numbers::<3>(field(obj, loc, "size")?, &size_loc)?;
    if size.iter().any(|s| *s <= 0.0) {
        return Err(Error::schema(size_loc, "sizes must be positive"));
    }
    Ok(())
}

fn validate_frame(v: &Value, loc: &str) -> Result<()> {
    let obj = as_object(v, loc)?;
    relative_path(field(obj, loc, "image")?, &join(loc, "image"))?;
    if let Some(m) = obj.get("mask").filter(|m| !m.is_null()) {
        relative_path(m, &join(loc, "mask"))?;
    }
    if let Some(p) = obj.get("plane").filter(|p| !p.is_null()) {
        let ploc = join(loc, "plane");
        let pobj = as_object(p, &ploc)?;
        let n = numbers::<3>(field(pobj, &ploc, "normal")?, &join(&ploc, "normal"))?;
        if n.iter().map(|c| c * c).sum::<f64>() <= 1e-24 {
            return Err(Error::schema(join(&ploc, "normal"), "normal must be non-zero"));
        }
        number(field(pobj, &ploc, "d")?, &join(&ploc, "d"))?;
    }
    let oloc = join(loc, "objects");
    let objects = field(obj, loc, "objects")?
        .as_array()
        .ok_or_else(|| Error::schema(&oloc, "expected an array"))?;
    for (k, o) in objects.iter().enumerate() {
        validate_object(o, &format!("{oloc}[{k}]"))?;
    }
    let lloc = join(loc, "labels");
    let labels = as_object(field(obj, loc, "labels")?, &lloc)?;
    for key in ["pose", "segmentation", "coordinate_map"] {
        if !field(labels, &lloc, key)?.is_boolean() {
            return Err(Error::schema(join(&lloc, key), "expected a boolean"));
        }
    }
    Ok(())
}

/// Structural and semantic validation of a manifest document.
pub fn validate(v: &Value) -> Result<()> {
    let root = as_object(v, "<root>")?;
    let version = root
        .get("version")
        .ok_or_else(|| Error::schema("version", "missing required field"))?;
    if version.as_u64() != Some(MANIFEST_VERSION) {
        return Err(Error::schema("version", format!("unsupported version {version}")));
    }
    match root.get("camera") {
        None | Some(Value::Null) => return Err(Error::schema("camera", "camera required")),
        Some(c) => validate_camera(c)?,
    }
    let frames = root
        .get("frames")
        .ok_or_else(|| Error::schema("frames", "missing required field"))?
        .as_array()
        .ok_or_else(|| Error::schema("frames", "expected an array"))?;
    for (i, f) in frames.iter().enumerate() {
        validate_frame(f, &format!("frames[{i}]"))?;
    }
    Ok(())
}
