//! Reprojection (REP) and average-distance (ADD / ADD-S) pose metrics.
//!
//! Both use strict inequality at the success threshold.

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, OrientedBox3, Rotation3, Vec3};

/// Rigid object-to-camera transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Rotation3, translation: Vec3) -> Self {
        Pose { rotation, translation }
    }

    pub fn of_box(b: &OrientedBox3) -> Self {
        Pose::new(b.rotation, b.center)
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseScore {
    pub success: bool,
    pub error: f64,
}

/// Mean 2D distance between the points projected under both poses.
pub fn rep_metric(
    est: &Pose,
    gt: &Pose,
    points: &[Vec3],
    cam: &CameraIntrinsics,
    threshold_px: f64,
) -> Result<PoseScore> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point set is empty".into()));
    }
    let mut sum = 0.0;
    for p in points {
        let a = cam.project(&est.apply(p))?;
        let b = cam.project(&gt.apply(p))?;
        sum += (a - b).norm();
    }
    let error = sum / points.len() as f64;
    Ok(PoseScore {
        success: error < threshold_px,
        error,
    })
}

/// ADD (or ADD-S when `symmetric`), successful below `fraction · diameter`.
pub fn add_metric(
    est: &Pose,
    gt: &Pose,
    points: &[Vec3],
    diameter: f64,
    symmetric: bool,
    fraction: f64,
) -> Result<PoseScore> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point set is empty".into()));
    }
    if !(diameter > 0.0) {
        return Err(Error::InvalidInput("diameter must be positive".into()));
    }
    let est_pts: Vec<Vec3> = points.iter().map(|p| est.apply(p)).collect();
    let gt_pts: Vec<Vec3> = points.iter().map(|p| gt.apply(p)).collect();
    let sum: f64 = if symmetric {
        est_pts
            .iter()
            .map(|e| gt_pts.iter().map(|g| (e - g).norm()).fold(f64::INFINITY, f64::min))
            .sum()
    } else {
        est_pts.iter().zip(&gt_pts).map(|(e, g)| (e - g).norm()).sum()
    };
    let error = sum / points.len() as f64;
    Ok(PoseScore {
        success: error < fraction * diameter,
        error,
    })
}
