//! Evaluation: exact oriented-box 3D IoU (with a Monte-Carlo estimator),
//! projected 2D IoU, average precision, and REP / ADD pose metrics.

pub mod ap;
pub mod hull;
pub mod iou;
pub mod polygon;
pub mod pose;

pub use ap::{average_precision, average_precision_with, GroundTruth, MatchedDetection, PRCurve, ScoredBox};
pub use hull::convex_hull_volume;
pub use iou::{intersection_volume, iou2d_projection, iou3d, iou3d_mc};
pub use pose::{add_metric, rep_metric, Pose, PoseScore};
