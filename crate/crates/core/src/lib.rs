//! Geometry, target encoding, decoding and evaluation for single-shot 3D
//! bounding-box pose estimation from RGB images.
//!
//! - [`geom`]: camera model, rotations, oriented boxes, planes.
//! - [`target_codec`]: heatmap and displacement-field targets, and the head losses.
//! - [`pose_decoder`]: peak extraction, vertex decoding, control-point EPnP, scale from a plane.
//! - [`metrics`]: exact oriented-box 3D IoU, projected 2D IoU, AP, REP and ADD.
//! - [`synth2d`]: alpha compositing of foreground cut-outs onto backgrounds.
//! - [`io`]: tensor files, dataset manifests and detection files.
//! - [`sim`]: random solver instances and resting-box scenes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pose_decoder;
pub mod sim;
pub mod synth2d;
pub mod target_codec;

pub use error::{Error, Result};
pub use geom::{CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec2, Vec3};
