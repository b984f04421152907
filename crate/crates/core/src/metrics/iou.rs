//! Intersection-over-union of oriented 3D boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hull::convex_hull_volume;
use super::polygon::convex_iou;
use crate::error::Result;
use crate::geom::{project_box, CameraIntrinsics, OrientedBox3, Vec3};

/// Slack for inside and clipping tests, relative to the larger box diameter.
pub const IOU_TOLERANCE: f64 = 1e-9;

/// The 12 box edges as pairs of vertex indices (indices differing in one bit).
pub const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Points where the edges of `a` cross the faces of `b`.
fn edge_face_intersections(a: &OrientedBox3, b: &OrientedBox3, tol: f64, out: &mut Vec<Vec3>) {
    let verts = a.vertices();
    let local: Vec<Vec3> = verts.iter().map(|v| b.to_local(v)).collect();
    let half = b.size * 0.5;
    for (i, j) in BOX_EDGES {
        let (p, q) = (local[i], local[j]);
        let d = q - p;
        for axis in 0..3 {
            if d[axis] == 0.0 {
                continue;
            }
            for side in [-1.0, 1.0] {
                let t = (side * half[axis] - p[axis]) / d[axis];
                if !(-tol..=1.0 + tol).contains(&t) {
                    continue;
                }
                let x = p + d * t.clamp(0.0, 1.0);
                let on_face = (0..3).filter(|k| *k != axis).all(|k| x[k].abs() <= half[k] + tol);
                if on_face {
                    out.push(b.to_world(&x));
                }
            }
        }
    }
}

/// Candidate vertices of the intersection polytope of two boxes.
pub fn intersection_candidates(a: &OrientedBox3, b: &OrientedBox3, tol: f64) -> Vec<Vec3> {
    let mut pts = Vec::new();
    pts.extend(a.vertices().iter().filter(|v| b.contains(v, tol)));
    pts.extend(b.vertices().iter().filter(|v| a.contains(v, tol)));
    edge_face_intersections(a, b, tol, &mut pts);
    edge_face_intersections(b, a, tol, &mut pts);
    pts
}

/// Volume of `a ∩ b`.
pub fn intersection_volume(a: &OrientedBox3, b: &OrientedBox3) -> f64 {
    let reach = 0.5 * (a.diameter() + b.diameter());
    if (a.center - b.center).norm() > reach {
        return 0.0;
    }
    let tol = IOU_TOLERANCE * a.diameter().max(b.diameter()).max(1.0);
    let pts = intersection_candidates(a, b, tol);
    convex_hull_volume(&pts, tol).min(a.volume()).min(b.volume())
}

/// Exact IoU of two oriented boxes.
pub fn iou3d(a: &OrientedBox3, b: &OrientedBox3) -> f64 {
    let inter = intersection_volume(a, b);
    let union = a.volume() + b.volume() - inter;
    if inter <= 0.0 || union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Monte-Carlo IoU estimate from `samples` uniform points in `a`.
pub fn iou3d_mc(a: &OrientedBox3, b: &OrientedBox3, samples: usize, seed: u64) -> f64 {
    let samples = samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Maps a-local coordinates straight into b-local coordinates.
    let rb_inv = b.rotation.inverse();
    let m = rb_inv.matrix() * a.rotation.matrix();
    let t = rb_inv.rotate(&(a.center - b.center));
    let half_b = b.size * 0.5;
    let tol = IOU_TOLERANCE * b.diameter().max(1.0);
    let mut hits = 0usize;
    for _ in 0..samples {
        let l = Vec3::new(
            (rng.random::<f64>() - 0.5) * a.size.x,
            (rng.random::<f64>() - 0.5) * a.size.y,
            (rng.random::<f64>() - 0.5) * a.size.z,
        );
        let q = m * l + t;
        if q.x.abs() <= half_b.x + tol && q.y.abs() <= half_b.y + tol && q.z.abs() <= half_b.z + tol {
            hits += 1;
        }
    }
    let va = a.volume();
    let inter = va * hits as f64 / samples as f64;
    let union = va + b.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// IoU of the convex hulls of the two boxes' projections.
pub fn iou2d_projection(a: &OrientedBox3, b: &OrientedBox3, cam: &CameraIntrinsics) -> Result<f64> {
    let pa = project_box(cam, a)?;
    let pb = project_box(cam, b)?;
    Ok(convex_iou(&pa, &pb))
}
