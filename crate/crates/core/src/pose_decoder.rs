//! Post-processing: peak extraction, vertex decoding, control-point EPnP and
//! ground-plane scale recovery.
//!
//! The four control points are the box center `C0` and `Cj = C0 + a_j`, where
//! `a_j` spans the full extent of the box along object axis `j`. Every vertex is
//! then `X_i = Σ_j α_ij C_j` with coefficients that depend only on the vertex's
//! sign pattern, so the solver needs neither the object size nor its pose.

use nalgebra::{DMatrix, Matrix3, SVD};

use crate::error::{Error, Result};
use crate::geom::{vertex_signs, CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec2, Vec3};
use crate::linalg::symmetric_eigen;
use crate::target_codec::{DisplacementField, GridSpec, Heatmap};

/// Relative eigenvalue gap below which the null space is considered ambiguous.
pub const NULLSPACE_TOLERANCE: f64 = 1e-8;
/// Minimum |det| of the unit axis directions for a non-flat box.
pub const FLATNESS_TOLERANCE: f64 = 1e-6;

/// A local maximum of the heatmap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub gx: usize,
    pub gy: usize,
    pub heat: f64,
}

/// One decoded object: peak plus its eight projected box vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub peak: Peak,
    pub vertices2d: [Vec2; 8],
}

impl Detection {
    pub fn confidence(&self) -> f64 {
        self.peak.heat
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub peak_threshold: f64,
    /// Chebyshev radius of the suppression window, in cells.
    pub nms_radius: usize,
    pub max_detections: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            peak_threshold: 0.5,
            nms_radius: 1,
            max_detections: 8,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return Err(Error::InvalidInput("peak_threshold must lie in (0, 1)".into()));
        }
        if self.nms_radius < 1 {
            return Err(Error::InvalidInput("nms_radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// Camera-frame box recovered up to a global scale.
///
/// The scale is fixed so that the box center has depth 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EpnpSolution {
    /// `C0` (center) followed by the three axis control points.
    pub control_points_cam: [Vec3; 4],
    /// Reconstructed vertices, bit-ordered, without orthogonalization.
    pub vertices_cam: [Vec3; 8],
    /// Nearest rotation to the recovered (normalized) axes.
    pub rotation: Rotation3,
    /// Box center, equal to `C0`.
    pub translation_dir: Vec3,
    /// Extents relative to the largest one.
    pub size_ratios: Vec3,
    /// Smallest eigenvalue of `MᵀM`.
    pub residual: f64,
}

impl EpnpSolution {
    /// Full-extent axis vectors `Cj − C0`.
    pub fn axes(&self) -> [Vec3; 3] {
        let c0 = self.control_points_cam[0];
        [1, 2, 3].map(|j| self.control_points_cam[j] - c0)
    }

    /// The box at scale `s`, using the recovered rotation and the raw axis lengths.
    pub fn to_box(&self, s: f64) -> Result<OrientedBox3> {
        let a = self.axes();
        OrientedBox3::new(
            self.rotation,
            self.translation_dir * s,
            Vec3::new(a[0].norm(), a[1].norm(), a[2].norm()) * s,
        )
    }

    /// Reprojects the reconstructed vertices.
    pub fn reproject(&self, cam: &CameraIntrinsics) -> Result<[Vec2; 8]> {
        let mut out = [Vec2::zeros(); 8];
        for (o, v) in out.iter_mut().zip(&self.vertices_cam) {
            *o = cam.project(v)?;
        }
        Ok(out)
    }
}

/// Everything recovered for one peak.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedObject {
    pub detection: Detection,
    pub solution: EpnpSolution,
    pub metric: Option<OrientedBox3>,
}

/// Strict local maxima above the threshold, strongest first.
///
/// Equal neighbors are resolved by row-major index: a cell only yields to an
/// equal-heat neighbor that comes before it, so a plateau produces one peak.
pub fn extract_peaks(heat: &Heatmap, cfg: &DecoderConfig) -> Vec<Peak> {
    let (w, h) = (heat.width, heat.height);
    let r = cfg.nms_radius;
    let mut peaks = Vec::new();
    for gy in 0..h {
        for gx in 0..w {
            let v = heat.get(gx, gy);
            if !(v >= cfg.peak_threshold) {
                continue;
            }
            let idx = gy * w + gx;
            let mut is_peak = true;
            'window: for qy in gy.saturating_sub(r)..=(gy + r).min(h - 1) {
                for qx in gx.saturating_sub(r)..=(gx + r).min(w - 1) {
                    let qi = qy * w + qx;
                    if qi == idx {
                        continue;
                    }
                    let q = heat.data[qi];
                    if q > v || (q == v && qi < idx) {
                        is_peak = false;
                        break 'window;
                    }
                }
            }
            if is_peak {
                peaks.push(Peak { gx, gy, heat: v });
            }
        }
    }
    // Row-major scan order is already the tie-break; a stable sort keeps it.
    peaks.sort_by(|a, b| b.heat.total_cmp(&a.heat));
    peaks.truncate(cfg.max_detections);
    peaks
}

/// `x_i = p + D_i(p)` at the peak cell.
pub fn decode_vertices(peak: &Peak, disp: &DisplacementField, grid: &GridSpec) -> [Vec2; 8] {
    let p = grid.cell_center(peak.gx, peak.gy);
    let d = disp.cell(peak.gx, peak.gy);
    std::array::from_fn(|i| Vec2::new(p.x + d[2 * i], p.y + d[2 * i + 1]))
}

/// Control-point weights of vertex `i`: `[1 − (σx+σy+σz)/2, σx/2, σy/2, σz/2]`.
pub fn alpha_coefficients(i: usize) -> [f64; 4] {
    let s = vertex_signs(i);
    [1.0 - 0.5 * (s[0] + s[1] + s[2]), 0.5 * s[0], 0.5 * s[1], 0.5 * s[2]]
}

/// The 16×12 projection system `M·Cᶜ = 0`, with `Cᶜ = (C0, C1, C2, C3)` stacked.
pub fn build_projection_system(vertices2d: &[Vec2; 8], cam: &CameraIntrinsics) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(16, 12);
    for (i, x) in vertices2d.iter().enumerate() {
        let alpha = alpha_coefficients(i);
        for (j, a) in alpha.iter().enumerate() {
            m[(2 * i, 3 * j)] = a * cam.fx;
            m[(2 * i, 3 * j + 2)] = a * (cam.cx - x.x);
            m[(2 * i + 1, 3 * j + 1)] = a * cam.fy;
            m[(2 * i + 1, 3 * j + 2)] = a * (cam.cy - x.y);
        }
    }
    m
}

/// Recovers the camera-frame box (up to scale) from its eight projected vertices.
pub fn solve_epnp(vertices2d: &[Vec2; 8], cam: &CameraIntrinsics) -> Result<EpnpSolution> {
    if !vertices2d.iter().all(|v| v.x.is_finite() && v.y.is_finite()) {
        return Err(Error::InvalidInput("vertices must be finite".into()));
    }
    let m = build_projection_system(vertices2d, cam);
    let mtm = m.transpose() * &m;
    let eig = symmetric_eigen(&mtm);
    let largest = eig.values[11];
    if !(largest > 0.0) || eig.values[1] <= NULLSPACE_TOLERANCE * largest {
        return Err(Error::Degenerate);
    }

    let null = eig.vectors.column(0);
    let mut ctrl: [Vec3; 4] = std::array::from_fn(|j| Vec3::new(null[3 * j], null[3 * j + 1], null[3 * j + 2]));
    let mut verts = reconstruct(&ctrl);
    let mean_z = verts.iter().map(|v| v.z).sum::<f64>() / 8.0;
    if mean_z < 0.0 {
        ctrl.iter_mut().for_each(|c| *c = -*c);
    }
    let depth = ctrl[0].z;
    if !(depth > 1e-12 * ctrl.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
        return Err(Error::Degenerate);
    }
    ctrl.iter_mut().for_each(|c| *c /= depth);
    verts = reconstruct(&ctrl);
    if verts.iter().any(|v| !(v.z > 0.0)) {
        return Err(Error::Degenerate);
    }

    let axes = [1, 2, 3].map(|j| ctrl[j] - ctrl[0]);
    let lengths = Vec3::new(axes[0].norm(), axes[1].norm(), axes[2].norm());
    let longest = lengths.max();
    if !(lengths.min() > 0.0) {
        return Err(Error::Degenerate);
    }
    let directions = Matrix3::from_columns(&[axes[0] / lengths.x, axes[1] / lengths.y, axes[2] / lengths.z]);
    // Coplanar axes: the vertices admit only a flat reconstruction.
    if directions.determinant().abs() < FLATNESS_TOLERANCE {
        return Err(Error::Degenerate);
    }

    Ok(EpnpSolution {
        control_points_cam: ctrl,
        vertices_cam: verts,
        rotation: Rotation3::from_matrix(&nearest_rotation(&directions)),
        translation_dir: ctrl[0],
        size_ratios: lengths / longest,
        residual: eig.values[0],
    })
}

fn reconstruct(ctrl: &[Vec3; 4]) -> [Vec3; 8] {
    std::array::from_fn(|i| alpha_coefficients(i).iter().zip(ctrl).map(|(a, c)| c * *a).sum())
}

/// Orthogonal Procrustes: the rotation closest to `a` in Frobenius norm.
pub fn nearest_rotation(a: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = SVD::new(*a, true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let d = (u * vt).determinant().signum();
    u * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * vt
}

/// Scales an up-to-scale solution so that its lowest vertex (relative to the
/// plane normal) lies on the plane.
pub fn resolve_scale(sol: &EpnpSolution, plane: &Plane3) -> Result<OrientedBox3> {
    let lowest = sol
        .vertices_cam
        .iter()
        .map(|v| plane.normal().dot(v))
        .fold(f64::INFINITY, f64::min);
    if !(lowest.abs() >= 1e-9) {
        return Err(Error::PlaneInconsistent);
    }
    let s = -plane.d / lowest;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::PlaneInconsistent);
    }
    sol.to_box(s)
}

/// Runs the whole decode for one frame.
pub fn decode_frame(
    heat: &Heatmap,
    disp: &DisplacementField,
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &DecoderConfig,
    plane: Option<&Plane3>,
) -> Result<Vec<DecodedObject>> {
    cfg.validate()?;
    heat.check_grid(grid)?;
    disp.check_grid(grid)?;
    let mut out = Vec::new();
    for peak in extract_peaks(heat, cfg) {
        let vertices2d = decode_vertices(&peak, disp, grid);
        let solution = match solve_epnp(&vertices2d, cam) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("dropping peak at ({}, {}): {e}", peak.gx, peak.gy);
                continue;
            }
        };
        let metric = match plane {
            Some(pl) => match resolve_scale(&solution, pl) {
                Ok(b) => Some(b),
                Err(e) => {
                    log::warn!("no metric box for peak at ({}, {}): {e}", peak.gx, peak.gy);
                    None
                }
            },
            None => None,
        };
        out.push(DecodedObject {
            detection: Detection { peak, vertices2d },
            solution,
            metric,
        });
    }
    Ok(out)
}
