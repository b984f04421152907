//! Supervision targets for the detection, regression and shape heads, and
//! the matching losses.
//!
//! Tensors are row-major `[rows][cols][channels]`, so a 640×480 input with a
//! 40×30 grid gives a heatmap of shape `[30][40][1]` and a displacement field
//! of shape `[30][40][16]`. Channels `(2i, 2i+1)` of the displacement field
//! hold `(Δu, Δv)` in image pixels from the cell center to projected vertex `i`.

use crate::error::{Error, Result};
use crate::geom::{project_box, CameraIntrinsics, OrientedBox3, Vec2};

/// Number of displacement channels: two per box vertex.
pub const DISPLACEMENT_CHANNELS: usize = 16;
/// Channel count of the shape head (coordinate map + segmentation).
pub const SHAPE_CHANNELS: usize = 4;

/// Output grid of the detection and regression heads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub grid_w: usize,
    pub grid_h: usize,
    pub stride_x: f64,
    pub stride_y: f64,
}

impl GridSpec {
    pub const DEFAULT_W: usize = 40;
    pub const DEFAULT_H: usize = 30;

    /// Grid covering an image of `width × height` pixels with `grid_w × grid_h` cells.
    pub fn for_image(width: u32, height: u32, grid_w: usize, grid_h: usize) -> Result<Self> {
        if grid_w == 0 || grid_h == 0 || width == 0 || height == 0 {
            return Err(Error::InvalidInput("grid and image sizes must be non-zero".into()));
        }
        Ok(GridSpec {
            grid_w,
            grid_h,
            stride_x: width as f64 / grid_w as f64,
            stride_y: height as f64 / grid_h as f64,
        })
    }

    /// The standard 40×30 grid for the camera's image size.
    pub fn for_camera(cam: &CameraIntrinsics) -> Result<Self> {
        Self::for_image(cam.width, cam.height, Self::DEFAULT_W, Self::DEFAULT_H)
    }

    pub fn cells(&self) -> usize {
        self.grid_w * self.grid_h
    }

    /// Image-space center of cell `(gx, gy)`, in pixels.
    pub fn cell_center(&self, gx: usize, gy: usize) -> Vec2 {
        Vec2::new((gx as f64 + 0.5) * self.stride_x, (gy as f64 + 0.5) * self.stride_y)
    }

    /// Pixel coordinates expressed in grid-cell units.
    pub fn to_grid(&self, px: &Vec2) -> Vec2 {
        Vec2::new(px.x / self.stride_x, px.y / self.stride_y)
    }
}

/// Per-cell object-center heat in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Heatmap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Heatmap {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::zeros(grid.grid_w, grid.grid_h)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width],
                found: vec![data.len()],
            });
        }
        Ok(Heatmap { width, height, data })
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.height, self.width, 1]
    }

    pub fn get(&self, gx: usize, gy: usize) -> f64 {
        self.data[gy * self.width + gx]
    }

    pub fn set(&mut self, gx: usize, gy: usize, v: f64) {
        self.data[gy * self.width + gx] = v;
    }

    /// Elementwise maximum with another heatmap of the same shape.
    pub fn max_with(&self, other: &Heatmap) -> Result<Heatmap> {
        check_shape(&self.shape(), &other.shape())?;
        Ok(Heatmap {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.max(*b)).collect(),
        })
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        check_shape(&[grid.grid_h, grid.grid_w, 1], &self.shape())
    }
}

/// Per-cell displacement vectors to the eight projected box vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(width: usize, height: usize) -> Self {
        DisplacementField {
            width,
            height,
            data: vec![0.0; width * height * DISPLACEMENT_CHANNELS],
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::zeros(grid.grid_w, grid.grid_h)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * DISPLACEMENT_CHANNELS {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width, DISPLACEMENT_CHANNELS],
                found: vec![data.len()],
            });
        }
        Ok(DisplacementField { width, height, data })
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.height, self.width, DISPLACEMENT_CHANNELS]
    }

    pub fn cell(&self, gx: usize, gy: usize) -> &[f64] {
        let o = (gy * self.width + gx) * DISPLACEMENT_CHANNELS;
        &self.data[o..o + DISPLACEMENT_CHANNELS]
    }

    pub fn cell_mut(&mut self, gx: usize, gy: usize) -> &mut [f64] {
        let o = (gy * self.width + gx) * DISPLACEMENT_CHANNELS;
        &mut self.data[o..o + DISPLACEMENT_CHANNELS]
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        check_shape(&[grid.grid_h, grid.grid_w, DISPLACEMENT_CHANNELS], &self.shape())
    }
}

/// Four-channel output of the shape head (3 coordinate-map channels + segmentation).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl ShapeMap {
    pub const DEFAULT_W: usize = 160;
    pub const DEFAULT_H: usize = 120;

    pub fn zeros(width: usize, height: usize) -> Self {
        ShapeMap {
            width,
            height,
            data: vec![0.0; width * height * SHAPE_CHANNELS],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * SHAPE_CHANNELS {
            return Err(Error::ShapeMismatch {
                expected: vec![height, width, SHAPE_CHANNELS],
                found: vec![data.len()],
            });
        }
        Ok(ShapeMap { width, height, data })
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.height, self.width, SHAPE_CHANNELS]
    }
}

/// Heatmap kernel and regression-support parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderConfig {
    /// Kernel width as a fraction of the projected box diagonal.
    pub sigma_factor: f64,
    /// Lower bound on the kernel width, in grid cells.
    pub sigma_min: f64,
    /// Heat threshold above which displacements are supervised.
    pub epsilon: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            sigma_factor: 0.1,
            sigma_min: 1.0,
            epsilon: 0.2,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_factor > 0.0) {
            return Err(Error::InvalidInput("sigma_factor must be positive".into()));
        }
        if !(self.sigma_min > 0.0) {
            return Err(Error::InvalidInput("sigma_min must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput("epsilon must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Image-plane footprint of one object: where its Gaussian sits and how wide it is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectKernel {
    /// Projected box center in grid-cell units.
    pub mu: Vec2,
    /// Kernel width in grid cells.
    pub sigma: f64,
    /// Projected vertices in pixels, bit-ordered.
    pub vertices: [Vec2; 8],
}

impl ObjectKernel {
    /// Peak-normalized Gaussian evaluated at cell `(gx, gy)`.
    pub fn heat_at(&self, gx: usize, gy: usize) -> f64 {
        let dx = gx as f64 + 0.5 - self.mu.x;
        let dy = gy as f64 + 0.5 - self.mu.y;
        (-(dx * dx + dy * dy) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Computes the kernel of one object. Returns `Ok(None)` when the box center
/// projects outside the image.
pub fn object_kernel(
    obj: &OrientedBox3,
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &EncoderConfig,
) -> Result<Option<ObjectKernel>> {
    let center_px = cam.project(&obj.center)?;
    if !cam.contains(&center_px) {
        return Ok(None);
    }
    let vertices = project_box(cam, obj)?;
    let (mut lo, mut hi) = (grid.to_grid(&vertices[0]), grid.to_grid(&vertices[0]));
    for v in &vertices[1..] {
        let g = grid.to_grid(v);
        lo = lo.inf(&g);
        hi = hi.sup(&g);
    }
    let diag = (hi - lo).norm();
    Ok(Some(ObjectKernel {
        mu: grid.to_grid(&center_px),
        sigma: (cfg.sigma_factor * diag).max(cfg.sigma_min),
        vertices,
    }))
}

/// A kernel with the index of its object.
pub type IndexedKernel = (usize, ObjectKernel);

/// Kernels for every object, plus indices of objects skipped for leaving the frame.
pub fn object_kernels(
    objects: &[OrientedBox3],
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &EncoderConfig,
) -> Result<(Vec<IndexedKernel>, Vec<usize>)> {
    cfg.validate()?;
    let mut kept = Vec::with_capacity(objects.len());
    let mut skipped = Vec::new();
    for (i, obj) in objects.iter().enumerate() {
        match object_kernel(obj, cam, grid, cfg)? {
            Some(k) => kept.push((i, k)),
            None => {
                log::debug!("object {i} skipped: center projects outside the image");
                skipped.push(i);
            }
        }
    }
    Ok((kept, skipped))
}

/// Heatmap target: per cell, the max over objects of their Gaussians.
///
/// Returns the heatmap and the indices of objects whose centers project out
/// of frame (those contribute nothing).
pub fn encode_heatmap(
    objects: &[OrientedBox3],
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &EncoderConfig,
) -> Result<(Heatmap, Vec<usize>)> {
    let (kernels, skipped) = object_kernels(objects, cam, grid, cfg)?;
    let mut heat = Heatmap::for_grid(grid);
    for gy in 0..grid.grid_h {
        for gx in 0..grid.grid_w {
            let h = kernels.iter().map(|(_, k)| k.heat_at(gx, gy)).fold(0.0, f64::max);
            heat.set(gx, gy, h);
        }
    }
    Ok((heat, skipped))
}

/// Displacement target. Each cell whose heat reaches `cfg.epsilon` is given the
/// vertex offsets of the object with the largest heat at that cell (lowest
/// object index on ties); all other cells are zero.
pub fn encode_displacements(
    objects: &[OrientedBox3],
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &EncoderConfig,
    heat: &Heatmap,
) -> Result<DisplacementField> {
    heat.check_grid(grid)?;
    let (kernels, _) = object_kernels(objects, cam, grid, cfg)?;
    let mut disp = DisplacementField::for_grid(grid);
    for gy in 0..grid.grid_h {
        for gx in 0..grid.grid_w {
            if heat.get(gx, gy) < cfg.epsilon {
                continue;
            }
            let mut best: Option<(f64, &ObjectKernel)> = None;
            for (_, k) in &kernels {
                let h = k.heat_at(gx, gy);
                if best.is_none_or(|(b, _)| h > b) {
                    best = Some((h, k));
                }
            }
            let Some((_, k)) = best else { continue };
            let p = grid.cell_center(gx, gy);
            let cell = disp.cell_mut(gx, gy);
            for (i, x) in k.vertices.iter().enumerate() {
                cell[2 * i] = x.x - p.x;
                cell[2 * i + 1] = x.y - p.y;
            }
        }
    }
    Ok(disp)
}

/// Both targets for one frame.
pub fn encode_targets(
    objects: &[OrientedBox3],
    cam: &CameraIntrinsics,
    grid: &GridSpec,
    cfg: &EncoderConfig,
) -> Result<(Heatmap, DisplacementField, Vec<usize>)> {
    let (heat, skipped) = encode_heatmap(objects, cam, grid, cfg)?;
    let disp = encode_displacements(objects, cam, grid, cfg, &heat)?;
    Ok((heat, disp, skipped))
}

fn check_shape(expected: &[usize], found: &[usize]) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            expected: expected.to_vec(),
            found: found.to_vec(),
        });
    }
    Ok(())
}

fn mean_squared(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Mean squared error over all cells.
pub fn detection_loss(pred: &Heatmap, target: &Heatmap) -> Result<f64> {
    check_shape(&target.shape(), &pred.shape())?;
    Ok(mean_squared(&pred.data, &target.data))
}

/// Mean absolute error over the cells with `heat > epsilon` and all 16
/// channels. An empty support gives 0.
pub fn regression_loss(
    pred: &DisplacementField,
    target: &DisplacementField,
    heat: &Heatmap,
    epsilon: f64,
) -> Result<f64> {
    check_shape(&target.shape(), &pred.shape())?;
    check_shape(&[target.height, target.width, 1], &heat.shape())?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (c, h) in heat.data.iter().enumerate() {
        if *h <= epsilon {
            continue;
        }
        let o = c * DISPLACEMENT_CHANNELS;
        sum += pred.data[o..o + DISPLACEMENT_CHANNELS]
            .iter()
            .zip(&target.data[o..o + DISPLACEMENT_CHANNELS])
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>();
        n += DISPLACEMENT_CHANNELS;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Mean squared error of the shape head; examples without shape labels contribute 0.
pub fn shape_loss(pred: &ShapeMap, target: &ShapeMap, has_label: bool) -> Result<f64> {
    if !has_label {
        return Ok(0.0);
    }
    check_shape(&target.shape(), &pred.shape())?;
    Ok(mean_squared(&pred.data, &target.data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rotation3, Vec3};
    use approx::assert_abs_diff_eq;

    fn cam() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::for_camera(&cam()).unwrap()
    }

    /// Box whose center projects exactly onto the center of cell (gx, gy).
    fn box_at_cell(gx: usize, gy: usize, depth: f64, size: f64) -> OrientedBox3 {
        let c = cam();
        let p = grid().cell_center(gx, gy);
        let center = Vec3::new((p.x - c.cx) / c.fx * depth, (p.y - c.cy) / c.fy * depth, depth);
        OrientedBox3::new(
            Rotation3::from_axis_angle(&Vec3::new(0.3, 1.0, 0.2), 0.4),
            center,
            Vec3::new(size, 0.8 * size, 1.2 * size),
        )
        .unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = grid();
        assert_eq!((g.grid_w, g.grid_h), (40, 30));
        assert_eq!((g.stride_x, g.stride_y), (16.0, 16.0));
        assert_eq!(g.cell_center(20, 14), Vec2::new(328.0, 232.0));
    }

    #[test]
    fn heat_is_one_at_center_and_exp_half_at_sigma() {
        let obj = box_at_cell(20, 14, 3.0, 1.0);
        let cfg = EncoderConfig::default();
        let k = object_kernel(&obj, &cam(), &grid(), &cfg).unwrap().unwrap();
        let (heat, skipped) = encode_heatmap(&[obj], &cam(), &grid(), &cfg).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(heat.get(20, 14), 1.0);
        // A kernel evaluated exactly sigma away from its mean.
        let shifted = ObjectKernel {
            mu: Vec2::new(20.5 - k.sigma, 14.5),
            ..k
        };
        assert_abs_diff_eq!(shifted.heat_at(20, 14), (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!((-0.5f64).exp(), 0.60653, epsilon = 1e-5);
        assert!(heat.data.iter().all(|h| (0.0..=1.0).contains(h)));
    }

    #[test]
    fn sigma_has_floor() {
        // A tiny far box: diagonal much less than 10 cells.
        let obj = box_at_cell(5, 5, 50.0, 0.1);
        let cfg = EncoderConfig::default();
        let k = object_kernel(&obj, &cam(), &grid(), &cfg).unwrap().unwrap();
        assert_eq!(k.sigma, 1.0);
    }

    #[test]
    fn two_objects_merge_by_max() {
        let a = box_at_cell(8, 8, 3.0, 1.0);
        let b = box_at_cell(30, 20, 4.0, 1.0);
        let cfg = EncoderConfig::default();
        let (ha, _) = encode_heatmap(&[a], &cam(), &grid(), &cfg).unwrap();
        let (hb, _) = encode_heatmap(&[b], &cam(), &grid(), &cfg).unwrap();
        let (hab, _) = encode_heatmap(&[a, b], &cam(), &grid(), &cfg).unwrap();
        assert_eq!(hab, ha.max_with(&hb).unwrap());
    }

    #[test]
    fn out_of_frame_center_is_skipped() {
        let inside = box_at_cell(8, 8, 3.0, 1.0);
        let outside = OrientedBox3::axis_aligned(Vec3::new(5.0, 0.0, 2.0), Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let (h, skipped) = encode_heatmap(&[inside, outside], &cam(), &grid(), &EncoderConfig::default()).unwrap();
        assert_eq!(skipped, vec![1]);
        let (h0, _) = encode_heatmap(&[inside], &cam(), &grid(), &EncoderConfig::default()).unwrap();
        assert_eq!(h, h0);
    }

    #[test]
    fn center_behind_camera_errors() {
        let b = OrientedBox3::axis_aligned(Vec3::new(0.0, 0.0, -2.0), Vec3::new(1.0, 1.0, 1.0)).unwrap();
        assert!(matches!(
            encode_heatmap(&[b], &cam(), &grid(), &EncoderConfig::default()),
            Err(Error::BehindCamera)
        ));
    }

    #[test]
    fn displacement_is_vertex_minus_cell_center() {
        // The example vertex (370, 240) seen from cell (20, 14) at (328, 232).
        let g = grid();
        let p = g.cell_center(20, 14);
        assert_eq!(Vec2::new(370.0, 240.0) - p, Vec2::new(42.0, 8.0));

        let obj = box_at_cell(20, 14, 3.0, 1.0);
        let cfg = EncoderConfig::default();
        let (heat, disp, _) = encode_targets(&[obj], &cam(), &g, &cfg).unwrap();
        let verts = project_box(&cam(), &obj).unwrap();
        for gy in 0..g.grid_h {
            for gx in 0..g.grid_w {
                let cell = disp.cell(gx, gy);
                if heat.get(gx, gy) < cfg.epsilon {
                    assert!(cell.iter().all(|d| *d == 0.0));
                    continue;
                }
                let p = g.cell_center(gx, gy);
                for (i, v) in verts.iter().enumerate() {
                    assert!((p.x + cell[2 * i] - v.x).abs() <= 1e-9);
                    assert!((p.y + cell[2 * i + 1] - v.y).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn overlapping_objects_assign_by_heat() {
        let a = box_at_cell(18, 14, 3.0, 1.0);
        let b = box_at_cell(21, 14, 3.0, 1.0);
        let cfg = EncoderConfig::default();
        let g = grid();
        let (heat, disp, _) = encode_targets(&[a, b], &cam(), &g, &cfg).unwrap();
        let va = project_box(&cam(), &a).unwrap();
        let vb = project_box(&cam(), &b).unwrap();
        let check = |gx: usize, verts: &[Vec2; 8]| {
            let p = g.cell_center(gx, 14);
            let cell = disp.cell(gx, 14);
            assert!(heat.get(gx, 14) >= cfg.epsilon);
            for (i, v) in verts.iter().enumerate() {
                assert_abs_diff_eq!(p.x + cell[2 * i], v.x, epsilon = 1e-9);
            }
        };
        check(17, &va);
        check(18, &va);
        check(21, &vb);
        check(22, &vb);
    }

    #[test]
    fn detection_loss_examples() {
        let t = Heatmap::from_vec(40, 30, (0..1200).map(|i| (i % 7) as f64 / 10.0).collect()).unwrap();
        assert_eq!(detection_loss(&t, &t).unwrap(), 0.0);
        let shifted = Heatmap {
            data: t.data.iter().map(|v| v + 0.1).collect(),
            ..t.clone()
        };
        assert_abs_diff_eq!(detection_loss(&shifted, &t).unwrap(), 0.01, epsilon = 1e-12);

        let mut one = Heatmap::zeros(40, 30);
        one.set(3, 4, 1.0);
        assert_abs_diff_eq!(
            detection_loss(&Heatmap::zeros(40, 30), &one).unwrap(),
            1.0 / 1200.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            detection_loss(&Heatmap::zeros(40, 29), &one),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn regression_loss_examples() {
        let t = DisplacementField::from_vec(40, 30, (0..1200 * 16).map(|i| i as f64 * 0.01).collect()).unwrap();
        let mut heat = Heatmap::zeros(40, 30);
        assert_eq!(regression_loss(&t, &t, &heat, 0.2).unwrap(), 0.0);

        // Empty support.
        let off = DisplacementField {
            data: t.data.iter().map(|v| v + 1.0).collect(),
            ..t.clone()
        };
        heat.data.iter_mut().for_each(|h| *h = 0.2);
        assert_eq!(regression_loss(&off, &t, &heat, 0.2).unwrap(), 0.0);

        // Exactly one supported cell, every channel off by one.
        heat.set(7, 9, 0.9);
        assert_abs_diff_eq!(regression_loss(&off, &t, &heat, 0.2).unwrap(), 1.0, epsilon = 1e-9);

        assert!(regression_loss(&DisplacementField::zeros(39, 30), &t, &heat, 0.2).is_err());
        assert!(regression_loss(&t, &t, &Heatmap::zeros(39, 30), 0.2).is_err());
    }

    #[test]
    fn shape_loss_examples() {
        let t = ShapeMap::from_vec(160, 120, (0..160 * 120 * 4).map(|i| (i % 13) as f64).collect()).unwrap();
        let p = ShapeMap {
            data: t.data.iter().map(|v| v + 0.5).collect(),
            ..t.clone()
        };
        assert_eq!(shape_loss(&p, &t, false).unwrap(), 0.0);
        // Mismatched shapes are ignored when the example has no label.
        assert_eq!(shape_loss(&ShapeMap::zeros(10, 10), &t, false).unwrap(), 0.0);
        assert_eq!(shape_loss(&t, &t, true).unwrap(), 0.0);
        assert_abs_diff_eq!(shape_loss(&p, &t, true).unwrap(), 0.25, epsilon = 1e-12);
        assert!(shape_loss(&ShapeMap::zeros(10, 10), &t, true).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = EncoderConfig {
            epsilon: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EncoderConfig {
            sigma_factor: 0.0,
            ..Default::default()
        };
        assert!(encode_heatmap(&[], &cam(), &grid(), &bad).is_err());
    }
}
