//! Synthetic 2D training images: alpha-matted foreground cut-outs pasted onto
//! backgrounds at random placements, with binary segmentation masks.

use image::{GrayImage, Luma, Rgb, RgbImage, RgbaImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A foreground cut-out with at least one non-transparent pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundAsset {
    pub id: String,
    image: RgbaImage,
}

impl ForegroundAsset {
    pub fn new(id: impl Into<String>, image: RgbaImage) -> Result<Self> {
        let id = id.into();
        if !image.pixels().any(|p| p.0[3] > 0) {
            return Err(Error::EmptySupport(format!("asset {id} is fully transparent")));
        }
        Ok(ForegroundAsset { id, image })
    }

    pub fn image(&self) -> &RgbaImage {
        &self.image
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    /// Crops to the bounding box of pixels with non-zero alpha.
    pub fn cropped_to_alpha(&self) -> ForegroundAsset {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for (x, y, p) in self.image.enumerate_pixels() {
            if p.0[3] > 0 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
        let view = image::imageops::crop_imm(&self.image, x0, y0, x1 - x0 + 1, y1 - y0 + 1);
        ForegroundAsset {
            id: self.id.clone(),
            image: view.to_image(),
        }
    }
}

/// Where the foreground goes: its center lands on `translation` after scaling
/// and rotating about it (positive degrees turn clockwise on a y-down screen).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub translation: (f64, f64),
    pub rotation_deg: f64,
    pub scale: f64,
}

impl Placement {
    /// Places an asset of the given size with its pixels aligned 1:1 at offset `(x, y)`.
    pub fn identity_at(x: f64, y: f64, fg_width: u32, fg_height: u32) -> Self {
        Placement {
            translation: (x + fg_width as f64 / 2.0, y + fg_height as f64 / 2.0),
            rotation_deg: 0.0,
            scale: 1.0,
        }
    }

    /// Axis-aligned extent of the placed `w × h` rectangle.
    pub fn placed_extent(&self, w: f64, h: f64) -> (f64, f64) {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        (
            self.scale * (w * c.abs() + h * s.abs()),
            self.scale * (w * s.abs() + h * c.abs()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementConfig {
    pub scale_min: f64,
    pub scale_max: f64,
    pub rotation_min_deg: f64,
    pub rotation_max_deg: f64,
    /// Fraction of the placed bounding box (per axis) allowed outside the frame.
    pub overhang: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            scale_min: 0.5,
            scale_max: 1.0,
            rotation_min_deg: -180.0,
            rotation_max_deg: 180.0,
            overhang: 0.0,
        }
    }
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_max.is_finite()) {
            return Err(Error::Infeasible(format!(
                "scale range [{}, {}] is empty or non-positive",
                self.scale_min, self.scale_max
            )));
        }
        if !(self.rotation_min_deg <= self.rotation_max_deg) {
            return Err(Error::Infeasible("rotation range is empty".into()));
        }
        if !(0.0..1.0).contains(&self.overhang) {
            return Err(Error::Infeasible("overhang must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

const PLACEMENT_ATTEMPTS: usize = 64;

/// Draws a placement that keeps at least `1 − overhang` of the placed
/// bounding box inside the frame along each axis.
pub fn sample_placement(
    seed: u64,
    bg_size: (u32, u32),
    fg_size: (u32, u32),
    cfg: &PlacementConfig,
) -> Result<Placement> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_placement_with(&mut rng, bg_size, fg_size, cfg)
}

fn sample_placement_with(
    rng: &mut ChaCha8Rng,
    bg_size: (u32, u32),
    fg_size: (u32, u32),
    cfg: &PlacementConfig,
) -> Result<Placement> {
    let (bw, bh) = (bg_size.0 as f64, bg_size.1 as f64);
    let keep = 1.0 - cfg.overhang;
    for _ in 0..PLACEMENT_ATTEMPTS {
        let scale = uniform(rng, cfg.scale_min, cfg.scale_max);
        let rotation_deg = uniform(rng, cfg.rotation_min_deg, cfg.rotation_max_deg);
        let mut pl = Placement {
            translation: (0.0, 0.0),
            rotation_deg,
            scale,
        };
        let (ew, eh) = pl.placed_extent(fg_size.0 as f64, fg_size.1 as f64);
        if keep * ew > bw || keep * eh > bh {
            continue;
        }
        let mx = ew * (0.5 - cfg.overhang);
        let my = eh * (0.5 - cfg.overhang);
        pl.translation = (uniform(rng, mx, bw - mx), uniform(rng, my, bh - my));
        return Ok(pl);
    }
    Err(Error::Infeasible(format!(
        "no placement of a {}x{} asset fits a {}x{} background",
        fg_size.0, fg_size.1, bg_size.0, bg_size.1
    )))
}

/// `α·fg + (1−α)·bg` per channel, rounded to 8 bits.
pub fn blend_pixel(fg: [u8; 3], bg: [u8; 3], alpha: f64) -> [u8; 3] {
    let a = alpha.clamp(0.0, 1.0);
    std::array::from_fn(|c| (a * fg[c] as f64 + (1.0 - a) * bg[c] as f64).round().clamp(0.0, 255.0) as u8)
}

/// Result of pasting one foreground.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub image: RgbImage,
    pub mask: GrayImage,
}

/// Bilinear sample of premultiplied RGBA at continuous position `(x, y)`;
/// taps outside the raster are transparent. Returns `(premultiplied rgb, alpha)`.
fn sample_premultiplied(img: &RgbaImage, x: f64, y: f64) -> ([f64; 3], f64) {
    let fx = x - 0.5;
    let fy = y - 0.5;
    let x0 = fx.floor();
    let y0 = fy.floor();
    let wx = fx - x0;
    let wy = fy - y0;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut rgb = [0.0; 3];
    let mut alpha = 0.0;
    for (dx, dy, wt) in [
        (0, 0, (1.0 - wx) * (1.0 - wy)),
        (1, 0, wx * (1.0 - wy)),
        (0, 1, (1.0 - wx) * wy),
        (1, 1, wx * wy),
    ] {
        if wt == 0.0 {
            continue;
        }
        let (px, py) = (x0 as i64 + dx, y0 as i64 + dy);
        if px < 0 || py < 0 || px >= w || py >= h {
            continue;
        }
        let p = img.get_pixel(px as u32, py as u32).0;
        let a = p[3] as f64 / 255.0;
        alpha += wt * a;
        for c in 0..3 {
            rgb[c] += wt * a * p[c] as f64;
        }
    }
    (rgb, alpha)
}

/// The placed foreground at background pixel `(x, y)`: premultiplied RGB and alpha,
/// found by mapping the pixel center back into asset coordinates.
pub fn placed_sample(fg: &ForegroundAsset, pl: &Placement, x: u32, y: u32) -> ([f64; 3], f64) {
    let (s, c) = pl.rotation_deg.to_radians().sin_cos();
    let qx = x as f64 + 0.5 - pl.translation.0;
    let qy = y as f64 + 0.5 - pl.translation.1;
    let u = (c * qx + s * qy) / pl.scale + fg.width() as f64 / 2.0;
    let v = (-s * qx + c * qy) / pl.scale + fg.height() as f64 / 2.0;
    sample_premultiplied(fg.image(), u, v)
}

/// Pastes `fg` onto `bg`. The mask marks pixels whose resampled alpha exceeds
/// `alpha_threshold`.
pub fn composite(fg: &ForegroundAsset, bg: &RgbImage, pl: &Placement, alpha_threshold: f64) -> Result<Composite> {
    if !(pl.scale > 0.0) {
        return Err(Error::InvalidInput("placement scale must be positive".into()));
    }
    let (bw, bh) = bg.dimensions();
    let (fw, fh) = (fg.width() as f64, fg.height() as f64);
    let (tx, ty) = pl.translation;

    // Only pixels under the placed rectangle can change.
    let (ew, eh) = pl.placed_extent(fw, fh);
    let x_lo = ((tx - ew / 2.0).floor() - 1.0).max(0.0) as u32;
    let y_lo = ((ty - eh / 2.0).floor() - 1.0).max(0.0) as u32;
    let x_hi = ((tx + ew / 2.0).ceil() + 1.0).clamp(0.0, bw as f64) as u32;
    let y_hi = ((ty + eh / 2.0).ceil() + 1.0).clamp(0.0, bh as f64) as u32;

    let mut image = bg.clone();
    let mut mask = GrayImage::new(bw, bh);
    let mut covered = false;
    for y in y_lo..y_hi {
        for x in x_lo..x_hi {
            let (pm, alpha) = placed_sample(fg, pl, x, y);
            if alpha <= 0.0 {
                continue;
            }
            covered = true;
            let b = bg.get_pixel(x, y).0;
            let out: [u8; 3] =
                std::array::from_fn(|k| (pm[k] + (1.0 - alpha) * b[k] as f64).round().clamp(0.0, 255.0) as u8);
            image.put_pixel(x, y, Rgb(out));
            if alpha > alpha_threshold {
                mask.put_pixel(x, y, Luma([255]));
            }
        }
    }
    if !covered {
        return Err(Error::EmptySupport(format!(
            "placement of asset {} has no on-frame support",
            fg.id
        )));
    }
    Ok(Composite { image, mask })
}

/// Pastes several foregrounds in order; later ones occlude earlier ones and
/// the mask is the union.
pub fn composite_many(
    layers: &[(&ForegroundAsset, Placement)],
    bg: &RgbImage,
    alpha_threshold: f64,
) -> Result<Composite> {
    let mut image = bg.clone();
    let mut mask = GrayImage::new(bg.width(), bg.height());
    for (fg, pl) in layers {
        let c = composite(fg, &image, pl, alpha_threshold)?;
        image = c.image;
        for (m, n) in mask.pixels_mut().zip(c.mask.pixels()) {
            m.0[0] = m.0[0].max(n.0[0]);
        }
    }
    Ok(Composite { image, mask })
}

/// One generated training image with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSample {
    pub index: usize,
    pub image: RgbImage,
    pub mask: GrayImage,
    pub placements: Vec<Placement>,
    pub foreground_ids: Vec<String>,
    pub background_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub placement: PlacementConfig,
    pub alpha_threshold: f64,
    pub objects_per_image: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            placement: PlacementConfig::default(),
            alpha_threshold: 0.5,
            objects_per_image: 1,
        }
    }
}

/// Per-sample seed, independent of how samples are scheduled.
pub fn sample_seed(base: u64, index: usize) -> u64 {
    // splitmix64 finalizer over the combined input.
    let mut z = base ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds sample `index` deterministically from `(base_seed, index)`.
pub fn generate_sample(
    foregrounds: &[ForegroundAsset],
    backgrounds: &[(String, RgbImage)],
    base_seed: u64,
    index: usize,
    cfg: &SynthConfig,
) -> Result<CompositeSample> {
    if foregrounds.is_empty() || backgrounds.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one foreground and one background".into(),
        ));
    }
    cfg.placement.validate()?;
    let seed = sample_seed(base_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bg_id, bg) = &backgrounds[rng.random_range(0..backgrounds.len())];
    let mut layers = Vec::with_capacity(cfg.objects_per_image);
    for _ in 0..cfg.objects_per_image.max(1) {
        let fg = &foregrounds[rng.random_range(0..foregrounds.len())];
        let pl = sample_placement_with(&mut rng, bg.dimensions(), (fg.width(), fg.height()), &cfg.placement)?;
        layers.push((fg, pl));
    }
    let c = composite_many(&layers, bg, cfg.alpha_threshold)?;
    Ok(CompositeSample {
        index,
        image: c.image,
        mask: c.mask,
        placements: layers.iter().map(|(_, p)| *p).collect(),
        foreground_ids: layers.iter().map(|(f, _)| f.id.clone()).collect(),
        background_id: bg_id.clone(),
        seed,
    })
}

/// Generates `count` samples on a pool of `threads` workers (0 = rayon default).
/// Output is identical for any thread count.
pub fn generate_batch(
    foregrounds: &[ForegroundAsset],
    backgrounds: &[(String, RgbImage)],
    count: usize,
    base_seed: u64,
    cfg: &SynthConfig,
    threads: usize,
) -> Result<Vec<CompositeSample>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| generate_sample(foregrounds, backgrounds, base_seed, i, cfg))
            .collect()
    })
}
