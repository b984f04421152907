#![allow(dead_code)]

use boxpose::geom::{project_box, CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec3};
use boxpose::sim::random_resting_box;
use rand::Rng;

pub fn camera() -> CameraIntrinsics {
    CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
}

/// Ground plane about 1.2 m below the camera, pitched by up to ±10°.
pub fn random_ground<R: Rng>(rng: &mut R) -> Plane3 {
    let pitch = rng.random_range(-10f64..10.0).to_radians();
    let n = Rotation3::from_axis_angle(&Vec3::x(), pitch).rotate(&Vec3::new(0.0, -1.0, 0.0));
    Plane3::new(n, rng.random_range(1.0..1.4)).unwrap()
}

/// 1–3 boxes on the ground in distinct lateral slots, all fully in view.
pub fn resting_scene<R: Rng>(rng: &mut R, cam: &CameraIntrinsics) -> (Plane3, Vec<OrientedBox3>) {
    loop {
        let ground = random_ground(rng);
        let count = rng.random_range(1..=3usize);
        let mut slots = vec![-1.4, 0.0, 1.4];
        let mut boxes = Vec::new();
        for _ in 0..count {
            let x = slots.remove(rng.random_range(0..slots.len()));
            let z = rng.random_range(4.0..6.0);
            let x = x + rng.random_range(-0.1..0.1);
            boxes.push(random_resting_box(rng, &ground, x, z));
        }
        let in_view = boxes
            .iter()
            .all(|b| project_box(cam, b).is_ok_and(|v| v.iter().all(|p| cam.contains(p))));
        if in_view {
            return (ground, boxes);
        }
    }
}

/// Writes a manifest of `frames` resting scenes (with their ground planes) to `dir/manifest.json`.
pub fn write_scene_manifest(dir: &std::path::Path, frames: usize, seed: u64) -> std::path::PathBuf {
    use boxpose::io::{write_manifest, DatasetManifest, FrameRecord, LabelFlags, ObjectRecord, PlaneRecord};
    use rand::SeedableRng;

    let cam = camera();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut m = DatasetManifest::new(&cam);
    for k in 0..frames {
        let (ground, boxes) = resting_scene(&mut rng, &cam);
        m.frames.push(FrameRecord {
            image: format!("images/{k:04}.png"),
            mask: None,
            plane: Some(PlaneRecord {
                normal: (*ground.normal()).into(),
                d: ground.d,
            }),
            objects: boxes.iter().map(ObjectRecord::from_box).collect(),
            labels: LabelFlags {
                pose: true,
                ..LabelFlags::default()
            },
            extra: Default::default(),
        });
    }
    let path = dir.join("manifest.json");
    write_manifest(&path, &m).unwrap();
    path
}

/// Tiny PNG asset set: two foregrounds with soft edges and two backgrounds.
pub fn write_assets(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    use image::{Rgb, RgbImage, Rgba, RgbaImage};

    let fg = dir.join("fg");
    let bg = dir.join("bg");
    std::fs::create_dir_all(&fg).unwrap();
    std::fs::create_dir_all(&bg).unwrap();
    let disc = RgbaImage::from_fn(24, 24, |x, y| {
        let r = ((x as f64 - 11.5).powi(2) + (y as f64 - 11.5).powi(2)).sqrt();
        let a = (255.0 * (10.0 - r).clamp(0.0, 1.0)) as u8;
        Rgba([200, (x * 10) as u8, 40, a])
    });
    disc.save(fg.join("disc.png")).unwrap();
    let bar = RgbaImage::from_fn(30, 10, |x, y| {
        Rgba([20, 90, (y * 20) as u8, if x < 2 { 0 } else { 255 }])
    });
    bar.save(fg.join("bar.png")).unwrap();
    RgbImage::from_fn(64, 48, |x, y| Rgb([(x * 4) as u8, (y * 5) as u8, 128]))
        .save(bg.join("gradient.png"))
        .unwrap();
    RgbImage::from_fn(64, 48, |x, y| {
        Rgb([if (x / 8 + y / 8) % 2 == 0 { 30 } else { 220 }, 60, 60])
    })
    .save(bg.join("checker.png"))
    .unwrap();
    (fg, bg)
}
