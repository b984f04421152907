//! Random scenes for benchmarking and testing the solver.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::geom::{project_box, CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec2, Vec3};
use crate::pose_decoder::solve_epnp;

/// One solver test case: a camera, a box in front of it, and its noiseless projection.
#[derive(Debug, Clone)]
pub struct EpnpInstance {
    pub camera: CameraIntrinsics,
    pub bbox: OrientedBox3,
    pub vertices2d: [Vec2; 8],
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Rotation3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 {
            return Rotation3::from_wxyz(q[0] / n, q[1] / n, q[2] / n, q[3] / n, 1e-9).expect("normalized");
        }
    }
}

pub fn random_camera<R: Rng>(rng: &mut R) -> CameraIntrinsics {
    let f = rng.random_range(400.0..1000.0);
    let fy = f * rng.random_range(0.95..1.05);
    let cx = 320.0 + rng.random_range(-20.0..20.0);
    let cy = 240.0 + rng.random_range(-20.0..20.0);
    CameraIntrinsics::new(f, fy, cx, cy, 640, 480).expect("valid intrinsics")
}

fn extent(v: &[Vec2; 8]) -> f64 {
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).max()
}

/// Random instance whose projection lies inside the image and spans at least `min_extent_px`.
pub fn random_instance<R: Rng>(rng: &mut R, min_extent_px: f64) -> EpnpInstance {
    let camera = random_camera(rng);
    loop {
        let size = Vec3::new(
            rng.random_range(0.2..1.0),
            rng.random_range(0.2..1.0),
            rng.random_range(0.2..1.0),
        );
        let z = rng.random_range(1.5..6.0);
        let u = rng.random_range(0.25..0.75) * camera.width as f64;
        let v = rng.random_range(0.25..0.75) * camera.height as f64;
        let center = Vec3::new((u - camera.cx) / camera.fx * z, (v - camera.cy) / camera.fy * z, z);
        let bbox = OrientedBox3::new(random_rotation(rng), center, size).expect("positive size");
        if bbox.vertices().iter().any(|p| p.z < 0.3) {
            continue;
        }
        let Ok(vertices2d) = project_box(&camera, &bbox) else {
            continue;
        };
        if vertices2d.iter().all(|p| camera.contains(p)) && extent(&vertices2d) >= min_extent_px {
            return EpnpInstance {
                camera,
                bbox,
                vertices2d,
            };
        }
    }
}

/// Random box resting on `ground` below `(x, z)`, yawed about the plane normal.
pub fn random_resting_box<R: Rng>(rng: &mut R, ground: &Plane3, x: f64, z: f64) -> OrientedBox3 {
    let size = Vec3::new(
        rng.random_range(0.3..0.8),
        rng.random_range(0.3..0.8),
        rng.random_range(0.3..0.8),
    );
    let n = *ground.normal();
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let rotation = Rotation3::from_axis_angle(&n, yaw);
    // Start on the plane below (x, z), then lift until the lowest vertex touches it.
    let base = Vec3::new(x, 0.0, z);
    let foot = base - n * ground.signed_distance(&base);
    let b = OrientedBox3::new(rotation, foot, size).expect("positive size");
    let lowest = b
        .vertices()
        .iter()
        .map(|v| ground.signed_distance(v))
        .fold(f64::INFINITY, f64::min);
    b.transformed(&Rotation3::identity(), &(-n * lowest))
}

/// Adds independent Gaussian noise of standard deviation `sigma` to every coordinate.
pub fn perturb<R: Rng>(rng: &mut R, v: &[Vec2; 8], sigma: f64) -> [Vec2; 8] {
    std::array::from_fn(|i| {
        let dx: f64 = StandardNormal.sample(rng);
        let dy: f64 = StandardNormal.sample(rng);
        v[i] + Vec2::new(dx, dy) * sigma
    })
}

/// Summary of a benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub trials: usize,
    pub failures: usize,
    pub rotation_err_deg: Quantiles,
    pub size_ratio_err: Quantiles,
    pub reprojection_px: Quantiles,
    pub mean_solve_us: f64,
    pub max_solve_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &mut [f64]) -> Quantiles {
        if values.is_empty() {
            return Quantiles {
                median: f64::NAN,
                p90: f64::NAN,
                max: f64::NAN,
            };
        }
        values.sort_by(f64::total_cmp);
        let at = |q: f64| values[((values.len() - 1) as f64 * q).round() as usize];
        Quantiles {
            median: median(values),
            p90: at(0.9),
            max: values[values.len() - 1],
        }
    }
}

/// Median of an already sorted slice.
fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Relative error of the recovered size ratios against the true box, normalized by the first axis.
pub fn size_ratio_error(est: &Vec3, truth: &Vec3) -> f64 {
    let a = est / est.x;
    let b = truth / truth.x;
    ((a - b).component_div(&b)).amax()
}

/// Largest reprojection distance between the solution's vertices and the observed ones.
pub fn reprojection_error(solved: &[Vec2; 8], observed: &[Vec2; 8]) -> f64 {
    solved
        .iter()
        .zip(observed)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Runs `trials` solves on noisy projections of random instances.
pub fn run_bench(trials: usize, noise_px: f64, seed: u64) -> Result<BenchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rot = Vec::with_capacity(trials);
    let mut size = Vec::with_capacity(trials);
    let mut reproj = Vec::with_capacity(trials);
    let mut total_us = 0.0;
    let mut max_us: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..trials {
        let inst = random_instance(&mut rng, 100.0);
        let observed = perturb(&mut rng, &inst.vertices2d, noise_px);
        let t0 = Instant::now();
        let solved = solve_epnp(&observed, &inst.camera);
        let us = t0.elapsed().as_secs_f64() * 1e6;
        total_us += us;
        max_us = max_us.max(us);
        let Ok(sol) = solved else {
            failures += 1;
            continue;
        };
        rot.push(sol.rotation.angle_to(&inst.bbox.rotation).to_degrees());
        size.push(size_ratio_error(&sol.size_ratios, &inst.bbox.size));
        match sol.reproject(&inst.camera) {
            Ok(p) => reproj.push(reprojection_error(&p, &observed)),
            Err(_) => failures += 1,
        }
    }
    Ok(BenchReport {
        trials,
        failures,
        rotation_err_deg: Quantiles::of(&mut rot),
        size_ratio_err: Quantiles::of(&mut size),
        reprojection_px: Quantiles::of(&mut reproj),
        mean_solve_us: if trials > 0 { total_us / trials as f64 } else { 0.0 },
        max_solve_us: max_us,
    })
}
