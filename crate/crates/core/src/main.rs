use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boxpose::geom::{CameraIntrinsics, OrientedBox3, Plane3, Rotation3, Vec3};
use boxpose::io::detections::{DetectionRecord, DetectionsFile, FrameDetections};
use boxpose::io::manifest::QUATERNION_TOLERANCE;
use boxpose::io::tensor::{read_displacements, read_heatmap, write_displacements, write_heatmap};
use boxpose::io::{
    load_rgb, load_rgba, read_detections, read_manifest, save_gray, save_rgb, write_detections, write_manifest,
    DatasetManifest, FrameRecord, LabelFlags,
};
use boxpose::metrics::{add_metric, average_precision, iou3d, iou3d_mc, rep_metric, GroundTruth, Pose, ScoredBox};
use boxpose::pose_decoder::{decode_frame, DecoderConfig};
use boxpose::sim::run_bench;
use boxpose::synth2d::{generate_batch, ForegroundAsset, PlacementConfig, SynthConfig};
use boxpose::target_codec::{encode_targets, EncoderConfig, GridSpec};
use boxpose::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "boxpose",
    version,
    about = "Box pose targets, decoding, metrics and synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode ground-truth heatmaps and displacement fields for every frame of a manifest.
    Encode(EncodeArgs),
    /// Decode one frame's network outputs into boxes.
    Decode(DecodeArgs),
    /// Score detections against a manifest.
    Eval(EvalArgs),
    /// Intersection-over-union of two oriented boxes.
    Iou(IouArgs),
    /// Composite foreground cut-outs onto backgrounds.
    Synth(SynthArgs),
    /// Accuracy and latency of the pose solver on random scenes.
    EpnpBench(BenchArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    sigma_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_min: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Output grid as WIDTHxHEIGHT cells.
    #[arg(long, default_value = "40x30", value_parser = parse_grid)]
    grid: (usize, usize),
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    heat: PathBuf,
    #[arg(long)]
    disp: PathBuf,
    /// Manifest holding the camera intrinsics.
    #[arg(long)]
    camera: PathBuf,
    /// Frame index, used for the plane lookup and written to the output.
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Ground plane "nx,ny,nz,d" for metric boxes; bare `--plane` takes it from the manifest frame.
    #[arg(long, num_args = 0..=1, value_parser = parse_plane)]
    plane: Option<Option<[f64; 4]>>,
    #[arg(long, default_value_t = 0.5)]
    peak_threshold: f64,
    #[arg(long, default_value_t = 1)]
    nms_radius: usize,
    #[arg(long, default_value_t = 8)]
    max_detections: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Ap3d,
    Rep,
    Add,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    detections: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    iou_threshold: f64,
    #[arg(long, value_enum, default_value_t = Metric::Ap3d)]
    metric: Metric,
    /// Pixel threshold for `rep`.
    #[arg(long, default_value_t = 5.0)]
    rep_threshold: f64,
    /// Diameter fraction for `add`.
    #[arg(long, default_value_t = 0.1)]
    add_fraction: f64,
    /// Use closest-point distances for `add`.
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct IouArgs {
    /// "qw,qx,qy,qz,cx,cy,cz,sx,sy,sz"
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    box_a: OrientedBox3,
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    box_b: OrientedBox3,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    foregrounds: PathBuf,
    #[arg(long)]
    backgrounds: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads (0 picks the number of cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    objects_per_image: usize,
    #[arg(long, default_value_t = 0.5)]
    scale_min: f64,
    #[arg(long, default_value_t = 1.0)]
    scale_max: f64,
    #[arg(long, default_value_t = 0.0)]
    overhang: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_threshold: f64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0.0)]
    noise_px: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.trim_matches(|c| c == '[' || c == ']').split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let w = w.parse().map_err(|e| format!("{e}"))?;
    let h = h.parse().map_err(|e| format!("{e}"))?;
    Ok((w, h))
}

fn parse_plane(s: &str) -> Result<[f64; 4], String> {
    parse_floats::<4>(s)
}

fn parse_box(s: &str) -> Result<OrientedBox3, String> {
    let v = parse_floats::<10>(s)?;
    let r = Rotation3::from_wxyz(v[0], v[1], v[2], v[3], QUATERNION_TOLERANCE).map_err(|e| e.to_string())?;
    OrientedBox3::new(r, Vec3::new(v[4], v[5], v[6]), Vec3::new(v[7], v[8], v[9])).map_err(|e| e.to_string())
}

fn write_json(path: &Path, v: &Value) -> boxpose::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn encode(a: EncodeArgs) -> boxpose::Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    let cam = manifest.camera()?;
    let grid = GridSpec::for_image(cam.width, cam.height, a.grid.0, a.grid.1)?;
    let cfg = EncoderConfig {
        sigma_factor: a.sigma_factor,
        sigma_min: a.sigma_min,
        epsilon: a.epsilon,
    };
    cfg.validate()?;
    fs::create_dir_all(&a.out_dir)?;
    let mut skipped_total = 0;
    for (k, frame) in manifest.frames.iter().enumerate() {
        let boxes = frame.boxes()?;
        let (heat, disp, skipped) = encode_targets(&boxes, &cam, &grid, &cfg)?;
        for i in &skipped {
            log::warn!("frame {k}: object {i} projects outside the image and was skipped");
        }
        skipped_total += skipped.len();
        write_heatmap(a.out_dir.join(format!("frame_{k:04}_heat.mpt")), &heat)?;
        write_displacements(a.out_dir.join(format!("frame_{k:04}_disp.mpt")), &disp)?;
    }
    println!(
        "encoded {} frames into {} ({} objects out of view)",
        manifest.frames.len(),
        a.out_dir.display(),
        skipped_total
    );
    Ok(())
}

fn decode(a: DecodeArgs) -> boxpose::Result<()> {
    let manifest = read_manifest(&a.camera)?;
    let cam = manifest.camera()?;
    let heat = read_heatmap(&a.heat)?;
    let disp = read_displacements(&a.disp)?;
    let grid = GridSpec::for_image(cam.width, cam.height, heat.width, heat.height)?;
    let plane = match a.plane {
        None => None,
        Some(Some([nx, ny, nz, d])) => Some(Plane3::new(Vec3::new(nx, ny, nz), d)?),
        Some(None) => {
            let frame = manifest
                .frames
                .get(a.frame)
                .ok_or_else(|| Error::schema("frames", format!("no frame {}", a.frame)))?;
            Some(
                frame
                    .plane()?
                    .ok_or_else(|| Error::schema(format!("frames[{}].plane", a.frame), "plane required"))?,
            )
        }
    };
    let cfg = DecoderConfig {
        peak_threshold: a.peak_threshold,
        nms_radius: a.nms_radius,
        max_detections: a.max_detections,
    };
    let decoded = decode_frame(&heat, &disp, &cam, &grid, &cfg, plane.as_ref())?;
    let mut out = DetectionsFile::new();
    out.frames.push(FrameDetections {
        frame: a.frame,
        detections: decoded.iter().map(DetectionRecord::from_decoded).collect(),
    });
    write_detections(&a.out, &out)?;
    println!("frame {}: {} detections", a.frame, decoded.len());
    Ok(())
}

/// Ground truth of frames that carry pose labels.
fn labelled_frames(manifest: &DatasetManifest) -> boxpose::Result<Vec<(usize, Vec<OrientedBox3>)>> {
    let mut out = Vec::new();
    for (k, f) in manifest.frames.iter().enumerate() {
        if f.labels.pose {
            out.push((k, f.boxes()?));
        }
    }
    Ok(out)
}

fn metric_detections(dets: &DetectionsFile, frames: usize) -> boxpose::Result<Vec<ScoredBox>> {
    let mut out = Vec::new();
    for (i, fr) in dets.frames.iter().enumerate() {
        if fr.frame >= frames {
            return Err(Error::schema(
                format!("frames[{i}].frame"),
                format!("frame {} not in manifest ({frames} frames)", fr.frame),
            ));
        }
        for (k, d) in fr.detections.iter().enumerate() {
            let bbox = d.metric_box()?.ok_or_else(|| {
                Error::schema(
                    format!("frames[{i}].detections[{k}].metric"),
                    "metric box required; decode with --plane",
                )
            })?;
            out.push(ScoredBox {
                frame: fr.frame,
                confidence: d.confidence,
                bbox,
            });
        }
    }
    Ok(out)
}

fn eval(a: EvalArgs) -> boxpose::Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    let cam = manifest.camera()?;
    let files = a
        .detections
        .iter()
        .map(read_detections)
        .collect::<boxpose::Result<Vec<_>>>()?;
    let dets = DetectionsFile::merge(files);
    let labelled = labelled_frames(&manifest)?;
    let keep: Vec<usize> = labelled.iter().map(|(k, _)| *k).collect();
    let scored: Vec<ScoredBox> = metric_detections(&dets, manifest.frames.len())?
        .into_iter()
        .filter(|d| keep.contains(&d.frame))
        .collect();
    let gts: Vec<GroundTruth> = labelled
        .iter()
        .flat_map(|(k, boxes)| boxes.iter().map(move |b| GroundTruth { frame: *k, bbox: *b }))
        .collect();

    let report = match a.metric {
        Metric::Ap3d => {
            let curve = average_precision(&scored, &gts, a.iou_threshold)?;
            let tp = curve.matches.iter().filter(|m| m.gt.is_some()).count();
            println!(
                "AP@{}IoU = {:.4} ({} detections, {} ground truth)",
                a.iou_threshold,
                curve.ap,
                scored.len(),
                gts.len()
            );
            json!({
                "metric": "ap3d",
                "iou_threshold": a.iou_threshold,
                "ap": curve.ap,
                "ground_truth": gts.len(),
                "detections": scored.len(),
                "true_positives": tp,
                "curve": curve.points.iter().map(|(r, p)| [*r, *p]).collect::<Vec<_>>(),
            })
        }
        Metric::Rep | Metric::Add => {
            if gts.is_empty() {
                return Err(Error::UndefinedRecall);
            }
            let mut rows = Vec::new();
            let mut successes = 0;
            for (k, boxes) in &labelled {
                for (i, gt) in boxes.iter().enumerate() {
                    let best = scored
                        .iter()
                        .filter(|d| d.frame == *k)
                        .map(|d| (iou3d(&d.bbox, gt), d))
                        .max_by(|x, y| x.0.total_cmp(&y.0));
                    let score = match best {
                        Some((_, d)) => {
                            let (est, truth) = (Pose::of_box(&d.bbox), Pose::of_box(gt));
                            let points = gt.local_vertices();
                            Some(if a.metric == Metric::Rep {
                                rep_metric(&est, &truth, &points, &cam, a.rep_threshold)?
                            } else {
                                add_metric(&est, &truth, &points, gt.diameter(), a.symmetric, a.add_fraction)?
                            })
                        }
                        None => None,
                    };
                    let success = score.is_some_and(|s| s.success);
                    successes += success as usize;
                    rows.push(json!({
                        "frame": k,
                        "object": i,
                        "error": score.map(|s| s.error),
                        "success": success,
                    }));
                }
            }
            let rate = successes as f64 / rows.len() as f64;
            let (name, threshold) = match a.metric {
                Metric::Rep => ("rep", a.rep_threshold),
                _ => (if a.symmetric { "add-s" } else { "add" }, a.add_fraction),
            };
            println!("{name} success rate = {rate:.4} ({successes}/{})", rows.len());
            json!({
                "metric": name,
                "threshold": threshold,
                "success_rate": rate,
                "successes": successes,
                "ground_truth": rows.len(),
                "objects": rows,
            })
        }
    };
    write_json(&a.report, &report)
}

fn iou(a: IouArgs) -> boxpose::Result<()> {
    let exact = iou3d(&a.box_a, &a.box_b);
    let mut out = json!({ "iou3d": exact });
    if let Some(n) = a.mc_samples {
        if n == 0 {
            return Err(Error::InvalidInput("--mc-samples must be positive".into()));
        }
        out["iou3d_mc"] = json!(iou3d_mc(&a.box_a, &a.box_b, n, a.seed));
        out["mc_samples"] = json!(n);
        out["seed"] = json!(a.seed);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn png_files(dir: &Path) -> boxpose::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!("no PNG files in {}", dir.display())));
    }
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn synth(a: SynthArgs) -> boxpose::Result<()> {
    let mut foregrounds = Vec::new();
    for p in png_files(&a.foregrounds)? {
        foregrounds.push(ForegroundAsset::new(stem(&p), load_rgba(&p)?)?.cropped_to_alpha());
    }
    let mut backgrounds = Vec::new();
    for p in png_files(&a.backgrounds)? {
        backgrounds.push((stem(&p), load_rgb(&p)?));
    }
    let cfg = SynthConfig {
        placement: PlacementConfig {
            scale_min: a.scale_min,
            scale_max: a.scale_max,
            overhang: a.overhang,
            ..PlacementConfig::default()
        },
        alpha_threshold: a.alpha_threshold,
        objects_per_image: a.objects_per_image,
    };
    let samples = generate_batch(&foregrounds, &backgrounds, a.count, a.seed, &cfg, a.threads)?;

    // Nominal pinhole camera for the first background: 90° horizontal field of view.
    let (w, h) = backgrounds[0].1.dimensions();
    if backgrounds.iter().any(|(_, b)| b.dimensions() != (w, h)) {
        log::warn!("backgrounds differ in size; the manifest camera uses {w}x{h}");
    }
    let cam = CameraIntrinsics::new(w as f64 / 2.0, w as f64 / 2.0, w as f64 / 2.0, h as f64 / 2.0, w, h)?;
    let mut manifest = DatasetManifest::new(&cam);
    fs::create_dir_all(a.out_dir.join("images"))?;
    fs::create_dir_all(a.out_dir.join("masks"))?;
    for s in &samples {
        let image = format!("images/{:05}.png", s.index);
        let mask = format!("masks/{:05}.png", s.index);
        save_rgb(a.out_dir.join(&image), &s.image)?;
        save_gray(a.out_dir.join(&mask), &s.mask)?;
        let placements: Vec<Value> = s
            .placements
            .iter()
            .zip(&s.foreground_ids)
            .map(|(p, id)| {
                json!({
                    "foreground": id,
                    "translation": [p.translation.0, p.translation.1],
                    "rotation_deg": p.rotation_deg,
                    "scale": p.scale,
                })
            })
            .collect();
        let mut frame = FrameRecord {
            image,
            mask: Some(mask),
            plane: None,
            objects: Vec::new(),
            labels: LabelFlags {
                pose: false,
                segmentation: true,
                coordinate_map: false,
            },
            extra: Default::default(),
        };
        frame.extra.insert(
            "synth".into(),
            json!({ "seed": s.seed, "background": s.background_id, "placements": placements }),
        );
        manifest.frames.push(frame);
    }
    let manifest_path = a.out_dir.join("manifest.json");
    write_manifest(&manifest_path, &manifest)?;
    println!("wrote {} samples to {}", samples.len(), a.out_dir.display());
    Ok(())
}

fn bench(a: BenchArgs) -> boxpose::Result<()> {
    if a.noise_px.is_nan() || a.noise_px < 0.0 {
        return Err(Error::InvalidInput("--noise-px must be non-negative".into()));
    }
    let r = run_bench(a.trials, a.noise_px, a.seed)?;
    println!(
        "trials {}  noise {} px  seed {}  failures {}",
        r.trials, a.noise_px, a.seed, r.failures
    );
    println!("{:<24}{:>14}{:>14}{:>14}", "", "median", "p90", "max");
    for (name, q) in [
        ("rotation error (deg)", r.rotation_err_deg),
        ("size ratio rel. error", r.size_ratio_err),
        ("reprojection (px)", r.reprojection_px),
    ] {
        println!("{name:<24}{:>14.3e}{:>14.3e}{:>14.3e}", q.median, q.p90, q.max);
    }
    println!(
        "solve time: mean {:.1} us, max {:.1} us",
        r.mean_solve_us, r.max_solve_us
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Eval(a) => eval(a),
        Command::Iou(a) => iou(a),
        Command::Synth(a) => synth(a),
        Command::EpnpBench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
