//! Subcommand implementations. Every step is tagged with the pipeline
//! stage it belongs to so failures exit with a stage-specific code.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use das_core::baseline::{hough_lines, radon_lines, score_method, LineCandidate};
use das_core::butterworth::ButterworthConfig;
use das_core::denoise::{minmax_normalize, wavelet_denoise, DenoiseConfig, Wavelet};
use das_core::forward::{synthesize_waterfall, Scene};
use das_core::metrics::quality_metrics;
use das_core::peaks::detect_entries;
use das_core::track::{extract_trajectories, polyfit, TrackConfig, Trajectory};
use das_core::traffic::{
    profile_stats, segment_stats, truncate_decimals, FittedPath, ProfileQuery, SegmentQuery,
    TrafficRecord,
};
use das_core::WaterfallMatrix;

use crate::config::PipelineConfig;
use crate::io;
use crate::render::{render_ppm, Colormap, RenderSpec};
use crate::stage::{Stage, StageContext, StageError};

/// Resolves an artifact path inside the output directory, creating the
/// directory on demand. Absolute paths pass through untouched.
pub fn resolve(out_dir: &Path, path: &Path) -> Result<PathBuf> {
    if path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    Ok(out_dir.join(path))
}

pub fn cmd_sim(
    scene_path: &Path,
    out: &Path,
    truth_out: &Path,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<(), StageError> {
    let text = std::fs::read_to_string(scene_path)
        .with_context(|| format!("reading {}", scene_path.display()))
        .stage(Stage::Load)?;
    let mut scene: Scene = serde_json::from_str(&text)
        .with_context(|| format!("parsing scene {}", scene_path.display()))
        .stage(Stage::Load)?;
    if let Some(seed) = seed {
        scene.rng_seed = seed;
    }
    scene.validate().stage(Stage::Load)?;
    let (m, truth) = synthesize_waterfall(&scene).stage(Stage::Sim)?;
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    let truth_out = resolve(out_dir, truth_out).stage(Stage::Save)?;
    io::save_waterfall(&m, &out).stage(Stage::Save)?;
    io::save_truth(&truth, &m, &truth_out).stage(Stage::Save)?;
    println!(
        "simulated {} rows x {} cols, {} vehicles -> {}",
        m.rows(),
        m.cols(),
        truth.vehicles.len(),
        out.display()
    );
    Ok(())
}

/// Min-max normalization followed by the wavelet denoiser.
pub fn preprocess_matrix(m: &WaterfallMatrix, cfg: &DenoiseConfig) -> Result<WaterfallMatrix> {
    let n = minmax_normalize(m).context("normalizing")?;
    wavelet_denoise(&n, cfg).context("denoising")
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_preprocess(
    input: &Path,
    out: &Path,
    lambda: Option<f64>,
    mix: Option<f64>,
    wavelet: Option<&str>,
    levels: Option<usize>,
    base: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    let m = io::load_waterfall(input).stage(Stage::Load)?;
    let cfg = DenoiseConfig {
        wavelet: match wavelet {
            Some(name) => Wavelet::parse(name).stage(Stage::Config)?,
            None => base.denoise.wavelet,
        },
        levels: levels.unwrap_or(base.denoise.levels),
        threshold_lambda: lambda.unwrap_or(base.denoise.threshold_lambda),
        mix_a: mix.unwrap_or(base.denoise.mix_a),
    };
    cfg.validate().stage(Stage::Config)?;
    let d = preprocess_matrix(&m, &cfg).stage(Stage::Preprocess)?;
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    io::save_waterfall(&d, &out).stage(Stage::Save)?;
    println!("preprocessed -> {}", out.display());
    Ok(())
}

pub fn cmd_metrics(
    reference: &Path,
    test: &Path,
    out: Option<&Path>,
    out_dir: &Path,
) -> Result<(), StageError> {
    let r = io::load_waterfall(reference).stage(Stage::Load)?;
    let t = io::load_waterfall(test).stage(Stage::Load)?;
    let q = quality_metrics(&r, &t, 1.0).stage(Stage::Metrics)?;
    let doc = serde_json::json!({
        "schema_version": 1,
        "mse": q.mse,
        "psnr_db": if q.psnr_db.is_finite() { serde_json::json!(q.psnr_db) } else { serde_json::json!("inf") },
        "ssim": q.ssim,
    });
    let text = serde_json::to_string_pretty(&doc).stage(Stage::Metrics)?;
    println!("{text}");
    if let Some(out) = out {
        let out = resolve(out_dir, out).stage(Stage::Save)?;
        std::fs::write(&out, text).stage(Stage::Save)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_detect(
    input: &Path,
    order: Option<usize>,
    cutoff: Option<f64>,
    min_height: Option<f64>,
    entry_col: Option<usize>,
    out: &Path,
    base: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    let m = io::load_waterfall(input).stage(Stage::Load)?;
    let bw = ButterworthConfig {
        order: order.unwrap_or(base.butterworth.order),
        cutoff: cutoff.unwrap_or(base.butterworth.cutoff),
        zero_phase: base.butterworth.zero_phase,
    };
    bw.validate().stage(Stage::Config)?;
    let events = detect_entries(
        &m,
        &bw,
        min_height.unwrap_or(base.detect.min_height),
        entry_col.unwrap_or(base.detect.entry_col),
    )
    .stage(Stage::Detect)?;
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    io::save_events(&events, &m, &out).stage(Stage::Save)?;
    println!("{} entry events -> {}", events.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_track(
    input: &Path,
    events_path: &Path,
    vmin: Option<f64>,
    vmax: Option<f64>,
    cof: Option<f64>,
    order: Option<usize>,
    out: &Path,
    summary: &Path,
    base: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    let m = io::load_waterfall(input).stage(Stage::Load)?;
    let events = io::load_events(events_path).stage(Stage::Load)?;
    let cfg = TrackConfig {
        v_min_init: vmin.unwrap_or(base.track.v_min_init),
        v_max_init: vmax.unwrap_or(base.track.v_max_init),
        cof: cof.unwrap_or(base.track.cof),
        fit_order: order.unwrap_or(base.track.fit_order),
        ..base.track
    };
    cfg.validate().stage(Stage::Config)?;
    let trajs = extract_trajectories(&m, &events, &cfg).stage(Stage::Track)?;
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    let summary = resolve(out_dir, summary).stage(Stage::Save)?;
    io::save_trajectories(&trajs, &m, &out).stage(Stage::Save)?;
    io::save_trajectory_summary(&trajs, &summary).stage(Stage::Save)?;
    println!("{} trajectories -> {}", trajs.len(), out.display());
    Ok(())
}

/// Rebuilds physical fitted paths from a trajectory CSV by refitting the
/// (time, position) key points.
pub fn fitted_paths_from_csv(path: &Path, order: usize) -> Result<Vec<FittedPath>> {
    let series = io::load_trajectory_series(path)?;
    let mut paths = Vec::new();
    for s in series {
        let order = order.min(s.points_tx.len().saturating_sub(1));
        let coefficients = polyfit(&s.points_tx, order)
            .with_context(|| format!("fitting vehicle {}", s.vehicle_id))?;
        paths.push(FittedPath {
            vehicle_id: s.vehicle_id,
            t_start: s.points_tx.first().map(|&(t, _)| t).unwrap_or(0.0),
            t_end: s.points_tx.last().map(|&(t, _)| t).unwrap_or(0.0),
            coefficients,
        });
    }
    Ok(paths)
}

fn record_json(r: &TrafficRecord, speed_label: &str) -> serde_json::Value {
    serde_json::json!({
        "vehicle_count": r.vehicle_count,
        speed_label: r.mean_speed_kmh,
        "flow_q": r.flow_q,
        "density_k": r.density_k,
        // Display block mirrors the report table: speeds and flow to two
        // decimals, density to four, all truncated rather than rounded.
        "display": {
            "vehicle_count": r.vehicle_count,
            "average_velocity_kmh": r.mean_speed_kmh.map(|v| truncate_decimals(v, 2)),
            "flow": truncate_decimals(r.flow_q, 2),
            "density": truncate_decimals(r.density_k, 4),
        },
    })
}

pub struct StatsRequest {
    pub profile: Option<(f64, (f64, f64))>,
    pub segment: Option<((f64, f64), f64)>,
}

pub fn run_stats(paths: &[FittedPath], req: &StatsRequest) -> Result<serde_json::Value> {
    let mut doc = serde_json::json!({ "schema_version": 1 });
    if let Some((position, (ws, we))) = req.profile {
        let record = profile_stats(
            paths,
            &ProfileQuery {
                position,
                window_start: ws,
                window_end: we,
            },
        )?;
        doc["profile"] = serde_json::json!({
            "query": {"position_m": position, "window_s": [ws, we]},
            "units": {"flow_q": "vehicles per second", "density_k": "flow over time-mean speed"},
            "record": record_json(&record, "time_mean_speed_kmh"),
        });
    }
    if let Some(((a, b), at)) = req.segment {
        let record = segment_stats(
            paths,
            &SegmentQuery {
                seg_start: a,
                seg_end: b,
                at_time: at,
            },
        )?;
        doc["segment"] = serde_json::json!({
            "query": {"segment_m": [a, b], "at_s": at},
            "units": {"flow_q": "vehicles per second", "density_k": "vehicles per meter"},
            "record": record_json(&record, "space_mean_speed_kmh"),
        });
    }
    Ok(doc)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_stats(
    trajectories: &Path,
    profile: Option<f64>,
    window: Option<(f64, f64)>,
    segment: Option<(f64, f64)>,
    at: Option<f64>,
    order: usize,
    out: Option<&Path>,
    out_dir: &Path,
) -> Result<(), StageError> {
    let paths = fitted_paths_from_csv(trajectories, order).stage(Stage::Load)?;
    let profile = match (profile, window) {
        (Some(p), Some(w)) => Some((p, w)),
        (Some(_), None) | (None, Some(_)) => {
            return Err(anyhow!("--profile requires --window and vice versa")).stage(Stage::Stats)
        }
        (None, None) => None,
    };
    let segment = match (segment, at) {
        (Some(s), Some(t)) => Some((s, t)),
        (Some(_), None) | (None, Some(_)) => {
            return Err(anyhow!("--segment requires --at and vice versa")).stage(Stage::Stats)
        }
        (None, None) => None,
    };
    if profile.is_none() && segment.is_none() {
        return Err(anyhow!("nothing to compute: pass --profile/--window or --segment/--at"))
            .stage(Stage::Stats);
    }
    let doc = run_stats(&paths, &StatsRequest { profile, segment }).stage(Stage::Stats)?;
    let text = serde_json::to_string_pretty(&doc).stage(Stage::Stats)?;
    println!("{text}");
    if let Some(out) = out {
        let out = resolve(out_dir, out).stage(Stage::Save)?;
        std::fs::write(&out, text).stage(Stage::Save)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_render(
    input: &Path,
    trajectories: Option<&Path>,
    colormap: Option<Colormap>,
    no_overlay: bool,
    scale: Option<usize>,
    out: &Path,
    base: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    let m = io::load_waterfall(input).stage(Stage::Load)?;
    let spec = RenderSpec {
        colormap: colormap.unwrap_or(base.render.colormap),
        overlay: !no_overlay && base.render.overlay,
        scale: scale.unwrap_or(base.render.scale),
    };
    let overlays: Option<Vec<(usize, Vec<(usize, usize)>)>> = match trajectories {
        Some(path) => Some(
            io::load_trajectory_series(path)
                .stage(Stage::Load)?
                .into_iter()
                .map(|s| (s.vehicle_id, s.points_rc))
                .collect(),
        ),
        None => None,
    };
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    render_ppm(&m, overlays.as_deref(), &spec, &out).stage(Stage::Render)?;
    println!("rendered -> {}", out.display());
    Ok(())
}

/// Radon probe angles covering stripe slopes for the given velocity range.
pub fn radon_angle_range(
    dt: f64,
    dx: f64,
    vmin_kmh: f64,
    vmax_kmh: f64,
    samples: usize,
) -> Vec<f64> {
    let theta_of = |v_kmh: f64| core::f64::consts::PI - (v_kmh / 3.6 * dt / dx).atan();
    let (hi, lo) = (theta_of(vmin_kmh), theta_of(vmax_kmh));
    (0..samples)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / samples as f64)
        .collect()
}

pub fn full_angle_range(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| (i as f64 + 0.5) * core::f64::consts::PI / samples as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Hough,
    Radon,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_baseline(
    input: &Path,
    method: BaselineMethod,
    truth: Option<&Path>,
    full_range: bool,
    out: &Path,
    score_out: &Path,
    base: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    let m = io::load_waterfall(input).stage(Stage::Load)?;
    let candidates = baseline_candidates(&m, method, full_range, base).stage(Stage::Baseline)?;
    let out = resolve(out_dir, out).stage(Stage::Save)?;
    io::save_candidates(&candidates, &out).stage(Stage::Save)?;
    println!("{} candidates -> {}", candidates.len(), out.display());
    if let Some(truth_path) = truth {
        let truth = io::load_truth(truth_path, &m).stage(Stage::Load)?;
        let score = score_method(
            &candidates,
            &truth,
            base.baseline.tol_rows,
            base.baseline.tol_kmh,
        );
        let doc = serde_json::json!({
            "schema_version": 1,
            "method": match method { BaselineMethod::Hough => "hough", BaselineMethod::Radon => "radon" },
            "true_positives": score.true_positives,
            "false_positives": score.false_positives,
            "false_negatives": score.false_negatives,
            "velocity_rmse_kmh": score.velocity_rmse_kmh,
        });
        let text = serde_json::to_string_pretty(&doc).stage(Stage::Baseline)?;
        println!("{text}");
        let score_out = resolve(out_dir, score_out).stage(Stage::Save)?;
        std::fs::write(&score_out, text).stage(Stage::Save)?;
    }
    Ok(())
}

pub fn baseline_candidates(
    m: &WaterfallMatrix,
    method: BaselineMethod,
    full_range: bool,
    base: &PipelineConfig,
) -> Result<Vec<LineCandidate>> {
    match method {
        BaselineMethod::Hough => Ok(hough_lines(m, &base.baseline.hough)?),
        BaselineMethod::Radon => {
            let angles = if full_range {
                full_angle_range(base.baseline.radon_angles)
            } else {
                radon_angle_range(
                    m.dt,
                    m.dx,
                    base.baseline.radon_vmin_kmh,
                    base.baseline.radon_vmax_kmh,
                    base.baseline.radon_angles,
                )
            };
            Ok(radon_lines(m, &angles, base.baseline.radon_count))
        }
    }
}

/// preprocess -> detect -> track -> stats (+ render); deterministic
/// artifact names inside the output directory.
pub fn cmd_pipeline(
    input: &Path,
    seed: Option<u64>,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<(), StageError> {
    // load everything before writing anything so corrupt input leaves no
    // partial bundle behind
    let is_scene = input.extension().and_then(|e| e.to_str()) == Some("json");
    let (m, truth) = if is_scene {
        let text = std::fs::read_to_string(input)
            .with_context(|| format!("reading {}", input.display()))
            .stage(Stage::Load)?;
        let mut scene: Scene = serde_json::from_str(&text)
            .with_context(|| format!("parsing scene {}", input.display()))
            .stage(Stage::Load)?;
        if let Some(s) = seed {
            scene.rng_seed = s;
        }
        scene.validate().stage(Stage::Load)?;
        let (m, truth) = synthesize_waterfall(&scene).stage(Stage::Sim)?;
        (m, Some(truth))
    } else {
        (io::load_waterfall(input).stage(Stage::Load)?, None)
    };

    let denoised = preprocess_matrix(&m, &cfg.denoise).stage(Stage::Preprocess)?;
    let events = detect_entries(
        &denoised,
        &cfg.butterworth,
        cfg.detect.min_height,
        cfg.detect.entry_col,
    )
    .stage(Stage::Detect)?;
    let trajs: Vec<Trajectory> =
        extract_trajectories(&denoised, &events, &cfg.track).stage(Stage::Track)?;

    let paths: Vec<FittedPath> = trajs
        .iter()
        .map(|t| FittedPath::from_trajectory(t, &denoised))
        .collect();
    let span = denoised.cols() as f64 * denoised.dx;
    let t_end = denoised.t0 + denoised.rows() as f64 * denoised.dt;
    let profile = cfg
        .stats
        .profile_position_m
        .unwrap_or(denoised.x0 + span / 2.0);
    let window = cfg.stats.window_s.unwrap_or((denoised.t0, t_end));
    let segment = cfg
        .stats
        .segment_m
        .unwrap_or((denoised.x0, denoised.x0 + span));
    let at = cfg.stats.at_s.unwrap_or(denoised.t0 + (t_end - denoised.t0) / 2.0);
    let stats_doc = run_stats(
        &paths,
        &StatsRequest {
            profile: Some((profile, window)),
            segment: Some((segment, at)),
        },
    )
    .stage(Stage::Stats)?;

    // all computation done; write the bundle
    if is_scene {
        let p = resolve(out_dir, Path::new("waterfall.dasw")).stage(Stage::Save)?;
        io::save_waterfall(&m, &p).stage(Stage::Save)?;
        let p = resolve(out_dir, Path::new("truth.csv")).stage(Stage::Save)?;
        io::save_truth(truth.as_ref().unwrap(), &m, &p).stage(Stage::Save)?;
    }
    let p = resolve(out_dir, Path::new("denoised.dasw")).stage(Stage::Save)?;
    io::save_waterfall(&denoised, &p).stage(Stage::Save)?;
    let p = resolve(out_dir, Path::new("events.csv")).stage(Stage::Save)?;
    io::save_events(&events, &denoised, &p).stage(Stage::Save)?;
    let p = resolve(out_dir, Path::new("trajectories.csv")).stage(Stage::Save)?;
    io::save_trajectories(&trajs, &denoised, &p).stage(Stage::Save)?;
    let p = resolve(out_dir, Path::new("trajectories.json")).stage(Stage::Save)?;
    io::save_trajectory_summary(&trajs, &p).stage(Stage::Save)?;
    let p = resolve(out_dir, Path::new("stats.json")).stage(Stage::Save)?;
    std::fs::write(&p, serde_json::to_string_pretty(&stats_doc).stage(Stage::Stats)?)
        .stage(Stage::Save)?;
    let overlays: Vec<(usize, Vec<(usize, usize)>)> = trajs
        .iter()
        .map(|t| (t.vehicle_id, t.points.clone()))
        .collect();
    let p = resolve(out_dir, Path::new("render.ppm")).stage(Stage::Save)?;
    render_ppm(&denoised, Some(&overlays), &cfg.render, &p).stage(Stage::Render)?;
    println!(
        "pipeline complete: {} events, {} trajectories -> {}",
        events.len(),
        trajs.len(),
        out_dir.display()
    );
    Ok(())
}
