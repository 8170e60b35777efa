//! Integration tests for the file formats, rendering, configuration and
//! the binary's pipeline behavior.

use std::fs;
use std::path::Path;
use std::process::Command;

use das_cli::commands::{full_angle_range, radon_angle_range};
use das_cli::config::PipelineConfig;
use das_cli::io;
use das_cli::render::{legend_path, render_ppm, Colormap, RenderSpec};
use das_core::forward::{FiberLayout, Medium, Scene, VehicleSpec};
use das_core::peaks::{EntryEvent, Peak};
use das_core::track::{Trajectory, VehicleClass};
use das_core::WaterfallMatrix;
use tempfile::tempdir;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random matrix whose values are exactly representable as f32.
fn random_matrix(seed: u64) -> WaterfallMatrix {
    let mut s = seed;
    let rows = 1 + (splitmix(&mut s) % 12) as usize;
    let cols = 1 + (splitmix(&mut s) % 15) as usize;
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| ((splitmix(&mut s) % 10_000) as f32 / 9_999.0) as f64)
        .collect();
    WaterfallMatrix::new(values, rows, cols, 0.25, 0.8, 1.5, -3.0).unwrap()
}

#[test]
fn dasw_round_trip_is_bitwise() {
    let dir = tempdir().unwrap();
    for seed in 0..20u64 {
        let m = random_matrix(seed);
        let path = dir.path().join(format!("m{seed}.dasw"));
        io::save_dasw(&m, &path).unwrap();
        let back = io::load_dasw(&path).unwrap();
        assert_eq!(m.values(), back.values());
        assert_eq!((m.rows(), m.cols()), (back.rows(), back.cols()));
        assert_eq!((m.dt, m.dx, m.t0, m.x0), (back.dt, back.dx, back.t0, back.x0));
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempdir().unwrap();
    for seed in 0..10u64 {
        let m = random_matrix(100 + seed);
        let path = dir.path().join(format!("m{seed}.csv"));
        io::save_csv_matrix(&m, &path).unwrap();
        let back = io::load_csv_matrix(&path).unwrap();
        // shortest-round-trip decimal serialization is lossless for f64
        assert_eq!(m.values(), back.values());
        assert_eq!((m.dt, m.dx, m.t0, m.x0), (back.dt, back.dx, back.t0, back.x0));
    }
}

#[test]
fn dasw_rejects_bad_magic_version_truncation_and_nan() {
    let dir = tempdir().unwrap();
    let m = random_matrix(7);
    let path = dir.path().join("m.dasw");
    io::save_dasw(&m, &path).unwrap();
    let good = fs::read(&path).unwrap();

    let bad = dir.path().join("bad.dasw");

    let mut b = good.clone();
    b[0] = b'X';
    fs::write(&bad, &b).unwrap();
    let err = io::load_dasw(&bad).unwrap_err().to_string();
    assert!(err.contains("bad magic"), "{err}");

    let mut b = good.clone();
    b[4] = 9;
    fs::write(&bad, &b).unwrap();
    let err = io::load_dasw(&bad).unwrap_err().to_string();
    assert!(err.contains("bad version"), "{err}");

    let mut b = good.clone();
    b.truncate(b.len() - 3);
    fs::write(&bad, &b).unwrap();
    let err = io::load_dasw(&bad).unwrap_err().to_string();
    assert!(err.contains("truncated"), "{err}");

    let mut b = good.clone();
    let at = b.len() - 4;
    b[at..].copy_from_slice(&f32::NAN.to_le_bytes());
    fs::write(&bad, &b).unwrap();
    let err = io::load_dasw(&bad).unwrap_err().to_string();
    assert!(err.contains("non-finite"), "{err}");
}

#[test]
fn csv_rejects_inconsistent_row_lengths() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2,3\n4,5\n").unwrap();
    fs::write(
        dir.path().join("m.csv.meta.json"),
        r#"{"dt":1.0,"dx":1.0,"t0":0.0,"x0":0.0}"#,
    )
    .unwrap();
    let err = io::load_csv_matrix(&path).unwrap_err().to_string();
    assert!(err.contains("inconsistent CSV row lengths"), "{err}");
}

#[test]
fn events_round_trip_and_have_header() {
    let dir = tempdir().unwrap();
    let m = random_matrix(1);
    let events = vec![
        EntryEvent {
            vehicle_id: 0,
            entry_row: 3,
            entry_col: 0,
            peak: Peak {
                index: 3,
                height: 0.4,
                width: 2,
            },
        },
        EntryEvent {
            vehicle_id: 1,
            entry_row: 9,
            entry_col: 0,
            peak: Peak {
                index: 9,
                height: 0.7,
                width: 5,
            },
        },
    ];
    let path = dir.path().join("events.csv");
    io::save_events(&events, &m, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("vehicle_id,entry_row,entry_time_s,peak_height,peak_width\n"));
    let back = io::load_events(&path).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[0].entry_row, 3);
    assert_eq!(back[1].peak.height, 0.7);
    assert_eq!(back[1].peak.width, 5);
}

fn sample_trajectories() -> Vec<Trajectory> {
    vec![Trajectory {
        vehicle_id: 0,
        points: vec![(0, 0), (1, 2), (2, 4), (3, 6)],
        coefficients: vec![0.0, 2.0],
        fitted_velocity_kmh: 23.04,
        class: VehicleClass::Car,
        residual_rms: 0.0,
        entry_peak: Peak {
            index: 0,
            height: 0.5,
            width: 2,
        },
        single_point: false,
    }]
}

#[test]
fn trajectory_csv_round_trips() {
    let dir = tempdir().unwrap();
    let m = WaterfallMatrix::new(vec![0.0; 4 * 8], 4, 8, 0.25, 0.8, 0.0, 0.0).unwrap();
    let trajs = sample_trajectories();
    let path = dir.path().join("t.csv");
    io::save_trajectories(&trajs, &m, &path).unwrap();
    let series = io::load_trajectory_series(&path).unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(series[0].points_rc, trajs[0].points);
    assert_eq!(series[0].class, "car");
    assert_eq!(series[0].fitted_velocity_kmh, 23.04);
    // physical points follow the matrix metadata
    assert_eq!(series[0].points_tx[1], (0.25, 1.6));
}

#[test]
fn trajectory_summary_is_versioned_json() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("t.json");
    io::save_trajectory_summary(&sample_trajectories(), &path).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["trajectories"][0]["vehicle_id"], 0);
    assert_eq!(doc["trajectories"][0]["point_count"], 4);
}

#[test]
fn render_grayscale_maps_amplitude_to_pixel() {
    let dir = tempdir().unwrap();
    let m = WaterfallMatrix::new(vec![0.0, 0.25, 0.5, 1.0], 2, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
    let out = dir.path().join("r.ppm");
    render_ppm(&m, None, &RenderSpec::default(), &out).unwrap();
    let bytes = fs::read(&out).unwrap();
    let header = b"P6\n2 2\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    let px = &bytes[header.len()..];
    // round(255 * amplitude) per channel
    let want = [0u8, 64, 128, 255];
    for (i, &w) in want.iter().enumerate() {
        assert_eq!(&px[3 * i..3 * i + 3], &[w, w, w]);
    }
    let legend: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(legend_path(&out)).unwrap()).unwrap();
    assert_eq!(legend["schema_version"], 1);
}

#[test]
fn render_zero_scale_is_an_error() {
    let dir = tempdir().unwrap();
    let m = random_matrix(2);
    let spec = RenderSpec {
        scale: 0,
        ..RenderSpec::default()
    };
    let err = render_ppm(&m, None, &spec, &dir.path().join("r.ppm")).unwrap_err();
    assert!(err.to_string().contains("zero-size"), "{err}");
}

#[test]
fn render_overlay_recolors_exactly_the_line_pixels() {
    let dir = tempdir().unwrap();
    let n = 6usize;
    let m = WaterfallMatrix::new(vec![0.0; n * n], n, n, 1.0, 1.0, 0.0, 0.0).unwrap();
    let diagonal: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    let out = dir.path().join("r.ppm");
    render_ppm(
        &m,
        Some(&[(0usize, diagonal)]),
        &RenderSpec::default(),
        &out,
    )
    .unwrap();
    let bytes = fs::read(&out).unwrap();
    let px = &bytes[b"P6\n6 6\n255\n".len()..];
    for r in 0..n {
        for c in 0..n {
            let got = &px[3 * (r * n + c)..3 * (r * n + c) + 3];
            if r == c {
                assert_eq!(got, das_cli::render::PALETTE[0], "({r},{c})");
            } else {
                assert_eq!(got, [0, 0, 0], "({r},{c})");
            }
        }
    }
}

#[test]
fn render_without_overlay_ignores_trajectories() {
    let dir = tempdir().unwrap();
    let m = random_matrix(3);
    let spec = RenderSpec {
        overlay: false,
        colormap: Colormap::Heat,
        scale: 2,
    };
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    render_ppm(&m, None, &spec, &a).unwrap();
    let fake = vec![(0usize, vec![(0usize, 0usize), (1, 1)])];
    render_ppm(&m, Some(&fake), &spec, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"frobnicate": 1}"#).unwrap();
    assert!(PipelineConfig::load(&path).is_err());
    // nested unknown keys too
    fs::write(&path, r#"{"track": {"v_min_init": 50.0, "warp": 9}}"#).unwrap();
    assert!(PipelineConfig::load(&path).is_err());
}

#[test]
fn default_config_round_trips_through_json() {
    let cfg = PipelineConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: PipelineConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    assert_eq!(cfg.detect.min_height, 0.06);
    assert_eq!(cfg.track.v_min_init, 60.0);
    assert_eq!(cfg.denoise.threshold_lambda, 0.15);
    assert_eq!(cfg.butterworth.cutoff, 0.5);
}

#[test]
fn radon_angle_range_brackets_the_velocity_band() {
    let angles = radon_angle_range(0.25, 0.8, 30.0, 200.0, 90);
    let slope_of = |theta: f64| -theta.tan(); // cols per row
    let v_of = |theta: f64| slope_of(theta) * 0.8 / 0.25 * 3.6;
    let (lo, hi) = (v_of(*angles.last().unwrap()), v_of(angles[0]));
    assert!(lo > 29.0 && lo < 35.0, "lo {lo}");
    assert!(hi < 201.0 && hi > 190.0, "hi {hi}");
    let full = full_angle_range(45);
    assert!(full.first().unwrap() > &0.0 && full.last().unwrap() < &core::f64::consts::PI);
}

// ---------------------------------------------------------------------------
// binary-level behavior

fn das() -> Command {
    Command::new(env!("CARGO_BIN_EXE_das"))
}

fn small_scene() -> Scene {
    Scene {
        medium: Medium::default(),
        fiber: FiberLayout {
            depth: 1.0,
            channel_spacing: 0.8,
            channel_count: 250,
            gauge_length: 1.0,
            row_dt: 0.25,
        },
        vehicles: vec![
            VehicleSpec {
                load: 1e5,
                wheel_weights: [0.25; 4],
                front_track: 1.8,
                length: 4.5,
                lateral_offset: 3.0,
                entry_time: 4.0,
                entry_position: 0.0,
                velocity: 80.0 / 3.6,
            },
            VehicleSpec {
                load: 1e5,
                wheel_weights: [0.25; 4],
                front_track: 1.8,
                length: 4.5,
                lateral_offset: 3.0,
                entry_time: 12.0,
                entry_position: 0.0,
                velocity: 95.0 / 3.6,
            },
        ],
        duration: 26.0,
        noise_sigma: 0.0,
        rng_seed: 5,
    }
}

fn write_scene(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("scene.json");
    fs::write(&path, serde_json::to_string_pretty(&small_scene()).unwrap()).unwrap();
    path
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    // entry humps on synthetic scenes sit well above the denoiser ripple
    let path = dir.join("cfg.json");
    fs::write(&path, r#"{"detect": {"min_height": 0.2, "entry_col": 0}}"#).unwrap();
    path
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let dir = tempdir().unwrap();
    let scene = write_scene(dir.path());
    let cfg = write_config(dir.path());
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = das()
            .args(["pipeline", "--in"])
            .arg(&scene)
            .arg("--config")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut names: Vec<String> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"denoised.dasw".to_string()));
    assert!(names.contains(&"stats.json".to_string()));
    assert!(names.contains(&"render.ppm".to_string()));
    for name in names {
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between runs");
    }
}

#[test]
fn pipeline_corrupt_input_exits_with_load_code_and_no_outputs() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.dasw");
    fs::write(&bad, b"XXXXgarbage").unwrap();
    let out = dir.path().join("out");
    let status = das()
        .args(["pipeline", "--in"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(10), "load stage exit code");
    let produced = fs::read_dir(&out)
        .map(|d| d.count())
        .unwrap_or(0);
    assert_eq!(produced, 0, "no partial outputs");
}

#[test]
fn subcommand_chain_matches_pipeline_artifacts() {
    let dir = tempdir().unwrap();
    let scene = write_scene(dir.path());
    let cfg = write_config(dir.path());
    let out = dir.path().join("chain");
    let run = |args: &[&str]| {
        let status = das()
            .args(args)
            .arg("--config")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .current_dir(&out)
            .status()
            .unwrap();
        assert!(status.success(), "command {args:?} failed");
    };
    fs::create_dir_all(&out).unwrap();
    run(&["sim", "--scene", scene.to_str().unwrap()]);
    run(&["preprocess", "--in", "waterfall.dasw", "--out", "denoised.dasw"]);
    run(&["detect", "--in", "denoised.dasw"]);
    run(&["track", "--in", "denoised.dasw", "--events", "events.csv"]);
    run(&[
        "stats",
        "--trajectories",
        "trajectories.csv",
        "--profile",
        "100.0",
        "--window",
        "0,26",
        "--out",
        "stats.json",
    ]);
    run(&[
        "render",
        "--in",
        "denoised.dasw",
        "--trajectories",
        "trajectories.csv",
    ]);
    run(&[
        "baseline",
        "--in",
        "denoised.dasw",
        "--method",
        "radon",
        "--truth",
        "truth.csv",
    ]);
    // two events, two trajectories on this scene
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert_eq!(events.lines().count(), 3, "{events}");
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["schema_version"], 1);
    assert_eq!(stats["profile"]["record"]["vehicle_count"], 2);
    let score: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("score.json")).unwrap()).unwrap();
    assert_eq!(score["schema_version"], 1);
    assert!(out.join("render.ppm").exists());
    assert!(out.join("render.legend.json").exists());
}

#[test]
fn metrics_reports_infinite_psnr_for_identical_inputs() {
    let dir = tempdir().unwrap();
    let m = random_matrix(11);
    let path = dir.path().join("m.dasw");
    io::save_dasw(&m, &path).unwrap();
    let output = das()
        .args(["metrics", "--ref"])
        .arg(&path)
        .arg("--test")
        .arg(&path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&output.stdout).unwrap()).unwrap();
    assert_eq!(doc["mse"], 0.0);
    assert_eq!(doc["psnr_db"], "inf");
    assert_eq!(doc["ssim"], 1.0);
}
