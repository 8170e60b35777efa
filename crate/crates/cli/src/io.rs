//! File formats: the DASW v1 binary waterfall container, CSV waterfalls
//! with a JSON metadata sidecar, and the CSV/JSON artifact formats used by
//! the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use das_core::forward::{GroundTruth, VehicleTruth};
use das_core::peaks::{EntryEvent, Peak};
use das_core::track::{Trajectory, VehicleClass};
use das_core::WaterfallMatrix;
use serde::{Deserialize, Serialize};

pub const DASW_MAGIC: [u8; 4] = *b"DASW";
pub const DASW_VERSION: u16 = 1;
const DASW_HEADER_LEN: usize = 4 + 2 + 4 + 4 + 8 * 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Format {
    Binary,
    Csv,
}

/// Picks the format from the file extension: `.csv` is CSV, everything
/// else the binary container.
pub fn format_of(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Binary,
    }
}

pub fn save_waterfall(m: &WaterfallMatrix, path: &Path) -> Result<()> {
    match format_of(path) {
        Format::Binary => save_dasw(m, path),
        Format::Csv => save_csv_matrix(m, path),
    }
}

pub fn load_waterfall(path: &Path) -> Result<WaterfallMatrix> {
    match format_of(path) {
        Format::Binary => load_dasw(path),
        Format::Csv => load_csv_matrix(path),
    }
}

pub fn save_dasw(m: &WaterfallMatrix, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(DASW_HEADER_LEN + 4 * m.values().len());
    buf.extend_from_slice(&DASW_MAGIC);
    buf.extend_from_slice(&DASW_VERSION.to_le_bytes());
    buf.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for meta in [m.dt, m.dx, m.t0, m.x0] {
        buf.extend_from_slice(&meta.to_le_bytes());
    }
    for &v in m.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

pub fn load_dasw(path: &Path) -> Result<WaterfallMatrix> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if data.len() < DASW_HEADER_LEN {
        bail!("truncated payload: {} bytes is smaller than the header", data.len());
    }
    if data[0..4] != DASW_MAGIC {
        bail!("bad magic: expected DASW");
    }
    let version = u16::from_le_bytes([data[4], data[5]]);
    if version != DASW_VERSION {
        bail!("bad version: {version}");
    }
    let rows = u32::from_le_bytes(data[6..10].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(data[10..14].try_into().unwrap()) as usize;
    let mut meta = [0.0f64; 4];
    for (i, m) in meta.iter_mut().enumerate() {
        let at = 14 + 8 * i;
        *m = f64::from_le_bytes(data[at..at + 8].try_into().unwrap());
    }
    let [dt, dx, t0, x0] = meta;
    let expected = DASW_HEADER_LEN + 4usize * rows.saturating_mul(cols);
    if data.len() != expected {
        bail!(
            "truncated payload: {} bytes, expected {} for {}x{}",
            data.len(),
            expected,
            rows,
            cols
        );
    }
    let mut values = Vec::with_capacity(rows * cols);
    for chunk in data[DASW_HEADER_LEN..].chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            bail!("non-finite value at index {}", values.len());
        }
        values.push(v as f64);
    }
    WaterfallMatrix::new(values, rows, cols, dt, dx, t0, x0)
        .context("invalid matrix dimensions or metadata")
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvMeta {
    dt: f64,
    dx: f64,
    t0: f64,
    x0: f64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn save_csv_matrix(m: &WaterfallMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in 0..m.rows() {
        let cells: Vec<String> = m.row(row).iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    let meta = CsvMeta {
        dt: m.dt,
        dx: m.dx,
        t0: m.t0,
        x0: m.x0,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("writing {}", sidecar_path(path).display()))
}

pub fn load_csv_matrix(path: &Path) -> Result<WaterfallMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let meta: CsvMeta = serde_json::from_str(
        &fs::read_to_string(sidecar_path(path))
            .with_context(|| format!("reading sidecar {}", sidecar_path(path).display()))?,
    )
    .context("parsing metadata sidecar")?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut n = 0usize;
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .with_context(|| format!("line {}: bad number {cell:?}", ln + 1))?;
            if !v.is_finite() {
                bail!("non-finite value at line {}", ln + 1);
            }
            values.push(v);
            n += 1;
        }
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                bail!("inconsistent CSV row lengths: line {} has {n} cells, expected {c}", ln + 1)
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.context("empty CSV")?;
    WaterfallMatrix::new(values, rows, cols, meta.dt, meta.dx, meta.t0, meta.x0)
        .context("invalid matrix dimensions or metadata")
}

// ---------------------------------------------------------------------------
// entry events

pub fn save_events(events: &[EntryEvent], m: &WaterfallMatrix, path: &Path) -> Result<()> {
    let mut out = String::from("vehicle_id,entry_row,entry_time_s,peak_height,peak_width\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.vehicle_id,
            e.entry_row,
            m.row_time(e.entry_row),
            e.peak.height,
            e.peak.width
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn load_events(path: &Path) -> Result<Vec<EntryEvent>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut events = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            bail!("events line {}: expected 5 fields", ln + 1);
        }
        let entry_row: usize = f[1].parse().context("entry_row")?;
        events.push(EntryEvent {
            vehicle_id: f[0].parse().context("vehicle_id")?,
            entry_row,
            entry_col: 0,
            peak: Peak {
                index: entry_row,
                height: f[3].parse().context("peak_height")?,
                width: f[4].parse().context("peak_width")?,
            },
        });
    }
    Ok(events)
}

// ---------------------------------------------------------------------------
// trajectories

pub fn class_name(c: VehicleClass) -> &'static str {
    match c {
        VehicleClass::Car => "car",
        VehicleClass::Truck => "truck",
    }
}

pub fn save_trajectories(trajs: &[Trajectory], m: &WaterfallMatrix, path: &Path) -> Result<()> {
    let mut out =
        String::from("vehicle_id,row,time_s,col,position_m,class,fitted_velocity_kmh,residual_rms\n");
    for t in trajs {
        for &(row, col) in &t.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                t.vehicle_id,
                row,
                m.row_time(row),
                col,
                m.col_position(col),
                class_name(t.class),
                t.fitted_velocity_kmh,
                t.residual_rms
            ));
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct TrajectorySummaryEntry<'a> {
    vehicle_id: usize,
    class: &'a str,
    fitted_velocity_kmh: f64,
    residual_rms: f64,
    entry_row: usize,
    exit_row: usize,
    point_count: usize,
    single_point: bool,
    /// Column as a polynomial in row index, lowest order first.
    coefficients: &'a [f64],
}

pub fn save_trajectory_summary(
    trajs: &[Trajectory],
    path: &Path,
) -> Result<()> {
    let entries: Vec<TrajectorySummaryEntry> = trajs
        .iter()
        .map(|t| TrajectorySummaryEntry {
            vehicle_id: t.vehicle_id,
            class: class_name(t.class),
            fitted_velocity_kmh: t.fitted_velocity_kmh,
            residual_rms: t.residual_rms,
            entry_row: t.points.first().map(|&(r, _)| r).unwrap_or(0),
            exit_row: t.points.last().map(|&(r, _)| r).unwrap_or(0),
            point_count: t.points.len(),
            single_point: t.single_point,
            coefficients: &t.coefficients,
        })
        .collect();
    let doc = serde_json::json!({
        "schema_version": 1,
        "trajectories": entries,
    });
    fs::write(path, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// One vehicle's rows from a trajectory CSV.
#[derive(Debug, Clone)]
pub struct TrajectorySeries {
    pub vehicle_id: usize,
    pub class: String,
    pub fitted_velocity_kmh: f64,
    pub residual_rms: f64,
    /// (row, col) key points.
    pub points_rc: Vec<(usize, usize)>,
    /// (time s, position m) key points.
    pub points_tx: Vec<(f64, f64)>,
}

pub fn load_trajectory_series(path: &Path) -> Result<Vec<TrajectorySeries>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut series: Vec<TrajectorySeries> = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            bail!("trajectory line {}: expected 8 fields", ln + 1);
        }
        let id: usize = f[0].parse().context("vehicle_id")?;
        let row: usize = f[1].parse().context("row")?;
        let time: f64 = f[2].parse().context("time_s")?;
        let col: usize = f[3].parse().context("col")?;
        let pos: f64 = f[4].parse().context("position_m")?;
        if series.last().map(|s| s.vehicle_id) != Some(id) {
            series.push(TrajectorySeries {
                vehicle_id: id,
                class: f[5].to_string(),
                fitted_velocity_kmh: f[6].parse().context("fitted_velocity_kmh")?,
                residual_rms: f[7].parse().context("residual_rms")?,
                points_rc: Vec::new(),
                points_tx: Vec::new(),
            });
        }
        let s = series.last_mut().unwrap();
        s.points_rc.push((row, col));
        s.points_tx.push((time, pos));
    }
    Ok(series)
}

// ---------------------------------------------------------------------------
// ground truth

pub fn save_truth(truth: &GroundTruth, m: &WaterfallMatrix, path: &Path) -> Result<()> {
    let mut out = String::from("vehicle_id,row,true_col,true_velocity_mps\n");
    for v in &truth.vehicles {
        for &(row, pos) in &v.positions {
            out.push_str(&format!(
                "{},{},{},{}\n",
                v.vehicle_id,
                row,
                (pos - m.x0) / m.dx,
                v.velocity
            ));
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn load_truth(path: &Path, m: &WaterfallMatrix) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut vehicles: Vec<VehicleTruth> = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            bail!("truth line {}: expected 4 fields", ln + 1);
        }
        let id: usize = f[0].parse().context("vehicle_id")?;
        let row: usize = f[1].parse().context("row")?;
        let col: f64 = f[2].parse().context("true_col")?;
        let vel: f64 = f[3].parse().context("true_velocity_mps")?;
        if vehicles.last().map(|v| v.vehicle_id) != Some(id) {
            vehicles.push(VehicleTruth {
                vehicle_id: id,
                entry_row: row,
                exit_row: row,
                velocity: vel,
                positions: Vec::new(),
            });
        }
        let v = vehicles.last_mut().unwrap();
        v.entry_row = v.entry_row.min(row);
        v.exit_row = v.exit_row.max(row);
        v.positions.push((row, m.x0 + col * m.dx));
    }
    Ok(GroundTruth { vehicles })
}

// ---------------------------------------------------------------------------
// line candidates

pub fn save_candidates(candidates: &[das_core::baseline::LineCandidate], path: &Path) -> Result<()> {
    let mut out = String::from("rho,theta,score,entry_row,velocity_kmh\n");
    for c in candidates {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.rho, c.theta, c.score, c.entry_row, c.velocity_kmh
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
