//! Line-by-line trajectory extraction with a dynamic velocity-bounded
//! search window, polynomial refitting, and car/truck classification.
//!
//! Each entry event seeds one trajectory at the fiber start. The first step
//! searches the column window implied by the initial velocity interval; every
//! later step refits a polynomial to the points collected so far, converts
//! the fitted slope to a velocity, and searches the window spanned by
//! `[(1 - cof) v, (1 + cof) v]` on the next row.

use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};
use crate::peaks::{EntryEvent, Peak};
use crate::waterfall::WaterfallMatrix;

/// Tracker configuration. Velocities are km/h and may be negative for
/// opposite-lane tracking (keep `v_min_init < v_max_init`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TrackConfig {
    pub v_min_init: f64,
    pub v_max_init: f64,
    /// Window half-width as a fraction of the fitted velocity.
    pub cof: f64,
    /// Polynomial order M of the refit.
    pub fit_order: usize,
    /// Number of most recent key points used for the refit; `None` = all.
    pub fit_window: Option<usize>,
    /// Rows tolerated below `amplitude_floor` before termination;
    /// `None` disables coasting termination (matrix-edge exit only).
    pub max_coast: Option<usize>,
    pub amplitude_floor: f64,
    /// Truck classification: mean key-point amplitude strictly above this.
    pub truck_peak_thresh: f64,
    /// Truck classification: entry peak width strictly above this many rows.
    pub truck_width_thresh: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            v_min_init: 60.0,
            v_max_init: 120.0,
            cof: 0.2,
            fit_order: 1,
            fit_window: None,
            max_coast: Some(3),
            amplitude_floor: 0.02,
            truck_peak_thresh: 0.5,
            truck_width_thresh: 3,
        }
    }
}

impl TrackConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.v_min_init < self.v_max_init) {
            return Err(CoreError::BadTrackConfig {
                reason: "initial velocity interval must satisfy v_min < v_max",
            });
        }
        if !(0.0..1.0).contains(&self.cof) {
            return Err(CoreError::BadTrackConfig {
                reason: "confidence cof must be in [0, 1)",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum VehicleClass {
    Car,
    Truck,
}

/// An extracted vehicle trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub vehicle_id: usize,
    /// Key points (row, col), one per consecutive row.
    pub points: Vec<(usize, usize)>,
    /// Fitted polynomial coefficients, column as a function of row,
    /// lowest order first.
    pub coefficients: Vec<f64>,
    /// Fitted slope converted to km/h.
    pub fitted_velocity_kmh: f64,
    pub class: VehicleClass,
    /// RMS of fit residuals, meters.
    pub residual_rms: f64,
    /// Entry peak that seeded this trajectory.
    pub entry_peak: Peak,
    /// True when the trajectory terminated immediately after its seed point.
    pub single_point: bool,
}

/// Least-squares polynomial fit of `x` as a function of `t` via the normal
/// equations. Coefficients are returned lowest order first.
pub fn polyfit(points: &[(f64, f64)], order: usize) -> CoreResult<Vec<f64>> {
    let n = points.len();
    if n < order + 1 {
        return Err(CoreError::TooFewPoints {
            need: order + 1,
            order,
            got: n,
        });
    }
    let dim = order + 1;
    // normal equations: (V^T V) w = V^T x with Vandermonde V
    let mut ata = alloc::vec![0.0f64; dim * dim];
    let mut atb = alloc::vec![0.0f64; dim];
    for &(t, x) in points {
        let mut powers = alloc::vec![1.0f64; dim];
        for j in 1..dim {
            powers[j] = powers[j - 1] * t;
        }
        for i in 0..dim {
            atb[i] += powers[i] * x;
            for j in 0..dim {
                ata[i * dim + j] += powers[i] * powers[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    let mut w = atb;
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&a, &b| ata[a * dim + col].abs().partial_cmp(&ata[b * dim + col].abs()).unwrap())
            .unwrap();
        if ata[pivot * dim + col].abs() < 1e-12 {
            return Err(CoreError::RankDeficientFit);
        }
        if pivot != col {
            for j in 0..dim {
                ata.swap(col * dim + j, pivot * dim + j);
            }
            w.swap(col, pivot);
        }
        let inv = 1.0 / ata[col * dim + col];
        for row in col + 1..dim {
            let factor = ata[row * dim + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for j in col..dim {
                ata[row * dim + j] -= factor * ata[col * dim + j];
            }
            w[row] -= factor * w[col];
        }
    }
    for col in (0..dim).rev() {
        let mut acc = w[col];
        for j in col + 1..dim {
            acc -= ata[col * dim + j] * w[j];
        }
        w[col] = acc / ata[col * dim + col];
    }
    Ok(w)
}

fn poly_eval(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_slope(coefficients: &[f64], t: f64) -> f64 {
    let mut slope = 0.0;
    let mut tp = 1.0;
    for (j, &c) in coefficients.iter().enumerate().skip(1) {
        slope += j as f64 * c * tp;
        tp *= t;
    }
    slope
}

/// Converts a km/h velocity to a per-row column offset.
fn kmh_to_cols(v_kmh: f64, dt: f64, dx: f64) -> f64 {
    v_kmh / 3.6 * dt / dx
}

/// Argmax column within the velocity-bounded window on `row`, relative to
/// `prev_col`. Ties break to the lowest column.
pub fn match_step(
    m: &WaterfallMatrix,
    prev_col: usize,
    v_lo_kmh: f64,
    v_hi_kmh: f64,
    row: usize,
) -> CoreResult<usize> {
    if row >= m.rows() {
        return Err(CoreError::RowOutOfRange {
            row,
            rows: m.rows(),
        });
    }
    let off_lo = libm::floor(kmh_to_cols(v_lo_kmh, m.dt, m.dx)) as isize;
    let off_hi = libm::ceil(kmh_to_cols(v_hi_kmh, m.dt, m.dx)) as isize;
    let lo = prev_col as isize + off_lo.min(off_hi);
    let hi = prev_col as isize + off_lo.max(off_hi);
    let lo = lo.max(0) as usize;
    let hi = (hi.min(m.cols() as isize - 1).max(-1)) as i64;
    if hi < lo as i64 {
        return Err(CoreError::EmptyWindow { row });
    }
    let hi = hi as usize;
    let mut best_col = lo;
    let mut best_val = f64::NEG_INFINITY;
    for col in lo..=hi {
        let v = m.at(row, col);
        if v > best_val {
            best_val = v;
            best_col = col;
        }
    }
    Ok(best_col)
}

/// Classifies a trajectory as truck when both the mean key-point amplitude
/// and the entry peak width strictly exceed their thresholds.
pub fn classify_vehicle(
    points: &[(usize, usize)],
    entry_peak: &Peak,
    m: &WaterfallMatrix,
    peak_thresh: f64,
    width_thresh: usize,
) -> VehicleClass {
    if points.is_empty() {
        return VehicleClass::Car;
    }
    let mean = points
        .iter()
        .map(|&(r, c)| m.at(r, c))
        .sum::<f64>()
        / points.len() as f64;
    if mean > peak_thresh && entry_peak.width > width_thresh {
        VehicleClass::Truck
    } else {
        VehicleClass::Car
    }
}

/// Tracks one seeded trajectory to termination.
fn track_one(
    m: &WaterfallMatrix,
    event: &EntryEvent,
    cfg: &TrackConfig,
) -> Trajectory {
    let mut points: Vec<(usize, usize)> = alloc::vec![(event.entry_row, event.entry_col)];
    let mut coast = 0usize;
    let mut row = event.entry_row + 1;
    while row < m.rows() {
        let (prev_row, prev_col) = *points.last().unwrap();
        debug_assert_eq!(prev_row + 1, row);
        let (v_lo, v_hi) = if points.len() == 1 {
            (cfg.v_min_init, cfg.v_max_init)
        } else {
            let window = cfg.fit_window.unwrap_or(usize::MAX).max(2);
            let start = points.len().saturating_sub(window);
            let sample: Vec<(f64, f64)> = points[start..]
                .iter()
                .map(|&(r, c)| (r as f64, c as f64))
                .collect();
            let order = cfg.fit_order.min(sample.len() - 1).max(1);
            let coefficients = match polyfit(&sample, order) {
                Ok(c) => c,
                Err(_) => break,
            };
            let slope = poly_slope(&coefficients, prev_row as f64);
            let v_kmh = slope * m.dx / m.dt * 3.6;
            let (a, b) = ((1.0 - cfg.cof) * v_kmh, (1.0 + cfg.cof) * v_kmh);
            (a.min(b), a.max(b))
        };
        let col = match match_step(m, prev_col, v_lo, v_hi, row) {
            Ok(c) => c,
            Err(_) => break, // window exits the matrix
        };
        points.push((row, col));
        if cfg.max_coast.is_some() {
            if m.at(row, col) < cfg.amplitude_floor {
                coast += 1;
                if coast > cfg.max_coast.unwrap() {
                    break;
                }
            } else {
                coast = 0;
            }
        }
        row += 1;
    }
    // drop the sub-floor tail regardless of how the loop exited
    points.truncate(points.len() - coast);

    let single_point = points.len() < 2;
    let sample: Vec<(f64, f64)> = points
        .iter()
        .map(|&(r, c)| (r as f64, c as f64))
        .collect();
    let order = cfg.fit_order.min(sample.len().saturating_sub(1));
    let coefficients = polyfit(&sample, order).unwrap_or_else(|_| {
        alloc::vec![points.first().map(|&(_, c)| c as f64).unwrap_or(0.0)]
    });
    let t_last = points.last().map(|&(r, _)| r as f64).unwrap_or(0.0);
    let slope = poly_slope(&coefficients, t_last);
    let fitted_velocity_kmh = slope * m.dx / m.dt * 3.6;
    let residual_rms = if sample.is_empty() {
        0.0
    } else {
        let ss: f64 = sample
            .iter()
            .map(|&(t, x)| {
                let e = poly_eval(&coefficients, t) - x;
                e * e
            })
            .sum();
        libm::sqrt(ss / sample.len() as f64) * m.dx
    };
    let class = classify_vehicle(
        &points,
        &event.peak,
        m,
        cfg.truck_peak_thresh,
        cfg.truck_width_thresh,
    );
    Trajectory {
        vehicle_id: event.vehicle_id,
        points,
        coefficients,
        fitted_velocity_kmh,
        class,
        residual_rms,
        entry_peak: event.peak,
        single_point,
    }
}

/// Extracts one trajectory per entry event; output preserves entry order.
pub fn extract_trajectories(
    m: &WaterfallMatrix,
    events: &[EntryEvent],
    cfg: &TrackConfig,
) -> CoreResult<Vec<Trajectory>> {
    cfg.validate()?;
    Ok(events.iter().map(|e| track_one(m, e, cfg)).collect())
}
