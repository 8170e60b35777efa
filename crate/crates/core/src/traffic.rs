//! Traffic flow indices on road profiles and road segments.
//!
//! Profile (fixed position, observation window T): flow Q = N/T, time mean
//! speed TMS = harmonic mean of crossing speeds, density K = Q/TMS.
//! Segment (fixed instant, length L): density K = N/L, space mean speed
//! SMS = arithmetic mean of instantaneous speeds, flow Q = K * SMS.

use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};
use crate::track::Trajectory;
use crate::waterfall::WaterfallMatrix;

/// A vehicle path in physical units: position (meters) as a polynomial in
/// absolute time (seconds), valid on [t_start, t_end].
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPath {
    pub vehicle_id: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Position coefficients, lowest order first, meters vs seconds.
    pub coefficients: Vec<f64>,
}

impl FittedPath {
    /// Converts a row/column trajectory fit to physical units using the
    /// matrix sampling metadata.
    pub fn from_trajectory(traj: &Trajectory, m: &WaterfallMatrix) -> Self {
        // col(r) with r = (t - t0)/dt; x = x0 + dx * col
        let a = 1.0 / m.dt;
        let b = -m.t0 / m.dt;
        // compose polynomial with the affine map r = a t + b (Horner on
        // polynomial coefficients)
        let mut composed: Vec<f64> = alloc::vec![0.0];
        for &c in traj.coefficients.iter().rev() {
            // composed = composed * (a t + b) + c
            let mut next = alloc::vec![0.0; composed.len() + 1];
            for (i, &ci) in composed.iter().enumerate() {
                next[i] += ci * b;
                next[i + 1] += ci * a;
            }
            next[0] += c;
            while next.len() > 1 && next.last() == Some(&0.0) {
                next.pop();
            }
            composed = next;
        }
        for c in composed.iter_mut() {
            *c *= m.dx;
        }
        composed[0] += m.x0;
        let rows = (
            traj.points.first().map(|&(r, _)| r).unwrap_or(0),
            traj.points.last().map(|&(r, _)| r).unwrap_or(0),
        );
        Self {
            vehicle_id: traj.vehicle_id,
            t_start: m.row_time(rows.0),
            t_end: m.row_time(rows.1),
            coefficients: composed,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Instantaneous velocity, meters per second.
    pub fn velocity_mps(&self, t: f64) -> f64 {
        let mut v = 0.0;
        let mut tp = 1.0;
        for (j, &c) in self.coefficients.iter().enumerate().skip(1) {
            v += j as f64 * c * tp;
            tp *= t;
        }
        v
    }

    /// Time at which the path crosses `position`, if it does within the
    /// path's validity interval. Found by bisection on the fitted
    /// polynomial, so a missing key point at the exact column is harmless.
    pub fn crossing_time(&self, position: f64) -> Option<f64> {
        let f = |t: f64| self.position(t) - position;
        let (mut lo, mut hi) = (self.t_start, self.t_end);
        if lo > hi {
            return None;
        }
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo * fhi > 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Fixed road position observed over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileQuery {
    /// Meters.
    pub position: f64,
    pub window_start: f64,
    pub window_end: f64,
}

/// Road segment observed at an instant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentQuery {
    pub seg_start: f64,
    pub seg_end: f64,
    /// Observation instant, seconds.
    pub at_time: f64,
}

/// Flow / density / speed indices for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrafficRecord {
    pub vehicle_count: usize,
    /// km/h; absent when no vehicle qualifies.
    pub mean_speed_kmh: Option<f64>,
    /// Vehicles per second (profile) or K * SMS (segment).
    pub flow_q: f64,
    /// Q / TMS (profile) or N / L in 1/m (segment).
    pub density_k: f64,
}

/// Profile indices: N crossings in the window, TMS (harmonic mean of
/// crossing speeds), Q = N/T, K = Q/TMS.
pub fn profile_stats(paths: &[FittedPath], q: &ProfileQuery) -> CoreResult<TrafficRecord> {
    if !(q.window_end > q.window_start) {
        return Err(CoreError::BadQuery {
            reason: "profile window must have positive length",
        });
    }
    let mut inv_speed_sum = 0.0;
    let mut count = 0usize;
    for path in paths {
        let Some(t) = path.crossing_time(q.position) else {
            continue;
        };
        if t < q.window_start || t > q.window_end {
            continue;
        }
        let v_kmh = path.velocity_mps(t).abs() * 3.6;
        if v_kmh == 0.0 {
            return Err(CoreError::ZeroSpeed {
                vehicle_id: path.vehicle_id,
            });
        }
        inv_speed_sum += 1.0 / v_kmh;
        count += 1;
    }
    let flow_q = count as f64 / (q.window_end - q.window_start);
    if count == 0 {
        return Ok(TrafficRecord {
            vehicle_count: 0,
            mean_speed_kmh: None,
            flow_q,
            density_k: 0.0,
        });
    }
    let tms = count as f64 / inv_speed_sum;
    Ok(TrafficRecord {
        vehicle_count: count,
        mean_speed_kmh: Some(tms),
        flow_q,
        density_k: flow_q / tms,
    })
}

/// Segment indices: N vehicles inside the segment at the instant,
/// SMS (arithmetic mean of instantaneous speeds), K = N/L, Q = K * SMS.
pub fn segment_stats(paths: &[FittedPath], q: &SegmentQuery) -> CoreResult<TrafficRecord> {
    if !(q.seg_end > q.seg_start) {
        return Err(CoreError::BadQuery {
            reason: "segment must have positive length",
        });
    }
    let length = q.seg_end - q.seg_start;
    let mut speed_sum = 0.0;
    let mut count = 0usize;
    for path in paths {
        if q.at_time < path.t_start || q.at_time > path.t_end {
            continue;
        }
        let x = path.position(q.at_time);
        if x < q.seg_start || x > q.seg_end {
            continue;
        }
        speed_sum += path.velocity_mps(q.at_time).abs() * 3.6;
        count += 1;
    }
    let density_k = count as f64 / length;
    if count == 0 {
        return Ok(TrafficRecord {
            vehicle_count: 0,
            mean_speed_kmh: None,
            flow_q: 0.0,
            density_k,
        });
    }
    let sms = speed_sum / count as f64;
    Ok(TrafficRecord {
        vehicle_count: count,
        mean_speed_kmh: Some(sms),
        flow_q: density_k * sms,
        density_k,
    })
}

/// Truncates (not rounds) toward zero at `decimals` places, matching the
/// report formatter.
pub fn truncate_decimals(value: f64, decimals: u32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    libm::trunc(value * scale) / scale
}
