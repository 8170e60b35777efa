//! Straight-line baselines for comparison against the tracker: a binarized
//! Hough transform and a discrete Radon transform, plus a scorer that
//! matches recovered lines against ground truth.
//!
//! Both methods model a vehicle track as the line `col = (rho - row
//! sin(theta)) / cos(theta)` in index space, with theta in [0, pi) and rho
//! the signed distance from the (row 0, col 0) corner.

use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};
use crate::forward::GroundTruth;
use crate::waterfall::WaterfallMatrix;

/// A straight line recovered from the waterfall, plus its interpretation as
/// a vehicle track.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineCandidate {
    /// Signed distance of the line from the origin, in pixels.
    pub rho: f64,
    /// Normal angle, radians in [0, pi).
    pub theta: f64,
    /// Accumulator votes (Hough) or integral mass (Radon).
    pub score: f64,
    /// Row where the line crosses column 0; negative values mean the
    /// vehicle was already on the fiber at row 0.
    pub entry_row: f64,
    /// Implied speed; infinite-speed (horizontal) lines are rejected
    /// before this is built.
    pub velocity_kmh: f64,
}

impl LineCandidate {
    /// Builds a candidate from tracker output so trajectories can be scored
    /// with the same matcher as the transform baselines.
    pub fn from_track(entry_row: f64, velocity_kmh: f64, dt: f64, dx: f64) -> Self {
        let slope = velocity_kmh / 3.6 * dt / dx; // columns per row
        let theta = core::f64::consts::PI - libm::atan(slope);
        Self {
            rho: entry_row * libm::sin(theta),
            theta,
            score: 0.0,
            entry_row,
            velocity_kmh,
        }
    }
}

/// Hough transform parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HoughConfig {
    /// Amplitude threshold for the binarization step.
    pub binarize: f64,
    /// Minimum accumulator votes for a reported line.
    pub min_votes: usize,
    pub theta_bins: usize,
    pub rho_bins: usize,
}

impl Default for HoughConfig {
    fn default() -> Self {
        Self {
            // matches the detection min-height default for comparability
            binarize: 0.06,
            min_votes: 20,
            theta_bins: 180,
            rho_bins: 400,
        }
    }
}

/// Dense vote accumulator over (theta, rho) bins.
#[derive(Debug, Clone)]
pub struct HoughAccumulator {
    pub votes: Vec<u32>,
    pub theta_bins: usize,
    pub rho_bins: usize,
    pub rho_max: f64,
    pub foreground: usize,
}

impl HoughAccumulator {
    #[inline]
    pub fn at(&self, theta_idx: usize, rho_idx: usize) -> u32 {
        self.votes[theta_idx * self.rho_bins + rho_idx]
    }

    fn theta(&self, idx: usize) -> f64 {
        (idx as f64 + 0.5) * core::f64::consts::PI / self.theta_bins as f64
    }

    fn rho(&self, idx: usize) -> f64 {
        -self.rho_max + (idx as f64 + 0.5) * 2.0 * self.rho_max / self.rho_bins as f64
    }
}

/// Builds the vote accumulator: every binarized pixel votes once in each
/// theta bin. Total votes therefore equal `foreground * theta_bins`.
pub fn hough_accumulate(m: &WaterfallMatrix, cfg: &HoughConfig) -> CoreResult<HoughAccumulator> {
    if cfg.theta_bins < 2 || cfg.rho_bins < 2 {
        return Err(CoreError::DegenerateBins);
    }
    let rho_max = libm::sqrt((m.rows() * m.rows() + m.cols() * m.cols()) as f64);
    let mut acc = HoughAccumulator {
        votes: alloc::vec![0u32; cfg.theta_bins * cfg.rho_bins],
        theta_bins: cfg.theta_bins,
        rho_bins: cfg.rho_bins,
        rho_max,
        foreground: 0,
    };
    for row in 0..m.rows() {
        for col in 0..m.cols() {
            if m.at(row, col) < cfg.binarize {
                continue;
            }
            acc.foreground += 1;
            for ti in 0..cfg.theta_bins {
                let theta = acc.theta(ti);
                let rho = col as f64 * libm::cos(theta) + row as f64 * libm::sin(theta);
                let mut ri = ((rho + rho_max) / (2.0 * rho_max) * cfg.rho_bins as f64) as isize;
                ri = ri.clamp(0, cfg.rho_bins as isize - 1);
                acc.votes[ti * cfg.rho_bins + ri as usize] += 1;
            }
        }
    }
    Ok(acc)
}

fn peak_to_candidate(rho: f64, theta: f64, score: f64, m: &WaterfallMatrix) -> Option<LineCandidate> {
    let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));
    // col(row) = (rho - row sin) / cos; horizontal lines (cos ~ 0) carry no
    // speed information and are dropped
    if libm::fabs(cos_t) < 1e-6 || libm::fabs(sin_t) < 1e-6 {
        return None;
    }
    let dcol_drow = -sin_t / cos_t;
    // a vehicle moves toward increasing columns over time
    if dcol_drow <= 0.0 {
        return None;
    }
    let entry_row = rho / sin_t; // row at col = 0
    let velocity_kmh = dcol_drow * m.dx / m.dt * 3.6;
    Some(LineCandidate {
        rho,
        theta,
        score,
        entry_row,
        velocity_kmh,
    })
}

/// Recovers line candidates: accumulate, keep 3x3 local maxima above
/// `min_votes`, convert to entry row / velocity. Sorted by descending score.
pub fn hough_lines(m: &WaterfallMatrix, cfg: &HoughConfig) -> CoreResult<Vec<LineCandidate>> {
    let acc = hough_accumulate(m, cfg)?;
    let mut out = Vec::new();
    for ti in 0..acc.theta_bins {
        for ri in 0..acc.rho_bins {
            let v = acc.at(ti, ri);
            if (v as usize) < cfg.min_votes {
                continue;
            }
            let mut is_max = true;
            'nms: for dt in -1isize..=1 {
                for dr in -1isize..=1 {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    let (nt, nr) = (ti as isize + dt, ri as isize + dr);
                    if nt < 0 || nr < 0 || nt >= acc.theta_bins as isize || nr >= acc.rho_bins as isize {
                        continue;
                    }
                    let nv = acc.at(nt as usize, nr as usize);
                    // strict on one side so plateaus yield a single peak
                    if nv > v || (nv == v && (nt, nr) < (ti as isize, ri as isize)) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if !is_max {
                continue;
            }
            if let Some(c) = peak_to_candidate(acc.rho(ri), acc.theta(ti), v as f64, m) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    Ok(out)
}

/// Discrete Radon transform: line integrals with bilinear interpolation at
/// unit arc-length steps, zero outside the matrix.
///
/// Returns one projection per angle; each projection has
/// `2 * ceil(hypot(rows, cols) / 2) + 1` offsets centered on the matrix
/// center, offset spacing one pixel.
pub fn radon_transform(m: &WaterfallMatrix, angles: &[f64]) -> Vec<Vec<f64>> {
    let (rows, cols) = (m.rows() as f64, m.cols() as f64);
    let (cy, cx) = ((rows - 1.0) / 2.0, (cols - 1.0) / 2.0);
    let half_diag = libm::ceil(libm::sqrt(rows * rows + cols * cols) / 2.0) as isize;
    // samples just outside the boundary still pick up partial weight from
    // edge pixels, so total projected mass matches the matrix sum
    let sample = |y: f64, x: f64| -> f64 {
        if y <= -1.0 || x <= -1.0 || y >= rows || x >= cols {
            return 0.0;
        }
        let (y0, x0) = (libm::floor(y), libm::floor(x));
        let (fy, fx) = (y - y0, x - x0);
        let mut total = 0.0;
        for (di, wy) in [(0isize, 1.0 - fy), (1, fy)] {
            for (dj, wx) in [(0isize, 1.0 - fx), (1, fx)] {
                let r = y0 as isize + di;
                let c = x0 as isize + dj;
                if r >= 0 && c >= 0 && (r as usize) < m.rows() && (c as usize) < m.cols() {
                    total += wy * wx * m.at(r as usize, c as usize);
                }
            }
        }
        total
    };
    angles
        .iter()
        .map(|&theta| {
            let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));
            (-half_diag..=half_diag)
                .map(|s| {
                    let s = s as f64;
                    // offset along the normal, integration along the line
                    let mut total = 0.0;
                    for t in -half_diag..=half_diag {
                        let t = t as f64;
                        let x = cx + s * cos_t - t * sin_t;
                        let y = cy + s * sin_t + t * cos_t;
                        total += sample(y, x);
                    }
                    total
                })
                .collect()
        })
        .collect()
}

/// Extracts line candidates from the Radon transform: the `count` largest
/// projection samples that are local maxima along their offset axis.
pub fn radon_lines(m: &WaterfallMatrix, angles: &[f64], count: usize) -> Vec<LineCandidate> {
    let sinogram = radon_transform(m, angles);
    let half_diag = (sinogram[0].len() as isize - 1) / 2;
    let (cy, cx) = ((m.rows() as f64 - 1.0) / 2.0, (m.cols() as f64 - 1.0) / 2.0);
    let mut found: Vec<LineCandidate> = Vec::new();
    for (ai, projection) in sinogram.iter().enumerate() {
        for (si, &mass) in projection.iter().enumerate() {
            if si == 0 || si + 1 == projection.len() {
                continue;
            }
            if !(projection[si - 1] < mass && mass >= projection[si + 1]) {
                continue;
            }
            let theta = angles[ai];
            let s = si as isize - half_diag;
            // line passes through center + s * (cos, sin) with direction
            // (-sin, cos) in (x=col, y=row) coordinates; rho relative to the
            // corner origin used by the Hough parameterization
            let rho = (cx + s as f64 * libm::cos(theta)) * libm::cos(theta)
                + (cy + s as f64 * libm::sin(theta)) * libm::sin(theta);
            if let Some(c) = peak_to_candidate(rho, theta, mass, m) {
                found.push(c);
            }
        }
    }
    found.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    found.truncate(count);
    found
}

/// Detection quality of a candidate set against synthesis ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// RMSE of velocity over matched pairs, km/h; absent with no matches.
    pub velocity_rmse_kmh: Option<f64>,
}

/// Greedy one-to-one matching on entry-row proximity. A pair matches when
/// both the entry-row gap and the velocity gap are within tolerance.
pub fn score_method(
    candidates: &[LineCandidate],
    truth: &GroundTruth,
    tol_rows: f64,
    tol_kmh: f64,
) -> MatchScore {
    let truth_lines: Vec<(f64, f64)> = truth
        .vehicles
        .iter()
        .map(|v| (v.entry_row as f64, v.velocity * 3.6))
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ci, c) in candidates.iter().enumerate() {
        for (ti, &(row, kmh)) in truth_lines.iter().enumerate() {
            let d_row = libm::fabs(c.entry_row - row);
            let d_v = libm::fabs(c.velocity_kmh - kmh);
            if d_row <= tol_rows && d_v <= tol_kmh {
                pairs.push((d_row, ci, ti));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut used_c = alloc::vec![false; candidates.len()];
    let mut used_t = alloc::vec![false; truth_lines.len()];
    let mut sq_err = 0.0;
    let mut matched = 0usize;
    for (_, ci, ti) in pairs {
        if used_c[ci] || used_t[ti] {
            continue;
        }
        used_c[ci] = true;
        used_t[ti] = true;
        let dv = candidates[ci].velocity_kmh - truth_lines[ti].1;
        sq_err += dv * dv;
        matched += 1;
    }
    MatchScore {
        true_positives: matched,
        false_positives: candidates.len() - matched,
        false_negatives: truth_lines.len() - matched,
        velocity_rmse_kmh: if matched > 0 {
            Some(libm::sqrt(sq_err / matched as f64))
        } else {
            None
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::VehicleTruth;
    use alloc::vec;

    /// Matrix with a single ideal stripe: col = slope * row + intercept.
    fn stripe(rows: usize, cols: usize, slope: f64, intercept: f64) -> WaterfallMatrix {
        let mut values = vec![0.0; rows * cols];
        for row in 0..rows {
            let col = slope * row as f64 + intercept;
            if col >= 0.0 && col < cols as f64 {
                values[row * cols + libm::round(col) as usize] = 1.0;
            }
        }
        WaterfallMatrix::new(values, rows, cols, 0.25, 0.8, 0.0, 0.0).unwrap()
    }

    #[test]
    fn accumulator_vote_count_invariant() {
        let m = stripe(40, 40, 1.0, 0.0);
        let cfg = HoughConfig::default();
        let acc = hough_accumulate(&m, &cfg).unwrap();
        let total: u64 = acc.votes.iter().map(|&v| v as u64).sum();
        assert_eq!(total, (acc.foreground * cfg.theta_bins) as u64);
        assert_eq!(acc.foreground, 40);
    }

    #[test]
    fn hough_recovers_an_ideal_line() {
        // col = row: dcol/drow = 1 -> v = 0.8 / 0.25 * 3.6 = 11.52 km/h
        let m = stripe(60, 60, 1.0, 5.0);
        let cfg = HoughConfig {
            min_votes: 30,
            ..HoughConfig::default()
        };
        let lines = hough_lines(&m, &cfg).unwrap();
        assert!(!lines.is_empty());
        let best = lines[0];
        assert!(
            (best.velocity_kmh - 11.52).abs() / 11.52 < 0.1,
            "velocity {}",
            best.velocity_kmh
        );
        assert!((best.entry_row - (-5.0)).abs() < 4.0, "entry {}", best.entry_row);
    }

    #[test]
    fn hough_separates_two_lines() {
        let a = stripe(80, 120, 1.0, 0.0);
        let b = stripe(80, 120, 0.5, 40.0);
        let merged: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.max(*y))
            .collect();
        let m = a.with_values(merged).unwrap();
        let cfg = HoughConfig {
            min_votes: 40,
            ..HoughConfig::default()
        };
        let lines = hough_lines(&m, &cfg).unwrap();
        assert!(lines.len() >= 2, "found {}", lines.len());
        let mut speeds: Vec<f64> = lines.iter().take(2).map(|l| l.velocity_kmh).collect();
        speeds.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((speeds[0] - 5.76).abs() / 5.76 < 0.15, "{speeds:?}");
        assert!((speeds[1] - 11.52).abs() / 11.52 < 0.15, "{speeds:?}");
    }

    #[test]
    fn degenerate_bins_rejected() {
        let m = stripe(10, 10, 1.0, 0.0);
        let cfg = HoughConfig {
            theta_bins: 1,
            ..HoughConfig::default()
        };
        assert!(matches!(
            hough_accumulate(&m, &cfg),
            Err(CoreError::DegenerateBins)
        ));
    }

    #[test]
    fn radon_conserves_mass_per_angle() {
        let mut values = vec![0.0; 30 * 20];
        let mut state = 7u64;
        for v in values.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = ((state >> 33) % 100) as f64 / 100.0;
        }
        let total: f64 = values.iter().sum();
        let m = WaterfallMatrix::new(values, 30, 20, 1.0, 1.0, 0.0, 0.0).unwrap();
        let angles = [0.0, 0.4, core::f64::consts::FRAC_PI_2, 2.0];
        for projection in radon_transform(&m, &angles) {
            let mass: f64 = projection.iter().sum();
            assert!(
                (mass - total).abs() / total < 0.02,
                "mass {mass} vs {total}"
            );
        }
    }

    #[test]
    fn radon_axis_aligned_projections_match_sums() {
        let m = stripe(16, 16, 0.0, 7.0); // constant column 7
        // theta = 0: offset axis is the column axis; all mass lands at
        // col 7 - center offset
        let projection = &radon_transform(&m, &[0.0])[0];
        let peak_idx = projection
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let half = (projection.len() - 1) / 2;
        let offset = peak_idx as isize - half as isize;
        // column 7 sits 0.5 pixels left of the center of a 16-wide image,
        // so its mass splits evenly between the two adjacent offset bins
        assert!((offset as f64 - (-0.5)).abs() <= 1.0);
        let neighbor = projection[peak_idx - 1].max(projection[peak_idx + 1]);
        let pair = projection[peak_idx] + neighbor;
        assert!((pair - 16.0).abs() < 1e-9, "pair mass {pair}");
    }

    #[test]
    fn radon_recovers_stripe_velocity() {
        let m = stripe(60, 80, 1.0, 10.0);
        let angles: Vec<f64> = (1..180).map(|d| d as f64 * core::f64::consts::PI / 180.0).collect();
        let lines = radon_lines(&m, &angles, 3);
        assert!(!lines.is_empty());
        let best = lines[0];
        assert!(
            (best.velocity_kmh - 11.52).abs() / 11.52 < 0.12,
            "velocity {}",
            best.velocity_kmh
        );
    }

    fn truth_of(entries: &[(usize, f64)]) -> GroundTruth {
        GroundTruth {
            vehicles: entries
                .iter()
                .enumerate()
                .map(|(id, &(row, v_mps))| VehicleTruth {
                    vehicle_id: id,
                    entry_row: row,
                    exit_row: row + 100,
                    velocity: v_mps,
                    positions: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn from_track_round_trips_through_the_line_model() {
        let c = LineCandidate::from_track(12.0, 80.0, 0.25, 0.8);
        // the line should pass through (row=12, col=0) and have the stated slope
        let col_at = |row: f64| (c.rho - row * libm::sin(c.theta)) / libm::cos(c.theta);
        assert!(col_at(12.0).abs() < 1e-9);
        let slope = col_at(13.0) - col_at(12.0);
        assert!((slope - 80.0 / 3.6 * 0.25 / 0.8).abs() < 1e-9);
        assert!((0.0..core::f64::consts::PI).contains(&c.theta));
    }

    #[test]
    fn scoring_counts_and_rmse() {
        let truth = truth_of(&[(10, 20.0), (50, 25.0)]); // 72 and 90 km/h
        let candidates = [
            LineCandidate {
                rho: 0.0,
                theta: 1.0,
                score: 10.0,
                entry_row: 11.0,
                velocity_kmh: 75.0,
            },
            LineCandidate {
                rho: 0.0,
                theta: 1.0,
                score: 8.0,
                entry_row: 200.0,
                velocity_kmh: 60.0,
            },
        ];
        let s = score_method(&candidates, &truth, 5.0, 10.0);
        assert_eq!(s.true_positives, 1);
        assert_eq!(s.false_positives, 1);
        assert_eq!(s.false_negatives, 1);
        assert!((s.velocity_rmse_kmh.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scoring_is_one_to_one() {
        // two candidates near one truth line: only one may match
        let truth = truth_of(&[(10, 20.0)]);
        let near = LineCandidate {
            rho: 0.0,
            theta: 1.0,
            score: 1.0,
            entry_row: 10.0,
            velocity_kmh: 72.0,
        };
        let also_near = LineCandidate {
            entry_row: 12.0,
            ..near
        };
        let s = score_method(&[near, also_near], &truth, 5.0, 10.0);
        assert_eq!(s.true_positives, 1);
        assert_eq!(s.false_positives, 1);
        assert_eq!(s.false_negatives, 0);
    }

    #[test]
    fn empty_candidates_score_all_misses() {
        let truth = truth_of(&[(10, 20.0), (40, 30.0)]);
        let s = score_method(&[], &truth, 5.0, 10.0);
        assert_eq!(s.true_positives, 0);
        assert_eq!(s.false_negatives, 2);
        assert_eq!(s.velocity_rmse_kmh, None);
    }
}
