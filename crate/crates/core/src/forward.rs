//! Quasi-static half-space forward model and multi-vehicle waterfall
//! synthesis.
//!
//! The ground deformation under a point load follows the Flamant-Boussinesq
//! half-space solution; the fiber measures the gauge-length difference of
//! that deformation. A vehicle is modeled as four wheel point loads at the
//! corners of its footprint, and the recorded stripe is the absolute
//! front/rear gauge difference of the wheel superposition.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};
use crate::waterfall::WaterfallMatrix;

/// Elastic half-space parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Medium {
    /// Uniform shear modulus G, pascals.
    pub shear_modulus: f64,
    /// Poisson's ratio, in [0, 0.5).
    pub poisson: f64,
}

impl Medium {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.shear_modulus > 0.0) || !(0.0..0.5).contains(&self.poisson) {
            return Err(CoreError::BadMedium {
                shear_modulus: self.shear_modulus,
                poisson: self.poisson,
            });
        }
        Ok(())
    }
}

impl Default for Medium {
    /// Synthetic defaults, not calibrated to any field site.
    fn default() -> Self {
        Self {
            shear_modulus: 1e7,
            poisson: 0.25,
        }
    }
}

/// Geometry and sampling of the buried fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FiberLayout {
    /// Burial depth d_z, meters.
    pub depth: f64,
    /// Channel spacing, meters per column.
    pub channel_spacing: f64,
    pub channel_count: usize,
    /// Gauge length l, meters.
    pub gauge_length: f64,
    /// Seconds per time row.
    pub row_dt: f64,
}

impl FiberLayout {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.depth > 0.0)
            || !(self.channel_spacing > 0.0)
            || !(self.gauge_length > 0.0)
            || !(self.row_dt > 0.0)
            || self.channel_count == 0
        {
            return Err(CoreError::BadFiberLayout);
        }
        Ok(())
    }

    /// Sensed span in meters.
    pub fn span(&self) -> f64 {
        self.channel_count as f64 * self.channel_spacing
    }
}

impl Default for FiberLayout {
    fn default() -> Self {
        Self {
            depth: 0.5,
            channel_spacing: 0.8,
            channel_count: 800,
            gauge_length: 1.0,
            row_dt: 0.25,
        }
    }
}

/// A single vehicle in a synthetic scene.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct VehicleSpec {
    /// Total force onto the half-space, newtons.
    pub load: f64,
    /// Per-wheel load fractions, summing to 1.
    pub wheel_weights: [f64; 4],
    /// Front track a, meters.
    pub front_track: f64,
    /// Vehicle length b, meters.
    pub length: f64,
    /// Perpendicular offset d_y from the fiber, meters.
    pub lateral_offset: f64,
    /// Seconds at which the vehicle center is at `entry_position`.
    pub entry_time: f64,
    /// Meters (absolute fiber coordinate) at `entry_time`.
    pub entry_position: f64,
    /// Meters per second; positive moves toward increasing distance.
    pub velocity: f64,
}

impl VehicleSpec {
    pub fn validate(&self) -> CoreResult<()> {
        let sum: f64 = self.wheel_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || self.wheel_weights.iter().any(|&w| w < 0.0) {
            return Err(CoreError::BadVehicleSpec {
                reason: "wheel weights must be non-negative and sum to 1",
            });
        }
        if !(self.front_track > 0.0) || !(self.length > 0.0) || !(self.load > 0.0) {
            return Err(CoreError::BadVehicleSpec {
                reason: "load, front track and length must be positive",
            });
        }
        Ok(())
    }

    /// Wheel offsets (alpha_i, beta_i) relative to the vehicle center, from
    /// left front to right rear.
    pub fn wheel_offsets(&self) -> [(f64, f64); 4] {
        let a = self.front_track;
        let b = self.length;
        [
            (b / 2.0, a / 2.0),
            (b / 2.0, -a / 2.0),
            (-b / 2.0, -a / 2.0),
            (-b / 2.0, a / 2.0),
        ]
    }

    /// Center position at time `t`, meters.
    pub fn position_at(&self, t: f64) -> f64 {
        self.entry_position + self.velocity * (t - self.entry_time)
    }
}

/// Full synthetic scene configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scene {
    pub medium: Medium,
    pub fiber: FiberLayout,
    pub vehicles: Vec<VehicleSpec>,
    /// Seconds of recording.
    pub duration: f64,
    /// Standard deviation of additive Gaussian noise, amplitude units.
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Scene {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.duration > 0.0) {
            return Err(CoreError::BadScene {
                reason: "duration must be positive",
            });
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(CoreError::BadScene {
                reason: "noise sigma must be non-negative",
            });
        }
        self.medium.validate()?;
        self.fiber.validate()?;
        for v in &self.vehicles {
            v.validate()?;
        }
        Ok(())
    }
}

/// Per-vehicle truth emitted alongside a synthetic waterfall.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTruth {
    pub vehicle_id: usize,
    /// First row with the vehicle center inside the fiber span.
    pub entry_row: usize,
    /// Last row with the vehicle center inside the fiber span.
    pub exit_row: usize,
    /// Meters per second.
    pub velocity: f64,
    /// (row, center position in meters) for every in-span row.
    pub positions: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub vehicles: Vec<VehicleTruth>,
}

/// Flamant-Boussinesq quasi-static deformation P(d_x, d_y, d_z) under a
/// point load `force` on a half-space.
pub fn quasi_static_deformation(
    force: f64,
    medium: &Medium,
    dx: f64,
    dy: f64,
    dz: f64,
) -> CoreResult<f64> {
    medium.validate()?;
    let r2 = dx * dx + dy * dy + dz * dz;
    if r2 == 0.0 {
        return Err(CoreError::SingularPoint);
    }
    let r = libm::sqrt(r2);
    let p = (dx / r2) * (dz / r + (2.0 * medium.poisson - 1.0) / (1.0 + dz / r));
    Ok(force / (4.0 * core::f64::consts::PI * medium.shear_modulus) * p)
}

/// Gauge-length impulse response: the normalized spatial difference of the
/// deformation over the gauge span `gauge_l`.
pub fn gauge_response(
    force: f64,
    medium: &Medium,
    dx: f64,
    dy: f64,
    dz: f64,
    gauge_l: f64,
) -> CoreResult<f64> {
    if !(gauge_l > 0.0) {
        return Err(CoreError::BadFiberLayout);
    }
    let ahead = quasi_static_deformation(force, medium, dx + gauge_l / 2.0, dy, dz)?;
    let behind = quasi_static_deformation(force, medium, dx - gauge_l / 2.0, dy, dz)?;
    Ok((ahead - behind) / gauge_l)
}

/// Four-wheel vehicle response at tangential offset `sensor_dx` from the
/// vehicle center: |k_x2 - k_x1| with the wheel superposition evaluated at
/// d_x +- l/2.
pub fn vehicle_response(
    vehicle: &VehicleSpec,
    medium: &Medium,
    fiber: &FiberLayout,
    sensor_dx: f64,
) -> CoreResult<f64> {
    vehicle.validate()?;
    let half_l = fiber.gauge_length / 2.0;
    let dy = vehicle.lateral_offset;
    let dz = fiber.depth;
    let mut front = 0.0;
    let mut rear = 0.0;
    for (w, (alpha, beta)) in vehicle.wheel_weights.iter().zip(vehicle.wheel_offsets()) {
        front += w
            * quasi_static_deformation(vehicle.load, medium, sensor_dx + half_l + alpha, dy + beta, dz)?;
        rear += w
            * quasi_static_deformation(vehicle.load, medium, sensor_dx - half_l + alpha, dy + beta, dz)?;
    }
    Ok((rear - front).abs())
}

// Contribution radius in meters past which a vehicle's response is treated
// as zero when filling cells. The half-space kernel decays as 1/r^2; at this
// range the contribution is orders of magnitude below stripe peaks.
const EVAL_RADIUS_M: f64 = 120.0;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard-normal draw keyed by (seed, row, col); determinism does not
/// depend on evaluation order.
fn cell_noise(seed: u64, row: usize, col: usize) -> f64 {
    let k = splitmix64(seed ^ splitmix64((row as u64) << 32 | col as u64));
    let u1 = ((splitmix64(k) >> 11) as f64 + 1.0) / (9_007_199_254_740_992.0 + 1.0);
    let u2 = (splitmix64(k.wrapping_add(1)) >> 11) as f64 / 9_007_199_254_740_992.0;
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

#[cfg(test)]
pub(crate) fn test_noise(seed: u64, i: usize) -> f64 {
    cell_noise(seed, i, 0)
}

/// Renders a scene into a waterfall matrix plus per-row ground truth.
///
/// Cell (i, j) sums `vehicle_response` over vehicles whose center is within
/// reach, plus N(0, sigma^2) noise keyed by `(rng_seed, i, j)`.
pub fn synthesize_waterfall(scene: &Scene) -> CoreResult<(WaterfallMatrix, GroundTruth)> {
    scene.validate()?;
    let fiber = &scene.fiber;
    let rows = libm::ceil(scene.duration / fiber.row_dt) as usize;
    let cols = fiber.channel_count;
    let x0 = 0.0f64;
    let span = fiber.span();
    let mut values = vec![0.0f64; rows * cols];

    for (id, vehicle) in scene.vehicles.iter().enumerate() {
        let _ = id;
        for i in 0..rows {
            let t = i as f64 * fiber.row_dt;
            let pos = vehicle.position_at(t);
            // cutoff: vehicle contributes only near/inside the span
            if pos < x0 - vehicle.length - EVAL_RADIUS_M
                || pos > x0 + span + vehicle.length + EVAL_RADIUS_M
            {
                continue;
            }
            let reach = vehicle.length / 2.0 + EVAL_RADIUS_M;
            let j_lo = libm::floor(((pos - reach) - x0) / fiber.channel_spacing).max(0.0) as usize;
            let j_hi = (libm::ceil(((pos + reach) - x0) / fiber.channel_spacing) as isize)
                .clamp(0, cols as isize) as usize;
            for j in j_lo..j_hi {
                let sensor_x = x0 + j as f64 * fiber.channel_spacing;
                values[i * cols + j] +=
                    vehicle_response(vehicle, &scene.medium, fiber, sensor_x - pos)?;
            }
        }
    }

    if scene.noise_sigma > 0.0 {
        for i in 0..rows {
            for j in 0..cols {
                values[i * cols + j] += scene.noise_sigma * cell_noise(scene.rng_seed, i, j);
            }
        }
    }

    let mut truth = GroundTruth::default();
    for (id, vehicle) in scene.vehicles.iter().enumerate() {
        let mut positions = Vec::new();
        for i in 0..rows {
            let t = i as f64 * fiber.row_dt;
            if t < vehicle.entry_time && vehicle.velocity >= 0.0 {
                continue;
            }
            let pos = vehicle.position_at(t);
            if pos >= x0 && pos <= x0 + span {
                positions.push((i, pos));
            }
        }
        if let (Some(&(first, _)), Some(&(last, _))) = (positions.first(), positions.last()) {
            truth.vehicles.push(VehicleTruth {
                vehicle_id: id,
                entry_row: first,
                exit_row: last,
                velocity: vehicle.velocity,
                positions,
            });
        }
    }

    let matrix = WaterfallMatrix::new(values, rows, cols, fiber.row_dt, fiber.channel_spacing, 0.0, x0)?;
    Ok((matrix, truth))
}
