//! The single pipeline configuration document. Unknown keys anywhere in
//! the document are rejected.

use std::path::Path;

use anyhow::{Context, Result};
use das_core::baseline::HoughConfig;
use das_core::butterworth::ButterworthConfig;
use das_core::denoise::DenoiseConfig;
use das_core::track::TrackConfig;
use serde::{Deserialize, Serialize};

use crate::render::RenderSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectSection {
    pub min_height: f64,
    pub entry_col: usize,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self {
            min_height: 0.06,
            entry_col: 0,
        }
    }
}

/// Traffic statistics queries for the pipeline. Unset positions default to
/// the fiber mid-span / full recording window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsSection {
    pub profile_position_m: Option<f64>,
    pub window_s: Option<(f64, f64)>,
    pub segment_m: Option<(f64, f64)>,
    pub at_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub hough: HoughConfig,
    /// Candidates retained from the Radon sinogram.
    pub radon_count: usize,
    /// Angles sampled across the velocity-restricted range.
    pub radon_angles: usize,
    /// Velocity range (km/h) defining the default Radon angle restriction.
    pub radon_vmin_kmh: f64,
    pub radon_vmax_kmh: f64,
    /// Matching tolerances for scoring against ground truth.
    pub tol_rows: f64,
    pub tol_kmh: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            hough: HoughConfig::default(),
            radon_count: 5,
            radon_angles: 180,
            radon_vmin_kmh: 30.0,
            radon_vmax_kmh: 200.0,
            tol_rows: 5.0,
            tol_kmh: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub rng_seed: u64,
    pub denoise: DenoiseConfig,
    pub butterworth: ButterworthConfig,
    pub detect: DetectSection,
    pub track: TrackConfig,
    pub stats: StatsSection,
    pub baseline: BaselineSection,
    pub render: RenderSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            denoise: DenoiseConfig::default(),
            butterworth: ButterworthConfig::default(),
            detect: DetectSection::default(),
            track: TrackConfig::default(),
            stats: StatsSection::default(),
            baseline: BaselineSection::default(),
            render: RenderSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.denoise.validate().context("denoise config")?;
        self.butterworth.validate().context("butterworth config")?;
        self.track.validate().context("track config")?;
        anyhow::ensure!(
            self.detect.min_height >= 0.0,
            "detect min_height must be non-negative"
        );
        anyhow::ensure!(
            self.baseline.radon_vmin_kmh > 0.0
                && self.baseline.radon_vmax_kmh > self.baseline.radon_vmin_kmh,
            "radon velocity range must satisfy 0 < vmin < vmax"
        );
        Ok(())
    }
}
