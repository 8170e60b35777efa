//! Algorithmic core for optical-fiber DAS waterfall processing.
//!
//! The crate covers the full signal chain from synthetic waterfall generation
//! to traffic statistics:
//!
//! * [`waterfall`] — the time × distance amplitude matrix and window ops
//! * [`forward`] — half-space quasi-static forward model and scene simulator
//! * [`denoise`] — combined hard/soft wavelet threshold denoiser
//! * [`metrics`] — MSE / PSNR / SSIM quality indices
//! * [`butterworth`] — digital Butterworth low-pass (bilinear design)
//! * [`peaks`] — sign-difference peak location search and entry detection
//! * [`track`] — line-by-line matching with velocity-bounded windows
//! * [`traffic`] — profile/segment flow, density and mean-speed indices
//! * [`baseline`] — Hough/Radon line extraction and scoring harness
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion
//! CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod butterworth;
pub mod denoise;
pub mod error;
pub mod forward;
pub mod metrics;
pub mod peaks;
pub mod track;
pub mod traffic;
pub mod waterfall;

pub use error::CoreError;
pub use waterfall::{WaterfallMatrix, WindowSelector};
