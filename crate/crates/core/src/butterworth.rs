//! Digital Butterworth low-pass filtering.
//!
//! Filters are designed from the analog prototype with frequency pre-warping
//! and the bilinear transform, then run as a cascade of second-order
//! sections in transposed direct form II. Zero-phase operation applies the
//! cascade forward and backward so peak positions are not delayed.

use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};

/// Butterworth low-pass configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ButterworthConfig {
    /// Filter order N.
    pub order: usize,
    /// Normalized cut-off frequency in (0, 1), as a fraction of Nyquist.
    pub cutoff: f64,
    /// Apply forward-backward for zero phase shift.
    pub zero_phase: bool,
}

impl Default for ButterworthConfig {
    fn default() -> Self {
        Self {
            order: 1,
            cutoff: 0.5,
            zero_phase: true,
        }
    }
}

impl ButterworthConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if self.order < 1 {
            return Err(CoreError::BadFilterOrder);
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(CoreError::BadCutoff { wn: self.cutoff });
        }
        Ok(())
    }
}

/// One biquad: numerator (b0, b1, b2), denominator (1, a1, a2).
#[derive(Debug, Clone, Copy)]
struct Section {
    b: [f64; 3],
    a: [f64; 2],
}

/// Designs the low-pass as second-order sections (bilinear transform of the
/// analog Butterworth prototype).
fn design(order: usize, cutoff: f64) -> Vec<Section> {
    // pre-warped analog cutoff for the bilinear map s = (1 - z^-1)/(1 + z^-1)
    let warped = libm::tan(core::f64::consts::PI * cutoff / 2.0);
    let n = order;
    let mut sections = Vec::with_capacity((n + 1) / 2);
    if n % 2 == 1 {
        // real pole at -warped
        let wc = warped;
        let norm = 1.0 + wc;
        sections.push(Section {
            b: [wc / norm, wc / norm, 0.0],
            a: [(wc - 1.0) / norm, 0.0],
        });
    }
    for k in 0..n / 2 {
        // conjugate pole pair of the prototype, scaled by the warped cutoff
        let theta = core::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n as f64);
        // pair contributes s^2 + 2 sin(theta) wc s + wc^2
        let wc = warped;
        let two_re = 2.0 * libm::sin(theta) * wc;
        let mag2 = wc * wc;
        let norm = 1.0 + two_re + mag2;
        sections.push(Section {
            b: [mag2 / norm, 2.0 * mag2 / norm, mag2 / norm],
            a: [(2.0 * mag2 - 2.0) / norm, (1.0 - two_re + mag2) / norm],
        });
    }
    sections
}

/// Runs one section over the signal in place, transposed direct form II.
/// Initial state is the DC steady state for the first input sample, so a
/// constant signal passes through exactly.
fn run_section(section: &Section, signal: &mut [f64]) {
    let [b0, b1, b2] = section.b;
    let [a1, a2] = section.a;
    let u0 = signal.first().copied().unwrap_or(0.0);
    let mut z1 = (1.0 - b0) * u0;
    let mut z2 = (b2 - a2) * u0;
    for x in signal.iter_mut() {
        let input = *x;
        let y = b0 * input + z1;
        z1 = b1 * input - a1 * y + z2;
        z2 = b2 * input - a2 * y;
        *x = y;
    }
}

fn run_cascade(sections: &[Section], signal: &mut [f64]) {
    for s in sections {
        run_section(s, signal);
    }
}

/// Applies the configured Butterworth low-pass to a 1-D signal.
pub fn butterworth_lowpass(signal: &[f64], cfg: &ButterworthConfig) -> CoreResult<Vec<f64>> {
    cfg.validate()?;
    if signal.len() < 8 {
        return Err(CoreError::SignalTooShortForFilter {
            len: signal.len(),
            min: 8,
        });
    }
    let sections = design(cfg.order, cfg.cutoff);
    let mut out = signal.to_vec();
    run_cascade(&sections, &mut out);
    if cfg.zero_phase {
        out.reverse();
        run_cascade(&sections, &mut out);
        out.reverse();
    }
    Ok(out)
}

/// Analytic magnitude response |H(f)| of the single-pass filter at a
/// normalized frequency `f` (fraction of Nyquist). Used as a design oracle.
pub fn analytic_magnitude(order: usize, cutoff: f64, f: f64) -> f64 {
    // digital response of the bilinear design: the warped frequency ratio
    let w = libm::tan(core::f64::consts::PI * f / 2.0) / libm::tan(core::f64::consts::PI * cutoff / 2.0);
    1.0 / libm::sqrt(1.0 + libm::pow(w, 2.0 * order as f64))
}
