//! Peak location search via the sign-of-difference construction, and vehicle
//! entry detection on the first fiber channel.
//!
//! The search builds the first difference of the signal, takes its sign,
//! resolves plateaus by a tail-to-head sweep, and reads crests/troughs off
//! the second difference. A plateau resolves to its first sample.

use alloc::vec::Vec;

use crate::butterworth::{butterworth_lowpass, ButterworthConfig};
use crate::error::CoreResult;
use crate::waterfall::WaterfallMatrix;

/// A detected crest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    /// Count of contiguous samples around the crest at or above half height.
    pub width: usize,
}

/// A vehicle appearing at the fiber entry column.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryEvent {
    pub vehicle_id: usize,
    /// Row index k_s of the appearance.
    pub entry_row: usize,
    pub entry_col: usize,
    pub peak: Peak,
}

/// Crest and trough indices of a signal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extrema {
    pub crests: Vec<usize>,
    pub troughs: Vec<usize>,
}

/// Runs the sign-difference construction, returning both crests and troughs.
pub fn find_extrema(signal: &[f64]) -> Extrema {
    let n = signal.len();
    if n < 3 {
        return Extrema::default();
    }
    // first difference and its sign
    let mut sign: Vec<i8> = (0..n - 1)
        .map(|i| {
            let d = signal[i + 1] - signal[i];
            if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    // tail-to-head plateau resolution
    for i in (0..n - 2).rev() {
        if sign[i] == 0 {
            sign[i] = if sign[i + 1] >= 0 { 1 } else { -1 };
        }
    }
    // second difference: -2 marks a crest at i+1, +2 a trough at i+1
    let mut out = Extrema::default();
    for i in 0..n - 2 {
        match sign[i + 1] as i16 - sign[i] as i16 {
            -2 => out.crests.push(i + 1),
            2 => out.troughs.push(i + 1),
            _ => {}
        }
    }
    out
}

fn width_at_half_height(signal: &[f64], index: usize) -> usize {
    let half = signal[index] / 2.0;
    let mut lo = index;
    while lo > 0 && signal[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = index;
    while hi + 1 < signal.len() && signal[hi + 1] >= half {
        hi += 1;
    }
    hi - lo + 1
}

/// Locates crests of `signal` at least `min_height` tall.
pub fn find_peaks(signal: &[f64], min_height: f64) -> Vec<Peak> {
    find_extrema(signal)
        .crests
        .into_iter()
        .filter(|&i| signal[i] >= min_height)
        .map(|i| Peak {
            index: i,
            height: signal[i],
            width: width_at_half_height(signal, i),
        })
        .collect()
}

/// Detects vehicle entries: low-pass the entry column, then search for peaks.
///
/// Each surviving peak's row index becomes the appearance time k_s of one
/// vehicle; events are ordered by row.
pub fn detect_entries(
    m: &WaterfallMatrix,
    bw: &ButterworthConfig,
    min_height: f64,
    entry_col: usize,
) -> CoreResult<Vec<EntryEvent>> {
    let column = m.column(entry_col)?;
    let filtered = butterworth_lowpass(&column, bw)?;
    Ok(find_peaks(&filtered, min_height)
        .into_iter()
        .enumerate()
        .map(|(id, peak)| EntryEvent {
            vehicle_id: id,
            entry_row: peak.index,
            entry_col,
            peak,
        })
        .collect())
}

/// Brute-force local-maxima reference with the same first-of-plateau
/// convention; used as an independent oracle in tests.
pub fn brute_force_crests(signal: &[f64]) -> Vec<usize> {
    let n = signal.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if signal[i] > signal[i - 1] {
            // scan the plateau starting at i
            let mut j = i;
            while j + 1 < n && signal[j + 1] == signal[i] {
                j += 1;
            }
            if j + 1 < n && signal[j + 1] < signal[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}
