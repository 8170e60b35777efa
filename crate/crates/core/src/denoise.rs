//! Min-max normalization and the combined hard/soft wavelet threshold
//! denoiser.
//!
//! Columns (per-channel time series) are decomposed with an orthogonal
//! Daubechies DWT using symmetric boundary extension, the detail
//! coefficients are shrunk with a mixed hard/soft rule, and the signal is
//! reconstructed. The transform is expansive (each band stores
//! `floor((n + L - 1) / 2)` coefficients), which makes reconstruction exact
//! for arbitrary signal lengths.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};
use crate::waterfall::WaterfallMatrix;

/// Orthogonal wavelet family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Wavelet {
    Haar,
    Db2,
    Db4,
    Db8,
}

impl Wavelet {
    pub fn parse(name: &str) -> CoreResult<Self> {
        match name {
            "haar" | "db1" => Ok(Self::Haar),
            "db2" => Ok(Self::Db2),
            "db4" => Ok(Self::Db4),
            "db8" => Ok(Self::Db8),
            _ => Err(CoreError::UnknownWavelet),
        }
    }

    /// Scaling (reconstruction low-pass) coefficients.
    fn scaling(&self) -> &'static [f64] {
        match self {
            Self::Haar => &[core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2],
            Self::Db2 => &[
                0.48296291314469025,
                0.836516303737469,
                0.22414386804185735,
                -0.12940952255092145,
            ],
            Self::Db4 => &[
                0.23037781330885523,
                0.7148465705525415,
                0.6308807679295904,
                -0.02798376941698385,
                -0.18703481171888114,
                0.030841381835986965,
                0.032883011666982945,
                -0.010597401784997278,
            ],
            Self::Db8 => &[
                0.05441584224308161,
                0.3128715909144659,
                0.6756307362980128,
                0.5853546836548691,
                -0.015829105256023893,
                -0.2840155429624281,
                0.00047248457399797254,
                0.128747426620186,
                -0.01736930100202211,
                -0.04408825393106472,
                0.013981027917015516,
                0.008746094047015655,
                -0.00487035299301066,
                -0.0003917403729959771,
                0.0006754494059985568,
                -0.00011747678400228192,
            ],
        }
    }

    pub fn filter_len(&self) -> usize {
        self.scaling().len()
    }
}

/// Configuration for [`wavelet_denoise`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DenoiseConfig {
    pub wavelet: Wavelet,
    pub levels: usize,
    /// Threshold lambda of the shrink rule.
    pub threshold_lambda: f64,
    /// Hard/soft mix a in [0, 1]: 0 = hard, 1 = soft.
    pub mix_a: f64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            wavelet: Wavelet::Db4,
            levels: 4,
            threshold_lambda: 0.15,
            mix_a: 0.5,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if self.levels < 1 {
            return Err(CoreError::BadDenoiseConfig {
                reason: "levels must be >= 1",
            });
        }
        if !(0.0..=1.0).contains(&self.mix_a) {
            return Err(CoreError::BadDenoiseConfig {
                reason: "mix a must be in [0, 1]",
            });
        }
        if !(self.threshold_lambda >= 0.0) {
            return Err(CoreError::BadDenoiseConfig {
                reason: "threshold lambda must be >= 0",
            });
        }
        Ok(())
    }
}

/// Rescales the whole matrix to [0, 1] with a single global min/max.
pub fn minmax_normalize(m: &WaterfallMatrix) -> CoreResult<WaterfallMatrix> {
    let (lo, hi) = m.value_range();
    if hi <= lo {
        return Err(CoreError::DegenerateRange);
    }
    // divide rather than multiply by a reciprocal so the extremes map to
    // exactly 0 and 1
    let range = hi - lo;
    m.with_values(m.values().iter().map(|&v| (v - lo) / range).collect())
}

/// Mixed hard/soft threshold: dead zone below lambda, constant shrink of
/// `a * lambda` outside it.
pub fn shrink(w: f64, lambda: f64, a: f64) -> f64 {
    if w >= lambda {
        w - a * lambda
    } else if w <= -lambda {
        w + a * lambda
    } else {
        0.0
    }
}

/// Symmetric (half-sample) extension index fold: ... x1 x0 | x0 x1 ... xn-1 | xn-1 ...
fn sym_index(mut idx: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if idx < 0 {
            idx = -1 - idx;
        } else if idx >= n {
            idx = 2 * n - 1 - idx;
        } else {
            return idx as usize;
        }
    }
}

/// Single-level analysis: returns (approximation, detail), each of length
/// `floor((n + L - 1) / 2)`.
fn dwt_step(signal: &[f64], wavelet: Wavelet) -> (Vec<f64>, Vec<f64>) {
    let h = wavelet.scaling();
    let filter_len = h.len();
    let n = signal.len();
    let out_len = (n + filter_len - 1) / 2;
    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (j, &hj) in h.iter().enumerate() {
            // dec_lo[j] = h[L-1-j]; dec_hi[j] = (-1)^(j+1) h[j]
            let x = signal[sym_index(2 * i as isize + 1 - j as isize, n)];
            lo += h[filter_len - 1 - j] * x;
            hi += if j % 2 == 0 { -hj } else { hj } * x;
        }
        approx.push(lo);
        detail.push(hi);
    }
    (approx, detail)
}

/// Single-level synthesis; inverse of [`dwt_step`] up to a trailing sample.
fn idwt_step(approx: &[f64], detail: &[f64], wavelet: Wavelet, out_len: usize) -> Vec<f64> {
    let h = wavelet.scaling();
    let filter_len = h.len();
    let bands = approx.len();
    debug_assert_eq!(detail.len(), bands);
    let full_len = 2 * bands + 2 - filter_len;
    debug_assert!(out_len <= full_len);
    let mut out = vec![0.0; full_len];
    for (i, o) in out.iter_mut().enumerate() {
        let shifted = i as isize + filter_len as isize - 2;
        let j_lo = ((shifted - filter_len as isize + 1 + 1) / 2).max(0) as usize;
        for j in j_lo..bands {
            let t = shifted - 2 * j as isize;
            if t < 0 {
                break;
            }
            let t = t as usize;
            // rec_lo[t] = h[t]; rec_hi[t] = (-1)^(L-t) h[L-1-t]
            let rec_hi = if (filter_len - t) % 2 == 0 {
                h[filter_len - 1 - t]
            } else {
                -h[filter_len - 1 - t]
            };
            *o += approx[j] * h[t] + detail[j] * rec_hi;
        }
    }
    out.truncate(out_len);
    out
}

/// Multi-level decomposition. Returns (final approximation, details from
/// coarsest to finest, per-level input lengths for reconstruction).
pub fn wavedec(
    signal: &[f64],
    wavelet: Wavelet,
    levels: usize,
) -> CoreResult<(Vec<f64>, Vec<Vec<f64>>, Vec<usize>)> {
    let filter_len = wavelet.filter_len();
    let mut approx: Vec<f64> = signal.to_vec();
    let mut details: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut lens: Vec<usize> = Vec::with_capacity(levels);
    for _ in 0..levels {
        if approx.len() < filter_len {
            return Err(CoreError::SignalTooShort {
                len: signal.len(),
                levels,
            });
        }
        lens.push(approx.len());
        let (a, d) = dwt_step(&approx, wavelet);
        details.push(d);
        approx = a;
    }
    details.reverse();
    lens.reverse();
    Ok((approx, details, lens))
}

/// Inverse of [`wavedec`].
pub fn waverec(
    approx: &[f64],
    details: &[Vec<f64>],
    lens: &[usize],
    wavelet: Wavelet,
) -> Vec<f64> {
    let mut current = approx.to_vec();
    for (d, &len) in details.iter().zip(lens) {
        current = idwt_step(&current, d, wavelet, len);
    }
    current
}

/// Denoises one 1-D signal: DWT, shrink all detail bands, reconstruct.
pub fn denoise_signal(signal: &[f64], cfg: &DenoiseConfig) -> CoreResult<Vec<f64>> {
    cfg.validate()?;
    let (approx, mut details, lens) = wavedec(signal, cfg.wavelet, cfg.levels)?;
    for band in &mut details {
        for w in band.iter_mut() {
            *w = shrink(*w, cfg.threshold_lambda, cfg.mix_a);
        }
    }
    Ok(waverec(&approx, &details, &lens, cfg.wavelet))
}

/// Denoises every column (per-channel time series) of a normalized matrix;
/// output is clamped to [0, 1].
pub fn wavelet_denoise(m: &WaterfallMatrix, cfg: &DenoiseConfig) -> CoreResult<WaterfallMatrix> {
    cfg.validate()?;
    let rows = m.rows();
    let cols = m.cols();
    let mut out = vec![0.0f64; rows * cols];
    let mut column = vec![0.0f64; rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = m.at(r, c);
        }
        let denoised = denoise_signal(&column, cfg)?;
        for r in 0..rows {
            out[r * cols + c] = denoised[r].clamp(0.0, 1.0);
        }
    }
    m.with_values(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waterfall::WaterfallMatrix;

    fn mat(values: Vec<f64>, rows: usize, cols: usize) -> WaterfallMatrix {
        WaterfallMatrix::new(values, rows, cols, 1.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn normalize_hand_case() {
        let m = mat(vec![0.0, 5.0, 10.0, 5.0], 2, 2);
        let n = minmax_normalize(&m).unwrap();
        assert_eq!(n.values(), &[0.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn normalize_idempotent_on_unit_range() {
        let m = mat(vec![0.0, 1.0, 1.0, 0.0], 2, 2);
        assert_eq!(minmax_normalize(&m).unwrap(), m);
    }

    #[test]
    fn normalize_rejects_constant() {
        let m = mat(vec![3.0; 4], 2, 2);
        assert!(matches!(minmax_normalize(&m), Err(CoreError::DegenerateRange)));
    }

    #[test]
    fn shrink_dead_zone_and_substitution() {
        assert_eq!(shrink(0.1, 0.15, 0.5), 0.0);
        assert!((shrink(0.2, 0.15, 0.5) - 0.125).abs() < 1e-15);
        assert!((shrink(-0.2, 0.15, 0.5) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn shrink_endpoints_match_soft_and_hard() {
        for &w in &[0.2, 0.9, -0.4, 1.7] {
            // a = 1: soft thresholding
            let soft = if w > 0.0 { w - 0.15 } else { w + 0.15 };
            assert!((shrink(w, 0.15, 1.0) - soft).abs() < 1e-15);
            // a = 0: hard thresholding keeps the value
            assert_eq!(shrink(w, 0.15, 0.0), w);
        }
    }

    #[test]
    fn shrink_is_odd_and_nonexpansive() {
        for i in -40..=40 {
            let w = i as f64 * 0.05;
            for &a in &[0.0, 0.3, 0.5, 1.0] {
                assert!((shrink(-w, 0.15, a) + shrink(w, 0.15, a)).abs() < 1e-15);
                assert!(shrink(w, 0.15, a).abs() <= w.abs() + 1e-15);
            }
        }
    }

    #[test]
    fn shrink_jump_at_lambda() {
        let (lambda, a, eps) = (0.15, 0.5, 1e-9);
        let below = shrink(lambda - eps, lambda, a);
        let above = shrink(lambda + eps, lambda, a);
        assert_eq!(below, 0.0);
        assert!((above - (1.0 - a) * lambda).abs() < 1e-6);
    }

    fn test_signal(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                0.5 + 0.3 * libm::sin(t * 0.11) + 0.1 * libm::cos(t * 0.41 + 1.0)
                    + 0.05 * ((i * 37 % 11) as f64 / 11.0)
            })
            .collect()
    }

    #[test]
    fn perfect_reconstruction_all_wavelets() {
        for &w in &[Wavelet::Haar, Wavelet::Db2, Wavelet::Db4, Wavelet::Db8] {
            for &n in &[17usize, 64, 101, 256] {
                if n < w.filter_len() {
                    continue;
                }
                let x = test_signal(n);
                let (a, d, lens) = wavedec(&x, w, 1).unwrap();
                let y = waverec(&a, &d, &lens, w);
                assert_eq!(y.len(), n);
                for (u, v) in x.iter().zip(&y) {
                    assert!((u - v).abs() < 1e-9, "{w:?} n={n}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn multilevel_zero_lambda_is_identity() {
        let x = test_signal(300);
        let cfg = DenoiseConfig {
            threshold_lambda: 0.0,
            ..DenoiseConfig::default()
        };
        let y = denoise_signal(&x, &cfg).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_short_column() {
        let x = test_signal(8);
        let cfg = DenoiseConfig::default(); // db4 x 4 levels needs more than 8
        assert!(matches!(
            denoise_signal(&x, &cfg),
            Err(CoreError::SignalTooShort { .. })
        ));
    }

    #[test]
    fn pure_noise_variance_drops() {
        // seeded N(0, 0.05) via the forward module's counter noise
        let n = 1024;
        let x: Vec<f64> = (0..n)
            .map(|i| 0.5 + 0.05 * crate::forward::test_noise(7, i))
            .collect();
        let cfg = DenoiseConfig::default();
        let y = denoise_signal(&x, &cfg).unwrap();
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
        };
        assert!(var(&y) < 0.25 * var(&x), "{} !< {}", var(&y), 0.25 * var(&x));
    }

    #[test]
    fn matrix_denoise_clamps_and_keeps_shape() {
        let vals: Vec<f64> = (0..32 * 3).map(|i| ((i * 13 % 17) as f64) / 16.0).collect();
        let m = mat(vals, 32, 3);
        let cfg = DenoiseConfig {
            levels: 2,
            ..DenoiseConfig::default()
        };
        let d = wavelet_denoise(&m, &cfg).unwrap();
        assert_eq!(d.rows(), 32);
        assert_eq!(d.cols(), 3);
        assert!(d.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
