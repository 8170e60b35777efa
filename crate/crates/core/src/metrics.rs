//! MSE / PSNR / SSIM quality indices for comparing two waterfall matrices.

use crate::error::{CoreError, CoreResult};
use crate::waterfall::WaterfallMatrix;

/// Reconstruction quality of a test matrix against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QualityReport {
    pub mse: f64,
    /// Decibels; +inf when the matrices are identical.
    pub psnr_db: f64,
    /// Structural similarity in [-1, 1], single global window.
    pub ssim: f64,
}

/// Computes MSE, PSNR and global-window SSIM.
///
/// `peak_v` is the peak signal value (1.0 for normalized data). SSIM uses
/// unit exponents and stabilizers C1 = (0.01 v)^2, C2 = (0.03 v)^2,
/// C3 = C2 / 2.
pub fn quality_metrics(
    reference: &WaterfallMatrix,
    test: &WaterfallMatrix,
    peak_v: f64,
) -> CoreResult<QualityReport> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(CoreError::ShapeMismatch {
            rows_a: reference.rows(),
            cols_a: reference.cols(),
            rows_b: test.rows(),
            cols_b: test.cols(),
        });
    }
    let n = reference.values().len() as f64;
    let mse = reference
        .values()
        .iter()
        .zip(test.values())
        .map(|(y, t)| (y - t) * (y - t))
        .sum::<f64>()
        / n;
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(peak_v * peak_v / mse)
    };

    let mean = |m: &WaterfallMatrix| m.values().iter().sum::<f64>() / n;
    let mu_y = mean(reference);
    let mu_t = mean(test);
    let mut var_y = 0.0;
    let mut var_t = 0.0;
    let mut cov = 0.0;
    for (y, t) in reference.values().iter().zip(test.values()) {
        var_y += (y - mu_y) * (y - mu_y);
        var_t += (t - mu_t) * (t - mu_t);
        cov += (y - mu_y) * (t - mu_t);
    }
    var_y /= n;
    var_t /= n;
    cov /= n;
    let c1 = (0.01 * peak_v) * (0.01 * peak_v);
    let c2 = (0.03 * peak_v) * (0.03 * peak_v);
    let c3 = c2 / 2.0;
    let sd_y = libm::sqrt(var_y);
    let sd_t = libm::sqrt(var_t);
    let luminance = (2.0 * mu_y * mu_t + c1) / (mu_y * mu_y + mu_t * mu_t + c1);
    let contrast = (2.0 * sd_y * sd_t + c2) / (var_y + var_t + c2);
    let structure = (cov + c3) / (sd_y * sd_t + c3);
    Ok(QualityReport {
        mse,
        psnr_db,
        ssim: luminance * contrast * structure,
    })
}
