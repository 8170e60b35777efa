//! Waterfall rendering to binary PPM with optional trajectory overlays and
//! a sidecar legend JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use das_core::WaterfallMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    Grayscale,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderSpec {
    pub colormap: Colormap,
    pub overlay: bool,
    /// Integer upscale factor; each matrix cell becomes a scale x scale block.
    pub scale: usize,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            colormap: Colormap::Grayscale,
            overlay: true,
            scale: 1,
        }
    }
}

/// Distinct overlay colors, cycled by trajectory index.
pub const PALETTE: [[u8; 3]; 6] = [
    [230, 26, 28],
    [55, 126, 184],
    [77, 175, 74],
    [152, 78, 163],
    [255, 127, 0],
    [166, 86, 40],
];

fn map_color(v: f64, colormap: Colormap) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    match colormap {
        Colormap::Grayscale => {
            let g = (255.0 * v).round() as u8;
            [g, g, g]
        }
        Colormap::Heat => {
            // black -> red -> yellow -> white ramp
            let r = (255.0 * (3.0 * v).min(1.0)).round() as u8;
            let g = (255.0 * (3.0 * v - 1.0).clamp(0.0, 1.0)).round() as u8;
            let b = (255.0 * (3.0 * v - 2.0).clamp(0.0, 1.0)).round() as u8;
            [r, g, b]
        }
    }
}

pub fn legend_path(out: &Path) -> PathBuf {
    out.with_extension("legend.json")
}

/// Renders the matrix as a binary PPM (rows as image rows, columns as image
/// columns) and writes `<out stem>.legend.json` describing any overlays.
pub fn render_ppm(
    m: &WaterfallMatrix,
    overlays: Option<&[(usize, Vec<(usize, usize)>)]>,
    spec: &RenderSpec,
    out: &Path,
) -> Result<()> {
    if spec.scale == 0 {
        bail!("zero-size render: scale must be >= 1");
    }
    let (h, w) = (m.rows() * spec.scale, m.cols() * spec.scale);
    let mut pixels = vec![0u8; 3 * h * w];
    for row in 0..m.rows() {
        for col in 0..m.cols() {
            let c = map_color(m.at(row, col), spec.colormap);
            paint_block(&mut pixels, w, row, col, spec.scale, c);
        }
    }
    let mut legend = Vec::new();
    if spec.overlay {
        if let Some(overlays) = overlays {
            for (i, (vehicle_id, points)) in overlays.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                legend.push(serde_json::json!({
                    "vehicle_id": vehicle_id,
                    "color": color,
                }));
                for pair in points.windows(2) {
                    draw_segment(&mut pixels, w, m, pair[0], pair[1], spec.scale, color);
                }
                if points.len() == 1 {
                    let (r, c) = points[0];
                    if r < m.rows() && c < m.cols() {
                        paint_block(&mut pixels, w, r, c, spec.scale, color);
                    }
                }
            }
        }
    }
    let mut buf = format!("P6\n{w} {h}\n255\n").into_bytes();
    buf.extend_from_slice(&pixels);
    fs::write(out, buf).with_context(|| format!("writing {}", out.display()))?;
    let doc = serde_json::json!({
        "schema_version": 1,
        "colormap": spec.colormap,
        "scale": spec.scale,
        "overlays": legend,
    });
    fs::write(legend_path(out), serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", legend_path(out).display()))
}

fn paint_block(pixels: &mut [u8], w: usize, row: usize, col: usize, scale: usize, c: [u8; 3]) {
    for dy in 0..scale {
        for dx in 0..scale {
            let idx = 3 * ((row * scale + dy) * w + col * scale + dx);
            pixels[idx..idx + 3].copy_from_slice(&c);
        }
    }
}

/// 1-pixel (pre-scale) Bresenham segment between consecutive key points.
fn draw_segment(
    pixels: &mut [u8],
    w: usize,
    m: &WaterfallMatrix,
    a: (usize, usize),
    b: (usize, usize),
    scale: usize,
    c: [u8; 3],
) {
    let (mut r0, mut c0) = (a.0 as isize, a.1 as isize);
    let (r1, c1) = (b.0 as isize, b.1 as isize);
    let dr = (r1 - r0).abs();
    let dc = (c1 - c0).abs();
    let sr = if r0 < r1 { 1 } else { -1 };
    let sc = if c0 < c1 { 1 } else { -1 };
    let mut err = dc - dr;
    loop {
        if r0 >= 0 && c0 >= 0 && (r0 as usize) < m.rows() && (c0 as usize) < m.cols() {
            paint_block(pixels, w, r0 as usize, c0 as usize, scale, c);
        }
        if r0 == r1 && c0 == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c0 += sc;
        }
        if e2 < dc {
            err += dc;
            r0 += sr;
        }
    }
}
