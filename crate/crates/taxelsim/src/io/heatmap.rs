//! Heat-map export: a signal frame over a grid patch rendered as a binary
//! PGM (P5, maxval 255) image, byte-deterministic for a given frame and
//! scaling.

use crate::core::{SignalFrame, SkinPatch};

/// How frame values map to gray levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// Use the frame's own min/max; an all-equal frame maps to black.
    MinMax,
    /// Fixed range; values clamp to [lo, hi].
    Fixed { lo: f64, hi: f64 },
}

/// Heat-map export failure.
#[derive(Debug, Clone, thiserror::Error)]
pub enum HeatmapError {
    #[error("patch `{0}` has no grid layout")]
    NoGridLayout(String),
    #[error("fixed scaling needs lo < hi, got [{lo}, {hi}]")]
    BadRange { lo: f64, hi: f64 },
    #[error("frame does not match patch `{patch}`: {detail}")]
    FrameMismatch { patch: String, detail: String },
}

/// Render `frame` over `patch`'s grid as binary PGM bytes.
///
/// Pixel (row, col) = round(255 · clamp((v - lo)/(hi - lo), 0, 1)); the image
/// is `cols` wide and `rows` tall. Grid cells without a taxel render black.
pub fn export_heatmap(
    frame: &SignalFrame,
    patch: &SkinPatch,
    scaling: Scaling,
) -> Result<Vec<u8>, HeatmapError> {
    let Some((rows, cols)) = patch.grid_dims else {
        return Err(HeatmapError::NoGridLayout(patch.id.clone()));
    };
    if frame.patch_id != patch.id {
        return Err(HeatmapError::FrameMismatch {
            patch: patch.id.clone(),
            detail: format!("frame belongs to `{}`", frame.patch_id),
        });
    }
    if frame.values.len() != patch.taxels.len() {
        return Err(HeatmapError::FrameMismatch {
            patch: patch.id.clone(),
            detail: format!(
                "frame has {} values, patch has {} taxels",
                frame.values.len(),
                patch.taxels.len()
            ),
        });
    }

    let (lo, hi) = match scaling {
        Scaling::Fixed { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(HeatmapError::BadRange { lo, hi });
            }
            (lo, hi)
        }
        Scaling::MinMax => {
            let lo = frame.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = frame
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let span = hi - lo;

    let mut pixels = vec![0u8; rows * cols];
    for (taxel, &v) in patch.taxels.iter().zip(&frame.values) {
        let Some((r, c)) = taxel.grid_index else {
            return Err(HeatmapError::FrameMismatch {
                patch: patch.id.clone(),
                detail: "grid patch has a taxel without a grid index".into(),
            });
        };
        // span == 0 covers the MinMax all-equal frame: everything black.
        let level = if span > 0.0 {
            (255.0 * ((v - lo) / span).clamp(0.0, 1.0)).round() as u8
        } else {
            0
        };
        pixels[r * cols + c] = level;
    }

    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}
