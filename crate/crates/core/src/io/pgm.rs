use std::path::Path;

use crate::engine::ImageSequence;
use crate::error::{invalid, Result};

/// Intensity mapping onto 0..=255.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PgmScaling {
    /// Frame minimum to 0, maximum to 255; a constant frame maps to 128.
    MinMax,
    /// `lo` to 0 and `hi` to 255, clamped outside.
    Fixed { lo: f32, hi: f32 },
}

pub fn scale_pixel(v: f32, lo: f32, hi: f32) -> u8 {
    if hi <= lo {
        return 128;
    }
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (t * 255.0).round() as u8
}

/// Binary (P5) 8-bit grayscale image of one frame.
pub fn export_pgm(seq: &ImageSequence, frame: usize, scaling: PgmScaling) -> Result<Vec<u8>> {
    let [nx, ny, nz] = seq.dims();
    if frame >= nz {
        return Err(invalid(format!("frame {frame} out of range for {nz} frames")));
    }
    let px = seq.frame(frame);
    let (lo, hi) = match scaling {
        PgmScaling::MinMax => px
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
        PgmScaling::Fixed { lo, hi } => (lo, hi),
    };
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.extend(px.iter().map(|&v| scale_pixel(v, lo, hi)));
    Ok(out)
}

pub fn write_pgm(path: impl AsRef<Path>, seq: &ImageSequence, frame: usize, scaling: PgmScaling) -> Result<()> {
    super::binary::write_atomic(path.as_ref(), &export_pgm(seq, frame, scaling)?)
}
