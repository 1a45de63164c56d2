use rayon::prelude::*;

use super::VelocityField;
use crate::engine::ImageSequence;
use crate::error::{invalid, Result};
use crate::kernels::Velocity;

const DERIV: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const RADIUS: usize = 2;
const CONDITION: f64 = 1e-6;

fn blur_taps() -> [f64; 5] {
    let mut t = [0.0; 5];
    for (i, w) in t.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        *w = (-0.5 * d * d).exp();
    }
    let s: f64 = t.iter().sum();
    t.map(|w| w / s)
}

/// Separable 5-tap filter of a frame; samples without full support are left at 0.
fn filter_frame(src: &[f64], nx: usize, ny: usize, taps: &[f64; 5], along_x: bool) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let (c, n) = if along_x { (x, nx) } else { (y, ny) };
            if c < RADIUS || c + RADIUS >= n {
                continue;
            }
            out[x + nx * y] = taps
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let (sx, sy) = if along_x {
                        (x + i - RADIUS, y)
                    } else {
                        (x, y + i - RADIUS)
                    };
                    w * src[sx + nx * sy]
                })
                .sum();
        }
    }
    out
}

/// Lucas–Kanade least-squares flow with derivative filters.
///
/// Frames are blurred by a unit-sigma Gaussian, differentiated with 5-point
/// central differences in x, y and t, and the normal equations are summed over a
/// 5×5 window. Pixels whose normal matrix is ill-conditioned, the first and last
/// two frames, and spatial borders without full stencil support are masked.
pub fn lkd_flow(seq: &ImageSequence) -> Result<VelocityField> {
    let [nx, ny, nz] = seq.dims();
    if nz < 5 {
        return Err(invalid(format!("derivative flow needs at least 5 frames, got {nz}")));
    }
    let taps = blur_taps();
    let blurred: Vec<Vec<f64>> = (0..nz)
        .into_par_iter()
        .map(|z| {
            let f: Vec<f64> = seq.frame(z).iter().map(|&v| v as f64).collect();
            let bx = filter_frame(&f, nx, ny, &taps, true);
            filter_frame(&bx, nx, ny, &taps, false)
        })
        .collect();

    let planes: Vec<(usize, Vec<Option<Velocity>>)> = (RADIUS..nz.saturating_sub(RADIUS))
        .into_par_iter()
        .map(|z| (z, frame_flow(&blurred, z, nx, ny)))
        .collect();

    let mut field = VelocityField::empty([nx, ny, nz]);
    for (z, plane) in planes {
        for (i, v) in plane.into_iter().enumerate() {
            if let Some(v) = v {
                field.set(i % nx, i / nx, z, v);
            }
        }
    }
    Ok(field)
}

fn frame_flow(blurred: &[Vec<f64>], z: usize, nx: usize, ny: usize) -> Vec<Option<Velocity>> {
    let b = &blurred[z];
    let ix = filter_frame(b, nx, ny, &DERIV, true);
    let iy = filter_frame(b, nx, ny, &DERIV, false);
    let it: Vec<f64> = (0..nx * ny)
        .map(|i| {
            DERIV
                .iter()
                .enumerate()
                .map(|(k, w)| w * blurred[z + k - RADIUS][i])
                .sum()
        })
        .collect();

    // Valid derivatives need blur support plus derivative support.
    let lo = 2 * RADIUS;
    let ok = |c: usize, n: usize| c >= lo && c + lo < n;
    // Window sums need every contributing derivative to be valid.
    let inner = |c: usize, n: usize| c >= lo + RADIUS && c + lo + RADIUS < n;

    let mut out = vec![None; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            if !(inner(x, nx) && inner(y, ny)) {
                continue;
            }
            let (mut sxx, mut sxy, mut syy, mut sxt, mut syt) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for wy in y - RADIUS..=y + RADIUS {
                for wx in x - RADIUS..=x + RADIUS {
                    debug_assert!(ok(wx, nx) && ok(wy, ny));
                    let i = wx + nx * wy;
                    sxx += ix[i] * ix[i];
                    sxy += ix[i] * iy[i];
                    syy += iy[i] * iy[i];
                    sxt += ix[i] * it[i];
                    syt += iy[i] * it[i];
                }
            }
            let tr = sxx + syy;
            let det = sxx * syy - sxy * sxy;
            let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
            let lmax = 0.5 * (tr + disc);
            let lmin = 0.5 * (tr - disc);
            if lmax <= 0.0 || lmin < CONDITION * lmax || det == 0.0 {
                continue;
            }
            let vx = -(syy * sxt - sxy * syt) / det;
            let vy = -(sxx * syt - sxy * sxt) / det;
            out[x + nx * y] = Some(Velocity::new(vx, vy));
        }
    }
    out
}
