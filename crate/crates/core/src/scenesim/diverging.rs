use rayon::prelude::*;

use super::{
    draw_target, inject_target, normalize, stream, to_sequence, Dataset, DatasetInfo, Gaussian, Purpose, Scenario,
    SimOptions,
};
use crate::error::{invalid, Result};
use crate::kernels::{sample_coeffs, FilterParams, Indexing, Velocity};
use crate::velocity::VelocityField;

/// Half-width `K` of the background-generating kernels (`M = 2K + 1`).
pub const DIVERGING_HALF_WIDTH: usize = 8;
/// Spatial bands of the background-generating kernels.
pub const DIVERGING_BANDS: [usize; 3] = [3, 3, 0];

/// Tangential (counter-clockwise) background velocity at pixel `(x, y)`.
///
/// Speed is `4R(N-1) / (2R² + (N-1)²)` at distance `R` from the center `(N-1)/2`.
pub fn diverging_velocity(x: usize, y: usize, n: usize) -> Velocity {
    let c = (n as f64 - 1.0) / 2.0;
    let (dx, dy) = (x as f64 - c, y as f64 - c);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Velocity::ZERO;
    }
    let span = n as f64 - 1.0;
    let speed = 4.0 * r * span / (2.0 * r * r + span * span);
    Velocity::new(-dy / r * speed, dx / r * speed)
}

/// Background produced by filtering Gaussian noise with a per-pixel velocity-tuned kernel.
pub fn gen_diverging(seed: u64, scenario: Scenario, dims: [usize; 3], opts: &SimOptions) -> Result<Dataset> {
    if !scenario.is_diverging() {
        return Err(invalid(format!("{scenario} is not a diverging scenario")));
    }
    let [nx, ny, nz] = dims;
    if dims.contains(&0) || nx != ny {
        return Err(invalid(format!(
            "diverging scenes need a square, nonempty frame, got {dims:?}"
        )));
    }
    let k = DIVERGING_HALF_WIDTH;
    let m = 2 * k + 1;
    let params = FilterParams::new([m; 3], [1; 3], DIVERGING_BANDS, [Indexing::Centered; 3])?;

    let ext = [nx + 2 * k, ny + 2 * k, nz + 2 * k];
    let mut g = Gaussian::new(stream(seed, Purpose::DivergingNoise));
    let noise: Vec<f64> = (0..ext.iter().product::<usize>()).map(|_| g.sample()).collect();

    // Column (x, y) over all frames; index order y-major so results collect x fastest.
    let columns: Vec<Vec<f64>> = (0..nx * ny)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % nx, i / nx);
            let h = sample_coeffs(&params, [0.0; 3], diverging_velocity(x, y, nx));
            // Reverse x so each tap row is a dot product with a contiguous noise row.
            let mut taps = vec![0.0; m * m * m];
            for sz in 0..m {
                for sy in 0..m {
                    for sx in 0..m {
                        taps[(m - 1 - sx) + m * (sy + m * sz)] = h[[sx, sy, sz]];
                    }
                }
            }
            (0..nz)
                .map(|t| {
                    // Sample at window index s - K reads extended position p + 2K - s.
                    let mut acc = 0.0;
                    for sz in 0..m {
                        let ez = t + 2 * k - sz;
                        for sy in 0..m {
                            let ey = y + 2 * k - sy;
                            let row = &noise[x + ext[0] * (ey + ext[1] * ez)..][..m];
                            let w = &taps[m * (sy + m * sz)..][..m];
                            acc += row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; nx * ny * nz];
    for (i, col) in columns.iter().enumerate() {
        for (t, v) in col.iter().enumerate() {
            values[i + nx * ny * t] = *v;
        }
    }
    normalize(&mut values);
    let mut seq = to_sequence(dims, values);

    let mut truth = VelocityField::empty(dims);
    for t in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                truth.set(x, y, t, diverging_velocity(x, y, nx));
            }
        }
    }
    let target = scenario.has_target().then(|| {
        draw_target(
            seed,
            scenario,
            dims,
            opts.target_amplitude.unwrap_or(scenario.default_amplitude()),
        )
    });
    if let Some(t) = &target {
        seq = inject_target(&seq, t);
    }
    Ok(Dataset {
        seq,
        truth_field: truth,
        info: DatasetInfo {
            scenario,
            seed,
            dims,
            noise_sigma: 0.0,
            background_velocity: None,
            target,
        },
    })
}
