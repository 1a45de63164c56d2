//! Local background motion estimation.

mod field;
mod lkd;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

pub use field::VelocityField;
pub use lkd::lkd_flow;

use crate::engine::{Hypothesis, SpectrumBlock, VelocityGrid};
use crate::error::{invalid, Result};
use crate::fft::{bin_of, signed_bin, Fft3, FftScratch};
use crate::grid::Grid3;

/// Values closer than this fraction of the slice maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-10;

pub fn power_spectrum(spec: &SpectrumBlock) -> Grid3<f64> {
    let data = spec.s.iter().map(|s| s.norm_sqr()).collect();
    Grid3::from_vec(spec.s.dims(), data).expect("shape preserved")
}

/// Spatial bins included in a correlation sum, as (storage index, signed frequency).
fn bins(n: usize, band: Option<usize>) -> Vec<(usize, i64)> {
    match band {
        Some(b) => (-(b as i64)..=b as i64).map(|k| (bin_of(k, n), k)).collect(),
        None => (0..n).map(|k| (k, signed_bin(k, n))).collect(),
    }
}

/// Autocorrelation `R(l)` at a possibly fractional displacement, from the power spectrum.
pub fn autocorr_at(p: &Grid3<f64>, l: [f64; 3]) -> f64 {
    autocorr_at_band(p, l, None)
}

/// As [`autocorr_at`], with the spatial sum optionally limited to `|kx| <= bx`, `|ky| <= by`.
pub fn autocorr_at_band(p: &Grid3<f64>, l: [f64; 3], band: Option<[usize; 2]>) -> f64 {
    let dims = p.dims();
    let bx = bins(dims[0], band.map(|b| b[0]));
    let by = bins(dims[1], band.map(|b| b[1]));
    let bz = bins(dims[2], None);
    let mut acc = 0.0;
    for &(sz, kz) in &bz {
        for &(sy, ky) in &by {
            for &(sx, kx) in &bx {
                let arg = kx as f64 * l[0] / dims[0] as f64
                    + ky as f64 * l[1] / dims[1] as f64
                    + kz as f64 * l[2] / dims[2] as f64;
                acc += p[[sx, sy, sz]] * (2.0 * PI * arg).cos();
            }
        }
    }
    acc
}

/// Correlation values over a velocity grid at temporal lag `lz`, in hypothesis order.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrSlice {
    pub grid: VelocityGrid,
    pub lz: usize,
    pub values: Vec<f64>,
}

impl AutocorrSlice {
    pub fn argmax(&self) -> Hypothesis {
        argmax_hypothesis(&self.grid, &self.values)
    }
}

/// Evaluates `R(v·lz, lz)` for every hypothesis `v` of `grid`.
pub fn autocorr_slice(p: &Grid3<f64>, grid: &VelocityGrid, lz: usize, band: Option<[usize; 2]>) -> AutocorrSlice {
    let dims = p.dims();
    let bx = bins(dims[0], band.map(|b| b[0]));
    let by = bins(dims[1], band.map(|b| b[1]));

    let tz: Vec<Complex64> = (0..dims[2])
        .map(|k| Complex64::cis(2.0 * PI * (signed_bin(k, dims[2]) * lz as i64) as f64 / dims[2] as f64))
        .collect();
    let mut pz = vec![Complex64::default(); bx.len() * by.len()];
    for (jy, &(sy, _)) in by.iter().enumerate() {
        for (jx, &(sx, _)) in bx.iter().enumerate() {
            pz[jy * bx.len() + jx] = (0..dims[2]).map(|sz| tz[sz] * p[[sx, sy, sz]]).sum();
        }
    }
    let values = correlate_grid(&pz, &bx, &by, dims, grid, lz as f64);
    AutocorrSlice {
        grid: *grid,
        lz,
        values,
    }
}

/// `Re Σ c(kx,ky)·exp(j2π(kx·lx/Mx + ky·ly/My))` at `l = v·scale` for each grid hypothesis.
fn correlate_grid(
    c: &[Complex64],
    bx: &[(usize, i64)],
    by: &[(usize, i64)],
    dims: [usize; 3],
    grid: &VelocityGrid,
    scale: f64,
) -> Vec<f64> {
    let l = grid.lxy as i64;
    let lags: Vec<f64> = (-l..=l).map(|i| i as f64 * scale / grid.lz as f64).collect();
    let table = |b: &[(usize, i64)], n: usize| -> Vec<Vec<Complex64>> {
        lags.iter()
            .map(|&lag| {
                b.iter()
                    .map(|&(_, k)| Complex64::cis(2.0 * PI * k as f64 * lag / n as f64))
                    .collect()
            })
            .collect()
    };
    let ex = table(bx, dims[0]);
    let ey = table(by, dims[1]);
    // a[lx][ky] = Σ_kx ex·c
    let a: Vec<Vec<Complex64>> = ex
        .iter()
        .map(|e| {
            (0..by.len())
                .map(|jy| {
                    e.iter()
                        .zip(&c[jy * bx.len()..(jy + 1) * bx.len()])
                        .map(|(p, q)| p * q)
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for e in &ey {
        for row in &a {
            let v: Complex64 = e.iter().zip(row).map(|(p, q)| p * q).sum();
            values.push(v.re);
        }
    }
    values
}

/// Best hypothesis for `values` in grid order: near-ties go to the lowest
/// speed, then the lowest `ly`, then the lowest `lx`.
pub fn argmax_hypothesis(grid: &VelocityGrid, values: &[f64]) -> Hypothesis {
    assert_eq!(values.len(), grid.len());
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_TOLERANCE * scale;
    grid.hypotheses()
        .zip(values)
        .filter(|(_, v)| **v >= best - tol)
        .map(|(h, _)| h)
        .min_by_key(|h| (h.lx * h.lx + h.ly * h.ly, h.ly, h.lx))
        .expect("grid is never empty")
}

/// Velocity hypothesis maximizing the `lz = 1` autocorrelation slice of the block.
pub fn estimate_velocity_3d(spec: &SpectrumBlock, grid: &VelocityGrid, band: Option<[usize; 2]>) -> Hypothesis {
    autocorr_slice(&power_spectrum(spec), grid, 1, band).argmax()
}

/// Block-matching estimator between consecutive frames via the cross-power spectrum.
#[derive(Debug, Clone)]
pub struct CrossCorrelator {
    dims: [usize; 2],
    grid: VelocityGrid,
    band: Option<[usize; 2]>,
    fft: Fft3,
}

impl CrossCorrelator {
    pub fn new(dims: [usize; 2], grid: VelocityGrid, band: Option<[usize; 2]>) -> Self {
        Self {
            dims,
            grid,
            band,
            fft: Fft3::new([dims[0], dims[1], 1], FftDirection::Forward),
        }
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    /// Correlation at each hypothesis; frames are x-fastest in absolute position order.
    pub fn slice(&self, now: &[f64], prev: &[f64], scratch: &mut FftScratch) -> Result<Vec<f64>> {
        let n = self.dims[0] * self.dims[1];
        if now.len() != n || prev.len() != n {
            return Err(invalid(format!(
                "frames of {} and {} samples for a {}x{} block",
                now.len(),
                prev.len(),
                self.dims[0],
                self.dims[1]
            )));
        }
        let transform = |f: &[f64], scratch: &mut FftScratch| {
            let mut b: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.fft.process(&mut b, scratch);
            b
        };
        let a = transform(now, scratch);
        let b = transform(prev, scratch);
        let dims3 = [self.dims[0], self.dims[1], 1];
        let bx = bins(self.dims[0], self.band.map(|b| b[0]));
        let by = bins(self.dims[1], self.band.map(|b| b[1]));
        let mut c = vec![Complex64::default(); bx.len() * by.len()];
        for (jy, &(sy, _)) in by.iter().enumerate() {
            for (jx, &(sx, _)) in bx.iter().enumerate() {
                let i = sx + self.dims[0] * sy;
                c[jy * bx.len() + jx] = a[i] * b[i].conj();
            }
        }
        Ok(correlate_grid(&c, &bx, &by, dims3, &self.grid, 1.0))
    }

    pub fn estimate(&self, now: &[f64], prev: &[f64], scratch: &mut FftScratch) -> Result<Hypothesis> {
        Ok(argmax_hypothesis(&self.grid, &self.slice(now, prev, scratch)?))
    }
}

/// Displacement from `frame_prev` to `frame_now` over the grid, full spatial band.
pub fn estimate_velocity_2d(
    frame_now: &Grid3<f64>,
    frame_prev: &Grid3<f64>,
    grid: &VelocityGrid,
) -> Result<Hypothesis> {
    let [nx, ny, nz] = frame_now.dims();
    if frame_prev.dims() != frame_now.dims() || nz != 1 {
        return Err(invalid(format!(
            "expected two single frames of equal size, got {:?} and {:?}",
            frame_now.dims(),
            frame_prev.dims()
        )));
    }
    CrossCorrelator::new([nx, ny], *grid, None).estimate(
        frame_now.as_slice(),
        frame_prev.as_slice(),
        &mut FftScratch::default(),
    )
}
