//! Separable multi-dimensional FFT on top of `rustfft`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// A planned 3-D transform over a fixed shape (x fastest). Unnormalized.
#[derive(Clone)]
pub struct Fft3 {
    dims: [usize; 3],
    plans: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

/// Reusable work buffers for [`Fft3::process`].
#[derive(Debug, Default)]
pub struct FftScratch {
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(dims: [usize; 3], direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        let plans = dims.map(|n| planner.plan_fft(n, direction));
        Self { dims, plans }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn process(&self, data: &mut [Complex64], work: &mut FftScratch) {
        let [nx, ny, nz] = self.dims;
        assert_eq!(data.len(), nx * ny * nz);
        let need = self
            .plans
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        if work.scratch.len() < need {
            work.scratch.resize(need, Complex64::default());
        }
        if nx > 1 {
            self.plans[0].process_with_scratch(data, &mut work.scratch[..self.plans[0].get_inplace_scratch_len()]);
        }
        if ny > 1 {
            work.line.resize(ny, Complex64::default());
            for z in 0..nz {
                for x in 0..nx {
                    let base = x + nx * ny * z;
                    for y in 0..ny {
                        work.line[y] = data[base + nx * y];
                    }
                    let s = self.plans[1].get_inplace_scratch_len();
                    self.plans[1].process_with_scratch(&mut work.line, &mut work.scratch[..s]);
                    for y in 0..ny {
                        data[base + nx * y] = work.line[y];
                    }
                }
            }
        }
        if nz > 1 {
            work.line.resize(nz, Complex64::default());
            let plane = nx * ny;
            for xy in 0..plane {
                for z in 0..nz {
                    work.line[z] = data[xy + plane * z];
                }
                let s = self.plans[2].get_inplace_scratch_len();
                self.plans[2].process_with_scratch(&mut work.line, &mut work.scratch[..s]);
                for z in 0..nz {
                    data[xy + plane * z] = work.line[z];
                }
            }
        }
    }
}

/// Maps an index modulo `n` to its signed representative in `(-n/2, n/2]`.
#[inline]
pub fn signed_bin(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if 2 * k > n {
        k - n
    } else {
        k
    }
}

/// Storage bin for a signed frequency index.
#[inline]
pub fn bin_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
