use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use super::bank::FilterBankEntry;
use super::sequence::ImageSequence;
use crate::error::{invalid, Result};
use crate::fft::{bin_of, signed_bin, Fft3, FftScratch};
use crate::grid::Grid3;
use crate::kernels::FilterParams;

/// Local DFT of one delay-indexed analysis block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBlock {
    pub s: Grid3<Complex64>,
    /// Delay-indexing origin `n`; window index `m` reads the sample at `n - m`.
    pub origin: [i64; 3],
}

/// How the frequency-domain prediction sums over temporal bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplyPath {
    /// Every temporal bin.
    #[default]
    FullBand,
    /// Only temporal bins with `|kz| <= bz`, the slow-background approximation.
    Truncated { bz: usize },
}

impl ApplyPath {
    pub fn validate(&self, params: &FilterParams) -> Result<()> {
        if let ApplyPath::Truncated { bz } = *self {
            let mz = params.window()[2];
            if bz > mz / 2 {
                return Err(invalid(format!("truncated band {bz} exceeds Mz/2 = {}", mz / 2)));
            }
        }
        Ok(())
    }

    fn includes(&self, kz: usize, mz: usize) -> bool {
        match *self {
            ApplyPath::FullBand => true,
            ApplyPath::Truncated { bz } => signed_bin(kz, mz).unsigned_abs() as usize <= bz,
        }
    }
}

/// Reusable transform and phase table for extracting block spectra.
#[derive(Debug, Clone)]
pub struct SpectrumPlan {
    params: FilterParams,
    fft: Fft3,
    phase: Vec<Complex64>,
}

/// Per-worker buffers for [`SpectrumPlan::compute`].
#[derive(Default)]
pub struct SpectrumScratch {
    fft: FftScratch,
}

impl SpectrumPlan {
    pub fn new(params: &FilterParams) -> Self {
        let dims = params.window();
        let o = params.window_origin();
        let norm = 1.0 / (params.window_len() as f64).sqrt();
        let phase = Grid3::from_fn(dims, |x, y, z| {
            let k = [x, y, z];
            let arg: f64 = (0..3).map(|d| k[d] as f64 * o[d] as f64 / dims[d] as f64).sum();
            Complex64::from_polar(norm, 2.0 * PI * arg)
        })
        .into_vec();
        Self {
            params: params.clone(),
            fft: Fft3::new(dims, FftDirection::Inverse),
            phase,
        }
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    /// Delay-indexing origin of the block whose lower corner is `corner`.
    pub fn origin_of(&self, corner: [usize; 3]) -> [i64; 3] {
        let m = self.params.window();
        let o = self.params.window_origin();
        std::array::from_fn(|d| (corner[d] + m[d] - 1) as i64 + o[d])
    }

    fn corner_of(&self, origin: [i64; 3]) -> [i64; 3] {
        let m = self.params.window();
        let o = self.params.window_origin();
        std::array::from_fn(|d| origin[d] - o[d] - (m[d] as i64 - 1))
    }

    /// Spectrum of the block with lower corner `corner`, which must lie in bounds.
    pub fn compute(&self, seq: &ImageSequence, corner: [usize; 3], scratch: &mut SpectrumScratch) -> SpectrumBlock {
        let dims = self.params.window();
        let top = std::array::from_fn::<usize, 3, _>(|d| corner[d] + dims[d] - 1);
        let mut buf = Vec::with_capacity(self.params.window_len());
        for sz in 0..dims[2] {
            for sy in 0..dims[1] {
                for sx in 0..dims[0] {
                    let v = seq.get(top[0] - sx, top[1] - sy, top[2] - sz);
                    buf.push(Complex64::new(v as f64, 0.0));
                }
            }
        }
        self.fft.process(&mut buf, &mut scratch.fft);
        for (b, p) in buf.iter_mut().zip(&self.phase) {
            *b *= p;
        }
        SpectrumBlock {
            s: Grid3::from_vec(dims, buf).expect("block shape"),
            origin: self.origin_of(corner),
        }
    }
}

/// Spectrum of the block with delay-indexing origin `origin`.
pub fn local_spectrum(seq: &ImageSequence, origin: [i64; 3], params: &FilterParams) -> Result<SpectrumBlock> {
    let plan = SpectrumPlan::new(params);
    let corner = plan.corner_of(origin);
    let dims = seq.dims();
    let m = params.window();
    for d in 0..3 {
        if corner[d] < 0 || corner[d] as usize + m[d] > dims[d] {
            return Err(invalid(format!(
                "block at origin {origin:?} leaves the sequence {dims:?}"
            )));
        }
    }
    let c = corner.map(|v| v as usize);
    Ok(plan.compute(seq, c, &mut SpectrumScratch::default()))
}

/// Predicted background on the synthesis block of `entry`.
///
/// Values are ordered `ix + Msx·(iy + Msy·iz)` for synthesis index
/// `m̂ = entry.msyn_origin + (ix, iy, iz)`, i.e. the sample at `n - m̂`.
pub fn synthesize(spec: &SpectrumBlock, entry: &FilterBankEntry, path: ApplyPath) -> Vec<f64> {
    let params = &entry.params;
    let dims = params.window();
    assert_eq!(spec.s.dims(), dims, "spectrum and filter dimensions differ");
    let [bx, by, _] = params.bands().map(|b| b as i64);
    let (nbx, nby) = ((2 * bx + 1) as usize, (2 * by + 1) as usize);

    // Temporal contraction on the in-band spatial bins.
    let mut u = vec![Complex64::default(); nbx * nby];
    for (jy, ky) in (-by..=by).enumerate() {
        let sy = bin_of(ky, dims[1]);
        for (jx, kx) in (-bx..=bx).enumerate() {
            let sx = bin_of(kx, dims[0]);
            let mut acc = Complex64::default();
            for sz in 0..dims[2] {
                if path.includes(sz, dims[2]) {
                    acc += entry.freq[[sx, sy, sz]] * spec.s[[sx, sy, sz]];
                }
            }
            u[jy * nbx + jx] = acc;
        }
    }

    let [msx, msy, msz] = params.synthesis();
    let v = entry.velocity;
    let ramp = |k: i64, m: usize, shift: f64| Complex64::cis(-2.0 * PI * k as f64 * shift / m as f64);
    let mut out = Vec::with_capacity(msx * msy * msz);
    let mut row = vec![Complex64::default(); nby];
    for iz in 0..msz {
        let dz = iz as f64;
        let py: Vec<Vec<Complex64>> = (0..msy)
            .map(|iy| (-by..=by).map(|ky| ramp(ky, dims[1], iy as f64 - v.vy * dz)).collect())
            .collect();
        for py_row in &py {
            for ix in 0..msx {
                let sx = ix as f64 - v.vx * dz;
                for (jy, r) in row.iter_mut().enumerate() {
                    *r = (-bx..=bx)
                        .enumerate()
                        .map(|(jx, kx)| ramp(kx, dims[0], sx) * u[jy * nbx + jx])
                        .sum();
                }
                let val: Complex64 = row.iter().zip(py_row).map(|(r, p)| r * p).sum();
                out.push(val.re);
            }
        }
    }
    out
}
