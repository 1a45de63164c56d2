//! Block-wise prediction-error whitening of image sequences.

mod bank;
mod layout;
mod sequence;
mod spectrum;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bank::{build_bank, FilterBank, FilterBankEntry, Hypothesis, SynthesisSet, VelocityGrid};
pub use layout::{make_layout, BlockLayout};
pub use sequence::ImageSequence;
pub use spectrum::{local_spectrum, synthesize, ApplyPath, SpectrumBlock, SpectrumPlan, SpectrumScratch};

use crate::error::{invalid, Error, Result};
use crate::fft::FftScratch;
use crate::kernels::{FilterParams, Velocity};
use crate::velocity::{estimate_velocity_3d, CrossCorrelator, VelocityField};

/// Velocity estimator driving filter selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Autocorrelation slice of the 3-D analysis block.
    #[serde(rename = "3d")]
    ThreeD,
    /// Cross-correlation of the block in the current and previous frame.
    #[serde(rename = "2d")]
    TwoD,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "3d" => Ok(Mode::ThreeD),
            "2d" => Ok(Mode::TwoD),
            _ => Err(invalid(format!("unknown mode '{s}', expected 3d or 2d"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::ThreeD => "3d",
            Mode::TwoD => "2d",
        })
    }
}

/// Where per-block velocity hypotheses come from.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocitySource {
    Estimate,
    Fixed(Hypothesis),
    /// One hypothesis per block in [`BlockLayout::corners`] order.
    PerBlock(Vec<Hypothesis>),
}

#[derive(Debug, Clone)]
pub struct WhitenOutput {
    pub residual: ImageSequence,
    /// Selected velocity broadcast over each synthesis block.
    pub field: VelocityField,
    /// Pixels written by a synthesis block.
    pub covered: Vec<bool>,
    pub layout: BlockLayout,
    pub hypotheses: Vec<Hypothesis>,
}

/// A filter bank bound to its layout-independent machinery.
#[derive(Debug, Clone)]
pub struct Whitener {
    params: FilterParams,
    grid: VelocityGrid,
    bank: FilterBank,
    mode: Mode,
    path: ApplyPath,
    plan: SpectrumPlan,
}

struct BlockResult {
    hypothesis: Hypothesis,
    valid: bool,
    prediction: Vec<f64>,
}

impl Whitener {
    pub fn new(params: &FilterParams, grid: VelocityGrid, mode: Mode, path: ApplyPath) -> Result<Self> {
        match mode {
            Mode::TwoD if params.window()[2] != 1 => {
                return Err(invalid("2d mode requires a single-frame window (Mz = 1)"));
            }
            Mode::ThreeD if params.window()[2] < 2 => {
                return Err(invalid("3d mode requires a multi-frame window (Mz >= 2)"));
            }
            _ => {}
        }
        path.validate(params)?;
        Ok(Self {
            params: params.clone(),
            grid,
            bank: build_bank(params, grid, SynthesisSet::centered(params)),
            mode,
            path,
            plan: SpectrumPlan::new(params),
        })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn run(&self, seq: &ImageSequence, source: VelocitySource) -> Result<WhitenOutput> {
        let dims = seq.dims();
        let layout = make_layout(dims, &self.params)?;
        let corners = layout.corners();
        if let VelocitySource::PerBlock(h) = &source {
            if h.len() != corners.len() {
                return Err(invalid(format!("{} hypotheses for {} blocks", h.len(), corners.len())));
            }
        }
        let check = |h: Hypothesis| -> Result<Hypothesis> {
            let l = self.grid.lxy as i64;
            if h.lx.abs() > l || h.ly.abs() > l {
                return Err(invalid(format!("hypothesis {h:?} lies outside the velocity grid")));
            }
            Ok(h)
        };
        match &source {
            VelocitySource::Fixed(h) => {
                check(*h)?;
            }
            VelocitySource::PerBlock(hs) => {
                for h in hs {
                    check(*h)?;
                }
            }
            VelocitySource::Estimate => {}
        }

        let [mx, my, _] = self.params.window();
        let band = {
            let b = self.params.bands();
            Some([b[0], b[1]])
        };
        let xcorr = CrossCorrelator::new([mx, my], self.grid, band);

        let results: Vec<BlockResult> = corners
            .par_iter()
            .enumerate()
            .map_init(
                || (SpectrumScratch::default(), FftScratch::default()),
                |(ss, fs), (b, &corner)| {
                    let spec = self.plan.compute(seq, corner, ss);
                    let (hypothesis, valid) = match &source {
                        VelocitySource::Fixed(h) => (*h, true),
                        VelocitySource::PerBlock(hs) => (hs[b], true),
                        VelocitySource::Estimate => match self.mode {
                            Mode::ThreeD => (estimate_velocity_3d(&spec, &self.grid, band), true),
                            Mode::TwoD => {
                                if corner[2] == 0 {
                                    (Hypothesis { lx: 0, ly: 0 }, false)
                                } else {
                                    let now = spatial_block(seq, corner, [mx, my], corner[2]);
                                    let prev = spatial_block(seq, corner, [mx, my], corner[2] - 1);
                                    let h = xcorr.estimate(&now, &prev, fs).expect("block sizes agree");
                                    (h, true)
                                }
                            }
                        },
                    };
                    let prediction = synthesize(&spec, self.bank.get(hypothesis), self.path);
                    BlockResult {
                        hypothesis,
                        valid,
                        prediction,
                    }
                },
            )
            .collect();

        let mut residual = ImageSequence::zeros(dims);
        residual.frame_rate_hint = seq.frame_rate_hint;
        let mut field = VelocityField::empty(dims);
        let mut covered = vec![false; seq.len()];
        let [msx, msy, msz] = self.params.synthesis();
        let m = self.params.window();
        let ms = self.params.synthesis();
        for (corner, r) in corners.iter().zip(&results) {
            // m̂ = start + i lands at n - m̂, so the block is written in reverse.
            let top: [usize; 3] = std::array::from_fn(|d| corner[d] + m[d] - 1 - (m[d] - ms[d]) / 2);
            let v = self.grid.velocity(r.hypothesis);
            for iz in 0..msz {
                for iy in 0..msy {
                    for ix in 0..msx {
                        let (x, y, z) = (top[0] - ix, top[1] - iy, top[2] - iz);
                        let pred = r.prediction[ix + msx * (iy + msy * iz)];
                        let off = seq.offset(x, y, z);
                        debug_assert!(!covered[off], "synthesis blocks overlap");
                        covered[off] = true;
                        residual.as_mut_slice()[off] = (seq.as_slice()[off] as f64 - pred) as f32;
                        if r.valid {
                            field.set(x, y, z, v);
                        }
                    }
                }
            }
        }
        if let Some(i) = residual.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "residual overflows single precision at offset {i}"
            )));
        }
        Ok(WhitenOutput {
            residual,
            field,
            covered,
            layout,
            hypotheses: results.iter().map(|r| r.hypothesis).collect(),
        })
    }
}

/// Spatial footprint of the block at `corner`, taken from frame `z`, in position order.
fn spatial_block(seq: &ImageSequence, corner: [usize; 3], size: [usize; 2], z: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(size[0] * size[1]);
    for y in corner[1]..corner[1] + size[1] {
        for x in corner[0]..corner[0] + size[0] {
            out.push(seq.get(x, y, z) as f64);
        }
    }
    out
}

/// Whitens `seq` with velocity estimated per block.
pub fn whiten(seq: &ImageSequence, params: &FilterParams, grid: VelocityGrid, mode: Mode) -> Result<WhitenOutput> {
    Whitener::new(params, grid, mode, ApplyPath::FullBand)?.run(seq, VelocitySource::Estimate)
}

/// Velocity of `h` on `grid`, for callers holding only hypotheses.
pub fn hypothesis_velocity(grid: &VelocityGrid, h: Hypothesis) -> Velocity {
    grid.velocity(h)
}
