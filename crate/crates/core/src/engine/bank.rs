use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::Grid3;
use crate::kernels::{freq_coeffs, sample_coeffs, FilterParams, Velocity};

/// Velocity hypotheses `v = l / lz` for integer `l` in `[-lxy, +lxy]` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub lxy: usize,
    pub lz: usize,
}

/// One point of a [`VelocityGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypothesis {
    pub lx: i64,
    pub ly: i64,
}

impl VelocityGrid {
    pub fn new(lxy: usize, lz: usize) -> Self {
        assert!(lz > 0, "velocity grid denominator must be positive");
        Self { lxy, lz }
    }

    pub fn side(&self) -> usize {
        2 * self.lxy + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.lz as f64
    }

    /// All hypotheses, `lx` fastest.
    pub fn hypotheses(&self) -> impl Iterator<Item = Hypothesis> + '_ {
        let l = self.lxy as i64;
        (-l..=l).flat_map(move |ly| (-l..=l).map(move |lx| Hypothesis { lx, ly }))
    }

    pub fn index(&self, h: Hypothesis) -> usize {
        let l = self.lxy as i64;
        debug_assert!(h.lx.abs() <= l && h.ly.abs() <= l);
        ((h.ly + l) as usize) * self.side() + (h.lx + l) as usize
    }

    pub fn velocity(&self, h: Hypothesis) -> Velocity {
        Velocity::new(h.lx as f64 / self.lz as f64, h.ly as f64 / self.lz as f64)
    }

    /// Grid point closest to `v`, clamped to the grid extent.
    pub fn nearest(&self, v: Velocity) -> Hypothesis {
        let l = self.lxy as i64;
        let q = |c: f64| ((c * self.lz as f64).round() as i64).clamp(-l, l);
        Hypothesis {
            lx: q(v.vx),
            ly: q(v.vy),
        }
    }
}

/// Synthesis indices `m̂` a bank serves: `start + [0, len)` per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisSet {
    pub start: [i64; 3],
    pub len: [usize; 3],
}

impl SynthesisSet {
    /// The run concentric with the analysis window.
    pub fn centered(params: &FilterParams) -> Self {
        Self {
            start: params.synthesis_start(),
            len: params.synthesis(),
        }
    }

    pub fn count(&self) -> usize {
        self.len.iter().product()
    }
}

/// Filter designed for one velocity hypothesis, referenced to `msyn_origin`.
///
/// Coefficients for any other synthesis index of the set differ from the
/// stored ones only by a per-component phase ramp.
#[derive(Debug, Clone)]
pub struct FilterBankEntry {
    pub params: FilterParams,
    pub msyn_origin: [i64; 3],
    pub hypothesis: Hypothesis,
    pub velocity: Velocity,
    pub coeffs: Grid3<f64>,
    pub freq: Grid3<Complex64>,
}

impl FilterBankEntry {
    pub fn design(params: &FilterParams, msyn: [i64; 3], hypothesis: Hypothesis, velocity: Velocity) -> Self {
        let m = msyn.map(|v| v as f64);
        Self {
            params: params.clone(),
            msyn_origin: msyn,
            hypothesis,
            velocity,
            coeffs: sample_coeffs(params, m, velocity),
            freq: freq_coeffs(params, m, velocity),
        }
    }
}

/// Pre-designed filters for every hypothesis of a velocity grid.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub grid: VelocityGrid,
    pub synthesis: SynthesisSet,
    entries: Vec<FilterBankEntry>,
}

pub fn build_bank(params: &FilterParams, grid: VelocityGrid, synthesis: SynthesisSet) -> FilterBank {
    let hyps: Vec<Hypothesis> = grid.hypotheses().collect();
    let entries = hyps
        .par_iter()
        .map(|&h| FilterBankEntry::design(params, synthesis.start, h, grid.velocity(h)))
        .collect();
    FilterBank {
        grid,
        synthesis,
        entries,
    }
}

impl FilterBank {
    pub fn get(&self, h: Hypothesis) -> &FilterBankEntry {
        &self.entries[self.grid.index(h)]
    }

    pub fn entries(&self) -> &[FilterBankEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
