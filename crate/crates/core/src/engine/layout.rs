use crate::error::{invalid, Result};
use crate::kernels::FilterParams;

/// Tiling of a sequence into overlapping analysis blocks whose concentric
/// synthesis blocks abut.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BlockLayout {
    pub dims: [usize; 3],
    pub analysis_dims: [usize; 3],
    pub synthesis_dims: [usize; 3],
    /// Blocks per dimension.
    pub counts: [usize; 3],
    /// Lower corner of the first analysis block.
    pub first_corner: [usize; 3],
    /// Unprocessed border width before the covered region.
    pub margin: [usize; 3],
}

pub fn make_layout(dims: [usize; 3], params: &FilterParams) -> Result<BlockLayout> {
    let m = params.window();
    let ms = params.synthesis();
    let mut counts = [0; 3];
    let mut first_corner = [0; 3];
    let mut margin = [0; 3];
    for d in 0..3 {
        if dims[d] < m[d] {
            return Err(invalid(format!(
                "sequence length {} in dimension {d} is shorter than the window {}",
                dims[d], m[d]
            )));
        }
        counts[d] = (dims[d] - m[d]) / ms[d] + 1;
        let tiled = (counts[d] - 1) * ms[d] + m[d];
        first_corner[d] = (dims[d] - tiled) / 2;
        margin[d] = first_corner[d] + (m[d] - ms[d]) / 2;
    }
    Ok(BlockLayout {
        dims,
        analysis_dims: m,
        synthesis_dims: ms,
        counts,
        first_corner,
        margin,
    })
}

impl BlockLayout {
    pub fn block_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn stride(&self) -> [usize; 3] {
        self.synthesis_dims
    }

    /// Side lengths of the covered region.
    pub fn coverage(&self) -> [usize; 3] {
        std::array::from_fn(|d| self.counts[d] * self.synthesis_dims[d])
    }

    /// Lower corners of all analysis blocks, x fastest.
    pub fn corners(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(self.block_count());
        for bz in 0..self.counts[2] {
            for by in 0..self.counts[1] {
                for bx in 0..self.counts[0] {
                    let b = [bx, by, bz];
                    out.push(std::array::from_fn(|d| {
                        self.first_corner[d] + b[d] * self.synthesis_dims[d]
                    }));
                }
            }
        }
        out
    }

    /// Delay-indexing origins `n` (newest sample of each block) for edge-indexed windows.
    pub fn analysis_origins(&self) -> Vec<[usize; 3]> {
        self.corners()
            .into_iter()
            .map(|c| std::array::from_fn(|d| c[d] + self.analysis_dims[d] - 1))
            .collect()
    }

    /// Lower corner of the synthesis block inside the analysis block at `corner`.
    pub fn synthesis_corner(&self, corner: [usize; 3]) -> [usize; 3] {
        std::array::from_fn(|d| corner[d] + (self.analysis_dims[d] - self.synthesis_dims[d]) / 2)
    }

    /// Per-pixel coverage mask (x fastest).
    pub fn coverage_mask(&self) -> Vec<bool> {
        let [nx, ny, nz] = self.dims;
        let cov = self.coverage();
        let inside = |v: usize, d: usize| v >= self.margin[d] && v < self.margin[d] + cov[d];
        let mut mask = Vec::with_capacity(nx * ny * nz);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    mask.push(inside(x, 0) && inside(y, 1) && inside(z, 2));
                }
            }
        }
        mask
    }
}
