use crate::error::{invalid, Result};
use crate::grid::Grid3;

/// Real-valued image sequence `I(x, y, z)`, z indexing frames, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSequence {
    dims: [usize; 3],
    data: Vec<f32>,
    pub frame_rate_hint: Option<f64>,
}

impl ImageSequence {
    pub fn new(dims: [usize; 3], data: Vec<f32>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(invalid(format!("sequence dims must be positive, got {dims:?}")));
        }
        if data.len() != dims.iter().product::<usize>() {
            return Err(invalid(format!(
                "sequence of dims {dims:?} needs {} samples, got {}",
                dims.iter().product::<usize>(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite sample at offset {i}")));
        }
        Ok(Self {
            dims,
            data,
            frame_rate_hint: None,
        })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
            frame_rate_hint: None,
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let g = Grid3::from_fn(dims, |x, y, z| f(x, y, z) as f32);
        Self {
            dims,
            data: g.into_vec(),
            frame_rate_hint: None,
        }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.offset(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: f32) {
        let o = self.offset(x, y, z);
        self.data[o] = v;
    }

    pub fn frame(&self, z: usize) -> &[f32] {
        let plane = self.dims[0] * self.dims[1];
        &self.data[plane * z..plane * (z + 1)]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / self.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.mean_power().sqrt()
    }

    /// Same shape, samples transformed elementwise.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
            frame_rate_hint: self.frame_rate_hint,
        }
    }
}
