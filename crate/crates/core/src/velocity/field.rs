use crate::error::{invalid, Result};
use crate::kernels::Velocity;

/// Per-pixel velocity estimates with a validity mask, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    dims: [usize; 3],
    pub vx: Vec<f32>,
    pub vy: Vec<f32>,
    pub mask: Vec<bool>,
}

impl VelocityField {
    /// All pixels masked out.
    pub fn empty(dims: [usize; 3]) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            vx: vec![0.0; n],
            vy: vec![0.0; n],
            mask: vec![false; n],
        }
    }

    /// The same valid velocity everywhere.
    pub fn constant(dims: [usize; 3], v: Velocity) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            vx: vec![v.vx as f32; n],
            vy: vec![v.vy as f32; n],
            mask: vec![true; n],
        }
    }

    pub fn from_parts(dims: [usize; 3], vx: Vec<f32>, vy: Vec<f32>, mask: Vec<bool>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if vx.len() != n || vy.len() != n || mask.len() != n {
            return Err(invalid(format!("velocity planes do not match dimensions {dims:?}")));
        }
        Ok(Self { dims, vx, vy, mask })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, v: Velocity) {
        let i = self.offset(x, y, z);
        self.vx[i] = v.vx as f32;
        self.vy[i] = v.vy as f32;
        self.mask[i] = true;
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<Velocity> {
        let i = self.offset(x, y, z);
        self.mask[i].then(|| Velocity::new(self.vx[i] as f64, self.vy[i] as f64))
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Clears the mask wherever `keep` is false.
    pub fn restrict(&mut self, keep: &[bool]) {
        assert_eq!(keep.len(), self.mask.len());
        for (m, k) in self.mask.iter_mut().zip(keep) {
            *m &= *k;
        }
    }
}
