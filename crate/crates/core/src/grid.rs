//! Dense 3-D arrays, x fastest.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Clone + Default> Grid3<T> {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![T::default(); dims[0] * dims[1] * dims[2]],
        }
    }
}

impl<T> Grid3<T> {
    pub fn from_vec(dims: [usize; 3], data: Vec<T>) -> Option<Self> {
        (data.len() == dims[0] * dims[1] * dims[2]).then_some(Self { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    /// Iterates `((x, y, z), &value)` in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = ([usize; 3], &T)> + '_ {
        let [nx, ny, _] = self.dims;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ([i % nx, (i / nx) % ny, i / (nx * ny)], v))
    }
}

impl<T> Index<[usize; 3]> for Grid3<T> {
    type Output = T;
    #[inline]
    fn index(&self, [x, y, z]: [usize; 3]) -> &T {
        &self.data[self.offset(x, y, z)]
    }
}

impl<T> IndexMut<[usize; 3]> for Grid3<T> {
    #[inline]
    fn index_mut(&mut self, [x, y, z]: [usize; 3]) -> &mut T {
        let o = self.offset(x, y, z);
        &mut self.data[o]
    }
}
