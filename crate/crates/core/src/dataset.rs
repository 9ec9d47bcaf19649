//! Image geometry, complex time-series datasets and per-voxel fields.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid extents, outermost axis first. Voxel indices are row-major, so the
/// last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(extents: impl Into<Vec<usize>>) -> Result<Self> {
        let extents = extents.into();
        if !(extents.len() == 2 || extents.len() == 3) {
            return Err(Error::InvalidSpec(format!(
                "grids must be 2-D or 3-D, got {} axes",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidSpec(format!("zero-length axis in {extents:?}")));
        }
        Ok(Dims(extents))
    }

    pub fn grid2(rows: usize, cols: usize) -> Result<Self> {
        Dims::new(vec![rows, cols])
    }

    pub fn extents(&self) -> &[usize] {
        &self.0
    }

    pub fn ndim(&self) -> usize {
        self.0.len()
    }

    pub fn voxel_count(&self) -> usize {
        self.0.iter().product()
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for axis in (0..self.0.len()).rev() {
            out[axis] = index % self.0[axis];
            index /= self.0[axis];
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&c, &extent)| acc * extent + c)
    }

    pub fn contains(&self, coords: &[isize]) -> bool {
        coords.len() == self.0.len()
            && coords
                .iter()
                .zip(&self.0)
                .all(|(&c, &extent)| c >= 0 && (c as usize) < extent)
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// A value per voxel on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    dims: Dims,
    values: Vec<T>,
}

impl<T> Field<T> {
    pub fn new(dims: Dims, values: Vec<T>) -> Result<Self> {
        if values.len() != dims.voxel_count() {
            return Err(Error::DimensionMismatch(format!(
                "field on {dims} needs {} values, got {}",
                dims.voxel_count(),
                values.len()
            )));
        }
        Ok(Field { dims, values })
    }

    pub fn filled(dims: Dims, value: T) -> Self
    where
        T: Clone,
    {
        let values = vec![value; dims.voxel_count()];
        Field { dims, values }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field {
            dims: self.dims.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Extracts the 2-D slice `z` of a 3-D field.
    pub fn slice(&self, z: usize) -> Result<Field<T>>
    where
        T: Clone,
    {
        let ext = self.dims.extents();
        if ext.len() != 3 || z >= ext[0] {
            return Err(Error::DimensionMismatch(format!(
                "cannot take slice {z} of a field on {}",
                self.dims
            )));
        }
        let plane = ext[1] * ext[2];
        Field::new(
            Dims::grid2(ext[1], ext[2])?,
            self.values[z * plane..(z + 1) * plane].to_vec(),
        )
    }
}

/// Complex time series for every voxel of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDataset {
    dims: Dims,
    t_len: usize,
    data: Vec<Complex64>,
}

impl ComplexDataset {
    /// `data` is voxel-major: the series of voxel `v` occupies
    /// `data[v * t_len..(v + 1) * t_len]`.
    pub fn new(dims: Dims, t_len: usize, data: Vec<Complex64>) -> Result<Self> {
        if t_len == 0 {
            return Err(Error::InvalidSpec("time series length must be positive".into()));
        }
        let expected = dims.voxel_count() * t_len;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "dataset on {dims} with T={t_len} needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(ComplexDataset { dims, t_len, data })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.voxel_count()
    }

    pub fn series(&self, voxel: usize) -> &[Complex64] {
        &self.data[voxel * self.t_len..(voxel + 1) * self.t_len]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Extracts slice `z` of a 3-D dataset as a 2-D dataset.
    pub fn slice(&self, z: usize) -> Result<ComplexDataset> {
        let ext = self.dims.extents();
        if ext.len() != 3 || z >= ext[0] {
            return Err(Error::DimensionMismatch(format!(
                "cannot take slice {z} of a dataset on {}",
                self.dims
            )));
        }
        let span = ext[1] * ext[2] * self.t_len;
        ComplexDataset::new(
            Dims::grid2(ext[1], ext[2])?,
            self.t_len,
            self.data[z * span..(z + 1) * span].to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_and_index_are_inverse() {
        let dims = Dims::new(vec![3, 4, 5]).unwrap();
        for v in 0..dims.voxel_count() {
            assert_eq!(dims.index(&dims.coords(v)), v);
        }
        assert_eq!(dims.coords(7), vec![0, 1, 2]);
    }

    #[test]
    fn rejects_bad_extents() {
        assert!(Dims::new(vec![4]).is_err());
        assert!(Dims::new(vec![4, 0]).is_err());
    }

    #[test]
    fn slices_pick_contiguous_planes() {
        let dims = Dims::new(vec![2, 2, 2]).unwrap();
        let field = Field::new(dims, (0..8).collect::<Vec<_>>()).unwrap();
        assert_eq!(field.slice(1).unwrap().values(), &[4, 5, 6, 7]);
    }
}
