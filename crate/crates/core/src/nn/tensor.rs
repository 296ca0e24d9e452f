use crate::error::{Result, RomError};

/// Dense batch of feature maps indexed `(batch, row, col, channel)`,
/// stored row-major with the channel index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    data: Vec<f64>,
    shape: [usize; 4],
}

impl Tensor4 {
    pub fn zeros(shape: [usize; 4]) -> Self {
        Tensor4 {
            data: vec![0.0; shape.iter().product()],
            shape,
        }
    }

    pub fn from_vec(shape: [usize; 4], data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(RomError::arg(format!(
                "tensor of shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor4 { data, shape })
    }

    pub fn filled(shape: [usize; 4], value: f64) -> Self {
        Tensor4 {
            data: vec![value; shape.iter().product()],
            shape,
        }
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    /// Per-sample shape `(h, w, c)`.
    pub fn sample_shape(&self) -> [usize; 3] {
        [self.shape[1], self.shape[2], self.shape[3]]
    }

    pub fn sample_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, b: usize, y: usize, x: usize, c: usize) -> usize {
        ((b * self.shape[1] + y) * self.shape[2] + x) * self.shape[3] + c
    }

    pub fn get(&self, b: usize, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(b, y, x, c)]
    }

    pub fn set(&mut self, b: usize, y: usize, x: usize, c: usize, v: f64) {
        let i = self.index(b, y, x, c);
        self.data[i] = v;
    }

    /// Same data viewed with a new per-sample shape of equal size.
    pub fn reshaped(self, sample: [usize; 3]) -> Result<Self> {
        if sample.iter().product::<usize>() != self.sample_len() {
            return Err(RomError::arg(format!(
                "cannot reshape {:?} to {sample:?}",
                self.sample_shape()
            )));
        }
        Ok(Tensor4 {
            shape: [self.shape[0], sample[0], sample[1], sample[2]],
            data: self.data,
        })
    }

    /// Copies the listed samples, in order, into a new batch.
    pub fn gather(&self, indices: &[usize]) -> Tensor4 {
        let len = self.sample_len();
        let mut data = Vec::with_capacity(indices.len() * len);
        for &i in indices {
            data.extend_from_slice(&self.data[i * len..(i + 1) * len]);
        }
        Tensor4 {
            data,
            shape: [indices.len(), self.shape[1], self.shape[2], self.shape[3]],
        }
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let len = self.sample_len();
        &self.data[i * len..(i + 1) * len]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Tensor4) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}
