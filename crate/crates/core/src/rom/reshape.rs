use crate::error::{Result, RomError};
use crate::nn::Tensor4;

/// Stacks per-channel state vectors of length `ny * nx` into one
/// `1 x ny x nx x c` sample, row-major (entry `r * nx + col` goes to row `r`).
pub fn reshape_to_grid(channels: &[&[f64]], ny: usize, nx: usize) -> Result<Tensor4> {
    reshape_batch(&[channels.to_vec()], ny, nx)
}

/// Batch version of [`reshape_to_grid`]: `samples[b][ch]` is one state.
pub fn reshape_batch(samples: &[Vec<&[f64]>], ny: usize, nx: usize) -> Result<Tensor4> {
    let n = ny * nx;
    if samples.is_empty() || ny == 0 || nx == 0 {
        return Err(RomError::arg(
            "reshape needs at least one sample and a nonempty grid",
        ));
    }
    let c = samples[0].len();
    if c == 0 {
        return Err(RomError::arg("reshape needs at least one channel"));
    }
    let mut data = vec![0.0; samples.len() * n * c];
    for (b, chans) in samples.iter().enumerate() {
        if chans.len() != c {
            return Err(RomError::arg("samples have differing channel counts"));
        }
        for (ch, x) in chans.iter().enumerate() {
            if x.len() != n {
                return Err(RomError::arg(format!(
                    "state of length {} does not fit a {ny}x{nx} grid",
                    x.len()
                )));
            }
            for (i, &v) in x.iter().enumerate() {
                data[(b * n + i) * c + ch] = v;
            }
        }
    }
    Tensor4::from_vec([samples.len(), ny, nx, c], data)
}

/// Inverse of [`reshape_to_grid`] for sample `b` of a batch: one flat state
/// per channel.
pub fn inverse_reshape(t: &Tensor4, b: usize) -> Result<Vec<Vec<f64>>> {
    if b >= t.batch() {
        return Err(RomError::arg(format!(
            "sample {b} out of range for batch of {}",
            t.batch()
        )));
    }
    let [ny, nx, c] = t.sample_shape();
    let s = t.sample(b);
    Ok((0..c)
        .map(|ch| (0..ny * nx).map(|i| s[i * c + ch]).collect())
        .collect())
}
