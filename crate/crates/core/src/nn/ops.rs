//! Layer primitives: forward passes and their reverse-mode counterparts.
//!
//! Convolutions are cross-correlations (no kernel flip). Weights use the
//! layout `(kh, kw, c_in, c_out)` for both convolution and transposed
//! convolution; dense weights are `(units_out, units_in)`. "Same" padding
//! pads `max((ceil(n/s) - 1) s + k - n, 0)` zeros, `floor` of that before the
//! data and the rest after.

use super::gemm::{gemm, View};
use super::tensor::Tensor4;
use crate::error::{Result, RomError};

/// Output size and leading pad of a "same"-padded window along one axis.
pub fn same_padding(input: usize, kernel: usize, stride: usize) -> (usize, usize) {
    let out = input.div_ceil(stride);
    let total = ((out.saturating_sub(1)) * stride + kernel).saturating_sub(input);
    (out, total / 2)
}

pub fn leaky_relu(x: f64, alpha: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        alpha * x
    }
}

/// Derivative of the leaky ReLU; the kink at 0 takes the positive branch.
pub fn leaky_relu_grad(x: f64, alpha: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        alpha
    }
}

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `W h + b` for a single input vector.
pub fn dense_forward(w: &[f64], b: &[f64], h_in: &[f64]) -> Result<Vec<f64>> {
    let units_out = b.len();
    let units_in = h_in.len();
    if w.len() != units_out * units_in {
        return Err(RomError::arg(format!(
            "dense weights of length {} do not match {units_out}x{units_in}",
            w.len()
        )));
    }
    let mut out = b.to_vec();
    gemm(
        1.0,
        View::row_major(h_in, 1, units_in),
        View::transposed(w, units_out, units_in),
        1.0,
        &mut out,
        units_out,
    );
    Ok(out)
}

/// Batched dense layer: `x` is `batch x units_in`, result `batch x units_out`.
pub(crate) fn dense_batch(x: &[f64], batch: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    let units_out = b.len();
    let units_in = w.len() / units_out;
    let mut out = Vec::with_capacity(batch * units_out);
    for _ in 0..batch {
        out.extend_from_slice(b);
    }
    gemm(
        1.0,
        View::row_major(x, batch, units_in),
        View::transposed(w, units_out, units_in),
        1.0,
        &mut out,
        units_out,
    );
    out
}

/// Gradients of the batched dense layer. Writes `dw`, `db`; returns `dx`.
pub(crate) fn dense_backward(
    x: &[f64],
    batch: usize,
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    need_dx: bool,
) -> Vec<f64> {
    let units_out = db.len();
    let units_in = w.len() / units_out;
    gemm(
        1.0,
        View::transposed(dy, batch, units_out),
        View::row_major(x, batch, units_in),
        0.0,
        dw,
        units_in,
    );
    bias_grad(dy, db);
    if !need_dx {
        return Vec::new();
    }
    let mut dx = vec![0.0; batch * units_in];
    gemm(
        1.0,
        View::row_major(dy, batch, units_out),
        View::row_major(w, units_out, units_in),
        0.0,
        &mut dx,
        units_in,
    );
    dx
}

/// Geometry of a strided, "same"-padded 2-D window sweep from an `h x w`
/// input onto an `ho x wo` output.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Window {
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub kh: usize,
    pub kw: usize,
    pub sh: usize,
    pub sw: usize,
    pub ho: usize,
    pub wo: usize,
    pub pad_t: usize,
    pub pad_l: usize,
}

impl Window {
    pub fn same(
        h: usize,
        w: usize,
        c: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
    ) -> Self {
        let (ho, pad_t) = same_padding(h, kernel.0, stride.0);
        let (wo, pad_l) = same_padding(w, kernel.1, stride.1);
        Window {
            h,
            w,
            c,
            kh: kernel.0,
            kw: kernel.1,
            sh: stride.0,
            sw: stride.1,
            ho,
            wo,
            pad_t,
            pad_l,
        }
    }

    pub fn patch_len(&self) -> usize {
        self.kh * self.kw * self.c
    }

    /// Input row under output row `oy` at kernel row `ky`.
    #[inline]
    fn source_row(&self, oy: usize, ky: usize) -> Option<usize> {
        let iy = (oy * self.sh + ky).checked_sub(self.pad_t)?;
        (iy < self.h).then_some(iy)
    }

    /// Kernel columns `kx_lo..kx_hi` that land inside the input for output
    /// column `ox`, and the input column under `kx_lo`. Consecutive kernel
    /// columns read consecutive input columns.
    #[inline]
    fn source_cols(&self, ox: usize) -> (usize, usize, usize) {
        let start = ox * self.sw;
        let kx_lo = self.pad_l.saturating_sub(start).min(self.kw);
        let kx_hi = (self.w + self.pad_l)
            .saturating_sub(start)
            .min(self.kw)
            .max(kx_lo);
        (kx_lo, kx_hi, start + kx_lo - self.pad_l.min(start + kx_lo))
    }
}

/// Unfolds every receptive field into a row: `(batch*ho*wo) x (kh*kw*c)`.
pub(crate) fn im2col(x: &[f64], batch: usize, g: &Window) -> Vec<f64> {
    let patch = g.patch_len();
    let mut cols = vec![0.0; batch * g.ho * g.wo * patch];
    let sample = g.h * g.w * g.c;
    for b in 0..batch {
        let xb = &x[b * sample..(b + 1) * sample];
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                let row = ((b * g.ho + oy) * g.wo + ox) * patch;
                let (kx_lo, kx_hi, ix) = g.source_cols(ox);
                let run = (kx_hi - kx_lo) * g.c;
                if run == 0 {
                    continue;
                }
                for ky in 0..g.kh {
                    if let Some(iy) = g.source_row(oy, ky) {
                        let dst = row + (ky * g.kw + kx_lo) * g.c;
                        let src = (iy * g.w + ix) * g.c;
                        cols[dst..dst + run].copy_from_slice(&xb[src..src + run]);
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-adds patch rows back onto the input grid.
pub(crate) fn col2im(cols: &[f64], batch: usize, g: &Window) -> Vec<f64> {
    let patch = g.patch_len();
    let sample = g.h * g.w * g.c;
    let mut x = vec![0.0; batch * sample];
    for b in 0..batch {
        let xb = &mut x[b * sample..(b + 1) * sample];
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                let row = ((b * g.ho + oy) * g.wo + ox) * patch;
                let (kx_lo, kx_hi, ix) = g.source_cols(ox);
                let run = (kx_hi - kx_lo) * g.c;
                if run == 0 {
                    continue;
                }
                for ky in 0..g.kh {
                    if let Some(iy) = g.source_row(oy, ky) {
                        let src = row + (ky * g.kw + kx_lo) * g.c;
                        let dst = (iy * g.w + ix) * g.c;
                        for (o, v) in xb[dst..dst + run].iter_mut().zip(&cols[src..src + run]) {
                            *o += v;
                        }
                    }
                }
            }
        }
    }
    x
}

fn check_conv_weights(
    weights: &[f64],
    bias: &[f64],
    kernel: (usize, usize),
    c_in: usize,
) -> Result<()> {
    if kernel.0 == 0 || kernel.1 == 0 {
        return Err(RomError::arg("kernel sizes must be positive"));
    }
    let want = kernel.0 * kernel.1 * c_in * bias.len();
    if weights.len() != want || bias.is_empty() {
        return Err(RomError::arg(format!(
            "weights of length {} do not match ({}, {}, {c_in}, {})",
            weights.len(),
            kernel.0,
            kernel.1,
            bias.len()
        )));
    }
    Ok(())
}

fn check_stride(stride: (usize, usize)) -> Result<()> {
    if stride.0 == 0 || stride.1 == 0 {
        return Err(RomError::arg("strides must be positive"));
    }
    Ok(())
}

fn add_bias(out: &mut [f64], bias: &[f64]) {
    for row in out.chunks_exact_mut(bias.len()) {
        for (o, b) in row.iter_mut().zip(bias) {
            *o += b;
        }
    }
}

fn bias_grad(dy: &[f64], db: &mut [f64]) {
    db.fill(0.0);
    for row in dy.chunks_exact(db.len()) {
        for (g, v) in db.iter_mut().zip(row) {
            *g += v;
        }
    }
}

/// Forward convolution; also returns the unfolded input for reuse in
/// the backward pass.
pub(crate) fn conv_forward_raw(
    x: &[f64],
    batch: usize,
    g: &Window,
    weights: &[f64],
    bias: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let c_out = bias.len();
    let cols = im2col(x, batch, g);
    let rows = batch * g.ho * g.wo;
    let mut out = vec![0.0; rows * c_out];
    gemm(
        1.0,
        View::row_major(&cols, rows, g.patch_len()),
        View::row_major(weights, g.patch_len(), c_out),
        0.0,
        &mut out,
        c_out,
    );
    add_bias(&mut out, bias);
    (out, cols)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_backward_raw(
    cols: &[f64],
    batch: usize,
    g: &Window,
    weights: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    need_dx: bool,
) -> Vec<f64> {
    let c_out = db.len();
    let rows = batch * g.ho * g.wo;
    let patch = g.patch_len();
    gemm(
        1.0,
        View::transposed(cols, rows, patch),
        View::row_major(dy, rows, c_out),
        0.0,
        dw,
        c_out,
    );
    bias_grad(dy, db);
    if !need_dx {
        return Vec::new();
    }
    let mut dcols = vec![0.0; rows * patch];
    gemm(
        1.0,
        View::row_major(dy, rows, c_out),
        View::transposed(weights, patch, c_out),
        0.0,
        &mut dcols,
        patch,
    );
    col2im(&dcols, batch, g)
}

/// 2-D cross-correlation with "same" zero padding.
pub fn conv2d_forward(
    input: &Tensor4,
    weights: &[f64],
    bias: &[f64],
    kernel: (usize, usize),
    stride: (usize, usize),
) -> Result<Tensor4> {
    let [b, h, w, c] = input.shape();
    check_conv_weights(weights, bias, kernel, c)?;
    check_stride(stride)?;
    let g = Window::same(h, w, c, kernel, stride);
    let (out, _) = conv_forward_raw(input.data(), b, &g, weights, bias);
    Tensor4::from_vec([b, g.ho, g.wo, bias.len()], out)
}

/// Geometry of a transposed convolution: the window runs over the
/// `(h*sh) x (w*sw)` output and lands on the `h x w` input.
pub(crate) fn transpose_window(
    h: usize,
    w: usize,
    c_out: usize,
    kernel: (usize, usize),
    stride: (usize, usize),
) -> Window {
    Window::same(h * stride.0, w * stride.1, c_out, kernel, stride)
}

/// Repacks `(kh, kw, c_in, c_out)` weights into a `c_in x (kh*kw*c_out)`
/// matrix so that one product yields every output patch.
fn pack_transpose_weights(weights: &[f64], taps: usize, c_in: usize, c_out: usize) -> Vec<f64> {
    let mut packed = vec![0.0; weights.len()];
    let width = taps * c_out;
    for t in 0..taps {
        for ci in 0..c_in {
            let src = (t * c_in + ci) * c_out;
            let dst = ci * width + t * c_out;
            packed[dst..dst + c_out].copy_from_slice(&weights[src..src + c_out]);
        }
    }
    packed
}

fn unpack_transpose_weights(
    packed: &[f64],
    taps: usize,
    c_in: usize,
    c_out: usize,
    out: &mut [f64],
) {
    let width = taps * c_out;
    for t in 0..taps {
        for ci in 0..c_in {
            let dst = (t * c_in + ci) * c_out;
            let src = ci * width + t * c_out;
            out[dst..dst + c_out].copy_from_slice(&packed[src..src + c_out]);
        }
    }
}

pub(crate) fn conv_transpose_forward_raw(
    x: &[f64],
    batch: usize,
    c_in: usize,
    g: &Window,
    weights: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let c_out = bias.len();
    let taps = g.kh * g.kw;
    let rows = batch * g.ho * g.wo;
    let packed = pack_transpose_weights(weights, taps, c_in, c_out);
    let mut cols = vec![0.0; rows * taps * c_out];
    gemm(
        1.0,
        View::row_major(x, rows, c_in),
        View::row_major(&packed, c_in, taps * c_out),
        0.0,
        &mut cols,
        taps * c_out,
    );
    let mut out = col2im(&cols, batch, g);
    add_bias(&mut out, bias);
    out
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_transpose_backward_raw(
    x: &[f64],
    batch: usize,
    c_in: usize,
    g: &Window,
    weights: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    need_dx: bool,
) -> Vec<f64> {
    let c_out = db.len();
    let taps = g.kh * g.kw;
    let rows = batch * g.ho * g.wo;
    let width = taps * c_out;
    bias_grad(dy, db);
    let dcols = im2col(dy, batch, g);
    let mut dpacked = vec![0.0; c_in * width];
    gemm(
        1.0,
        View::transposed(x, rows, c_in),
        View::row_major(&dcols, rows, width),
        0.0,
        &mut dpacked,
        width,
    );
    unpack_transpose_weights(&dpacked, taps, c_in, c_out, dw);
    if !need_dx {
        return Vec::new();
    }
    let packed = pack_transpose_weights(weights, taps, c_in, c_out);
    let mut dx = vec![0.0; rows * c_in];
    gemm(
        1.0,
        View::row_major(&dcols, rows, width),
        View::transposed(&packed, c_in, width),
        0.0,
        &mut dx,
        c_in,
    );
    dx
}

/// Transposed convolution: the linear adjoint of [`conv2d_forward`] with the
/// same kernel and stride (weights with the channel axes swapped), plus bias.
/// Output spatial size is the input size times the stride.
pub fn conv2d_transpose_forward(
    input: &Tensor4,
    weights: &[f64],
    bias: &[f64],
    kernel: (usize, usize),
    stride: (usize, usize),
) -> Result<Tensor4> {
    let [b, h, w, c] = input.shape();
    check_conv_weights(weights, bias, kernel, c)?;
    check_stride(stride)?;
    let g = transpose_window(h, w, bias.len(), kernel, stride);
    let out = conv_transpose_forward_raw(input.data(), b, c, &g, weights, bias);
    Tensor4::from_vec([b, g.h, g.w, bias.len()], out)
}

/// Max pooling with "same" geometry; padded positions never win. Returns
/// the flat input index of each output's maximum (first in row-major order
/// among ties).
pub(crate) fn maxpool_raw(x: &[f64], batch: usize, g: &Window) -> (Vec<f64>, Vec<usize>) {
    let n_out = batch * g.ho * g.wo * g.c;
    let mut out = vec![f64::NEG_INFINITY; n_out];
    let mut arg = vec![usize::MAX; n_out];
    let sample = g.h * g.w * g.c;
    for b in 0..batch {
        for oy in 0..g.ho {
            for ox in 0..g.wo {
                let o = ((b * g.ho + oy) * g.wo + ox) * g.c;
                let best = &mut out[o..o + g.c];
                let best_i = &mut arg[o..o + g.c];
                let (kx_lo, kx_hi, ix0) = g.source_cols(ox);
                for ky in 0..g.kh {
                    let Some(iy) = g.source_row(oy, ky) else {
                        continue;
                    };
                    for ix in ix0..ix0 + (kx_hi - kx_lo) {
                        let base = b * sample + (iy * g.w + ix) * g.c;
                        let xs = &x[base..base + g.c];
                        for ch in 0..g.c {
                            if best_i[ch] == usize::MAX || xs[ch] > best[ch] {
                                best[ch] = xs[ch];
                                best_i[ch] = base + ch;
                            }
                        }
                    }
                }
            }
        }
    }
    (out, arg)
}

pub fn maxpool2d_forward(
    input: &Tensor4,
    window: (usize, usize),
    stride: (usize, usize),
) -> Result<(Tensor4, Vec<usize>)> {
    if window.0 == 0 || window.1 == 0 {
        return Err(RomError::arg("pool window must be positive"));
    }
    check_stride(stride)?;
    let [b, h, w, c] = input.shape();
    let g = Window::same(h, w, c, window, stride);
    let (out, arg) = maxpool_raw(input.data(), b, &g);
    Ok((Tensor4::from_vec([b, g.ho, g.wo, c], out)?, arg))
}

/// Routes each output gradient to the input position that won the max.
pub fn maxpool2d_backward(input_len: usize, argmax: &[usize], dy: &[f64]) -> Vec<f64> {
    let mut dx = vec![0.0; input_len];
    for (&i, &g) in argmax.iter().zip(dy) {
        dx[i] += g;
    }
    dx
}

/// Mean of squared differences over every entry.
pub fn mse_loss(pred: &Tensor4, target: &Tensor4) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(RomError::arg(format!(
            "prediction shape {:?} differs from target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Err(RomError::arg("empty tensors"));
    }
    let sum: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of [`mse_loss`] with respect to the prediction.
pub fn mse_grad(pred: &Tensor4, target: &Tensor4) -> Tensor4 {
    let scale = 2.0 / pred.len() as f64;
    let data = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| scale * (p - t))
        .collect();
    Tensor4::from_vec(pred.shape(), data).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(shape: [usize; 4], rng: &mut ChaCha8Rng) -> Tensor4 {
        let n = shape.iter().product();
        Tensor4::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Direct seven-loop cross-correlation with explicit zero padding.
    fn conv_oracle(
        x: &Tensor4,
        w: &[f64],
        b: &[f64],
        k: (usize, usize),
        s: (usize, usize),
    ) -> Tensor4 {
        let [nb, h, wd, ci] = x.shape();
        let co = b.len();
        let (ho, pt) = same_padding(h, k.0, s.0);
        let (wo, pl) = same_padding(wd, k.1, s.1);
        let mut out = Tensor4::zeros([nb, ho, wo, co]);
        for bi in 0..nb {
            for oy in 0..ho {
                for ox in 0..wo {
                    for o in 0..co {
                        let mut acc = b[o];
                        for ky in 0..k.0 {
                            for kx in 0..k.1 {
                                for c in 0..ci {
                                    let iy = (oy * s.0 + ky) as isize - pt as isize;
                                    let ix = (ox * s.1 + kx) as isize - pl as isize;
                                    if iy >= 0 && ix >= 0 && (iy as usize) < h && (ix as usize) < wd
                                    {
                                        acc += x.get(bi, iy as usize, ix as usize, c)
                                            * w[((ky * k.1 + kx) * ci + c) * co + o];
                                    }
                                }
                            }
                        }
                        out.set(bi, oy, ox, o, acc);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn activations() {
        assert_eq!(leaky_relu(2.0, 0.25), 2.0);
        assert_eq!(leaky_relu(-2.0, 0.25), -0.5);
        assert_eq!(leaky_relu(0.0, 0.25), 0.0);
        assert_eq!(leaky_relu_grad(-1.0, 0.25), 0.25);
        assert_eq!(leaky_relu_grad(1.0, 0.25), 1.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        assert!((sigmoid(30.0) - 1.0).abs() < 1e-12);
        assert!(sigmoid(-30.0).abs() < 1e-12);
        assert!(sigmoid(-1000.0).is_finite() && sigmoid(1000.0) == 1.0);
    }

    #[test]
    fn dense_examples() {
        let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(
            dense_forward(&eye, &[0.0; 3], &[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
        assert_eq!(
            dense_forward(&[0.0; 6], &[4.0, 5.0], &[1.0, 1.0, 1.0]).unwrap(),
            vec![4.0, 5.0]
        );
        assert!(dense_forward(&[0.0; 5], &[4.0, 5.0], &[1.0, 1.0, 1.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (o, i) = (4, 7);
        let w = random_vec(o * i, &mut rng);
        let b = random_vec(o, &mut rng);
        let h = random_vec(i, &mut rng);
        let got = dense_forward(&w, &b, &h).unwrap();
        for r in 0..o {
            let mut acc = b[r];
            for c in 0..i {
                acc += w[r * i + c] * h[c];
            }
            assert!((got[r] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn same_padding_geometry() {
        assert_eq!(same_padding(64, 3, 1), (64, 1));
        assert_eq!(same_padding(64, 2, 2), (32, 0));
        assert_eq!(same_padding(32, 3, 2), (16, 0));
        assert_eq!(same_padding(5, 3, 2), (3, 1));
        assert_eq!(same_padding(7, 2, 2), (4, 0));
    }

    #[test]
    fn delta_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_tensor([2, 5, 4, 1], &mut rng);
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        let y = conv2d_forward(&x, &w, &[0.0], (3, 3), (1, 1)).unwrap();
        assert_eq!(y, x);
        let yt = conv2d_transpose_forward(&x, &w, &[0.0], (3, 3), (1, 1)).unwrap();
        assert_eq!(yt, x);
    }

    #[test]
    fn ones_kernel_padding_arithmetic() {
        let x = Tensor4::filled([1, 5, 5, 1], 2.0);
        let y = conv2d_forward(&x, &[1.0; 9], &[0.0], (3, 3), (1, 1)).unwrap();
        assert_eq!(y.get(0, 2, 2, 0), 18.0);
        assert_eq!(y.get(0, 0, 0, 0), 8.0);
        assert_eq!(y.get(0, 4, 4, 0), 8.0);
        assert_eq!(y.get(0, 0, 2, 0), 12.0);
    }

    #[test]
    fn conv_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_tensor([1, 6, 6, 2], &mut rng);
        let w = random_vec(3 * 3 * 2 * 3, &mut rng);
        let b = random_vec(3, &mut rng);
        for stride in [(1, 1), (2, 2), (2, 1)] {
            let got = conv2d_forward(&x, &w, &b, (3, 3), stride).unwrap();
            let want = conv_oracle(&x, &w, &b, (3, 3), stride);
            assert_eq!(got.shape(), want.shape());
            for (a, b) in got.data().iter().zip(want.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conv_shape_errors() {
        let x = Tensor4::zeros([1, 4, 4, 2]);
        assert!(conv2d_forward(&x, &[0.0; 9], &[0.0], (3, 3), (1, 1)).is_err());
        assert!(conv2d_forward(&x, &[0.0; 18], &[0.0], (3, 3), (0, 1)).is_err());
        assert!(conv2d_transpose_forward(&x, &[0.0; 9], &[0.0], (3, 3), (2, 2)).is_err());
    }

    #[test]
    fn transpose_is_adjoint_of_conv() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(h, w, stride, k) in &[
            (4, 4, (2, 2), (3, 3)),
            (3, 5, (1, 1), (3, 3)),
            (2, 3, (2, 2), (2, 2)),
            (3, 2, (2, 1), (3, 2)),
        ] {
            let (c_small, c_big) = (3, 2);
            let big_h = h * stride.0;
            let big_w = w * stride.1;
            let wt = random_vec(k.0 * k.1 * c_small * c_big, &mut rng);
            // Conv weights: same taps with the channel axes swapped.
            let mut wc = vec![0.0; wt.len()];
            for t in 0..k.0 * k.1 {
                for cs in 0..c_small {
                    for cb in 0..c_big {
                        wc[(t * c_big + cb) * c_small + cs] = wt[(t * c_small + cs) * c_big + cb];
                    }
                }
            }
            let xb = random_tensor([2, big_h, big_w, c_big], &mut rng);
            let ys = random_tensor([2, h, w, c_small], &mut rng);
            let conv = conv2d_forward(&xb, &wc, &vec![0.0; c_small], k, stride).unwrap();
            let convt = conv2d_transpose_forward(&ys, &wt, &vec![0.0; c_big], k, stride).unwrap();
            assert_eq!(conv.shape(), ys.shape());
            assert_eq!(convt.shape(), xb.shape());
            let lhs = conv.dot(&ys);
            let rhs = xb.dot(&convt);
            assert!(
                (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn decoder_transpose_shape() {
        let x = Tensor4::zeros([1, 16, 16, 32]);
        let y = conv2d_transpose_forward(&x, &vec![0.0; 9 * 32 * 32], &[0.0; 32], (3, 3), (2, 2))
            .unwrap();
        assert_eq!(y.shape(), [1, 32, 32, 32]);
    }

    #[test]
    fn maxpool_examples() {
        let x = Tensor4::from_vec([1, 2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, arg) = maxpool2d_forward(&x, (2, 2), (2, 2)).unwrap();
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(arg, vec![3]);

        let c = Tensor4::filled([2, 4, 6, 3], 1.5);
        let (y, arg) = maxpool2d_forward(&c, (2, 2), (2, 2)).unwrap();
        assert!(y.data().iter().all(|&v| v == 1.5));
        // Ties: first element of each window in row-major order.
        assert_eq!(arg[0], 0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_tensor([2, 5, 6, 2], &mut rng);
        let (y, _) = maxpool2d_forward(&x, (2, 2), (2, 2)).unwrap();
        assert_eq!(y.shape(), [2, 3, 3, 2]);
        for b in 0..2 {
            for oy in 0..3 {
                for ox in 0..3 {
                    for ch in 0..2 {
                        let mut m = f64::NEG_INFINITY;
                        for iy in 2 * oy..(2 * oy + 2).min(5) {
                            for ix in 2 * ox..2 * ox + 2 {
                                m = m.max(x.get(b, iy, ix, ch));
                            }
                        }
                        assert_eq!(y.get(b, oy, ox, ch), m);
                    }
                }
            }
        }
    }

    #[test]
    fn maxpool_backward_routes_to_argmax() {
        let x =
            Tensor4::from_vec([1, 2, 4, 1], vec![1.0, 5.0, 2.0, 0.0, 3.0, 4.0, 9.0, 1.0]).unwrap();
        let (_, arg) = maxpool2d_forward(&x, (2, 2), (2, 2)).unwrap();
        let dx = maxpool2d_backward(8, &arg, &[10.0, 20.0]);
        assert_eq!(dx, vec![0.0, 10.0, 0.0, 0.0, 0.0, 0.0, 20.0, 0.0]);
    }

    #[test]
    fn mse_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_tensor([2, 3, 3, 2], &mut rng);
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        let shifted =
            Tensor4::from_vec(a.shape(), a.data().iter().map(|v| v + 2.0).collect()).unwrap();
        assert!((mse_loss(&shifted, &a).unwrap() - 4.0).abs() < 1e-12);
        let b = random_tensor([2, 3, 3, 2], &mut rng);
        let mut acc = 0.0;
        for i in 0..a.len() {
            acc += (a.data()[i] - b.data()[i]).powi(2);
        }
        assert!((mse_loss(&a, &b).unwrap() - acc / 36.0).abs() < 1e-14);
        assert!(mse_loss(&a, &Tensor4::zeros([1, 3, 3, 2])).is_err());
    }
}
