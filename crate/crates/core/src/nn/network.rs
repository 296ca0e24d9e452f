use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::layer::{Activation, LayerKind, LayerSpec};
use super::ops::{
    conv_backward_raw, conv_forward_raw, conv_transpose_backward_raw, conv_transpose_forward_raw,
    dense_backward, dense_batch, maxpool2d_backward, maxpool_raw, transpose_window, Window,
};
use super::tensor::Tensor4;
use crate::error::{Result, RomError};

#[derive(Debug, Clone)]
struct Resolved {
    input: [usize; 3],
    output: [usize; 3],
    offset: usize,
    weights: usize,
    biases: usize,
}

/// A chain of layers over a fixed per-sample input shape, with all
/// parameters in one flat vector (per layer: weights, then biases).
#[derive(Debug, Clone)]
pub struct Sequential {
    specs: Vec<LayerSpec>,
    resolved: Vec<Resolved>,
    input_shape: [usize; 3],
    params: Vec<f64>,
}

/// Intermediate values retained by [`Sequential::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// `outputs[0]` is the input; `outputs[i + 1]` the output of layer `i`.
    outputs: Vec<Vec<f64>>,
    cols: Vec<Option<Vec<f64>>>,
    argmax: Vec<Option<Vec<usize>>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("cache holds the input")
    }
}

impl Sequential {
    pub fn new(input_shape: [usize; 3], specs: Vec<LayerSpec>) -> Result<Self> {
        if input_shape.contains(&0) {
            return Err(RomError::arg(format!(
                "input shape {input_shape:?} has a zero extent"
            )));
        }
        let mut resolved = Vec::with_capacity(specs.len());
        let mut shape = input_shape;
        let mut offset = 0;
        for spec in &specs {
            let output = spec.output_shape(shape)?;
            let weights = spec.weight_count(shape);
            let biases = spec.bias_count();
            resolved.push(Resolved {
                input: shape,
                output,
                offset,
                weights,
                biases,
            });
            offset += weights + biases;
            shape = output;
        }
        Ok(Sequential {
            specs,
            resolved,
            input_shape,
            params: vec![0.0; offset],
        })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn output_shape(&self) -> [usize; 3] {
        self.resolved.last().map_or(self.input_shape, |r| r.output)
    }

    /// Per-sample output shape after each layer.
    pub fn layer_shapes(&self) -> Vec<[usize; 3]> {
        self.resolved.iter().map(|r| r.output).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(RomError::arg(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Fills weights with He-normal draws and biases with zeros, in layer
    /// order from a single stream.
    pub fn init_he(&mut self, rng: &mut ChaCha8Rng) {
        for (spec, r) in self.specs.iter().zip(&self.resolved) {
            if r.weights == 0 && r.biases == 0 {
                continue;
            }
            let std = (2.0 / spec.fan_in(r.input) as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("finite positive std");
            for p in &mut self.params[r.offset..r.offset + r.weights] {
                *p = normal.sample(rng);
            }
            self.params[r.offset + r.weights..r.offset + r.weights + r.biases].fill(0.0);
        }
    }

    fn check_input(&self, x: &Tensor4) -> Result<()> {
        if x.sample_shape() != self.input_shape {
            return Err(RomError::arg(format!(
                "network expects samples of shape {:?}, got {:?}",
                self.input_shape,
                x.sample_shape()
            )));
        }
        Ok(())
    }

    /// Runs layer `i` on a batch; returns its activated output plus the
    /// unfolded input (convolutions) or winning indices (pooling).
    fn layer_forward(
        &self,
        i: usize,
        input: &[f64],
        batch: usize,
    ) -> (Vec<f64>, Option<Vec<f64>>, Option<Vec<usize>>) {
        let spec = &self.specs[i];
        let r = &self.resolved[i];
        let weights = &self.params[r.offset..r.offset + r.weights];
        let bias = &self.params[r.offset + r.weights..r.offset + r.weights + r.biases];
        let [h, w, c] = r.input;
        let mut cols = None;
        let mut argmax = None;
        let mut out = match spec.kind {
            LayerKind::Conv => {
                let g = Window::same(h, w, c, spec.kernel, spec.stride);
                let (out, unfolded) = conv_forward_raw(input, batch, &g, weights, bias);
                cols = Some(unfolded);
                out
            }
            LayerKind::ConvTranspose => {
                let g = transpose_window(h, w, spec.units, spec.kernel, spec.stride);
                conv_transpose_forward_raw(input, batch, c, &g, weights, bias)
            }
            LayerKind::MaxPool => {
                let g = Window::same(h, w, c, spec.kernel, spec.stride);
                let (out, arg) = maxpool_raw(input, batch, &g);
                argmax = Some(arg);
                out
            }
            LayerKind::Dense => dense_batch(input, batch, weights, bias),
            LayerKind::Reshape | LayerKind::Activation => input.to_vec(),
        };
        let act = spec.activation;
        if act != Activation::Identity {
            for v in &mut out {
                *v = act.apply(*v);
            }
        }
        (out, cols, argmax)
    }

    pub fn forward(&self, x: &Tensor4) -> Result<Tensor4> {
        self.check_input(x)?;
        let batch = x.batch();
        let mut current: Option<Vec<f64>> = None;
        for i in 0..self.specs.len() {
            let input = current.as_deref().unwrap_or(x.data());
            current = Some(self.layer_forward(i, input, batch).0);
        }
        let out = current.unwrap_or_else(|| x.data().to_vec());
        let [h, w, c] = self.output_shape();
        Tensor4::from_vec([batch, h, w, c], out)
    }

    pub fn forward_cached(&self, x: &Tensor4) -> Result<ForwardCache> {
        self.check_input(x)?;
        let batch = x.batch();
        let n = self.specs.len();
        let mut cache = ForwardCache {
            batch,
            outputs: Vec::with_capacity(n + 1),
            cols: Vec::with_capacity(n),
            argmax: Vec::with_capacity(n),
        };
        cache.outputs.push(x.data().to_vec());
        for i in 0..n {
            let (out, cols, argmax) =
                self.layer_forward(i, cache.outputs.last().expect("non-empty"), batch);
            cache.outputs.push(out);
            cache.cols.push(cols);
            cache.argmax.push(argmax);
        }
        Ok(cache)
    }

    /// Reverse pass. `d_out` is the loss gradient with respect to the network
    /// output; parameter gradients are written into `grads` (overwritten)
    /// and the gradient with respect to the input is returned.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_out: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        self.backward_impl(cache, d_out, grads, true)
    }

    /// [`Sequential::backward`] without the input gradient, which saves the
    /// most expensive product of the first layer.
    pub fn param_gradients(
        &self,
        cache: &ForwardCache,
        d_out: &[f64],
        grads: &mut [f64],
    ) -> Result<()> {
        self.backward_impl(cache, d_out, grads, false).map(|_| ())
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        d_out: &[f64],
        grads: &mut [f64],
        input_grad: bool,
    ) -> Result<Vec<f64>> {
        if grads.len() != self.params.len() {
            return Err(RomError::arg(
                "gradient buffer length differs from parameter count",
            ));
        }
        if d_out.len() != cache.output().len() {
            return Err(RomError::arg(
                "output gradient length differs from network output",
            ));
        }
        let batch = cache.batch;
        let mut delta = d_out.to_vec();
        for (i, (spec, r)) in self.specs.iter().zip(&self.resolved).enumerate().rev() {
            if spec.activation != Activation::Identity {
                for (d, &y) in delta.iter_mut().zip(&cache.outputs[i + 1]) {
                    *d *= spec.activation.derivative_from_output(y);
                }
            }
            let input = &cache.outputs[i];
            let weights = &self.params[r.offset..r.offset + r.weights];
            let (dw, db) = grads[r.offset..r.offset + r.weights + r.biases].split_at_mut(r.weights);
            let [h, w, c] = r.input;
            let need_dx = input_grad || i > 0;
            delta = match spec.kind {
                LayerKind::Conv => {
                    let g = Window::same(h, w, c, spec.kernel, spec.stride);
                    let cols = cache.cols[i].as_ref().expect("conv caches its columns");
                    conv_backward_raw(cols, batch, &g, weights, &delta, dw, db, need_dx)
                }
                LayerKind::ConvTranspose => {
                    let g = transpose_window(h, w, spec.units, spec.kernel, spec.stride);
                    conv_transpose_backward_raw(
                        input, batch, c, &g, weights, &delta, dw, db, need_dx,
                    )
                }
                _ if !need_dx => Vec::new(),
                LayerKind::MaxPool => {
                    let arg = cache.argmax[i].as_ref().expect("pool caches its argmax");
                    maxpool2d_backward(input.len(), arg, &delta)
                }
                LayerKind::Dense => dense_backward(input, batch, weights, &delta, dw, db, need_dx),
                LayerKind::Reshape | LayerKind::Activation => delta,
            };
            let finite = delta.iter().all(|v| v.is_finite())
                && grads[r.offset..r.offset + r.weights + r.biases]
                    .iter()
                    .all(|v| v.is_finite());
            if !finite {
                return Err(RomError::NonFiniteGradient {
                    layer: i,
                    kind: spec.kind.name().to_string(),
                });
            }
        }
        Ok(delta)
    }
}
