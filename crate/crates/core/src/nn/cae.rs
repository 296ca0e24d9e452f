use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::layer::{Activation, LayerSpec};
use super::network::Sequential;
use super::ops::{mse_grad, mse_loss};
use super::tensor::Tensor4;
use crate::error::{Result, RomError};

pub const LEAKY_SLOPE: f64 = 0.25;

/// Convolutional autoencoder: an encoder to a flat code of length `k` and a
/// decoder back to the input shape.
#[derive(Debug, Clone)]
pub struct CaeNetwork {
    encoder: Sequential,
    decoder: Sequential,
    code_dim: usize,
}

/// Adam state for both halves of a [`CaeNetwork`].
#[derive(Debug, Clone)]
pub struct CaeOptimizer {
    encoder: AdamState,
    decoder: AdamState,
}

impl CaeOptimizer {
    pub fn new(net: &CaeNetwork, learning_rate: f64) -> Result<Self> {
        Ok(CaeOptimizer {
            encoder: AdamState::new(net.encoder.param_count(), learning_rate)?,
            decoder: AdamState::new(net.decoder.param_count(), learning_rate)?,
        })
    }

    pub fn steps(&self) -> u64 {
        self.encoder.steps()
    }
}

/// Loss and parameter gradients for one batch.
#[derive(Debug, Clone)]
pub struct CaeGradients {
    pub loss: f64,
    pub encoder: Vec<f64>,
    pub decoder: Vec<f64>,
}

fn scaled(base: f64, width_scale: f64) -> usize {
    ((base * width_scale).round() as usize).max(1)
}

/// The lid-driven-cavity autoencoder with every filter count and the 128-unit
/// dense layers multiplied by `width_scale`.
pub fn build_reference_cae(
    h: usize,
    w: usize,
    c: usize,
    k: usize,
    width_scale: f64,
) -> Result<CaeNetwork> {
    build_cae(h, w, c, k, width_scale, LEAKY_SLOPE)
}

/// [`build_reference_cae`] with a custom leaky ReLU slope.
pub fn build_cae(
    h: usize,
    w: usize,
    c: usize,
    k: usize,
    width_scale: f64,
    leaky_slope: f64,
) -> Result<CaeNetwork> {
    if h == 0 || w == 0 || !h.is_multiple_of(4) || !w.is_multiple_of(4) {
        return Err(RomError::arg(format!(
            "grid {h}x{w} must be a positive multiple of 4 in each direction"
        )));
    }
    if c == 0 || k == 0 {
        return Err(RomError::arg(
            "channel count and code dimension must be positive",
        ));
    }
    if !(width_scale > 0.0 && width_scale <= 1.0) {
        return Err(RomError::arg(format!(
            "width scale must lie in (0, 1], got {width_scale}"
        )));
    }
    let f1 = scaled(64.0, width_scale);
    let f2 = scaled(32.0, width_scale);
    let dense = scaled(128.0, width_scale);
    if !(leaky_slope >= 0.0 && leaky_slope.is_finite()) {
        return Err(RomError::arg(format!(
            "leaky ReLU slope must be finite and >= 0, got {leaky_slope}"
        )));
    }
    let act = Activation::LeakyRelu(leaky_slope);
    let (h4, w4) = (h / 4, w / 4);

    let encoder = vec![
        LayerSpec::conv(f1, (3, 3), (1, 1), act),
        LayerSpec::max_pool((2, 2), (2, 2)),
        LayerSpec::conv(f2, (3, 3), (1, 1), act),
        LayerSpec::max_pool((2, 2), (2, 2)),
        LayerSpec::reshape([1, 1, h4 * w4 * f2]),
        LayerSpec::dense(dense, act),
        LayerSpec::dense(k, act),
    ];
    let decoder = vec![
        LayerSpec::dense(dense, act),
        LayerSpec::dense(h4 * w4 * f2, act),
        LayerSpec::reshape([h4, w4, f2]),
        LayerSpec::conv_transpose(f2, (3, 3), (2, 2), act),
        LayerSpec::conv_transpose(f1, (3, 3), (2, 2), act),
        LayerSpec::conv_transpose(c, (3, 3), (1, 1), Activation::Sigmoid),
    ];
    CaeNetwork::new([h, w, c], encoder, decoder)
}

impl CaeNetwork {
    pub fn new(
        input_shape: [usize; 3],
        encoder: Vec<LayerSpec>,
        decoder: Vec<LayerSpec>,
    ) -> Result<Self> {
        let encoder = Sequential::new(input_shape, encoder)?;
        let [ch, cw, k] = encoder.output_shape();
        if ch != 1 || cw != 1 {
            return Err(RomError::arg("encoder must end in a flat code"));
        }
        let decoder = Sequential::new([1, 1, k], decoder)?;
        if decoder.output_shape() != input_shape {
            return Err(RomError::arg(format!(
                "decoder output {:?} differs from input {input_shape:?}",
                decoder.output_shape()
            )));
        }
        Ok(CaeNetwork {
            encoder,
            decoder,
            code_dim: k,
        })
    }

    /// He-normal weights and zero biases, encoder first, from one stream.
    pub fn init(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.encoder.init_he(&mut rng);
        self.decoder.init_he(&mut rng);
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.encoder.input_shape()
    }

    pub fn encoder(&self) -> &Sequential {
        &self.encoder
    }

    pub fn decoder(&self) -> &Sequential {
        &self.decoder
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder.param_count()
    }

    /// All parameters, encoder then decoder.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.encoder.params().to_vec();
        p.extend_from_slice(self.decoder.params());
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(RomError::arg(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let (e, d) = params.split_at(self.encoder.param_count());
        self.encoder.set_params(e)?;
        self.decoder.set_params(d)
    }

    /// Codes as a `batch x k` row-major matrix.
    pub fn encode(&self, x: &Tensor4) -> Result<Vec<f64>> {
        Ok(self.encoder.forward(x)?.into_vec())
    }

    /// Decodes a `batch x k` row-major code matrix.
    pub fn decode(&self, codes: &[f64]) -> Result<Tensor4> {
        if codes.is_empty() || !codes.len().is_multiple_of(self.code_dim) {
            return Err(RomError::arg(format!(
                "code buffer of length {} is not a multiple of {}",
                codes.len(),
                self.code_dim
            )));
        }
        let batch = codes.len() / self.code_dim;
        let z = Tensor4::from_vec([batch, 1, 1, self.code_dim], codes.to_vec())?;
        self.decoder.forward(&z)
    }

    pub fn reconstruct(&self, x: &Tensor4) -> Result<Tensor4> {
        self.decode(&self.encode(x)?)
    }

    pub fn loss(&self, x: &Tensor4) -> Result<f64> {
        mse_loss(&self.reconstruct(x)?, x)
    }

    /// Reconstruction loss and its exact gradient.
    pub fn gradients(&self, x: &Tensor4) -> Result<CaeGradients> {
        let enc_cache = self.encoder.forward_cached(x)?;
        let code = Tensor4::from_vec(
            [x.batch(), 1, 1, self.code_dim],
            enc_cache.output().to_vec(),
        )?;
        let dec_cache = self.decoder.forward_cached(&code)?;
        let out = Tensor4::from_vec(x.shape(), dec_cache.output().to_vec())?;
        let loss = mse_loss(&out, x)?;
        let d_out = mse_grad(&out, x);
        let mut decoder = vec![0.0; self.decoder.param_count()];
        let d_code = self
            .decoder
            .backward(&dec_cache, d_out.data(), &mut decoder)?;
        let mut encoder = vec![0.0; self.encoder.param_count()];
        self.encoder
            .param_gradients(&enc_cache, &d_code, &mut encoder)
            .map_err(|e| match e {
                RomError::NonFiniteGradient { layer, kind } => RomError::NonFiniteGradient {
                    layer,
                    kind: format!("encoder {kind}"),
                },
                other => other,
            })?;
        Ok(CaeGradients {
            loss,
            encoder,
            decoder,
        })
    }

    /// One Adam step on a mini-batch; returns the loss before the update.
    pub fn train_step(&mut self, x: &Tensor4, opt: &mut CaeOptimizer) -> Result<f64> {
        let g = self.gradients(x)?;
        adam_step(self.encoder.params_mut(), &g.encoder, &mut opt.encoder)?;
        adam_step(self.decoder.params_mut(), &g.decoder, &mut opt.decoder)?;
        Ok(g.loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes_at_full_width() {
        for k in [5, 35] {
            let net = build_reference_cae(64, 64, 2, k, 1.0).unwrap();
            let enc = net.encoder().layer_shapes();
            assert_eq!(
                enc,
                vec![
                    [64, 64, 64],
                    [32, 32, 64],
                    [32, 32, 32],
                    [16, 16, 32],
                    [1, 1, 8192],
                    [1, 1, 128],
                    [1, 1, k]
                ]
            );
            let dec = net.decoder().layer_shapes();
            assert_eq!(
                dec,
                vec![
                    [1, 1, 128],
                    [1, 1, 8192],
                    [16, 16, 32],
                    [32, 32, 32],
                    [64, 64, 64],
                    [64, 64, 2]
                ]
            );
        }
    }

    #[test]
    fn parameter_count_is_shape_function() {
        let net = build_reference_cae(64, 64, 2, 5, 1.0).unwrap();
        let enc = (9 * 2 * 64 + 64) + (9 * 64 * 32 + 32) + (8192 * 128 + 128) + (128 * 5 + 5);
        let dec = (5 * 128 + 128)
            + (128 * 8192 + 8192)
            + (9 * 32 * 32 + 32)
            + (9 * 32 * 64 + 64)
            + (9 * 64 * 2 + 2);
        assert_eq!(net.param_count(), enc + dec);
    }

    #[test]
    fn micro_network_round_trip_shape() {
        let mut net = build_reference_cae(8, 8, 1, 2, 0.25).unwrap();
        net.init(3);
        let x = Tensor4::filled([3, 8, 8, 1], 0.4);
        let y = net.reconstruct(&x).unwrap();
        assert_eq!(y.shape(), x.shape());
        assert!(y.data().iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(net.encode(&x).unwrap().len(), 6);
    }

    #[test]
    fn builder_errors() {
        assert!(build_reference_cae(10, 8, 1, 2, 1.0).is_err());
        assert!(build_reference_cae(8, 8, 1, 0, 1.0).is_err());
        assert!(build_reference_cae(8, 8, 1, 2, 0.0).is_err());
        assert!(build_reference_cae(8, 8, 1, 2, 1.5).is_err());
    }

    #[test]
    fn identical_seeds_identical_training() {
        let x = Tensor4::from_vec(
            [2, 8, 8, 1],
            (0..128)
                .map(|i| (i as f64 * 0.37).sin() * 0.4 + 0.5)
                .collect(),
        )
        .unwrap();
        let run = || {
            let mut net = build_reference_cae(8, 8, 1, 2, 0.25).unwrap();
            net.init(9);
            let mut opt = CaeOptimizer::new(&net, 1e-3).unwrap();
            for _ in 0..5 {
                net.train_step(&x, &mut opt).unwrap();
            }
            net.params()
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn small_step_decreases_loss() {
        let x = Tensor4::from_vec(
            [4, 8, 8, 1],
            (0..256)
                .map(|i| (i as f64 * 0.11).cos() * 0.3 + 0.5)
                .collect(),
        )
        .unwrap();
        let mut net = build_reference_cae(8, 8, 1, 2, 0.25).unwrap();
        net.init(21);
        let mut opt = CaeOptimizer::new(&net, 1e-4).unwrap();
        let before = net.loss(&x).unwrap();
        net.train_step(&x, &mut opt).unwrap();
        let after = net.loss(&x).unwrap();
        assert!(after < before, "{after} !< {before}");
    }
}
