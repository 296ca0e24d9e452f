use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pod_gpr::fit_coefficient_models;
use super::reshape::{inverse_reshape, reshape_batch};
use super::scaling::{minmax_fit_transform, ScalingInfo, ScalingMode};
use crate::error::{Result, RomError};
use crate::gpr::{GprConfig, GprModel};
use crate::linalg::SnapshotMatrix;
use crate::nn::{build_cae, CaeNetwork, CaeOptimizer, Tensor4, LEAKY_SLOPE};

/// Autoencoder training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CaeTrainConfig {
    pub width_scale: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub leaky_slope: f64,
    pub scaling: ScalingMode,
}

impl Default for CaeTrainConfig {
    fn default() -> Self {
        CaeTrainConfig {
            width_scale: 1.0,
            max_epochs: 7500,
            patience: 500,
            batch_size: 8,
            learning_rate: 3e-4,
            leaky_slope: LEAKY_SLOPE,
            scaling: ScalingMode::ChannelGlobal,
        }
    }
}

impl CaeTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.patience == 0 || self.batch_size == 0 {
            return Err(RomError::arg(
                "epochs, patience and batch size must be positive",
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(RomError::arg("learning rate must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Per-epoch losses of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingHistory {
    pub fn epochs(&self) -> usize {
        self.val_loss.len()
    }

    pub fn best_val_loss(&self) -> f64 {
        self.val_loss[self.best_epoch - 1]
    }
}

/// Mini-batch Adam on the reconstruction loss with early stopping on the
/// validation loss. Training indices are reshuffled every epoch; the last
/// short batch is kept. Stops once `patience` consecutive epochs fail to
/// improve strictly on the best validation loss, then restores the best
/// parameters.
pub fn train_autoencoder(
    net: &mut CaeNetwork,
    train: &Tensor4,
    val: &Tensor4,
    config: &CaeTrainConfig,
    seed: u64,
) -> Result<TrainingHistory> {
    config.validate()?;
    if train.batch() == 0 || val.batch() == 0 {
        return Err(RomError::arg(
            "training and validation sets must be nonempty",
        ));
    }
    let mut opt = CaeOptimizer::new(net, config.learning_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..train.batch()).collect();
    let mut history = TrainingHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best = f64::INFINITY;
    let mut best_params = net.params();
    let mut wait = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = train.gather(chunk);
            let loss = net.train_step(&batch, &mut opt).map_err(|e| match e {
                RomError::NonFiniteGradient { layer, kind } => RomError::Training {
                    epoch,
                    message: format!("non-finite gradient in layer {layer} ({kind})"),
                },
                other => other,
            })?;
            if !loss.is_finite() {
                return Err(RomError::Training {
                    epoch,
                    message: "training loss is not finite".into(),
                });
            }
            sum += loss * chunk.len() as f64;
        }
        let val_loss = net.loss(val)?;
        if !val_loss.is_finite() {
            return Err(RomError::Training {
                epoch,
                message: "validation loss is not finite".into(),
            });
        }
        history.train_loss.push(sum / train.batch() as f64);
        history.val_loss.push(val_loss);
        if val_loss < best {
            best = val_loss;
            best_params = net.params();
            history.best_epoch = epoch;
            wait = 0;
        } else {
            wait += 1;
            if wait >= config.patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    net.set_params(&best_params)?;
    Ok(history)
}

/// Trained autoencoder, per-channel scaling and one regression per code
/// entry.
#[derive(Debug, Clone)]
pub struct CaeGpr {
    network: CaeNetwork,
    scaling: Vec<ScalingInfo>,
    ny: usize,
    nx: usize,
    models: Vec<GprModel>,
    epochs: usize,
}

fn check_channels(channels: &[&SnapshotMatrix], ny: usize, nx: usize) -> Result<usize> {
    if channels.is_empty() {
        return Err(RomError::arg("no state channels"));
    }
    let n = channels[0].len();
    for (c, s) in channels.iter().enumerate() {
        if s.state_dim() != ny * nx {
            return Err(RomError::arg(format!(
                "channel {c} has N = {} but the grid is {ny}x{nx}",
                s.state_dim()
            )));
        }
        if s.len() != n {
            return Err(RomError::arg("channels hold different snapshot counts"));
        }
    }
    Ok(n)
}

/// Scaled snapshots of every channel as one grid batch.
fn scaled_tensor(
    channels: &[&SnapshotMatrix],
    scaling: &[ScalingInfo],
    ny: usize,
    nx: usize,
) -> Result<Tensor4> {
    let n = channels[0].len();
    let mut scaled: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut per = Vec::with_capacity(channels.len());
        for (s, info) in channels.iter().zip(scaling) {
            per.push(info.transform(&s.column(j))?);
        }
        scaled.push(per);
    }
    let refs: Vec<Vec<&[f64]>> = scaled
        .iter()
        .map(|p| p.iter().map(|v| v.as_slice()).collect())
        .collect();
    reshape_batch(&refs, ny, nx)
}

/// Offline stage: scale, reshape, train the autoencoder, encode the training
/// set and fit the coefficient regressions.
#[allow(clippy::too_many_arguments)]
pub fn cae_gpr_offline(
    train: &[&SnapshotMatrix],
    val: &[&SnapshotMatrix],
    ny: usize,
    nx: usize,
    k: usize,
    train_config: &CaeTrainConfig,
    gpr_config: &GprConfig,
    seed: u64,
) -> Result<(CaeGpr, TrainingHistory)> {
    if ny == 0 || nx == 0 {
        return Err(RomError::arg(
            "autoencoder surrogates need gridded (structured) data",
        ));
    }
    check_channels(train, ny, nx)?;
    if val.len() != train.len() {
        return Err(RomError::arg(
            "validation set has a different channel count",
        ));
    }
    if check_channels(val, ny, nx)? == 0 {
        return Err(RomError::arg("validation set is empty"));
    }
    let mut scaling = Vec::with_capacity(train.len());
    for s in train {
        scaling.push(minmax_fit_transform(s.data(), train_config.scaling)?.1);
    }
    let x_train = scaled_tensor(train, &scaling, ny, nx)?;
    let x_val = scaled_tensor(val, &scaling, ny, nx)?;

    let mut network = build_cae(
        ny,
        nx,
        train.len(),
        k,
        train_config.width_scale,
        train_config.leaky_slope,
    )?;
    network.init(seed);
    let history = train_autoencoder(
        &mut network,
        &x_train,
        &x_val,
        train_config,
        seed.wrapping_add(1),
    )?;

    let codes = network.encode(&x_train)?;
    let coeffs: Vec<Vec<f64>> = codes.chunks_exact(k).map(|c| c.to_vec()).collect();
    let models = fit_coefficient_models(train[0].params(), &coeffs, k, gpr_config, seed)?;
    let epochs = history.epochs();
    Ok((
        CaeGpr {
            network,
            scaling,
            ny,
            nx,
            models,
            epochs,
        },
        history,
    ))
}

impl CaeGpr {
    pub fn from_parts(
        network: CaeNetwork,
        scaling: Vec<ScalingInfo>,
        ny: usize,
        nx: usize,
        models: Vec<GprModel>,
        epochs: usize,
    ) -> Result<Self> {
        let [h, w, c] = network.input_shape();
        if h != ny || w != nx || c != scaling.len() || models.len() != network.code_dim() {
            return Err(RomError::Format(
                "autoencoder surrogate parts are inconsistent".into(),
            ));
        }
        Ok(CaeGpr {
            network,
            scaling,
            ny,
            nx,
            models,
            epochs,
        })
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn network(&self) -> &CaeNetwork {
        &self.network
    }

    pub fn scaling(&self) -> &[ScalingInfo] {
        &self.scaling
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn channels(&self) -> usize {
        self.scaling.len()
    }

    pub fn models(&self) -> &[GprModel] {
        &self.models
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn param_dim(&self) -> usize {
        self.models[0].input_dim()
    }

    pub fn predict_coefficients(&self, mu: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != self.param_dim() {
            return Err(RomError::arg(format!(
                "query has {} parameters, model expects {}",
                mu.len(),
                self.param_dim()
            )));
        }
        self.models.iter().map(|m| m.predict_mean(mu)).collect()
    }

    fn decode_unscaled(&self, codes: &[f64]) -> Result<Vec<Vec<f64>>> {
        let out = self.network.decode(codes)?;
        let scaled = inverse_reshape(&out, 0)?;
        scaled
            .iter()
            .zip(&self.scaling)
            .map(|(s, info)| info.inverse(s))
            .collect()
    }

    /// Online stage: coefficients, decoder, inverse scaling and inverse
    /// reshape. One state vector per channel.
    pub fn predict(&self, mu: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.decode_unscaled(&self.predict_coefficients(mu)?)
    }

    /// Autoencoder projection `decode(encode(x))` in original units.
    pub fn project(&self, x: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        Ok(self.encode_and_project(x)?.1)
    }

    /// Code of a state together with its projection.
    pub fn encode_and_project(&self, x: &[&[f64]]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if x.len() != self.channels() {
            return Err(RomError::arg(format!(
                "expected {} channels, got {}",
                self.channels(),
                x.len()
            )));
        }
        let scaled: Vec<Vec<f64>> = x
            .iter()
            .zip(&self.scaling)
            .map(|(s, info)| info.transform(s))
            .collect::<Result<_>>()?;
        let refs: Vec<&[f64]> = scaled.iter().map(|v| v.as_slice()).collect();
        let t = reshape_batch(&[refs], self.ny, self.nx)?;
        let code = self.network.encode(&t)?;
        let proj = self.decode_unscaled(&code)?;
        Ok((code, proj))
    }
}
