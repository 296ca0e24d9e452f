use crate::error::{Result, RomError};

use super::ops::{leaky_relu, sigmoid, Window};

/// Pointwise nonlinearity applied after a layer's linear part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    LeakyRelu(f64),
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::LeakyRelu(a) => leaky_relu(x, a),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the output `y = apply(z)`. For the leaky
    /// ReLU with a positive slope the sign of `y` is the sign of `z`; with a
    /// zero slope, `y == 0` is treated as the negative branch.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::LeakyRelu(a) => {
                if y > 0.0 || (y == 0.0 && a > 0.0) {
                    1.0
                } else {
                    a
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::LeakyRelu(_) => "leaky_relu",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    ConvTranspose,
    MaxPool,
    Dense,
    Reshape,
    Activation,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::ConvTranspose => "conv_transpose",
            LayerKind::MaxPool => "max_pool",
            LayerKind::Dense => "dense",
            LayerKind::Reshape => "reshape",
            LayerKind::Activation => "activation",
        }
    }
}

/// One layer of a sequential network. `units` is the filter count for
/// convolutions and the output width for dense layers; `target` is the
/// per-sample shape of a reshape.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub units: usize,
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
    pub activation: Activation,
    pub target: [usize; 3],
}

impl LayerSpec {
    fn base(kind: LayerKind) -> Self {
        LayerSpec {
            kind,
            units: 0,
            kernel: (1, 1),
            stride: (1, 1),
            activation: Activation::Identity,
            target: [0; 3],
        }
    }

    pub fn conv(
        filters: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        activation: Activation,
    ) -> Self {
        LayerSpec {
            units: filters,
            kernel,
            stride,
            activation,
            ..Self::base(LayerKind::Conv)
        }
    }

    pub fn conv_transpose(
        filters: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        activation: Activation,
    ) -> Self {
        LayerSpec {
            units: filters,
            kernel,
            stride,
            activation,
            ..Self::base(LayerKind::ConvTranspose)
        }
    }

    pub fn max_pool(window: (usize, usize), stride: (usize, usize)) -> Self {
        LayerSpec {
            kernel: window,
            stride,
            ..Self::base(LayerKind::MaxPool)
        }
    }

    /// Fully connected layer; a multi-dimensional input is flattened in
    /// storage order.
    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec {
            units,
            activation,
            ..Self::base(LayerKind::Dense)
        }
    }

    pub fn reshape(target: [usize; 3]) -> Self {
        LayerSpec {
            target,
            ..Self::base(LayerKind::Reshape)
        }
    }

    pub fn activation(activation: Activation) -> Self {
        LayerSpec {
            activation,
            ..Self::base(LayerKind::Activation)
        }
    }

    fn validate(&self) -> Result<()> {
        let positive =
            self.kernel.0 > 0 && self.kernel.1 > 0 && self.stride.0 > 0 && self.stride.1 > 0;
        if !positive {
            return Err(RomError::arg(format!(
                "{} layer needs positive kernel and stride",
                self.kind.name()
            )));
        }
        let needs_units = matches!(
            self.kind,
            LayerKind::Conv | LayerKind::ConvTranspose | LayerKind::Dense
        );
        if needs_units && self.units == 0 {
            return Err(RomError::arg(format!(
                "{} layer needs at least one unit",
                self.kind.name()
            )));
        }
        if let Activation::LeakyRelu(a) = self.activation {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(RomError::arg(format!(
                    "leaky ReLU slope must be >= 0, got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Output shape for a given per-sample input shape.
    pub fn output_shape(&self, input: [usize; 3]) -> Result<[usize; 3]> {
        self.validate()?;
        let [h, w, c] = input;
        Ok(match self.kind {
            LayerKind::Conv | LayerKind::MaxPool => {
                let g = Window::same(h, w, c, self.kernel, self.stride);
                let ch = if self.kind == LayerKind::Conv {
                    self.units
                } else {
                    c
                };
                [g.ho, g.wo, ch]
            }
            LayerKind::ConvTranspose => [h * self.stride.0, w * self.stride.1, self.units],
            LayerKind::Dense => [1, 1, self.units],
            LayerKind::Reshape => {
                if self.target.iter().product::<usize>() != h * w * c {
                    return Err(RomError::arg(format!(
                        "cannot reshape {input:?} to {:?}",
                        self.target
                    )));
                }
                self.target
            }
            LayerKind::Activation => input,
        })
    }

    /// Number of weights (excluding biases) for a given input shape.
    pub fn weight_count(&self, input: [usize; 3]) -> usize {
        let [h, w, c] = input;
        match self.kind {
            LayerKind::Conv | LayerKind::ConvTranspose => {
                self.kernel.0 * self.kernel.1 * c * self.units
            }
            LayerKind::Dense => h * w * c * self.units,
            _ => 0,
        }
    }

    pub fn bias_count(&self) -> usize {
        match self.kind {
            LayerKind::Conv | LayerKind::ConvTranspose | LayerKind::Dense => self.units,
            _ => 0,
        }
    }

    /// Fan-in used for He initialization.
    pub fn fan_in(&self, input: [usize; 3]) -> usize {
        let [h, w, c] = input;
        match self.kind {
            LayerKind::Conv | LayerKind::ConvTranspose => self.kernel.0 * self.kernel.1 * c,
            LayerKind::Dense => h * w * c,
            _ => 0,
        }
    }
}
