//! A small 64-bit neural-network engine: NHWC tensors, convolution,
//! transposed convolution, max pooling, dense layers, exact reverse-mode
//! gradients and Adam.

mod adam;
mod cae;
mod gemm;
mod init;
mod layer;
mod network;
mod ops;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use cae::{
    build_cae, build_reference_cae, CaeGradients, CaeNetwork, CaeOptimizer, LEAKY_SLOPE,
};
pub use init::{he_normal_init, zero_bias};
pub use layer::{Activation, LayerKind, LayerSpec};
pub use network::{ForwardCache, Sequential};
pub use ops::{
    conv2d_forward, conv2d_transpose_forward, dense_forward, leaky_relu, leaky_relu_grad,
    maxpool2d_backward, maxpool2d_forward, mse_grad, mse_loss, same_padding, sigmoid,
};
pub use tensor::Tensor4;
