//! Dense and sparse kernels plus a small reverse-mode tape.

mod csr;
mod dense;
pub mod ops;
mod power_series;
mod tape;

pub use csr::SparseCsr;
pub use dense::DenseMatrix;
pub(crate) use dense::euclidean;
pub use ops::{
    dropout, dropout_mask, entropy, relu, row_softmax, sigmoid, sigmoid_binary_cross_entropy,
    softmax, softmax_cross_entropy, DropoutKey,
};
pub use power_series::PowerSeriesOperator;
pub use tape::{GradTape, Gradients, Var};
