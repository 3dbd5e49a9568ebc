//! Node embeddings with linear outcome and treatment heads.
//!
//! The outcome head predicts `Q(t, lambda) = lambda . w_t + b_t` for each arm,
//! the treatment head predicts `g(lambda) = sigmoid(lambda . w_g + b_g)`, and
//! the edge model scores a pair by `sigmoid(lambda_i . lambda_j)`.

mod loss;
mod model;
mod train;

pub use loss::{loss, loss_and_gradient, loss_gradient, Gradient};
pub use model::{EmbeddingModel, LinearHead, Nuisance};
pub use train::{initialize, pretrain, train, train_joint, LossWeights, TrainConfig};
