//! Edge-oriented and path-oriented subnetworks with their classifier heads and
//! domain discriminators, trained on supervised cross-entropy plus an
//! adversarial domain term realized by gradient reversal.

mod adam;
mod config;
mod network;
mod train;

pub use config::TrainConfig;
pub use network::{
    forward_edge, forward_path, Discriminator, EdgeSubnet, PathSubnet, Subnetwork, EDGE_STREAM,
    PATH_STREAM,
};
pub use train::{
    evaluate_objective, target_logits, train_dual, train_subnet, DualLogits, DualModel,
    LossBreakdown, ObjectiveSettings, TraceRow, TrainedSubnet, TrainingData,
};
