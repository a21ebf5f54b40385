//! Know-your-user trust scoring.

pub mod forest;
pub mod interpret;

pub use forest::{
    feature_vector, score_trust, synthesize_training_data, train_trust_model, ForestParams,
    TrainingRow, TrustModel,
};
pub use interpret::{oracle_trust, RequestInterpreter, TrustFeatures};
