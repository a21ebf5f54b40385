pub mod anonymize;
pub mod audit;
pub mod canon;
pub mod cluster;
pub mod compliance;
pub mod engine;
pub mod error;
pub mod model;
pub mod policy;
pub mod sensitivity;
pub mod store;
pub mod synth;
pub mod trust;
