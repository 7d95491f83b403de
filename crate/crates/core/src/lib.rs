//! Measuring how conformant code-review patches are with the code a project
//! has already accepted, using n-gram language models.
//!
//! The core is generic over the floating-point type used for probabilities
//! and entropies (see [`Scalar`]); the aliases below fix it to `f64`.

pub mod analysis;
pub mod ingest;
pub mod lexing;
pub mod lm;
pub mod scalar;
pub mod synth;

pub use scalar::Scalar;

pub type Model = lm::NGramModel<f64>;
pub type Smoothing = lm::Smoothing<f64>;
pub type ExperimentConfig = analysis::ExperimentConfig<f64>;
pub type EntropyReport = lm::EntropyReport<f64>;
pub type EntropyAccumulator = lm::EntropyAccumulator<f64>;
