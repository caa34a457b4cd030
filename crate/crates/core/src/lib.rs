//! Binary hyperdimensional computing for multimodal physiological
//! classification: bit-packed hypervectors, a rule-90 vector generator,
//! memory-optimized item memories, early/late fusion encoders, an
//! associative memory, and the data pipeline and experiment runner around
//! them.

pub mod amem;
pub mod ca90;
pub mod datapipe;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod hv;
pub mod imstore;
pub mod seed;

pub use amem::{AssociativeMemory, Inference};
pub use ca90::{rule90_step, Ca90Stream};
pub use encoder::{EncodedSample, NgramState};
pub use error::{Error, Result};
pub use hv::{bundle, BundleAccumulator, Hypervector, DEFAULT_DIM};
pub use imstore::{
    analytic_metrics, assign_combinatorial, min_bank_size, tfc, ChannelVectorSet, DatasetLayout,
    ProviderMetrics, Strategy, VectorProvider,
};
