pub mod distribution;
pub mod eval;
pub mod error;
pub mod generators;
pub mod io;
pub mod mapping;
pub mod noise;
pub mod pipeline;
pub mod resample;
pub mod rng;
pub mod saliency;
pub mod sequence;
pub mod signal;

pub use distribution::{sample_bounded, BoundedDistribution, DistributionKind};
pub use error::{Error, Result};
pub use rng::RandomSource;
pub use signal::{MovementLabel, SampledSignal, SignalSample, VelocityProfile};
