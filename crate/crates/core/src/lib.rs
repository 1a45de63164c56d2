pub mod config;
pub mod engine;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod repro;
pub mod scenesim;
pub mod velocity;

pub use engine::{
    whiten, ApplyPath, BlockLayout, FilterBank, Hypothesis, ImageSequence, Mode, VelocityGrid, VelocitySource,
    WhitenOutput, Whitener,
};
pub use error::{Error, Result};
pub use grid::Grid3;
pub use kernels::{FilterParams, Indexing, Velocity};
pub use velocity::VelocityField;
