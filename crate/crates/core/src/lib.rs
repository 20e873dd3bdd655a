//! Event-based analysis of tick price series.
//!
//! The crate dissects a quote stream into directional-change and overshoot
//! segments at a sweep of relative thresholds, aggregates the resulting
//! observables on logarithmic grids, fits power laws `y = (x / C)^E` in
//! log-log space, and cross-checks the fitted laws against each other.
//!
//! Module map:
//!
//! - [`tickdata`]: CSV ingestion, duplicate filtering, mid-price views and
//!   last-quote sampling on a fixed time grid.
//! - [`events`]: streaming price-move counter and directional-change
//!   dissector.
//! - [`laws`]: threshold/time grids and the observable behind every law.
//! - [`fitting`]: log-log least squares, curvature diagnostic and error
//!   propagation for the scale parameter.
//! - [`grw`]: Gaussian random walk benchmark generator.
//! - [`consistency`]: identities linking pairs of fitted laws.
//! - [`report`]: appendix-style tables and CSV/JSON emitters.
//! - [`pipeline`]: the end-to-end analysis of one instrument.

pub mod consistency;
pub mod error;
pub mod events;
pub mod fitting;
pub mod grw;
pub mod laws;
pub mod pipeline;
pub mod report;
pub mod tickdata;

pub use consistency::CrossCheck;
pub use error::{Error, Result};
pub use events::{Direction, EventRecord};
pub use fitting::FitResult;
pub use grw::GrwConfig;
pub use laws::{Annualization, LawId, LawOptions, LawSample, Leg, SpreadModel, ThresholdGrid, TimeGrid};
pub use tickdata::{PriceDefinition, PricePath, Tick, TickSeries, SECONDS_PER_YEAR};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
