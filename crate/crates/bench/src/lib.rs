//! Shared inputs for the benchmarks.

use fxscale_core::grw::{generate, GrwConfig};
use fxscale_core::PricePath;

/// Random-walk price path of `n_ticks` ticks with the default benchmark
/// volatility.
pub fn walk(n_ticks: usize, seed: u64) -> PricePath {
    generate(&GrwConfig { n_ticks, ..GrwConfig::with_seed(seed) }).expect("valid generator settings").path()
}
