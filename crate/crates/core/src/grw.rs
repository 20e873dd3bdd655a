//! Gaussian random walk benchmark.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tickdata::{PriceDefinition, Tick, TickSeries};

/// Name of the generator recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3)";

/// Instrument label of generated series.
pub const GRW_INSTRUMENT: &str = "GRW";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrwConfig {
    pub x0: f64,
    /// Standard deviation of one absolute price increment.
    pub sigma: f64,
    pub mu: f64,
    /// Seconds between ticks.
    pub dt: f64,
    pub n_ticks: usize,
    pub seed: u64,
    /// Relative bid/ask spread around the walk; zero gives bid = ask.
    pub spread: f64,
}

impl Default for GrwConfig {
    fn default() -> Self {
        Self { x0: 1.336723, sigma: 1.0 / 6769.6, mu: 0.0, dt: 1.0, n_ticks: 1_000_000, seed: 42, spread: 0.0 }
    }
}

impl GrwConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("grw: {what}")));
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be finite and non-negative");
        }
        if self.n_ticks < 2 {
            return bad("n_ticks must be at least 2");
        }
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return bad("x0 must be a positive price");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.spread.is_finite() && (0.0..2.0).contains(&self.spread)) {
            return bad("spread must lie in [0, 2)");
        }
        Ok(())
    }
}

/// Running sum of i.i.d. normal increments, one tick per `dt`.
///
/// The duplicate-price filter is not applied.
pub fn generate(config: &GrwConfig) -> Result<TickSeries> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(config.mu, config.sigma).map_err(|e| Error::Config(format!("grw: {e}")))?;
    let half = 0.5 * config.spread;

    let mut ticks = Vec::with_capacity(config.n_ticks);
    let mut x = config.x0;
    for i in 0..config.n_ticks {
        if i > 0 {
            x += normal.sample(&mut rng);
        }
        if x <= 0.0 {
            return Err(Error::Config(format!("grw: price reached {x} at tick {i}")));
        }
        ticks.push(Tick::new(i as f64 * config.dt, x * (1.0 - half), x * (1.0 + half)));
    }
    TickSeries::unfiltered(GRW_INSTRUMENT, ticks, PriceDefinition::ArithmeticMid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GrwConfig {
        GrwConfig { n_ticks: 10_000, seed, ..Default::default() }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = generate(&small(7)).unwrap();
        let b = generate(&small(7)).unwrap();
        assert_eq!(a.ticks(), b.ticks());
        let c = generate(&small(8)).unwrap();
        assert_ne!(a.ticks(), c.ticks());
    }

    #[test]
    fn zero_sigma_is_constant() {
        let config = GrwConfig { sigma: 0.0, ..small(1) };
        let series = generate(&config).unwrap();
        assert_eq!(series.len(), 10_000);
        assert!(series.prices().iter().all(|&p| p == config.x0));
        let (filtered, dropped) =
            TickSeries::filtered("GRW", series.ticks().to_vec(), PriceDefinition::ArithmeticMid).unwrap();
        assert_eq!(filtered.len(), 1);
        assert_eq!(dropped, 9_999);
    }

    #[test]
    fn spread_keeps_mid() {
        let config = GrwConfig { spread: 0.0002, ..small(3) };
        let series = generate(&config).unwrap();
        let plain = generate(&small(3)).unwrap();
        for (s, p) in series.ticks().iter().zip(plain.ticks()) {
            assert!((0.5 * (s.bid + s.ask) - p.bid).abs() < 1e-15);
            assert!((s.relative_spread() - 0.0002).abs() < 1e-12);
        }
    }

    #[test]
    fn timestamps_step_by_dt() {
        let series = generate(&small(2)).unwrap();
        assert_eq!(series.ticks()[0].timestamp, 0.0);
        assert_eq!(series.ticks()[9_999].timestamp, 9_999.0);
        assert_eq!(series.ticks()[0].bid, 1.336723);
    }

    #[test]
    fn invalid_configs() {
        assert!(generate(&GrwConfig { n_ticks: 1, ..small(1) }).is_err());
        assert!(generate(&GrwConfig { sigma: -1.0, ..small(1) }).is_err());
    }
}
