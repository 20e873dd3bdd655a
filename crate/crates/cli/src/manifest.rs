//! Run manifest written next to every analysis bundle.
//!
//! Nothing time- or host-dependent goes in here, so two runs with the same
//! inputs produce byte-identical manifests.

use fxscale_core::laws::{LawOptions, LogGrid};
use fxscale_core::tickdata::IngestReport;
use fxscale_core::LawId;
use serde::Serialize;

use fxscale_core::pipeline::FitFailure;

#[derive(Debug, Serialize)]
pub struct GridInfo {
    pub len: usize,
    pub first: Option<f64>,
    pub last: Option<f64>,
    pub sha256: String,
}

impl From<&LogGrid> for GridInfo {
    fn from(grid: &LogGrid) -> Self {
        Self {
            len: grid.len(),
            first: grid.points().first().copied(),
            last: grid.points().last().copied(),
            sha256: grid.digest(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Grids {
    pub thresholds: GridInfo,
    pub times: GridInfo,
}

#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub laws: Vec<LawId>,
    pub price_def: &'static str,
    pub tick_threshold: f64,
    pub spread: fxscale_core::SpreadModel,
    pub annualize: &'static str,
    pub fit_from: f64,
    pub coastline_thresholds: Vec<f64>,
    pub dump_events: Vec<f64>,
    pub clamp_time: bool,
}

#[derive(Debug, Serialize)]
pub struct InstrumentEntry {
    pub name: String,
    /// Input file, or the generator settings for a random walk.
    pub source: String,
    pub ingest: Option<IngestReport>,
    pub law_options: Option<LawOptions>,
    pub fits: usize,
    pub fit_failures: Vec<FitFailure>,
    pub crosschecks_failed: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub instrument: Option<String>,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub rng: &'static str,
    pub seed: Option<u64>,
    pub grids: Grids,
    pub config: RunConfig,
    pub instruments: Vec<InstrumentEntry>,
    pub stages: Vec<Stage>,
    pub partial: bool,
}

impl Manifest {
    pub fn stage(&mut self, name: &str, instrument: Option<&str>, result: Result<(), String>) {
        self.stages.push(Stage {
            name: name.to_string(),
            instrument: instrument.map(str::to_string),
            ok: result.is_ok(),
            error: result.err(),
        });
    }

    /// A run is partial when any stage failed or any law could not be fitted.
    pub fn finish(&mut self) {
        self.partial = self.stages.iter().any(|s| !s.ok) || self.instruments.iter().any(|i| !i.fit_failures.is_empty());
    }
}
