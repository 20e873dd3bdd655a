//! End-to-end analysis of one instrument: law samples, fits, cross-checks
//! and the coastline table.

use serde::{Deserialize, Serialize};

use crate::consistency::{self, CrossCheck, DerivedLaw};
use crate::error::{Error, Result};
use crate::events::{directional_change_dissect, DEFAULT_TICK_THRESHOLD};
use crate::laws::{
    coastline_report, compute_laws, Annualization, CoastlineOptions, CoastlineRow, LawId, LawOptions, LawSample,
    LogGrid, Moment, ThresholdGrid, TimeGrid,
};
use crate::report::{fit_report, FitRow};
use crate::tickdata::TickSeries;

/// Thresholds of the coastline table unless overridden.
pub const DEFAULT_COASTLINE_THRESHOLDS: [f64; 4] = [0.0001, 0.001, 0.01, 0.05];
/// Threshold at which the dissection identities are checked.
pub const DISSECTION_CHECK_THRESHOLD: f64 = 0.001;
/// Lower abscissa bound of the cost-adjusted coastline fit.
pub const DEFAULT_FIT_FROM: f64 = 0.002;

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub laws: Vec<LawId>,
    pub law_options: LawOptions,
    pub fit_from: f64,
    pub thresholds: LogGrid,
    pub times: LogGrid,
    /// Empty disables the coastline table.
    pub coastline_thresholds: Vec<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            laws: LawId::ALL.to_vec(),
            law_options: LawOptions { tick_threshold: DEFAULT_TICK_THRESHOLD, ..Default::default() },
            fit_from: DEFAULT_FIT_FROM,
            thresholds: ThresholdGrid::standard(),
            times: TimeGrid::standard(),
            coastline_thresholds: DEFAULT_COASTLINE_THRESHOLDS.to_vec(),
        }
    }
}

/// Parses a law selection: `all`, `coastline` (no grid laws), or a comma
/// separated list of law names or table ids.
pub fn parse_law_selection(spec: &str) -> Result<Vec<LawId>> {
    match spec.trim() {
        "all" => Ok(LawId::ALL.to_vec()),
        "coastline" | "none" | "" => Ok(Vec::new()),
        list => list.split(',').map(|s| s.trim().parse()).collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitFailure {
    pub law: LawId,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct InstrumentReport {
    pub instrument: String,
    pub samples: Vec<(LawId, Vec<LawSample>)>,
    pub fits: Vec<FitRow>,
    pub fit_failures: Vec<FitFailure>,
    pub crosschecks: Vec<CrossCheck>,
    pub derived_tick_time: Option<DerivedLaw>,
    pub coastline: Vec<CoastlineRow>,
}

impl InstrumentReport {
    pub fn fit(&self, law: LawId) -> Option<&FitRow> {
        self.fits.iter().find(|f| f.law == law)
    }

    pub fn samples(&self, law: LawId) -> Option<&[LawSample]> {
        self.samples.iter().find(|(l, _)| *l == law).map(|(_, s)| s.as_slice())
    }

    pub fn is_complete(&self) -> bool {
        self.fit_failures.is_empty()
    }
}

pub fn fit_range(law: LawId, fit_from: f64) -> Option<(f64, f64)> {
    (law == LawId::CumulativeCostAdjusted).then_some((fit_from, f64::INFINITY))
}

/// Cross-checks that need only fitted laws. `period_seconds` is the length
/// of the counting period behind the count laws; `tick_threshold` is a
/// relative fraction.
pub fn crosschecks_from_fits(
    fits: &[FitRow],
    period_seconds: f64,
    tick_threshold: f64,
) -> (Vec<CrossCheck>, Option<DerivedLaw>) {
    let get = |law: LawId| fits.iter().find(|f| f.law == law).map(FitRow::as_fit);
    let mut checks = Vec::new();
    if let (Some(t), Some(n)) = (get(LawId::TimeOfMove), get(LawId::MoveCount)) {
        checks.extend(consistency::check_count_time(&t, &n, period_seconds, "move").into_iter().flatten());
    }
    if let (Some(t), Some(n)) = (get(LawId::TimeOfDc), get(LawId::DcCount)) {
        checks.extend(consistency::check_count_time(&t, &n, period_seconds, "dc").into_iter().flatten());
    }
    let ret = get(LawId::MeanReturn(Moment::P1));
    if let (Some(t), Some(x)) = (get(LawId::TimeOfMove), ret) {
        checks.extend(consistency::check_inverse(&t, &x).into_iter().flatten());
    }
    let derived = match (ret, get(LawId::TickCount)) {
        (Some(x), Some(n)) => consistency::derive_tick_time_law(&x, &n).ok(),
        _ => None,
    };
    if let (Some(d), Some(t)) = (derived, get(LawId::TimeOfMove)) {
        checks.push(consistency::check_tick_time(&d, &t, tick_threshold * LawId::TimeOfMove.abscissa_scale()));
    }
    (checks, derived)
}

pub fn analyze(series: &TickSeries, config: &AnalysisConfig) -> Result<InstrumentReport> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort { len: series.len(), min: 2 });
    }
    let path = series.path();
    let opts = &config.law_options;
    let samples = compute_laws(&path, &config.laws, &config.thresholds, &config.times, opts)?;

    let mut fits = Vec::new();
    let mut fit_failures = Vec::new();
    for (law, law_samples) in &samples {
        match fit_report(series.instrument(), *law, law_samples, fit_range(*law, config.fit_from)) {
            Ok(row) => fits.push(row),
            Err(err) => fit_failures.push(FitFailure { law: *law, error: err.to_string() }),
        }
    }

    let period = opts.annualization.period_seconds(&path);
    let (mut crosschecks, derived_tick_time) = crosschecks_from_fits(&fits, period, opts.tick_threshold);
    if !config.laws.is_empty() {
        let dissection = directional_change_dissect(&path, DISSECTION_CHECK_THRESHOLD, opts.tick_threshold)?;
        if let Ok(checks) = consistency::check_dissection(&dissection.records, DISSECTION_CHECK_THRESHOLD) {
            crosschecks.extend(checks);
        }
    }

    let coastline = if config.coastline_thresholds.is_empty() {
        Vec::new()
    } else {
        coastline_report(
            &path,
            &config.coastline_thresholds,
            &CoastlineOptions { laws: *opts, fit_from: config.fit_from },
        )?
    };

    Ok(InstrumentReport {
        instrument: series.instrument().to_string(),
        samples,
        fits,
        fit_failures,
        crosschecks,
        derived_tick_time,
        coastline,
    })
}

/// Annualization used when none is requested: generated benchmark series
/// report totals per sample, market data per reference year.
pub fn default_annualization(instrument: &str) -> Annualization {
    if instrument.starts_with(crate::grw::GRW_INSTRUMENT) {
        Annualization::PerSample
    } else {
        Annualization::PerYear
    }
}
