//! Observation grids and the aggregated observable behind every law.
//!
//! Threshold-parameterised laws share one combined pass per threshold: a
//! price-move tracker and a directional-change dissector run side by side
//! and feed a [`ThresholdStats`] accumulator. Time-parameterised laws sample
//! the path on non-overlapping windows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{check_threshold, DcDissector, EventRecord, MoveTracker, DEFAULT_TICK_THRESHOLD};
use crate::fitting::{fit_loglog, FitResult};
use crate::tickdata::{last_at_or_before, PricePath};

/// Days per reference year; converts annual coastlines to daily ones.
pub const DAYS_PER_YEAR: f64 = 365.2;

/// Points evenly spaced in natural-log space.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    points: Vec<f64>,
}

impl LogGrid {
    pub fn new(start: f64, log_step: f64, len: usize) -> Self {
        let ln_start = start.ln();
        let points = (0..len).map(|k| if k == 0 { start } else { (ln_start + log_step * k as f64).exp() }).collect();
        Self { points }
    }

    pub fn from_points(points: Vec<f64>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// SHA-256 over the little-endian bytes of every point.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for p in &self.points {
            hasher.update(p.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Relative thresholds from 0.01% to 5.05%.
pub struct ThresholdGrid;

impl ThresholdGrid {
    pub const START: f64 = 1e-4;
    pub const LOG_STEP: f64 = 0.025;
    pub const LEN: usize = 250;

    pub fn standard() -> LogGrid {
        LogGrid::new(Self::START, Self::LOG_STEP, Self::LEN)
    }
}

/// Interval lengths from 20 s to 3'975'783 s.
pub struct TimeGrid;

impl TimeGrid {
    pub const START: f64 = 20.0;
    pub const LOG_STEP: f64 = 0.05;
    pub const LEN: usize = 245;

    pub fn standard() -> LogGrid {
        LogGrid::new(Self::START, Self::LOG_STEP, Self::LEN)
    }
}

/// One aggregated observation. `count` is the number of events or windows
/// behind `value`; zero-count samples carry `value = 0` and are never fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawSample {
    pub abscissa: f64,
    pub value: f64,
    pub count: u64,
}

impl LawSample {
    pub fn empty(abscissa: f64) -> Self {
        Self { abscissa, value: 0.0, count: 0 }
    }

    pub fn is_fittable(&self) -> bool {
        self.count > 0 && self.value > 0.0 && self.value.is_finite()
    }
}

/// Part of a total move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Tm,
    Dc,
    Os,
}

impl Leg {
    pub const ALL: [Leg; 3] = [Leg::Tm, Leg::Dc, Leg::Os];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Leg::Tm => "tm",
            Leg::Dc => "dc",
            Leg::Os => "os",
        }
    }

    pub fn of_move(self, r: &EventRecord) -> f64 {
        match self {
            Leg::Tm => r.tm_move,
            Leg::Dc => r.dc_move,
            Leg::Os => r.os_move,
        }
    }

    pub fn of_time(self, r: &EventRecord) -> f64 {
        match self {
            Leg::Tm => r.tm_time,
            Leg::Dc => r.dc_time,
            Leg::Os => r.os_time,
        }
    }

    pub fn of_ticks(self, r: &EventRecord) -> u64 {
        match self {
            Leg::Tm => r.tm_ticks,
            Leg::Dc => r.dc_ticks,
            Leg::Os => r.os_ticks,
        }
    }
}

/// Order `p` of the averaging `<x>_p = (mean x^p)^(1/p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Moment {
    P1,
    P2,
}

impl Moment {
    pub fn order(self) -> u32 {
        match self {
            Moment::P1 => 1,
            Moment::P2 => 2,
        }
    }

    fn accumulate(self, x: f64) -> f64 {
        match self {
            Moment::P1 => x,
            Moment::P2 => x * x,
        }
    }

    fn finish(self, mean: f64) -> f64 {
        match self {
            Moment::P1 => mean,
            Moment::P2 => mean.sqrt(),
        }
    }
}

/// Every law with an appendix table, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LawId {
    DcCount,
    TickCount,
    MoveCount,
    MeanReturn(Moment),
    MaxRange(Moment),
    TimeOfMove,
    TimeOfDc,
    AvgMove(Leg),
    AvgTime(Leg),
    AvgTicks(Leg),
    Cumulative(Leg),
    CumulativeCostAdjusted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Threshold,
    Time,
}

impl LawId {
    pub const ALL: [LawId; 22] = [
        LawId::DcCount,
        LawId::TickCount,
        LawId::MoveCount,
        LawId::MeanReturn(Moment::P1),
        LawId::MeanReturn(Moment::P2),
        LawId::MaxRange(Moment::P1),
        LawId::MaxRange(Moment::P2),
        LawId::TimeOfMove,
        LawId::TimeOfDc,
        LawId::AvgMove(Leg::Tm),
        LawId::AvgMove(Leg::Dc),
        LawId::AvgMove(Leg::Os),
        LawId::AvgTime(Leg::Tm),
        LawId::AvgTime(Leg::Dc),
        LawId::AvgTime(Leg::Os),
        LawId::AvgTicks(Leg::Tm),
        LawId::AvgTicks(Leg::Dc),
        LawId::AvgTicks(Leg::Os),
        LawId::Cumulative(Leg::Tm),
        LawId::CumulativeCostAdjusted,
        LawId::Cumulative(Leg::Dc),
        LawId::Cumulative(Leg::Os),
    ];

    pub fn axis(self) -> Axis {
        match self {
            LawId::MeanReturn(_) | LawId::MaxRange(_) => Axis::Time,
            _ => Axis::Threshold,
        }
    }

    /// Appendix table id, `A1` to `A22`.
    pub fn table_id(self) -> String {
        let pos = LawId::ALL.iter().position(|l| *l == self).expect("law listed in ALL");
        format!("A{}", pos + 1)
    }

    pub fn from_table_id(id: &str) -> Result<LawId> {
        id.strip_prefix(['A', 'a'])
            .and_then(|n| n.parse::<usize>().ok())
            .and_then(|n| n.checked_sub(1))
            .and_then(|i| LawId::ALL.get(i).copied())
            .ok_or_else(|| Error::UnknownTable(id.to_string()))
    }

    pub fn name(self) -> String {
        match self {
            LawId::DcCount => "dc_count".into(),
            LawId::TickCount => "tick_count".into(),
            LawId::MoveCount => "move_count".into(),
            LawId::MeanReturn(m) => format!("mean_return_p{}", m.order()),
            LawId::MaxRange(m) => format!("max_range_p{}", m.order()),
            LawId::TimeOfMove => "time_of_move".into(),
            LawId::TimeOfDc => "time_of_dc".into(),
            LawId::AvgMove(l) => format!("avg_move_{}", l.as_str()),
            LawId::AvgTime(l) => format!("avg_time_{}", l.as_str()),
            LawId::AvgTicks(l) => format!("avg_ticks_{}", l.as_str()),
            LawId::Cumulative(l) => format!("cumulative_{}", l.as_str()),
            LawId::CumulativeCostAdjusted => "cumulative_cost_adjusted".into(),
        }
    }

    pub fn title(self) -> String {
        let leg = |l: Leg| match l {
            Leg::Tm => "total move",
            Leg::Dc => "directional change",
            Leg::Os => "overshoot",
        };
        match self {
            LawId::DcCount => "Directional change count".into(),
            LawId::TickCount => "Tick count".into(),
            LawId::MoveCount => "Price move count".into(),
            LawId::MeanReturn(Moment::P1) => "Mean price move during dt".into(),
            LawId::MeanReturn(Moment::P2) => "Quadratic mean price move during dt".into(),
            LawId::MaxRange(Moment::P1) => "Maximal price move during dt".into(),
            LawId::MaxRange(Moment::P2) => "Quadratic maximal price move during dt".into(),
            LawId::TimeOfMove => "Time of price move".into(),
            LawId::TimeOfDc => "Time between directional changes".into(),
            LawId::AvgMove(l) => format!("Average {} size", leg(l)),
            LawId::AvgTime(l) => format!("Time of {}", leg(l)),
            LawId::AvgTicks(l) => format!("Tick count of {}", leg(l)),
            LawId::Cumulative(l) => format!("Cumulative {}", leg(l)),
            LawId::CumulativeCostAdjusted => "Cumulative cost-adjusted total move".into(),
        }
    }

    /// Factor applied to raw abscissae before fitting: thresholds are fitted
    /// in percent, intervals in seconds.
    pub fn abscissa_scale(self) -> f64 {
        match self.axis() {
            Axis::Threshold => 100.0,
            Axis::Time => 1.0,
        }
    }

    /// Factor applied to raw values before fitting: price moves are fitted
    /// in percent, counts and durations as they are.
    pub fn value_scale(self) -> f64 {
        match self {
            LawId::MeanReturn(_)
            | LawId::MaxRange(_)
            | LawId::AvgMove(_)
            | LawId::Cumulative(_)
            | LawId::CumulativeCostAdjusted => 100.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LawId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LawId::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .or_else(|| LawId::from_table_id(s).ok())
            .ok_or_else(|| Error::UnknownLaw(s.to_string()))
    }
}

impl Serialize for LawId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for LawId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What a count is divided by before it is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annualization {
    /// Divide by the series span in reference years.
    #[default]
    PerYear,
    /// Report raw totals over the whole series.
    PerSample,
}

impl Annualization {
    pub fn divisor(self, path: &PricePath) -> f64 {
        match self {
            Annualization::PerYear => path.years(),
            Annualization::PerSample => 1.0,
        }
    }

    /// Length of the reporting period in seconds.
    pub fn period_seconds(self, path: &PricePath) -> f64 {
        match self {
            Annualization::PerYear => crate::tickdata::SECONDS_PER_YEAR,
            Annualization::PerSample => path.span_seconds(),
        }
    }
}

/// Transaction-cost proxy subtracted from every total move.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SpreadModel {
    #[default]
    None,
    /// Fixed relative spread.
    Constant(f64),
    /// Quoted relative spread at the move's opening extremum.
    Observed,
}

impl SpreadModel {
    pub fn is_none(&self) -> bool {
        matches!(self, SpreadModel::None)
    }

    #[inline]
    pub fn spread_for(&self, record: &EventRecord, spreads: &[f64]) -> f64 {
        match *self {
            SpreadModel::None => 0.0,
            SpreadModel::Constant(s) => s,
            SpreadModel::Observed => spreads.get(record.start_index).copied().unwrap_or(0.0),
        }
    }
}

impl FromStr for SpreadModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SpreadModel::None),
            "observed" => Ok(SpreadModel::Observed),
            _ => {
                let value = s
                    .strip_prefix("const:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| Error::Config(format!("bad spread model `{s}`")))?;
                Ok(SpreadModel::Constant(value))
            }
        }
    }
}

/// A total move after the spread was subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustedMove {
    pub tm_move: f64,
    /// The spread exceeded the move and the result was clamped to zero.
    pub clamped: bool,
}

#[inline]
fn adjust(tm_move: f64, spread: f64) -> AdjustedMove {
    let net = tm_move - spread;
    if net < 0.0 {
        AdjustedMove { tm_move: 0.0, clamped: true }
    } else {
        AdjustedMove { tm_move: net, clamped: false }
    }
}

/// Subtracts one spread from each total move, clamping at zero.
/// `spreads` holds the per-tick relative spreads and is only read by
/// [`SpreadModel::Observed`].
pub fn cost_adjust(records: &[EventRecord], model: &SpreadModel, spreads: &[f64]) -> Vec<AdjustedMove> {
    records.iter().map(|r| adjust(r.tm_move, model.spread_for(r, spreads))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawOptions {
    pub tick_threshold: f64,
    pub spread: SpreadModel,
    pub annualization: Annualization,
}

impl Default for LawOptions {
    fn default() -> Self {
        Self {
            tick_threshold: DEFAULT_TICK_THRESHOLD,
            spread: SpreadModel::None,
            annualization: Annualization::PerYear,
        }
    }
}

/// Raw sums gathered in one pass at one threshold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThresholdStats {
    pub threshold: f64,
    pub moves: u64,
    pub move_ticks: u64,
    pub move_wait_sum: f64,
    pub move_waits: u64,
    pub dcs: u64,
    pub dc_wait_sum: f64,
    pub dc_waits: u64,
    pub records: u64,
    pub leg_move: [f64; 3],
    pub leg_time: [f64; 3],
    pub leg_ticks: [u64; 3],
    pub cost_adjusted: f64,
    pub clamped: u64,
}

impl ThresholdStats {
    /// Observable of a threshold law at this threshold.
    pub fn sample(&self, law: LawId, divisor: f64) -> LawSample {
        let at = |count: u64, value: f64| {
            if count == 0 {
                LawSample::empty(self.threshold)
            } else {
                LawSample { abscissa: self.threshold, value, count }
            }
        };
        let per_record = |sum: f64| sum / self.records as f64;
        match law {
            LawId::DcCount => at(self.dcs, self.dcs as f64 / divisor),
            LawId::MoveCount => at(self.moves, self.moves as f64 / divisor),
            LawId::TickCount => at(self.moves, self.move_ticks as f64 / self.moves as f64),
            LawId::TimeOfMove => at(self.move_waits, self.move_wait_sum / self.move_waits as f64),
            LawId::TimeOfDc => at(self.dc_waits, self.dc_wait_sum / self.dc_waits as f64),
            LawId::AvgMove(l) => at(self.records, per_record(self.leg_move[l.slot()])),
            LawId::AvgTime(l) => at(self.records, per_record(self.leg_time[l.slot()])),
            LawId::AvgTicks(l) => at(self.records, per_record(self.leg_ticks[l.slot()] as f64)),
            LawId::Cumulative(l) => at(self.records, self.leg_move[l.slot()] / divisor),
            LawId::CumulativeCostAdjusted => at(self.records, self.cost_adjusted / divisor),
            LawId::MeanReturn(_) | LawId::MaxRange(_) => LawSample::empty(self.threshold),
        }
    }

    fn add_record(&mut self, r: &EventRecord, adjusted: AdjustedMove) {
        self.records += 1;
        for leg in Leg::ALL {
            self.leg_move[leg.slot()] += leg.of_move(r);
            self.leg_time[leg.slot()] += leg.of_time(r);
            self.leg_ticks[leg.slot()] += leg.of_ticks(r);
        }
        self.cost_adjusted += adjusted.tm_move;
        self.clamped += adjusted.clamped as u64;
    }
}

/// One combined price-move / directional-change pass at `threshold`.
pub fn threshold_stats(path: &PricePath, threshold: f64, opts: &LawOptions) -> Result<ThresholdStats> {
    threshold_pass(path, threshold, opts, |_| {})
}

/// Same as [`threshold_stats`], handing every completed record to `sink`.
pub fn threshold_pass(
    path: &PricePath,
    threshold: f64,
    opts: &LawOptions,
    mut sink: impl FnMut(&EventRecord),
) -> Result<ThresholdStats> {
    path.require_len(1)?;
    check_threshold(threshold)?;
    let mut mover = MoveTracker::new(threshold, opts.tick_threshold, path.price_def)?;
    let mut dissector = DcDissector::new(threshold, opts.tick_threshold, path.price_def)?;
    let mut stats = ThresholdStats { threshold, ..Default::default() };
    let mut last_move_time: Option<f64> = None;
    let mut last_dc_time: Option<f64> = None;

    for (i, (&t, &x)) in path.times.iter().zip(&path.prices).enumerate() {
        if let Some(event) = mover.push(i, t, x) {
            stats.moves += 1;
            stats.move_ticks += event.ticks;
            if let Some(prev) = last_move_time.replace(t) {
                stats.move_wait_sum += t - prev;
                stats.move_waits += 1;
            }
        }
        let step = dissector.push(i, t, x);
        if step.event.is_some() {
            stats.dcs += 1;
            if let Some(prev) = last_dc_time.replace(t) {
                stats.dc_wait_sum += t - prev;
                stats.dc_waits += 1;
            }
        }
        if let Some(record) = step.record {
            let adjusted = adjust(record.tm_move, opts.spread.spread_for(&record, &path.spreads));
            stats.add_record(&record, adjusted);
            sink(&record);
        }
    }
    Ok(stats)
}

/// Threshold passes over every grid point, in grid order.
pub fn threshold_sweep(path: &PricePath, grid: &LogGrid, opts: &LawOptions) -> Result<Vec<ThresholdStats>> {
    grid.points().par_iter().map(|&th| threshold_stats(path, th, opts)).collect()
}

fn window_count(path: &PricePath, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInterval(dt));
    }
    path.require_len(2)?;
    Ok((path.span_seconds() / dt).floor() as usize)
}

/// p-mean of absolute moves between last-quote samples `dt` apart, over the
/// complete windows inside the series.
pub fn mean_abs_return(path: &PricePath, dt: f64, moment: Moment) -> Result<LawSample> {
    let windows = window_count(path, dt)?;
    if windows < 1 {
        return Err(Error::TooFewSamples { got: windows + 1, need: 2 });
    }
    let t0 = path.times[0];
    let mut cursor = 0usize;
    let mut previous = path.prices[0];
    let mut acc = 0.0;
    for k in 1..=windows {
        cursor = last_at_or_before(&path.times, cursor, t0 + k as f64 * dt);
        let x = path.prices[cursor];
        acc += moment.accumulate(path.price_def.change(previous, x).abs());
        previous = x;
    }
    Ok(LawSample { abscissa: dt, value: moment.finish(acc / windows as f64), count: windows as u64 })
}

/// p-mean over non-overlapping windows of the high-low range relative to
/// the price at the window start.
pub fn max_range(path: &PricePath, dt: f64, moment: Moment) -> Result<LawSample> {
    let windows = window_count(path, dt)?;
    if windows < 1 {
        return Err(Error::TooFewSamples { got: windows + 1, need: 2 });
    }
    let t0 = path.times[0];
    let n = path.len();
    let mut cursor = 0usize;
    let mut acc = 0.0;
    for k in 0..windows {
        let start = t0 + k as f64 * dt;
        let end = t0 + (k + 1) as f64 * dt;
        cursor = last_at_or_before(&path.times, cursor, start);
        let open = path.prices[cursor];
        let (mut hi, mut lo) = (open, open);
        let mut j = cursor + 1;
        while j < n && path.times[j] <= end {
            let x = path.prices[j];
            hi = hi.max(x);
            lo = lo.min(x);
            j += 1;
        }
        let range = path.price_def.change(open, open + (hi - lo));
        acc += moment.accumulate(range);
    }
    Ok(LawSample { abscissa: dt, value: moment.finish(acc / windows as f64), count: windows as u64 })
}

fn time_law_sample(path: &PricePath, law: LawId, dt: f64) -> Result<LawSample> {
    let result = match law {
        LawId::MeanReturn(m) => mean_abs_return(path, dt, m),
        LawId::MaxRange(m) => max_range(path, dt, m),
        other => return Err(Error::Config(format!("{other} is not a time-interval law"))),
    };
    match result {
        Err(Error::TooFewSamples { .. }) => Ok(LawSample::empty(dt)),
        other => other,
    }
}

pub fn law_over_times(path: &PricePath, law: LawId, grid: &LogGrid) -> Result<Vec<LawSample>> {
    if law.axis() != Axis::Time {
        return Err(Error::Config(format!("{law} is not a time-interval law")));
    }
    grid.points().par_iter().map(|&dt| time_law_sample(path, law, dt)).collect()
}

pub fn law_over_thresholds(path: &PricePath, law: LawId, grid: &LogGrid, opts: &LawOptions) -> Result<Vec<LawSample>> {
    if law.axis() != Axis::Threshold {
        return Err(Error::Config(format!("{law} is not a threshold law")));
    }
    let divisor = opts.annualization.divisor(path);
    Ok(threshold_sweep(path, grid, opts)?.iter().map(|s| s.sample(law, divisor)).collect())
}

/// Samples for several laws, sharing one threshold sweep.
pub fn compute_laws(
    path: &PricePath,
    laws: &[LawId],
    thresholds: &LogGrid,
    times: &LogGrid,
    opts: &LawOptions,
) -> Result<Vec<(LawId, Vec<LawSample>)>> {
    let needs_sweep = laws.iter().any(|l| l.axis() == Axis::Threshold);
    let sweep = if needs_sweep { threshold_sweep(path, thresholds, opts)? } else { Vec::new() };
    let divisor = opts.annualization.divisor(path);
    laws.iter()
        .map(|&law| {
            let samples = match law.axis() {
                Axis::Threshold => sweep.iter().map(|s| s.sample(law, divisor)).collect(),
                Axis::Time => law_over_times(path, law, times)?,
            };
            Ok((law, samples))
        })
        .collect()
}

/// Time-window samples built from fewer windows stay out of fits: the log
/// of a p-mean over k windows is biased low by roughly 1/(2k), which drags
/// the fitted exponent down once the interval nears the series span.
pub const MIN_FIT_WINDOWS: u64 = 50;

/// Fits samples of `law` in the law's reporting units. `range` bounds the
/// raw abscissa (inclusive); unfittable samples and time-window samples
/// below [`MIN_FIT_WINDOWS`] are skipped.
pub fn fit_law_samples(law: LawId, samples: &[LawSample], range: Option<(f64, f64)>) -> Result<FitResult> {
    let (lo, hi) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let min_count = match law.axis() {
        Axis::Time => MIN_FIT_WINDOWS,
        Axis::Threshold => 1,
    };
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.is_fittable() && s.count >= min_count && s.abscissa >= lo && s.abscissa <= hi)
        .map(|s| (s.abscissa * law.abscissa_scale(), s.value * law.value_scale()))
        .collect();
    fit_loglog(&points)
}

/// One coastline measurement. Lengths are in percent per reporting period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoastlineRow {
    pub threshold: f64,
    pub events: u64,
    pub annual_pct: f64,
    pub daily_pct: f64,
    /// Length predicted by the cumulative total-move law fitted over the
    /// standard threshold grid.
    pub fitted_annual_pct: Option<f64>,
    pub cost_adjusted_annual_pct: Option<f64>,
    pub cost_adjusted_daily_pct: Option<f64>,
    /// Cost-adjusted length predicted by the law fitted above `fit_from`.
    pub extrapolated_annual_pct: Option<f64>,
    pub clamped: u64,
    pub below_granularity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoastlineOptions {
    pub laws: LawOptions,
    /// Lower threshold of the cost-adjusted fit used for extrapolation.
    pub fit_from: f64,
}

impl Default for CoastlineOptions {
    fn default() -> Self {
        Self { laws: LawOptions::default(), fit_from: 0.002 }
    }
}

pub fn coastline_report(path: &PricePath, thresholds: &[f64], opts: &CoastlineOptions) -> Result<Vec<CoastlineRow>> {
    for &th in thresholds {
        check_threshold(th)?;
        if th > 0.1 {
            return Err(Error::Config(format!("coastline threshold {th} outside (0, 0.1]")));
        }
    }
    let divisor = opts.laws.annualization.divisor(path);
    let granularity = path.granularity();
    let stats: Vec<ThresholdStats> =
        thresholds.par_iter().map(|&th| threshold_stats(path, th, &opts.laws)).collect::<Result<_>>()?;

    let cost = !opts.laws.spread.is_none();
    let mut laws = vec![LawId::Cumulative(Leg::Tm)];
    if cost {
        laws.push(LawId::CumulativeCostAdjusted);
    }
    let grid = ThresholdGrid::standard();
    let samples = compute_laws(path, &laws, &grid, &grid, &opts.laws)?;
    let fitted = fit_law_samples(laws[0], &samples[0].1, None).ok();
    let extrapolation =
        samples.get(1).and_then(|(law, s)| fit_law_samples(*law, s, Some((opts.fit_from, f64::INFINITY))).ok());

    Ok(stats
        .iter()
        .map(|s| {
            let annual = 100.0 * s.leg_move[Leg::Tm.slot()] / divisor;
            let adjusted = 100.0 * s.cost_adjusted / divisor;
            CoastlineRow {
                threshold: s.threshold,
                events: s.records,
                annual_pct: annual,
                daily_pct: annual / DAYS_PER_YEAR,
                fitted_annual_pct: fitted.map(|f| f.predict(100.0 * s.threshold)),
                cost_adjusted_annual_pct: cost.then_some(adjusted),
                cost_adjusted_daily_pct: cost.then_some(adjusted / DAYS_PER_YEAR),
                extrapolated_annual_pct: extrapolation.map(|f| f.predict(100.0 * s.threshold)),
                clamped: s.clamped,
                below_granularity: s.threshold < granularity,
            }
        })
        .collect())
}
