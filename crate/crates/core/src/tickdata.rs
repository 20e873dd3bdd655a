//! Tick ingestion, mid-price views and last-quote sampling.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds in the reference year (365.2 days) used to annualize counts.
pub const SECONDS_PER_YEAR: f64 = 31_553_280.0;

/// One quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    /// Unix epoch seconds, fractional part allowed.
    pub timestamp: f64,
    pub bid: f64,
    pub ask: f64,
}

impl Tick {
    pub fn new(timestamp: f64, bid: f64, ask: f64) -> Self {
        Self { timestamp, bid, ask }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !self.timestamp.is_finite() {
            return Err(format!("timestamp {} is not finite", self.timestamp));
        }
        if !(self.bid.is_finite() && self.bid > 0.0) {
            return Err(format!("bid {} is not a positive price", self.bid));
        }
        if !(self.ask.is_finite() && self.ask > 0.0) {
            return Err(format!("ask {} is not a positive price", self.ask));
        }
        Ok(())
    }

    /// Quoted spread relative to the arithmetic mid.
    pub fn relative_spread(&self) -> f64 {
        2.0 * (self.ask - self.bid) / (self.ask + self.bid)
    }
}

/// How a quote is collapsed into one price, and how moves between two such
/// prices are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriceDefinition {
    /// `(bid + ask) / 2`; moves are relative, `(x1 - x0) / x0`.
    #[default]
    ArithmeticMid,
    /// `(ln bid + ln ask) / 2`; moves are plain differences.
    LogGeometricMid,
}

impl PriceDefinition {
    #[inline]
    pub fn mid(self, bid: f64, ask: f64) -> f64 {
        match self {
            PriceDefinition::ArithmeticMid => 0.5 * (bid + ask),
            PriceDefinition::LogGeometricMid => 0.5 * (bid.ln() + ask.ln()),
        }
    }

    /// Signed move from `from` to `to`.
    #[inline]
    pub fn change(self, from: f64, to: f64) -> f64 {
        match self {
            PriceDefinition::ArithmeticMid => (to - from) / from,
            PriceDefinition::LogGeometricMid => to - from,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PriceDefinition::ArithmeticMid => "mid",
            PriceDefinition::LogGeometricMid => "logmid",
        }
    }
}

impl std::str::FromStr for PriceDefinition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mid" | "arithmetic-mid" => Ok(PriceDefinition::ArithmeticMid),
            "logmid" | "log-geometric-mid" => Ok(PriceDefinition::LogGeometricMid),
            other => Err(Error::Config(format!("unknown price definition `{other}`"))),
        }
    }
}

pub fn mid_price(tick: &Tick, def: PriceDefinition) -> f64 {
    def.mid(tick.bid, tick.ask)
}

/// An ordered quote stream for one instrument.
///
/// Series built through [`TickSeries::filtered`] or [`ingest_ticks`] never
/// hold two consecutive ticks with the same mid-price.
#[derive(Debug, Clone)]
pub struct TickSeries {
    instrument: String,
    ticks: Vec<Tick>,
    price_def: PriceDefinition,
}

impl TickSeries {
    /// Builds a series without the duplicate filter. Ticks are validated
    /// and must be time-ordered.
    pub fn unfiltered(instrument: impl Into<String>, ticks: Vec<Tick>, price_def: PriceDefinition) -> Result<Self> {
        let mut previous = f64::NEG_INFINITY;
        for (i, tick) in ticks.iter().enumerate() {
            tick.validate().map_err(|reason| Error::InvalidTick(format!("tick {i}: {reason}")))?;
            if tick.timestamp < previous {
                return Err(Error::NonMonotonic {
                    row: i as u64 + 1,
                    line: i as u64 + 1,
                    timestamp: tick.timestamp,
                    previous,
                });
            }
            previous = tick.timestamp;
        }
        Ok(Self { instrument: instrument.into(), ticks, price_def })
    }

    /// Builds a series and drops every tick repeating the previous kept
    /// mid-price. Returns the series and the number of dropped ticks.
    pub fn filtered(
        instrument: impl Into<String>,
        ticks: Vec<Tick>,
        price_def: PriceDefinition,
    ) -> Result<(Self, usize)> {
        let total = ticks.len();
        let mut kept: Vec<Tick> = Vec::with_capacity(total);
        let mut last_mid = None;
        for tick in ticks {
            let mid = price_def.mid(tick.bid, tick.ask);
            if last_mid == Some(mid) {
                continue;
            }
            last_mid = Some(mid);
            kept.push(tick);
        }
        let dropped = total - kept.len();
        Ok((Self::unfiltered(instrument, kept, price_def)?, dropped))
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn ticks(&self) -> &[Tick] {
        &self.ticks
    }

    pub fn price_def(&self) -> PriceDefinition {
        self.price_def
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn span_seconds(&self) -> f64 {
        match (self.ticks.first(), self.ticks.last()) {
            (Some(first), Some(last)) => last.timestamp - first.timestamp,
            _ => 0.0,
        }
    }

    pub fn years(&self) -> f64 {
        self.span_seconds() / SECONDS_PER_YEAR
    }

    /// Re-labels the series under another price definition. Duplicate
    /// filtering is not re-applied.
    pub fn with_price_def(mut self, price_def: PriceDefinition) -> Self {
        self.price_def = price_def;
        self
    }

    pub fn prices(&self) -> Vec<f64> {
        self.ticks.iter().map(|t| self.price_def.mid(t.bid, t.ask)).collect()
    }

    /// Columnar view used by every analysis routine.
    pub fn path(&self) -> PricePath {
        PricePath {
            times: self.ticks.iter().map(|t| t.timestamp).collect(),
            prices: self.prices(),
            spreads: self.ticks.iter().map(Tick::relative_spread).collect(),
            price_def: self.price_def,
        }
    }
}

/// Columnar price series: times, mid-prices and relative spreads.
#[derive(Debug, Clone)]
pub struct PricePath {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    pub spreads: Vec<f64>,
    pub price_def: PriceDefinition,
}

impl PricePath {
    /// Path from bare (time, price) pairs with zero spread.
    pub fn from_prices(times: Vec<f64>, prices: Vec<f64>, price_def: PriceDefinition) -> Self {
        assert_eq!(times.len(), prices.len(), "times and prices differ in length");
        let spreads = vec![0.0; prices.len()];
        Self { times, prices, spreads, price_def }
    }

    /// Path with unit time spacing starting at zero.
    pub fn from_price_slice(prices: &[f64]) -> Self {
        let times = (0..prices.len()).map(|i| i as f64).collect();
        Self::from_prices(times, prices.to_vec(), PriceDefinition::ArithmeticMid)
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn span_seconds(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(first), Some(last)) => last - first,
            _ => 0.0,
        }
    }

    pub fn years(&self) -> f64 {
        self.span_seconds() / SECONDS_PER_YEAR
    }

    pub(crate) fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            return Err(Error::SeriesTooShort { len: self.len(), min });
        }
        Ok(())
    }

    /// Median absolute tick-to-tick move, the finest resolution the data can
    /// express. Zero for paths shorter than two ticks.
    pub fn granularity(&self) -> f64 {
        let mut moves: Vec<f64> =
            self.prices.windows(2).map(|w| self.price_def.change(w[0], w[1]).abs()).filter(|m| *m > 0.0).collect();
        if moves.is_empty() {
            return 0.0;
        }
        let mid = moves.len() / 2;
        let (_, median, _) = moves.select_nth_unstable_by(mid, f64::total_cmp);
        *median
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub instrument: String,
    pub price_def: PriceDefinition,
    /// Replace a timestamp smaller than its predecessor by the predecessor
    /// instead of failing.
    pub clamp_time: bool,
}

/// Summary of one ingestion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub instrument: String,
    pub rows_read: u64,
    pub rows_dropped: u64,
    pub rows_clamped: u64,
    pub ticks: u64,
    pub span_seconds: f64,
    pub years: f64,
}

const HEADER: [&str; 3] = ["timestamp", "bid", "ask"];

/// Reads a `timestamp,bid,ask` CSV stream into a filtered series.
pub fn ingest_ticks<R: Read>(source: R, opts: &IngestOptions) -> Result<(TickSeries, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);

    let headers = reader.headers()?.clone();
    let header_ok = headers.len() == 3 && headers.iter().zip(HEADER).all(|(h, e)| h == e);
    if !header_ok && !headers.is_empty() {
        return Err(Error::MalformedRow {
            row: 0,
            line: 1,
            reason: format!(
                "expected header `timestamp,bid,ask`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut ticks = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut rows_read = 0u64;
    let mut rows_clamped = 0u64;
    let mut previous = f64::NEG_INFINITY;

    loop {
        let more = match reader.read_record(&mut record) {
            Ok(more) => more,
            Err(err) => {
                let line = err.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::MalformedRow { row: rows_read + 1, line, reason: err.to_string() });
            }
        };
        if !more {
            break;
        }
        rows_read += 1;
        let line = record.position().map(|p| p.line()).unwrap_or(rows_read + 1);
        let malformed = |reason: String| Error::MalformedRow { row: rows_read, line, reason };
        if record.len() != 3 {
            return Err(malformed(format!("expected 3 fields, got {}", record.len())));
        }
        let field = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|e| malformed(format!("{} `{}`: {e}", HEADER[i], &record[i])))
        };
        let mut tick = Tick::new(field(0)?, field(1)?, field(2)?);
        tick.validate().map_err(malformed)?;

        if tick.timestamp < previous {
            if !opts.clamp_time {
                return Err(Error::NonMonotonic { row: rows_read, line, timestamp: tick.timestamp, previous });
            }
            tick.timestamp = previous;
            rows_clamped += 1;
        }
        previous = tick.timestamp;
        ticks.push(tick);
    }

    if ticks.is_empty() {
        return Err(Error::EmptyInput);
    }

    let (series, dropped) = TickSeries::filtered(opts.instrument.clone(), ticks, opts.price_def)?;
    let report = IngestReport {
        instrument: opts.instrument.clone(),
        rows_read,
        rows_dropped: dropped as u64,
        rows_clamped,
        ticks: series.len() as u64,
        span_seconds: series.span_seconds(),
        years: series.years(),
    };
    Ok((series, report))
}

/// Writes a series in the ingestion CSV format.
pub fn write_ticks<W: Write>(series: &TickSeries, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for tick in series.ticks() {
        writer.serialize((tick.timestamp, tick.bid, tick.ask))?;
    }
    writer.flush()?;
    Ok(())
}

/// Samples the path on the grid `t0 + k dt`, each point carrying the last
/// price quoted at or before it. The grid runs until it first reaches or
/// passes the final tick.
pub fn sample_at_intervals(path: &PricePath, dt: f64) -> Result<Vec<(f64, f64)>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInterval(dt));
    }
    path.require_len(1)?;
    let span = path.span_seconds();
    if dt > span {
        return Err(Error::IntervalExceedsSpan { dt, span });
    }
    let t0 = path.times[0];
    let steps = (span / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut cursor = 0usize;
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        cursor = last_at_or_before(&path.times, cursor, t);
        out.push((t, path.prices[cursor]));
    }
    Ok(out)
}

/// Advances `cursor` to the last index whose time is `<= t`. The cursor must
/// already satisfy `times[cursor] <= t`.
#[inline]
pub(crate) fn last_at_or_before(times: &[f64], mut cursor: usize, t: f64) -> usize {
    while cursor + 1 < times.len() && times[cursor + 1] <= t {
        cursor += 1;
    }
    cursor
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> Result<(TickSeries, IngestReport)> {
        ingest_ticks(text.as_bytes(), &IngestOptions::default())
    }

    #[test]
    fn duplicate_mid_prices_are_dropped() {
        let (series, report) = ingest("timestamp,bid,ask\n0,1.0,1.0\n1,0.9,1.1\n2,1.1,1.1\n").unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(report.rows_read, 3);
        assert_eq!(report.rows_dropped, 1);
        assert_eq!(series.prices(), vec![1.0, 1.1]);
    }

    #[test]
    fn non_monotonic_rejected_with_row() {
        let err = ingest("timestamp,bid,ask\n5,1.0,1.0\n3,1.1,1.1\n").unwrap_err();
        match err {
            Error::NonMonotonic { row, line, .. } => {
                assert_eq!(row, 2);
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clamp_time_repairs_ordering() {
        let opts = IngestOptions { clamp_time: true, ..Default::default() };
        let (series, report) = ingest_ticks("timestamp,bid,ask\n5,1.0,1.0\n3,1.1,1.1\n".as_bytes(), &opts).unwrap();
        assert_eq!(report.rows_clamped, 1);
        assert_eq!(series.ticks()[1].timestamp, 5.0);
    }

    #[test]
    fn malformed_and_empty_inputs() {
        assert!(matches!(ingest("timestamp,bid,ask\n"), Err(Error::EmptyInput)));
        match ingest("timestamp,bid,ask\n0,1.0,1.0\n1,abc,1.0\n") {
            Err(Error::MalformedRow { row: 2, line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ingest("timestamp,bid,ask\n0,-1.0,1.0\n"), Err(Error::MalformedRow { row: 1, .. })));
        assert!(matches!(ingest("time,b,a\n0,1,1\n"), Err(Error::MalformedRow { row: 0, .. })));
    }

    #[test]
    fn fractional_timestamps_parse() {
        let (series, report) = ingest("timestamp,bid,ask\n1.25,1.0,1.2\n3.75,1.0,1.4\n").unwrap();
        assert_eq!(series.span_seconds(), 2.5);
        assert_eq!(report.years * SECONDS_PER_YEAR, 2.5);
    }

    #[test]
    fn mid_price_definitions() {
        let arith = mid_price(&Tick::new(0.0, 1.0, 1.2), PriceDefinition::ArithmeticMid);
        assert!((arith - 1.1).abs() < 1e-15);
        assert_eq!(mid_price(&Tick::new(0.0, 1.0, 1.0), PriceDefinition::LogGeometricMid), 0.0);
        let e = std::f64::consts::E;
        let chi = mid_price(&Tick::new(0.0, e * e, e.powi(4)), PriceDefinition::LogGeometricMid);
        assert!((chi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn last_quote_sampling() {
        let path = PricePath::from_prices(vec![0.0, 3.0], vec![1.0, 1.2], PriceDefinition::ArithmeticMid);
        let samples = sample_at_intervals(&path, 2.0).unwrap();
        assert_eq!(samples, vec![(0.0, 1.0), (2.0, 1.0), (4.0, 1.2)]);
    }

    #[test]
    fn sampling_errors() {
        let path = PricePath::from_prices(vec![0.0, 3.0], vec![1.0, 1.2], PriceDefinition::ArithmeticMid);
        assert!(matches!(sample_at_intervals(&path, 0.0), Err(Error::InvalidInterval(_))));
        assert!(matches!(sample_at_intervals(&path, 5.0), Err(Error::IntervalExceedsSpan { .. })));
    }

    #[test]
    fn constant_path_samples_constant() {
        let path = PricePath::from_price_slice(&[1.3; 20]);
        let samples = sample_at_intervals(&path, 3.0).unwrap();
        assert!(samples.iter().all(|&(_, p)| p == 1.3));
    }

    #[test]
    fn write_then_ingest_preserves_ticks() {
        let ticks = vec![Tick::new(0.5, 1.1, 1.2), Tick::new(1.5, 1.12, 1.2)];
        let series = TickSeries::unfiltered("X", ticks.clone(), PriceDefinition::ArithmeticMid).unwrap();
        let mut buf = Vec::new();
        write_ticks(&series, &mut buf).unwrap();
        let (back, _) = ingest_ticks(buf.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(back.ticks(), ticks.as_slice());
    }
}
