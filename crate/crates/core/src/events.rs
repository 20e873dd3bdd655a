//! Streaming price-move counting and directional-change dissection.
//!
//! Both machines consume one price at a time and keep O(1) state, so a
//! threshold sweep is a set of independent passes over a shared read-only
//! path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tickdata::{PriceDefinition, PricePath};

/// Default size of a "tick" for tick-count observables (0.02%).
pub const DEFAULT_TICK_THRESHOLD: f64 = 0.0002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// Counts moves of at least `threshold` away from the last event price.
///
/// The reference price resets to the current price at every event, in either
/// direction.
#[derive(Debug, Clone)]
pub struct MoveCounter {
    threshold: f64,
    price_def: PriceDefinition,
    x_ext: f64,
    n_up: u64,
    n_down: u64,
}

impl MoveCounter {
    pub fn new(threshold: f64, price_def: PriceDefinition, x0: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Ok(Self { threshold, price_def, x_ext: x0, n_up: 0, n_down: 0 })
    }

    #[inline]
    pub fn push(&mut self, x: f64) -> Option<Direction> {
        let change = self.price_def.change(self.x_ext, x);
        if change >= self.threshold {
            self.n_up += 1;
            self.x_ext = x;
            Some(Direction::Up)
        } else if change <= -self.threshold {
            self.n_down += 1;
            self.x_ext = x;
            Some(Direction::Down)
        } else {
            None
        }
    }

    /// Restarts from `x` with zero counts.
    #[inline]
    pub fn reset(&mut self, x: f64) {
        self.x_ext = x;
        self.n_up = 0;
        self.n_down = 0;
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn reference(&self) -> f64 {
        self.x_ext
    }

    pub fn n_up(&self) -> u64 {
        self.n_up
    }

    pub fn n_down(&self) -> u64 {
        self.n_down
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.n_up + self.n_down
    }
}

/// Number of tick-sized moves inside a contiguous price slice, counted from
/// the slice's first price.
pub fn count_ticks_within(prices: &[f64], price_def: PriceDefinition, tick_threshold: f64) -> Result<u64> {
    check_threshold(tick_threshold)?;
    let Some((&first, rest)) = prices.split_first() else {
        return Ok(0);
    };
    let mut counter = MoveCounter::new(tick_threshold, price_def, first)?;
    for &x in rest {
        counter.push(x);
    }
    Ok(counter.total())
}

/// One price-move event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveEvent {
    pub index: usize,
    pub time: f64,
    pub direction: Direction,
    /// Tick-sized moves observed since the previous event (or series start).
    pub ticks: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoveCount {
    pub n_up: u64,
    pub n_down: u64,
    pub events: Vec<MoveEvent>,
}

impl MoveCount {
    pub fn total(&self) -> u64 {
        self.n_up + self.n_down
    }
}

/// Price-move counter over a path with a tick counter running inside each
/// move.
#[derive(Debug, Clone)]
pub struct MoveTracker {
    counter: MoveCounter,
    ticks: MoveCounter,
    started: bool,
}

impl MoveTracker {
    pub fn new(threshold: f64, tick_threshold: f64, price_def: PriceDefinition) -> Result<Self> {
        Ok(Self {
            counter: MoveCounter::new(threshold, price_def, f64::NAN)?,
            ticks: MoveCounter::new(tick_threshold, price_def, f64::NAN)?,
            started: false,
        })
    }

    #[inline]
    pub fn push(&mut self, index: usize, time: f64, x: f64) -> Option<MoveEvent> {
        if !self.started {
            self.started = true;
            self.counter.reset(x);
            self.ticks.reset(x);
            return None;
        }
        self.ticks.push(x);
        let direction = self.counter.push(x)?;
        let event = MoveEvent { index, time, direction, ticks: self.ticks.total() };
        self.ticks.reset(x);
        Some(event)
    }

    pub fn counter(&self) -> &MoveCounter {
        &self.counter
    }
}

pub fn price_move_count(path: &PricePath, threshold: f64, tick_threshold: f64) -> Result<MoveCount> {
    path.require_len(1)?;
    let mut tracker = MoveTracker::new(threshold, tick_threshold, path.price_def)?;
    let mut events = Vec::new();
    for (i, (&t, &x)) in path.times.iter().zip(&path.prices).enumerate() {
        if let Some(event) = tracker.push(i, t, x) {
            events.push(event);
        }
    }
    Ok(MoveCount { n_up: tracker.counter.n_up(), n_down: tracker.counter.n_down(), events })
}

/// A confirmed directional change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcEvent {
    /// Index of the confirming tick.
    pub index: usize,
    pub time: f64,
    pub direction: Direction,
    /// Index of the extremum the reversal is measured from.
    pub extremum_index: usize,
}

/// One total move between two consecutive extrema, split at the
/// directional-change confirmation into its DC and OS legs.
///
/// Moves are unsigned: the DC leg is measured from the opening extremum, the
/// OS leg from the confirmation price. `tm_*` fields are the sums of the legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub direction: Direction,
    pub tm_move: f64,
    pub dc_move: f64,
    pub os_move: f64,
    pub tm_time: f64,
    pub dc_time: f64,
    pub os_time: f64,
    pub tm_ticks: u64,
    pub dc_ticks: u64,
    pub os_ticks: u64,
    /// Opening extremum.
    pub start_index: usize,
    pub confirm_index: usize,
    /// Closing extremum.
    pub end_index: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DcStep {
    pub event: Option<DcEvent>,
    /// Record closed by this confirmation (the previous total move).
    pub record: Option<EventRecord>,
}

#[derive(Debug, Clone, Copy)]
struct OpenLeg {
    direction: Direction,
    start_index: usize,
    dc_move: f64,
    dc_time: f64,
    dc_ticks: u64,
    confirm_index: usize,
    confirm_time: f64,
    confirm_price: f64,
}

/// Directional-change state machine with total-move dissection.
///
/// Starts in up mode with the extremum at the first price. The segment
/// before the first confirmation and the segment still open at the end are
/// never emitted as records.
#[derive(Debug, Clone)]
pub struct DcDissector {
    threshold: f64,
    price_def: PriceDefinition,
    mode: Direction,
    ext_price: f64,
    ext_index: usize,
    ext_time: f64,
    n_up: u64,
    n_down: u64,
    open: Option<OpenLeg>,
    // tick counter started at the last confirmation, and its value when the
    // current extremum was set
    os_ticks: MoveCounter,
    os_ticks_at_ext: u64,
    // tick counter started at the current extremum
    dc_ticks: MoveCounter,
    started: bool,
}

impl DcDissector {
    pub fn new(threshold: f64, tick_threshold: f64, price_def: PriceDefinition) -> Result<Self> {
        check_threshold(threshold)?;
        Ok(Self {
            threshold,
            price_def,
            mode: Direction::Up,
            ext_price: f64::NAN,
            ext_index: 0,
            ext_time: f64::NAN,
            n_up: 0,
            n_down: 0,
            open: None,
            os_ticks: MoveCounter::new(tick_threshold, price_def, f64::NAN)?,
            os_ticks_at_ext: 0,
            dc_ticks: MoveCounter::new(tick_threshold, price_def, f64::NAN)?,
            started: false,
        })
    }

    pub fn mode(&self) -> Direction {
        self.mode
    }

    pub fn n_up(&self) -> u64 {
        self.n_up
    }

    pub fn n_down(&self) -> u64 {
        self.n_down
    }

    pub fn extremum(&self) -> f64 {
        self.ext_price
    }

    #[inline]
    fn set_extremum(&mut self, index: usize, time: f64, x: f64) {
        self.ext_price = x;
        self.ext_index = index;
        self.ext_time = time;
    }

    #[inline]
    pub fn push(&mut self, index: usize, time: f64, x: f64) -> DcStep {
        if !self.started {
            self.started = true;
            self.set_extremum(index, time, x);
            self.os_ticks.reset(x);
            self.dc_ticks.reset(x);
            return DcStep::default();
        }

        let extends = match self.mode {
            Direction::Up => x > self.ext_price,
            Direction::Down => x < self.ext_price,
        };
        if extends {
            self.os_ticks.push(x);
            self.os_ticks_at_ext = self.os_ticks.total();
            self.dc_ticks.reset(x);
            self.set_extremum(index, time, x);
            return DcStep::default();
        }

        self.os_ticks.push(x);
        self.dc_ticks.push(x);

        let change = self.price_def.change(self.ext_price, x);
        let reversal = match self.mode {
            Direction::Up => change <= -self.threshold,
            Direction::Down => change >= self.threshold,
        };
        if !reversal {
            return DcStep::default();
        }

        let direction = self.mode.opposite();
        match direction {
            Direction::Up => self.n_up += 1,
            Direction::Down => self.n_down += 1,
        }

        let record = self.open.map(|leg| {
            let os_move = self.price_def.change(leg.confirm_price, self.ext_price).abs();
            let os_time = self.ext_time - leg.confirm_time;
            let os_ticks = self.os_ticks_at_ext;
            EventRecord {
                direction: leg.direction,
                tm_move: leg.dc_move + os_move,
                dc_move: leg.dc_move,
                os_move,
                tm_time: leg.dc_time + os_time,
                dc_time: leg.dc_time,
                os_time,
                tm_ticks: leg.dc_ticks + os_ticks,
                dc_ticks: leg.dc_ticks,
                os_ticks,
                start_index: leg.start_index,
                confirm_index: leg.confirm_index,
                end_index: self.ext_index,
            }
        });

        self.open = Some(OpenLeg {
            direction,
            start_index: self.ext_index,
            dc_move: change.abs(),
            dc_time: time - self.ext_time,
            dc_ticks: self.dc_ticks.total(),
            confirm_index: index,
            confirm_time: time,
            confirm_price: x,
        });
        let event = DcEvent { index, time, direction, extremum_index: self.ext_index };

        self.mode = direction;
        self.set_extremum(index, time, x);
        self.os_ticks.reset(x);
        self.os_ticks_at_ext = 0;
        self.dc_ticks.reset(x);

        DcStep { event: Some(event), record }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dissection {
    pub n_up: u64,
    pub n_down: u64,
    pub events: Vec<DcEvent>,
    pub records: Vec<EventRecord>,
}

impl Dissection {
    pub fn total(&self) -> u64 {
        self.n_up + self.n_down
    }
}

pub fn directional_change_dissect(path: &PricePath, threshold: f64, tick_threshold: f64) -> Result<Dissection> {
    path.require_len(1)?;
    let mut dissector = DcDissector::new(threshold, tick_threshold, path.price_def)?;
    let mut out = Dissection::default();
    for (i, (&t, &x)) in path.times.iter().zip(&path.prices).enumerate() {
        let step = dissector.push(i, t, x);
        out.events.extend(step.event);
        out.records.extend(step.record);
    }
    out.n_up = dissector.n_up();
    out.n_down = dissector.n_down();
    Ok(out)
}

/// Writes records in the per-event dump format.
pub fn write_event_records<W: std::io::Write>(
    sink: W,
    rows: impl IntoIterator<Item = (f64, EventRecord)>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record([
        "threshold",
        "direction",
        "tm_move",
        "dc_move",
        "os_move",
        "tm_time",
        "dc_time",
        "os_time",
        "tm_ticks",
        "dc_ticks",
        "os_ticks",
    ])?;
    for (threshold, r) in rows {
        writer.serialize((
            threshold,
            r.direction.as_str(),
            r.tm_move,
            r.dc_move,
            r.os_move,
            r.tm_time,
            r.dc_time,
            r.os_time,
            r.tm_ticks,
            r.dc_ticks,
            r.os_ticks,
        ))?;
    }
    writer.flush()?;
    Ok(())
}
