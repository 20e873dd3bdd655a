//! Brute-force oracles and random inputs shared by the integration tests.
//!
//! The oracles re-scan the price slice from the last reference point at
//! every step instead of carrying streaming state.
#![allow(dead_code)]

use fxscale_core::events::{DcEvent, MoveEvent};
use fxscale_core::{Direction, EventRecord, PriceDefinition, PricePath};
use rand::Rng;

/// Indices and directions of threshold crossings, each measured from the
/// price at the previous crossing (or the first price).
pub fn naive_moves(prices: &[f64], def: PriceDefinition, threshold: f64) -> Vec<(usize, Direction)> {
    let mut out = Vec::new();
    let mut reference = 0;
    while let Some(j) =
        (reference + 1..prices.len()).find(|&j| def.change(prices[reference], prices[j]).abs() >= threshold)
    {
        let direction = if def.change(prices[reference], prices[j]) > 0.0 { Direction::Up } else { Direction::Down };
        out.push((j, direction));
        reference = j;
    }
    out
}

pub fn naive_tick_count(prices: &[f64], def: PriceDefinition, tick_threshold: f64) -> u64 {
    naive_moves(prices, def, tick_threshold).len() as u64
}

pub fn naive_move_events(path: &PricePath, threshold: f64, tick_threshold: f64) -> Vec<MoveEvent> {
    let def = path.price_def;
    let mut previous = 0;
    naive_moves(&path.prices, def, threshold)
        .into_iter()
        .map(|(index, direction)| {
            let ticks = naive_tick_count(&path.prices[previous..=index], def, tick_threshold);
            previous = index;
            MoveEvent { index, time: path.times[index], direction, ticks }
        })
        .collect()
}

/// First index of the running extremum of `prices[start..=end]`.
fn first_extremum(prices: &[f64], start: usize, end: usize, mode: Direction) -> usize {
    let mut best = start;
    for k in start..=end {
        let better = match mode {
            Direction::Up => prices[k] > prices[best],
            Direction::Down => prices[k] < prices[best],
        };
        if better {
            best = k;
        }
    }
    best
}

pub fn naive_dc_events(prices: &[f64], def: PriceDefinition, threshold: f64) -> Vec<(usize, Direction, usize)> {
    let mut out = Vec::new();
    let mut mode = Direction::Up;
    let mut start = 0;
    let mut j = 1;
    while j < prices.len() {
        let ext = first_extremum(prices, start, j, mode);
        let change = def.change(prices[ext], prices[j]);
        let reversal = match mode {
            Direction::Up => change <= -threshold,
            Direction::Down => change >= threshold,
        };
        if reversal {
            mode = mode.opposite();
            out.push((j, mode, ext));
            start = j;
        }
        j += 1;
    }
    out
}

pub fn naive_dissection(path: &PricePath, threshold: f64, tick_threshold: f64) -> (Vec<DcEvent>, Vec<EventRecord>) {
    let (p, t, def) = (&path.prices, &path.times, path.price_def);
    let raw = naive_dc_events(p, def, threshold);
    let events = raw
        .iter()
        .map(|&(index, direction, extremum_index)| DcEvent { index, time: t[index], direction, extremum_index })
        .collect();
    let records = raw
        .windows(2)
        .map(|w| {
            let (c, direction, e) = w[0];
            let end = w[1].2;
            let dc_move = def.change(p[e], p[c]).abs();
            let os_move = def.change(p[c], p[end]).abs();
            let dc_time = t[c] - t[e];
            let os_time = t[end] - t[c];
            let dc_ticks = naive_tick_count(&p[e..=c], def, tick_threshold);
            let os_ticks = naive_tick_count(&p[c..=end], def, tick_threshold);
            EventRecord {
                direction,
                tm_move: dc_move + os_move,
                dc_move,
                os_move,
                tm_time: dc_time + os_time,
                dc_time,
                os_time,
                tm_ticks: dc_ticks + os_ticks,
                dc_ticks,
                os_ticks,
                start_index: e,
                confirm_index: c,
                end_index: end,
            }
        })
        .collect();
    (events, records)
}

/// Random path of 2 to `max_len` ticks. Prices sit on a coarse grid so that
/// repeated values and exact ties with the extremum occur.
pub fn random_path(rng: &mut impl Rng, max_len: usize) -> PricePath {
    let n = rng.gen_range(2..=max_len);
    let def = if rng.gen_bool(0.25) { PriceDefinition::LogGeometricMid } else { PriceDefinition::ArithmeticMid };
    let step = [1e-5, 1e-4, 5e-4][rng.gen_range(0..3)];
    let mut x: f64 = 1.0 + rng.gen_range(0.0..0.5);
    let mut t = rng.gen_range(0.0..100.0f64).floor();
    let mut times = Vec::with_capacity(n);
    let mut prices = Vec::with_capacity(n);
    for _ in 0..n {
        let level = (x / step).round() * step;
        prices.push(match def {
            PriceDefinition::ArithmeticMid => level,
            PriceDefinition::LogGeometricMid => level.ln(),
        });
        times.push(t);
        x = (x + rng.gen_range(-4i32..=4) as f64 * step * rng.gen_range(0.5..1.5)).max(0.5);
        t += rng.gen_range(1..=30) as f64;
    }
    PricePath::from_prices(times, prices, def)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn alternates<T>(items: &[T], direction: impl Fn(&T) -> Direction) -> bool {
    items.windows(2).all(|w| direction(&w[1]) == direction(&w[0]).opposite())
}
