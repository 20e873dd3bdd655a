//! Identities that tie fitted laws to each other.
//!
//! Each check compares a left-hand value measured by one law with the value
//! another law predicts for it and records the discrepancy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventRecord;
use crate::fitting::FitResult;
use crate::laws::Leg;

/// Exponent identities pass within this absolute difference.
pub const EXPONENT_TOLERANCE: f64 = 0.05;
/// Scale identities pass within this relative error.
pub const SCALE_TOLERANCE: f64 = 0.10;
/// Average-versus-cumulative identity over one record set.
pub const DISSECTION_TOLERANCE: f64 = 1e-9;
/// Cumulative additivity `tm = dc + os`.
pub const ADDITIVITY_TOLERANCE: f64 = 0.005;
/// Derived tick waiting time against the measured price-move waiting time.
pub const TICK_TIME_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "bound", rename_all = "lowercase")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl std::fmt::Display for Tolerance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tolerance::Absolute(b) => write!(f, "abs:{b}"),
            Tolerance::Relative(b) => write!(f, "rel:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, zero when both sides are zero.
    pub rel_error: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

pub fn relative_error(lhs: f64, rhs: f64) -> f64 {
    let denom = lhs.abs().max(rhs.abs());
    if denom == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / denom
    }
}

impl CrossCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: Tolerance) -> Self {
        let rel_error = relative_error(lhs, rhs);
        let pass = match tolerance {
            Tolerance::Absolute(b) => (lhs - rhs).abs() <= b,
            Tolerance::Relative(b) => rel_error <= b,
        };
        Self { name: name.into(), lhs, rhs, rel_error, tolerance, pass }
    }
}

/// Waiting time against event count: `<dt> = period / N` turns
/// `N = (x / C_N)^E_N` into `<dt> = (x / (period^(1/E_N) C_N))^(-E_N)`.
///
/// `label` distinguishes the price-move and directional-change variants.
pub fn check_count_time(
    fit_time: &FitResult,
    fit_count: &FitResult,
    period_seconds: f64,
    label: &str,
) -> Result<[CrossCheck; 2]> {
    if fit_count.exponent == 0.0 {
        return Err(Error::ZeroExponent);
    }
    let scale = period_seconds.powf(1.0 / fit_count.exponent) * fit_count.scale;
    Ok([
        CrossCheck::new(
            format!("count_time_exponent_{label}"),
            fit_time.exponent,
            -fit_count.exponent,
            Tolerance::Absolute(EXPONENT_TOLERANCE),
        ),
        CrossCheck::new(
            format!("count_time_scale_{label}"),
            fit_time.scale,
            scale,
            Tolerance::Relative(SCALE_TOLERANCE),
        ),
    ])
}

/// Price-move waiting time against the mean absolute return `<|dx|> =
/// (dt / C_x)^E_x`, its inverse: `E_t = 1 / E_x`, `C_t = C_x^(-E_x)`.
pub fn check_inverse(fit_time: &FitResult, fit_return: &FitResult) -> Result<[CrossCheck; 2]> {
    if fit_return.exponent == 0.0 {
        return Err(Error::ZeroExponent);
    }
    Ok([
        CrossCheck::new(
            "inverse_exponent",
            fit_time.exponent,
            1.0 / fit_return.exponent,
            Tolerance::Absolute(EXPONENT_TOLERANCE),
        ),
        CrossCheck::new(
            "inverse_scale",
            fit_time.scale,
            fit_return.scale.powf(-fit_return.exponent),
            Tolerance::Relative(SCALE_TOLERANCE),
        ),
    ])
}

/// Average leg sizes against cumulative size over record count, plus
/// additivity of the cumulative legs.
pub fn check_dissection(records: &[EventRecord], threshold: f64) -> Result<Vec<CrossCheck>> {
    if records.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let n = records.len() as f64;
    let cumulative = |leg: Leg| records.iter().map(|r| leg.of_move(r)).sum::<f64>();
    let mut checks = Vec::with_capacity(4);
    for leg in Leg::ALL {
        // running mean, a different summation order than sum / n
        let mut mean = 0.0;
        for (k, r) in records.iter().enumerate() {
            mean += (leg.of_move(r) - mean) / (k + 1) as f64;
        }
        checks.push(CrossCheck::new(
            format!("dissection_mean_{}@{threshold}", leg.as_str()),
            mean,
            cumulative(leg) / n,
            Tolerance::Relative(DISSECTION_TOLERANCE),
        ));
    }
    checks.push(CrossCheck::new(
        format!("dissection_additivity@{threshold}"),
        cumulative(Leg::Tm),
        cumulative(Leg::Dc) + cumulative(Leg::Os),
        Tolerance::Relative(ADDITIVITY_TOLERANCE),
    ));
    Ok(checks)
}

/// Tick count as a function of elapsed time, composed from the mean-return
/// law and the tick-count law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedLaw {
    pub exponent: f64,
    pub exponent_err: f64,
    pub scale: f64,
    pub scale_err: f64,
}

pub fn derive_tick_time_law(fit_return: &FitResult, fit_tick: &FitResult) -> Result<DerivedLaw> {
    let (ex, en) = (fit_return.exponent, fit_tick.exponent);
    if ex == 0.0 {
        return Err(Error::ZeroExponent);
    }
    let (cx, cn) = (fit_return.scale, fit_tick.scale);
    let scale = cx * cn.powf(1.0 / ex);
    let exponent = ex * en;
    let exponent_err = ((en * fit_return.exponent_err).powi(2) + (ex * fit_tick.exponent_err).powi(2)).sqrt();
    let rel_scale_err = ((fit_return.scale_err / cx).powi(2)
        + (fit_tick.scale_err / (cn * ex)).powi(2)
        + (cn.ln() * fit_return.exponent_err / (ex * ex)).powi(2))
    .sqrt();
    Ok(DerivedLaw { exponent, exponent_err, scale, scale_err: scale * rel_scale_err })
}

/// Derived seconds-per-tick against the price-move waiting time evaluated
/// at the tick size (`tick_size` in the fitted abscissa units).
pub fn check_tick_time(derived: &DerivedLaw, fit_time_of_move: &FitResult, tick_size: f64) -> CrossCheck {
    CrossCheck::new(
        "tick_time_scale",
        derived.scale,
        fit_time_of_move.predict(tick_size),
        Tolerance::Relative(TICK_TIME_TOLERANCE),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(exponent: f64, scale: f64) -> FitResult {
        FitResult {
            exponent,
            exponent_err: 0.0,
            scale,
            scale_err: 0.0,
            intercept: -exponent * scale.ln(),
            intercept_err: 0.0,
            r2_adj: 1.0,
            r2_curvature: 0.0,
            n_points: 10,
        }
    }

    #[test]
    fn reference_scale_values_for_count_time() {
        // EUR-USD price-move count C = 9.469, E = -1.930 gives C_t ~ 1.23e-3
        let [e, c] =
            check_count_time(&law(1.928, 1.227e-3), &law(-1.930, 9.469), crate::SECONDS_PER_YEAR, "move").unwrap();
        assert!(e.pass && c.pass);
        assert!((c.rhs - 1.23e-3).abs() < 0.01e-3);
    }

    #[test]
    fn noiseless_inverse_pair() {
        let ret = law(0.5, 700.0);
        let time = law(2.0, 700.0f64.powf(-0.5));
        let [e, c] = check_inverse(&time, &ret).unwrap();
        assert_eq!(e.rel_error, 0.0);
        assert!(c.rel_error < 1e-15);
    }

    #[test]
    fn identity_composition() {
        let d = derive_tick_time_law(&law(1.0, 1.0), &law(1.0, 1.0)).unwrap();
        assert_eq!((d.exponent, d.scale), (1.0, 1.0));
        // EUR-USD: E_x(1) = 0.497, C_x(1) = 6.632e5, tick law 1.928 / 2.099e-2
        let d = derive_tick_time_law(&law(0.497, 6.632e5), &law(1.928, 2.099e-2)).unwrap();
        assert!((d.exponent - 0.96).abs() < 0.005);
        assert!((d.scale - 279.0).abs() < 1.0);
    }

    #[test]
    fn zero_exponent_is_rejected() {
        assert!(check_count_time(&law(1.0, 1.0), &law(0.0, 1.0), 1.0, "x").is_err());
        assert!(check_inverse(&law(1.0, 1.0), &law(0.0, 1.0)).is_err());
    }

    #[test]
    fn tolerance_kinds() {
        let a = CrossCheck::new("a", 1.93, 1.97, Tolerance::Absolute(0.05));
        assert!(a.pass);
        let b = CrossCheck::new("b", 1.0, 1.2, Tolerance::Relative(0.1));
        assert!(!b.pass);
        assert!((b.rel_error - 0.2 / 1.2).abs() < 1e-15);
        assert_eq!(CrossCheck::new("z", 0.0, 0.0, Tolerance::Relative(0.0)).rel_error, 0.0);
    }

    #[test]
    fn empty_dissection_is_an_error() {
        assert!(check_dissection(&[], 0.001).is_err());
    }
}
