//! Appendix-style fit tables and the CSV/JSON emitters of every report.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::consistency::CrossCheck;
use crate::error::{Error, Result};
use crate::laws::{fit_law_samples, CoastlineRow, LawId, LawSample};

/// One row of an appendix table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub instrument: String,
    pub table: String,
    pub law: LawId,
    #[serde(rename = "E")]
    pub exponent: f64,
    #[serde(rename = "dE")]
    pub exponent_err: f64,
    #[serde(rename = "C")]
    pub scale: f64,
    #[serde(rename = "dC")]
    pub scale_err: f64,
    pub r2_adj: f64,
    pub r2_curvature: f64,
    pub n_points: usize,
}

/// Fits `samples` of `law` and wraps the result as a table row. `range`
/// bounds the raw abscissa, e.g. `(0.002, inf)` for the cost-adjusted
/// coastline.
pub fn fit_report(instrument: &str, law: LawId, samples: &[LawSample], range: Option<(f64, f64)>) -> Result<FitRow> {
    let fit = fit_law_samples(law, samples, range)?;
    Ok(FitRow {
        instrument: instrument.to_string(),
        table: law.table_id(),
        law,
        exponent: fit.exponent,
        exponent_err: fit.exponent_err,
        scale: fit.scale,
        scale_err: fit.scale_err,
        r2_adj: fit.r2_adj,
        r2_curvature: fit.r2_curvature,
        n_points: fit.n_points,
    })
}

impl FitRow {
    pub fn as_fit(&self) -> crate::fitting::FitResult {
        crate::fitting::FitResult {
            exponent: self.exponent,
            exponent_err: self.exponent_err,
            scale: self.scale,
            scale_err: self.scale_err,
            intercept: -self.exponent * self.scale.ln(),
            intercept_err: f64::NAN,
            r2_adj: self.r2_adj,
            r2_curvature: self.r2_curvature,
            n_points: self.n_points,
        }
    }

    /// Benchmark rows are listed but left out of the currency average.
    pub fn is_benchmark(&self) -> bool {
        self.instrument.starts_with(crate::grw::GRW_INSTRUMENT)
    }
}

/// Mean and sample standard deviation of the exponent and scale columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub n: usize,
    #[serde(rename = "E")]
    pub exponent: f64,
    #[serde(rename = "E_sd")]
    pub exponent_sd: Option<f64>,
    #[serde(rename = "C")]
    pub scale: f64,
    #[serde(rename = "C_sd")]
    pub scale_sd: Option<f64>,
}

fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixTable {
    pub table: String,
    pub law: LawId,
    pub title: String,
    pub rows: Vec<FitRow>,
    pub average: Option<AverageRow>,
}

/// Collects the rows of one table, sorted by instrument, with the currency
/// average over the non-benchmark rows.
pub fn build_table(rows: &[FitRow], table_id: &str) -> Result<AppendixTable> {
    let law = LawId::from_table_id(table_id)?;
    let mut selected: Vec<FitRow> = rows.iter().filter(|r| r.law == law).cloned().collect();
    selected.sort_by(|a, b| a.instrument.cmp(&b.instrument));
    let currencies: Vec<&FitRow> = selected.iter().filter(|r| !r.is_benchmark()).collect();
    let average = (!currencies.is_empty()).then(|| {
        let (exponent, exponent_sd) = mean_sd(&currencies.iter().map(|r| r.exponent).collect::<Vec<_>>());
        let (scale, scale_sd) = mean_sd(&currencies.iter().map(|r| r.scale).collect::<Vec<_>>());
        AverageRow { n: currencies.len(), exponent, exponent_sd, scale, scale_sd }
    });
    Ok(AppendixTable { table: law.table_id(), law, title: law.title(), rows: selected, average })
}

/// Scientific notation with a two-digit signed exponent, `5.0e-03`.
pub fn sci(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let s = format!("{value:.digits$e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let exp: i32 = exp.parse().unwrap_or(0);
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", exp.abs())
        }
        None => s,
    }
}

const AVERAGE_LABEL: &str = "Currency average";

pub fn render_text(table: &AppendixTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("Table {}: {} ({})\n", table.table, table.title, table.law));
    out.push_str(&format!(
        "{:<18} {:>8} {:>11} {:>11} {:>11} {:>9} {:>14}\n",
        "Currency", "E", "dE", "C", "dC", "Adj. R2", "R2quad-R2lin"
    ));
    for r in &table.rows {
        out.push_str(&format!(
            "{:<18} {:>8.3} {:>11} {:>11} {:>11} {:>9.5} {:>14}\n",
            r.instrument,
            r.exponent,
            format!("± {}", sci(r.exponent_err, 1)),
            sci(r.scale, 3),
            format!("± {}", sci(r.scale_err, 1)),
            r.r2_adj,
            sci(r.r2_curvature, 3),
        ));
    }
    if let Some(avg) = &table.average {
        let paren = |sd: Option<f64>| sd.map_or_else(|| "(n/a)".to_string(), |v| format!("({})", sci(v, 1)));
        out.push_str(&format!(
            "{:<18} {:>8.2} {:>11} {:>11} {:>11}\n",
            AVERAGE_LABEL,
            avg.exponent,
            paren(avg.exponent_sd),
            sci(avg.scale, 2),
            paren(avg.scale_sd),
        ));
    }
    out
}

pub fn render_csv(table: &AppendixTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["instrument", "E", "dE", "C", "dC", "r2_adj", "r2_curvature", "n_points"])?;
    for r in &table.rows {
        writer.write_record([
            r.instrument.clone(),
            format!("{:.3}", r.exponent),
            sci(r.exponent_err, 1),
            sci(r.scale, 3),
            sci(r.scale_err, 1),
            format!("{:.5}", r.r2_adj),
            sci(r.r2_curvature, 3),
            r.n_points.to_string(),
        ])?;
    }
    if let Some(avg) = &table.average {
        let opt = |sd: Option<f64>| sd.map(|v| sci(v, 1)).unwrap_or_default();
        writer.write_record([
            AVERAGE_LABEL.to_string(),
            format!("{:.2}", avg.exponent),
            opt(avg.exponent_sd),
            sci(avg.scale, 2),
            opt(avg.scale_sd),
            String::new(),
            String::new(),
            avg.n.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_json(table: &AppendixTable) -> Result<String> {
    Ok(serde_json::to_string_pretty(table)?)
}

fn write_serialized<W: Write, T: Serialize>(sink: W, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_fit_rows<W: Write>(sink: W, rows: &[FitRow]) -> Result<()> {
    if rows.is_empty() {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record([
            "instrument",
            "table",
            "law",
            "E",
            "dE",
            "C",
            "dC",
            "r2_adj",
            "r2_curvature",
            "n_points",
        ])?;
        writer.flush()?;
        return Ok(());
    }
    write_serialized(sink, rows)
}

pub fn read_fit_rows<R: Read>(source: R) -> Result<Vec<FitRow>> {
    let mut reader = csv::Reader::from_reader(source);
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub law: LawId,
    pub abscissa: f64,
    pub value: f64,
    pub count: u64,
}

/// Law sample dump: `law,abscissa,value,count`, raw units.
pub fn write_law_samples<W: Write>(sink: W, laws: &[(LawId, Vec<LawSample>)]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    writer.write_record(["law", "abscissa", "value", "count"])?;
    for (law, samples) in laws {
        for s in samples {
            writer.serialize(SampleRow { law: *law, abscissa: s.abscissa, value: s.value, count: s.count })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a sample dump back, grouped by law in order of first appearance.
pub fn read_law_samples<R: Read>(source: R) -> Result<Vec<(LawId, Vec<LawSample>)>> {
    let mut reader = csv::Reader::from_reader(source);
    let mut out: Vec<(LawId, Vec<LawSample>)> = Vec::new();
    for row in reader.deserialize::<SampleRow>() {
        let row = row?;
        let sample = LawSample { abscissa: row.abscissa, value: row.value, count: row.count };
        match out.iter_mut().find(|(law, _)| *law == row.law) {
            Some((_, samples)) => samples.push(sample),
            None => out.push((row.law, vec![sample])),
        }
    }
    Ok(out)
}

/// Cross-check report: `check,lhs,rhs,rel_error,tolerance,pass`.
pub fn write_crosschecks<W: Write>(sink: W, checks: &[CrossCheck]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["check", "lhs", "rhs", "rel_error", "tolerance", "pass"])?;
    for c in checks {
        writer.serialize((&c.name, c.lhs, c.rhs, c.rel_error, c.tolerance.to_string(), c.pass))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_coastline<W: Write>(sink: W, rows: &[CoastlineRow]) -> Result<()> {
    if rows.is_empty() {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record([
            "threshold",
            "events",
            "annual_pct",
            "daily_pct",
            "fitted_annual_pct",
            "cost_adjusted_annual_pct",
            "cost_adjusted_daily_pct",
            "extrapolated_annual_pct",
            "clamped",
            "below_granularity",
        ])?;
        writer.flush()?;
        return Ok(());
    }
    write_serialized(sink, rows)
}
