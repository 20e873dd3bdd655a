use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fxscale_core::events::{directional_change_dissect, write_event_records};
use fxscale_core::grw::{generate, GrwConfig, GRW_INSTRUMENT, RNG_ALGORITHM};
use fxscale_core::laws::{coastline_report, CoastlineOptions, CoastlineRow, LawOptions};
use fxscale_core::pipeline::{
    analyze as analyze_series, crosschecks_from_fits, default_annualization, fit_range, parse_law_selection,
    AnalysisConfig,
};
use fxscale_core::report::{
    build_table, fit_report, read_fit_rows, read_law_samples, render_csv, render_json, render_text, sci,
    write_coastline, write_crosschecks, write_fit_rows, write_law_samples, FitRow,
};
use fxscale_core::tickdata::{ingest_ticks, write_ticks, IngestOptions, IngestReport};
use fxscale_core::{Annualization, CrossCheck, LawId, TickSeries};

use crate::manifest::{Grids, InstrumentEntry, Manifest, RunConfig};
use crate::{
    AnalyzeArgs, AnnualizeArg, CoastlineArgs, CrosscheckArgs, FitArgs, Format, GrwGenArgs, IngestArgs, LawArgs,
    Outcome, SourceArgs, TableArgs,
};

/// Opens `path` for writing, or stdout when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn outcome(complete: bool) -> Outcome {
    if complete {
        Outcome::Complete
    } else {
        Outcome::Partial
    }
}

/// Instrument names double as file name stems, so they are kept to a safe
/// alphabet.
fn file_stem(instrument: &str) -> String {
    instrument
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn annualization(arg: AnnualizeArg, instrument: &str) -> Annualization {
    match arg {
        AnnualizeArg::Auto => default_annualization(instrument),
        AnnualizeArg::Year => Annualization::PerYear,
        AnnualizeArg::Sample => Annualization::PerSample,
    }
}

fn annualize_name(arg: AnnualizeArg) -> &'static str {
    match arg {
        AnnualizeArg::Auto => "auto",
        AnnualizeArg::Year => "year",
        AnnualizeArg::Sample => "sample",
    }
}

fn law_options(args: &LawArgs, instrument: &str) -> LawOptions {
    LawOptions {
        tick_threshold: args.tick_threshold,
        spread: args.spread,
        annualization: annualization(args.annualize, instrument),
    }
}

pub struct Source {
    pub name: String,
    pub origin: String,
    pub input: Option<PathBuf>,
    pub grw: Option<GrwConfig>,
}

/// Resolves input files and the optional random walk into named sources,
/// rejecting duplicate names before any work is done.
fn sources(args: &SourceArgs) -> Result<Vec<Source>> {
    if !args.instrument.is_empty() && args.instrument.len() != args.input.len() {
        bail!("{} --instrument names given for {} --input files", args.instrument.len(), args.input.len());
    }
    let mut out = Vec::new();
    for (i, input) in args.input.iter().enumerate() {
        let name = match args.instrument.get(i) {
            Some(name) => name.clone(),
            None => input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .with_context(|| format!("cannot derive an instrument name from {}", input.display()))?,
        };
        out.push(Source { name, origin: input.display().to_string(), input: Some(input.clone()), grw: None });
    }
    if args.grw {
        let config = GrwConfig { n_ticks: args.n_ticks, ..GrwConfig::with_seed(args.seed) };
        out.push(Source {
            name: GRW_INSTRUMENT.to_string(),
            origin: format!("grw seed={} n_ticks={}", config.seed, config.n_ticks),
            input: None,
            grw: Some(config),
        });
    }
    if out.is_empty() {
        bail!("no data source: pass --input FILE and/or --grw");
    }
    let mut seen = BTreeSet::new();
    for s in &out {
        if !seen.insert(file_stem(&s.name)) {
            bail!("instrument `{}` given twice", s.name);
        }
    }
    Ok(out)
}

fn load(source: &Source, args: &SourceArgs) -> Result<(TickSeries, Option<IngestReport>)> {
    if let Some(config) = &source.grw {
        let series = generate(config)?.with_price_def(args.price_def);
        return Ok((series, None));
    }
    let path = source.input.as_deref().expect("file source");
    let opts =
        IngestOptions { instrument: source.name.clone(), price_def: args.price_def, clamp_time: args.clamp_time };
    let (series, report) = ingest_ticks(open(path)?, &opts).with_context(|| format!("ingesting {}", path.display()))?;
    Ok((series, Some(report)))
}

pub fn ingest(args: IngestArgs) -> Result<Outcome> {
    let instrument = match args.instrument {
        Some(name) => name,
        None => args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let opts = IngestOptions { instrument, price_def: args.price_def, clamp_time: args.clamp_time };
    let (series, report) =
        ingest_ticks(open(&args.input)?, &opts).with_context(|| format!("ingesting {}", args.input.display()))?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.report {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?,
        None => eprintln!("{json}"),
    }
    if let Some(out) = &args.out {
        let mut w = sink(Some(out))?;
        write_ticks(&series, &mut w)?;
        w.flush()?;
    }
    Ok(Outcome::Complete)
}

fn write_file(
    dir: &Path,
    name: &str,
    files: &mut Vec<String>,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
    body(&mut w)?;
    w.flush()?;
    files.push(name.to_string());
    Ok(())
}

pub fn analyze(args: AnalyzeArgs) -> Result<Outcome> {
    let laws = parse_law_selection(&args.law_selection)?;
    let sources = sources(&args.source)?;
    for &th in &args.dump_events {
        if !(th.is_finite() && th > 0.0) {
            bail!("--dump-events threshold must be positive, got {th}");
        }
    }
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;

    let base = AnalysisConfig {
        laws: laws.clone(),
        fit_from: args.laws.fit_from,
        coastline_thresholds: args.coastline.clone(),
        ..Default::default()
    };
    let mut manifest = Manifest {
        tool: "fxscale",
        version: env!("CARGO_PKG_VERSION"),
        core_version: fxscale_core::VERSION,
        rng: RNG_ALGORITHM,
        seed: args.source.grw.then_some(args.source.seed),
        grids: Grids { thresholds: (&base.thresholds).into(), times: (&base.times).into() },
        config: RunConfig {
            laws,
            price_def: args.source.price_def.name(),
            tick_threshold: args.laws.tick_threshold,
            spread: args.laws.spread,
            annualize: annualize_name(args.laws.annualize),
            fit_from: args.laws.fit_from,
            coastline_thresholds: args.coastline.clone(),
            dump_events: args.dump_events.clone(),
            clamp_time: args.source.clamp_time,
        },
        instruments: Vec::new(),
        stages: Vec::new(),
        partial: false,
    };

    let mut all_fits: Vec<FitRow> = Vec::new();
    for source in &sources {
        let mut entry = InstrumentEntry {
            name: source.name.clone(),
            source: source.origin.clone(),
            ingest: None,
            law_options: None,
            fits: 0,
            fit_failures: Vec::new(),
            crosschecks_failed: 0,
            files: Vec::new(),
        };
        let loaded = load(source, &args.source);
        manifest.stage("ingest", Some(&source.name), loaded.as_ref().map(|_| ()).map_err(|e| format!("{e:#}")));
        let Ok((series, report)) = loaded else {
            manifest.instruments.push(entry);
            continue;
        };
        entry.ingest = report;

        let config = AnalysisConfig { law_options: law_options(&args.laws, &source.name), ..base.clone() };
        entry.law_options = Some(config.law_options);
        let result = analyze_series(&series, &config).map_err(anyhow::Error::from).and_then(|report| {
            let stem = file_stem(&source.name);
            write_file(&args.out, &format!("samples_{stem}.csv"), &mut entry.files, |w| {
                Ok(write_law_samples(w, &report.samples)?)
            })?;
            write_file(&args.out, &format!("crosscheck_{stem}.csv"), &mut entry.files, |w| {
                Ok(write_crosschecks(w, &report.crosschecks)?)
            })?;
            if !config.coastline_thresholds.is_empty() {
                write_file(&args.out, &format!("coastline_{stem}.csv"), &mut entry.files, |w| {
                    Ok(write_coastline(w, &report.coastline)?)
                })?;
            }
            if !args.dump_events.is_empty() {
                let path = series.path();
                let mut rows = Vec::new();
                for &th in &args.dump_events {
                    let d = directional_change_dissect(&path, th, config.law_options.tick_threshold)?;
                    rows.extend(d.records.into_iter().map(|r| (th, r)));
                }
                write_file(&args.out, &format!("events_{stem}.csv"), &mut entry.files, |w| {
                    Ok(write_event_records(w, rows)?)
                })?;
            }
            Ok(report)
        });
        match result {
            Ok(report) => {
                manifest.stage("analyze", Some(&source.name), Ok(()));
                entry.fits = report.fits.len();
                entry.crosschecks_failed = report.crosschecks.iter().filter(|c| !c.pass).count();
                entry.fit_failures = report.fit_failures;
                all_fits.extend(report.fits);
            }
            Err(err) => manifest.stage("analyze", Some(&source.name), Err(format!("{err:#}"))),
        }
        manifest.instruments.push(entry);
    }

    let mut files = Vec::new();
    write_file(&args.out, "fits.csv", &mut files, |w| Ok(write_fit_rows(w, &all_fits)?))?;
    manifest.finish();
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(args.out.join("manifest.json"), json + "\n").context("cannot write manifest.json")?;

    if manifest.stages.iter().filter(|s| s.name == "analyze").all(|s| !s.ok) {
        let reasons: Vec<_> = manifest.stages.iter().filter_map(|s| s.error.clone()).collect();
        bail!("no instrument could be analyzed: {}", reasons.join("; "));
    }
    Ok(outcome(!manifest.partial))
}

pub fn fit(args: FitArgs) -> Result<Outcome> {
    let wanted = parse_law_selection(&args.law_selection)?;
    let samples = read_law_samples(open(&args.input)?).with_context(|| format!("reading {}", args.input.display()))?;
    let mut rows = Vec::new();
    let mut complete = true;
    for (law, law_samples) in samples.iter().filter(|(law, _)| wanted.contains(law)) {
        match fit_report(&args.instrument, *law, law_samples, fit_range(*law, args.fit_from)) {
            Ok(row) => rows.push(row),
            Err(err) => {
                eprintln!("warning: {law}: {err}");
                complete = false;
            }
        }
    }
    let mut w = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_fit_rows(&mut w, &rows)?,
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?,
        Format::Text => write_fit_text(&mut w, &rows)?,
    }
    w.flush()?;
    Ok(outcome(complete))
}

fn write_fit_text(w: &mut dyn Write, rows: &[FitRow]) -> Result<()> {
    writeln!(
        w,
        "{:<10} {:<5} {:<28} {:>12} {:>10} {:>12} {:>10} {:>8}",
        "instrument", "table", "law", "E", "dE", "C", "dC", "r2_adj"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:<10} {:<5} {:<28} {:>12} {:>10} {:>12} {:>10} {:>8.4}",
            r.instrument,
            r.table,
            r.law.name(),
            sci(r.exponent, 3),
            sci(r.exponent_err, 1),
            sci(r.scale, 3),
            sci(r.scale_err, 1),
            r.r2_adj
        )?;
    }
    Ok(())
}

/// Accepts a table id such as `A7` or a law name such as `dc_count`.
fn table_id(spec: &str) -> Result<String> {
    if let Ok(law) = LawId::from_table_id(spec) {
        return Ok(law.table_id());
    }
    Ok(spec.parse::<LawId>().with_context(|| format!("`{spec}` is neither a table id nor a law name"))?.table_id())
}

pub fn table(args: TableArgs) -> Result<Outcome> {
    let id = table_id(&args.table)?;
    let mut rows = Vec::new();
    for input in &args.input {
        rows.extend(read_fit_rows(open(input)?).with_context(|| format!("reading {}", input.display()))?);
    }
    let table = build_table(&rows, &id)?;
    let mut w = sink(args.out.as_deref())?;
    match args.format {
        Format::Text => write!(w, "{}", render_text(&table))?,
        Format::Csv => write!(w, "{}", render_csv(&table)?)?,
        Format::Json => writeln!(w, "{}", render_json(&table)?)?,
    }
    w.flush()?;
    Ok(Outcome::Complete)
}

pub fn grw_gen(args: GrwGenArgs) -> Result<Outcome> {
    let series =
        generate(&GrwConfig { n_ticks: args.n_ticks, spread: args.quote_spread, ..GrwConfig::with_seed(args.seed) })?;
    let mut w = sink(args.out.as_deref())?;
    write_ticks(&series, &mut w)?;
    w.flush()?;
    Ok(Outcome::Complete)
}

pub fn crosscheck(args: CrosscheckArgs) -> Result<Outcome> {
    let rows = read_fit_rows(open(&args.input)?).with_context(|| format!("reading {}", args.input.display()))?;
    let instruments: BTreeSet<&str> = rows
        .iter()
        .map(|r| r.instrument.as_str())
        .filter(|i| args.instrument.as_deref().is_none_or(|want| want == *i))
        .collect();
    if instruments.is_empty() {
        bail!("no fit rows for the requested instrument in {}", args.input.display());
    }
    let prefix = instruments.len() > 1;
    let mut checks: Vec<CrossCheck> = Vec::new();
    for inst in instruments {
        let fits: Vec<FitRow> = rows.iter().filter(|r| r.instrument == inst).cloned().collect();
        let (found, _) = crosschecks_from_fits(&fits, args.period_seconds, args.tick_threshold);
        checks.extend(found.into_iter().map(|mut c| {
            if prefix {
                c.name = format!("{inst}/{}", c.name);
            }
            c
        }));
    }
    let mut w = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_crosschecks(&mut w, &checks)?,
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&checks)?)?,
        Format::Text => {
            for c in &checks {
                writeln!(
                    w,
                    "{:<32} {:>12} {:>12} {:>10} {:<10} {}",
                    c.name,
                    sci(c.lhs, 4),
                    sci(c.rhs, 4),
                    sci(c.rel_error, 2),
                    c.tolerance.to_string(),
                    if c.pass { "pass" } else { "FAIL" }
                )?;
            }
        }
    }
    w.flush()?;
    Ok(Outcome::Complete)
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn coastline(args: CoastlineArgs) -> Result<Outcome> {
    let sources = sources(&args.source)?;
    let mut results: Vec<(String, Vec<CoastlineRow>)> = Vec::new();
    let mut complete = true;
    for source in &sources {
        let run = load(source, &args.source).and_then(|(series, _)| {
            let opts = CoastlineOptions { laws: law_options(&args.laws, &source.name), fit_from: args.laws.fit_from };
            Ok(coastline_report(&series.path(), &args.thresholds, &opts)?)
        });
        match run {
            Ok(rows) => results.push((source.name.clone(), rows)),
            Err(err) if sources.len() > 1 => {
                eprintln!("warning: {}: {err:#}", source.name);
                complete = false;
            }
            Err(err) => return Err(err),
        }
    }
    if results.is_empty() {
        bail!("no instrument could be processed");
    }

    let mut w = sink(args.out.as_deref())?;
    match args.format {
        Format::Json => {
            let map: Vec<_> =
                results.iter().map(|(name, rows)| serde_json::json!({ "instrument": name, "rows": rows })).collect();
            writeln!(w, "{}", serde_json::to_string_pretty(&map)?)?;
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(&mut w);
            writer.write_record([
                "instrument",
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
            for (name, rows) in &results {
                for r in rows {
                    writer.write_record([
                        name.clone(),
                        r.threshold.to_string(),
                        r.events.to_string(),
                        r.annual_pct.to_string(),
                        r.daily_pct.to_string(),
                        opt(r.fitted_annual_pct),
                        opt(r.cost_adjusted_annual_pct),
                        opt(r.cost_adjusted_daily_pct),
                        opt(r.extrapolated_annual_pct),
                        r.clamped.to_string(),
                        r.below_granularity.to_string(),
                    ])?;
                }
            }
            writer.flush()?;
        }
        Format::Text => {
            writeln!(
                w,
                "{:<10} {:>9} {:>9} {:>12} {:>10} {:>12} {:>12}",
                "instrument", "threshold", "events", "annual_pct", "daily_pct", "fitted", "cost_adj"
            )?;
            for (name, rows) in &results {
                for r in rows {
                    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
                    writeln!(
                        w,
                        "{:<10} {:>8.3}% {:>9} {:>12.2} {:>10.3} {:>12} {:>12}{}",
                        name,
                        100.0 * r.threshold,
                        r.events,
                        r.annual_pct,
                        r.daily_pct,
                        fmt(r.fitted_annual_pct),
                        fmt(r.cost_adjusted_annual_pct),
                        if r.below_granularity { "  (below price granularity)" } else { "" }
                    )?;
                }
            }
        }
    }
    w.flush()?;
    Ok(outcome(complete))
}
