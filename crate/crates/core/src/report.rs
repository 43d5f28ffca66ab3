//! Run orchestration and output: per-station reports, summary tables,
//! fit plots and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{score_models, AiccMode, CriterionScores};
use crate::distributions::FamilyId;
use crate::error::{Error, Result};
use crate::fit::{fit_mle, FitConfig, FittedModel};
use crate::gof::{derive_seed, evaluate, GofConfig, GofResult};
use crate::ingest::{parse_station_csv, summarize, CsvFormat, StationSeries, SummaryStats};
use crate::lmoments::{sample_lmoments, LMomentSet};
use crate::select::{select, Criterion, FamilyScores, SelectConfig, SelectionTable};

/// Significant digits used in the CSV/JSON tables.
pub const TABLE_DIGITS: usize = 6;

/// Minimum number of points per plotted density curve.
pub const CURVE_POINTS: usize = 400;

const MAX_HIST_BINS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format: CsvFormat,
    pub fit: FitConfig,
    pub gof: GofConfig,
    pub select: SelectConfig,
    pub aicc_mode: AiccMode,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: CsvFormat::Long,
            fit: FitConfig::default(),
            gof: GofConfig::default(),
            select: SelectConfig::default(),
            aicc_mode: AiccMode::Standard,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model: FittedModel,
    pub gof: GofResult,
    pub scores: CriterionScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Freedman-Diaconis bins over the sample range. A constant sample gets
    /// a single unit-width bar centred on its value.
    pub fn freedman_diaconis(data: &[f64]) -> Result<Histogram> {
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        if min == max {
            return Ok(Histogram {
                edges: vec![min - 0.5, min + 0.5],
                counts: vec![data.len() as u64],
            });
        }
        let n = sorted.len() as f64;
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let width = 2.0 * iqr / n.cbrt();
        let bins = if width > 0.0 {
            ((max - min) / width).ceil() as usize
        } else {
            // Sturges when the IQR collapses
            (n.log2().ceil() as usize) + 1
        }
        .clamp(1, MAX_HIST_BINS);
        let step = (max - min) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| min + i as f64 * step).collect();
        edges.push(max);
        let mut counts = vec![0u64; bins];
        for &x in data {
            let idx = (((x - min) / step).floor() as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bar heights normalized to unit area.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
            .collect()
    }
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station: String,
    pub summary: SummaryStats,
    pub models: Vec<ModelEntry>,
    pub selection: SelectionTable,
    pub lmoments: LMomentSet,
    pub histogram: Histogram,
}

impl StationReport {
    pub fn winner_entry(&self) -> Option<&ModelEntry> {
        self.models
            .iter()
            .find(|m| m.model.family == self.selection.winner)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub stations: Vec<StationReport>,
}

fn family_index(family: FamilyId) -> u64 {
    FamilyId::ALL.iter().position(|&f| f == family).unwrap_or(0) as u64
}

fn wrap_fit(station: &str, family: FamilyId, e: Error) -> Error {
    Error::InFit {
        station: station.to_string(),
        family,
        source: Box::new(e),
    }
}

fn wrap_station(station: &str, e: Error) -> Error {
    match e {
        e @ Error::InFit { .. } => e,
        e => Error::InStation {
            station: station.to_string(),
            source: Box::new(e),
        },
    }
}

/// Fit, test, score and rank all ten families on one station.
pub fn analyze_station(
    series: &StationSeries,
    station_index: usize,
    config: &RunConfig,
) -> Result<StationReport> {
    let station = series.station.as_str();
    let inner = || -> Result<StationReport> {
        let data = series.values();
        let summary = summarize(series)?;
        let lmoments = sample_lmoments(&data)?;
        let histogram = Histogram::freedman_diaconis(&data)?;
        let station_seed = derive_seed(config.seed, station_index as u64);

        let fitted: Vec<(FittedModel, GofResult)> = FamilyId::ALL
            .par_iter()
            .map(|&family| {
                let stream = derive_seed(station_seed, family_index(family));
                let fit_cfg = FitConfig {
                    seed: stream,
                    ..config.fit.clone()
                };
                let gof_cfg = GofConfig {
                    seed: derive_seed(stream, 1),
                    ..config.gof.clone()
                };
                let model = fit_mle(family, &data, &fit_cfg).map_err(|e| wrap_fit(station, family, e))?;
                if !model.converged {
                    log::warn!("{station}/{family}: optimizer did not converge; using best point found");
                }
                let gof = evaluate(&data, &model, &gof_cfg, &fit_cfg)
                    .map_err(|e| wrap_fit(station, family, e))?;
                Ok((model, gof))
            })
            .collect::<Result<_>>()?;

        let models: Vec<FittedModel> = fitted.iter().map(|(m, _)| m.clone()).collect();
        let scores = score_models(&models, config.aicc_mode)?;
        let family_scores: Vec<FamilyScores> = fitted
            .iter()
            .zip(&scores)
            .map(|((m, g), s)| FamilyScores {
                family: m.family,
                k_params: m.k_params,
                ks_p: g.ks_p,
                ad_p: g.ad_p,
                chi2_p: g.chi2_p,
                chi2: g.chi2,
                chi2_dof: g.chi2_dof,
                aicc: s.aicc,
                bic: s.bic,
            })
            .collect();
        let selection = select(station, &family_scores, &config.select)?;
        let models = fitted
            .into_iter()
            .zip(scores)
            .map(|((model, gof), scores)| ModelEntry { model, gof, scores })
            .collect();
        Ok(StationReport {
            station: station.to_string(),
            summary,
            models,
            selection,
            lmoments,
            histogram,
        })
    };
    inner().map_err(|e| wrap_station(station, e))
}

pub fn analyze(series: &[StationSeries], config: &RunConfig) -> Result<RunReport> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    let stations = series
        .par_iter()
        .enumerate()
        .map(|(i, s)| analyze_station(s, i, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        stations,
    })
}

/// Format with `digits` significant digits, without exponent for ordinary
/// magnitudes.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit, e.g. 9.999995 -> 10.00000
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn sig_num(x: f64) -> serde_json::Value {
    sig(x, TABLE_DIGITS)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn opt_num(x: Option<f64>) -> serde_json::Value {
    x.map(sig_num).unwrap_or(serde_json::Value::Null)
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(|v| sig(v, TABLE_DIGITS)).unwrap_or_default()
}

/// A rendered table as CSV text and a JSON array of row objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    pub json_rows: Vec<serde_json::Map<String, serde_json::Value>>,
}

impl Table {
    fn new(name: &'static str, header: &[&str]) -> Self {
        Table {
            name,
            header: header.iter().map(|s| s.to_string()).collect(),
            csv_rows: Vec::new(),
            json_rows: Vec::new(),
        }
    }

    fn push(&mut self, cells: Vec<(String, serde_json::Value)>) {
        let mut obj = serde_json::Map::new();
        for (h, (_, v)) in self.header.iter().zip(&cells) {
            obj.insert(h.clone(), v.clone());
        }
        self.csv_rows.push(cells.into_iter().map(|c| c.0).collect());
        self.json_rows.push(obj);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.csv_rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(self.name, e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.json_rows)? + "\n")
    }
}

fn text(s: &str) -> (String, serde_json::Value) {
    (s.to_string(), serde_json::Value::String(s.to_string()))
}

fn num(x: f64) -> (String, serde_json::Value) {
    (sig(x, TABLE_DIGITS), sig_num(x))
}

fn count(x: usize) -> (String, serde_json::Value) {
    (x.to_string(), serde_json::Value::from(x))
}

/// Summary statistics, per-criterion winners, aggregate winners,
/// L-moments and a per-fit detail table.
pub fn render_tables(reports: &[StationReport]) -> Result<Vec<Table>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut summary = Table::new(
        "table2_summary",
        &["station", "n", "min", "max", "mean", "sd", "cv", "skewness", "kurtosis"],
    );
    let mut per_criterion = Table::new("table3_per_criterion", &["station", "ks", "ad", "chi2", "aicc", "bic"]);
    let mut best = Table::new("table4_best_fit", &["station", "best_fit"]);
    let mut lmom = Table::new(
        "table5_lmoments",
        &["station", "l1", "l2", "l3", "l4", "tau3", "tau4"],
    );
    let mut fits = Table::new(
        "fits",
        &[
            "station", "family", "k_params", "converged", "shapes", "loc", "scale", "log_likelihood",
            "ks_d", "ks_p", "ad_a2", "ad_p", "chi2", "chi2_dof", "chi2_p", "aic", "aicc", "bic",
            "rank_ks", "rank_ad", "rank_chi2", "rank_aicc", "rank_bic", "cumulative_rank",
        ],
    );

    for r in reports {
        let s = &r.summary;
        summary.push(vec![
            text(&r.station),
            count(s.n),
            num(s.min),
            num(s.max),
            num(s.mean),
            num(s.sd),
            num(s.cv),
            (opt_sig(s.skewness), opt_num(s.skewness)),
            (opt_sig(s.kurtosis), opt_num(s.kurtosis)),
        ]);

        let mut row = vec![text(&r.station)];
        for c in Criterion::ALL {
            let name = r.selection.per_criterion_best.get(&c).map(|f| f.name()).unwrap_or("");
            row.push(text(name));
        }
        per_criterion.push(row);

        best.push(vec![text(&r.station), text(r.selection.winner.name())]);

        let l = &r.lmoments;
        lmom.push(vec![
            text(&r.station),
            num(l.l1),
            num(l.l2),
            num(l.l3),
            num(l.l4),
            num(l.tau3),
            num(l.tau4),
        ]);

        for e in &r.models {
            let m = &e.model;
            let shapes = m
                .params
                .shapes
                .iter()
                .map(|v| sig(*v, TABLE_DIGITS))
                .collect::<Vec<_>>()
                .join(";");
            let rank = |c: Criterion| {
                let v = r.selection.ranks.get(&c).and_then(|col| col.get(&m.family)).copied().unwrap_or(0);
                count(v)
            };
            fits.push(vec![
                text(&r.station),
                text(m.family.name()),
                count(m.k_params),
                (m.converged.to_string(), serde_json::Value::Bool(m.converged)),
                (
                    shapes,
                    serde_json::Value::Array(m.params.shapes.iter().map(|v| sig_num(*v)).collect()),
                ),
                num(m.params.loc),
                num(m.params.scale),
                num(m.log_likelihood),
                num(e.gof.ks_d),
                num(e.gof.ks_p),
                num(e.gof.ad_a2),
                num(e.gof.ad_p),
                num(e.gof.chi2),
                count(e.gof.chi2_dof),
                num(e.gof.chi2_p),
                num(e.scores.aic),
                num(e.scores.aicc),
                num(e.scores.bic),
                rank(Criterion::Ks),
                rank(Criterion::Ad),
                rank(Criterion::Chi2),
                rank(Criterion::Aicc),
                rank(Criterion::Bic),
                count(r.selection.cumulative.get(&m.family).copied().unwrap_or(0)),
            ]);
        }
    }
    Ok(vec![summary, per_criterion, best, lmom, fits])
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// Density histogram with every fitted density overlaid.
pub fn render_fit_plot(station: &str, histogram: &Histogram, models: &[FittedModel]) -> Result<String> {
    if histogram.counts.is_empty() || histogram.total() == 0 {
        return Err(Error::EmptySample);
    }
    let (width, height) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 60.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let densities = histogram.densities();
    let x_lo = histogram.edges[0];
    let x_hi = *histogram.edges.last().expect("edges non-empty");
    let degenerate = histogram.counts.len() == 1 && x_hi - x_lo == 1.0 && histogram.edges.len() == 2;
    let (data_lo, data_hi) = if degenerate {
        (x_lo + 0.5, x_lo + 0.5)
    } else {
        (x_lo, x_hi)
    };

    let mut curves: Vec<(FamilyId, Vec<(f64, f64)>)> = Vec::new();
    for m in models {
        if data_hi <= data_lo {
            log::warn!("{station}/{}: sample has no spread; density curve skipped", m.family);
            continue;
        }
        let dist = match crate::distributions::Distribution::new(m.family, m.params.clone()) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("{station}/{}: density curve skipped: {e}", m.family);
                continue;
            }
        };
        let pts: Vec<(f64, f64)> = (0..CURVE_POINTS)
            .map(|i| {
                let x = data_lo + (data_hi - data_lo) * i as f64 / (CURVE_POINTS - 1) as f64;
                (x, dist.pdf(x))
            })
            .collect();
        if pts.iter().all(|p| !p.1.is_finite()) {
            log::warn!("{station}/{}: density not finite on the data range; curve skipped", m.family);
            continue;
        }
        curves.push((m.family, pts));
    }

    let hist_max = densities.iter().copied().fold(0.0, f64::max);
    // cap the y range so a density spike at the boundary cannot flatten the plot
    let curve_max = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let y_max = if hist_max > 0.0 {
        curve_max.min(3.0 * hist_max).max(hist_max) * 1.05
    } else {
        1.0
    };

    let px = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| top + plot_h - (y.clamp(0.0, y_max) / y_max) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" data-station="{}">"#,
        escape_xml(station)
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        left + plot_w / 2.0,
        escape_xml(station)
    );

    let _ = writeln!(svg, r##"<g class="histogram" fill="#d9d9d9" stroke="#969696" stroke-width="0.5">"##);
    for (w, d) in histogram.edges.windows(2).zip(&densities) {
        let (x0, x1) = (px(w[0]), px(w[1]));
        let y = py(*d);
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" data-x0="{}" data-x1="{}" data-density="{}"/>"#,
            x1 - x0,
            top + plot_h - y,
            w[0],
            w[1],
            d
        );
    }
    let _ = writeln!(svg, "</g>");

    for (i, (family, pts)) in curves.iter().enumerate() {
        let points = pts
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(if y.is_finite() { y } else { y_max })))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" data-family="{}" data-x-min="{}" data-x-max="{}" data-points="{}" points="{points}"/>"#,
            PALETTE[i % PALETTE.len()],
            family.name(),
            pts[0].0,
            pts[pts.len() - 1].0,
            pts.len()
        );
    }

    // axes
    let axis_y = top + plot_h;
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{axis_y}" x2="{}" y2="{axis_y}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{axis_y}"/></g>"#,
        left + plot_w
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = t * y_max;
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            px(xv),
            axis_y + 16.0,
            sig(xv, 4)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(yv) + 4.0,
            sig(yv, 3)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">precipitation (mm)</text>"#,
        left + plot_w / 2.0,
        height - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">density</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (i, (family, _)) in curves.iter().enumerate() {
        let y = top + 10.0 + 18.0 * i as f64;
        let x = left + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            PALETTE[i % PALETTE.len()],
            x + 26.0,
            y + 4.0,
            family.name()
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// File name for a station's plot; characters unsafe in paths become `_`.
pub fn plot_file_name(station: &str) -> String {
    let safe: String = station
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}_fits.svg")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub seed: u64,
    pub config: RunConfig,
    pub stations: Vec<String>,
    pub files: Vec<String>,
}

/// Every output file name and its contents, in write order.
pub fn render_outputs(input: &Path, report: &RunReport) -> Result<Vec<(String, String)>> {
    let mut files: Vec<(String, String)> = Vec::new();
    files.push(("report.json".into(), serde_json::to_string_pretty(report)? + "\n"));
    for t in render_tables(&report.stations)? {
        files.push((format!("{}.csv", t.name), t.to_csv()?));
        files.push((format!("{}.json", t.name), t.to_json()?));
    }
    for r in &report.stations {
        let models: Vec<FittedModel> = r.models.iter().map(|m| m.model.clone()).collect();
        files.push((plot_file_name(&r.station), render_fit_plot(&r.station, &r.histogram, &models)?));
    }
    let manifest = Manifest {
        tool: report.tool.clone(),
        version: report.version.clone(),
        input: input.display().to_string(),
        seed: report.config.seed,
        config: report.config.clone(),
        stations: report.stations.iter().map(|s| s.station.clone()).collect(),
        files: files.iter().map(|f| f.0.clone()).collect(),
    };
    files.push(("manifest.json".into(), serde_json::to_string_pretty(&manifest)? + "\n"));
    Ok(files)
}

/// Parse, analyze and write all outputs to `out_dir`. Nothing is written
/// unless every station succeeds.
pub fn run_pipeline(input: &Path, out_dir: &Path, config: &RunConfig) -> Result<RunReport> {
    let series = parse_station_csv(input, config.format)?;
    let report = analyze(&series, config)?;
    let files = render_outputs(input, &report)?;
    write_all(out_dir, &files)?;
    Ok(report)
}

/// Write into a staging directory next to `out_dir`, then move the files
/// into place.
fn write_all(out_dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let staging: PathBuf = out_dir.join(format!(".staging-{}", std::process::id()));
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    let staged = files.iter().try_for_each(|(name, body)| {
        let p = staging.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))
    });
    if let Err(e) = staged {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    for (name, _) in files {
        let from = staging.join(name);
        let to = out_dir.join(name);
        fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
    }
    fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    Ok(())
}
