//! Leaderboard rows and their Markdown, CSV and JSON renderings.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::score::THRESHOLD;
use super::{Scale, ScoreSeries};
use crate::{Error, Result};

/// One leaderboard row. Absent metrics are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: String,
    pub algorithm: String,
    pub nrmse_mean: f64,
    pub nrmse_std: Option<f64>,
    pub lambda_a_km: Option<Scale>,
    pub lambda_r_km: Option<Scale>,
    pub lambda_x_km: Option<Scale>,
    pub lambda_t_days: Option<Scale>,
    /// PSD-score threshold used for every resolved scale.
    pub threshold: f64,
}

impl EvalReport {
    pub fn new(experiment: impl Into<String>, algorithm: impl Into<String>, nrmse_mean: f64) -> Self {
        EvalReport {
            experiment: experiment.into(),
            algorithm: algorithm.into(),
            nrmse_mean,
            nrmse_std: None,
            lambda_a_km: None,
            lambda_r_km: None,
            lambda_x_km: None,
            lambda_t_days: None,
            threshold: THRESHOLD,
        }
    }

    pub fn from_series(experiment: impl Into<String>, algorithm: impl Into<String>, series: &ScoreSeries) -> Self {
        EvalReport {
            nrmse_std: Some(series.std),
            ..EvalReport::new(experiment, algorithm, series.mean)
        }
    }

    pub fn with_std(mut self, std: f64) -> Self {
        self.nrmse_std = Some(std);
        self
    }

    /// Sets the four resolved scales; km for the spatial ones, days for `t`.
    pub fn with_scales(mut self, a: Option<Scale>, r: Option<Scale>, x: Option<Scale>, t: Option<Scale>) -> Self {
        self.lambda_a_km = a;
        self.lambda_r_km = r;
        self.lambda_x_km = x;
        self.lambda_t_days = t;
        self
    }

    fn cells(&self, show_std: bool) -> [String; 7] {
        let score = match self.nrmse_std {
            Some(std) if show_std => format!("{:.2} ± {:.2}", self.nrmse_mean, std),
            _ => format!("{:.2}", self.nrmse_mean),
        };
        [
            self.experiment.clone(),
            self.algorithm.clone(),
            score,
            scale_cell(self.lambda_a_km, 0),
            scale_cell(self.lambda_r_km, 0),
            scale_cell(self.lambda_x_km, 0),
            scale_cell(self.lambda_t_days, 1),
        ]
    }
}

fn scale_cell(s: Option<Scale>, decimals: usize) -> String {
    match s {
        None => "-".into(),
        Some(Scale::Resolved(v)) => format!("{v:.decimals$}"),
        Some(Scale::GridScale(v)) => format!("≤{v:.decimals$}"),
        Some(Scale::Unresolved) => "∞".into(),
    }
}

pub const COLUMNS: [&str; 7] = [
    "Experiment",
    "Algorithm",
    "nRMSE Score",
    "λ_a [km]",
    "λ_r [km]",
    "λ_x [km]",
    "λ_t [days]",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Markdown with `mean ± std` scores.
    Markdown,
    /// Markdown with the score mean only and the best entry of every column
    /// in bold within each experiment, as in summary leaderboards.
    MarkdownCompact,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "markdown-compact" => Ok(ReportFormat::MarkdownCompact),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidArgument(format!(
                "unknown report format `{s}` (markdown, markdown-compact, csv, json)"
            ))),
        }
    }
}

/// Rounds to the displayed precision so that visually tied cells tie.
fn shown(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

/// Sort keys per metric column (lower is better); `None` never wins.
fn metric_keys(r: &EvalReport) -> [Option<f64>; 5] {
    let scale = |s: Option<Scale>, d| match s? {
        Scale::Resolved(v) | Scale::GridScale(v) => Some(shown(v, d)),
        Scale::Unresolved => None,
    };
    [
        Some(-shown(r.nrmse_mean, 2)),
        scale(r.lambda_a_km, 0),
        scale(r.lambda_r_km, 0),
        scale(r.lambda_x_km, 0),
        scale(r.lambda_t_days, 1),
    ]
}

/// Which metric cells to embolden: the best value of each column among rows
/// of the same experiment (groups of two or more rows). Ties go to the row
/// with the higher score, then to the later row.
fn best_cells(reports: &[EvalReport]) -> Vec<[bool; 5]> {
    let keys: Vec<_> = reports.iter().map(metric_keys).collect();
    let mut out = vec![[false; 5]; reports.len()];
    for (i, r) in reports.iter().enumerate() {
        let group: Vec<usize> = (0..reports.len()).filter(|j| reports[*j].experiment == r.experiment).collect();
        if group.len() < 2 || group[0] != i {
            continue;
        }
        for c in 0..5 {
            let winner = group
                .iter()
                .filter_map(|j| keys[*j][c].map(|k| (k, keys[*j][0].unwrap_or(f64::INFINITY), *j)))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(b.2.cmp(&a.2)));
            if let Some((_, _, j)) = winner {
                out[j][c] = true;
            }
        }
    }
    out
}

fn markdown(reports: &[EvalReport], compact: bool) -> String {
    let row = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    let mut out = row(&COLUMNS.map(String::from));
    out.push_str(&row(&COLUMNS.map(|_| "---".to_string())));
    let best = if compact { best_cells(reports) } else { vec![[false; 5]; reports.len()] };
    for (r, best) in reports.iter().zip(best) {
        let mut cells = r.cells(!compact);
        for (cell, bold) in cells[2..].iter_mut().zip(best) {
            if bold {
                *cell = format!("**{cell}**");
            }
        }
        out.push_str(&row(&cells));
    }
    out
}

fn csv_table(reports: &[EvalReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(COLUMNS).map_err(io)?;
    for r in reports {
        w.write_record(r.cells(true)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_report(reports: &[EvalReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Markdown => Ok(markdown(reports, false)),
        ReportFormat::MarkdownCompact => Ok(markdown(reports, true)),
        ReportFormat::Csv => csv_table(reports),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports)
                .map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Parses a JSON array of reports (or a single report object).
pub fn parse_reports(text: &str) -> Result<Vec<EvalReport>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("report", e.to_string()))?;
    let value = if value.is_object() {
        serde_json::Value::Array(vec![value])
    } else {
        value
    };
    serde_json::from_value(value).map_err(|e| Error::parse("report", e.to_string()))
}
