//! Render leaderboard rows in every output format.

use obench::spectral::{render_report, EvalReport, ReportFormat, Scale};

fn main() -> obench::Result<()> {
    let row = |alg: &str, score: f64, std: f64, r: f64, x: f64, t: f64| {
        EvalReport::new("OSSE NADIR", alg, score)
            .with_std(std)
            .with_scales(None, Some(Scale::Resolved(r)), Some(Scale::Resolved(x)), Some(Scale::Resolved(t)))
    };
    let reports = [
        row("OI", 0.92, 0.01, 123.0, 174.0, 10.8),
        row("MIOST", 0.93, 0.01, 100.0, 157.0, 10.1),
        row("4DVarNet", 0.95, 0.01, 65.0, 117.0, 7.7),
        EvalReport::new("OSSE NADIR", "climatology", 0.41).with_scales(None, Some(Scale::Unresolved), None, None),
    ];
    for format in [ReportFormat::Markdown, ReportFormat::MarkdownCompact, ReportFormat::Csv] {
        println!("{}", render_report(&reports, format)?);
    }
    println!("{}", render_report(&reports[..1], ReportFormat::Json)?);
    Ok(())
}
