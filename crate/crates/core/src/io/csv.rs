use crate::error::{Error, Result};
use crate::metrics::{MetricsReport, MetricsRow};

pub const METRICS_HEADER: &str = "label,dataset,scr_db,scr_ratio,rms_velocity_error,valid_pixels";
pub const AGGREGATE_NAME: &str = "aggregate";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn field_ok(s: &str) -> Result<()> {
    if s.contains([',', '\n', '\r', '"']) {
        return Err(Error::Malformed(format!("'{s}' cannot be written to a CSV field")));
    }
    Ok(())
}

/// Header, one row per dataset, and an aggregate row when any dataset is present.
pub fn write_metrics_csv(report: &MetricsReport) -> Result<String> {
    field_ok(&report.config_label)?;
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in &report.rows {
        field_ok(&r.dataset)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            report.config_label,
            r.dataset,
            opt(r.scr_db),
            opt(r.scr_ratio),
            opt(r.rms_velocity_error),
            r.valid_pixels
        ));
    }
    if !report.rows.is_empty() {
        let total: usize = report.rows.iter().map(|r| r.valid_pixels).sum();
        out.push_str(&format!(
            "{},{AGGREGATE_NAME},{},,{},{total}\n",
            report.config_label,
            opt(report.aggregate_scr_db),
            opt(report.aggregate_rms)
        ));
    }
    Ok(out)
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Malformed(format!("line {line}: '{s}' is not a number")))
}

pub fn parse_metrics_csv(text: &str) -> Result<MetricsReport> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        _ => return Err(Error::Malformed("missing metrics header".into())),
    }
    let mut report = MetricsReport::new("");
    for (i, line) in lines {
        let line_no = i + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Malformed(format!(
                "line {line_no}: expected 6 fields, got {}",
                cols.len()
            )));
        }
        report.config_label = cols[0].to_string();
        let valid_pixels = cols[5]
            .parse()
            .map_err(|_| Error::Malformed(format!("line {line_no}: bad pixel count '{}'", cols[5])))?;
        if cols[1] == AGGREGATE_NAME {
            report.aggregate_scr_db = parse_opt(cols[2], line_no)?;
            report.aggregate_rms = parse_opt(cols[4], line_no)?;
        } else {
            report.rows.push(MetricsRow {
                dataset: cols[1].to_string(),
                scr_db: parse_opt(cols[2], line_no)?,
                scr_ratio: parse_opt(cols[3], line_no)?,
                rms_velocity_error: parse_opt(cols[4], line_no)?,
                valid_pixels,
            });
        }
    }
    Ok(report)
}
