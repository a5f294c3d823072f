use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::trial::TrialRecord;
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupField {
    Method,
    M,
    N,
    Rank,
    Rho,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::Method => "method",
            GroupField::M => "m",
            GroupField::N => "n",
            GroupField::Rank => "rank",
            GroupField::Rho => "rho",
        }
    }

    fn key(self, r: &TrialRecord) -> String {
        match self {
            GroupField::Method => r.method.clone(),
            GroupField::M => r.m.to_string(),
            GroupField::N => r.n.to_string(),
            GroupField::Rank => r.r.to_string(),
            GroupField::Rho => r.rho.to_string(),
        }
    }

    fn numeric(self, r: &TrialRecord) -> Option<f64> {
        match self {
            GroupField::Method => None,
            GroupField::M => Some(r.m as f64),
            GroupField::N => Some(r.n as f64),
            GroupField::Rank => Some(r.r as f64),
            GroupField::Rho => Some(r.rho),
        }
    }
}

/// Summary of the records sharing one group key. Means and population
/// standard deviations are taken over trials with finite metrics; `failed`
/// counts the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub key: Vec<String>,
    pub x: Option<f64>,
    pub trials: usize,
    pub failed: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub angle_mean: f64,
    pub angle_std: f64,
    pub runtime_ms_mean: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Groups records by `group_by` (in first-appearance order) and summarizes
/// each group. `chart_x` picks the numeric field stored in `AggregateRow::x`.
pub fn aggregate(
    records: &[TrialRecord],
    group_by: &[GroupField],
    chart_x: Option<GroupField>,
) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let mut groups: Vec<(Vec<String>, Vec<&TrialRecord>)> = Vec::new();
    for rec in records {
        let key: Vec<String> = group_by.iter().map(|g| g.key(rec)).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(rec),
            None => groups.push((key, vec![rec])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, members)| {
            let ok: Vec<&&TrialRecord> = members
                .iter()
                .filter(|r| r.mse_norm.is_finite() && r.angle_deg.is_finite())
                .collect();
            let (mse_mean, mse_std) = mean_std(&ok.iter().map(|r| r.mse_norm).collect::<Vec<_>>());
            let (angle_mean, angle_std) = mean_std(&ok.iter().map(|r| r.angle_deg).collect::<Vec<_>>());
            let runtime = members.iter().map(|r| r.runtime_ms as f64).sum::<f64>() / members.len() as f64;
            AggregateRow {
                x: chart_x.and_then(|g| g.numeric(members[0])),
                key,
                trials: members.len(),
                failed: members.len() - ok.len(),
                mse_mean,
                mse_std,
                angle_mean,
                angle_std,
                runtime_ms_mean: runtime,
            }
        })
        .collect())
}

pub fn raw_csv(records: &[TrialRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_raw_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn aggregate_csv(rows: &[AggregateRow], group_by: &[GroupField]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = group_by.iter().map(|g| g.name()).collect();
    header.extend([
        "trials",
        "failed",
        "mse_norm_mean",
        "mse_norm_std_pop",
        "angle_deg_mean",
        "angle_deg_std_pop",
        "runtime_ms_mean",
    ]);
    w.write_record(&header)?;
    for row in rows {
        let mut fields = row.key.clone();
        fields.extend([
            row.trials.to_string(),
            row.failed.to_string(),
            row.mse_mean.to_string(),
            row.mse_std.to_string(),
            row.angle_mean.to_string(),
            row.angle_std.to_string(),
            format!("{:.1}", row.runtime_ms_mean),
        ]);
        w.write_record(&fields)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line chart of one metric against `x`, one series per distinct label.
pub fn line_chart_svg(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 60.0);
    let pts = series.iter().flat_map(|(_, p)| p.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        svg,
        r#"<path d="M{pad} {} L{pad} {} L{} {}" stroke="black" fill="none"/>"#,
        pad,
        h - pad,
        w - pad,
        h - pad
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(fx), h - pad + 18.0, trim(fx));
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, pad - 6.0, sy(fy) + 4.0, trim(fy));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 16.0);
    for (i, (label, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#, path.join(" "));
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#, w - pad - 40.0);
    }
    svg.push_str("</svg>\n");
    svg
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub raw: PathBuf,
    pub aggregate: PathBuf,
    pub charts: Vec<PathBuf>,
}

/// Writes `raw.csv`, `aggregate.csv` and, when `chart_x` is given,
/// `mse_norm.svg` and `angle_deg.svg` with one line per method.
pub fn emit_report(
    records: &[TrialRecord],
    group_by: &[GroupField],
    chart_x: Option<GroupField>,
    out_dir: &Path,
) -> Result<ReportFiles> {
    let rows = aggregate(records, group_by, chart_x)?;
    fs::create_dir_all(out_dir)?;
    let raw = out_dir.join("raw.csv");
    fs::write(&raw, raw_csv(records)?)?;
    let agg = out_dir.join("aggregate.csv");
    fs::write(&agg, aggregate_csv(&rows, group_by)?)?;

    let mut charts = Vec::new();
    if let Some(xf) = chart_x {
        let method_pos = group_by.iter().position(|g| *g == GroupField::Method);
        let mut by_method: Vec<(String, Vec<&AggregateRow>)> = Vec::new();
        for row in &rows {
            let label = method_pos.map_or_else(|| "all".to_string(), |p| row.key[p].clone());
            match by_method.iter_mut().find(|(l, _)| *l == label) {
                Some((_, v)) => v.push(row),
                None => by_method.push((label, vec![row])),
            }
        }
        for (metric, title, pick) in [
            ("mse_norm", "normalized MSE", (|r: &AggregateRow| r.mse_mean) as fn(&AggregateRow) -> f64),
            ("angle_deg", "mean subspace angle (deg)", |r: &AggregateRow| r.angle_mean),
        ] {
            let series: Vec<(String, Vec<(f64, f64)>)> = by_method
                .iter()
                .map(|(label, rs)| {
                    let mut pts: Vec<(f64, f64)> = rs.iter().map(|r| (r.x.unwrap_or(f64::NAN), pick(r))).collect();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    (label.clone(), pts)
                })
                .collect();
            let path = out_dir.join(format!("{metric}.svg"));
            fs::write(&path, line_chart_svg(title, xf.name(), &series))?;
            charts.push(path);
        }
    }
    Ok(ReportFiles { raw, aggregate: agg, charts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, rho: f64, mse: f64, angle: f64) -> TrialRecord {
        TrialRecord {
            method: method.into(),
            m: 4,
            n: 10,
            r: 1,
            rho,
            seed: 1,
            iterations_used: 3,
            mse_norm: mse,
            angle_deg: angle,
            runtime_ms: 2,
            converged: true,
        }
    }

    #[test]
    fn raw_header_is_fixed() {
        let text = raw_csv(&[rec("eb", 0.1, 0.5, 1.0)]).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "method,m,n,rank,rho,seed,iterations,mse_norm,angle_deg,runtime_ms,converged"
        );
        assert_eq!(read_raw_csv(&text).unwrap(), vec![rec("eb", 0.1, 0.5, 1.0)]);
    }

    #[test]
    fn aggregate_uses_population_std() {
        let recs = [rec("eb", 0.1, 1.0, 2.0), rec("eb", 0.1, 3.0, 4.0), rec("pcp", 0.1, 5.0, 6.0)];
        let rows = aggregate(&recs, &[GroupField::Method, GroupField::Rho], Some(GroupField::Rho)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].key, vec!["eb".to_string(), "0.1".to_string()]);
        assert_eq!(rows[0].mse_mean, 2.0);
        assert_eq!(rows[0].mse_std, 1.0);
        assert_eq!(rows[0].angle_std, 1.0);
        assert_eq!(rows[1].mse_std, 0.0);
        assert_eq!(rows[0].x, Some(0.1));
    }

    #[test]
    fn failed_trials_are_counted_not_averaged() {
        let recs = [rec("eb", 0.1, 1.0, 2.0), rec("eb", 0.1, f64::NAN, f64::NAN)];
        let rows = aggregate(&recs, &[GroupField::Method], None).unwrap();
        assert_eq!(rows[0].failed, 1);
        assert_eq!(rows[0].mse_mean, 1.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(aggregate(&[], &[GroupField::Method], None), Err(BenchError::EmptyRecords)));
        assert!(raw_csv(&[]).is_err());
    }

    #[test]
    fn emits_files() {
        let dir = tempfile::tempdir().unwrap();
        let recs = [rec("eb", 0.1, 1.0, 2.0), rec("eb", 0.2, 3.0, 4.0), rec("pcp", 0.1, 5.0, 6.0)];
        let files = emit_report(&recs, &[GroupField::Method, GroupField::Rho], Some(GroupField::Rho), dir.path()).unwrap();
        assert_eq!(files.charts.len(), 2);
        let agg = fs::read_to_string(&files.aggregate).unwrap();
        assert_eq!(agg.lines().count(), 4);
        assert!(agg.starts_with("method,rho,trials,failed,mse_norm_mean,mse_norm_std_pop"));
        let svg = fs::read_to_string(&files.charts[0]).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
