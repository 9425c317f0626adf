use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{aggregate_trials, BoxStats, PhaseRecord};
use crate::error::{Error, Result};

/// One line of a per-trial results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub mode: String,
    pub phase: usize,
    pub beta: f64,
    pub seed: u64,
    pub episode_return: f64,
    pub mean_exec_delay: f64,
    pub jobs_completed: u64,
}

/// Box statistics of one metric over the trials of one (mode, phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub mode: String,
    pub phase: usize,
    pub beta: f64,
    pub metric: String,
    pub n: usize,
    pub min: f64,
    pub hinge_lo: f64,
    pub median: f64,
    pub hinge_hi: f64,
    pub max: f64,
    /// Space-separated.
    pub outliers: String,
}

impl AggregateRow {
    fn new(mode: &str, phase: usize, beta: f64, metric: &str, s: &BoxStats) -> Self {
        Self {
            mode: mode.to_string(),
            phase,
            beta,
            metric: metric.to_string(),
            n: s.n,
            min: s.min,
            hinge_lo: s.hinge_lo,
            median: s.median,
            hinge_hi: s.hinge_hi,
            max: s.max,
            outliers: s
                .outliers
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_results_csv(path: &Path, records: &[PhaseRecord]) -> Result<()> {
    let mut w = writer(path)?;
    for r in records {
        w.serialize(r.row())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Mean training loss over consecutive windows of `window` steps.
pub fn write_loss_csv(path: &Path, records: &[PhaseRecord], window: usize) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        mode: &'a str,
        phase: usize,
        seed: u64,
        step: usize,
        mean_loss: f64,
    }
    let window = window.max(1);
    let mut w = writer(path)?;
    for r in records {
        for (k, chunk) in r.losses.chunks(window).enumerate() {
            w.serialize(Row {
                mode: &r.mode,
                phase: r.phase,
                seed: r.seed,
                step: k * window + chunk.len(),
                mean_loss: chunk.iter().sum::<f64>() / chunk.len() as f64,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Groups rows by (mode, phase) in first-seen order and summarizes both metrics.
/// Non-finite values (phases without completed jobs) are left out of the summary.
pub fn aggregate_rows(rows: &[ResultRow]) -> Result<Vec<AggregateRow>> {
    type Key = (String, usize, f64);
    let mut groups: Vec<(Key, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|(k, _)| k.0 == r.mode && k.1 == r.phase)
        {
            Some((_, g)) => g.push(r),
            None => groups.push(((r.mode.clone(), r.phase, r.beta), vec![r])),
        }
    }
    let mut out = Vec::new();
    for ((mode, phase, beta), g) in &groups {
        let metrics: [(&str, Vec<f64>); 2] = [
            (
                "episode_return",
                g.iter().map(|r| r.episode_return).collect(),
            ),
            (
                "mean_exec_delay",
                g.iter().map(|r| r.mean_exec_delay).collect(),
            ),
        ];
        for (name, values) in metrics {
            let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
            if finite.is_empty() {
                continue;
            }
            out.push(AggregateRow::new(
                mode,
                *phase,
                *beta,
                name,
                &aggregate_trials(&finite)?,
            ));
        }
    }
    Ok(out)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Box-and-whisker chart of one metric: one box per (mode, phase), grouped by phase.
pub fn write_boxplot_svg(path: &Path, rows: &[AggregateRow], metric: &str) -> Result<()> {
    let rows: Vec<&AggregateRow> = rows.iter().filter(|r| r.metric == metric).collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "no aggregate rows for metric '{metric}'"
        )));
    }
    let outliers = |r: &AggregateRow| -> Vec<f64> {
        r.outliers
            .split_whitespace()
            .filter_map(|v| v.parse().ok())
            .collect()
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &rows {
        for v in outliers(r).into_iter().chain([r.min, r.max]) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let (width, height, left, top, plot_h, slot) = (
        80.0 + 60.0 * rows.len() as f64,
        360.0,
        60.0,
        30.0,
        260.0,
        60.0,
    );
    let y = |v: f64| top + plot_h * (hi - v) / (hi - lo);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="18" font-size="12">{metric}</text>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        top + plot_h
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            left - 4.0,
            y(v) + 3.0
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let cx = left + slot * (i as f64 + 0.5) + 10.0;
        let (bx, bw) = (cx - 15.0, 30.0);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            y(r.max),
            y(r.min)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{bx:.1}" y="{:.1}" width="{bw}" height="{:.1}" fill="lightsteelblue" stroke="black"/>"#,
            y(r.hinge_hi),
            (y(r.hinge_lo) - y(r.hinge_hi)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{bx:.1}" y1="{m:.1}" x2="{:.1}" y2="{m:.1}" stroke="black" stroke-width="2"/>"#,
            bx + bw,
            m = y(r.median)
        );
        for o in outliers(r) {
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.1}" cy="{:.1}" r="2.5" fill="none" stroke="black"/>"#,
                y(o)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{} p{}</text>"#,
            top + plot_h + 16.0,
            r.mode,
            r.phase
        );
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
