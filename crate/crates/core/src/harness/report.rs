//! Aggregation of sweep rows into confidence intervals, a grouped summary
//! table, and accuracy/distance-vs-rho plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::{accuracy_by_rho, select_default, selection_condition, Condition, ResultRow};
use crate::controllers::Method;
use crate::error::{Error, Result};
use crate::metrics::REQUIRED_ACCURACY;

/// Mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Interval {
    /// `1.96 * sd / sqrt(n)` with the sample standard deviation; zero for one sample.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                half_width: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let half_width = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * var.sqrt() / (n as f64).sqrt()
        };
        Self { mean, half_width, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionSummary {
    pub accuracy: Interval,
    pub translation: Interval,
    pub rotation: Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Keyed by method, condition, then `rho` (as ordered text).
    pub cells: BTreeMap<(Method, Condition), Vec<(f64, ConditionSummary)>>,
    pub selected: BTreeMap<Method, Option<f64>>,
}

/// Groups rows by method, condition and `rho`.
pub fn summarize(rows: &[ResultRow]) -> Result<Report> {
    let mut groups: BTreeMap<(Method, Condition), BTreeMap<i64, (f64, Vec<&ResultRow>)>> = BTreeMap::new();
    for r in rows {
        let c = Condition::of_row(r)?;
        groups
            .entry((r.method, c))
            .or_default()
            .entry(rho_key(r.rho))
            .or_insert_with(|| (r.rho, Vec::new()))
            .1
            .push(r);
    }
    let cells = groups
        .into_iter()
        .map(|(k, by_rho)| {
            let series = by_rho
                .into_values()
                .map(|(rho, rs)| {
                    let col = |f: fn(&ResultRow) -> f64| Interval::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
                    (
                        rho,
                        ConditionSummary {
                            accuracy: col(|r| r.accuracy),
                            translation: col(|r| r.translation_m),
                            rotation: col(|r| r.rotation_rad),
                        },
                    )
                })
                .collect();
            (k, series)
        })
        .collect();
    Ok(Report {
        cells,
        selected: select_default(rows)?,
    })
}

fn rho_key(rho: f64) -> i64 {
    (rho * 1e6).round() as i64
}

impl Report {
    /// Control cost used for a method's table rows: the selected value, or
    /// the best-scoring one under its selection condition if none qualifies.
    pub fn table_rho(&self, rows: &[ResultRow], method: Method) -> Result<Option<(f64, bool)>> {
        if let Some(Some(rho)) = self.selected.get(&method) {
            return Ok(Some((*rho, true)));
        }
        Ok(accuracy_by_rho(rows, method, selection_condition(method))?
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(rho, _)| (rho, false)))
    }

    /// Plain-text table grouped by condition in summary order.
    pub fn table(&self, rows: &[ResultRow]) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "Required accuracy: {REQUIRED_ACCURACY}");
        for (m, sel) in &self.selected {
            let _ = match sel {
                Some(rho) => writeln!(
                    out,
                    "{m}: selected rho = {rho} under {}",
                    selection_condition(*m).label()
                ),
                None => writeln!(
                    out,
                    "{m}: no rho reaches the requirement under {}",
                    selection_condition(*m).label()
                ),
            };
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<22} {:<10} {:>6} {:>16} {:>16} {:>16}",
            "Oscillation", "Method", "rho", "Accuracy", "Translation", "Rotation"
        );
        let fmt = |i: &Interval| format!("{:.3}±{:.3}", i.mean, i.half_width);
        let mut rhos = BTreeMap::new();
        for m in self.selected.keys() {
            rhos.insert(*m, self.table_rho(rows, *m)?);
        }
        for cond in Condition::TABLE_ORDER {
            for (m, choice) in &rhos {
                let Some((rho, met)) = choice else { continue };
                let Some(series) = self.cells.get(&(*m, cond)) else {
                    continue;
                };
                let Some((_, s)) = series.iter().find(|(r, _)| rho_key(*r) == rho_key(*rho)) else {
                    continue;
                };
                let _ = writeln!(
                    out,
                    "{:<22} {:<10} {:>5}{} {:>16} {:>16} {:>16}",
                    cond.label(),
                    m.name(),
                    rho,
                    if *met { " " } else { "*" },
                    fmt(&s.accuracy),
                    fmt(&s.translation),
                    fmt(&s.rotation)
                );
            }
        }
        if rhos.values().any(|c| matches!(c, Some((_, false)))) {
            let _ = writeln!(out, "\n* requirement not met; best-scoring rho shown");
        }
        Ok(out)
    }
}

fn file_stem(m: Method, what: &str) -> String {
    format!("{}_{what}.svg", m.name())
}

fn series_color(c: Condition) -> RGBColor {
    use super::AmplitudeLevel as L;
    let shade = |l: L| match l {
        L::None | L::Low => 0.45,
        L::Medium => 0.7,
        L::High => 1.0,
    };
    match c {
        Condition::Static => RGBColor(90, 90, 90),
        Condition::Position(l) => RGBColor(0, (60.0 + 60.0 * (1.0 - shade(l))) as u8, (255.0 * shade(l)) as u8),
        Condition::Orientation(l) => RGBColor((255.0 * shade(l)) as u8, (60.0 + 60.0 * (1.0 - shade(l))) as u8, 0),
    }
}

type Metric = fn(&ConditionSummary) -> Interval;

fn plot_metric(
    report: &Report,
    method: Method,
    path: &Path,
    title: &str,
    metric: Metric,
    threshold: Option<f64>,
) -> Result<()> {
    let series: Vec<(Condition, &Vec<(f64, ConditionSummary)>)> = Condition::TABLE_ORDER
        .iter()
        .filter_map(|c| report.cells.get(&(method, *c)).map(|s| (*c, s)))
        .collect();
    let pts = series.iter().flat_map(|(_, s)| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (rho, s) in pts {
        let i = metric(s);
        x0 = x0.min(*rho);
        x1 = x1.max(*rho);
        y0 = y0.min(i.mean - i.half_width);
        y1 = y1.max(i.mean + i.half_width);
    }
    if let Some(t) = threshold {
        y0 = y0.min(t);
        y1 = y1.max(t);
    }
    if !x0.is_finite() {
        return Ok(());
    }
    let pad = |a: f64, b: f64| if b - a < 1e-9 { 0.5 } else { 0.05 * (b - a) };
    let (px, py) = (pad(x0, x1), pad(y0, y1));

    let draw_err = |e: Box<dyn std::error::Error>| Error::invalid(format!("plot {}: {e}", path.display()));
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw_err(e.into()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{method}: {title}"), ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d((x0 - px)..(x1 + px), (y0 - py)..(y1 + py))
        .map_err(|e| draw_err(e.into()))?;
    chart
        .configure_mesh()
        .x_desc("control cost rho")
        .y_desc(title)
        .draw()
        .map_err(|e| draw_err(e.into()))?;
    for (cond, s) in &series {
        let color = series_color(*cond);
        chart
            .draw_series(LineSeries::new(
                s.iter().map(|(r, v)| (*r, metric(v).mean)),
                color.stroke_width(2),
            ))
            .map_err(|e| draw_err(e.into()))?
            .label(cond.label())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(s.iter().map(|(r, v)| {
                let i = metric(v);
                PathElement::new(vec![(*r, i.mean - i.half_width), (*r, i.mean + i.half_width)], color)
            }))
            .map_err(|e| draw_err(e.into()))?;
    }
    if let Some(t) = threshold {
        chart
            .draw_series(DashedLineSeries::new(
                vec![(x0 - px, t), (x1 + px, t)],
                6,
                4,
                BLACK.stroke_width(1),
            ))
            .map_err(|e| draw_err(e.into()))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| draw_err(e.into()))?;
    root.present().map_err(|e| draw_err(e.into()))?;
    Ok(())
}

/// Writes accuracy and translation/rotation distance plots for every method.
pub fn write_plots(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let methods: Vec<Method> = {
        let mut m: Vec<Method> = report.cells.keys().map(|(m, _)| *m).collect();
        m.dedup();
        m
    };
    let plots: [(&str, &str, Metric, Option<f64>); 3] = [
        (
            "accuracy",
            "final approach accuracy",
            |s| s.accuracy,
            Some(REQUIRED_ACCURACY),
        ),
        ("translation", "translation distance [m]", |s| s.translation, None),
        ("rotation", "rotation distance [rad]", |s| s.rotation, None),
    ];
    for m in methods {
        for (stem, title, metric, threshold) in plots {
            let path = out_dir.join(file_stem(m, stem));
            plot_metric(report, m, &path, title, metric, threshold)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Summary table plus plots in `out_dir`; returns the table text.
pub fn report(rows: &[ResultRow], out_dir: &Path) -> Result<String> {
    fs::create_dir_all(out_dir)?;
    let rep = summarize(rows)?;
    let table = rep.table(rows)?;
    fs::write(out_dir.join("summary.txt"), &table)?;
    write_plots(&rep, out_dir)?;
    Ok(table)
}
