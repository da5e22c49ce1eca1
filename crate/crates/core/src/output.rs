//! CSV export of reports, time series, event logs, traces and heatmaps.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::engine::{RouteEvent, TracePoint};
use crate::error::Result;
use crate::metrics::{MetricsReport, SeriesRow};
use crate::pheromone::PheromoneField;
use crate::topology::MaskEvent;

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Like `write_rows`, but writes the header even when there are no rows.
fn write_rows_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    write_rows(path, reports)
}

/// Serializes reports into an in-memory CSV document.
pub fn metrics_csv_string(reports: &[MetricsReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsReport>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_series_csv(path: &Path, rows: &[SeriesRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Serialize)]
struct EventRow<'a> {
    scenario: &'a str,
    scheme: &'a str,
    seed: u64,
    t: f64,
    flow: usize,
    event: &'static str,
    route: String,
    hc: Option<u32>,
    il: Option<u32>,
    rlt_s: Option<f64>,
    en_r: Option<f64>,
}

/// Routing event log; the route is written as `-`-separated node ids.
pub fn write_events_csv(path: &Path, scenario: &str, scheme: &str, seed: u64, events: &[RouteEvent]) -> Result<()> {
    let rows: Vec<EventRow> = events
        .iter()
        .map(|e| EventRow {
            scenario,
            scheme,
            seed,
            t: e.t,
            flow: e.flow,
            event: e.kind.as_str(),
            route: e.nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("-"),
            hc: e.metrics.map(|m| m.hc),
            il: e.metrics.map(|m| m.il),
            rlt_s: e.metrics.map(|m| m.rlt_s),
            en_r: e.metrics.map(|m| m.en_r),
        })
        .collect();
    write_rows_with_header(path, &["scenario", "scheme", "seed", "t", "flow", "event", "route", "hc", "il", "rlt_s", "en_r"], &rows)
}

#[derive(Serialize)]
struct MaskRow {
    t: f64,
    owner: u32,
    center_col: u32,
    center_row: u32,
    axis_x: f64,
    axis_y: f64,
    kind: &'static str,
    heading_fallback: bool,
}

pub fn write_mask_csv(path: &Path, events: &[MaskEvent]) -> Result<()> {
    let rows: Vec<MaskRow> = events
        .iter()
        .map(|e| MaskRow {
            t: e.t,
            owner: e.owner,
            center_col: e.center.col,
            center_row: e.center.row,
            axis_x: e.axis.x,
            axis_y: e.axis.y,
            kind: e.kind.as_str(),
            heading_fallback: e.heading_fallback,
        })
        .collect();
    write_rows_with_header(
        path,
        &["t", "owner", "center_col", "center_row", "axis_x", "axis_y", "kind", "heading_fallback"],
        &rows,
    )
}

#[derive(Serialize)]
struct TraceRow {
    node: u32,
    t: f64,
    x: f64,
    y: f64,
    role: &'static str,
}

pub fn write_trace_csv(path: &Path, points: &[TracePoint]) -> Result<()> {
    let rows: Vec<TraceRow> =
        points.iter().map(|p| TraceRow { node: p.id, t: p.t, x: p.pos.x, y: p.pos.y, role: p.role.as_str() }).collect();
    write_rows(path, &rows)
}

/// Field snapshot: `col,row,value,effective_value`.
pub fn write_heatmap_csv(path: &Path, field: &PheromoneField) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "col,row,value,effective_value")?;
    let map = *field.map();
    for i in 0..map.n_cells() {
        let c = map.from_linear(i);
        writeln!(f, "{},{},{},{}", c.col, c.row, field.values()[i], field.effective_value(c)?)?;
    }
    Ok(())
}
