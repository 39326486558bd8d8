//! CSV tables: velocity signals, gaze traces, targets and evaluation output.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::{ErrorSummary, Evaluation};
use crate::mapping::{GazeSample, GazeTrace, TargetChoice};
use crate::saliency::{Target, TargetSet};
use crate::signal::{MovementLabel, SampledSignal, SignalSample};

pub const VELOCITY_HEADER: [&str; 3] = ["t_ms", "velocity_deg_s", "label"];
pub const GAZE_HEADER: [&str; 5] = ["t_ms", "x_px", "y_px", "velocity_deg_s", "label"];
pub const TARGETS_HEADER: [&str; 3] = ["x_px", "y_px", "weight"];
pub const SUMMARY_HEADER: [&str; 3] = ["type", "stat", "value"];
pub const POOLED_HEADER: [&str; 2] = ["type", "squared_error"];
pub const TARGET_LOG_HEADER: [&str; 7] = ["run", "label", "lookup_t_ms", "frame", "x_px", "y_px", "weight"];

/// Like C's `%g` with six significant digits.
pub fn format_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        trim(&format!("{v:.*}", (5 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn header_line(h: &[&str]) -> String {
    let mut s = h.join(",");
    s.push('\n');
    s
}

pub fn write_velocity_csv(signal: &SampledSignal) -> Vec<u8> {
    let mut out = header_line(&VELOCITY_HEADER);
    for s in &signal.samples {
        let _ = writeln!(out, "{:.3},{},{}", s.time * 1000.0, format_g6(s.velocity), s.label.code());
    }
    out.into_bytes()
}

pub fn write_gaze_csv(trace: &GazeTrace) -> Vec<u8> {
    let mut out = header_line(&GAZE_HEADER);
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{:.3},{:.3},{:.3},{},{}",
            s.time * 1000.0,
            s.x,
            s.y,
            format_g6(s.velocity),
            s.label.code()
        );
    }
    out.into_bytes()
}

pub fn write_targets_csv(targets: &TargetSet) -> Vec<u8> {
    let mut out = header_line(&TARGETS_HEADER);
    for t in &targets.points {
        let _ = writeln!(out, "{:.3},{:.3},{}", t.x, t.y, format_g6(t.weight));
    }
    out.into_bytes()
}

pub fn write_summary_csv(eval: &Evaluation) -> Vec<u8> {
    let mut out = header_line(&SUMMARY_HEADER);
    for (label, summary) in &eval.summaries {
        for (stat, value) in ErrorSummary::STATS.iter().zip(summary.values()) {
            if *stat == "count" {
                let _ = writeln!(out, "{},count,{}", label.code(), summary.count);
            } else {
                let _ = writeln!(out, "{},{stat},{value:?}", label.code());
            }
        }
    }
    out.into_bytes()
}

pub fn write_pooled_csv(eval: &Evaluation) -> Vec<u8> {
    let mut out = header_line(&POOLED_HEADER);
    for (label, values) in &eval.pooled {
        for v in values {
            let _ = writeln!(out, "{},{v:?}", label.code());
        }
    }
    out.into_bytes()
}

pub fn write_target_log(choices: &[TargetChoice]) -> Vec<u8> {
    let mut out = header_line(&TARGET_LOG_HEADER);
    for c in choices {
        let _ = writeln!(
            out,
            "{},{},{:.3},{},{:.3},{:.3},{}",
            c.run,
            c.label.code(),
            c.lookup_time * 1000.0,
            c.frame,
            c.target.x,
            c.target.y,
            format_g6(c.target.weight)
        );
    }
    out.into_bytes()
}

/// Rows of a CSV file whose header must match `header` exactly.
struct Table {
    what: &'static str,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn fail(what: &'static str, line: u64, reason: impl Into<String>) -> Error {
    Error::Format {
        what,
        position: format!("line {line}"),
        reason: reason.into(),
    }
}

fn read_table(what: &'static str, bytes: &[u8], headers: &[&[&str]]) -> Result<(usize, Table)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();
    let first = match records.next() {
        None => return Err(fail(what, 1, "empty file, header required")),
        Some(r) => r.map_err(|e| fail(what, 1, e.to_string()))?,
    };
    let found: Vec<&str> = first.iter().collect();
    let which = headers.iter().position(|h| *h == found.as_slice()).ok_or_else(|| {
        let expected: Vec<String> = headers.iter().map(|h| h.join(",")).collect();
        fail(
            what,
            1,
            format!("header `{}` does not match `{}`", found.join(","), expected.join("` or `")),
        )
    })?;
    let width = headers[which].len();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            fail(what, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(fail(what, line, format!("expected {width} fields, found {}", rec.len())));
        }
        rows.push((line, rec));
    }
    Ok((which, Table { what, rows }))
}

impl Table {
    fn number(&self, line: u64, rec: &csv::StringRecord, col: usize, name: &str) -> Result<f64> {
        let raw = &rec[col];
        let v: f64 = raw
            .parse()
            .map_err(|_| fail(self.what, line, format!("{name}: `{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(fail(self.what, line, format!("{name}: `{raw}` is not finite")));
        }
        Ok(v)
    }

    fn label(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<MovementLabel> {
        rec[col].parse().map_err(|e: String| fail(self.what, line, e))
    }
}

fn check_time(what: &'static str, line: u64, t: f64, prev: Option<f64>) -> Result<()> {
    if t < 0.0 {
        return Err(fail(what, line, "t_ms must be >= 0"));
    }
    if prev.is_some_and(|p| t <= p) {
        return Err(fail(what, line, "t_ms must increase strictly"));
    }
    Ok(())
}

fn check_velocity(what: &'static str, line: u64, v: f64) -> Result<()> {
    if v < 0.0 {
        return Err(fail(what, line, "velocity_deg_s must be >= 0"));
    }
    Ok(())
}

/// Velocity signal from either a velocity or a gaze CSV.
pub fn read_signal_csv(bytes: &[u8]) -> Result<SampledSignal> {
    let (which, table) = read_table("signal CSV", bytes, &[&VELOCITY_HEADER, &GAZE_HEADER])?;
    let (vcol, lcol) = if which == 0 { (1, 2) } else { (3, 4) };
    let mut samples = Vec::with_capacity(table.rows.len());
    let mut prev = None;
    for (line, rec) in &table.rows {
        let t = table.number(*line, rec, 0, "t_ms")?;
        check_time(table.what, *line, t, prev)?;
        prev = Some(t);
        let velocity = table.number(*line, rec, vcol, "velocity_deg_s")?;
        check_velocity(table.what, *line, velocity)?;
        samples.push(SignalSample {
            time: t / 1000.0,
            velocity,
            label: table.label(*line, rec, lcol)?,
        });
    }
    SampledSignal::new(samples)
}

/// Velocity CSV only.
pub fn read_velocity_csv(bytes: &[u8]) -> Result<SampledSignal> {
    let (_, _) = read_table("velocity CSV", bytes, &[&VELOCITY_HEADER])?;
    read_signal_csv(bytes)
}

pub fn read_gaze_csv(bytes: &[u8], width: usize, height: usize, pixels_per_degree: f64) -> Result<GazeTrace> {
    let (_, table) = read_table("gaze CSV", bytes, &[&GAZE_HEADER])?;
    let mut samples = Vec::with_capacity(table.rows.len());
    let mut prev = None;
    for (line, rec) in &table.rows {
        let t = table.number(*line, rec, 0, "t_ms")?;
        check_time(table.what, *line, t, prev)?;
        prev = Some(t);
        let x = table.number(*line, rec, 1, "x_px")?;
        let y = table.number(*line, rec, 2, "y_px")?;
        if !(x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64) {
            return Err(fail(
                table.what,
                *line,
                format!("({x}, {y}) lies outside the {width}x{height} stimulus"),
            ));
        }
        let velocity = table.number(*line, rec, 3, "velocity_deg_s")?;
        check_velocity(table.what, *line, velocity)?;
        samples.push(GazeSample {
            time: t / 1000.0,
            x,
            y,
            velocity,
            label: table.label(*line, rec, 4)?,
        });
    }
    let trace = GazeTrace { samples, width, height, pixels_per_degree };
    trace.validate()?;
    Ok(trace)
}

pub fn read_targets_csv(bytes: &[u8], width: usize, height: usize) -> Result<TargetSet> {
    let (_, table) = read_table("targets CSV", bytes, &[&TARGETS_HEADER])?;
    let mut points = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let t = Target {
            x: table.number(*line, rec, 0, "x_px")?,
            y: table.number(*line, rec, 1, "y_px")?,
            weight: table.number(*line, rec, 2, "weight")?,
        };
        if width == 0 || height == 0 || !(t.x >= 0.0 && t.y >= 0.0 && t.x <= (width - 1) as f64 && t.y <= (height - 1) as f64) {
            return Err(fail(table.what, *line, format!("target ({}, {}) lies outside the stimulus", t.x, t.y)));
        }
        if t.weight < 0.0 {
            return Err(fail(table.what, *line, "weight must be >= 0"));
        }
        points.push(t);
    }
    TargetSet::new(width, height, points)
}
