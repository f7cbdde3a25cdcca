//! Machine-readable reports.
//!
//! JSON is canonical: every float is written with 17 significant digits so
//! that reports round-trip exactly and repeated runs compare byte for byte.
//! Complex numbers are `[re, im]` pairs. CSV is a flat projection of the
//! convergence table only.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::operator::Vector;

pub const SCHEMA: u32 = 1;

struct Precise<F>(F);

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_with<F: Formatter>(value: &impl Serialize, formatter: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(formatter));
    value.serialize(&mut ser).expect("report serializes");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Compact JSON with 17 significant digits per float.
pub fn to_json(value: &impl Serialize) -> String {
    write_with(value, CompactFormatter)
}

/// Indented JSON with 17 significant digits per float, newline-terminated.
pub fn to_json_pretty(value: &impl Serialize) -> String {
    let mut out = write_with(value, PrettyFormatter::new());
    out.push('\n');
    out
}

/// JSON paths of every non-finite number (serialized as `null`).
pub fn non_finite_paths(value: &impl Serialize) -> Vec<String> {
    fn walk(v: &serde_json::Value, path: &str, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Null => out.push(path.to_string()),
            serde_json::Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    walk(item, &format!("{path}[{i}]"), out);
                }
            }
            serde_json::Value::Object(map) => {
                for (k, item) in map {
                    walk(item, &format!("{path}.{k}"), out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    match serde_json::to_value(value) {
        Ok(v) => walk(&v, "$", &mut out),
        Err(_) => out.push("$".to_string()),
    }
    out
}

pub fn vec_of(v: &Vector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

/// The value one route produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteValue {
    pub route: String,
    pub value: Vec<Complex64>,
    pub est_error: f64,
    pub node_count: usize,
}

impl RouteValue {
    pub fn new(route: impl Into<String>, value: &Vector, est_error: f64, node_count: usize) -> Self {
        Self {
            route: route.into(),
            value: vec_of(value),
            est_error,
            node_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        }
    }

    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
        }
    }
}

/// One recorded quantity and the tolerance it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Comparison::AtMost, threshold)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Comparison::AtLeast, threshold)
    }

    fn new(name: impl Into<String>, measured: f64, comparison: Comparison, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            comparison,
            threshold,
            pass: comparison.holds(measured, threshold),
        }
    }
}

/// A rectangular numeric table, the part of a report CSV exports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A named number that is reported but not judged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// `U(t)x` and `U'(t)x` at one point of an extension trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: u32,
    pub command: String,
    pub operator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub input: Vec<Complex64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub routes: Vec<RouteValue>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTime>>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn new(
        command: &str,
        operator: &str,
        alpha: Option<Complex64>,
        tol: Option<f64>,
        input: Option<&Vector>,
    ) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            operator: operator.to_string(),
            alpha,
            tol,
            input: input.map(vec_of).unwrap_or_default(),
            routes: Vec::new(),
            checks: Vec::new(),
            metrics: Vec::new(),
            samples: Vec::new(),
            table: None,
            notes: Vec::new(),
            timings: None,
            pass: true,
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    /// The pass flag implied by the recorded checks.
    pub fn recomputed_pass(&self) -> bool {
        self.checks.iter().all(|c| c.comparison.holds(c.measured, c.threshold))
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.recomputed_pass();
        self
    }

    /// CSV of the table, or of the checks when there is no table.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(table) => {
                w.write_record(&table.columns).expect("in-memory csv");
                for row in &table.rows {
                    w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                        .expect("in-memory csv");
                }
            }
            None => {
                w.write_record(["name", "measured", "comparison", "threshold", "pass"])
                    .expect("in-memory csv");
                for c in &self.checks {
                    w.write_record([
                        c.name.clone(),
                        format!("{:.16e}", c.measured),
                        c.comparison.symbol().to_string(),
                        format!("{:.16e}", c.threshold),
                        c.pass.to_string(),
                    ])
                    .expect("in-memory csv");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writes UTF-8")
    }
}
