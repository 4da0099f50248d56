//! Report emission: the run manifest, 17-significant-digit JSON, and the
//! LaTeX table renderings used for visual diffing.

use chrono::{SecondsFormat, Utc};
use inar::{DispersionTable, McResult, Method};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use std::io::{self, Write};

/// Provenance block embedded in every report. The timestamp is the only
/// field that varies between reruns of an identical invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Echo of every resolved parameter of the invocation (after defaults
    /// and environment overrides were applied).
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub artifact_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, master_seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            master_seed,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }
}

/// Pretty JSON whose floats carry 17 significant digits (`{:.16e}`), enough
/// to reconstruct every f64 bit-for-bit. Non-finite floats become `null`
/// before this formatter is consulted.
struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_value(writer)
    }

    // Keeps the inner formatter's "object has members" state in sync even
    // when the value itself was written by our float override, so closing
    // braces land on their own line.
    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Renders any report as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(
        &mut buf,
        SciFormatter {
            inner: PrettyFormatter::new(),
        },
    );
    value
        .serialize(&mut ser)
        .expect("in-memory report serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Dispersion-table grid as a LaTeX tabular: one row per phi, one column per
/// alpha, four decimals per cell.
pub fn dispersion_table_latex(table: &DispersionTable) -> String {
    let mut out = String::new();
    let cols = "c".repeat(table.alphas.len());
    out.push_str(&format!("\\begin{{tabular}}{{l{cols}}}\n\\hline\n"));
    out.push_str("$\\phi$");
    for alpha in &table.alphas {
        out.push_str(&format!(" & $\\alpha = {alpha}$"));
    }
    out.push_str(" \\\\\n\\hline\n");
    for (i, phi) in table.phis.iter().enumerate() {
        out.push_str(&format!("{phi}"));
        for value in &table.values[i] {
            out.push_str(&format!(" & {value:.4}"));
        }
        out.push_str(" \\\\\n");
    }
    out.push_str("\\hline\n\\end{tabular}\n");
    out
}

fn method_label(method: Method) -> &'static str {
    match method {
        Method::Yw => "YW",
        Method::Cls => "CLS",
        Method::Cml => "CML",
    }
}

/// Monte Carlo study as a LaTeX tabular in bias-(MSE) layout: one row per
/// (sample size, parameter), one column pair per method.
pub fn mc_result_latex(result: &McResult) -> String {
    let methods = &result.config.methods;
    let mut out = String::new();
    let cols = "c".repeat(methods.len());
    out.push_str(&format!("\\begin{{tabular}}{{ll{cols}}}\n\\hline\n"));
    out.push_str("$T$ & parameter");
    for &m in methods {
        out.push_str(&format!(" & {}", method_label(m)));
    }
    out.push_str(" \\\\\n\\hline\n");
    for &t in &result.config.sample_sizes {
        let params: Vec<&str> = result
            .cells
            .iter()
            .filter(|c| c.sample_size == t && c.method == methods[0])
            .map(|c| c.parameter.as_str())
            .collect();
        for parameter in params {
            out.push_str(&format!("{t} & $\\{parameter}$"));
            for &m in methods {
                let cell = result
                    .cells
                    .iter()
                    .find(|c| c.sample_size == t && c.method == m && c.parameter == parameter)
                    .expect("harness emits every (T, method, parameter) cell");
                out.push_str(&format!(" & {:.4} ({:.4})", cell.bias, cell.mse));
            }
            out.push_str(" \\\\\n");
        }
    }
    out.push_str("\\hline\n\\end{tabular}\n");
    out
}
