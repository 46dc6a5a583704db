//! Machine-readable run reports.
//!
//! Every subcommand produces one [`RunReport`] on stdout. Reports are
//! deterministic: map keys are sorted (`serde_json`'s default `BTreeMap`
//! backing), struct fields serialize in declaration order, and every float
//! is printed with 17 significant digits, which round-trips `f64` exactly.
//! Running the same command with the same arguments twice yields
//! byte-identical output.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use std::io::{self, Write};

/// A single named check with its measured value and the tolerance it was
/// held to. `pass` is redundant with the other fields but spares consumers
/// from re-deriving the comparison direction.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance` (error-style quantities).
    pub fn upper(name: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_owned(),
            pass: measured <= tolerance,
            measured,
            tolerance,
        }
    }

    /// Passes when `measured >= floor` (slack-style quantities).
    pub fn lower(name: &str, measured: f64, floor: f64) -> Self {
        Check {
            name: name.to_owned(),
            pass: measured >= floor,
            measured,
            tolerance: floor,
        }
    }

    /// Passes when a failure count is exactly zero.
    pub fn zero_count(name: &str, count: usize) -> Self {
        Check {
            name: name.to_owned(),
            pass: count == 0,
            measured: count as f64,
            tolerance: 0.0,
        }
    }

    /// Passes when a boolean condition holds; `measured` records it as 0/1.
    pub fn flag(name: &str, ok: bool) -> Self {
        Check {
            name: name.to_owned(),
            pass: ok,
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
        }
    }
}

/// The report emitted by every subcommand.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    /// Base seed for randomized commands; omitted for deterministic ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_owned(),
            parameters: Map::new(),
            results: Map::new(),
            checks: Vec::new(),
            seed: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_owned(), value.into());
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_owned(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Pretty formatter that prints every `f64` as `{:.16e}`: 17 significant
/// digits in scientific notation, enough to reconstruct the exact bits.
struct SigFigFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl SigFigFormatter<'_> {
    fn new() -> Self {
        SigFigFormatter {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for SigFigFormatter<'_> {
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

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize any value with the report formatting rules, trailing newline
/// included.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter::new());
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization does not fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}
