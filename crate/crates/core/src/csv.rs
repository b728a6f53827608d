//! Minimal CSV emission with round-trip number formatting.

use std::io::{self, Write};

/// Shortest decimal string that parses back to the same `f64`.
///
/// Plain notation in `[1e-4, 1e15)`, scientific otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || x.is_nan() || x.is_infinite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x.is_infinite() {
            if x > 0.0 { "inf".into() } else { "-inf".into() }
        } else if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A cell of a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(if x { "true" } else { "false" }.into())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub fn write_row<W: Write>(out: &mut W, cells: &[Cell]) -> io::Result<()> {
    let line: Vec<String> = cells.iter().map(Cell::render).collect();
    writeln!(out, "{}", line.join(","))
}

pub fn write_header<W: Write>(out: &mut W, names: &[&str]) -> io::Result<()> {
    writeln!(out, "{}", names.join(","))
}
