//! Deterministic CSV with a `#` header block.

use std::fmt::Write as _;

use crate::config::RunConfig;

/// Shortest decimal that parses back to the same `f64`; exponent form
/// outside [10⁻⁴, 10¹⁶).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

/// Column names, rows and `key = value` metadata of one result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    /// Single-row table from named values.
    pub fn record(fields: Vec<(&str, Cell)>) -> Self {
        let mut t = Self::new(&fields.iter().map(|f| f.0).collect::<Vec<_>>());
        t.rows.push(fields.into_iter().map(|f| f.1).collect());
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Renders `table` with the reproducibility header.
pub fn render(command: &str, cfg: &RunConfig, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qfridge {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command: {command}");
    let t = &cfg.tolerances;
    let _ = writeln!(
        out,
        "# tolerances: quadrature={} search={} validate_heat={} validate_occupation={} validate_identity={}",
        fmt_f64(t.quadrature),
        fmt_f64(t.search),
        fmt_f64(t.validate_heat),
        fmt_f64(t.validate_occupation),
        fmt_f64(t.validate_identity)
    );
    let _ = writeln!(out, "# config:");
    for line in cfg.canonical().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "#   {line}");
        }
    }
    for (k, v) in &table.meta {
        let _ = writeln!(out, "# {k} = {}", v.render());
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            2.5e-5,
            1.0 / 3.0,
            1e300,
            -7.25e-12,
            123456.789,
            1e16,
            9.999e-5,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(2.5e-5), "2.5e-5");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn header_carries_config_and_meta() {
        let cfg = crate::presets::preset("sideband").unwrap();
        let mut t = Table::record(vec![("a", 1.0.into()), ("b", "x".into())]);
        t.meta("residual", 1e-14);
        let text = render("limits", &cfg, &t);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# qfridge "));
        assert!(text.contains("#   [system]"));
        assert!(text.contains("# residual = 1e-14"));
        assert_eq!(lines[lines.len() - 2], "a,b");
        assert_eq!(lines[lines.len() - 1], "1,x");
        let body: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("#   "))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(RunConfig::parse(&body).is_ok());
    }
}
