//! Text formats: edge-list graphs, family configs, vertex-value files and
//! fixed-precision CSV emission.
//!
//! Edge lists hold one edge per line (`u v c_uv`) plus optional weight lines
//! (`w u omega_u`); vertices without a weight line get ω = 1. Family configs
//! are `key = value` lines with keys `family`, `alpha`, `beta`, `epsilon`,
//! `start`, `omega_table`, `conductance_table` and `file`. In every format `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{FamilyKind, FamilySpec, FiniteGraph, VertexId};
use crate::operator::FiniteSupportFn;

/// Either kind of graph description accepted by [`parse_config`].
#[derive(Clone, Debug)]
pub enum GraphConfig {
    Family(FamilySpec),
    Finite(FiniteGraph),
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

fn parse_vertex(tok: &Token<'_>, line: usize) -> Result<VertexId> {
    tok.text
        .parse::<u64>()
        .map(VertexId)
        .map_err(|_| Error::parse(line, tok.column, format!("expected a vertex id, found `{}`", tok.text)))
}

fn parse_real(text: &str, line: usize, column: usize) -> Result<f64> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            line,
            column,
            format!("expected a real number, found `{}`", text.trim()),
        )),
    }
}

/// Parses an edge-list graph.
pub fn parse_edge_list(text: &str) -> Result<FiniteGraph> {
    let mut builder = FiniteGraph::builder();
    let mut weights = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(strip_comment(raw));
        match toks.as_slice() {
            [] => {}
            [w, u, value] if w.text == "w" => {
                let u = parse_vertex(u, line)?;
                let omega = parse_real(value.text, line, value.column)?;
                if omega <= 0.0 {
                    return Err(Error::parse(line, value.column, "vertex weight must be positive"));
                }
                weights.push((line, u, omega));
            }
            [u, v, c] => {
                let (x, y) = (parse_vertex(u, line)?, parse_vertex(v, line)?);
                if x == y {
                    return Err(Error::parse(line, u.column, format!("self-loop at {x}")));
                }
                let c_val = parse_real(c.text, line, c.column)?;
                if c_val <= 0.0 {
                    return Err(Error::parse(line, c.column, "conductance must be positive"));
                }
                builder = builder.edge(x, y, c_val);
            }
            [first, ..] => {
                return Err(Error::parse(
                    line,
                    first.column,
                    "expected `u v c` or `w u omega`",
                ))
            }
        }
    }
    for (line, u, omega) in weights {
        if !builder.has_vertex(u) {
            return Err(Error::parse(line, 3, format!("weight for unknown vertex {u}")));
        }
        builder = builder.omega(u, omega);
    }
    builder.build()
}

/// Parses a `key = value` family config.
pub fn parse_family_config(text: &str) -> Result<FamilySpec> {
    let mut entries: Vec<(usize, &str, &str, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let Some(eq) = body.find('=') else {
            let col = body.len() - body.trim_start().len() + 1;
            return Err(Error::parse(line, col, "expected `key = value`"));
        };
        let key = body[..eq].trim();
        let value = &body[eq + 1..];
        let value_col = eq + 2 + (value.len() - value.trim_start().len());
        entries.push((line, key, value.trim(), value_col));
    }

    let kind_entry = entries
        .iter()
        .find(|e| e.1 == "family")
        .ok_or_else(|| Error::parse(1, 1, "missing `family` key"))?;
    let kind: FamilyKind = kind_entry
        .2
        .parse()
        .map_err(|m: String| Error::parse(kind_entry.0, kind_entry.3, m))?;
    let mut spec = FamilySpec::new(kind);

    for &(line, key, value, col) in &entries {
        match key {
            "family" => {}
            "alpha" => spec.alpha = parse_real(value, line, col)?,
            "beta" => spec.beta = parse_real(value, line, col)?,
            "epsilon" => spec.epsilon = parse_real(value, line, col)?,
            "start" => {
                let s = parse_real(value, line, col)?;
                if s < 0.0 || s.fract() != 0.0 {
                    return Err(Error::parse(line, col, "start must be a non-negative integer"));
                }
                spec.start = s as u64;
            }
            "omega_table" | "conductance_table" => {
                let mut table = Vec::new();
                let mut offset = 0;
                for part in value.split(',') {
                    table.push(parse_real(part, line, col + offset)?);
                    offset += part.len() + 1;
                }
                if key == "omega_table" {
                    spec.omega_table = table;
                } else {
                    spec.conductance_table = table;
                }
            }
            "file" => spec.file = Some(value.into()),
            other => {
                return Err(Error::parse(line, 1, format!("unknown key `{other}`")));
            }
        }
    }
    Ok(spec)
}

/// Parses either a family config or an edge list; configs are recognised by `=`.
pub fn parse_config(text: &str) -> Result<GraphConfig> {
    let is_config = text.lines().any(|l| strip_comment(l).contains('='));
    if is_config {
        parse_family_config(text).map(GraphConfig::Family)
    } else {
        parse_edge_list(text).map(GraphConfig::Finite)
    }
}

/// Parses `vertex value` lines.
pub fn parse_vertex_values(text: &str) -> Result<FiniteSupportFn> {
    let mut f = FiniteSupportFn::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(strip_comment(raw));
        match toks.as_slice() {
            [] => {}
            [u, value] => {
                let x = parse_vertex(u, line)?;
                f.set(x, parse_real(value.text, line, value.column)?);
            }
            [first, ..] => {
                return Err(Error::parse(line, first.column, "expected `vertex value`"));
            }
        }
    }
    Ok(f)
}

pub fn write_vertex_values(f: &FiniteSupportFn) -> String {
    let mut out = String::new();
    for (x, v) in f.iter() {
        let _ = writeln!(out, "{x} {}", fmt_real(v));
    }
    out
}

/// 17 significant digits, so CSV output is byte-stable and round-trips.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Minimal CSV table with a header row.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// RFC 4180 text; fields holding commas or quotes are quoted.
    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for row in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields")
    }
}

/// Reads boundary data (`vertex value` lines) into a map.
pub fn parse_boundary_data(text: &str) -> Result<BTreeMap<VertexId, f64>> {
    Ok(parse_vertex_values(text)?.iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn edge_list_with_weights() {
        let g = parse_edge_list("1 2 4.0\nw 1 1.0\nw 2 1.0\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.conductance(VertexId(2), VertexId(1)).unwrap(), 4.0);
    }

    #[test]
    fn edge_list_two_edges_three_vertices() {
        let g = parse_edge_list("# path\n1 2 1.5\n2 3 2.5 # trailing comment\n\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.omega(VertexId(3)).unwrap(), 1.0);
    }

    #[test]
    fn edge_list_errors_carry_locations() {
        match parse_edge_list("1 2 1.0\nw 9 2.0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_edge_list("1 2 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("{other:?}"),
        }
        assert!(parse_edge_list("1 2 -1\n").is_err());
        assert!(parse_edge_list("3 3 1\n").is_err());
        assert!(parse_edge_list("1 2\n").is_err());
    }

    #[test]
    fn family_config() {
        let spec = parse_family_config("family = half-line-power\nalpha = 1\nbeta = 0\nstart = 1").unwrap();
        assert_eq!(spec, FamilySpec::power(1.0, 0.0));

        match parse_family_config("family = half-line-power\nalpha = -\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 9)),
            other => panic!("{other:?}"),
        }
        assert!(parse_family_config("family = spiral\n").is_err());
        assert!(parse_family_config("family = log\ngamma = 2\n").is_err());
        assert!(parse_family_config("alpha = 2\n").is_err());

        let table = parse_family_config("family = half-line-table\nomega_table = 1, 2\nconductance_table = 3\n").unwrap();
        assert_eq!(table.omega_table, vec![1.0, 2.0]);
        assert_eq!(table.conductance_table, vec![3.0]);
    }

    #[test]
    fn config_dispatch() {
        assert!(matches!(
            parse_config("family = log\n").unwrap(),
            GraphConfig::Family(_)
        ));
        assert!(matches!(
            parse_config("1 2 4.0\n").unwrap(),
            GraphConfig::Finite(_)
        ));
    }

    #[test]
    fn vertex_values_round_trip() {
        let f = parse_vertex_values("3 0.1\n1 -2.5e3\n").unwrap();
        let back = parse_vertex_values(&write_vertex_values(&f)).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn real_formatting_is_fixed() {
        assert_eq!(fmt_real(5.0), "5.0000000000000000e0");
        assert_eq!(fmt_real(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_real(f64::INFINITY), "inf");
    }
}
