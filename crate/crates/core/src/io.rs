//! Plain-text formats.
//!
//! Edge list: a header `n <count>`, then one edge per line `i j w`
//! separated by whitespace, vertices 0-based. `#` starts a comment.
//!
//! Dense matrix: a header `rows cols`, then `rows` lines of `cols` numbers.
//!
//! Weights: `index<TAB>weight` per line.
//!
//! Numbers are written with 17 significant digits, so a write followed by
//! a read reproduces every value exactly.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::bss::SparseWeights;
use crate::embed::JohnDecomposition;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::Matrix;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn content_lines<R: BufRead>(reader: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((k + 1, body.to_string()));
        }
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {field:?}")))
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<WeightedGraph> {
    let lines = content_lines(reader)?;
    let Some((hline, header)) = lines.first() else {
        return Err(parse_err(1, "missing header `n <count>`"));
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 || fields[0] != "n" {
        return Err(parse_err(
            *hline,
            format!("expected header `n <count>`, found {header:?}"),
        ));
    }
    let n: usize = parse_field(*hline, fields[1], "vertex count")?;

    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (line, body) in &lines[1..] {
        let line = *line;
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line, format!("expected `i j w`, found {body:?}")));
        }
        let i: usize = parse_field(line, f[0], "vertex")?;
        let j: usize = parse_field(line, f[1], "vertex")?;
        let w: f64 = parse_field(line, f[2], "weight")?;
        if i >= n || j >= n {
            return Err(parse_err(line, format!("vertex out of range 0..{n}")));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(parse_err(line, format!("weight {w} must be finite and nonnegative")));
        }
        if i == j {
            warn!("line {line}: ignoring self-loop at vertex {i}");
            continue;
        }
        let (a, b) = (i.min(j), i.max(j));
        if !seen.insert((a, b)) {
            return Err(parse_err(line, format!("duplicate edge ({a}, {b})")));
        }
        if w == 0.0 {
            continue;
        }
        edges.push((a, b, w));
    }
    WeightedGraph::new(n, edges)
}

pub fn write_edge_list<W: Write>(g: &WeightedGraph, mut w: W) -> Result<()> {
    writeln!(w, "n {}", g.vertex_count())?;
    for &(i, j, x) in g.edges() {
        writeln!(w, "{i}\t{j}\t{x:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(reader: R) -> Result<Matrix> {
    let lines = content_lines(reader)?;
    let Some((hline, header)) = lines.first() else {
        return Err(parse_err(1, "missing header `rows cols`"));
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(
            *hline,
            format!("expected header `rows cols`, found {header:?}"),
        ));
    }
    let rows: usize = parse_field(*hline, fields[0], "row count")?;
    let cols: usize = parse_field(*hline, fields[1], "column count")?;
    if cols == 0 && lines.len() == 1 {
        return Ok(Matrix::zeros(rows, 0));
    }
    if lines.len() - 1 != rows {
        let at = lines.last().map_or(*hline, |l| l.0);
        return Err(parse_err(
            at,
            format!("expected {rows} rows, found {}", lines.len() - 1),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (line, body) in &lines[1..] {
        let before = data.len();
        for f in body.split_whitespace() {
            let v: f64 = parse_field(*line, f, "entry")?;
            if !v.is_finite() {
                return Err(parse_err(*line, format!("entry {f} is not finite")));
            }
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(parse_err(
                *line,
                format!("expected {cols} entries, found {}", data.len() - before),
            ));
        }
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn write_matrix<W: Write>(m: &Matrix, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weights<W: Write>(s: &SparseWeights, mut w: W) -> Result<()> {
    for (i, x) in s.iter() {
        writeln!(w, "{i}\t{x:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// A dense matrix whose rows are `c_i x_i1 ... x_in`.
pub fn read_john<R: BufRead>(reader: R) -> Result<JohnDecomposition> {
    let m = read_matrix(reader)?;
    if m.cols() < 2 {
        return Err(Error::Validation(
            "each row needs a weight and at least one coordinate".into(),
        ));
    }
    let weights = (0..m.rows()).map(|i| m[(i, 0)]).collect();
    let points = (0..m.rows()).map(|i| m.row(i)[1..].to_vec()).collect();
    JohnDecomposition::new(m.cols() - 1, points, weights)
}

pub fn write_john<W: Write>(jd: &JohnDecomposition, w: W) -> Result<()> {
    let rows: Vec<Vec<f64>> = jd
        .points()
        .iter()
        .zip(jd.weights())
        .map(|(x, &c)| std::iter::once(c).chain(x.iter().copied()).collect())
        .collect();
    write_matrix(&Matrix::from_rows(&rows)?, w)
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
