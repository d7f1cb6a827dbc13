//! Dense matrix files: headerless CSV and Matrix Market.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("unknown matrix format '{0}' (expected csv or mm)")]
    UnknownFormat(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> MatrixIoError {
    MatrixIoError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    MatrixMarket,
}

impl FromStr for MatrixFormat {
    type Err = MatrixIoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "mm" | "mtx" | "matrixmarket" => Ok(Self::MatrixMarket),
            other => Err(MatrixIoError::UnknownFormat(other.to_string())),
        }
    }
}

impl MatrixFormat {
    /// `.mtx` and `.mm` are Matrix Market, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") || ext.eq_ignore_ascii_case("mm") => {
                Self::MatrixMarket
            }
            _ => Self::Csv,
        }
    }
}

/// A square matrix read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl MatrixData {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(a) => a.nrows(),
            Self::Complex(a) => a.nrows(),
        }
    }

    pub fn into_complex(self) -> DMatrix<Complex64> {
        match self {
            Self::Real(a) => crate::scalar::embed_complex(&a),
            Self::Complex(a) => a,
        }
    }

    fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<Complex64>,
        complex: bool,
    ) -> Result<Self, MatrixIoError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixIoError::Empty);
        }
        if rows != cols {
            return Err(MatrixIoError::NotSquare { rows, cols });
        }
        let m = DMatrix::from_row_slice(rows, cols, &entries);
        if complex {
            Ok(Self::Complex(m))
        } else {
            Ok(Self::Real(m.map(|z| z.re)))
        }
    }
}

fn parse_entry(text: &str, line: usize) -> Result<Complex64, MatrixIoError> {
    let text = text.trim();
    if let Ok(x) = text.parse::<f64>() {
        return Ok(Complex64::new(x, 0.0));
    }
    Complex64::from_str(text)
        .map_err(|_| parse_err(line, format!("cannot parse '{text}' as a number")))
}

/// Rows on lines, comma separated. Entries are real numbers or complex
/// numbers written like `1.5-2i`; lines starting with `#` are skipped.
pub fn read_csv<R: io::Read>(reader: R) -> Result<MatrixData, MatrixIoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut entries = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    let mut complex = false;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(
                    line,
                    format!("expected {c} entries, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter() {
            let z = parse_entry(field, line)?;
            complex |= z.im != 0.0 || field.contains(['i', 'j']);
            entries.push(z);
        }
        rows += 1;
    }
    MatrixData::from_entries(rows, cols.unwrap_or(0), entries, complex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Matrix Market `array` or `coordinate` files with `real`, `integer`,
/// `complex` or `pattern` fields.
pub fn read_matrix_market(text: &str) -> Result<MatrixData, MatrixIoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or(MatrixIoError::Empty)?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let coordinate = match tokens[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    let field = tokens[3].as_str();
    if !matches!(field, "real" | "integer" | "complex" | "pattern") {
        return Err(parse_err(1, format!("unsupported field '{field}'")));
    }
    if field == "pattern" && !coordinate {
        return Err(parse_err(1, "pattern field requires coordinate format"));
    }
    let complex = field == "complex";
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = data
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, "bad size line")))
        .collect::<Result<_, _>>()?;
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(size_line, "bad size line"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(MatrixIoError::Empty);
    }
    if rows != cols {
        return Err(MatrixIoError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut m = DMatrix::<Complex64>::zeros(n, n);

    let value = |tok: &[&str], line: usize| -> Result<Complex64, MatrixIoError> {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(line, format!("cannot parse '{s}' as a number")))
        };
        match (field, tok) {
            ("pattern", []) => Ok(Complex64::new(1.0, 0.0)),
            ("complex", [re, im]) => Ok(Complex64::new(num(re)?, num(im)?)),
            ("real" | "integer", [x]) => Ok(Complex64::new(num(x)?, 0.0)),
            _ => Err(parse_err(line, "wrong number of values for the field type")),
        }
    };
    let mut set = |i: usize, j: usize, z: Complex64| {
        m[(i, j)] = z;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = z,
                Symmetry::SkewSymmetric => m[(j, i)] = -z,
                Symmetry::Hermitian => m[(j, i)] = z.conj(),
            }
        }
    };

    if coordinate {
        let nnz = dims[2];
        let mut count = 0;
        for (line, l) in data {
            let tok: Vec<&str> = l.split_whitespace().collect();
            if tok.len() < 2 {
                return Err(parse_err(line, "expected 'row col [value]'"));
            }
            let idx = |s: &str| -> Result<usize, MatrixIoError> {
                let k: usize = s.parse().map_err(|_| parse_err(line, "bad index"))?;
                if k == 0 || k > n {
                    return Err(parse_err(line, format!("index {k} out of range 1..={n}")));
                }
                Ok(k - 1)
            };
            let (i, j) = (idx(tok[0])?, idx(tok[1])?);
            set(i, j, value(&tok[2..], line)?);
            count += 1;
        }
        if count != nnz {
            return Err(parse_err(
                size_line,
                format!("declared {nnz} entries, found {count}"),
            ));
        }
    } else {
        // Column-major; symmetric variants store the lower triangle only.
        let mut positions = Vec::new();
        for j in 0..n {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::Symmetric | Symmetry::Hermitian => j,
                Symmetry::SkewSymmetric => j + 1,
            };
            positions.extend((start..n).map(|i| (i, j)));
        }
        let mut it = positions.into_iter();
        for (line, l) in data {
            let tok: Vec<&str> = l.split_whitespace().collect();
            let (i, j) = it
                .next()
                .ok_or_else(|| parse_err(line, "more values than the declared size"))?;
            set(i, j, value(&tok, line)?);
        }
        if it.next().is_some() {
            return Err(parse_err(size_line, "fewer values than the declared size"));
        }
    }
    if complex {
        Ok(MatrixData::Complex(m))
    } else {
        Ok(MatrixData::Real(m.map(|z| z.re)))
    }
}

pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<MatrixData, MatrixIoError> {
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::Csv => read_csv(fs::File::open(path)?),
        MatrixFormat::MatrixMarket => read_matrix_market(&fs::read_to_string(path)?),
    }
}

pub fn write_csv<W: Write>(out: W, m: &MatrixData) -> Result<(), MatrixIoError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    match m {
        MatrixData::Real(a) => {
            for row in a.row_iter() {
                w.write_record(row.iter().map(|x| x.to_string()))?;
            }
        }
        MatrixData::Complex(a) => {
            for row in a.row_iter() {
                w.write_record(row.iter().map(|z| z.to_string()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Dense `array general` Matrix Market output.
pub fn write_matrix_market<W: Write>(mut out: W, m: &MatrixData) -> Result<(), MatrixIoError> {
    match m {
        MatrixData::Real(a) => {
            writeln!(out, "%%MatrixMarket matrix array real general")?;
            writeln!(out, "{} {}", a.nrows(), a.ncols())?;
            for x in a.iter() {
                writeln!(out, "{x:e}")?;
            }
        }
        MatrixData::Complex(a) => {
            writeln!(out, "%%MatrixMarket matrix array complex general")?;
            writeln!(out, "{} {}", a.nrows(), a.ncols())?;
            for z in a.iter() {
                writeln!(out, "{:e} {:e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

pub fn write_matrix<W: Write>(
    out: W,
    m: &MatrixData,
    format: MatrixFormat,
) -> Result<(), MatrixIoError> {
    match format {
        MatrixFormat::Csv => write_csv(out, m),
        MatrixFormat::MatrixMarket => write_matrix_market(out, m),
    }
}
