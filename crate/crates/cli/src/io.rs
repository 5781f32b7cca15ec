//! Headerless numeric CSV in and out.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{io_err, CliError, Result};

/// Read a numeric matrix. With `header`, the first row is taken as column
/// names and returned separately.
pub fn read_matrix(path: &Path, header: bool) -> Result<(DMatrix<f64>, Option<Vec<String>>)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let names = if header {
        let h = reader.headers().map_err(|e| csv_err(path, e))?;
        Some(h.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };
    let mut width = names.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            Some(_) => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("field {} is `{field}`, not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("field {} is not finite ({field})", col + 1),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    if rows == 0 {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok((DMatrix::from_row_slice(rows, cols, &values), names))
}

/// Read a single column of 0/1 responses.
pub fn read_binary(path: &Path) -> Result<Vec<bool>> {
    let (m, _) = read_matrix(path, false).map_err(|e| match e {
        CliError::Parse { path, line, message } if message.contains("not a number") => CliError::Parse {
            path,
            line,
            message: message.replace("not a number", "expected 0 or 1"),
        },
        other => other,
    })?;
    if m.ncols() != 1 {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("expected one column, found {}", m.ncols()),
        });
    }
    // rows map one-to-one onto lines because blank lines are the only skips
    let lines = data_line_numbers(path)?;
    m.column(0)
        .iter()
        .zip(lines)
        .map(|(&v, line)| {
            if v == 0.0 {
                Ok(false)
            } else if v == 1.0 {
                Ok(true)
            } else {
                Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("response is {v}, expected 0 or 1"),
                })
            }
        })
        .collect()
}

fn data_line_numbers(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i as u64 + 1)
        .collect())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let (m, _) = read_matrix(path, false)?;
    if m.ncols() != 1 {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("expected one column, found {}", m.ncols()),
        });
    }
    Ok(m.column(0).iter().copied().collect())
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Write a matrix, one row per line, shortest round-trip formatting.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(w, "{}", row.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v))
}

pub fn write_binary(path: &Path, y: &[bool]) -> Result<()> {
    let text: String = y.iter().map(|&b| if b { "1\n" } else { "0\n" }).collect();
    std::fs::write(path, text).map_err(io_err(path))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = DMatrix::from_row_slice(2, 3, &[0.1, -2.5e-300, 3.0, 1.0 / 3.0, 7e21, -0.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix(&path, &m).unwrap();
        let (back, names) = read_matrix(&path, false).unwrap();
        assert_eq!(back, m);
        assert!(names.is_none());
    }

    #[test]
    fn header_mode() {
        let (_d, path) = temp("roi_a, roi_b\n1,2\n3,4\n");
        let (m, names) = read_matrix(&path, true).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(names.unwrap(), vec!["roi_a", "roi_b"]);
    }

    #[test]
    fn ragged_row_names_its_line() {
        let (_d, path) = temp("1,2\n3,4\n5\n");
        let e = read_matrix(&path, false).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("expected 2 fields"), "{e}");
    }

    #[test]
    fn non_numeric_and_non_finite_fields() {
        let (_d, path) = temp("1,2\n3,x\n");
        let e = read_matrix(&path, false).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("field 2"), "{e}");
        let (_d, path) = temp("1,NaN\n");
        assert!(read_matrix(&path, false).unwrap_err().to_string().contains("not finite"));
        let (_d, path) = temp("1,inf\n");
        assert!(read_matrix(&path, false).is_err());
    }

    #[test]
    fn non_binary_response_names_its_line() {
        let (_d, path) = temp("0\n1\n1\n0\n0\n1\n2\n0\n");
        let e = read_binary(&path).unwrap_err().to_string();
        assert!(e.contains("line 7"), "{e}");
        let (_d, path) = temp("0\n\n1\nyes\n");
        let e = read_binary(&path).unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        let (_d, path) = temp("0\n1.0\n");
        assert_eq!(read_binary(&path).unwrap(), vec![false, true]);
    }

    #[test]
    fn empty_file_is_rejected() {
        let (_d, path) = temp("");
        assert!(read_matrix(&path, false).is_err());
    }
}
