//! File handling: CSV dataset ingestion/emission and JSON report output,
//! with error messages that carry the file location of the problem.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use corth::dataset::Dataset;
use corth::linmodel::DesignMatrix;
use serde::Serialize;

/// A failed command, split by exit code: usage problems exit 1, data and
/// I/O problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

fn file_err(path: &Path, e: impl Display) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

/// Reads a headered CSV, pulls out `target` as the response, and keeps the
/// remaining columns as covariates in file order. All cells must parse as
/// finite numbers.
pub fn load_csv(path: &Path, target: &str) -> Result<Dataset, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| file_err(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| file_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    for (i, name) in headers.iter().enumerate() {
        if headers[..i].contains(name) {
            return Err(file_err(path, format!("duplicate column name '{name}'")));
        }
    }
    let target_idx = headers.iter().position(|h| h == target).ok_or_else(|| {
        file_err(
            path,
            format!(
                "target column '{target}' not found; available columns: {}",
                headers.join(", ")
            ),
        )
    })?;

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len() - 1];
    let mut y: Vec<f64> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| file_err(path, e))?;
        let row = row_idx + 1; // 1-based, header excluded
        if record.len() != headers.len() {
            return Err(file_err(
                path,
                format!(
                    "data row {row} has {} fields, expected {}",
                    record.len(),
                    headers.len()
                ),
            ));
        }
        let mut c = 0;
        for (col_idx, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                file_err(
                    path,
                    format!(
                        "could not parse '{cell}' at data row {row}, column '{}'",
                        headers[col_idx]
                    ),
                )
            })?;
            if !value.is_finite() {
                return Err(file_err(
                    path,
                    format!(
                        "non-finite value at data row {row}, column '{}'",
                        headers[col_idx]
                    ),
                ));
            }
            if col_idx == target_idx {
                y.push(value);
            } else {
                cols[c].push(value);
                c += 1;
            }
        }
    }
    if y.is_empty() {
        return Err(file_err(path, "no data rows"));
    }
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let n = y.len();
    let x = DesignMatrix::from_columns(n, cols).map_err(|e| file_err(path, e))?;
    Dataset::new(x, y, names, target.to_string()).map_err(|e| file_err(path, e))
}

/// Writes the dataset as CSV: covariate columns in order, response last,
/// 17-significant-digit floats so a reload reproduces the exact bits.
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<(), Failure> {
    if data.p() == 0 {
        return Err(Failure::Data(
            "refusing to write a dataset with no covariates".into(),
        ));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| file_err(path, e))?;
    let mut header: Vec<&str> = data.column_names().iter().map(String::as_str).collect();
    header.push(data.response_name());
    w.write_record(&header).map_err(|e| file_err(path, e))?;
    for i in 0..data.n() {
        let mut row: Vec<String> = (0..data.p())
            .map(|j| format!("{:.16e}", data.x().value(i, j)))
            .collect();
        row.push(format!("{:.16e}", data.y()[i]));
        w.write_record(&row).map_err(|e| file_err(path, e))?;
    }
    w.flush().map_err(|e| file_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| file_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Data(format!("could not serialize report: {e}")))?;
    write_text(path, &(text + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn message(f: Failure) -> String {
        match f {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }

    fn small_dataset() -> Dataset {
        let cols = vec![
            vec![1.0 / 3.0, -2.5e300, 1e-308, 0.1],
            vec![std::f64::consts::PI, 7.0, -0.0, 2e-17],
        ];
        Dataset::new(
            DesignMatrix::from_columns(4, cols).unwrap(),
            vec![1.5, -2.25, 1e16, 4.0],
            vec!["a".into(), "b".into()],
            "y".into(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_reproduces_exact_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let data = small_dataset();
        write_dataset_csv(&data, &path).unwrap();
        let back = load_csv(&path, "y").unwrap();
        assert_eq!(back.column_names(), data.column_names());
        for j in 0..data.p() {
            for i in 0..data.n() {
                assert_eq!(
                    back.x().value(i, j).to_bits(),
                    data.x().value(i, j).to_bits()
                );
            }
        }
        for (a, b) in back.y().iter().zip(data.y()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn missing_target_lists_available_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset_csv(&small_dataset(), &path).unwrap();
        let err = message(load_csv(&path, "outcome").unwrap_err());
        assert!(err.contains("target column 'outcome' not found"), "{err}");
        assert!(err.contains("a, b, y"), "{err}");
    }

    #[test]
    fn bad_cell_cites_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "x,y").unwrap();
        for i in 0..6 {
            writeln!(f, "{i}.0,1.0").unwrap();
        }
        writeln!(f, "abc,1.0").unwrap();
        drop(f);
        let err = message(load_csv(&path, "y").unwrap_err());
        assert!(
            err.contains("could not parse 'abc' at data row 7, column 'x'"),
            "{err}"
        );
    }

    #[test]
    fn non_finite_and_duplicate_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "x,y\n1.0,2.0\nNaN,3.0\n").unwrap();
        let err = message(load_csv(&path, "y").unwrap_err());
        assert!(
            err.contains("non-finite value at data row 2, column 'x'"),
            "{err}"
        );
        fs::write(&path, "x,x,y\n1.0,2.0,3.0\n").unwrap();
        let err = message(load_csv(&path, "y").unwrap_err());
        assert!(err.contains("duplicate column name 'x'"), "{err}");
    }

    #[test]
    fn covariate_free_dataset_is_not_written() {
        let data = Dataset::new(
            DesignMatrix::from_columns(4, vec![]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0],
            vec![],
            "y".into(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = message(write_dataset_csv(&data, &dir.path().join("d.csv")).unwrap_err());
        assert!(err.contains("no covariates"), "{err}");
    }

    #[test]
    fn writer_output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let data = small_dataset();
        write_dataset_csv(&data, &a).unwrap();
        write_dataset_csv(&data, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}
