//! Dataset ingestion: rectangular CSV files of aligned numeric series.

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use std::path::Path;

/// Aligned collection of labeled series, all equal length.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<TimeSeries>,
    /// Row labels from the designated date column, when one was present.
    row_labels: Option<Vec<String>>,
    source: String,
}

impl Dataset {
    pub fn from_series(columns: Vec<TimeSeries>, source: impl Into<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("dataset needs at least one column"));
        }
        let len = columns[0].len();
        for c in &columns {
            if c.len() != len {
                return Err(Error::invalid("dataset columns must have equal length"));
            }
            if c.name().map_or(true, str::is_empty) {
                return Err(Error::invalid("every dataset column needs a label"));
            }
        }
        let mut labels: Vec<&str> = columns.iter().filter_map(|c| c.name()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("dataset labels must be unique"));
        }
        Ok(Dataset {
            columns,
            row_labels: None,
            source: source.into(),
        })
    }

    pub fn columns(&self) -> &[TimeSeries] {
        &self.columns
    }

    pub fn labels(&self) -> Vec<&str> {
        self.columns.iter().filter_map(|c| c.name()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&TimeSeries> {
        self.columns.iter().find(|c| c.name() == Some(label))
    }

    pub fn series_len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Applies `difference(order)` to every column, shortening them all by
    /// `order` points. Row labels are trimmed from the front to stay
    /// aligned.
    pub fn differenced(&self, order: usize) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|c| c.difference(order))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            columns,
            row_labels: self
                .row_labels
                .as_ref()
                .map(|l| l[order..].to_vec()),
            source: self.source.clone(),
        })
    }

    /// Writes a headered CSV that [`ingest_csv`] reads back exactly:
    /// floats are printed in shortest round-trip form.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io {
                path: path.display().to_string(),
                source: io,
            },
            other => Error::invalid(format!("csv write failed: {other:?}")),
        };
        let mut w = csv::Writer::from_path(path).map_err(io_err)?;
        let mut header: Vec<&str> = Vec::new();
        if self.row_labels.is_some() {
            header.push("date");
        }
        header.extend(self.labels());
        w.write_record(&header).map_err(io_err)?;
        for row in 0..self.series_len() {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            if let Some(labels) = &self.row_labels {
                record.push(labels[row].clone());
            }
            for c in &self.columns {
                record.push(c.values()[row].to_string());
            }
            w.write_record(&record).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(())
    }
}

/// CSV ingestion options.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub has_header: bool,
    /// Zero-based index of a non-numeric label column to keep as row
    /// labels instead of data.
    pub date_column: Option<usize>,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            has_header: true,
            date_column: None,
            delimiter: b',',
        }
    }
}

/// Reads a rectangular CSV into a [`Dataset`]. Every cell outside the date
/// column must parse as a finite number; the error names the offending row
/// (1-based, counting the header) and column.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<Dataset> {
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(opts.delimiter)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io {
                path: path_str.clone(),
                source: io,
            },
            other => Error::invalid(format!("csv open failed: {other:?}")),
        })?;

    let mut records = reader.records();
    let mut row_number = 0usize;

    let first = match records.next() {
        Some(Ok(r)) => {
            row_number += 1;
            r
        }
        Some(Err(e)) => {
            return Err(Error::Parse {
                path: path_str,
                row: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(Error::Parse {
                path: path_str,
                row: 1,
                message: "file is empty".into(),
            })
        }
    };
    let width = first.len();
    if width == 0 {
        return Err(Error::Parse {
            path: path_str,
            row: 1,
            message: "first row has no fields".into(),
        });
    }
    if let Some(d) = opts.date_column {
        if d >= width {
            return Err(Error::invalid(format!(
                "date column index {d} out of range for {width} columns"
            )));
        }
    }

    let headers: Vec<String> = if opts.has_header {
        let hs: Vec<String> = first.iter().map(|h| h.trim().to_string()).collect();
        let mut sorted = hs.clone();
        sorted.sort_unstable();
        if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parse {
                path: path_str,
                row: 1,
                message: format!("duplicate header '{}'", dup[0]),
            });
        }
        hs
    } else {
        (0..width).map(|i| format!("c{i}")).collect()
    };

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut row_labels: Vec<String> = Vec::new();
    let mut parse_row = |record: &csv::StringRecord, row: usize| -> Result<()> {
        if record.len() != width {
            return Err(Error::Parse {
                path: path_str.clone(),
                row,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            if opts.date_column == Some(col) {
                row_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                row,
                message: format!("column '{}': cannot parse '{}' as a number", headers[col], cell),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    row,
                    message: format!("column '{}': value '{}' is not finite", headers[col], cell),
                });
            }
            values[col].push(v);
        }
        Ok(())
    };

    if !opts.has_header {
        parse_row(&first, 1)?;
    }
    for record in records {
        row_number += 1;
        let record = record.map_err(|e| Error::Parse {
            path: path_str.clone(),
            row: row_number,
            message: e.to_string(),
        })?;
        parse_row(&record, row_number)?;
    }

    let mut columns = Vec::new();
    for (col, vals) in values.into_iter().enumerate() {
        if opts.date_column == Some(col) {
            continue;
        }
        if vals.is_empty() {
            return Err(Error::Parse {
                path: path_str.clone(),
                row: row_number,
                message: "no data rows".into(),
            });
        }
        columns.push(TimeSeries::with_name(vals, headers[col].clone())?);
    }
    let mut ds = Dataset::from_series(columns, path_str)?;
    if opts.date_column.is_some() {
        ds.row_labels = Some(row_labels);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn ingest_headered_three_columns() {
        let f = write_tmp("a,b,c\n1,2,3\n4,5,6\n7,8,9\n1,1,1\n2,2,2\n3,3,3\n4,4,4\n5,5,5\n6,6,6\n7,7,7\n");
        let ds = ingest_csv(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(ds.labels(), vec!["a", "b", "c"]);
        assert_eq!(ds.series_len(), 10);
        assert_eq!(ds.get("b").unwrap().values()[1], 5.0);
    }

    #[test]
    fn ingest_reports_bad_cell_location() {
        let f = write_tmp("a,b\n1,2\n3,abc\n");
        match ingest_csv(f.path(), &IngestOptions::default()) {
            Err(Error::Parse { row, message, .. }) => {
                assert_eq!(row, 3);
                assert!(message.contains('b'), "message: {message}");
                assert!(message.contains("abc"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_ragged_rows() {
        let f = write_tmp("a,b\n1,2\n3\n");
        match ingest_csv(f.path(), &IngestOptions::default()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_duplicate_headers() {
        let f = write_tmp("a,a\n1,2\n");
        match ingest_csv(f.path(), &IngestOptions::default()) {
            Err(Error::Parse { row, message, .. }) => {
                assert_eq!(row, 1);
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_nonfinite_cells() {
        let f = write_tmp("a\n1\ninf\n");
        assert!(matches!(
            ingest_csv(f.path(), &IngestOptions::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn ingest_date_column_preserved_for_labels() {
        let f = write_tmp("date,a,b\n2021-01-01,1,2\n2021-01-02,3,4\n");
        let opts = IngestOptions {
            date_column: Some(0),
            ..IngestOptions::default()
        };
        let ds = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.labels(), vec!["a", "b"]);
        assert_eq!(
            ds.row_labels().unwrap(),
            &["2021-01-01".to_string(), "2021-01-02".to_string()]
        );
    }

    #[test]
    fn ingest_headerless_names_columns_positionally() {
        let f = write_tmp("1,2\n3,4\n");
        let opts = IngestOptions {
            has_header: false,
            ..IngestOptions::default()
        };
        let ds = ingest_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.labels(), vec!["c0", "c1"]);
        assert_eq!(ds.series_len(), 2);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let a = TimeSeries::with_name(
            vec![1.0 / 3.0, -2.718281828459045, 1e-17, 42.0],
            "alpha",
        )
        .unwrap();
        let b = TimeSeries::with_name(vec![0.1 + 0.2, 5.5e300, -0.0, 7.25], "beta").unwrap();
        let ds = Dataset::from_series(vec![a, b], "mem").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("round.csv");
        ds.write_csv(&path).unwrap();
        let back = ingest_csv(&path, &IngestOptions::default()).unwrap();
        for label in ["alpha", "beta"] {
            let orig = ds.get(label).unwrap().values();
            let read = back.get(label).unwrap().values();
            for (o, r) in orig.iter().zip(read) {
                assert!((o - r).abs() <= 1e-12 * o.abs().max(1.0));
                assert_eq!(*o, *r, "shortest round-trip printing is exact");
            }
        }
    }
}
