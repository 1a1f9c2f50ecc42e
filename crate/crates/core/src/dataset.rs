//! Binary-feature / binary-label training data: ingestion, validation and
//! row subsetting.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An immutable table of M rows over K binary features, each row carrying a
/// binary label. Values are validated at construction; a `Dataset` value is
/// always well-formed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<u8>>,
    labels: Vec<u8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("dataset must have at least one feature column")]
    NoFeatures,
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("cell at row {row}, column {col} is {value:?}, expected 0 or 1")]
    NonBinaryCell {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("label at row {row} is {value:?}, expected 0 or 1")]
    NonBinaryLabel { row: usize, value: String },
    #[error("duplicate feature name {name:?}")]
    DuplicateFeatureName { name: String },
    #[error("feature name count {names} does not match column count {cols}")]
    NameCountMismatch { names: usize, cols: usize },
    #[error("label count {labels} does not match row count {rows}")]
    LabelCountMismatch { labels: usize, rows: usize },
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("duplicate row index {index}")]
    DuplicateIndex { index: usize },
    #[error("column {col} is empty")]
    EmptyColumn { col: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("csv error: {0}")]
    Csv(String),
}

impl Dataset {
    /// Builds a dataset, checking every invariant: binary cells and labels,
    /// rectangular rows, unique feature names, M >= 1 and K >= 1.
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<u8>>,
        labels: Vec<u8>,
    ) -> Result<Dataset, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let k = feature_names.len();
        if k == 0 {
            return Err(DatasetError::NoFeatures);
        }
        if labels.len() != rows.len() {
            return Err(DatasetError::LabelCountMismatch {
                labels: labels.len(),
                rows: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    expected: k,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(DatasetError::NonBinaryCell {
                        row: i,
                        col: j,
                        value: v.to_string(),
                    });
                }
            }
        }
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(DatasetError::NonBinaryLabel {
                    row: i,
                    value: y.to_string(),
                });
            }
        }
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(DatasetError::DuplicateFeatureName { name: name.clone() });
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
        })
    }

    /// Number of rows (M).
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of feature columns (K).
    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Parses CSV from `source`. The last column is the label; every cell
    /// must be 0 or 1. With `has_header`, feature names come from the header
    /// row (the label column name is ignored); otherwise names are
    /// generated as `f1..fK`.
    pub fn load_csv<R: Read>(source: R, has_header: bool) -> Result<Dataset, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);

        let mut records = reader.records();
        let mut names: Option<Vec<String>> = None;
        if has_header {
            let header = records
                .next()
                .ok_or(DatasetError::Empty)?
                .map_err(|e| DatasetError::Csv(e.to_string()))?;
            if header.len() < 2 {
                return Err(DatasetError::NoFeatures);
            }
            names = Some(
                header
                    .iter()
                    .take(header.len() - 1)
                    .map(|s| s.to_string())
                    .collect(),
            );
        }

        let mut rows: Vec<Vec<u8>> = Vec::new();
        let mut labels: Vec<u8> = Vec::new();
        let mut width: Option<usize> = None;
        for (i, record) in records.enumerate() {
            let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
            let w = *width.get_or_insert(record.len());
            if let Some(names) = &names {
                if record.len() != names.len() + 1 {
                    return Err(DatasetError::RaggedRow {
                        row: i,
                        expected: names.len() + 1,
                        found: record.len(),
                    });
                }
            } else if record.len() != w {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    expected: w,
                    found: record.len(),
                });
            }
            if record.len() < 2 {
                return Err(DatasetError::NoFeatures);
            }
            let mut row = Vec::with_capacity(record.len() - 1);
            for (j, cell) in record.iter().enumerate() {
                let value = match cell {
                    "0" => 0u8,
                    "1" => 1u8,
                    other => {
                        if j + 1 == record.len() {
                            return Err(DatasetError::NonBinaryLabel {
                                row: i,
                                value: other.to_string(),
                            });
                        }
                        return Err(DatasetError::NonBinaryCell {
                            row: i,
                            col: j,
                            value: other.to_string(),
                        });
                    }
                };
                if j + 1 == record.len() {
                    labels.push(value);
                } else {
                    row.push(value);
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let k = rows[0].len();
        let names = names.unwrap_or_else(|| (1..=k).map(|i| format!("f{}", i)).collect());
        if names.len() != k {
            return Err(DatasetError::NameCountMismatch {
                names: names.len(),
                cols: k,
            });
        }
        Dataset::new(names, rows, labels)
    }

    /// Serializes back to CSV; inverse of `load_csv` on well-formed input.
    pub fn to_csv(&self, include_header: bool) -> String {
        let mut out = String::new();
        if include_header {
            for name in &self.feature_names {
                out.push_str(name);
                out.push(',');
            }
            out.push_str("label\n");
        }
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            for &v in row {
                out.push_str(if v == 1 { "1," } else { "0," });
            }
            out.push(if y == 1 { '1' } else { '0' });
            out.push('\n');
        }
        out
    }

    /// Thresholds each column of a numeric table at its median: a cell maps
    /// to 1 iff it is strictly greater than the column median, so ties map
    /// to 0. For even row counts the median is the mean of the two middle
    /// values.
    pub fn binarize_median(
        table: &[Vec<f64>],
        labels: &[u8],
        feature_names: Option<Vec<String>>,
    ) -> Result<Dataset, DatasetError> {
        if table.is_empty() {
            return Err(DatasetError::Empty);
        }
        let k = table[0].len();
        if k == 0 {
            return Err(DatasetError::EmptyColumn { col: 0 });
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != k {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    expected: k,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DatasetError::NonFiniteValue { row: i, col: j });
                }
            }
        }
        let m = table.len();
        let mut medians = Vec::with_capacity(k);
        for j in 0..k {
            let mut col: Vec<f64> = table.iter().map(|row| row[j]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
            let median = if m % 2 == 1 {
                col[m / 2]
            } else {
                (col[m / 2 - 1] + col[m / 2]) / 2.0
            };
            medians.push(median);
        }
        let rows: Vec<Vec<u8>> = table
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&medians)
                    .map(|(&v, &med)| u8::from(v > med))
                    .collect()
            })
            .collect();
        let names =
            feature_names.unwrap_or_else(|| (1..=k).map(|i| format!("f{}", i)).collect());
        Dataset::new(names, rows, labels.to_vec())
    }

    /// Row-projected copy keeping the same feature columns. Indices must be
    /// in range, free of duplicates and nonempty.
    pub fn subset(&self, row_indices: &[usize]) -> Result<Dataset, DatasetError> {
        if row_indices.is_empty() {
            return Err(DatasetError::Empty);
        }
        let m = self.num_rows();
        let mut seen = vec![false; m];
        for &i in row_indices {
            if i >= m {
                return Err(DatasetError::IndexOutOfRange { index: i, rows: m });
            }
            if seen[i] {
                return Err(DatasetError::DuplicateIndex { index: i });
            }
            seen[i] = true;
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            rows: row_indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: row_indices.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_small_csv_with_header() {
        let csv = "a,b,y\n0,1,1\n1,0,0\n1,1,1";
        let d = Dataset::load_csv(csv.as_bytes(), true).unwrap();
        assert_eq!(d.num_features(), 2);
        assert_eq!(d.num_rows(), 3);
        assert_eq!(d.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.labels(), &[1, 0, 1]);
        assert_eq!(d.row(1), &[1, 0]);
    }

    #[test]
    fn load_csv_without_header_generates_names() {
        let csv = "0,1,1\n1,0,0";
        let d = Dataset::load_csv(csv.as_bytes(), false).unwrap();
        assert_eq!(d.feature_names(), &["f1".to_string(), "f2".to_string()]);
    }

    #[test]
    fn load_csv_dimensions_m50_k15() {
        let mut csv = String::new();
        for i in 0..50 {
            let row: Vec<String> = (0..16).map(|j| ((i + j) % 2).to_string()).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let d = Dataset::load_csv(csv.as_bytes(), false).unwrap();
        assert_eq!(d.num_rows(), 50);
        assert_eq!(d.num_features(), 15);
    }

    #[test]
    fn non_binary_cell_reports_coordinates() {
        let csv = "0,1,1\n1,2,0";
        let err = Dataset::load_csv(csv.as_bytes(), false).unwrap_err();
        assert_eq!(
            err,
            DatasetError::NonBinaryCell {
                row: 1,
                col: 1,
                value: "2".into()
            }
        );
    }

    #[test]
    fn ragged_row_rejected() {
        let csv = "0,1,1\n1,0\n";
        let err = Dataset::load_csv(csv.as_bytes(), false).unwrap_err();
        assert!(matches!(err, DatasetError::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn empty_file_rejected() {
        let err = Dataset::load_csv("".as_bytes(), false).unwrap_err();
        assert_eq!(err, DatasetError::Empty);
    }

    #[test]
    fn duplicate_feature_names_rejected() {
        let csv = "a,a,y\n0,1,1\n";
        let err = Dataset::load_csv(csv.as_bytes(), true).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateFeatureName { .. }));
    }

    #[test]
    fn binarize_median_odd_column() {
        let table = vec![vec![1.0], vec![2.0], vec![3.0]];
        let d = Dataset::binarize_median(&table, &[0, 0, 1], None).unwrap();
        assert_eq!(d.rows(), &[vec![0], vec![0], vec![1]]);
    }

    #[test]
    fn binarize_median_constant_column() {
        let table = vec![vec![5.0], vec![5.0]];
        let d = Dataset::binarize_median(&table, &[0, 1], None).unwrap();
        assert_eq!(d.rows(), &[vec![0], vec![0]]);
    }

    #[test]
    fn binarize_median_even_column() {
        let table = vec![vec![0.1], vec![0.9], vec![0.5], vec![0.7]];
        let d = Dataset::binarize_median(&table, &[0, 1, 0, 1], None).unwrap();
        assert_eq!(d.rows(), &[vec![0], vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn binarize_rejects_non_finite() {
        let table = vec![vec![f64::NAN]];
        let err = Dataset::binarize_median(&table, &[0], None).unwrap_err();
        assert_eq!(err, DatasetError::NonFiniteValue { row: 0, col: 0 });
    }

    #[test]
    fn subset_basics() {
        let d = Dataset::load_csv("0,1,1\n1,0,0\n1,1,1".as_bytes(), false).unwrap();
        let s = d.subset(&[0, 2]).unwrap();
        assert_eq!(s.num_rows(), 2);
        assert_eq!(s.num_features(), 2);
        assert_eq!(s.labels(), &[1, 1]);

        let full = d.subset(&[0, 1, 2]).unwrap();
        assert_eq!(full, d);

        assert_eq!(d.subset(&[]).unwrap_err(), DatasetError::Empty);
        assert!(matches!(
            d.subset(&[3]).unwrap_err(),
            DatasetError::IndexOutOfRange { index: 3, .. }
        ));
        assert!(matches!(
            d.subset(&[1, 1]).unwrap_err(),
            DatasetError::DuplicateIndex { index: 1 }
        ));
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_identity(
            m in 1usize..12,
            k in 1usize..8,
            seed in any::<u64>(),
            header in any::<bool>(),
        ) {
            let mut state = seed;
            let mut next_bit = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) & 1) as u8
            };
            let rows: Vec<Vec<u8>> = (0..m).map(|_| (0..k).map(|_| next_bit()).collect()).collect();
            let labels: Vec<u8> = (0..m).map(|_| next_bit()).collect();
            let names: Vec<String> = (1..=k).map(|i| format!("f{}", i)).collect();
            let d = Dataset::new(names, rows, labels).unwrap();
            let text = d.to_csv(header);
            let back = Dataset::load_csv(text.as_bytes(), header).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn binarize_median_output_is_valid(
            m in 1usize..10,
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut state = seed | 1;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64) / ((1u64 << 53) as f64) * 10.0 - 5.0
            };
            let table: Vec<Vec<f64>> = (0..m).map(|_| (0..k).map(|_| next()).collect()).collect();
            let labels: Vec<u8> = (0..m).map(|i| (i % 2) as u8).collect();
            let d = Dataset::binarize_median(&table, &labels, None).unwrap();
            prop_assert_eq!(d.num_rows(), m);
            prop_assert_eq!(d.num_features(), k);
            for row in d.rows() {
                for &v in row {
                    prop_assert!(v <= 1);
                }
            }
        }
    }
}
