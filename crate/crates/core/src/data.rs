//! Data table, CSV ingestion and emission, standardization and the pipeline
//! configuration.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// An n×p table of finite reals with unique row and column labels.
///
/// Values are stored row-major. Once built the table is immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl DataTable {
    /// Builds a table from rows, checking shape, finiteness and label uniqueness.
    pub fn new(
        rows: Vec<Vec<f64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows < 3 {
            return Err(Error::TooFewRows(n_rows));
        }
        let n_cols = col_labels.len();
        if n_cols == 0 {
            return Err(Error::NoColumns);
        }
        if row_labels.len() != n_rows {
            return Err(Error::DimensionMismatch {
                left: row_labels.len(),
                right: n_rows,
            });
        }
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, column: j });
                }
            }
            values.extend(row);
        }
        check_unique("row", &row_labels)?;
        check_unique("column", &col_labels)?;
        Ok(Self {
            values,
            n_rows,
            n_cols,
            row_labels,
            col_labels,
        })
    }

    /// Builds a table with generated labels (`r1..rn`, `v1..vp`).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let row_labels = (1..=n).map(|i| format!("r{i}")).collect();
        let col_labels = (1..=p).map(|j| format!("v{j}")).collect();
        Self::new(rows, row_labels, col_labels)
    }

    /// Parses comma-separated text with a mandatory header row.
    ///
    /// The first column holds row labels when the header's first cell is
    /// empty or the first data cell is not a number; otherwise rows are
    /// labelled `1..n`.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(source);
        let mut records = reader.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(Error::MissingHeader),
        };
        let body: Vec<csv::StringRecord> = records.collect::<std::result::Result<_, _>>()?;
        if body.len() < 3 {
            return Err(Error::TooFewRows(body.len()));
        }

        let labelled = header.get(0).is_some_and(|h| h.trim().is_empty())
            || body[0]
                .get(0)
                .is_some_and(|c| c.trim().parse::<f64>().is_err());
        let skip = usize::from(labelled);
        let col_labels: Vec<String> = header.iter().skip(skip).map(str::to_owned).collect();
        let expected = header.len();

        let mut rows = Vec::with_capacity(body.len());
        let mut row_labels = Vec::with_capacity(body.len());
        for (i, rec) in body.iter().enumerate() {
            if rec.len() != expected {
                return Err(Error::RaggedRow {
                    row: i,
                    found: rec.len(),
                    expected,
                });
            }
            if labelled {
                row_labels.push(rec[0].to_owned());
            } else {
                row_labels.push((i + 1).to_string());
            }
            let row = rec
                .iter()
                .skip(skip)
                .enumerate()
                .map(|(j, cell)| {
                    cell.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
                        row: i,
                        column: j,
                        value: cell.to_owned(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(rows, row_labels, col_labels)
    }

    /// Writes the table as CSV with an empty header corner cell and a label column.
    ///
    /// Values use the shortest representation that parses back to the same `f64`.
    pub fn to_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        writer.write_record(&header)?;
        for i in 0..self.n_rows {
            let mut record = vec![self.row_labels[i].clone()];
            record.extend(self.row(i).iter().map(|v| format!("{v:?}")));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Euclidean distance between rows `i` and `j`.
    pub fn row_distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.row(i), self.row(j))
    }

    /// Returns a table with the same labels and rows reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            order.iter().map(|&i| self.row(i).to_vec()).collect(),
            order.iter().map(|&i| self.row_labels[i].clone()).collect(),
            self.col_labels.clone(),
        )
    }

    /// Applies the requested column standardization.
    pub fn standardize(&self, mode: Standardize) -> Result<Self> {
        match mode {
            Standardize::None => Ok(self.clone()),
            Standardize::Zscore => {
                let n = self.n_rows as f64;
                let mut out = self.clone();
                for j in 0..self.n_cols {
                    let col = self.column(j);
                    let (lo, hi) = col
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                            (lo.min(v), hi.max(v))
                        });
                    if lo == hi {
                        return Err(Error::ConstantColumn(self.col_labels[j].clone()));
                    }
                    let mean = col.iter().sum::<f64>() / n;
                    let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                    for (i, v) in col.iter().enumerate() {
                        out.values[i * self.n_cols + j] = (v - mean) / sd;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn check_unique(axis: &'static str, labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel {
                axis,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

macro_rules! kebab_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(Error::InvalidArgument(format!(
                        "unknown {} {other:?}", stringify!($name)
                    ))),
                }
            }
        }
    };
}

/// How d_UMAP is extended from graph edges to all pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    /// Shortest-path length over edge distances.
    #[default]
    Geodesic,
    /// Smallest achievable maximum edge along a path (single-linkage merge height).
    Minimax,
}
kebab_enum!(MetricMode { Geodesic => "geodesic", Minimax => "minimax" });

/// What to do when the fuzzy graph has several connected components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisconnectPolicy {
    #[default]
    EuclideanBridge,
    Fail,
}
kebab_enum!(DisconnectPolicy { EuclideanBridge => "euclidean-bridge", Fail => "fail" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Standardize {
    #[default]
    None,
    Zscore,
}
kebab_enum!(Standardize { None => "none", Zscore => "zscore" });

/// Parameters of the full pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub seed: u64,
    pub metric_mode: MetricMode,
    pub disconnect_policy: DisconnectPolicy,
    pub standardize: Standardize,
    pub embedding_dim: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 3,
            min_dist: 0.1,
            spread: 1.0,
            n_epochs: 200,
            seed: 42,
            metric_mode: MetricMode::Geodesic,
            disconnect_policy: DisconnectPolicy::EuclideanBridge,
            standardize: Standardize::None,
            embedding_dim: 2,
        }
    }
}

impl PipelineConfig {
    /// Checks the configuration against a table with `n_rows` rows.
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.k < 2 || self.k + 1 > n_rows {
            return Err(Error::KOutOfRange {
                k: self.k,
                max: n_rows.saturating_sub(1),
            });
        }
        if !(self.min_dist >= 0.0 && self.min_dist.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "min_dist must be a finite nonnegative number, got {}",
                self.min_dist
            )));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "spread must be positive, got {}",
                self.spread
            )));
        }
        if self.n_epochs == 0 {
            return Err(Error::InvalidConfig("n_epochs must be positive".into()));
        }
        if self.embedding_dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "embedding_dim must be at least 2, got {}",
                self.embedding_dim
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn students_row_lucia() {
        let t = crate::students();
        assert_eq!(t.n_rows(), 10);
        assert_eq!(t.n_cols(), 5);
        assert_eq!(t.row_labels()[0], "Lucía");
        assert_eq!(t.row(0), &[7.0, 6.5, 9.2, 8.6, 8.0]);
        assert_eq!(t.col_labels()[4], "Phys. Ed.");
    }

    #[test]
    fn header_only_is_rejected() {
        let err = DataTable::from_csv(",a,b\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("fewer than 3 rows"), "{err}");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            DataTable::from_csv("".as_bytes()),
            Err(Error::MissingHeader)
        ));
    }

    #[test]
    fn unlabelled_single_column() {
        let t = DataTable::from_csv("x\n1\n2\n3\n".as_bytes()).unwrap();
        assert_eq!(t.n_cols(), 1);
        assert_eq!(t.column(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(t.row_labels(), &["1", "2", "3"]);
    }

    #[test]
    fn non_numeric_cell() {
        let err = DataTable::from_csv("id,x\na,1\nb,zz\nc,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { row: 1, column: 0, .. }), "{err}");
    }

    #[test]
    fn missing_value_is_rejected() {
        let err = DataTable::from_csv(",x,y\na,1,2\nb,,3\nc,3,4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { .. }));
    }

    #[test]
    fn non_finite_is_rejected() {
        let err = DataTable::from_csv(",x\na,1\nb,NaN\nc,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, column: 0 }));
    }

    #[test]
    fn duplicate_labels() {
        let err = DataTable::from_csv(",x\na,1\na,2\nc,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel { axis: "row", .. }));
        let err = DataTable::from_csv(",x,x\na,1,1\nb,2,2\nc,3,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel { axis: "column", .. }));
    }

    #[test]
    fn ragged_row() {
        let err = DataTable::from_csv(",x,y\na,1,2\nb,2\nc,3,4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn standardize_none_is_identity() {
        let t = crate::students();
        assert_eq!(t.standardize(Standardize::None).unwrap(), t);
    }

    #[test]
    fn zscore_of_one_two_three() {
        let t = DataTable::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let z = t.standardize(Standardize::Zscore).unwrap();
        let expected = [-(1.5f64).sqrt(), 0.0, (1.5f64).sqrt()];
        for (got, want) in z.column(0).iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((expected[2] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn zscore_rejects_constant_column() {
        let t = DataTable::from_rows(vec![vec![1.0, 0.1], vec![2.0, 0.1], vec![3.0, 0.1]]).unwrap();
        assert!(matches!(
            t.standardize(Standardize::Zscore),
            Err(Error::ConstantColumn(label)) if label == "v2"
        ));
    }

    #[test]
    fn config_validation() {
        let cfg = PipelineConfig::default();
        assert!(cfg.validate(10).is_ok());
        let k100 = PipelineConfig { k: 100, ..cfg.clone() };
        assert!(k100.validate(10).unwrap_err().to_string().contains("k out of range"));
        assert!(PipelineConfig { k: 1, ..cfg.clone() }.validate(10).is_err());
        assert!(PipelineConfig { k: 9, ..cfg.clone() }.validate(10).is_ok());
        assert!(PipelineConfig { min_dist: -0.1, ..cfg.clone() }.validate(10).is_err());
        assert!(PipelineConfig { n_epochs: 0, ..cfg.clone() }.validate(10).is_err());
        assert!(PipelineConfig { embedding_dim: 1, ..cfg }.validate(10).is_err());
    }

    #[test]
    fn enum_text_round_trip() {
        for m in [MetricMode::Geodesic, MetricMode::Minimax] {
            assert_eq!(m.to_string().parse::<MetricMode>().unwrap(), m);
        }
        assert_eq!(
            "euclidean-bridge".parse::<DisconnectPolicy>().unwrap(),
            DisconnectPolicy::EuclideanBridge
        );
        assert!("zz".parse::<Standardize>().is_err());
    }
}
