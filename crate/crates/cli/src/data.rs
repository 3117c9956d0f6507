//! File formats: demand and price CSV, fleet / vertex / weight JSON and the
//! disaggregated schedule CSV.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use flexhull_core::{
    DeviceVertices, DisaggregationResult, HullWeights, Profiles, SignVector, StorageSpec,
    VertexMatrix,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: bad header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("{path}: expected {expected} data rows, found {found} ({})", shortfall(*.expected, *.found))]
    RowCount {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: row {row}, column {column}: non-finite value {value:?}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] flexhull_core::Error),
}

fn shortfall(expected: usize, found: usize) -> String {
    if found < expected {
        format!("short by {}", expected - found)
    } else {
        format!("{} too many", found - expected)
    }
}

pub type Result<T> = std::result::Result<T, DataError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a numeric table with header `t,<name>_1,...`. Returns the column
/// names after `t` and the values column by column.
fn read_table(path: &Path, d: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if names.first().map(String::as_str) != Some("t") {
        return Err(DataError::Header {
            path: path.to_path_buf(),
            message: "first column must be `t`".into(),
        });
    }
    if names.len() < 2 {
        return Err(DataError::Header {
            path: path.to_path_buf(),
            message: "need at least one data column".into(),
        });
    }
    let columns = names[1..].to_vec();
    let mut values = vec![Vec::with_capacity(d); columns.len()];
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        rows += 1;
        // Header is line 1, so data row r sits on line r + 1.
        if record.len() != names.len() {
            return Err(DataError::FieldCount {
                path: path.to_path_buf(),
                row: rows,
                expected: names.len(),
                found: record.len(),
            });
        }
        for (k, field) in record.iter().skip(1).enumerate() {
            let raw = field.trim();
            let v: f64 = raw.parse().map_err(|_| DataError::Parse {
                path: path.to_path_buf(),
                row: rows,
                column: columns[k].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    path: path.to_path_buf(),
                    row: rows,
                    column: columns[k].clone(),
                    value: raw.to_string(),
                });
            }
            values[k].push(v);
        }
    }
    if rows != d {
        return Err(DataError::RowCount {
            path: path.to_path_buf(),
            expected: d,
            found: rows,
        });
    }
    Ok((columns, values))
}

/// Household demand from a `t,q_1,...,q_N` CSV with `d` data rows.
///
/// Returns one profile of length `d` per household.
pub fn load_demand_csv(path: &Path, d: usize) -> Result<Vec<Vec<f64>>> {
    Ok(read_table(path, d)?.1)
}

/// Prices from a `t,price` CSV with `d` data rows.
pub fn load_prices_csv(path: &Path, d: usize) -> Result<Vec<f64>> {
    let (names, mut values) = read_table(path, d)?;
    if names.len() != 1 {
        return Err(DataError::Header {
            path: path.to_path_buf(),
            message: format!("expected `t,price`, found {} data columns", names.len()),
        });
    }
    Ok(values.remove(0))
}

fn write_table(path: &Path, names: &[String], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut header = vec!["t".to_string()];
    header.extend_from_slice(names);
    w.write_record(&header).map_err(csv_err)?;
    let d = columns.first().map_or(0, |c| c.len());
    for t in 0..d {
        let mut row = vec![(t + 1).to_string()];
        row.extend(columns.iter().map(|c| c[t].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_demand_csv(path: &Path, demand: &[Vec<f64>]) -> Result<()> {
    let names: Vec<String> = (1..=demand.len()).map(|i| format!("q_{i}")).collect();
    let cols: Vec<&[f64]> = demand.iter().map(Vec::as_slice).collect();
    write_table(path, &names, &cols)
}

pub fn write_prices_csv(path: &Path, prices: &[f64]) -> Result<()> {
    write_table(path, &["price".to_string()], &[prices])
}

/// Per-device schedules as `t,x_1,...,x_n,total`.
pub fn write_schedule_csv(path: &Path, result: &DisaggregationResult) -> Result<()> {
    let n = result.schedules.len();
    let mut names: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    names.push("total".into());
    let mut cols: Vec<&[f64]> = result.schedules.iter().collect();
    cols.push(&result.aggregate);
    write_table(path, &names, &cols)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| DataError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|source| DataError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(b"\n").map_err(io_err(path))
}

fn default_seed() -> u64 {
    0
}

fn default_true() -> bool {
    true
}

/// Input of the `aggregate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetFile {
    pub devices: Vec<StorageSpec>,
    /// Number of sign vectors; defaults to `d^2`.
    #[serde(default)]
    pub g: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub zero_column: bool,
}

/// Per-device vertex matrices as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceColumns {
    /// `[device][column][t]`.
    Individual(Vec<Vec<Vec<f64>>>),
    Shared {
        multiplicity: usize,
        columns: Vec<Vec<f64>>,
    },
}

/// JSON form of a [`VertexMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexFile {
    pub d: usize,
    pub sign_vectors: Vec<SignVector>,
    pub has_zero_column: bool,
    /// `[column][t]`, zero column last when present.
    pub columns: Vec<Vec<f64>>,
    #[serde(default)]
    pub per_device: Option<DeviceColumns>,
}

fn to_nested(p: &Profiles) -> Vec<Vec<f64>> {
    p.iter().map(<[f64]>::to_vec).collect()
}

fn from_nested(d: usize, cols: &[Vec<f64>]) -> Result<Profiles> {
    let mut p = Profiles::with_capacity(d, cols.len());
    for (c, col) in cols.iter().enumerate() {
        if col.len() != d {
            return Err(DataError::Invalid(format!(
                "column {c} has length {}, expected {d}",
                col.len()
            )));
        }
        p.push(col);
    }
    Ok(p)
}

impl From<&VertexMatrix> for VertexFile {
    fn from(vm: &VertexMatrix) -> Self {
        let per_device = vm.per_device().map(|dev| match dev {
            DeviceVertices::Individual(v) => {
                DeviceColumns::Individual(v.iter().map(to_nested).collect())
            }
            DeviceVertices::Shared {
                profiles,
                multiplicity,
            } => DeviceColumns::Shared {
                multiplicity: *multiplicity,
                columns: to_nested(profiles),
            },
        });
        Self {
            d: vm.dim(),
            sign_vectors: vm.sign_vectors().to_vec(),
            has_zero_column: vm.has_zero_column(),
            columns: to_nested(vm.columns()),
            per_device,
        }
    }
}

impl VertexFile {
    pub fn into_matrix(self) -> Result<VertexMatrix> {
        let d = self.d;
        let columns = from_nested(d, &self.columns)?;
        let per_device = match &self.per_device {
            None => None,
            Some(DeviceColumns::Individual(v)) => Some(DeviceVertices::Individual(
                v.iter().map(|c| from_nested(d, c)).collect::<Result<_>>()?,
            )),
            Some(DeviceColumns::Shared {
                multiplicity,
                columns,
            }) => Some(DeviceVertices::Shared {
                profiles: from_nested(d, columns)?,
                multiplicity: *multiplicity,
            }),
        };
        Ok(VertexMatrix::from_parts(
            columns,
            self.sign_vectors,
            self.has_zero_column,
            per_device,
        )?)
    }
}

/// Input of the `disaggregate` command: either explicit weights or an
/// aggregate point inside the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsFile {
    Weights {
        alpha: Vec<f64>,
        #[serde(default)]
        zero_weight: f64,
    },
    Point {
        point: Vec<f64>,
    },
}

impl WeightsFile {
    pub fn resolve(&self, vm: &VertexMatrix) -> Result<HullWeights> {
        match self {
            WeightsFile::Weights { alpha, zero_weight } => {
                Ok(HullWeights::new(alpha.clone(), *zero_weight, 1e-9)?)
            }
            WeightsFile::Point { point } => Ok(flexhull_core::weights_for_point(point, vm)?),
        }
    }
}
