//! Columnar dataset with explicit missingness and variable typing.
//!
//! Missing cells are tracked by a per-column observed mask, never by a
//! sentinel value. The stored value behind a masked cell is NaN, so any
//! estimator that accidentally bypasses the mask poisons its own result
//! instead of silently using stale data.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Statistical type of a variable.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Continuous,
    Binary,
    /// Ordered categories, stored as their integer codes.
    Ordinal { levels: Vec<i64> },
}

impl VariableKind {
    pub fn validate(&self) -> Result<()> {
        if let VariableKind::Ordinal { levels } = self {
            if levels.len() < 2 {
                return Err(Error::Kind(format!(
                    "ordinal variable needs at least 2 levels, got {}",
                    levels.len()
                )));
            }
            let distinct: HashSet<_> = levels.iter().collect();
            if distinct.len() != levels.len() {
                return Err(Error::Kind("ordinal level codes must be distinct".into()));
            }
        }
        Ok(())
    }

    /// Whether `value` is an admissible observed value for this kind.
    pub fn admits(&self, value: f64) -> bool {
        match self {
            VariableKind::Continuous => value.is_finite(),
            VariableKind::Binary => value == 0.0 || value == 1.0,
            VariableKind::Ordinal { levels } => {
                value.fract() == 0.0 && levels.contains(&(value as i64))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VariableKind::Continuous => "continuous",
            VariableKind::Binary => "binary",
            VariableKind::Ordinal { .. } => "ordinal",
        }
    }
}

/// One variable: name, kind, values and observed mask of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    name: String,
    kind: VariableKind,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl Column {
    pub fn new(
        name: impl Into<String>,
        kind: VariableKind,
        values: Vec<f64>,
        observed: Vec<bool>,
    ) -> Result<Self> {
        let name = name.into();
        kind.validate()?;
        if values.len() != observed.len() {
            return Err(Error::ColumnLength {
                column: name,
                len: values.len(),
                n_rows: observed.len(),
            });
        }
        let mut values = values;
        for (i, (v, obs)) in values.iter_mut().zip(&observed).enumerate() {
            if *obs {
                if !kind.admits(*v) {
                    return Err(Error::InvalidCode {
                        row: i + 1,
                        column: name,
                        value: *v,
                        kind: kind.name().into(),
                    });
                }
            } else {
                *v = f64::NAN;
            }
        }
        Ok(Column {
            name,
            kind,
            values,
            observed,
        })
    }

    pub fn complete(name: impl Into<String>, kind: VariableKind, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Column::new(name, kind, values, vec![true; n])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &VariableKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `row`, or `None` when the cell is masked missing.
    pub fn value(&self, row: usize) -> Option<f64> {
        if self.observed[row] {
            Some(self.values[row])
        } else {
            None
        }
    }

    pub fn is_observed(&self, row: usize) -> bool {
        self.observed[row]
    }

    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn observed_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.observed)
            .filter(|(_, o)| **o)
            .map(|(v, _)| *v)
    }

    pub fn missing_rows(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.observed[i]).collect()
    }

    pub fn observed_rows(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.observed[i]).collect()
    }

    pub fn n_missing(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }
}

/// Immutable columnar table. All mutation constructs a new `Dataset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n_rows: usize,
    columns: Vec<Column>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Column::len);
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.clone()) {
                return Err(Error::DuplicateVariable(c.name.clone()));
            }
            if c.len() != n_rows {
                return Err(Error::ColumnLength {
                    column: c.name.clone(),
                    len: c.len(),
                    n_rows,
                });
            }
        }
        Ok(Dataset { n_rows, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    /// Fraction of masked cells in `var`.
    pub fn missing_fraction(&self, var: &str) -> Result<f64> {
        let col = self.column(var)?;
        Ok(col.n_missing() as f64 / self.n_rows as f64)
    }

    /// Indices of rows fully observed on `vars`, in order.
    pub fn complete_rows(&self, vars: &[&str]) -> Result<Vec<usize>> {
        let cols: Vec<&Column> = vars.iter().map(|v| self.column(v)).collect::<Result<_>>()?;
        Ok((0..self.n_rows)
            .filter(|&i| cols.iter().all(|c| c.is_observed(i)))
            .collect())
    }

    /// Keep only rows fully observed on `vars`. Row order and values are
    /// preserved; the result may be empty.
    pub fn listwise_complete(&self, vars: &[&str]) -> Result<Dataset> {
        let keep = self.complete_rows(vars)?;
        Ok(self.select_rows(&keep))
    }

    /// New dataset containing the given rows of every column, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                kind: c.kind.clone(),
                values: rows.iter().map(|&i| c.values[i]).collect(),
                observed: rows.iter().map(|&i| c.observed[i]).collect(),
            })
            .collect();
        Dataset {
            n_rows: rows.len(),
            columns,
        }
    }

    /// New dataset with the listed cells of `var` masked missing.
    pub fn with_masked(&self, var: &str, rows: &[usize]) -> Result<Dataset> {
        self.column(var)?;
        let mut d = self.clone();
        let col = d.columns.iter_mut().find(|c| c.name == var).unwrap();
        for &i in rows {
            col.observed[i] = false;
            col.values[i] = f64::NAN;
        }
        Ok(d)
    }

    /// New dataset with the listed cells of `var` replaced by `values` and
    /// marked observed. Used to materialize imputations.
    pub fn with_filled(&self, var: &str, rows: &[usize], values: &[f64]) -> Result<Dataset> {
        assert_eq!(rows.len(), values.len());
        self.column(var)?;
        let mut d = self.clone();
        let col = d.columns.iter_mut().find(|c| c.name == var).unwrap();
        for (&i, &v) in rows.iter().zip(values) {
            if !col.kind.admits(v) {
                return Err(Error::InvalidCode {
                    row: i + 1,
                    column: var.into(),
                    value: v,
                    kind: col.kind.name().into(),
                });
            }
            col.observed[i] = true;
            col.values[i] = v;
        }
        Ok(d)
    }
}

/// Analysis or imputation model shape: one response, a list of predictors.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFormula {
    pub response: String,
    pub predictors: Vec<String>,
}

impl ModelFormula {
    pub fn new(response: impl Into<String>, predictors: &[&str]) -> Self {
        ModelFormula {
            response: response.into(),
            predictors: predictors.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self, d: &Dataset) -> Result<()> {
        d.column(&self.response)?;
        let mut seen = HashSet::new();
        for p in &self.predictors {
            d.column(p)?;
            if p == &self.response {
                return Err(Error::Formula(format!(
                    "response {:?} also appears as a predictor",
                    self.response
                )));
            }
            if !seen.insert(p) {
                return Err(Error::Formula(format!("duplicate predictor {p:?}")));
            }
        }
        Ok(())
    }

    /// All variable names referenced by the formula, response first.
    pub fn variables(&self) -> Vec<&str> {
        std::iter::once(self.response.as_str())
            .chain(self.predictors.iter().map(String::as_str))
            .collect()
    }
}

/// Read a CSV file into a dataset. The header must match the `specs` names in
/// order; cells equal to `missing_token` become masked cells.
pub fn load_csv(
    path: impl AsRef<Path>,
    specs: &[(String, VariableKind)],
    missing_token: &str,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let expected: Vec<String> = specs.iter().map(|(n, _)| n.clone()).collect();
    if header != expected {
        return Err(Error::HeaderMismatch {
            expected,
            found: header,
        });
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); specs.len()];
    let mut observed: Vec<Vec<bool>> = vec![Vec::new(); specs.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        for (col_idx, cell) in record.iter().enumerate() {
            if cell == missing_token {
                values[col_idx].push(f64::NAN);
                observed[col_idx].push(false);
            } else {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row: row_idx + 1,
                    column: specs[col_idx].0.clone(),
                    value: cell.into(),
                })?;
                values[col_idx].push(v);
                observed[col_idx].push(true);
            }
        }
    }

    let columns = specs
        .iter()
        .zip(values.into_iter().zip(observed))
        .map(|((name, kind), (vals, obs))| Column::new(name.clone(), kind.clone(), vals, obs))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(columns)
}

/// Write a dataset as CSV; masked cells render as `missing_token`.
pub fn emit_csv(d: &Dataset, mut out: impl Write, missing_token: &str) -> Result<()> {
    let header: Vec<&str> = d.variable_names();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..d.n_rows() {
        let row: Vec<String> = d
            .columns()
            .iter()
            .map(|c| match c.value(i) {
                Some(v) => format!("{v}"),
                None => missing_token.to_string(),
            })
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Convenience wrapper writing to a file path.
pub fn emit_csv_path(d: &Dataset, path: impl AsRef<Path>, missing_token: &str) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit_csv(d, std::io::BufWriter::new(file), missing_token)
}
