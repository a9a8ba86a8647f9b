//! Comma-separated result tables and golden-file comparison.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{LabError, Result};

/// A rectangular table of text cells with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip formatting, so equal values print identically;
/// exponent notation outside `[1e-4, 1e7)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells are skipped.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .map(|c| self.rows.iter().filter_map(|r| r[c].parse().ok()).collect())
            .unwrap_or_default()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Parse(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Parse(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| LabError::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| LabError::Parse(e.to_string()))
            })
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Table { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Table::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Relative tolerances: one default plus per-column overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub default: f64,
    pub per_column: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn uniform(rel: f64) -> Self {
        Tolerances {
            default: rel,
            per_column: BTreeMap::new(),
        }
    }

    fn for_column(&self, name: &str) -> f64 {
        self.per_column.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Breach {
    pub row: usize,
    pub column: String,
    pub artifact: String,
    pub golden: String,
    pub relative_error: f64,
}

impl std::fmt::Display for Breach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "row {} column `{}`: {} vs golden {} (relative error {:e})",
            self.row, self.column, self.artifact, self.golden, self.relative_error
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldenReport {
    pub compared: usize,
    pub breaches: Vec<Breach>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

/// Cell-by-cell comparison. Numeric cells use `|a − g| ≤ tol·|g|` (absolute
/// `tol` when `g = 0`); text cells must match exactly. Differing headers or
/// row counts are schema errors.
pub fn compare_golden(artifact: &Table, golden: &Table, tol: &Tolerances) -> Result<GoldenReport> {
    if artifact.columns != golden.columns {
        let missing: Vec<&String> = golden
            .columns
            .iter()
            .filter(|c| !artifact.columns.contains(c))
            .collect();
        let extra: Vec<&String> = artifact
            .columns
            .iter()
            .filter(|c| !golden.columns.contains(c))
            .collect();
        return Err(LabError::Schema(format!(
            "columns differ: missing {missing:?}, unexpected {extra:?}"
        )));
    }
    if artifact.rows.len() != golden.rows.len() {
        return Err(LabError::Schema(format!(
            "{} rows against {} golden rows",
            artifact.rows.len(),
            golden.rows.len()
        )));
    }
    let mut report = GoldenReport::default();
    for (i, (ra, rg)) in artifact.rows.iter().zip(&golden.rows).enumerate() {
        for (c, name) in golden.columns.iter().enumerate() {
            report.compared += 1;
            let (a, g) = (&ra[c], &rg[c]);
            let rel = match (a.parse::<f64>(), g.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    if x == y {
                        0.0
                    } else if y == 0.0 {
                        x.abs()
                    } else {
                        (x - y).abs() / y.abs()
                    }
                }
                _ if a == g => 0.0,
                _ => f64::INFINITY,
            };
            if !(rel <= tol.for_column(name)) {
                report.breaches.push(Breach {
                    row: i,
                    column: name.clone(),
                    artifact: a.clone(),
                    golden: g.clone(),
                    relative_error: rel,
                });
            }
        }
    }
    Ok(report)
}

/// Looks up `value` for `(quantity, domain)` in a golden constants table.
pub fn golden_constant(table: &Table, quantity: &str, domain: &str) -> Result<Option<f64>> {
    let (Some(q), Some(d), Some(v)) = (
        table.column("quantity"),
        table.column("domain"),
        table.column("value"),
    ) else {
        return Err(LabError::Schema(
            "golden constants need columns quantity,domain,value".into(),
        ));
    };
    table
        .rows
        .iter()
        .find(|r| r[q] == quantity && r[d] == domain)
        .map(|r| {
            r[v].parse::<f64>()
                .map_err(|e| LabError::Parse(format!("golden {quantity}/{domain}: {e}")))
        })
        .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["k", "lambda", "label"]);
        t.push(vec!["1".into(), num(9.8696), "a".into()]);
        t.push(vec!["2".into(), num(39.478), "b".into()]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        assert_eq!(Table::from_csv(&t.to_csv().unwrap()).unwrap(), t);
    }

    #[test]
    fn identical_tables_pass() {
        let r = compare_golden(&sample(), &sample(), &Tolerances::uniform(1e-12)).unwrap();
        assert!(r.passed());
        assert_eq!(r.compared, 6);
    }

    #[test]
    fn drift_of_twice_the_tolerance_is_a_named_breach() {
        let mut drifted = sample();
        drifted.rows[1][1] = num(39.478 * (1.0 + 2e-6));
        let r = compare_golden(&drifted, &sample(), &Tolerances::uniform(1e-6)).unwrap();
        assert_eq!(r.breaches.len(), 1);
        assert_eq!(r.breaches[0].column, "lambda");
        assert_eq!(r.breaches[0].row, 1);
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let mut t = sample();
        t.columns.pop();
        t.rows.iter_mut().for_each(|r| {
            r.pop();
        });
        let err = compare_golden(&t, &sample(), &Tolerances::uniform(1.0)).unwrap_err();
        assert!(matches!(err, LabError::Schema(_)), "{err}");
    }
}
