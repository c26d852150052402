use std::cmp::Ordering;

use crate::harness::{ExperimentResult, Status};
use crate::{Error, Result};

/// Factor columns of a harness results file, in CSV order.
pub const FACTOR_NAMES: [&str; 7] = ["n_layers", "n_units", "dropout", "n_embedding", "padding_percentile", "batch_size", "optimizer"];

/// Partial assignment `factor -> level`, in the order the factors were fixed.
pub type Conditioning = Vec<(String, String)>;

pub fn render_conditioning(cond: &[(String, String)]) -> String {
    if cond.is_empty() {
        return "all".into();
    }
    cond.iter().map(|(f, l)| format!("{f}={l}")).collect::<Vec<_>>().join(";")
}

/// Orders level labels numerically when both parse as numbers, otherwise by
/// non-digit prefix and then numeric suffix (`P25 < P50 < P100`).
pub fn compare_levels(a: &str, b: &str) -> Ordering {
    if let (Ok(x), Ok(y)) = (a.parse::<f64>(), b.parse::<f64>()) {
        return x.total_cmp(&y).then_with(|| a.cmp(b));
    }
    let split = |s: &str| {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(cut);
        (head.to_string(), tail.parse::<u64>().ok())
    };
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(&hb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub config_id: String,
    /// One level per factor, aligned with `ResultTable::factors`.
    pub levels: Vec<String>,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    factors: Vec<String>,
    rows: Vec<TableRow>,
}

impl ResultTable {
    pub fn new(factors: Vec<String>, rows: Vec<TableRow>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::config("result table needs at least one factor"));
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].contains(f) {
                return Err(Error::config(format!("duplicate factor `{f}`")));
            }
        }
        for row in &rows {
            if row.levels.len() != factors.len() {
                return Err(Error::Dimension {
                    context: "result table row",
                    expected: factors.len(),
                    actual: row.levels.len(),
                });
            }
            if !row.loss.is_finite() {
                return Err(Error::NonFinite(format!("loss of {}", row.config_id)));
            }
        }
        Ok(ResultTable { factors, rows })
    }

    /// Final-epoch validation loss of every `ok` result.
    pub fn from_results(results: &[ExperimentResult]) -> Result<Self> {
        let rows = results
            .iter()
            .filter(|r| r.status == Status::Ok)
            .filter_map(|r| {
                let c = &r.config;
                let loss = r.final_val_loss()?;
                Some(TableRow {
                    config_id: c.id(),
                    levels: vec![
                        c.n_layers.to_string(),
                        c.n_units.to_string(),
                        c.dropout.to_string(),
                        c.n_embedding.to_string(),
                        c.padding.to_string(),
                        c.batch_size.to_string(),
                        c.optimizer.to_string(),
                    ],
                    loss,
                })
            })
            .collect();
        ResultTable::new(FACTOR_NAMES.iter().map(|s| s.to_string()).collect(), rows)
    }

    pub fn factors(&self) -> &[String] {
        &self.factors
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn factor_index(&self, factor: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f == factor)
            .ok_or_else(|| Error::config(format!("unknown factor `{factor}`")))
    }

    /// Distinct levels of `factor` across the whole table, naturally ordered.
    pub fn levels(&self, factor: &str) -> Result<Vec<String>> {
        let k = self.factor_index(factor)?;
        let mut levels: Vec<String> = self.rows.iter().map(|r| r.levels[k].clone()).collect();
        levels.sort_by(|a, b| compare_levels(a, b));
        levels.dedup();
        Ok(levels)
    }
}

/// A table together with its globally standardized losses.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedTable {
    table: ResultTable,
    std_loss: Vec<f64>,
    mean: f64,
    sd: f64,
}

impl StandardizedTable {
    pub fn table(&self) -> &ResultTable {
        &self.table
    }

    /// Aligned with `table().rows()`.
    pub fn std_loss(&self) -> &[f64] {
        &self.std_loss
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation of the raw losses.
    pub fn sd(&self) -> f64 {
        self.sd
    }
}

pub fn standardize(table: ResultTable) -> Result<StandardizedTable> {
    let n = table.rows.len();
    if n < 2 {
        return Err(Error::data(format!("standardization needs at least 2 rows, got {n}")));
    }
    let mean = table.rows.iter().map(|r| r.loss).sum::<f64>() / n as f64;
    let var = table.rows.iter().map(|r| (r.loss - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    // Relative test: losses that differ only by rounding count as equal.
    if sd <= f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE) * 4.0 {
        return Err(Error::DegenerateTable);
    }
    let std_loss = table.rows.iter().map(|r| (r.loss - mean) / sd).collect();
    Ok(StandardizedTable { table, std_loss, mean, sd })
}
