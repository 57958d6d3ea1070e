//! Released tables, their CSV shapes, and the k-anonymity check.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

pub const COUNT_COLUMN: &str = "Count";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnonymizedRow {
    /// Released quasi-identifier values, aligned with [`AnonymizedTable::quasi_attrs`].
    pub generalized_values: Vec<String>,
    pub sensitive_value: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnonymizedTable {
    pub quasi_attrs: Vec<String>,
    pub sensitive_attr: String,
    /// Distinct released rows in first-appearance order.
    pub rows: Vec<AnonymizedRow>,
    /// Row index for each source record id. Empty for tables read back from CSV.
    pub record_rows: Vec<usize>,
    pub k_declared: usize,
    pub source_n: usize,
}

impl AnonymizedTable {
    fn header(&self) -> Vec<&str> {
        self.quasi_attrs
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(self.sensitive_attr.as_str()))
            .collect()
    }

    /// One row per distinct released tuple, with a trailing count column.
    pub fn write_aggregated<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.header();
        header.push(COUNT_COLUMN);
        w.write_record(&header)?;
        for row in &self.rows {
            let count = row.count.to_string();
            w.write_record(
                row.generalized_values
                    .iter()
                    .map(String::as_str)
                    .chain([row.sensitive_value.as_str(), count.as_str()]),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per source record, in record id order.
    pub fn write_expanded<W: Write>(&self, out: W) -> Result<()> {
        if self.record_rows.len() != self.source_n {
            return Err(Error::InvalidPartition(
                "table has no per-record assignment to expand".into(),
            ));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for &r in &self.record_rows {
            let row = &self.rows[r];
            w.write_record(
                row.generalized_values
                    .iter()
                    .map(String::as_str)
                    .chain(std::iter::once(row.sensitive_value.as_str())),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a released table in either shape. Every column other than the
    /// sensitive one and an optional count column is treated as a quasi-identifier.
    pub fn read_csv<R: Read>(source: R, sensitive_attr: &str, k_declared: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(source);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::EmptyInput);
        }
        let sensitive = header
            .iter()
            .position(|h| h == sensitive_attr)
            .ok_or_else(|| Error::MissingColumn(sensitive_attr.to_string()))?;
        let count_col = header.iter().position(|h| h == COUNT_COLUMN);
        let quasi: Vec<usize> = (0..header.len())
            .filter(|&i| i != sensitive && Some(i) != count_col)
            .collect();

        let mut rows = Vec::new();
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            let count = match count_col {
                Some(c) => record[c].parse::<usize>().map_err(|_| Error::NonNumeric {
                    row: row_idx,
                    column: COUNT_COLUMN.into(),
                    value: record[c].to_string(),
                })?,
                None => 1,
            };
            rows.push(AnonymizedRow {
                generalized_values: quasi.iter().map(|&i| record[i].to_string()).collect(),
                sensitive_value: record[sensitive].to_string(),
                count,
            });
        }
        let source_n = rows.iter().map(|r| r.count).sum();
        Ok(Self {
            quasi_attrs: quasi.iter().map(|&i| header[i].clone()).collect(),
            sensitive_attr: sensitive_attr.to_string(),
            rows,
            record_rows: Vec::new(),
            k_declared,
            source_n,
        })
    }
}

/// An equivalence class (rows sharing one released quasi-identifier tuple) with
/// fewer than k records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub quasi_values: Vec<String>,
    pub count: usize,
}

/// Every equivalence class whose total count is below `k`, in first-appearance
/// order. Empty exactly when the table is k-anonymous.
pub fn verify_k_anonymity(t: &AnonymizedTable, k: usize) -> Vec<Violation> {
    let mut classes: Vec<Violation> = Vec::new();
    let mut index: HashMap<&[String], usize> = HashMap::new();
    for row in &t.rows {
        let i = *index.entry(&row.generalized_values).or_insert_with(|| {
            classes.push(Violation {
                quasi_values: row.generalized_values.clone(),
                count: 0,
            });
            classes.len() - 1
        });
        classes[i].count += row.count;
    }
    classes.retain(|c| c.count < k);
    classes
}
