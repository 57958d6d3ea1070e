//! Attribute schemas, record tables and sorted views.
//!
//! A [`Dataset`] is immutable once built. It keeps only the columns named by its
//! [`AttributeSchema`], in schema order, and caches the global range of every
//! quasi-numeric column.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRole {
    Identifier,
    QuasiNumeric,
    QuasiCategorical,
    Sensitive,
}

impl AttributeRole {
    pub fn is_quasi(self) -> bool {
        matches!(
            self,
            AttributeRole::QuasiNumeric | AttributeRole::QuasiCategorical
        )
    }
}

/// Replace the last `suffix_len` characters of a value with `mask_char`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRule {
    pub suffix_len: usize,
    pub mask_char: char,
}

impl MaskRule {
    pub fn new(suffix_len: usize, mask_char: char) -> Self {
        Self {
            suffix_len,
            mask_char,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub role: AttributeRole,
    pub taxonomy_path: Option<String>,
    pub mask_rule: Option<MaskRule>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, role: AttributeRole) -> Self {
        Self {
            name: name.into(),
            role,
            taxonomy_path: None,
            mask_rule: None,
        }
    }

    pub fn with_taxonomy(mut self, path: impl Into<String>) -> Self {
        self.taxonomy_path = Some(path.into());
        self
    }

    pub fn with_mask(mut self, rule: MaskRule) -> Self {
        self.mask_rule = Some(rule);
        self
    }
}

/// Ordered attribute list with exactly one sensitive attribute and at least one
/// quasi-identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    sensitive: usize,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        let mut seen = HashSet::new();
        for attr in &attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute {:?}",
                    attr.name
                )));
            }
            if attr.role != AttributeRole::QuasiCategorical
                && (attr.taxonomy_path.is_some() || attr.mask_rule.is_some())
            {
                return Err(Error::Schema(format!(
                    "attribute {:?}: taxonomy and mask rules apply only to quasi-categorical attributes",
                    attr.name
                )));
            }
            if attr.taxonomy_path.is_some() && attr.mask_rule.is_some() {
                return Err(Error::Schema(format!(
                    "attribute {:?} has both a taxonomy and a mask rule",
                    attr.name
                )));
            }
            if let Some(rule) = attr.mask_rule {
                if rule.suffix_len == 0 {
                    return Err(Error::Schema(format!(
                        "attribute {:?}: mask length must be at least 1",
                        attr.name
                    )));
                }
            }
        }

        let sensitive: Vec<usize> = attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == AttributeRole::Sensitive)
            .map(|(i, _)| i)
            .collect();
        let sensitive = match sensitive.as_slice() {
            [one] => *one,
            [] => return Err(Error::Schema("no sensitive attribute".into())),
            _ => return Err(Error::Schema("more than one sensitive attribute".into())),
        };
        if !attributes.iter().any(|a| a.role.is_quasi()) {
            return Err(Error::NoQuasiIdentifiers);
        }
        Ok(Self {
            attributes,
            sensitive,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn sensitive_index(&self) -> usize {
        self.sensitive
    }

    pub fn sensitive(&self) -> &Attribute {
        &self.attributes[self.sensitive]
    }

    /// Indices of quasi-identifier attributes in schema order.
    pub fn quasi_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role.is_quasi())
            .map(|(i, _)| i)
    }

    /// Number of quasi-numeric attributes.
    pub fn r(&self) -> usize {
        self.count(AttributeRole::QuasiNumeric)
    }

    /// Number of quasi-categorical attributes.
    pub fn s(&self) -> usize {
        self.count(AttributeRole::QuasiCategorical)
    }

    fn count(&self, role: AttributeRole) -> usize {
        self.attributes.iter().filter(|a| a.role == role).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            Value::Number(_) => None,
        }
    }

    fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Number(_), Value::Text(_)) => Ordering::Less,
            (Value::Text(_), Value::Number(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: usize,
    /// One value per schema attribute, in schema order.
    pub values: Vec<Value>,
}

/// Minimum and maximum of a numeric column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericRange {
    pub min: f64,
    pub max: f64,
}

impl NumericRange {
    pub fn point(x: f64) -> Self {
        Self { min: x, max: x }
    }

    pub fn include(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: AttributeSchema,
    records: Vec<Record>,
    global_ranges: Vec<Option<NumericRange>>,
}

impl Dataset {
    /// Build a dataset from rows of raw values given in schema order. Record ids
    /// are assigned densely in row order.
    pub fn from_rows<I, R>(schema: AttributeSchema, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut records = Vec::new();
        for (id, row) in rows.into_iter().enumerate() {
            let raw: Vec<R::Item> = row.into_iter().collect();
            if raw.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "row {id}: expected {} values, found {}",
                    schema.len(),
                    raw.len()
                )));
            }
            let values = schema
                .attributes()
                .iter()
                .zip(raw.iter())
                .map(|(attr, field)| parse_value(id, attr, field.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            records.push(Record { id, values });
        }
        Self::from_records(schema, records)
    }

    fn from_records(schema: AttributeSchema, records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut global_ranges: Vec<Option<NumericRange>> = vec![None; schema.len()];
        for (idx, attr) in schema.attributes().iter().enumerate() {
            if attr.role != AttributeRole::QuasiNumeric {
                continue;
            }
            let mut values = records
                .iter()
                .map(|r| r.values[idx].as_number().unwrap_or(f64::NAN));
            let first = values.next().unwrap_or(f64::NAN);
            let mut range = NumericRange::point(first);
            values.for_each(|x| range.include(x));
            global_ranges[idx] = Some(range);
        }
        Ok(Self {
            schema,
            records,
            global_ranges,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, id: usize) -> Result<&Record> {
        self.records.get(id).ok_or(Error::UnknownRecord(id))
    }

    pub fn value(&self, id: usize, attr: usize) -> &Value {
        &self.records[id].values[attr]
    }

    /// Global (μN_min, μN_max) of a quasi-numeric attribute by schema index.
    pub fn global_range_at(&self, attr: usize) -> Option<NumericRange> {
        self.global_ranges.get(attr).copied().flatten()
    }

    pub fn global_range(&self, name: &str) -> Option<NumericRange> {
        self.schema
            .index_of(name)
            .and_then(|i| self.global_range_at(i))
    }

    /// Record ids ordered ascending by a quasi-numeric attribute. Ties fall back to
    /// the full value tuple in schema order, then to the record id.
    pub fn sort_view(&self, attr: &str) -> Result<Vec<usize>> {
        let idx = self.numeric_index(attr)?;
        let mut ids: Vec<usize> = (0..self.records.len()).collect();
        ids.sort_by(|&a, &b| {
            let (ra, rb) = (&self.records[a], &self.records[b]);
            ra.values[idx]
                .total_cmp(&rb.values[idx])
                .then_with(|| {
                    ra.values
                        .iter()
                        .zip(&rb.values)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(Ordering::Equal)
                })
                .then(a.cmp(&b))
        });
        Ok(ids)
    }

    pub(crate) fn numeric_index(&self, attr: &str) -> Result<usize> {
        let idx = self
            .schema
            .index_of(attr)
            .ok_or_else(|| Error::UnknownAttribute(attr.to_string()))?;
        if self.schema.attributes()[idx].role != AttributeRole::QuasiNumeric {
            return Err(Error::NotNumeric(attr.to_string()));
        }
        Ok(idx)
    }

    /// Drop every identifier attribute. Remaining values are untouched.
    pub fn strip_identifiers(&self) -> Result<Dataset> {
        let keep: Vec<usize> = self
            .schema
            .attributes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role != AttributeRole::Identifier)
            .map(|(i, _)| i)
            .collect();
        if keep.len() == self.schema.len() {
            return Ok(self.clone());
        }
        let attributes = keep
            .iter()
            .map(|&i| self.schema.attributes()[i].clone())
            .collect();
        let schema = AttributeSchema::new(attributes)?;
        let records = self
            .records
            .iter()
            .map(|r| Record {
                id: r.id,
                values: keep.iter().map(|&i| r.values[i].clone()).collect(),
            })
            .collect();
        let global_ranges = keep.iter().map(|&i| self.global_ranges[i]).collect();
        Ok(Dataset {
            schema,
            records,
            global_ranges,
        })
    }
}

fn parse_value(row: usize, attr: &Attribute, field: &str) -> Result<Value> {
    if field.is_empty() {
        return Err(Error::MissingValue {
            row,
            column: attr.name.clone(),
        });
    }
    if attr.role == AttributeRole::QuasiNumeric {
        match field.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Number(x)),
            _ => Err(Error::NonNumeric {
                row,
                column: attr.name.clone(),
                value: field.to_string(),
            }),
        }
    } else {
        Ok(Value::Text(field.to_string()))
    }
}

/// Parse a CSV whose first row is a header naming every schema attribute. Extra
/// columns are ignored.
pub fn load_dataset<R: Read>(source: R, schema: AttributeSchema) -> Result<Dataset> {
    let mut reader = csv_reader(true).from_reader(source);
    let header: Vec<String> = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => {
            h.iter().map(str::to_string).collect()
        }
        Ok(_) => return Err(Error::EmptyInput),
        Err(e) => return Err(e.into()),
    };
    read_body(reader, &header, schema)
}

/// Parse a CSV without a header row, naming its columns by `columns`.
pub fn load_dataset_headerless<R: Read>(
    source: R,
    schema: AttributeSchema,
    columns: &[String],
) -> Result<Dataset> {
    let reader = csv_reader(false).from_reader(source);
    read_body(reader, columns, schema)
}

fn csv_reader(has_headers: bool) -> csv::ReaderBuilder {
    let mut builder = csv::ReaderBuilder::new();
    builder.has_headers(has_headers).trim(csv::Trim::All);
    builder
}

fn read_body<R: Read>(
    mut reader: csv::Reader<R>,
    header: &[String],
    schema: AttributeSchema,
) -> Result<Dataset> {
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        if positions.insert(name.as_str(), i).is_some() {
            return Err(Error::DuplicateHeader(name.clone()));
        }
    }
    let columns = schema
        .attributes()
        .iter()
        .map(|a| {
            positions
                .get(a.name.as_str())
                .copied()
                .ok_or_else(|| Error::MissingColumn(a.name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        // Blank lines (a trailing newline in headerless files) carry no record.
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        let values = schema
            .attributes()
            .iter()
            .zip(&columns)
            .map(|(attr, &col)| parse_value(records.len(), attr, row.get(col).unwrap_or("")))
            .collect::<Result<Vec<_>>>()?;
        records.push(Record {
            id: records.len(),
            values,
        });
    }
    Dataset::from_records(schema, records)
}
