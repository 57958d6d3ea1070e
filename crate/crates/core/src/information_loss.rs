//! Clusters, partitions and the information-loss metric.
//!
//! Two variants are provided. The canonical one is
//!
//! ```text
//! IL = Σ_clusters |τ| · ( Σ_numeric (N_max − N_min) / (μN_max − μN_min)
//!                        + Σ_categorical H(U) / H(ξ) )
//! ```
//!
//! The legacy one replays a fixed accumulation used by an older reference
//! implementation: two constant categorical terms plus an index-dependent
//! `(i + 1) / C` term, over a single numeric attribute. It depends on cluster order
//! and is kept only for comparison with previously reported figures.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{AttributeRole, Dataset, NumericRange, Value};
use crate::error::{Error, Result};
use crate::taxonomy::{Hierarchies, ValueUnion};

/// A group of records with its per-attribute summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    members: Vec<usize>,
    numeric_ranges: BTreeMap<String, NumericRange>,
    categorical_unions: BTreeMap<String, ValueUnion>,
}

impl Cluster {
    /// Summarize `members` (kept in the given order) over every quasi-identifier.
    pub fn from_members(ds: &Dataset, members: Vec<usize>) -> Result<Self> {
        let Some(&first) = members.first() else {
            return Err(Error::InvalidPartition("empty cluster".into()));
        };
        for &id in &members {
            ds.record(id)?;
        }
        let mut numeric_ranges = BTreeMap::new();
        let mut categorical_unions = BTreeMap::new();
        for (idx, attr) in ds.schema().attributes().iter().enumerate() {
            match attr.role {
                AttributeRole::QuasiNumeric => {
                    let mut range = NumericRange::point(number(ds.value(first, idx)));
                    for &id in &members[1..] {
                        range.include(number(ds.value(id, idx)));
                    }
                    numeric_ranges.insert(attr.name.clone(), range);
                }
                AttributeRole::QuasiCategorical => {
                    let mut union = ValueUnion::singleton(text(ds.value(first, idx)));
                    for &id in &members[1..] {
                        union.insert(text(ds.value(id, idx)));
                    }
                    categorical_unions.insert(attr.name.clone(), union);
                }
                AttributeRole::Identifier | AttributeRole::Sensitive => {}
            }
        }
        Ok(Self {
            members,
            numeric_ranges,
            categorical_unions,
        })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn numeric_range(&self, attr: &str) -> Option<NumericRange> {
        self.numeric_ranges.get(attr).copied()
    }

    pub fn categorical_union(&self, attr: &str) -> Option<&ValueUnion> {
        self.categorical_unions.get(attr)
    }
}

fn number(v: &Value) -> f64 {
    v.as_number().expect("quasi-numeric values are numbers")
}

fn text(v: &Value) -> &str {
    v.as_text().expect("categorical values are text")
}

/// Disjoint clusters covering every record of a dataset exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Cluster>,
}

impl Partition {
    pub fn new(ds: &Dataset, clusters: Vec<Cluster>) -> Result<Self> {
        let mut seen = vec![false; ds.len()];
        for cluster in &clusters {
            for &id in cluster.members() {
                let slot = seen.get_mut(id).ok_or(Error::UnknownRecord(id))?;
                if std::mem::replace(slot, true) {
                    return Err(Error::InvalidPartition(format!(
                        "record {id} appears in more than one cluster"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "record {missing} is not in any cluster"
            )));
        }
        Ok(Self { clusters })
    }

    pub fn from_blocks(ds: &Dataset, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let clusters = blocks
            .into_iter()
            .map(|b| Cluster::from_members(ds, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ds, clusters)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::size).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    pub fn into_clusters(self) -> Vec<Cluster> {
        self.clusters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IlVariant {
    Canonical,
    Legacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterLoss {
    pub cluster: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IlReport {
    pub variant: IlVariant,
    pub per_cluster: Vec<ClusterLoss>,
    pub total: f64,
}

impl IlReport {
    fn from_losses(variant: IlVariant, losses: Vec<f64>) -> Self {
        let total = losses.iter().sum();
        let per_cluster = losses
            .into_iter()
            .enumerate()
            .map(|(cluster, loss)| ClusterLoss { cluster, loss })
            .collect();
        Self {
            variant,
            per_cluster,
            total,
        }
    }
}

/// Canonical loss of one cluster: |τ| times the sum of normalized numeric ranges
/// and normalized categorical union heights. The sensitive attribute contributes
/// nothing; a constant numeric column contributes zero.
pub fn cluster_il_canonical(c: &Cluster, ds: &Dataset, trees: &Hierarchies) -> Result<f64> {
    let mut per_record = 0.0;
    for (idx, attr) in ds.schema().attributes().iter().enumerate() {
        match attr.role {
            AttributeRole::QuasiNumeric => {
                let range = c.numeric_ranges.get(&attr.name).ok_or_else(|| {
                    Error::InvalidPartition(format!("cluster lacks range for {:?}", attr.name))
                })?;
                let global = ds
                    .global_range_at(idx)
                    .expect("numeric attributes carry a global range");
                if global.width() > 0.0 {
                    per_record += range.width() / global.width();
                }
            }
            AttributeRole::QuasiCategorical => {
                let union = c.categorical_unions.get(&attr.name).ok_or_else(|| {
                    Error::InvalidPartition(format!("cluster lacks values for {:?}", attr.name))
                })?;
                per_record += trees.categorical_term(attr, union)?;
            }
            AttributeRole::Identifier | AttributeRole::Sensitive => {}
        }
    }
    Ok(c.size() as f64 * per_record)
}

/// Canonical loss of every cluster, summed in cluster order.
pub fn total_il_canonical(p: &Partition, ds: &Dataset, trees: &Hierarchies) -> Result<IlReport> {
    let losses = p
        .clusters
        .iter()
        .map(|c| cluster_il_canonical(c, ds, trees))
        .collect::<Result<Vec<_>>>()?;
    Ok(IlReport::from_losses(IlVariant::Canonical, losses))
}

/// Legacy accumulation over clusters in their given order:
/// `Σ_i |τ_i| · ((max_i − min_i)/(Tmax − Tmin) + 1 + 1 + (i + 1)/C)`.
pub fn total_il_legacy(p: &Partition, ds: &Dataset, primary_attr: &str) -> Result<IlReport> {
    let idx = ds.numeric_index(primary_attr)?;
    let global = ds
        .global_range_at(idx)
        .expect("numeric attributes carry a global range");
    let count = p.len() as f64;
    let losses = p
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let range = c.numeric_ranges[primary_attr];
            let numeric = if global.width() > 0.0 {
                range.width() / global.width()
            } else {
                0.0
            };
            c.size() as f64 * (numeric + 1.0 + 1.0 + (i + 1) as f64 / count)
        })
        .collect();
    Ok(IlReport::from_losses(IlVariant::Legacy, losses))
}
