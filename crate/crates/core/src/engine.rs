//! Partition builders: sensitive-value clustering and the sorted-block baseline,
//! plus the optional minimum-size pass and table generalization.

use std::collections::HashMap;

use crate::anonymized::{AnonymizedRow, AnonymizedTable};
use crate::dataset::{AttributeRole, Dataset};
use crate::error::{Error, Result};
use crate::information_loss::Partition;
use crate::taxonomy::Hierarchies;

pub const DEFAULT_INTERVAL_SEPARATOR: &str = " - ";

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub k: usize,
    /// Quasi-numeric attribute records are sorted on.
    pub primary_sort_attr: String,
    /// Merge clusters smaller than `k` into their nearest neighbour.
    pub merge_small_clusters: bool,
    /// Text placed between the bounds of a rendered numeric interval.
    pub interval_separator: String,
}

impl EngineConfig {
    pub fn new(k: usize, primary_sort_attr: impl Into<String>) -> Self {
        Self {
            k,
            primary_sort_attr: primary_sort_attr.into(),
            merge_small_clusters: false,
            interval_separator: DEFAULT_INTERVAL_SEPARATOR.to_string(),
        }
    }

    pub fn with_merging(mut self, merge: bool) -> Self {
        self.merge_small_clusters = merge;
        self
    }

    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidK);
        }
        ds.numeric_index(&self.primary_sort_attr).map(|_| ())
    }
}

/// One cluster per distinct sensitive value, built over the records sorted by the
/// primary attribute. Clusters come out ordered by their smallest primary value.
pub fn propose_clusters(ds: &Dataset, cfg: &EngineConfig) -> Result<Partition> {
    cfg.validate(ds)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sensitive = ds.schema().sensitive_index();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for id in ds.sort_view(&cfg.primary_sort_attr)? {
        let key = ds.value(id, sensitive).as_text().unwrap_or_default();
        let i = *slot.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[i].push(id);
    }
    Partition::from_blocks(ds, groups)
}

/// Sorted records split into ⌊n/k⌋ consecutive blocks whose sizes differ by at
/// most one, larger blocks first.
pub fn systematic_clusters(ds: &Dataset, cfg: &EngineConfig) -> Result<Partition> {
    cfg.validate(ds)?;
    let n = ds.len();
    if n < cfg.k {
        return Err(Error::Infeasible { n, k: cfg.k });
    }
    let order = ds.sort_view(&cfg.primary_sort_attr)?;
    let groups = n / cfg.k;
    let (base, extra) = (n / groups, n % groups);
    let mut blocks = Vec::with_capacity(groups);
    let mut rest = order.as_slice();
    for g in 0..groups {
        let size = base + usize::from(g < extra);
        let (head, tail) = rest.split_at(size);
        blocks.push(head.to_vec());
        rest = tail;
    }
    Partition::from_blocks(ds, blocks)
}

/// Merge undersized clusters until every cluster has at least `k` members. Each
/// step takes the smallest undersized cluster and folds it into the cluster with
/// the nearest primary-attribute mean (ties go to the smaller mean). Returns the
/// partition unchanged when merging is disabled.
pub fn enforce_k(p: &Partition, ds: &Dataset, cfg: &EngineConfig) -> Result<Partition> {
    cfg.validate(ds)?;
    let n: usize = p.sizes().iter().sum();
    if n < cfg.k {
        return Err(Error::Infeasible { n, k: cfg.k });
    }
    if !cfg.merge_small_clusters {
        return Ok(p.clone());
    }

    let attr = ds.numeric_index(&cfg.primary_sort_attr)?;
    let mut rank = vec![0usize; ds.len()];
    for (r, id) in ds
        .sort_view(&cfg.primary_sort_attr)?
        .into_iter()
        .enumerate()
    {
        rank[id] = r;
    }
    let primary = |id: usize| ds.value(id, attr).as_number().unwrap_or(0.0);

    struct Group {
        members: Vec<usize>,
        sum: f64,
    }
    impl Group {
        fn mean(&self) -> f64 {
            self.sum / self.members.len() as f64
        }
    }

    let mut groups: Vec<Group> = p
        .clusters()
        .iter()
        .map(|c| Group {
            members: c.members().to_vec(),
            sum: c.members().iter().map(|&id| primary(id)).sum(),
        })
        .collect();

    while let Some(small) = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.members.len() < cfg.k)
        .min_by_key(|(i, g)| (g.members.len(), *i))
        .map(|(i, _)| i)
    {
        let mean = groups[small].mean();
        let target = groups
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != small)
            .min_by(|(i, a), (j, b)| {
                let (da, db) = ((a.mean() - mean).abs(), (b.mean() - mean).abs());
                da.total_cmp(&db)
                    .then(a.mean().total_cmp(&b.mean()))
                    .then(i.cmp(j))
            })
            .map(|(i, _)| i)
            .expect("at least two clusters remain while one is undersized");
        let absorbed = groups.remove(small);
        let target = if target > small { target - 1 } else { target };
        let into = &mut groups[target];
        into.sum += absorbed.sum;
        into.members.extend(absorbed.members);
        into.members.sort_by_key(|&id| rank[id]);
        groups.sort_by_key(|g| rank[g.members[0]]);
    }

    Partition::from_blocks(ds, groups.into_iter().map(|g| g.members).collect())
}

/// Render every record of every cluster and aggregate identical released rows.
pub fn generalize_partition(
    p: &Partition,
    ds: &Dataset,
    cfg: &EngineConfig,
    trees: &Hierarchies,
) -> Result<AnonymizedTable> {
    let schema = ds.schema();
    let quasi: Vec<usize> = schema.quasi_indices().collect();
    let sensitive = schema.sensitive_index();

    let mut rows: Vec<AnonymizedRow> = Vec::new();
    let mut row_of: HashMap<(Vec<String>, String), usize> = HashMap::new();
    let mut record_rows = vec![usize::MAX; ds.len()];

    for cluster in p.clusters() {
        let generalized = quasi
            .iter()
            .map(|&idx| {
                let attr = &schema.attributes()[idx];
                if attr.role == AttributeRole::QuasiNumeric {
                    let range = cluster
                        .numeric_range(&attr.name)
                        .expect("numeric range present");
                    Ok(render_interval(
                        range.min,
                        range.max,
                        &cfg.interval_separator,
                    ))
                } else {
                    let union = cluster
                        .categorical_union(&attr.name)
                        .expect("categorical union present");
                    trees.render(attr, union)
                }
            })
            .collect::<Result<Vec<_>>>()?;

        for &id in cluster.members() {
            let key = (generalized.clone(), ds.value(id, sensitive).to_string());
            let row = match row_of.get(&key) {
                Some(&row) => row,
                None => {
                    rows.push(AnonymizedRow {
                        generalized_values: key.0.clone(),
                        sensitive_value: key.1.clone(),
                        count: 0,
                    });
                    row_of.insert(key, rows.len() - 1);
                    rows.len() - 1
                }
            };
            rows[row].count += 1;
            record_rows[id] = row;
        }
    }

    Ok(AnonymizedTable {
        quasi_attrs: quasi
            .iter()
            .map(|&i| schema.attributes()[i].name.clone())
            .collect(),
        sensitive_attr: schema.sensitive().name.clone(),
        rows,
        record_rows,
        k_declared: cfg.k,
        source_n: ds.len(),
    })
}

/// `"lo - hi"`, or the bare value when both bounds coincide.
pub fn render_interval(lo: f64, hi: f64, separator: &str) -> String {
    if lo == hi {
        format!("{lo}")
    } else {
        format!("{lo}{separator}{hi}")
    }
}
