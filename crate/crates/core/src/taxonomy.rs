//! Generalization hierarchies for categorical attributes and suffix masking.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use crate::dataset::{Attribute, MaskRule};
use crate::error::{Error, Result};

/// Non-empty set of raw categorical values observed in one cluster.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ValueUnion(BTreeSet<String>);

impl ValueUnion {
    pub fn new<I, S>(values: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = values.into_iter().map(Into::into).collect();
        (!set.is_empty()).then_some(Self(set))
    }

    pub fn singleton(value: impl Into<String>) -> Self {
        Self(BTreeSet::from([value.into()]))
    }

    pub(crate) fn insert(&mut self, value: &str) {
        if !self.0.contains(value) {
            self.0.insert(value.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, value: &str) -> bool {
        self.0.contains(value)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Rooted tree over the labels of one categorical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyTree {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    /// Longest downward path from each node to a leaf.
    below: Vec<usize>,
    root: usize,
}

impl TaxonomyTree {
    /// Build a tree from `(parent, child)` edges. `lone_root` names a node that may
    /// appear without edges, which is how a single-node tree is declared.
    pub fn from_edges<I, S>(edges: I, lone_root: Option<&str>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut intern = |label: &str| -> usize {
            *index.entry(label.to_string()).or_insert_with(|| {
                labels.push(label.to_string());
                parent.push(None);
                labels.len() - 1
            })
        };

        let mut links = Vec::new();
        for (p, c) in edges {
            links.push((intern(p.as_ref()), intern(c.as_ref())));
        }
        if let Some(root) = lone_root {
            intern(root);
        }
        for (p, c) in links {
            if parent[c].is_some() {
                return Err(Error::DuplicateChild(labels[c].clone()));
            }
            if p == c {
                return Err(Error::Cycle(labels[c].clone()));
            }
            parent[c] = Some(p);
        }

        if labels.is_empty() {
            return Err(Error::EmptyTaxonomy);
        }
        let roots: Vec<usize> = (0..labels.len()).filter(|&i| parent[i].is_none()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::Cycle(labels[0].clone())),
            _ => {
                return Err(Error::MultipleRoots(
                    roots.iter().map(|&i| labels[i].clone()).collect(),
                ))
            }
        };

        // With one parent per node, any node that cannot reach the root sits on a cycle.
        let mut depth: Vec<Option<usize>> = vec![None; labels.len()];
        depth[root] = Some(0);
        for start in 0..labels.len() {
            let mut path = Vec::new();
            let mut node = start;
            while depth[node].is_none() {
                if path.len() > labels.len() {
                    return Err(Error::Cycle(labels[start].clone()));
                }
                path.push(node);
                node = parent[node].expect("only the root lacks a parent");
            }
            let mut d = depth[node].unwrap_or(0);
            for &n in path.iter().rev() {
                d += 1;
                depth[n] = Some(d);
            }
        }
        let depth: Vec<usize> = depth.into_iter().map(|d| d.unwrap_or(0)).collect();

        let mut below = vec![0usize; labels.len()];
        let mut by_depth: Vec<usize> = (0..labels.len()).collect();
        by_depth.sort_by(|a, b| depth[*b].cmp(&depth[*a]));
        for n in by_depth {
            if let Some(p) = parent[n] {
                below[p] = below[p].max(below[n] + 1);
            }
        }

        Ok(Self {
            labels,
            index,
            parent,
            depth,
            below,
            root,
        })
    }

    /// Read a CSV edge list of `parent,child` lines. A line holding a single label
    /// declares a root with no children. A leading `parent,child` header is skipped.
    pub fn load<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut edges = Vec::new();
        let mut lone_root: Option<String> = None;
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let fields: Vec<&str> = row.iter().filter(|f| !f.is_empty()).collect();
            match fields.as_slice() {
                [] => continue,
                [p, c]
                    if i == 0
                        && p.eq_ignore_ascii_case("parent")
                        && c.eq_ignore_ascii_case("child") =>
                {
                    continue
                }
                [p, c] => edges.push((p.to_string(), c.to_string())),
                [r] => {
                    if lone_root.replace(r.to_string()).is_some() {
                        return Err(Error::MalformedTaxonomy {
                            line: i + 1,
                            reason: "more than one root-only line".into(),
                        });
                    }
                }
                _ => {
                    return Err(Error::MalformedTaxonomy {
                        line: i + 1,
                        reason: format!("expected `parent,child`, found {} fields", fields.len()),
                    })
                }
            }
        }
        Self::from_edges(edges, lone_root.as_deref())
    }

    pub fn root_label(&self) -> &str {
        &self.labels[self.root]
    }

    /// H(ξ): number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.below[self.root]
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn is_leaf(&self, label: &str) -> bool {
        self.index.get(label).is_some_and(|&i| self.below[i] == 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &str> {
        (0..self.labels.len())
            .filter(|&i| self.below[i] == 0)
            .map(|i| self.labels[i].as_str())
    }

    /// Whether `ancestor` lies on the path from `label` to the root (inclusive).
    pub fn is_ancestor_or_self(&self, ancestor: &str, label: &str) -> bool {
        let (Some(&a), Some(&l)) = (self.index.get(ancestor), self.index.get(label)) else {
            return false;
        };
        let mut node = Some(l);
        while let Some(n) = node {
            if n == a {
                return true;
            }
            node = self.parent[n];
        }
        false
    }

    fn leaf_index(&self, label: &str) -> Result<usize> {
        let &i = self
            .index
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if self.below[i] != 0 {
            return Err(Error::NotALeaf(label.to_string()));
        }
        Ok(i)
    }

    fn lca_index(&self, u: &ValueUnion) -> Result<usize> {
        let mut nodes = u.iter().map(|v| self.leaf_index(v));
        let mut acc = nodes
            .next()
            .ok_or_else(|| Error::UnknownLabel(String::new()))??;
        for node in nodes {
            let mut b = node?;
            let mut a = acc;
            while self.depth[a] > self.depth[b] {
                a = self.parent[a].expect("non-root has a parent");
            }
            while self.depth[b] > self.depth[a] {
                b = self.parent[b].expect("non-root has a parent");
            }
            while a != b {
                a = self.parent[a].expect("non-root has a parent");
                b = self.parent[b].expect("non-root has a parent");
            }
            acc = a;
        }
        Ok(acc)
    }

    /// H(U): height of the subtree rooted at the lowest common ancestor of `u`;
    /// zero for a single value.
    pub fn union_height(&self, u: &ValueUnion) -> Result<usize> {
        Ok(self.below[self.lca_index(u)?])
    }

    /// Label of the lowest common ancestor of `u`, or the root when
    /// `always_generalize` is set.
    pub fn generalize_label(&self, u: &ValueUnion, always_generalize: bool) -> Result<&str> {
        let lca = self.lca_index(u)?;
        Ok(if always_generalize {
            self.root_label()
        } else {
            &self.labels[lca]
        })
    }
}

/// Replace the last `rule.suffix_len` characters with `rule.mask_char`.
pub fn mask_suffix(value: &str, rule: &MaskRule) -> Result<String> {
    let len = value.chars().count();
    if len < rule.suffix_len {
        return Err(Error::MaskTooLong {
            value: value.to_string(),
            suffix_len: rule.suffix_len,
        });
    }
    let mut out: String = value.chars().take(len - rule.suffix_len).collect();
    out.extend(std::iter::repeat_n(rule.mask_char, rule.suffix_len));
    Ok(out)
}

/// How a categorical attribute is generalized.
#[derive(Debug, Clone, Copy)]
pub enum Generalizer<'a> {
    Taxonomy(&'a TaxonomyTree),
    /// Implicit two-level hierarchy: the raw value under its masked form.
    Mask(&'a MaskRule),
}

/// Taxonomy trees bound to categorical attributes, together with the set of
/// attributes that are generalized in every cluster regardless of content.
#[derive(Debug, Clone, Default)]
pub struct Hierarchies {
    trees: BTreeMap<String, TaxonomyTree>,
    always_generalize: BTreeSet<String>,
}

impl Hierarchies {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tree(mut self, attr: impl Into<String>, tree: TaxonomyTree) -> Self {
        self.insert_tree(attr, tree);
        self
    }

    pub fn with_always_generalize(mut self, attr: impl Into<String>) -> Self {
        self.always_generalize.insert(attr.into());
        self
    }

    pub fn insert_tree(&mut self, attr: impl Into<String>, tree: TaxonomyTree) {
        self.trees.insert(attr.into(), tree);
    }

    pub fn set_always_generalize(&mut self, attr: impl Into<String>) {
        self.always_generalize.insert(attr.into());
    }

    pub fn tree(&self, attr: &str) -> Option<&TaxonomyTree> {
        self.trees.get(attr)
    }

    pub fn always_generalizes(&self, attr: &str) -> bool {
        self.always_generalize.contains(attr)
    }

    pub fn generalizer<'a>(&'a self, attr: &'a Attribute) -> Result<Generalizer<'a>> {
        if let Some(tree) = self.trees.get(&attr.name) {
            return Ok(Generalizer::Taxonomy(tree));
        }
        attr.mask_rule
            .as_ref()
            .map(Generalizer::Mask)
            .ok_or_else(|| Error::MissingTaxonomy(attr.name.clone()))
    }

    /// H(U)/H(ξ) for one attribute of one cluster.
    pub fn categorical_term(&self, attr: &Attribute, u: &ValueUnion) -> Result<f64> {
        let always = self.always_generalizes(&attr.name);
        match self.generalizer(attr)? {
            Generalizer::Taxonomy(tree) => {
                // Validates labels even when the term is fixed by policy.
                let h = tree.union_height(u)?;
                let height = tree.height();
                Ok(match (height, always) {
                    (0, _) => 0.0,
                    (_, true) => 1.0,
                    (height, false) => h as f64 / height as f64,
                })
            }
            Generalizer::Mask(_) => Ok(if always || !u.is_singleton() {
                1.0
            } else {
                0.0
            }),
        }
    }

    /// Released text shared by every member of a cluster whose values form `u`.
    /// Masked values that still disagree after masking are suppressed entirely.
    pub fn render(&self, attr: &Attribute, u: &ValueUnion) -> Result<String> {
        let always = self.always_generalizes(&attr.name);
        match self.generalizer(attr)? {
            Generalizer::Taxonomy(tree) => tree.generalize_label(u, always).map(str::to_string),
            Generalizer::Mask(rule) => {
                if !always && u.is_singleton() {
                    return Ok(u.iter().next().unwrap_or_default().to_string());
                }
                let masked = u
                    .iter()
                    .map(|v| mask_suffix(v, rule))
                    .collect::<Result<BTreeSet<_>>>()?;
                if masked.len() == 1 {
                    Ok(masked.into_iter().next().unwrap_or_default())
                } else {
                    let width = u.iter().map(|v| v.chars().count()).max().unwrap_or(0);
                    Ok(std::iter::repeat_n(rule.mask_char, width).collect())
                }
            }
        }
    }
}
