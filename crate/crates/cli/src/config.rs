//! Run configuration: a TOML file with flat keys and an `[[attributes]]` list,
//! overridden by command-line flags.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::ValueEnum;
use kanon::{
    Attribute, AttributeRole, AttributeSchema, EngineConfig, Hierarchies, MaskRule, TaxonomyTree,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IlChoice {
    Canonical,
    Legacy,
    Both,
}

impl IlChoice {
    pub fn canonical(self) -> bool {
        matches!(self, IlChoice::Canonical | IlChoice::Both)
    }

    pub fn legacy(self) -> bool {
        matches!(self, IlChoice::Legacy | IlChoice::Both)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskSpec {
    suffix_len: usize,
    #[serde(default = "default_mask_char")]
    mask_char: char,
}

fn default_mask_char() -> char {
    '*'
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeSpec {
    name: String,
    role: AttributeRole,
    taxonomy: Option<PathBuf>,
    mask: Option<MaskSpec>,
    #[serde(default)]
    always_generalize: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    metrics: Option<PathBuf>,
    method: Option<Method>,
    il_variant: Option<IlChoice>,
    k: Option<usize>,
    aggregate_output: Option<bool>,
    primary_sort_attr: Option<String>,
    merge_small_clusters: Option<bool>,
    interval_separator: Option<String>,
    /// Column names for input files without a header row.
    columns: Option<Vec<String>>,
    attributes: Vec<AttributeSpec>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub method: Option<Method>,
    pub k: Option<usize>,
    pub il_variant: Option<IlChoice>,
    pub aggregate: Option<bool>,
    pub merge_small: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub metrics_path: Option<PathBuf>,
    pub method: Method,
    pub il_variant: IlChoice,
    pub k: usize,
    pub aggregate_output: bool,
    pub columns: Option<Vec<String>>,
    pub schema: AttributeSchema,
    pub engine: EngineConfig,
    /// Taxonomy files per attribute, already resolved against the config location.
    pub taxonomies: Vec<(String, PathBuf)>,
    pub always_generalize: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::parse(&text, &base, overrides)
    }

    pub fn parse(text: &str, base: &Path, overrides: Overrides) -> anyhow::Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        let relative = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let input_path = overrides
            .input
            .or_else(|| file.input.map(relative))
            .ok_or_else(|| anyhow!("no input path given"))?;
        let output_path = overrides.output.or_else(|| file.output.map(relative));
        let metrics_path = overrides.metrics.or_else(|| file.metrics.map(relative));
        for p in [
            Some(&input_path),
            output_path.as_ref(),
            metrics_path.as_ref(),
        ]
        .into_iter()
        .flatten()
        {
            if p.as_os_str().is_empty() {
                bail!("paths must not be empty");
            }
        }

        let k = overrides
            .k
            .or(file.k)
            .ok_or_else(|| anyhow!("k is not set"))?;
        if k == 0 {
            bail!("k must be at least 1");
        }

        let mut attributes = Vec::with_capacity(file.attributes.len());
        let mut taxonomies = Vec::new();
        let mut always_generalize = Vec::new();
        for spec in file.attributes {
            let mut attr = Attribute::new(spec.name.clone(), spec.role);
            if let Some(tax) = spec.taxonomy {
                attr = attr.with_taxonomy(tax.to_string_lossy());
                taxonomies.push((spec.name.clone(), relative(tax)));
            }
            if let Some(mask) = spec.mask {
                attr = attr.with_mask(MaskRule::new(mask.suffix_len, mask.mask_char));
            }
            if spec.always_generalize {
                if spec.role != AttributeRole::QuasiCategorical {
                    bail!(
                        "always_generalize is only meaningful on quasi-categorical attribute {:?}",
                        spec.name
                    );
                }
                always_generalize.push(spec.name);
            }
            attributes.push(attr);
        }
        let schema = AttributeSchema::new(attributes)?;

        let primary = match file.primary_sort_attr {
            Some(name) => name,
            None => schema
                .attributes()
                .iter()
                .find(|a| a.role == AttributeRole::QuasiNumeric)
                .map(|a| a.name.clone())
                .ok_or_else(|| anyhow!("schema has no quasi-numeric attribute to sort on"))?,
        };
        match schema.get(&primary) {
            Some(a) if a.role == AttributeRole::QuasiNumeric => {}
            Some(_) => bail!("primary_sort_attr {primary:?} is not quasi-numeric"),
            None => bail!("primary_sort_attr {primary:?} is not in the attribute list"),
        }

        let mut engine = EngineConfig::new(k, primary).with_merging(
            overrides
                .merge_small
                .or(file.merge_small_clusters)
                .unwrap_or(false),
        );
        if let Some(sep) = file.interval_separator {
            engine.interval_separator = sep;
        }

        Ok(Self {
            input_path,
            output_path,
            metrics_path,
            method: overrides.method.or(file.method).unwrap_or(Method::Proposed),
            il_variant: overrides
                .il_variant
                .or(file.il_variant)
                .unwrap_or(IlChoice::Both),
            k,
            aggregate_output: overrides
                .aggregate
                .or(file.aggregate_output)
                .unwrap_or(true),
            columns: file.columns,
            schema,
            engine,
            taxonomies,
            always_generalize,
        })
    }

    /// Read every taxonomy file and attach the always-generalize policy.
    pub fn load_hierarchies(&self) -> anyhow::Result<Hierarchies> {
        let mut trees = Hierarchies::new();
        for (attr, path) in &self.taxonomies {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let tree = TaxonomyTree::load(file)
                .with_context(|| format!("taxonomy {} for {attr:?}", path.display()))?;
            trees.insert_tree(attr.clone(), tree);
        }
        for attr in &self.always_generalize {
            trees.set_always_generalize(attr.clone());
        }
        Ok(trees)
    }
}
