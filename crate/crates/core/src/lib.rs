//! k-anonymization by sensitive-attribute clustering.
//!
//! The pipeline is: load a [`Dataset`] against an [`AttributeSchema`], strip
//! identifiers, build a [`Partition`] with [`propose_clusters`] (one cluster per
//! sensitive value) or the [`systematic_clusters`] baseline, optionally enforce a
//! minimum cluster size with [`enforce_k`], then release a generalized
//! [`AnonymizedTable`]. [`total_il_canonical`] and [`total_il_legacy`] score a
//! partition, and [`optimal_partition`] gives the exact optimum on tiny inputs.

pub mod anonymized;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod information_loss;
pub mod oracle;
pub mod taxonomy;

pub use anonymized::{verify_k_anonymity, AnonymizedRow, AnonymizedTable, Violation};
pub use dataset::{
    load_dataset, load_dataset_headerless, Attribute, AttributeRole, AttributeSchema, Dataset,
    MaskRule, NumericRange, Record, Value,
};
pub use engine::{
    enforce_k, generalize_partition, propose_clusters, render_interval, systematic_clusters,
    EngineConfig,
};
pub use error::{Error, Result};
pub use information_loss::{
    cluster_il_canonical, total_il_canonical, total_il_legacy, Cluster, ClusterLoss, IlReport,
    IlVariant, Partition,
};
pub use oracle::{
    bell_number, enumerate_partitions, optimal_partition, OracleResult, SetPartitions,
};
pub use taxonomy::{mask_suffix, Hierarchies, TaxonomyTree, ValueUnion};
