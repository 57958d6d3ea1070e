//! Subcommand implementations. Each returns the bytes it would emit so the binary
//! can decide where they go, and every failure carries the stage it came from.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use kanon::{
    enforce_k, generalize_partition, load_dataset, load_dataset_headerless, optimal_partition,
    propose_clusters, systematic_clusters, total_il_canonical, total_il_legacy, verify_k_anonymity,
    AnonymizedTable, Dataset, Hierarchies, IlReport, Partition, Violation,
};
use serde::Serialize;

use crate::config::{Method, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Taxonomy,
    Cluster,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Taxonomy => "taxonomy",
            Stage::Cluster => "cluster",
            Stage::Write => "write",
        })
    }
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub stage: Stage,
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(stage: Stage, error: impl Into<anyhow::Error>) -> Self {
        let error = error.into();
        let infeasible = error
            .downcast_ref::<kanon::Error>()
            .is_some_and(kanon::Error::is_infeasible);
        let code = match stage {
            _ if infeasible => EXIT_INFEASIBLE,
            Stage::Config => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        Self { stage, code, error }
    }

    pub fn infeasible(stage: Stage, error: impl Into<anyhow::Error>) -> Self {
        Self {
            stage,
            code: EXIT_INFEASIBLE,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {:#}", self.stage, self.error)
    }
}

pub type RunResult<T> = Result<T, Failure>;

trait StageExt<T> {
    fn at(self, stage: Stage) -> RunResult<T>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn at(self, stage: Stage) -> RunResult<T> {
        self.map_err(|e| Failure::new(stage, e))
    }
}

/// Dataset with identifiers removed, plus the loaded hierarchies.
pub struct Prepared {
    pub ds: Dataset,
    pub trees: Hierarchies,
}

pub fn prepare(cfg: &RunConfig) -> RunResult<Prepared> {
    let file = File::open(&cfg.input_path)
        .map_err(|e| anyhow::anyhow!("opening {}: {e}", cfg.input_path.display()))
        .at(Stage::Load)?;
    let ds = match &cfg.columns {
        Some(columns) => load_dataset_headerless(file, cfg.schema.clone(), columns),
        None => load_dataset(file, cfg.schema.clone()),
    }
    .at(Stage::Load)?
    .strip_identifiers()
    .at(Stage::Load)?;
    let trees = cfg.load_hierarchies().at(Stage::Taxonomy)?;
    Ok(Prepared { ds, trees })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub method: Method,
    pub k: usize,
    pub n_records: usize,
    pub n_clusters: usize,
    pub cluster_sizes: Vec<usize>,
    pub il_canonical: Option<f64>,
    pub il_legacy: Option<f64>,
    /// Wall-clock time of clustering plus generalization.
    pub runtime_ms: f64,
    pub il_reports: Vec<IlReport>,
}

/// One clustering run: partition, released table and metrics.
pub struct MethodRun {
    pub partition: Partition,
    pub table: AnonymizedTable,
    pub metrics: RunMetrics,
}

pub fn build_partition(
    method: Method,
    prepared: &Prepared,
    cfg: &RunConfig,
) -> RunResult<Partition> {
    let ds = &prepared.ds;
    match method {
        Method::Proposed => {
            let p = propose_clusters(ds, &cfg.engine).at(Stage::Cluster)?;
            enforce_k(&p, ds, &cfg.engine).at(Stage::Cluster)
        }
        Method::Systematic => systematic_clusters(ds, &cfg.engine).at(Stage::Cluster),
    }
}

pub fn run_method(method: Method, prepared: &Prepared, cfg: &RunConfig) -> RunResult<MethodRun> {
    let ds = &prepared.ds;
    let started = Instant::now();
    let partition = build_partition(method, prepared, cfg)?;
    let table =
        generalize_partition(&partition, ds, &cfg.engine, &prepared.trees).at(Stage::Cluster)?;
    let elapsed = started.elapsed();

    let mut reports = Vec::new();
    let mut il_canonical = None;
    let mut il_legacy = None;
    if cfg.il_variant.canonical() {
        let report = total_il_canonical(&partition, ds, &prepared.trees).at(Stage::Cluster)?;
        il_canonical = Some(report.total);
        reports.push(report);
    }
    if cfg.il_variant.legacy() {
        let report =
            total_il_legacy(&partition, ds, &cfg.engine.primary_sort_attr).at(Stage::Cluster)?;
        il_legacy = Some(report.total);
        reports.push(report);
    }

    let metrics = RunMetrics {
        method,
        k: cfg.k,
        n_records: ds.len(),
        n_clusters: partition.len(),
        cluster_sizes: partition.sizes(),
        il_canonical,
        il_legacy,
        runtime_ms: millis(elapsed),
        il_reports: reports,
    };
    Ok(MethodRun {
        partition,
        table,
        metrics,
    })
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn to_json<T: Serialize>(value: &T) -> RunResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).at(Stage::Write)?;
    out.push(b'\n');
    Ok(out)
}

/// Anonymized CSV and metrics JSON for the configured method.
pub struct AnonymizeOutput {
    pub csv: Vec<u8>,
    pub metrics: Vec<u8>,
    pub run: MethodRun,
}

pub fn run_anonymize(cfg: &RunConfig) -> RunResult<AnonymizeOutput> {
    let prepared = prepare(cfg)?;
    let run = run_method(cfg.method, &prepared, cfg)?;
    let mut csv = Vec::new();
    if cfg.aggregate_output {
        run.table.write_aggregated(&mut csv)
    } else {
        run.table.write_expanded(&mut csv)
    }
    .at(Stage::Write)?;
    let metrics = to_json(&run.metrics)?;
    Ok(AnonymizeOutput { csv, metrics, run })
}

#[derive(Debug, Clone, Serialize)]
pub struct Deltas {
    /// proposed − systematic
    pub il_canonical_diff: Option<f64>,
    pub il_legacy_diff: Option<f64>,
    /// proposed / systematic
    pub runtime_ratio: Option<f64>,
    /// (proposed, systematic)
    pub n_clusters: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub proposed: RunMetrics,
    pub systematic: RunMetrics,
    pub deltas: Deltas,
}

pub fn compare_prepared(prepared: &Prepared, cfg: &RunConfig) -> RunResult<Comparison> {
    let proposed = run_method(Method::Proposed, prepared, cfg)?.metrics;
    let systematic = run_method(Method::Systematic, prepared, cfg)?.metrics;
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
    let deltas = Deltas {
        il_canonical_diff: diff(proposed.il_canonical, systematic.il_canonical),
        il_legacy_diff: diff(proposed.il_legacy, systematic.il_legacy),
        runtime_ratio: (systematic.runtime_ms > 0.0)
            .then(|| proposed.runtime_ms / systematic.runtime_ms),
        n_clusters: (proposed.n_clusters, systematic.n_clusters),
    };
    Ok(Comparison {
        proposed,
        systematic,
        deltas,
    })
}

pub fn run_compare(cfg: &RunConfig) -> RunResult<Comparison> {
    let prepared = prepare(cfg)?;
    compare_prepared(&prepared, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub min_size: usize,
    pub best_il: f64,
    pub best_partition: Vec<Vec<usize>>,
    pub partitions_examined: u64,
    pub proposed_il: f64,
    pub proposed_ratio: Option<f64>,
    pub systematic_il: Option<f64>,
    pub systematic_ratio: Option<f64>,
}

fn ratio(heuristic: f64, best: f64) -> Option<f64> {
    if best > 0.0 {
        Some(heuristic / best)
    } else if heuristic == 0.0 {
        Some(1.0)
    } else {
        None
    }
}

pub fn run_oracle(cfg: &RunConfig, min_size: usize) -> RunResult<OracleReport> {
    let prepared = prepare(cfg)?;
    let ds = &prepared.ds;
    if ds.len() > kanon::oracle::MAX_ORACLE_RECORDS {
        return Err(Failure::infeasible(
            Stage::Cluster,
            kanon::Error::OracleTooLarge {
                n: ds.len(),
                cap: kanon::oracle::MAX_ORACLE_RECORDS,
                estimate: kanon::bell_number(ds.len()),
            },
        ));
    }
    let best = optimal_partition(ds, min_size, &prepared.trees).at(Stage::Cluster)?;

    let proposed = build_partition(Method::Proposed, &prepared, cfg)?;
    let proposed_il = total_il_canonical(&proposed, ds, &prepared.trees)
        .at(Stage::Cluster)?
        .total;
    let systematic_il = match build_partition(Method::Systematic, &prepared, cfg) {
        Ok(p) => Some(
            total_il_canonical(&p, ds, &prepared.trees)
                .at(Stage::Cluster)?
                .total,
        ),
        Err(f) if f.code == EXIT_INFEASIBLE => None,
        Err(f) => return Err(f),
    };

    Ok(OracleReport {
        n: ds.len(),
        min_size,
        best_il: best.best_il,
        best_partition: best.best_partition.blocks(),
        partitions_examined: best.partitions_examined,
        proposed_il,
        proposed_ratio: ratio(proposed_il, best.best_il),
        systematic_il,
        systematic_ratio: systematic_il.and_then(|il| ratio(il, best.best_il)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub k: usize,
    pub n_records: usize,
    pub k_anonymous: bool,
    pub violations: Vec<Violation>,
}

/// Check a released CSV (either shape) for equivalence classes below k.
pub fn run_validate(cfg: &RunConfig) -> RunResult<ValidationReport> {
    let file = File::open(&cfg.input_path)
        .map_err(|e| anyhow::anyhow!("opening {}: {e}", cfg.input_path.display()))
        .at(Stage::Load)?;
    let table =
        AnonymizedTable::read_csv(file, &cfg.schema.sensitive().name, cfg.k).at(Stage::Load)?;
    let violations = verify_k_anonymity(&table, cfg.k);
    Ok(ValidationReport {
        k: cfg.k,
        n_records: table.source_n,
        k_anonymous: violations.is_empty(),
        violations,
    })
}

/// One row per (k, method) for plotting loss, cluster counts and runtime.
pub fn run_experiment(cfg: &RunConfig, k_values: &[usize]) -> RunResult<Vec<u8>> {
    let prepared = prepare(cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "k",
        "n_records",
        "n_clusters",
        "mean_cluster_size",
        "il_canonical",
        "il_legacy",
        "runtime_ms",
    ])
    .at(Stage::Write)?;
    for &k in k_values {
        if k == 0 {
            return Err(Failure::new(
                Stage::Config,
                anyhow::anyhow!("k must be at least 1"),
            ));
        }
        let mut run_cfg = cfg.clone();
        run_cfg.k = k;
        run_cfg.engine.k = k;
        let cmp = compare_prepared(&prepared, &run_cfg)?;
        for m in [&cmp.proposed, &cmp.systematic] {
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                serde_json::to_value(m.method)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                k.to_string(),
                m.n_records.to_string(),
                m.n_clusters.to_string(),
                (m.n_records as f64 / m.n_clusters as f64).to_string(),
                opt(m.il_canonical),
                opt(m.il_legacy),
                format!("{:.3}", m.runtime_ms),
            ])
            .at(Stage::Write)?;
        }
    }
    w.into_inner()
        .map_err(|e| anyhow::anyhow!("{e}"))
        .at(Stage::Write)
}

/// Write every file to a temporary sibling first and rename only once all of them
/// are complete, so a failure leaves no partial output behind.
pub fn write_atomically(files: &[(&Path, &[u8])]) -> RunResult<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)
            .map_err(|e| anyhow::anyhow!("creating temporary file in {}: {e}", dir.display()))
            .at(Stage::Write)?;
        tmp.write_all(bytes).at(Stage::Write)?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| anyhow::anyhow!("writing {}: {}", path.display(), e.error))
            .at(Stage::Write)?;
    }
    Ok(())
}
