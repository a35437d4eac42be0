//! Experiment sweeps: run the baseline and adaptive policies over identical
//! workloads and fault traces across a grid of sweep points and seeds, then
//! aggregate per-point means and improvement percentages.
//!
//! Sweep points x seeds are embarrassingly parallel; with the `parallel`
//! feature the tasks fan out over a rayon pool. Results are merged in
//! deterministic (point, seed) order, so the emitted files are identical
//! regardless of worker count.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::metrics::{improvement_pct, RunReport};
use crate::model::{Policy, SimConfig};
use crate::sim::{SimError, Simulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Fixed resources, gridlet count sweeps.
    VaryGridlets,
    /// Fixed gridlets, resource count sweeps.
    VaryResources,
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepKind::VaryGridlets => write!(f, "gridlets"),
            SweepKind::VaryResources => write!(f, "resources"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep spec invalid: {0}")]
    Invalid(String),
    #[error("run failed at point {point}, seed {seed}, policy {policy}: {source}")]
    RunFailed {
        point: u32,
        seed: u64,
        policy: Policy,
        #[source]
        source: Box<SimError>,
    },
    #[error("emit failed for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] crate::model::ConfigError),
}

/// Grid description for one sweep: which dimension varies, over what range,
/// and the paired policy configs every point runs under.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Count of the non-swept dimension.
    pub fixed_count: u32,
    pub sweep_start: u32,
    pub sweep_end: u32,
    pub sweep_step: u32,
    pub seeds: Vec<u64>,
    pub baseline: SimConfig,
    pub adaptive: SimConfig,
}

impl SweepSpec {
    /// Canonical grid for the given kind on top of `base`: gridlets
    /// 100..=3700 step 400 at 100 resources, or resources 50..=3050 step 200
    /// at 3000 gridlets; seeds 1..=10.
    pub fn canonical(kind: SweepKind, base: SimConfig) -> Self {
        let mut baseline = base.clone();
        baseline.policy = Policy::Baseline;
        let mut adaptive = base;
        adaptive.policy = Policy::Adaptive;
        let (fixed_count, start, end, step) = match kind {
            SweepKind::VaryGridlets => (baseline.resources.count, 100, 3700, 400),
            SweepKind::VaryResources => (3000, 50, 3050, 200),
        };
        Self {
            kind,
            fixed_count,
            sweep_start: start,
            sweep_end: end,
            sweep_step: step,
            seeds: (1..=10).collect(),
            baseline,
            adaptive,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sweep_start > self.sweep_end {
            return Err(SweepError::Invalid(format!(
                "sweep_start {} > sweep_end {}",
                self.sweep_start, self.sweep_end
            )));
        }
        if self.sweep_step == 0 {
            return Err(SweepError::Invalid("sweep_step must be > 0".into()));
        }
        if self.seeds.is_empty() {
            return Err(SweepError::Invalid("seeds must be non-empty".into()));
        }
        if self.fixed_count == 0 {
            return Err(SweepError::Invalid("fixed_count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<u32> {
        (self.sweep_start..=self.sweep_end).step_by(self.sweep_step as usize).collect()
    }

    fn config_for(&self, policy: Policy, point: u32, seed: u64) -> SimConfig {
        let mut cfg = match policy {
            Policy::Baseline => self.baseline.clone(),
            Policy::Adaptive => self.adaptive.clone(),
        };
        cfg.policy = policy;
        cfg.seed = seed;
        match self.kind {
            SweepKind::VaryGridlets => {
                cfg.resources.count = self.fixed_count;
                cfg.gridlets.count = point;
            }
            SweepKind::VaryResources => {
                cfg.gridlets.count = self.fixed_count;
                cfg.resources.count = point;
            }
        }
        cfg
    }
}

/// Per-point aggregate over seeds: mean metrics per policy plus the
/// improvement percentages of the means.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sweep_var: u32,
    pub fixed_var: u32,
    pub existing_makespan: f64,
    pub improved_makespan: f64,
    pub makespan_impr_pct: f64,
    pub existing_throughput: f64,
    pub improved_throughput: f64,
    pub throughput_impr_pct: f64,
    pub existing_atat: f64,
    pub improved_atat: f64,
    pub atat_impr_pct: f64,
}

/// Raw per-run stats for the JSON sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunStatsEntry {
    pub point: u32,
    pub seed: u64,
    pub policy: Policy,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub fixed_count: u32,
    pub seeds: Vec<u64>,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<RunStatsEntry>,
}

struct PairResult {
    point: u32,
    seed: u64,
    baseline: RunReport,
    adaptive: RunReport,
}

fn run_pair(spec: &SweepSpec, point: u32, seed: u64) -> Result<PairResult, SweepError> {
    let mut reports = Vec::with_capacity(2);
    for policy in [Policy::Baseline, Policy::Adaptive] {
        let cfg = spec.config_for(policy, point, seed);
        let report = cfg
            .validate()
            .map_err(SweepError::from)
            .and_then(|v| Simulation::new(v).map_err(|e| run_failed(point, seed, policy, e)))
            .and_then(|mut sim| sim.run().map_err(|e| run_failed(point, seed, policy, e)))?;
        reports.push(report);
    }
    let adaptive = reports.pop().expect("two runs");
    let baseline = reports.pop().expect("two runs");
    Ok(PairResult { point, seed, baseline, adaptive })
}

fn run_failed(point: u32, seed: u64, policy: Policy, source: SimError) -> SweepError {
    SweepError::RunFailed { point, seed, policy, source: Box::new(source) }
}

#[cfg(feature = "parallel")]
fn execute_tasks(
    spec: &SweepSpec,
    tasks: &[(u32, u64)],
    workers: Option<usize>,
) -> Vec<Result<PairResult, SweepError>> {
    use rayon::prelude::*;
    let par = |n: Option<usize>| -> Vec<Result<PairResult, SweepError>> {
        let body = || tasks.par_iter().map(|&(p, s)| run_pair(spec, p, s)).collect();
        match n {
            Some(threads) => rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("rayon pool")
                .install(body),
            None => body(),
        }
    };
    match workers {
        Some(0) => tasks.iter().map(|&(p, s)| run_pair(spec, p, s)).collect(),
        Some(n) => par(Some(n)),
        None => par(None),
    }
}

#[cfg(not(feature = "parallel"))]
fn execute_tasks(
    spec: &SweepSpec,
    tasks: &[(u32, u64)],
    _workers: Option<usize>,
) -> Vec<Result<PairResult, SweepError>> {
    tasks.iter().map(|&(p, s)| run_pair(spec, p, s)).collect()
}

/// Run the full grid. `workers`: `None` uses the default pool, `Some(0)`
/// forces sequential execution, `Some(n)` a pool of n threads (all identical
/// output).
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepReport, SweepError> {
    spec.validate()?;
    let points = spec.points();
    let tasks: Vec<(u32, u64)> =
        points.iter().flat_map(|&p| spec.seeds.iter().map(move |&s| (p, s))).collect();

    let mut results = Vec::with_capacity(tasks.len());
    for outcome in execute_tasks(spec, &tasks, workers) {
        results.push(outcome?); // first failure in (point, seed) order aborts
    }

    let mut rows = Vec::with_capacity(points.len());
    let mut runs = Vec::with_capacity(results.len() * 2);
    for &point in &points {
        let at_point: Vec<&PairResult> = results.iter().filter(|r| r.point == point).collect();
        let n = at_point.len() as f64;
        let mean = |f: &dyn Fn(&PairResult) -> f64| at_point.iter().map(|r| f(r)).sum::<f64>() / n;
        let existing_makespan = mean(&|r| r.baseline.makespan);
        let improved_makespan = mean(&|r| r.adaptive.makespan);
        let existing_throughput = mean(&|r| r.baseline.throughput);
        let improved_throughput = mean(&|r| r.adaptive.throughput);
        let existing_atat = mean(&|r| r.baseline.atat);
        let improved_atat = mean(&|r| r.adaptive.atat);
        rows.push(SweepRow {
            sweep_var: point,
            fixed_var: spec.fixed_count,
            existing_makespan,
            improved_makespan,
            makespan_impr_pct: improvement_pct(existing_makespan, improved_makespan)
                .expect("makespan > 0"),
            existing_throughput,
            improved_throughput,
            throughput_impr_pct: improvement_pct(existing_throughput, improved_throughput)
                .expect("throughput > 0"),
            existing_atat,
            improved_atat,
            atat_impr_pct: improvement_pct(existing_atat, improved_atat).expect("atat > 0"),
        });
    }
    for r in results {
        runs.push(RunStatsEntry { point: r.point, seed: r.seed, policy: Policy::Baseline, report: r.baseline });
        runs.push(RunStatsEntry { point: r.point, seed: r.seed, policy: Policy::Adaptive, report: r.adaptive });
    }

    Ok(SweepReport {
        kind: spec.kind,
        fixed_count: spec.fixed_count,
        seeds: spec.seeds.clone(),
        rows,
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "sweep_var,fixed_var,existing_makespan,improved_makespan,makespan_impr_pct,existing_throughput,improved_throughput,throughput_impr_pct,existing_atat,improved_atat,atat_impr_pct,seeds";

/// Render the comparison table. Improvement columns print rounded to two
/// decimals; metric columns print shortest-roundtrip, so re-emitting the
/// same report is byte-identical.
pub fn render_csv(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let seeds: Vec<String> = report.seeds.iter().map(u64::to_string).collect();
    let seeds = seeds.join(";");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{:.2},{},{},{:.2},{},{},{:.2},{}\n",
            row.sweep_var,
            row.fixed_var,
            row.existing_makespan,
            row.improved_makespan,
            row.makespan_impr_pct,
            row.existing_throughput,
            row.improved_throughput,
            row.throughput_impr_pct,
            row.existing_atat,
            row.improved_atat,
            row.atat_impr_pct,
            seeds
        ));
    }
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), SweepError> {
    let mut f = BufWriter::new(
        File::create(path).map_err(|e| SweepError::Io { path: path.to_path_buf(), source: e })?,
    );
    f.write_all(contents).map_err(|e| SweepError::Io { path: path.to_path_buf(), source: e })?;
    f.flush().map_err(|e| SweepError::Io { path: path.to_path_buf(), source: e })
}

/// Emit the report: CSV table plus a `<stem>.stats.json` run-stats sidecar,
/// or a single JSON document carrying rows and per-run stats.
pub fn emit(report: &SweepReport, format: EmitFormat, path: &Path) -> Result<(), SweepError> {
    match format {
        EmitFormat::Csv => {
            write_file(path, render_csv(report).as_bytes())?;
            let sidecar = path.with_extension("stats.json");
            let json = serde_json::to_string_pretty(report).expect("report serializes");
            write_file(&sidecar, format!("{json}\n").as_bytes())
        }
        EmitFormat::Json => {
            let json = serde_json::to_string_pretty(report).expect("report serializes");
            write_file(path, format!("{json}\n").as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FaultSpec;

    fn tiny_spec() -> SweepSpec {
        let mut base = SimConfig::paper_defaults();
        base.resources.count = 12;
        base.fault = FaultSpec {
            mttf: Some(4000.0),
            classes: vec![],
            repair_delay: Some(200.0),
            fail_while_idle: true,
        };
        let mut spec = SweepSpec::canonical(SweepKind::VaryGridlets, base);
        spec.fixed_count = 12;
        spec.sweep_start = 20;
        spec.sweep_end = 60;
        spec.sweep_step = 40;
        spec.seeds = vec![1, 2];
        spec
    }

    #[test]
    fn canonical_grids_have_published_shape() {
        let g = SweepSpec::canonical(SweepKind::VaryGridlets, SimConfig::paper_defaults());
        assert_eq!(g.points().len(), 10);
        assert_eq!(g.points().first(), Some(&100));
        assert_eq!(g.points().last(), Some(&3700));

        let r = SweepSpec::canonical(SweepKind::VaryResources, SimConfig::paper_defaults());
        assert_eq!(r.points().len(), 16);
        assert_eq!(r.points().first(), Some(&50));
        assert_eq!(r.points().last(), Some(&3050));
        assert_eq!(r.fixed_count, 3000);
    }

    #[test]
    fn sweep_rows_cover_every_point() {
        let spec = tiny_spec();
        let report = run_sweep(&spec, Some(0)).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.runs.len(), 2 * 2 * 2); // points x seeds x policies
        assert_eq!(report.rows[0].sweep_var, 20);
        assert_eq!(report.rows[1].sweep_var, 60);
    }

    #[test]
    fn csv_is_byte_identical_across_reruns_and_worker_counts() {
        let spec = tiny_spec();
        let seq = render_csv(&run_sweep(&spec, Some(0)).unwrap());
        let seq2 = render_csv(&run_sweep(&spec, Some(0)).unwrap());
        assert_eq!(seq, seq2);
        let par = render_csv(&run_sweep(&spec, Some(2)).unwrap());
        assert_eq!(seq, par);
        assert!(seq.starts_with(CSV_HEADER));
        assert_eq!(seq.lines().count(), 3); // header + 2 points
    }

    #[test]
    fn emit_writes_table_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let spec = tiny_spec();
        let report = run_sweep(&spec, Some(0)).unwrap();
        emit(&report, EmitFormat::Csv, &path).unwrap();
        let table = std::fs::read_to_string(&path).unwrap();
        assert!(table.starts_with(CSV_HEADER));
        let sidecar = std::fs::read_to_string(dir.path().join("out.stats.json")).unwrap();
        assert!(sidecar.contains("\"checkpoints_taken\""));
    }

    #[test]
    fn empty_range_is_rejected() {
        let mut spec = tiny_spec();
        spec.seeds.clear();
        assert!(matches!(spec.validate(), Err(SweepError::Invalid(_))));
        let mut spec = tiny_spec();
        spec.sweep_step = 0;
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.sweep_start = 100;
        spec.sweep_end = 50;
        assert!(spec.validate().is_err());
    }
}
