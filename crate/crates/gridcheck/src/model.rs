//! Domain types shared by all modules: gridlets, resources, fault indices,
//! checkpoint records/plans, and the simulation config with its validation.
//!
//! Construction goes through validating constructors; state transitions go
//! through methods, so a value that exists satisfies its invariants.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation time in sim-seconds. Continuous; MIPS-based durations are not
/// integral.
pub type SimTime = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("gridlet {id}: illegal status transition {from:?} -> {to:?}")]
    IllegalTransition { id: JobId, from: JobStatus, to: JobStatus },
    #[error("{field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

fn require(cond: bool, field: &'static str, reason: impl Into<String>) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidField { field, reason: reason.into() })
    }
}

/// Lifecycle of a gridlet. `Success` is terminal; `Failed` jobs are
/// re-queued for another dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobStatus {
    Created,
    Queued,
    Running,
    Failed,
    Success,
}

/// A unit of work: compute length in MI plus staged input/output bytes.
///
/// `progress` is a fraction of `length`, not absolute MI, so recovery math
/// is independent of the speed of whichever resource re-runs the job.
#[derive(Debug, Clone, Serialize)]
pub struct Gridlet {
    pub id: JobId,
    /// Compute work in million instructions.
    pub length: f64,
    /// Input file size in bytes.
    pub input_size: f64,
    /// Output file size in bytes.
    pub output_size: f64,
    pub submit_time: SimTime,
    status: JobStatus,
    progress: f64,
}

impl Gridlet {
    pub fn new(
        id: JobId,
        length: f64,
        input_size: f64,
        output_size: f64,
        submit_time: SimTime,
    ) -> Result<Self, ModelError> {
        require(length.is_finite() && length >= 0.0, "gridlet.length", "must be finite and >= 0")?;
        require(input_size.is_finite() && input_size >= 0.0, "gridlet.input_size", "must be finite and >= 0")?;
        require(
            output_size.is_finite() && output_size >= 0.0,
            "gridlet.output_size",
            "must be finite and >= 0",
        )?;
        require(
            submit_time.is_finite() && submit_time >= 0.0,
            "gridlet.submit_time",
            "must be finite and >= 0",
        )?;
        Ok(Self {
            id,
            length,
            input_size,
            output_size,
            submit_time,
            status: JobStatus::Created,
            progress: 0.0,
        })
    }

    pub fn status(&self) -> JobStatus {
        self.status
    }

    /// Fraction of `length` completed; 1.0 exactly when the job succeeded.
    pub fn progress(&self) -> f64 {
        self.progress
    }

    fn transition(&mut self, to: JobStatus) -> Result<(), ModelError> {
        use JobStatus::*;
        let ok = matches!(
            (self.status, to),
            (Created, Queued) | (Queued, Running) | (Running, Failed) | (Failed, Queued) | (Running, Success)
        );
        if !ok {
            return Err(ModelError::IllegalTransition { id: self.id, from: self.status, to });
        }
        self.status = to;
        Ok(())
    }

    pub fn enqueue(&mut self) -> Result<(), ModelError> {
        self.transition(JobStatus::Queued)
    }

    pub fn start_running(&mut self) -> Result<(), ModelError> {
        self.transition(JobStatus::Running)
    }

    /// Running -> Failed, then Failed -> Queued with progress rolled back to
    /// the recovered checkpoint state.
    pub fn fail_and_requeue(&mut self, recovered_progress: f64) -> Result<(), ModelError> {
        require(
            (0.0..1.0).contains(&recovered_progress),
            "gridlet.progress",
            "recovered progress must lie in [0,1)",
        )?;
        self.transition(JobStatus::Failed)?;
        self.transition(JobStatus::Queued)?;
        self.progress = recovered_progress;
        Ok(())
    }

    pub fn complete(&mut self) -> Result<(), ModelError> {
        self.transition(JobStatus::Success)?;
        self.progress = 1.0;
        Ok(())
    }
}

/// Success/failure counters per resource, plus the dispatch count that forms
/// the denominator of the empirical failure rate.
///
/// All three counters are monotonically non-decreasing over a run, and
/// `success_count + failure_count <= dispatched` (jobs in flight account for
/// the gap).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FaultIndex {
    pub dispatched: u64,
    pub success_count: u64,
    pub failure_count: u64,
}

impl FaultIndex {
    pub fn record_dispatch(&mut self) {
        self.dispatched += 1;
    }

    pub fn record_success(&mut self) {
        self.success_count += 1;
    }

    pub fn record_failure(&mut self) {
        self.failure_count += 1;
    }
}

/// A compute node: `num_machines x pes_per_machine` execution slots, each
/// rated `mips_per_pe`.
#[derive(Debug, Clone, Serialize)]
pub struct GridResource {
    pub id: ResourceId,
    pub num_machines: u32,
    pub pes_per_machine: u32,
    /// MI per sim-second delivered by one processing element.
    pub mips_per_pe: f64,
    /// Bytes per sim-second for staging I/O and checkpoint replicas.
    pub bandwidth: f64,
    pub alive: bool,
    /// Assigned, incomplete gridlets in dispatch order.
    pub queue: Vec<JobId>,
    pub fault_index: FaultIndex,
}

impl GridResource {
    pub fn new(
        id: ResourceId,
        num_machines: u32,
        pes_per_machine: u32,
        mips_per_pe: f64,
        bandwidth: f64,
    ) -> Result<Self, ModelError> {
        require(num_machines >= 1, "resource.num_machines", "must be >= 1")?;
        require(pes_per_machine >= 1, "resource.pes_per_machine", "must be >= 1")?;
        require(
            mips_per_pe.is_finite() && mips_per_pe > 0.0,
            "resource.mips_per_pe",
            "must be finite and > 0",
        )?;
        require(
            bandwidth.is_finite() && bandwidth > 0.0,
            "resource.bandwidth",
            "must be finite and > 0",
        )?;
        Ok(Self {
            id,
            num_machines,
            pes_per_machine,
            mips_per_pe,
            bandwidth,
            alive: true,
            queue: Vec::new(),
            fault_index: FaultIndex::default(),
        })
    }

    /// Execution slots available to gridlets (one gridlet per PE).
    pub fn pe_count(&self) -> u32 {
        self.num_machines * self.pes_per_machine
    }

    /// Aggregate speed in MI per sim-second.
    pub fn capacity(&self) -> f64 {
        f64::from(self.pe_count()) * self.mips_per_pe
    }
}

/// A committed progress snapshot for one job. All copies of a given
/// `(job, seq)` carry identical `progress` and `taken_at`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub job: JobId,
    pub progress: f64,
    /// Monotonically increasing per job across the whole run; gaps are fine
    /// (a staged checkpoint whose commit was killed leaves a hole).
    pub seq: u64,
    pub taken_at: SimTime,
    pub origin: ResourceId,
    /// Peer nodes the record was replicated to.
    pub replicas: BTreeSet<ResourceId>,
}

/// Output of a checkpoint policy for one dispatch: how many checkpoints and
/// how far apart along the response-time estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointPlan {
    count: u64,
    interval: Option<f64>,
}

impl CheckpointPlan {
    /// Plan with no checkpoints (interval undefined).
    pub fn none() -> Self {
        Self { count: 0, interval: None }
    }

    pub fn new(count: u64, interval: f64) -> Result<Self, ModelError> {
        require(count > 0, "plan.count", "use CheckpointPlan::none() for zero checkpoints")?;
        require(
            interval.is_finite() && interval > 0.0,
            "plan.interval",
            "must be finite and > 0 when count > 0",
        )?;
        Ok(Self { count, interval: Some(interval) })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Defined only when `count > 0`.
    pub fn interval(&self) -> Option<f64> {
        self.interval
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn cfg_require(cond: bool, field: &str, reason: impl Into<String>) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::Invalid { field: field.to_string(), reason: reason.into() })
    }
}

/// Which checkpoint policy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Baseline,
    Adaptive,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Baseline => write!(f, "baseline"),
            Policy::Adaptive => write!(f, "adaptive"),
        }
    }
}

/// Homogeneous resource fleet description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub count: u32,
    #[serde(default = "default_num_machines")]
    pub num_machines: u32,
    #[serde(default = "default_pes_per_machine")]
    pub pes_per_machine: u32,
    #[serde(default = "default_mips_per_pe")]
    pub mips_per_pe: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
}

fn default_num_machines() -> u32 {
    1
}
fn default_pes_per_machine() -> u32 {
    2
}
fn default_mips_per_pe() -> f64 {
    50.0
}
fn default_bandwidth() -> f64 {
    5000.0
}

/// Gridlet length draw: uniform over a range or a fixed value for every job.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthSpec {
    Uniform { min: f64, max: f64 },
    Fixed(f64),
}

/// Workload description. Defaults follow the stock gridlet characteristics:
/// length uniform in [0, 50000] MI, input 100 B plus a 10-40% surcharge,
/// output 250 B plus a 10-50% surcharge.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridletSpec {
    pub count: u32,
    #[serde(default = "default_length_spec")]
    pub length: LengthSpec,
    #[serde(default = "default_input_base")]
    pub input_base_bytes: f64,
    #[serde(default = "default_input_surcharge")]
    pub input_surcharge: [f64; 2],
    #[serde(default = "default_output_base")]
    pub output_base_bytes: f64,
    #[serde(default = "default_output_surcharge")]
    pub output_surcharge: [f64; 2],
}

fn default_length_spec() -> LengthSpec {
    LengthSpec::Uniform { min: 0.0, max: 50_000.0 }
}
fn default_input_base() -> f64 {
    100.0
}
fn default_input_surcharge() -> [f64; 2] {
    [0.10, 0.40]
}
fn default_output_base() -> f64 {
    250.0
}
fn default_output_surcharge() -> [f64; 2] {
    [0.10, 0.50]
}

impl GridletSpec {
    /// Draw the whole batch; all gridlets submit at time 0.
    pub fn generate(&self, rng: &mut impl Rng) -> Result<Vec<Gridlet>, ModelError> {
        let mut jobs = Vec::with_capacity(self.count as usize);
        for i in 0..self.count {
            let length = match self.length {
                LengthSpec::Fixed(v) => v,
                LengthSpec::Uniform { min, max } => {
                    if max > min {
                        rng.random_range(min..max)
                    } else {
                        min
                    }
                }
            };
            let u = rng.random_range(self.input_surcharge[0]..=self.input_surcharge[1]);
            let v = rng.random_range(self.output_surcharge[0]..=self.output_surcharge[1]);
            let input = self.input_base_bytes * (1.0 + u);
            let output = self.output_base_bytes * (1.0 + v);
            jobs.push(Gridlet::new(JobId(i), length, input, output, 0.0)?);
        }
        Ok(jobs)
    }
}

/// One block of resources sharing a mean time to failure.
///
/// `mttf: None` means the block never fails. Exactly one of `count` /
/// `fraction` sizes the block, except the last class, which may omit both to
/// absorb the remaining resources.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultClass {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Mean time to failure in sim-seconds; `None` disables failures.
    pub mttf: Option<f64>,
}

/// Fault injection parameters. Defaults to no failures at all; the embedded
/// experiment config overrides this with a calibrated mixed fleet.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    /// Fleet-wide MTTF shorthand; ignored when `classes` is non-empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mttf: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<FaultClass>,
    /// Time a failed resource stays down; `None` means it never comes back
    /// (fail-stop for the run).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair_delay: Option<f64>,
    #[serde(default = "default_true")]
    pub fail_while_idle: bool,
}

fn default_true() -> bool {
    true
}

impl FaultSpec {
    /// Per-resource MTTF (infinity = never fails), assigned to ids in class
    /// order.
    pub fn resolve_mttf(&self, resource_count: u32) -> Result<Vec<f64>, ConfigError> {
        let n = resource_count as usize;
        if self.classes.is_empty() {
            let mttf = self.mttf.unwrap_or(f64::INFINITY);
            cfg_require(mttf > 0.0, "fault.mttf", "must be > 0")?;
            return Ok(vec![mttf; n]);
        }
        let mut out = Vec::with_capacity(n);
        let last = self.classes.len() - 1;
        for (k, class) in self.classes.iter().enumerate() {
            let mttf = class.mttf.unwrap_or(f64::INFINITY);
            cfg_require(mttf > 0.0, "fault.classes.mttf", "must be > 0")?;
            let take = match (class.count, class.fraction) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Invalid {
                        field: format!("fault.classes[{k}]"),
                        reason: "give count or fraction, not both".into(),
                    });
                }
                (Some(c), None) => c as usize,
                (None, Some(f)) => {
                    cfg_require((0.0..=1.0).contains(&f), "fault.classes.fraction", "must lie in [0,1]")?;
                    (f * n as f64).round() as usize
                }
                (None, None) if k == last => n - out.len(),
                (None, None) => {
                    return Err(ConfigError::Invalid {
                        field: format!("fault.classes[{k}]"),
                        reason: "only the last class may omit count and fraction".into(),
                    });
                }
            };
            let take = take.min(n - out.len());
            out.extend(std::iter::repeat(mttf).take(take));
        }
        cfg_require(
            out.len() == n,
            "fault.classes",
            format!("classes cover {} of {} resources", out.len(), n),
        )?;
        Ok(out)
    }

    pub fn repair_delay(&self) -> f64 {
        self.repair_delay.unwrap_or(f64::INFINITY)
    }
}

/// Checkpoint commit/replication cost knobs.
///
/// Committing suspends the job for `base_write_time`; each replica transfer
/// then occupies the holder's bandwidth for `size_per_checkpoint` bytes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointCostModel {
    #[serde(default = "default_write_time")]
    pub base_write_time: f64,
    #[serde(default = "default_checkpoint_size")]
    pub size_per_checkpoint: f64,
    #[serde(default = "default_replica_factor")]
    pub replica_factor: u32,
}

fn default_write_time() -> f64 {
    0.25
}
fn default_checkpoint_size() -> f64 {
    1000.0
}
fn default_replica_factor() -> u32 {
    2
}

impl Default for CheckpointCostModel {
    fn default() -> Self {
        Self {
            base_write_time: default_write_time(),
            size_per_checkpoint: default_checkpoint_size(),
            replica_factor: default_replica_factor(),
        }
    }
}

/// Ant-colony selection parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Evaporation rate, in (0,1).
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Pheromone deposit on success.
    #[serde(default = "default_deposit")]
    pub deposit: f64,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.0
}
fn default_rho() -> f64 {
    0.1
}
fn default_deposit() -> f64 {
    0.5
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            beta: default_beta(),
            rho: default_rho(),
            deposit: default_deposit(),
        }
    }
}

/// Full description of one simulation run. Loadable from JSON; see
/// [`SimConfig::paper_defaults`] for the embedded default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub resources: ResourceSpec,
    pub gridlets: GridletSpec,
    #[serde(default)]
    pub fault: FaultSpec,
    #[serde(default = "default_policy")]
    pub policy: Policy,
    /// Fixed checkpoint interval for the baseline policy; `None` disables
    /// baseline checkpointing entirely.
    #[serde(default = "default_baseline_interval")]
    pub baseline_interval: Option<f64>,
    #[serde(default)]
    pub checkpoint: CheckpointCostModel,
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_policy() -> Policy {
    Policy::Adaptive
}
fn default_baseline_interval() -> Option<f64> {
    Some(4.0)
}
fn default_seed() -> u64 {
    1
}

/// A [`SimConfig`] that passed validation, plus any clamp warnings raised
/// along the way.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: SimConfig,
    pub warnings: Vec<String>,
}

impl SimConfig {
    /// Embedded default: the stock resource/gridlet characteristics (1
    /// machine, 2 PEs at 50 MIPS, 5000 B/s; lengths 0-50000 MI with the
    /// standard I/O surcharges) plus this artifact's fault/overhead
    /// calibration.
    pub fn paper_defaults() -> Self {
        Self {
            resources: ResourceSpec {
                count: 100,
                num_machines: 1,
                pes_per_machine: 2,
                mips_per_pe: 50.0,
                bandwidth: 5000.0,
            },
            gridlets: GridletSpec {
                count: 100,
                length: default_length_spec(),
                input_base_bytes: default_input_base(),
                input_surcharge: default_input_surcharge(),
                output_base_bytes: default_output_base(),
                output_surcharge: default_output_surcharge(),
            },
            fault: FaultSpec {
                mttf: None,
                classes: vec![
                    FaultClass { count: None, fraction: Some(0.25), mttf: Some(3000.0) },
                    FaultClass { count: None, fraction: None, mttf: Some(120_000.0) },
                ],
                repair_delay: Some(300.0),
                fail_while_idle: true,
            },
            policy: Policy::Adaptive,
            baseline_interval: default_baseline_interval(),
            checkpoint: CheckpointCostModel::default(),
            scheduler: SchedulerConfig::default(),
            seed: 1,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Check every field invariant; clamps `replica_factor` to
    /// `resource count - 1` with a warning instead of rejecting.
    pub fn validate(mut self) -> Result<ValidatedConfig, ConfigError> {
        let mut warnings = Vec::new();

        cfg_require(self.resources.count >= 1, "resources.count", "must be >= 1")?;
        cfg_require(self.resources.num_machines >= 1, "resources.num_machines", "must be >= 1")?;
        cfg_require(self.resources.pes_per_machine >= 1, "resources.pes_per_machine", "must be >= 1")?;
        cfg_require(
            self.resources.mips_per_pe.is_finite() && self.resources.mips_per_pe > 0.0,
            "resources.mips_per_pe",
            "must be finite and > 0 (capacity must be positive)",
        )?;
        cfg_require(
            self.resources.bandwidth.is_finite() && self.resources.bandwidth > 0.0,
            "resources.bandwidth",
            "must be finite and > 0",
        )?;

        cfg_require(self.gridlets.count >= 1, "gridlets.count", "must be >= 1")?;
        match self.gridlets.length {
            LengthSpec::Fixed(v) => {
                cfg_require(v.is_finite() && v >= 0.0, "gridlets.length", "must be finite and >= 0")?;
            }
            LengthSpec::Uniform { min, max } => {
                cfg_require(
                    min.is_finite() && max.is_finite() && min >= 0.0 && max >= min,
                    "gridlets.length",
                    "uniform range must satisfy 0 <= min <= max",
                )?;
            }
        }
        for (field, range) in [
            ("gridlets.input_surcharge", self.gridlets.input_surcharge),
            ("gridlets.output_surcharge", self.gridlets.output_surcharge),
        ] {
            cfg_require(
                range[0].is_finite() && range[1].is_finite() && range[0] <= range[1],
                field,
                "must be a non-decreasing pair",
            )?;
        }
        cfg_require(
            self.gridlets.input_base_bytes >= 0.0 && self.gridlets.output_base_bytes >= 0.0,
            "gridlets.io_base_bytes",
            "must be >= 0",
        )?;

        // Resolving also validates the class layout.
        self.fault.resolve_mttf(self.resources.count)?;
        if let Some(d) = self.fault.repair_delay {
            cfg_require(d.is_finite() && d >= 0.0, "fault.repair_delay", "must be finite and >= 0")?;
        }

        if let Some(iv) = self.baseline_interval {
            cfg_require(iv.is_finite() && iv > 0.0, "baseline_interval", "must be finite and > 0")?;
        }

        cfg_require(
            self.checkpoint.base_write_time.is_finite() && self.checkpoint.base_write_time >= 0.0,
            "checkpoint.base_write_time",
            "must be finite and >= 0",
        )?;
        cfg_require(
            self.checkpoint.size_per_checkpoint.is_finite() && self.checkpoint.size_per_checkpoint >= 0.0,
            "checkpoint.size_per_checkpoint",
            "must be finite and >= 0",
        )?;
        if self.checkpoint.replica_factor >= self.resources.count {
            let clamped = self.resources.count - 1;
            warnings.push(format!(
                "checkpoint.replica_factor {} >= resource count {}; clamped to {}",
                self.checkpoint.replica_factor, self.resources.count, clamped
            ));
            self.checkpoint.replica_factor = clamped;
        }

        cfg_require(
            self.scheduler.alpha.is_finite() && self.scheduler.alpha >= 0.0,
            "scheduler.alpha",
            "must be finite and >= 0",
        )?;
        cfg_require(
            self.scheduler.beta.is_finite() && self.scheduler.beta >= 0.0,
            "scheduler.beta",
            "must be finite and >= 0",
        )?;
        cfg_require(
            self.scheduler.rho > 0.0 && self.scheduler.rho < 1.0,
            "scheduler.rho",
            "must lie in (0,1)",
        )?;
        cfg_require(
            self.scheduler.deposit.is_finite() && self.scheduler.deposit >= 0.0,
            "scheduler.deposit",
            "must be finite and >= 0",
        )?;

        Ok(ValidatedConfig { config: self, warnings })
    }
}
