//! Checkpoint planning, the record repository, replica placement, and
//! recovery.
//!
//! The adaptive policy sizes a dispatch's checkpoint count from the target
//! resource's failure rate and failure tendency (risk raises the count);
//! the baseline policy checkpoints unconditionally at a fixed interval.
//! Records commit locally, replicate to peer nodes, and every commit purges
//! the previous checkpoint's records; a holder that is about to receive the
//! new record keeps its old one until the write lands, so a job that has
//! checkpointed never passes through a window with zero recoverable state.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{CheckpointPlan, CheckpointRecord, GridResource, Gridlet, JobId, ResourceId, SimTime};

/// Guard against float dust when rounding Eq.-style count formulas.
const COUNT_EPS: f64 = 1e-9;

/// Response-time estimate for running `g` on `r`: compute on one PE plus
/// staging both files over the resource's bandwidth.
pub fn estimate_response_time(g: &Gridlet, r: &GridResource) -> SimTime {
    response_time(g.length, g.input_size + g.output_size, r.mips_per_pe, r.bandwidth)
}

/// Same estimate from raw parts (used for re-dispatches, where only the
/// remaining length counts).
pub fn response_time(length_mi: f64, io_bytes: f64, mips_per_pe: f64, bandwidth: f64) -> SimTime {
    length_mi / mips_per_pe + io_bytes / bandwidth
}

/// Risk-driven plan: the effective rate is the larger of the resource's
/// failure rate and failure tendency whenever either signals above-average
/// risk (`fr >= fr_mean` or `fd > fr_mean`); the count is the response time
/// times that rate, rounded up, and the interval re-divides the response
/// time by the integer count.
pub fn plan_adaptive(rt: SimTime, fr: f64, fd_resource: f64, fr_mean: f64) -> CheckpointPlan {
    debug_assert!(rt >= 0.0);
    debug_assert!((0.0..=1.0).contains(&fr));
    debug_assert!((0.0..=1.0).contains(&fd_resource));
    debug_assert!((0.0..=1.0).contains(&fr_mean));
    let high_risk = fr >= fr_mean || fd_resource > fr_mean;
    let fr_eff = if high_risk { fr.max(fd_resource) } else { fr };
    let raw = rt * fr_eff;
    if raw <= COUNT_EPS {
        return CheckpointPlan::none();
    }
    let count = (raw - COUNT_EPS).ceil().max(1.0) as u64;
    CheckpointPlan::new(count, rt / count as f64).expect("count >= 1 and rt > 0")
}

/// Unconditional periodic plan: checkpoint every `fixed_interval` along the
/// response time, however risky the resource looks.
pub fn plan_baseline(rt: SimTime, fixed_interval: SimTime) -> CheckpointPlan {
    debug_assert!(fixed_interval > 0.0);
    let count = (rt / fixed_interval + COUNT_EPS).floor() as u64;
    if count == 0 {
        return CheckpointPlan::none();
    }
    CheckpointPlan::new(count, fixed_interval).expect("interval validated by caller")
}

/// Pick `replica_factor` distinct alive peers for a new record, preferring
/// the lowest current failure rate (unrated counts as 0), ties broken by id.
/// Returns fewer than requested when not enough peers are alive.
pub fn choose_replica_holders(
    origin: ResourceId,
    replica_factor: u32,
    peers: impl IntoIterator<Item = (ResourceId, bool, Option<f64>)>,
) -> Vec<ResourceId> {
    let mut alive: Vec<(f64, ResourceId)> = peers
        .into_iter()
        .filter(|(id, alive, _)| *alive && *id != origin)
        .map(|(id, _, rate)| (rate.unwrap_or(0.0), id))
        .collect();
    alive.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    alive.truncate(replica_factor as usize);
    alive.into_iter().map(|(_, id)| id).collect()
}

/// How a recovery was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecoverySource {
    /// The surviving record sits on its own origin node (a previous
    /// dispatch's resource that is still alive).
    OriginSurvivor,
    /// The surviving record is a replica on a peer.
    Replica,
    /// Nothing survived; the job restarts from progress 0.
    Restart,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub progress: f64,
    pub seq: Option<u64>,
    pub served_by: Option<ResourceId>,
    pub source: RecoverySource,
}

/// Grid-wide audit of live checkpoint state.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    /// Jobs holding records under more than one sequence number.
    pub jobs_with_multiple_seqs: Vec<JobId>,
    /// Records still held for jobs already marked completed.
    pub records_for_completed_jobs: usize,
    pub total_records: usize,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.jobs_with_multiple_seqs.is_empty() && self.records_for_completed_jobs == 0
    }
}

/// Per-node checkpoint repository: each node maps a job to the latest record
/// it holds for that job (one slot per job per node), plus the authoritative
/// latest sequence numbers.
#[derive(Debug, Default)]
pub struct CheckpointStore {
    nodes: BTreeMap<ResourceId, BTreeMap<JobId, CheckpointRecord>>,
    /// Highest staged seq per job (bumped when a checkpoint is cut, even if
    /// its commit later dies with the origin).
    staged_seq: BTreeMap<JobId, u64>,
    /// Highest seq that durably landed on its origin, with its progress.
    durable: BTreeMap<JobId, (u64, f64)>,
    purges: u64,
}

impl CheckpointStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocate the next sequence number for a job's new checkpoint.
    pub fn stage(&mut self, job: JobId) -> u64 {
        let seq = self.staged_seq.entry(job).or_insert(0);
        *seq += 1;
        *seq
    }

    /// Latest durably committed (seq, progress) for the job, if any.
    pub fn latest_durable(&self, job: JobId) -> Option<(u64, f64)> {
        self.durable.get(&job).copied()
    }

    /// A write (origin commit or replica transfer) lands on `holder`,
    /// replacing whatever older record the holder had for the job.
    pub fn land(&mut self, holder: ResourceId, record: CheckpointRecord) {
        let job = record.job;
        if record.origin == holder {
            let entry = self.durable.entry(job).or_insert((record.seq, record.progress));
            if record.seq >= entry.0 {
                *entry = (record.seq, record.progress);
            }
        }
        let slot = self.nodes.entry(holder).or_default().insert(job, record);
        if slot.is_some() {
            self.purges += 1;
        }
    }

    /// Purge every record of `job` with `seq < before_seq` except on the
    /// nodes in `keep` (pending holders of the new record replace their copy
    /// when the write lands, so they stay recoverable through the transfer).
    pub fn sweep_purge(&mut self, job: JobId, before_seq: u64, keep: &BTreeSet<ResourceId>) {
        for (node, held) in self.nodes.iter_mut() {
            if keep.contains(node) {
                continue;
            }
            if let Some(rec) = held.get(&job) {
                if rec.seq < before_seq {
                    held.remove(&job);
                    self.purges += 1;
                }
            }
        }
    }

    /// A node crashed: its local records die with it.
    pub fn wipe_node(&mut self, node: ResourceId) -> usize {
        match self.nodes.get_mut(&node) {
            Some(held) => {
                let n = held.len();
                held.clear();
                n
            }
            None => 0,
        }
    }

    /// A job completed: expel its records everywhere.
    pub fn clear_job(&mut self, job: JobId) -> usize {
        let mut removed = 0;
        for held in self.nodes.values_mut() {
            if held.remove(&job).is_some() {
                removed += 1;
            }
        }
        self.purges += removed as u64;
        removed
    }

    /// Highest-seq surviving record for `job` across all nodes (crashed
    /// nodes were wiped, so whatever is present is recoverable). Ties pick
    /// the lowest node id.
    pub fn best_record(&self, job: JobId) -> Option<&CheckpointRecord> {
        let mut best: Option<&CheckpointRecord> = None;
        for held in self.nodes.values() {
            if let Some(rec) = held.get(&job) {
                if best.map(|b| rec.seq > b.seq).unwrap_or(true) {
                    best = Some(rec);
                }
            }
        }
        best
    }

    /// Resume point for a job whose resource just failed: the best surviving
    /// record's progress, or a restart from 0 when nothing survived.
    pub fn recover(&self, job: JobId) -> Recovery {
        let mut served_by = None;
        let mut best: Option<&CheckpointRecord> = None;
        for (node, held) in &self.nodes {
            if let Some(rec) = held.get(&job) {
                if best.map(|b| rec.seq > b.seq).unwrap_or(true) {
                    best = Some(rec);
                    served_by = Some(*node);
                }
            }
        }
        match (best, served_by) {
            (Some(rec), Some(node)) => Recovery {
                progress: rec.progress,
                seq: Some(rec.seq),
                served_by: Some(node),
                source: if node == rec.origin {
                    RecoverySource::OriginSurvivor
                } else {
                    RecoverySource::Replica
                },
            },
            _ => Recovery { progress: 0.0, seq: None, served_by: None, source: RecoverySource::Restart },
        }
    }

    pub fn purges(&self) -> u64 {
        self.purges
    }

    pub fn total_records(&self) -> usize {
        self.nodes.values().map(BTreeMap::len).sum()
    }

    /// Count live seqs per job and flag leftovers for completed jobs.
    pub fn audit(&self, is_completed: impl Fn(JobId) -> bool) -> AuditReport {
        let mut seqs: BTreeMap<JobId, BTreeSet<u64>> = BTreeMap::new();
        let mut completed_leftovers = 0;
        let mut total = 0;
        for held in self.nodes.values() {
            for (job, rec) in held {
                total += 1;
                seqs.entry(*job).or_default().insert(rec.seq);
                if is_completed(*job) {
                    completed_leftovers += 1;
                }
            }
        }
        AuditReport {
            jobs_with_multiple_seqs: seqs
                .into_iter()
                .filter(|(_, s)| s.len() > 1)
                .map(|(j, _)| j)
                .collect(),
            records_for_completed_jobs: completed_leftovers,
            total_records: total,
        }
    }
}
