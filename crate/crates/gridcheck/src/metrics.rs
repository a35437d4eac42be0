//! Batch performance metrics and the improvement-percentage convention used
//! in the comparison tables.

use serde::Serialize;
use thiserror::Error;

use crate::checkpoint::RecoverySource;
use crate::model::SimTime;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("makespan of an empty batch is undefined")]
    EmptyBatch,
    #[error("throughput undefined: {jobs} jobs in non-positive time {time}")]
    ZeroTime { jobs: u64, time: f64 },
    #[error("turnaround needs finish >= submit, got submit {submit} > finish {finish}")]
    NegativeTurnaround { submit: f64, finish: f64 },
    #[error("improvement baseline must be > 0, got {0}")]
    NonPositiveImproved(f64),
}

/// Time from batch start (t = 0 by convention) to the last completion.
pub fn makespan(finish_times: &[SimTime]) -> Result<SimTime, MetricsError> {
    finish_times.iter().copied().fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |m| m.max(t)))).ok_or(MetricsError::EmptyBatch)
}

/// Jobs completed per sim-second over the batch completion time.
pub fn throughput(n_jobs: u64, total_time: SimTime) -> Result<f64, MetricsError> {
    if n_jobs == 0 {
        return Ok(0.0);
    }
    if total_time <= 0.0 {
        return Err(MetricsError::ZeroTime { jobs: n_jobs, time: total_time });
    }
    Ok(n_jobs as f64 / total_time)
}

/// Mean of (finish - submit) over the batch.
pub fn avg_turnaround(jobs: &[(SimTime, SimTime)]) -> Result<SimTime, MetricsError> {
    if jobs.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    let mut sum = 0.0;
    for &(submit, finish) in jobs {
        if finish < submit {
            return Err(MetricsError::NegativeTurnaround { submit, finish });
        }
        sum += finish - submit;
    }
    Ok(sum / jobs.len() as f64)
}

/// Improvement percentage as printed in the comparison tables:
/// `|existing - improved| / improved * 100`. The denominator is the improved
/// value; that convention reproduces the published columns.
pub fn improvement_pct(existing: f64, improved: f64) -> Result<f64, MetricsError> {
    if improved <= 0.0 {
        return Err(MetricsError::NonPositiveImproved(improved));
    }
    Ok((existing - improved).abs() / improved * 100.0)
}

/// `improvement_pct` rounded to 2 decimals for reporting.
pub fn improvement_pct_rounded(existing: f64, improved: f64) -> Result<f64, MetricsError> {
    improvement_pct(existing, improved).map(|p| (p * 100.0).round() / 100.0)
}

/// Checkpoint-engine counters exposed per run.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CheckpointStats {
    /// Checkpoints durably committed on their origin.
    pub checkpoints_taken: u64,
    /// Replica transfers that landed on a peer.
    pub replica_writes: u64,
    pub bytes_replicated: f64,
    /// Records superseded, swept, or expelled on job completion.
    pub purges_executed: u64,
    /// Commits that found fewer alive peers than the replica factor.
    pub degraded_replications: u64,
    /// Total job time spent suspended while committing checkpoints.
    pub suspension_time: f64,
    pub recoveries_from_origin: u64,
    pub recoveries_from_replica: u64,
    pub recoveries_restart: u64,
    /// Restarts from progress 0 for jobs that already had a durable
    /// checkpoint (all copies of it died).
    pub restarts_after_first_checkpoint: u64,
}

impl CheckpointStats {
    pub fn record_recovery(&mut self, source: RecoverySource) {
        match source {
            RecoverySource::OriginSurvivor => self.recoveries_from_origin += 1,
            RecoverySource::Replica => self.recoveries_from_replica += 1,
            RecoverySource::Restart => self.recoveries_restart += 1,
        }
    }
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n_jobs: u64,
    pub makespan: SimTime,
    /// Jobs per sim-second; exactly `n_jobs / makespan`.
    pub throughput: f64,
    /// Average turnaround time.
    pub atat: SimTime,
    pub failures_injected: u64,
    /// Gridlets that experienced at least one failure.
    pub jobs_hit_by_failure: u64,
    pub checkpoint: CheckpointStats,
    /// Events left in the queue at termination that belong to the job
    /// lifecycle (always 0 on a healthy run).
    pub stranded_job_events: u64,
    pub total_events: u64,
}
