//! One simulation run: wires the kernel, fault model, checkpoint engine,
//! scheduler, and metrics together.
//!
//! Execution model: a dispatched gridlet occupies one PE; a resource runs up
//! to `machines x PEs` gridlets concurrently and queues the rest FIFO (each
//! PE keeps a reserved timeline, so completion times are computed at
//! dispatch). A dispatch executes for its response-time estimate, suspended
//! `base_write_time` per committed checkpoint; progress advances linearly
//! over the working segments. A resource failure kills every job assigned to
//! it, wipes its local checkpoint records, and each victim resumes from the
//! best surviving record (or from scratch when nothing survived).

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;

use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::checkpoint::{
    choose_replica_holders, plan_adaptive, plan_baseline, response_time, AuditReport,
    CheckpointStore, RecoverySource,
};
use crate::fault::{mean_failure_rate, rate_of, sample_failure_offset, FaultParams, TendencyTracker};
use crate::kernel::{Event, EventKind, Kernel, KernelError};
use crate::metrics::{self, CheckpointStats, MetricsError, RunReport};
use crate::model::{
    CheckpointCostModel, CheckpointRecord, ConfigError, GridResource, Gridlet, JobId, JobStatus,
    ModelError, Policy, ResourceId, SimTime, ValidatedConfig,
};
use crate::rng;
use crate::scheduler::{admit, select_resource, CandidateView, Outcome, PheromoneTable};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("liveness violated: {unfinished} gridlets unfinished at t={clock} with no pending events")]
    Stalled { clock: SimTime, unfinished: usize },
    #[error("repository audit failed at end of run: {0:?}")]
    DirtyRepository(AuditReport),
}

/// One recovery served after a resource failure, kept for work-loss audits.
#[derive(Debug, Clone)]
pub struct RecoveryEvent {
    pub job: JobId,
    pub progress_at_failure: f64,
    pub recovered_progress: f64,
    /// Progress the failed dispatch started from.
    pub dispatch_start_progress: f64,
    /// Response time of the failed dispatch (covers the remaining work).
    pub dispatch_rt: SimTime,
    pub plan_count: u64,
    pub plan_interval: Option<f64>,
    pub write_cost: f64,
    pub served_seq: Option<u64>,
    /// Highest seq ever durably committed for the job at failure time.
    pub latest_durable_seq: Option<u64>,
    pub source: RecoverySource,
}

impl RecoveryEvent {
    /// Work lost to the failure, in sim-seconds of the failed dispatch's
    /// timeline.
    pub fn lost_work_time(&self) -> f64 {
        let span = 1.0 - self.dispatch_start_progress;
        if span <= 0.0 {
            return 0.0;
        }
        (self.progress_at_failure - self.recovered_progress).max(0.0) / span * self.dispatch_rt
    }

    /// Whether the lost-work bound (one plan interval plus commit time)
    /// applies: the dispatch had a plan, and the recovery was served from
    /// the latest durably committed state (i.e. a copy of it survived).
    pub fn bound_applies(&self) -> bool {
        self.plan_count >= 1 && self.served_seq.is_some() && self.served_seq == self.latest_durable_seq
    }
}

struct ActiveDispatch {
    resource: usize,
    /// Execution start on the reserved PE (>= dispatch time).
    t0: SimTime,
    /// Working duration without checkpoint suspensions; equals the
    /// response-time estimate for the remaining work.
    duration: SimTime,
    start_progress: f64,
    plan_count: u64,
    plan_interval: f64,
    /// Milestones that actually commit (the final milestone lands on the
    /// completion instant and is skipped).
    commits: u64,
    write_cost: f64,
}

impl ActiveDispatch {
    fn milestone_progress(&self, i: u64) -> f64 {
        if self.duration <= 0.0 {
            return 1.0;
        }
        self.start_progress
            + (1.0 - self.start_progress) * (i as f64 * self.plan_interval) / self.duration
    }

    fn milestone_time(&self, i: u64) -> SimTime {
        self.t0 + i as f64 * self.plan_interval + (i - 1) as f64 * self.write_cost
    }

    fn completion_time(&self) -> SimTime {
        self.t0 + self.duration + self.commits as f64 * self.write_cost
    }

    /// Progress at wall time `t`: linear over working segments, frozen
    /// during checkpoint commits.
    fn progress_at(&self, t: SimTime) -> f64 {
        if t <= self.t0 || self.duration <= 0.0 {
            return self.start_progress;
        }
        let tau = t - self.t0;
        let worked = if self.plan_count == 0 || self.commits == 0 {
            tau
        } else {
            let cycle = self.plan_interval + self.write_cost;
            let full = (tau / cycle).floor().min(self.commits as f64);
            if full >= self.commits as f64 {
                self.commits as f64 * self.plan_interval + (tau - self.commits as f64 * cycle).max(0.0)
            } else {
                full * self.plan_interval + (tau - full * cycle).min(self.plan_interval)
            }
        };
        let frac = (worked / self.duration).clamp(0.0, 1.0);
        (self.start_progress + (1.0 - self.start_progress) * frac).min(1.0)
    }
}

struct JobState {
    g: Gridlet,
    /// Dispatch epoch; bumped on every dispatch and every kill, so events of
    /// dead dispatches are dropped on arrival.
    dispatch: u64,
    active: Option<ActiveDispatch>,
    finish_time: Option<SimTime>,
    failures: u32,
    had_durable_checkpoint: bool,
}

struct ResourceState {
    res: GridResource,
    params: FaultParams,
    tendency: TendencyTracker,
    pe_free_at: Vec<SimTime>,
    /// Bumped on every failure and repair; write events guard on it.
    epoch: u64,
    fault_rng: ChaCha12Rng,
}

/// A configured, runnable simulation instance. Strictly single-threaded;
/// run independent instances on different threads for multi-seed work.
pub struct Simulation {
    kernel: Kernel,
    state: SimState,
}

struct SimState {
    policy: Policy,
    baseline_interval: f64,
    cost: CheckpointCostModel,
    fail_while_idle: bool,
    repair_delay: f64,
    resources: Vec<ResourceState>,
    jobs: Vec<JobState>,
    pheromone: PheromoneTable,
    store: CheckpointStore,
    pending: VecDeque<JobId>,
    sched_rng: ChaCha12Rng,
    stats: CheckpointStats,
    failures_injected: u64,
    jobs_done: u64,
    recovery_log: Vec<RecoveryEvent>,
}

impl Simulation {
    pub fn new(validated: ValidatedConfig) -> Result<Self, SimError> {
        let cfg = validated.config;
        let seed = cfg.seed;

        let mut gen_rng = rng::stream_rng(seed, rng::STREAM_GRIDLET_GEN);
        let jobs: Vec<JobState> = cfg
            .gridlets
            .generate(&mut gen_rng)?
            .into_iter()
            .map(|g| JobState {
                g,
                dispatch: 0,
                active: None,
                finish_time: None,
                failures: 0,
                had_durable_checkpoint: false,
            })
            .collect();

        let mttfs = cfg.fault.resolve_mttf(cfg.resources.count)?;
        let mut resources = Vec::with_capacity(cfg.resources.count as usize);
        for (i, mttf) in mttfs.into_iter().enumerate() {
            let id = ResourceId(i as u32);
            let res = GridResource::new(
                id,
                cfg.resources.num_machines,
                cfg.resources.pes_per_machine,
                cfg.resources.mips_per_pe,
                cfg.resources.bandwidth,
            )?;
            let pe_count = res.pe_count() as usize;
            resources.push(ResourceState {
                res,
                params: FaultParams {
                    mean_time_to_failure: mttf,
                    repair_delay: cfg.fault.repair_delay(),
                    fail_while_idle: cfg.fault.fail_while_idle,
                },
                tendency: TendencyTracker::default(),
                pe_free_at: vec![0.0; pe_count],
                epoch: 0,
                fault_rng: rng::stream_rng(seed, &rng::fault_stream_tag(i as u32)),
            });
        }

        let pheromone = PheromoneTable::new(resources.len(), cfg.scheduler);
        let state = SimState {
            policy: cfg.policy,
            baseline_interval: cfg.baseline_interval.unwrap_or(f64::INFINITY),
            cost: cfg.checkpoint,
            fail_while_idle: cfg.fault.fail_while_idle,
            repair_delay: cfg.fault.repair_delay(),
            resources,
            jobs,
            pheromone,
            store: CheckpointStore::new(),
            pending: VecDeque::new(),
            sched_rng: rng::stream_rng(seed, rng::STREAM_SCHEDULER),
            stats: CheckpointStats::default(),
            failures_injected: 0,
            jobs_done: 0,
            recovery_log: Vec::new(),
        };
        Ok(Self { kernel: Kernel::new(), state })
    }

    /// Dump one tab-separated line per processed event into `sink`.
    pub fn set_trace(&mut self, sink: Box<dyn Write>) {
        self.kernel.set_trace(sink);
    }

    /// Run to batch completion and report. Errors if the grid can make no
    /// further progress with gridlets unfinished.
    pub fn run(&mut self) -> Result<RunReport, SimError> {
        self.seed_events()?;
        let n_jobs = self.state.jobs.len() as u64;
        while self.state.jobs_done < n_jobs {
            match self.kernel.pop()? {
                Some(ev) => self.state.handle_event(&mut self.kernel, ev)?,
                None => {
                    return Err(SimError::Stalled {
                        clock: self.kernel.clock(),
                        unfinished: (n_jobs - self.state.jobs_done) as usize,
                    });
                }
            }
        }

        // Only infrastructure noise (future failures/repairs) and
        // guard-droppable replica writes may remain once the batch is done.
        let leftovers = self.kernel.drain_pending();
        let stranded_job_events = leftovers
            .iter()
            .filter(|ev| {
                matches!(
                    ev.kind,
                    EventKind::Dispatch { .. }
                        | EventKind::CheckpointDue { .. }
                        | EventKind::JobComplete { .. }
                )
            })
            .count() as u64;

        let audit = self.audit();
        if !audit.clean() || audit.total_records != 0 {
            return Err(SimError::DirtyRepository(audit));
        }

        self.build_report(stranded_job_events)
    }

    fn seed_events(&mut self) -> Result<(), SimError> {
        for i in 0..self.state.jobs.len() {
            let job = &self.state.jobs[i];
            self.kernel
                .schedule(job.g.submit_time, EventKind::Dispatch { job: job.g.id })?;
        }
        for i in 0..self.state.resources.len() {
            let r = &mut self.state.resources[i];
            if let Some(off) = sample_failure_offset(r.params.mean_time_to_failure, &mut r.fault_rng) {
                self.kernel.schedule(off, EventKind::ResourceFail { resource: r.res.id })?;
            }
        }
        Ok(())
    }

    fn build_report(&self, stranded_job_events: u64) -> Result<RunReport, SimError> {
        let finish_times: Vec<f64> =
            self.state.jobs.iter().map(|j| j.finish_time.expect("all jobs finished")).collect();
        let pairs: Vec<(f64, f64)> = self
            .state
            .jobs
            .iter()
            .map(|j| (j.g.submit_time, j.finish_time.expect("all jobs finished")))
            .collect();
        let makespan = metrics::makespan(&finish_times)?;
        let mut stats = self.state.stats;
        stats.purges_executed = self.state.store.purges();
        Ok(RunReport {
            n_jobs: self.state.jobs.len() as u64,
            makespan,
            throughput: metrics::throughput(self.state.jobs.len() as u64, makespan)?,
            atat: metrics::avg_turnaround(&pairs)?,
            failures_injected: self.state.failures_injected,
            jobs_hit_by_failure: self.state.jobs.iter().filter(|j| j.failures > 0).count() as u64,
            checkpoint: stats,
            stranded_job_events,
            total_events: self.kernel.processed(),
        })
    }

    /// Recoveries served during the run, in order.
    pub fn recovery_log(&self) -> &[RecoveryEvent] {
        &self.state.recovery_log
    }

    /// Grid-wide repository audit against current job states.
    pub fn audit(&self) -> AuditReport {
        let done: BTreeSet<JobId> = self
            .state
            .jobs
            .iter()
            .filter(|j| j.g.status() == JobStatus::Success)
            .map(|j| j.g.id)
            .collect();
        self.state.store.audit(|job| done.contains(&job))
    }

    pub fn gridlets(&self) -> impl Iterator<Item = &Gridlet> {
        self.state.jobs.iter().map(|j| &j.g)
    }

    pub fn clock(&self) -> SimTime {
        self.kernel.clock()
    }
}

impl SimState {
    fn handle_event(&mut self, kernel: &mut Kernel, ev: Event) -> Result<(), SimError> {
        let now = ev.fire_time;
        match ev.kind {
            EventKind::Dispatch { job } => self.on_submit(kernel, job, now),
            EventKind::CheckpointDue { job, dispatch, milestone } => {
                self.on_checkpoint_due(kernel, job, dispatch, milestone, now)
            }
            EventKind::JobComplete { job, dispatch } => self.on_job_complete(kernel, job, dispatch, now),
            EventKind::ResourceFail { resource } => self.on_resource_fail(kernel, resource, now),
            EventKind::ResourceRepair { resource } => self.on_resource_repair(kernel, resource, now),
            EventKind::ReplicaWriteDone { holder, holder_epoch, origin_epoch, record } => {
                self.on_write_done(holder, holder_epoch, origin_epoch, record);
                Ok(())
            }
        }
    }

    fn on_submit(&mut self, kernel: &mut Kernel, job: JobId, now: SimTime) -> Result<(), SimError> {
        let js = &mut self.jobs[job.0 as usize];
        if js.g.status() == JobStatus::Created {
            js.g.enqueue()?;
        }
        self.pending.push_back(job);
        self.scheduling_pass(kernel, now)
    }

    /// Assign as many pending gridlets as admission allows, FIFO.
    fn scheduling_pass(&mut self, kernel: &mut Kernel, now: SimTime) -> Result<(), SimError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let mut still_pending = VecDeque::new();
        while let Some(job) = self.pending.pop_front() {
            let views = self.candidate_views();
            let fr_mean = mean_failure_rate(self.resources.iter().map(|r| &r.res.fault_index)).ok();
            let candidates: Vec<CandidateView> = views
                .iter()
                .filter(|v| v.alive && admit(v, fr_mean, &views))
                .copied()
                .collect();
            match select_resource(&candidates, &self.pheromone, &mut self.sched_rng) {
                None => still_pending.push_back(job),
                Some(idx) => self.dispatch_job(kernel, job, idx, fr_mean, now)?,
            }
        }
        self.pending = still_pending;
        Ok(())
    }

    fn candidate_views(&self) -> Vec<CandidateView> {
        self.resources
            .iter()
            .enumerate()
            .map(|(i, r)| CandidateView {
                index: i,
                id: r.res.id,
                alive: r.res.alive,
                rate: rate_of(&r.res.fault_index),
                workload: r.res.queue.len(),
                capacity: r.res.capacity(),
            })
            .collect()
    }

    /// Route one gridlet to a resource: compute the checkpoint plan for the
    /// remaining work, reserve the earliest-free PE, and schedule the
    /// completion plus one CheckpointDue per planned milestone.
    fn dispatch_job(
        &mut self,
        kernel: &mut Kernel,
        job: JobId,
        r_idx: usize,
        fr_mean: Option<f64>,
        now: SimTime,
    ) -> Result<(), SimError> {
        if !self.resources[r_idx].res.alive {
            // Died between selection and dispatch: back to the queue.
            self.pending.push_back(job);
            return Ok(());
        }
        let fr = rate_of(&self.resources[r_idx].res.fault_index).unwrap_or(0.0);
        let fd = self.resources[r_idx].tendency.value();
        let mips = self.resources[r_idx].res.mips_per_pe;
        let bandwidth = self.resources[r_idx].res.bandwidth;

        let js = &mut self.jobs[job.0 as usize];
        let p0 = js.g.progress();
        let rt = response_time(
            js.g.length * (1.0 - p0),
            js.g.input_size + js.g.output_size,
            mips,
            bandwidth,
        );
        let plan = match self.policy {
            Policy::Baseline => plan_baseline(rt, self.baseline_interval),
            Policy::Adaptive => plan_adaptive(rt, fr, fd, fr_mean.unwrap_or(0.0)),
        };
        let count = plan.count();
        let interval = plan.interval().unwrap_or(0.0);
        // The final milestone coincides with completion (progress 1) and is
        // never committed.
        let commits = if count > 0 && count as f64 * interval >= rt - 1e-9 * rt.max(1.0) {
            count - 1
        } else {
            count
        };

        let r = &mut self.resources[r_idx];
        r.res.fault_index.record_dispatch();
        let pe = r
            .pe_free_at
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .expect("resource has at least one PE");
        let t0 = now.max(r.pe_free_at[pe]);

        js.dispatch += 1;
        let dispatch = js.dispatch;
        let active = ActiveDispatch {
            resource: r_idx,
            t0,
            duration: rt,
            start_progress: p0,
            plan_count: count,
            plan_interval: interval,
            commits,
            write_cost: self.cost.base_write_time,
        };
        let t_end = active.completion_time();
        r.pe_free_at[pe] = t_end;
        r.res.queue.push(job);
        js.g.start_running()?;

        kernel.schedule(t_end, EventKind::JobComplete { job, dispatch })?;
        for i in 1..=count {
            kernel.schedule(
                active.milestone_time(i),
                EventKind::CheckpointDue { job, dispatch, milestone: i },
            )?;
        }
        js.active = Some(active);
        Ok(())
    }

    fn on_checkpoint_due(
        &mut self,
        kernel: &mut Kernel,
        job: JobId,
        dispatch: u64,
        milestone: u64,
        now: SimTime,
    ) -> Result<(), SimError> {
        let js = &self.jobs[job.0 as usize];
        if js.dispatch != dispatch || js.active.is_none() {
            return Ok(()); // stale: the dispatch failed or completed
        }
        let act = js.active.as_ref().unwrap();
        let progress = act.milestone_progress(milestone);
        if progress >= 1.0 - 1e-12 || progress <= 0.0 {
            return Ok(()); // degenerate milestone at the completion instant
        }
        let r_idx = act.resource;
        let origin = self.resources[r_idx].res.id;
        let origin_epoch = self.resources[r_idx].epoch;

        let seq = self.store.stage(job);
        let holders = choose_replica_holders(
            origin,
            self.cost.replica_factor,
            self.resources.iter().map(|r| (r.res.id, r.res.alive, rate_of(&r.res.fault_index))),
        );
        if (holders.len() as u32) < self.cost.replica_factor {
            self.stats.degraded_replications += 1;
        }
        let record = CheckpointRecord {
            job,
            progress,
            seq,
            taken_at: now,
            origin,
            replicas: holders.iter().copied().collect(),
        };

        // The job suspends for the local commit; replica transfers then
        // occupy each holder's bandwidth without blocking the job.
        self.stats.suspension_time += self.cost.base_write_time;
        let commit_done = now + self.cost.base_write_time;
        kernel.schedule(
            commit_done,
            EventKind::ReplicaWriteDone {
                holder: origin,
                holder_epoch: origin_epoch,
                origin_epoch,
                record: record.clone(),
            },
        )?;
        for h in holders {
            let hs = &self.resources[h.0 as usize];
            let transfer = self.cost.size_per_checkpoint / hs.res.bandwidth;
            kernel.schedule(
                commit_done + transfer,
                EventKind::ReplicaWriteDone {
                    holder: h,
                    holder_epoch: hs.epoch,
                    origin_epoch,
                    record: record.clone(),
                },
            )?;
        }
        Ok(())
    }

    fn on_write_done(
        &mut self,
        holder: ResourceId,
        holder_epoch: u64,
        origin_epoch: u64,
        record: CheckpointRecord,
    ) {
        if self.jobs[record.job.0 as usize].g.status() == JobStatus::Success {
            return; // records for completed jobs stay expelled
        }
        let hs = &self.resources[holder.0 as usize];
        if !hs.res.alive || hs.epoch != holder_epoch {
            return; // holder crashed (or cycled) since the write started
        }
        if holder != record.origin {
            let os = &self.resources[record.origin.0 as usize];
            if !os.res.alive || os.epoch != origin_epoch {
                return; // transfer interrupted by the origin's crash
            }
        }
        let is_commit = holder == record.origin;
        let job = record.job;
        let seq = record.seq;
        let keep: BTreeSet<ResourceId> =
            record.replicas.iter().copied().chain([record.origin]).collect();
        self.store.land(holder, record);
        if is_commit {
            self.stats.checkpoints_taken += 1;
            self.jobs[job.0 as usize].had_durable_checkpoint = true;
            // Committing seq s purges every older record, except on holders
            // still waiting for their copy of s (they replace on arrival).
            self.store.sweep_purge(job, seq, &keep);
        } else {
            self.stats.replica_writes += 1;
            self.stats.bytes_replicated += self.cost.size_per_checkpoint;
        }
    }

    fn on_job_complete(
        &mut self,
        kernel: &mut Kernel,
        job: JobId,
        dispatch: u64,
        now: SimTime,
    ) -> Result<(), SimError> {
        let js = &mut self.jobs[job.0 as usize];
        if js.dispatch != dispatch || js.active.is_none() {
            return Ok(());
        }
        let act = js.active.take().unwrap();
        let r_idx = act.resource;
        js.g.complete()?;
        js.finish_time = Some(now);
        self.jobs_done += 1;

        let r = &mut self.resources[r_idx];
        r.res.queue.retain(|j| *j != job);
        r.res.fault_index.record_success();
        let rate = rate_of(&r.res.fault_index).expect("dispatched implies rated");
        r.tendency.observe(rate);
        self.pheromone.update(r_idx, Outcome::Success);
        self.store.clear_job(job);
        self.scheduling_pass(kernel, now)
    }

    fn on_resource_fail(
        &mut self,
        kernel: &mut Kernel,
        resource: ResourceId,
        now: SimTime,
    ) -> Result<(), SimError> {
        let r_idx = resource.0 as usize;
        if !self.resources[r_idx].res.alive {
            return Ok(());
        }
        if !self.fail_while_idle && self.resources[r_idx].res.queue.is_empty() {
            // Idle resources are exempt under this fault model; roll the
            // next arrival.
            let r = &mut self.resources[r_idx];
            if let Some(off) = sample_failure_offset(r.params.mean_time_to_failure, &mut r.fault_rng) {
                kernel.schedule(now + off, EventKind::ResourceFail { resource })?;
            }
            return Ok(());
        }

        self.failures_injected += 1;
        let victims: Vec<JobId> = {
            let r = &mut self.resources[r_idx];
            r.res.alive = false;
            r.epoch += 1;
            r.res.queue.drain(..).collect()
        };
        self.store.wipe_node(resource);

        for job in victims {
            let js = &mut self.jobs[job.0 as usize];
            let act = js.active.take().expect("assigned jobs have an active dispatch");
            let progress_at_failure = act.progress_at(now);

            let r = &mut self.resources[r_idx];
            r.res.fault_index.record_failure();
            let rate = rate_of(&r.res.fault_index).expect("dispatched implies rated");
            r.tendency.observe(rate);
            self.pheromone.update(r_idx, Outcome::Failure);

            let recovery = self.store.recover(job);
            self.stats.record_recovery(recovery.source);
            let js = &mut self.jobs[job.0 as usize];
            if js.had_durable_checkpoint && recovery.source == RecoverySource::Restart {
                self.stats.restarts_after_first_checkpoint += 1;
            }
            self.recovery_log.push(RecoveryEvent {
                job,
                progress_at_failure,
                recovered_progress: recovery.progress,
                dispatch_start_progress: act.start_progress,
                dispatch_rt: act.duration,
                plan_count: act.plan_count,
                plan_interval: if act.plan_count > 0 { Some(act.plan_interval) } else { None },
                write_cost: act.write_cost,
                served_seq: recovery.seq,
                latest_durable_seq: self.store.latest_durable(job).map(|(s, _)| s),
                source: recovery.source,
            });

            js.g.fail_and_requeue(recovery.progress)?;
            js.dispatch += 1; // invalidate the dead dispatch's events
            js.failures += 1;
            self.pending.push_back(job);
        }

        if self.repair_delay.is_finite() {
            kernel.schedule(now + self.repair_delay, EventKind::ResourceRepair { resource })?;
        }
        self.scheduling_pass(kernel, now)
    }

    fn on_resource_repair(
        &mut self,
        kernel: &mut Kernel,
        resource: ResourceId,
        now: SimTime,
    ) -> Result<(), SimError> {
        let r_idx = resource.0 as usize;
        {
            let r = &mut self.resources[r_idx];
            if r.res.alive {
                return Ok(());
            }
            r.res.alive = true;
            r.epoch += 1;
            r.pe_free_at.fill(now);
            if let Some(off) = sample_failure_offset(r.params.mean_time_to_failure, &mut r.fault_rng) {
                kernel.schedule(now + off, EventKind::ResourceFail { resource })?;
            }
        }
        self.scheduling_pass(kernel, now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FaultClass, FaultSpec, LengthSpec, SimConfig};

    fn small_config() -> SimConfig {
        let mut cfg = SimConfig::paper_defaults();
        cfg.resources.count = 10;
        cfg.gridlets.count = 40;
        cfg.fault = FaultSpec::default(); // no failures
        cfg.seed = 3;
        cfg
    }

    fn run(cfg: SimConfig) -> (RunReport, Vec<RecoveryEvent>) {
        let mut sim = Simulation::new(cfg.validate().unwrap()).unwrap();
        let report = sim.run().unwrap();
        (report, sim.recovery_log().to_vec())
    }

    #[test]
    fn all_jobs_succeed_without_faults() {
        let (report, _) = run(small_config());
        assert_eq!(report.n_jobs, 40);
        assert_eq!(report.failures_injected, 0);
        assert_eq!(report.stranded_job_events, 0);
        assert!(report.makespan > 0.0);
        assert!((report.throughput * report.makespan - 40.0).abs() < 1e-9);
    }

    #[test]
    fn identical_seeds_produce_identical_traces() {
        let trace_of = || {
            use std::sync::{Arc, Mutex};
            #[derive(Clone)]
            struct Sink(Arc<Mutex<Vec<u8>>>);
            impl Write for Sink {
                fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                    self.0.lock().unwrap().extend_from_slice(b);
                    Ok(b.len())
                }
                fn flush(&mut self) -> std::io::Result<()> {
                    Ok(())
                }
            }
            let buf = Sink(Arc::new(Mutex::new(Vec::new())));
            let mut cfg = small_config();
            cfg.fault.mttf = Some(2000.0);
            cfg.fault.repair_delay = Some(150.0);
            let mut sim = Simulation::new(cfg.validate().unwrap()).unwrap();
            sim.set_trace(Box::new(buf.clone()));
            sim.run().unwrap();
            let bytes = buf.0.lock().unwrap().clone();
            String::from_utf8(bytes).unwrap()
        };
        let a = trace_of();
        assert!(!a.is_empty());
        assert_eq!(a, trace_of());
    }

    #[test]
    fn adaptive_without_failure_history_takes_no_checkpoints() {
        let mut cfg = small_config();
        cfg.policy = Policy::Adaptive;
        let (report, _) = run(cfg);
        assert_eq!(report.checkpoint.checkpoints_taken, 0);
        assert_eq!(report.checkpoint.suspension_time, 0.0);
    }

    #[test]
    fn baseline_checkpoints_and_pays_suspension() {
        let mut cfg = small_config();
        cfg.policy = Policy::Baseline;
        cfg.baseline_interval = Some(50.0);
        let (report, _) = run(cfg);
        assert!(report.checkpoint.checkpoints_taken > 0);
        assert!(
            (report.checkpoint.suspension_time
                - report.checkpoint.checkpoints_taken as f64 * 0.25)
                .abs()
                < 1e-9
        );
        // No failures: every staged checkpoint commits durably, replicas land.
        assert_eq!(
            report.checkpoint.replica_writes,
            report.checkpoint.checkpoints_taken * 2
        );
    }

    #[test]
    fn makespan_grows_by_exactly_the_suspensions_on_one_pe() {
        // Single PE: the critical path is the whole batch, so the overhead
        // accounting is exact.
        let base = {
            let mut cfg = small_config();
            cfg.resources.count = 1;
            cfg.resources.pes_per_machine = 1;
            cfg.gridlets.count = 12;
            cfg
        };
        let mut no_ckpt = base.clone();
        no_ckpt.policy = Policy::Baseline;
        no_ckpt.baseline_interval = None;
        let (plain, _) = run(no_ckpt);
        assert_eq!(plain.checkpoint.checkpoints_taken, 0);

        let mut periodic = base;
        periodic.policy = Policy::Baseline;
        periodic.baseline_interval = Some(40.0);
        let (ckpt, _) = run(periodic);
        assert!(ckpt.checkpoint.checkpoints_taken > 0);
        let diff = ckpt.makespan - plain.makespan;
        assert!(
            (diff - ckpt.checkpoint.suspension_time).abs() <= 1e-6 * ckpt.makespan,
            "diff {diff} vs suspensions {}",
            ckpt.checkpoint.suspension_time
        );
    }

    #[test]
    fn failures_recover_and_finish() {
        let mut cfg = small_config();
        cfg.resources.count = 8;
        cfg.gridlets.count = 60;
        cfg.fault = FaultSpec {
            mttf: None,
            classes: vec![
                FaultClass { count: Some(2), fraction: None, mttf: None },
                FaultClass { count: None, fraction: None, mttf: Some(1500.0) },
            ],
            repair_delay: Some(120.0),
            fail_while_idle: true,
        };
        cfg.policy = Policy::Baseline;
        cfg.baseline_interval = Some(25.0);
        cfg.seed = 11;
        let (report, recoveries) = run(cfg);
        assert!(report.failures_injected > 0, "fault model injected nothing");
        assert!(!recoveries.is_empty());
        assert_eq!(report.n_jobs, 60);
        assert_eq!(report.stranded_job_events, 0);
        // Conservation: one completion per gridlet even with re-dispatches.
        assert!(report.jobs_hit_by_failure <= report.n_jobs);
    }

    #[test]
    fn work_loss_bounded_when_latest_checkpoint_survives() {
        let mut cfg = small_config();
        cfg.resources.count = 8;
        cfg.gridlets.count = 80;
        cfg.fault = FaultSpec {
            mttf: None,
            classes: vec![
                FaultClass { count: Some(2), fraction: None, mttf: None },
                FaultClass { count: None, fraction: None, mttf: Some(900.0) },
            ],
            repair_delay: Some(100.0),
            fail_while_idle: true,
        };
        cfg.policy = Policy::Baseline;
        cfg.baseline_interval = Some(20.0);
        cfg.seed = 5;
        let (_, recoveries) = run(cfg);
        let audited: Vec<_> = recoveries.iter().filter(|r| r.bound_applies()).collect();
        assert!(!audited.is_empty(), "no bounded recoveries exercised");
        for rec in audited {
            let bound = rec.plan_interval.unwrap() + rec.write_cost;
            assert!(
                rec.lost_work_time() <= bound + 1e-9,
                "lost {} > bound {}",
                rec.lost_work_time(),
                bound
            );
        }
    }

    #[test]
    fn zero_length_gridlets_complete_instantly() {
        let mut cfg = small_config();
        cfg.gridlets.count = 5;
        cfg.gridlets.length = LengthSpec::Fixed(0.0);
        let (report, _) = run(cfg);
        assert_eq!(report.n_jobs, 5);
        assert!(report.makespan < 1.0); // only I/O time remains
    }

    #[test]
    fn stalls_when_every_resource_is_dead_fail_stop() {
        let mut cfg = small_config();
        cfg.resources.count = 2;
        cfg.gridlets.count = 30;
        cfg.gridlets.length = LengthSpec::Fixed(40_000.0);
        cfg.fault = FaultSpec {
            mttf: Some(200.0),
            classes: vec![],
            repair_delay: None, // fail-stop
            fail_while_idle: true,
        };
        let mut sim = Simulation::new(cfg.validate().unwrap()).unwrap();
        match sim.run() {
            Err(SimError::Stalled { unfinished, .. }) => assert!(unfinished > 0),
            other => panic!("expected stall, got {other:?}"),
        }
    }
}
