//! Deterministic discrete-event engine.
//!
//! Events fire in non-decreasing `fire_time`; ties break by insertion order.
//! A kernel instance is strictly single-threaded; independent instances may
//! run on different threads with no shared state.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::model::{CheckpointRecord, JobId, ResourceId, SimTime};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("cannot schedule event at t={fire_time} before current clock t={clock}")]
    ScheduleIntoPast { fire_time: SimTime, clock: SimTime },
    #[error("event fire time must be finite, got {0}")]
    NonFiniteTime(SimTime),
    #[error("no handler registered for event kind `{0}`")]
    UnhandledEvent(&'static str),
    #[error("event trace write failed: {0}")]
    Trace(#[from] std::io::Error),
}

/// What an event does; the payload is kind-specific.
#[derive(Debug, Clone)]
pub enum EventKind {
    /// A gridlet arrives at the broker (initial submission or re-queue).
    Dispatch { job: JobId },
    /// A planned checkpoint milestone for one dispatch of a job.
    CheckpointDue { job: JobId, dispatch: u64, milestone: u64 },
    /// A dispatched job finishes all its work.
    JobComplete { job: JobId, dispatch: u64 },
    ResourceFail { resource: ResourceId },
    ResourceRepair { resource: ResourceId },
    /// A checkpoint record lands on `holder` (the origin's own commit when
    /// `holder == record.origin`, a replica transfer otherwise).
    ReplicaWriteDone {
        holder: ResourceId,
        holder_epoch: u64,
        origin_epoch: u64,
        record: CheckpointRecord,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Dispatch { .. } => "Dispatch",
            EventKind::CheckpointDue { .. } => "CheckpointDue",
            EventKind::JobComplete { .. } => "JobComplete",
            EventKind::ResourceFail { .. } => "ResourceFail",
            EventKind::ResourceRepair { .. } => "ResourceRepair",
            EventKind::ReplicaWriteDone { .. } => "ReplicaWriteDone",
        }
    }

    fn payload_summary(&self) -> String {
        match self {
            EventKind::Dispatch { job } => format!("{job}"),
            EventKind::CheckpointDue { job, dispatch, milestone } => {
                format!("{job} d{dispatch} m{milestone}")
            }
            EventKind::JobComplete { job, dispatch } => format!("{job} d{dispatch}"),
            EventKind::ResourceFail { resource } => format!("{resource}"),
            EventKind::ResourceRepair { resource } => format!("{resource}"),
            EventKind::ReplicaWriteDone { holder, record, .. } => {
                format!("{} seq{} of {} from {}", holder, record.seq, record.job, record.origin)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Event {
    pub fire_time: SimTime,
    /// Insertion tiebreaker: events at equal times pop in schedule order.
    pub seq: u64,
    pub kind: EventKind,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}\t{}\t{}", self.fire_time, self.kind.name(), self.kind.payload_summary())
    }
}

struct HeapEntry(Event);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.fire_time == other.0.fire_time && self.0.seq == other.0.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // BinaryHeap is a max-heap; reverse for earliest-time, lowest-seq first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .fire_time
            .partial_cmp(&self.0.fire_time)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Reacts to popped events. Return `KernelError::UnhandledEvent` for kinds
/// the handler does not serve; `run` halts on it with a diagnostic.
pub trait EventHandler {
    fn handle(&mut self, kernel: &mut Kernel, ev: Event) -> Result<(), KernelError>;
}

/// Simulation clock plus time-ordered event queue.
pub struct Kernel {
    clock: SimTime,
    next_seq: u64,
    heap: BinaryHeap<HeapEntry>,
    processed: u64,
    trace: Option<Box<dyn Write>>,
}

impl Kernel {
    pub fn new() -> Self {
        Self { clock: 0.0, next_seq: 0, heap: BinaryHeap::new(), processed: 0, trace: None }
    }

    /// Dump one tab-separated line (fire_time, kind, payload summary) per
    /// processed event into `sink`, for replay diffing.
    pub fn set_trace(&mut self, sink: Box<dyn Write>) {
        self.trace = Some(sink);
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn schedule(&mut self, fire_time: SimTime, kind: EventKind) -> Result<(), KernelError> {
        if !fire_time.is_finite() {
            return Err(KernelError::NonFiniteTime(fire_time));
        }
        if fire_time < self.clock {
            return Err(KernelError::ScheduleIntoPast { fire_time, clock: self.clock });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(HeapEntry(Event { fire_time, seq, kind }));
        Ok(())
    }

    /// Pop the next event (if any), advancing the clock to its fire time and
    /// tracing it.
    pub fn pop(&mut self) -> Result<Option<Event>, KernelError> {
        match self.heap.pop() {
            None => Ok(None),
            Some(HeapEntry(ev)) => {
                debug_assert!(ev.fire_time >= self.clock, "clock monotonicity");
                self.clock = ev.fire_time;
                self.processed += 1;
                if let Some(trace) = &mut self.trace {
                    writeln!(trace, "{ev}")?;
                }
                Ok(Some(ev))
            }
        }
    }

    /// Peek at the next fire time without popping.
    pub fn next_fire_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.0.fire_time)
    }

    /// Drop all pending events, returning them in pop order.
    pub fn drain_pending(&mut self) -> Vec<Event> {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(HeapEntry(ev)) = self.heap.pop() {
            out.push(ev);
        }
        out
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Self::new()
    }
}

/// Process events in order until the queue is exhausted or the next event
/// would fire after `until`. Returns the final clock value (the fire time of
/// the last processed event).
pub fn run<H: EventHandler>(
    kernel: &mut Kernel,
    handler: &mut H,
    until: Option<SimTime>,
) -> Result<SimTime, KernelError> {
    loop {
        if let (Some(limit), Some(next)) = (until, kernel.next_fire_time()) {
            if next > limit {
                break;
            }
        }
        match kernel.pop()? {
            None => break,
            Some(ev) => handler.handle(kernel, ev)?,
        }
    }
    Ok(kernel.clock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;
    use std::rc::Rc;

    struct Recorder {
        seen: Vec<(SimTime, u64)>,
    }

    impl EventHandler for Recorder {
        fn handle(&mut self, _k: &mut Kernel, ev: Event) -> Result<(), KernelError> {
            match ev.kind {
                EventKind::Dispatch { .. } => {
                    self.seen.push((ev.fire_time, ev.seq));
                    Ok(())
                }
                other => Err(KernelError::UnhandledEvent(other.name())),
            }
        }
    }

    fn dispatch(job: u32) -> EventKind {
        EventKind::Dispatch { job: JobId(job) }
    }

    #[test]
    fn schedule_into_past_rejected() {
        let mut k = Kernel::new();
        k.schedule(5.0, dispatch(0)).unwrap();
        let mut h = Recorder { seen: vec![] };
        run(&mut k, &mut h, None).unwrap();
        assert_eq!(k.clock(), 5.0);
        let err = k.schedule(3.0, dispatch(1)).unwrap_err();
        assert!(matches!(err, KernelError::ScheduleIntoPast { .. }));
        // Scheduling exactly at the clock is allowed.
        k.schedule(5.0, dispatch(2)).unwrap();
    }

    #[test]
    fn pop_order_is_time_then_insertion() {
        let mut k = Kernel::new();
        k.schedule(5.0, dispatch(0)).unwrap();
        k.schedule(3.0, dispatch(1)).unwrap();
        k.schedule(3.0, dispatch(2)).unwrap();
        let mut h = Recorder { seen: vec![] };
        run(&mut k, &mut h, None).unwrap();
        let times: Vec<f64> = h.seen.iter().map(|(t, _)| *t).collect();
        assert_eq!(times, vec![3.0, 3.0, 5.0]);
        // Ties pop in insertion order (ascending seq).
        assert!(h.seen[0].1 < h.seen[1].1);
    }

    #[test]
    fn empty_queue_leaves_clock_at_zero() {
        let mut k = Kernel::new();
        let mut h = Recorder { seen: vec![] };
        let end = run(&mut k, &mut h, None).unwrap();
        assert_eq!(end, 0.0);
    }

    #[test]
    fn run_to_exhaustion_ends_at_last_event() {
        let mut k = Kernel::new();
        k.schedule(3.0, dispatch(0)).unwrap();
        k.schedule(5.0, dispatch(1)).unwrap();
        let mut h = Recorder { seen: vec![] };
        let end = run(&mut k, &mut h, None).unwrap();
        assert_eq!(end, 5.0);
        assert_eq!(k.pending(), 0);
    }

    #[test]
    fn run_until_stops_before_later_events() {
        let mut k = Kernel::new();
        k.schedule(3.0, dispatch(0)).unwrap();
        k.schedule(8.0, dispatch(1)).unwrap();
        let mut h = Recorder { seen: vec![] };
        let end = run(&mut k, &mut h, Some(5.0)).unwrap();
        assert_eq!(end, 3.0);
        assert_eq!(k.pending(), 1);
    }

    #[test]
    fn unhandled_kind_halts_with_diagnostic() {
        let mut k = Kernel::new();
        k.schedule(1.0, EventKind::ResourceFail { resource: ResourceId(0) }).unwrap();
        let mut h = Recorder { seen: vec![] };
        let err = run(&mut k, &mut h, None).unwrap_err();
        assert!(err.to_string().contains("ResourceFail"));
    }

    #[test]
    fn trace_lines_are_tab_separated_and_reproducible() {
        let render = || {
            let buf = Rc::new(RefCell::new(Vec::<u8>::new()));
            struct Sink(Rc<RefCell<Vec<u8>>>);
            impl std::io::Write for Sink {
                fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                    self.0.borrow_mut().extend_from_slice(b);
                    Ok(b.len())
                }
                fn flush(&mut self) -> std::io::Result<()> {
                    Ok(())
                }
            }
            let mut k = Kernel::new();
            k.set_trace(Box::new(Sink(buf.clone())));
            k.schedule(2.5, dispatch(7)).unwrap();
            k.schedule(4.0, dispatch(8)).unwrap();
            let mut h = Recorder { seen: vec![] };
            run(&mut k, &mut h, None).unwrap();
            let bytes = buf.borrow().clone();
            String::from_utf8(bytes).unwrap()
        };
        let a = render();
        let b = render();
        assert_eq!(a, b);
        let first = a.lines().next().unwrap();
        assert_eq!(first.split('\t').count(), 3);
        assert!(first.contains("Dispatch"));
    }
}
