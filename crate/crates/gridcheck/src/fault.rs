//! Failure injection and fault-index bookkeeping.
//!
//! A resource's failure rate is its failed dispatches over its total
//! dispatches; the fault tendency of a set of rates is their mean expressed
//! as a percentage. Failure arrivals are a Poisson process per resource
//! (exponential inter-arrival with the configured MTTF); a failed resource
//! loses the un-checkpointed progress of everything assigned to it and its
//! locally stored checkpoint records, while replicas elsewhere survive.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use thiserror::Error;

use crate::model::{FaultIndex, SimTime};

#[derive(Debug, Error, PartialEq)]
pub enum FaultError {
    /// A rate was requested for a resource with no dispatches yet. Callers
    /// must treat the resource as unrated, not as rate zero.
    #[error("failure rate undefined: no jobs submitted yet")]
    UndefinedRate,
    #[error("fault tendency needs a non-empty rate list")]
    EmptyRates,
    #[error("failure rate {0} outside [0,1]")]
    RateOutOfRange(f64),
    #[error("failed count {failed} exceeds submitted count {submitted}")]
    CountsInconsistent { failed: u64, submitted: u64 },
}

/// Per-resource failure behavior.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FaultParams {
    /// Mean time to failure; `f64::INFINITY` disables failures.
    pub mean_time_to_failure: SimTime,
    /// Downtime after a failure; `f64::INFINITY` means fail-stop.
    pub repair_delay: SimTime,
    pub fail_while_idle: bool,
}

/// Empirical failure rate: failed dispatches over submitted dispatches.
pub fn failure_rate(failed: u64, submitted: u64) -> Result<f64, FaultError> {
    if submitted == 0 {
        return Err(FaultError::UndefinedRate);
    }
    if failed > submitted {
        return Err(FaultError::CountsInconsistent { failed, submitted });
    }
    Ok(failed as f64 / submitted as f64)
}

/// Rate of `index` if the resource has any dispatches, `None` otherwise.
pub fn rate_of(index: &FaultIndex) -> Option<f64> {
    failure_rate(index.failure_count, index.dispatched).ok()
}

/// Mean of the rates times 100: the percentage of expected failure over the
/// listed resources.
pub fn fault_tendency(rates: &[f64]) -> Result<f64, FaultError> {
    if rates.is_empty() {
        return Err(FaultError::EmptyRates);
    }
    let mut sum = 0.0;
    for &r in rates {
        if !(0.0..=1.0).contains(&r) {
            return Err(FaultError::RateOutOfRange(r));
        }
        sum += r;
    }
    Ok(sum / rates.len() as f64 * 100.0)
}

/// Mean failure rate over rated resources only (unrated ones are excluded,
/// not counted as zero).
pub fn mean_failure_rate<'a>(
    indices: impl IntoIterator<Item = &'a FaultIndex>,
) -> Result<f64, FaultError> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for idx in indices {
        if let Some(r) = rate_of(idx) {
            sum += r;
            n += 1;
        }
    }
    if n == 0 {
        return Err(FaultError::UndefinedRate);
    }
    Ok(sum / n as f64)
}

/// Exponentially distributed time until the next failure, or `None` when
/// failures are disabled (infinite MTTF).
pub fn sample_failure_offset(mttf: SimTime, rng: &mut impl Rng) -> Option<SimTime> {
    if !mttf.is_finite() {
        return None;
    }
    let exp = Exp::new(1.0 / mttf).expect("mttf validated > 0");
    Some(exp.sample(rng))
}

/// Running mean of a resource's failure-rate history: one sample is recorded
/// after every terminal outcome (success or failure), so the tendency lags
/// the instantaneous rate and keeps a memory of past flakiness.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct TendencyTracker {
    sum: f64,
    samples: u64,
}

impl TendencyTracker {
    pub fn observe(&mut self, rate: f64) {
        debug_assert!((0.0..=1.0).contains(&rate));
        self.sum += rate;
        self.samples += 1;
    }

    /// Historical mean rate in [0,1]; 0 before any outcome is observed.
    pub fn value(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.sum / self.samples as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;

    #[test]
    fn failure_rate_examples() {
        assert_eq!(failure_rate(2, 10).unwrap(), 0.2);
        assert_eq!(failure_rate(0, 10).unwrap(), 0.0);
        assert_eq!(failure_rate(10, 10).unwrap(), 1.0);
        assert_eq!(failure_rate(1, 0).unwrap_err(), FaultError::UndefinedRate);
        assert!(matches!(failure_rate(3, 2), Err(FaultError::CountsInconsistent { .. })));
    }

    #[test]
    fn fault_tendency_examples() {
        assert_eq!(fault_tendency(&[0.1, 0.3]).unwrap(), 20.0);
        assert_eq!(fault_tendency(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(fault_tendency(&[1.0]).unwrap(), 100.0);
        assert_eq!(fault_tendency(&[]).unwrap_err(), FaultError::EmptyRates);
        assert!(fault_tendency(&[1.5]).is_err());
    }

    #[test]
    fn record_ops_touch_one_counter() {
        let mut idx = FaultIndex::default();
        idx.record_success();
        assert_eq!((idx.success_count, idx.failure_count), (1, 0));
        let mut idx = FaultIndex::default();
        idx.record_failure();
        assert_eq!((idx.success_count, idx.failure_count), (0, 1));
    }

    #[test]
    fn record_ops_commute() {
        let mut a = FaultIndex::default();
        for _ in 0..3 {
            a.record_success();
        }
        for _ in 0..2 {
            a.record_failure();
        }
        let mut b = FaultIndex::default();
        b.record_failure();
        b.record_success();
        b.record_failure();
        b.record_success();
        b.record_success();
        assert_eq!((a.success_count, a.failure_count), (3, 2));
        assert_eq!(a.success_count, b.success_count);
        assert_eq!(a.failure_count, b.failure_count);
    }

    fn index(failed: u64, submitted: u64) -> FaultIndex {
        FaultIndex { dispatched: submitted, success_count: submitted - failed, failure_count: failed }
    }

    #[test]
    fn mean_failure_rate_examples() {
        let rated = [index(2, 10), index(4, 10)];
        assert!((mean_failure_rate(rated.iter()).unwrap() - 0.3).abs() < 1e-9);

        let single = [index(0, 5)];
        assert_eq!(mean_failure_rate(single.iter()).unwrap(), 0.0);

        // Unrated resources are excluded from the mean, not zero-counted.
        let mixed = [index(5, 10), FaultIndex::default()];
        assert_eq!(mean_failure_rate(mixed.iter()).unwrap(), 0.5);

        let unrated = [FaultIndex::default()];
        assert_eq!(mean_failure_rate(unrated.iter()).unwrap_err(), FaultError::UndefinedRate);
    }

    #[test]
    fn infinite_mttf_disables_sampling() {
        let mut rng = stream_rng(1, "fault/0");
        assert!(sample_failure_offset(f64::INFINITY, &mut rng).is_none());
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut a = stream_rng(42, "fault/3");
        let mut b = stream_rng(42, "fault/3");
        for _ in 0..10 {
            assert_eq!(
                sample_failure_offset(1000.0, &mut a).unwrap(),
                sample_failure_offset(1000.0, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn sample_mean_matches_mttf() {
        let mut rng = stream_rng(7, "fault/0");
        let n = 100_000;
        let mean: f64 =
            (0..n).map(|_| sample_failure_offset(500.0, &mut rng).unwrap()).sum::<f64>() / f64::from(n);
        assert!((mean - 500.0).abs() / 500.0 < 0.02, "sample mean {mean} off from 500 by > 2%");
    }

    #[test]
    fn tendency_tracker_is_historical_mean() {
        let mut t = TendencyTracker::default();
        assert_eq!(t.value(), 0.0);
        t.observe(0.2);
        t.observe(0.4);
        assert!((t.value() - 0.3).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rate_in_unit_interval(failed in 0u64..1000, extra in 0u64..1000) {
            let submitted = failed + extra.max(1);
            let r = failure_rate(failed, submitted).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }

        #[test]
        fn tendency_is_scaled_mean(rates in proptest::collection::vec(0.0f64..=1.0, 1..20)) {
            let t = fault_tendency(&rates).unwrap();
            prop_assert!((0.0..=100.0).contains(&t));
            let mean = rates.iter().sum::<f64>() / rates.len() as f64;
            prop_assert!((t - mean * 100.0).abs() < 1e-9);
        }
    }
}
