//! Fault-index- and workload-aware resource selection.
//!
//! Selection samples proportionally to `pheromone^alpha * eta^beta`, where
//! the desirability `eta` of a resource grows with capacity and shrinks with
//! queue depth and observed failure rate. Resources whose failure rate sits
//! above the fleet mean are kept out of scheduling unless every admissible
//! alternative already carries at least twice their workload.

use rand::Rng;

use crate::model::{ResourceId, SchedulerConfig};

/// Pheromone values never decay below this.
pub const PHEROMONE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

/// Per-resource pheromone levels with evaporation/deposit maintenance.
#[derive(Debug, Clone)]
pub struct PheromoneTable {
    values: Vec<f64>,
    cfg: SchedulerConfig,
}

impl PheromoneTable {
    pub fn new(resource_count: usize, cfg: SchedulerConfig) -> Self {
        Self { values: vec![1.0; resource_count], cfg }
    }

    pub fn value(&self, resource: usize) -> f64 {
        self.values[resource]
    }

    /// Evaporate every entry by `1 - rho` (floored), then deposit on the
    /// chosen resource if the outcome was a success.
    pub fn update(&mut self, chosen: usize, outcome: Outcome) {
        for v in self.values.iter_mut() {
            *v = (*v * (1.0 - self.cfg.rho)).max(PHEROMONE_FLOOR);
        }
        if outcome == Outcome::Success {
            self.values[chosen] += self.cfg.deposit;
        }
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }
}

/// Scheduling-relevant snapshot of one resource.
#[derive(Debug, Clone, Copy)]
pub struct CandidateView {
    /// Dense index into the resource table (and the pheromone table).
    pub index: usize,
    pub id: ResourceId,
    pub alive: bool,
    /// Empirical failure rate; `None` while the resource is unrated.
    pub rate: Option<f64>,
    /// Assigned, incomplete jobs.
    pub workload: usize,
    /// Aggregate MI/s.
    pub capacity: f64,
}

impl CandidateView {
    fn admissible_by_rate(&self, fr_mean: Option<f64>) -> bool {
        match (self.rate, fr_mean) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(r), Some(mean)) => r <= mean,
        }
    }
}

/// Admission rule: a resource failing above the fleet mean is admitted only
/// when every other admissible-by-rate resource already carries at least
/// twice its workload. Unrated resources always admit.
pub fn admit(resource: &CandidateView, fr_mean: Option<f64>, all: &[CandidateView]) -> bool {
    if !resource.alive {
        return false;
    }
    if resource.admissible_by_rate(fr_mean) {
        return true;
    }
    all.iter()
        .filter(|o| o.index != resource.index && o.alive && o.admissible_by_rate(fr_mean))
        .all(|o| o.workload >= 2 * resource.workload)
}

/// Desirability heuristic: fast, idle, reliable resources score high.
pub fn eta(c: &CandidateView) -> f64 {
    c.capacity / ((1.0 + c.workload as f64) * (1.0 + c.rate.unwrap_or(0.0)))
}

/// Unnormalized selection weights for a candidate set.
pub fn selection_weights(candidates: &[CandidateView], pher: &PheromoneTable) -> Vec<f64> {
    candidates
        .iter()
        .map(|c| pher.value(c.index).powf(pher.config().alpha) * eta(c).powf(pher.config().beta))
        .collect()
}

/// Closed-form selection probabilities (used by the distribution checks).
pub fn selection_probabilities(candidates: &[CandidateView], pher: &PheromoneTable) -> Vec<f64> {
    let w = selection_weights(candidates, pher);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Sample one resource proportionally to pheromone^alpha * eta^beta.
/// Returns `None` on an empty candidate set (the job stays queued).
pub fn select_resource(
    candidates: &[CandidateView],
    pher: &PheromoneTable,
    rng: &mut impl Rng,
) -> Option<usize> {
    if candidates.is_empty() {
        return None;
    }
    let weights = selection_weights(candidates, pher);
    let total: f64 = weights.iter().sum();
    let draw = rng.random_range(0.0..1.0) * total;
    let mut acc = 0.0;
    for (c, w) in candidates.iter().zip(&weights) {
        acc += w;
        if draw < acc {
            return Some(c.index);
        }
    }
    candidates.last().map(|c| c.index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, STREAM_SCHEDULER};

    fn cand(index: usize, rate: Option<f64>, workload: usize) -> CandidateView {
        CandidateView {
            index,
            id: ResourceId(index as u32),
            alive: true,
            rate,
            workload,
            capacity: 100.0,
        }
    }

    #[test]
    fn admit_below_mean() {
        let all = vec![cand(0, Some(0.1), 5), cand(1, Some(0.3), 5)];
        assert!(admit(&all[0], Some(0.2), &all));
    }

    #[test]
    fn admit_above_mean_blocked_by_light_peer() {
        let all = vec![cand(0, Some(0.5), 4), cand(1, Some(0.1), 6)];
        // Peer workload 6 < 2 * 4: stay out.
        assert!(!admit(&all[0], Some(0.2), &all));
    }

    #[test]
    fn admit_above_mean_when_everyone_else_is_loaded() {
        let all = vec![cand(0, Some(0.5), 3), cand(1, Some(0.1), 6), cand(2, Some(0.15), 9)];
        assert!(admit(&all[0], Some(0.2), &all));
    }

    #[test]
    fn unrated_resources_admit() {
        let all = vec![cand(0, None, 0), cand(1, Some(0.0), 0)];
        assert!(admit(&all[0], Some(0.0), &all));
    }

    #[test]
    fn dead_resources_never_admit() {
        let mut c = cand(0, Some(0.0), 0);
        c.alive = false;
        assert!(!admit(&c, Some(0.5), &[c]));
    }

    #[test]
    fn pheromone_update_examples() {
        let cfg = SchedulerConfig { alpha: 1.0, beta: 1.0, rho: 0.1, deposit: 0.5 };
        let mut t = PheromoneTable::new(1, cfg);
        t.update(0, Outcome::Success);
        assert!((t.value(0) - 1.4).abs() < 1e-12);

        let mut t = PheromoneTable::new(1, cfg);
        t.update(0, Outcome::Failure);
        assert!((t.value(0) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn pheromone_floor_holds() {
        let cfg = SchedulerConfig { alpha: 1.0, beta: 1.0, rho: 0.5, deposit: 0.5 };
        let mut t = PheromoneTable::new(1, cfg);
        for _ in 0..200 {
            t.update(0, Outcome::Failure);
        }
        assert_eq!(t.value(0), PHEROMONE_FLOOR);
        t.update(0, Outcome::Failure);
        assert_eq!(t.value(0), PHEROMONE_FLOOR);
    }

    #[test]
    fn single_candidate_always_selected() {
        let pher = PheromoneTable::new(4, SchedulerConfig::default());
        let mut rng = stream_rng(3, STREAM_SCHEDULER);
        let only = [cand(2, Some(0.2), 7)];
        for _ in 0..20 {
            assert_eq!(select_resource(&only, &pher, &mut rng), Some(2));
        }
    }

    #[test]
    fn empty_candidates_select_nothing() {
        let pher = PheromoneTable::new(0, SchedulerConfig::default());
        let mut rng = stream_rng(3, STREAM_SCHEDULER);
        assert_eq!(select_resource(&[], &pher, &mut rng), None);
    }

    #[test]
    fn selection_is_replay_identical() {
        let pher = PheromoneTable::new(2, SchedulerConfig::default());
        let all = vec![cand(0, Some(0.1), 3), cand(1, Some(0.1), 3)];
        let run = || {
            let mut rng = stream_rng(11, STREAM_SCHEDULER);
            (0..50).map(|_| select_resource(&all, &pher, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn reliable_candidate_wins_most_draws() {
        // A at rate 0 vs otherwise-identical B at 0.9: eta ratio 1.9, so A
        // should take ~65.5% of draws; require > 60% over 10^4.
        let pher = PheromoneTable::new(2, SchedulerConfig::default());
        let all = vec![cand(0, Some(0.0), 3), cand(1, Some(0.9), 3)];
        let mut rng = stream_rng(5, STREAM_SCHEDULER);
        let n = 10_000;
        let a_wins = (0..n).filter(|_| select_resource(&all, &pher, &mut rng) == Some(0)).count();
        assert!(a_wins as f64 / n as f64 > 0.60, "A selected {a_wins}/{n}");
    }

    #[test]
    fn probabilities_normalize() {
        let pher = PheromoneTable::new(3, SchedulerConfig::default());
        let all = vec![cand(0, Some(0.0), 1), cand(1, Some(0.5), 0), cand(2, None, 9)];
        let p = selection_probabilities(&all, &pher);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| *x > 0.0));
    }
}
