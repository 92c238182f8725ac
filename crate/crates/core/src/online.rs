//! One-pass online assignment with a pluggable cost threshold.
//!
//! Each arriving worker takes the cheapest unassigned task it can reach in
//! time, provided the cost is within the threshold and the remaining budget.
//! Assignments are final and rejected workers are gone. The threshold policy
//! selects the algorithm: no threshold is simple greedy, a random `e^kappa`
//! is Greedy-RT, and the largest pair cost of a historical optimum is
//! Greedy-OT.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    feasible_with_cost, travel_cost, CostMetric, Matching, Pair, TaskBatch, TaskId, Worker, WorkerId, EPS,
};

/// Workers in arrival order: non-decreasing arrival times, ties by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArrivalStream {
    workers: Vec<Worker>,
}

impl ArrivalStream {
    /// Wraps workers that are already in arrival order.
    pub fn new(workers: Vec<Worker>) -> Result<Self> {
        if let Some(pair) = workers.windows(2).find(|p| p[1].arrival < p[0].arrival) {
            return Err(Error::InvalidInput(format!(
                "arrival stream out of order: {} at {} before {} at {}",
                pair[0].id, pair[0].arrival, pair[1].id, pair[1].arrival
            )));
        }
        Ok(ArrivalStream { workers })
    }

    /// Sorts by arrival time, ties by worker id.
    pub fn sorted(mut workers: Vec<Worker>) -> Self {
        workers.sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.id.cmp(&b.id)));
        ArrivalStream { workers }
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn into_workers(self) -> Vec<Worker> {
        self.workers
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// Simple greedy.
    Unbounded,
    /// A pinned threshold: Greedy-OT, or one grade of Greedy-RT.
    Fixed { tau: f64 },
    /// Greedy-RT: `kappa` is drawn once per run, `tau = e^kappa`.
    RandomExp { c_max: f64, seed: u64 },
}

/// Threshold a run actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub tau: f64,
    pub kappa: Option<u32>,
}

impl ThresholdPolicy {
    pub fn resolve(&self) -> Result<Resolved> {
        match *self {
            ThresholdPolicy::Unbounded => Ok(Resolved {
                tau: f64::INFINITY,
                kappa: None,
            }),
            ThresholdPolicy::Fixed { tau } => {
                if tau.is_finite() && tau > 0.0 {
                    Ok(Resolved { tau, kappa: None })
                } else {
                    Err(Error::InvalidInput(format!("threshold must be finite and positive, got {tau}")))
                }
            }
            ThresholdPolicy::RandomExp { c_max, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let kappa = sample_kappa(c_max, &mut rng)?;
                Ok(Resolved {
                    tau: f64::from(kappa).exp(),
                    kappa: Some(kappa),
                })
            }
        }
    }
}

/// The exponents Greedy-RT draws from: `0..=ceil(ln(c_max + 1))`.
pub fn kappa_support(c_max: f64) -> Result<RangeInclusive<u32>> {
    if !(c_max.is_finite() && c_max > 0.0) {
        return Err(Error::NonPositiveCMax(c_max));
    }
    // ln(e) may come out a hair above 1; don't let that bump the ceiling.
    let n = ((c_max + 1.0).ln() - 1e-12).ceil().max(0.0) as u32;
    Ok(0..=n)
}

/// Uniform draw over [`kappa_support`].
pub fn sample_kappa<R: Rng + ?Sized>(c_max: f64, rng: &mut R) -> Result<u32> {
    Ok(rng.gen_range(kappa_support(c_max)?))
}

/// Greedy-OT's threshold: the largest pair cost of a historical optimum.
pub fn extract_ot_threshold(historical_opt: &Matching) -> Result<f64> {
    historical_opt.max_cost().ok_or(Error::EmptyHistory)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoFeasibleTask,
    OverThreshold,
    OverBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Assigned { task_id: TaskId, cost: f64 },
    Rejected { reason: RejectReason },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub worker_id: WorkerId,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub matching: Matching,
    /// One entry per arriving worker, in arrival order.
    pub decisions: Vec<Decision>,
    pub unspent_budget: f64,
    /// `None` for the unbounded policy.
    pub tau: Option<f64>,
    pub kappa: Option<u32>,
}

pub fn run_online(
    stream: &ArrivalStream,
    batch: &TaskBatch,
    metric: CostMetric,
    policy: ThresholdPolicy,
) -> Result<RunTrace> {
    let resolved = policy.resolve()?;
    let tau = resolved.tau;
    let budget = batch.budget;
    let tasks = &batch.tasks;
    let mut taken = vec![false; tasks.len()];
    let mut used = 0.0;
    let mut pairs = Vec::new();
    let mut decisions = Vec::with_capacity(stream.len());

    for w in stream.workers() {
        let mut reachable = false;
        let mut under_tau = false;
        let mut best: Option<(f64, usize)> = None;
        for (j, t) in tasks.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let c = travel_cost(w, t, metric);
            if !feasible_with_cost(w, t, c) {
                continue;
            }
            reachable = true;
            if c > tau + EPS {
                continue;
            }
            under_tau = true;
            if used + c > budget + EPS {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bj)) => c < bc || (c == bc && t.id < tasks[bj].id),
            };
            if better {
                best = Some((c, j));
            }
        }

        let outcome = match best {
            Some((c, j)) => {
                taken[j] = true;
                used += c;
                pairs.push(Pair {
                    worker_id: w.id,
                    task_id: tasks[j].id,
                    cost: c,
                });
                Outcome::Assigned {
                    task_id: tasks[j].id,
                    cost: c,
                }
            }
            None => Outcome::Rejected {
                reason: if !reachable {
                    RejectReason::NoFeasibleTask
                } else if !under_tau {
                    RejectReason::OverThreshold
                } else {
                    RejectReason::OverBudget
                },
            },
        };
        decisions.push(Decision {
            worker_id: w.id,
            outcome,
        });
    }

    let matching = Matching::from_pairs(pairs);
    Ok(RunTrace {
        unspent_budget: budget - matching.total_cost,
        matching,
        decisions,
        tau: tau.is_finite().then_some(tau),
        kappa: resolved.kappa,
    })
}

/// Result of Greedy-RT with one pinned exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeRun {
    pub kappa: u32,
    pub tau: f64,
    pub matching: Matching,
}

/// Runs the pinned threshold `e^i` for every `i` in [`kappa_support`].
pub fn greedy_rt_grades(
    stream: &ArrivalStream,
    batch: &TaskBatch,
    metric: CostMetric,
    c_max: f64,
) -> Result<Vec<GradeRun>> {
    kappa_support(c_max)?
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|kappa| {
            let tau = f64::from(kappa).exp();
            let trace = run_online(stream, batch, metric, ThresholdPolicy::Fixed { tau })?;
            Ok(GradeRun {
                kappa,
                tau,
                matching: trace.matching,
            })
        })
        .collect()
}

/// Exact expected matching size of Greedy-RT: the mean over all grades,
/// each drawn with equal probability.
pub fn greedy_rt_expectation(stream: &ArrivalStream, batch: &TaskBatch, metric: CostMetric, c_max: f64) -> Result<f64> {
    let grades = greedy_rt_grades(stream, batch, metric, c_max)?;
    Ok(mean_grade_size(&grades))
}

pub fn mean_grade_size(grades: &[GradeRun]) -> f64 {
    grades.iter().map(|g| g.matching.size() as f64).sum::<f64>() / grades.len() as f64
}
