//! Domain types shared by every solver: workers, tasks, the requester's
//! budgeted batch, and the matchings the solvers produce.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for cost, budget and deadline comparisons.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkerId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A point in the plane, in abstract distance units or projected km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let loc = Location { x, y };
        loc.validate()?;
        Ok(loc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_finite() && self.y.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "non-finite location ({}, {})",
                self.x, self.y
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: WorkerId,
    pub loc: Location,
    /// Arrival time on the platform. The worker leaves at the same instant:
    /// a rejected worker is never reconsidered.
    pub arrival: f64,
    /// Distance units per time unit.
    pub velocity: f64,
}

impl Worker {
    pub fn new(id: u32, loc: Location, arrival: f64, velocity: f64) -> Result<Self> {
        let w = Worker {
            id: WorkerId(id),
            loc,
            arrival,
            velocity,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        self.loc.validate()?;
        if !(self.arrival.is_finite() && self.arrival >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "worker {} has invalid arrival time {}",
                self.id, self.arrival
            )));
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return Err(Error::InvalidInput(format!(
                "worker {} has non-positive velocity {}",
                self.id, self.velocity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub loc: Location,
    /// Stored for workload realism; feasibility only looks at the deadline.
    pub release: f64,
    pub deadline: f64,
}

impl Task {
    pub fn new(id: u32, loc: Location, release: f64, deadline: f64) -> Result<Self> {
        let t = Task {
            id: TaskId(id),
            loc,
            release,
            deadline,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        self.loc.validate()?;
        if !(self.release.is_finite() && self.release >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "task {} has invalid release time {}",
                self.id, self.release
            )));
        }
        if !(self.deadline.is_finite() && self.deadline > self.release) {
            return Err(Error::InvalidInput(format!(
                "task {} deadline {} must exceed release {}",
                self.id, self.deadline, self.release
            )));
        }
        Ok(())
    }
}

/// A requester's batch of tasks together with the single budget that pays
/// for all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskBatch {
    pub tasks: Vec<Task>,
    pub budget: f64,
}

impl TaskBatch {
    pub fn new(tasks: Vec<Task>, budget: f64) -> Result<Self> {
        let batch = TaskBatch { tasks, budget };
        batch.validate()?;
        Ok(batch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "budget must be finite and non-negative, got {}",
                self.budget
            )));
        }
        let mut seen = HashSet::with_capacity(self.tasks.len());
        for t in &self.tasks {
            t.validate()?;
            if !seen.insert(t.id) {
                return Err(Error::DuplicateId {
                    kind: "task",
                    id: t.id.0,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMetric {
    #[default]
    Manhattan,
    Euclidean,
}

impl CostMetric {
    pub fn distance(self, a: Location, b: Location) -> f64 {
        match self {
            CostMetric::Manhattan => crate::cost::manhattan(a, b),
            CostMetric::Euclidean => crate::cost::euclidean(a, b),
        }
    }
}

/// The full problem input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub workers: Vec<Worker>,
    pub batch: TaskBatch,
    pub metric: CostMetric,
    /// Estimated maximum travel cost, usually the metric diameter of the
    /// region the workers and tasks live in.
    pub c_max: f64,
}

impl Instance {
    pub fn new(workers: Vec<Worker>, batch: TaskBatch, metric: CostMetric, c_max: f64) -> Result<Self> {
        let inst = Instance {
            workers,
            batch,
            metric,
            c_max,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_max.is_finite() && self.c_max > 0.0) {
            return Err(Error::NonPositiveCMax(self.c_max));
        }
        let mut seen = HashSet::with_capacity(self.workers.len());
        for w in &self.workers {
            w.validate()?;
            if !seen.insert(w.id) {
                return Err(Error::DuplicateId {
                    kind: "worker",
                    id: w.id.0,
                });
            }
        }
        self.batch.validate()
    }

    pub fn budget(&self) -> f64 {
        self.batch.budget
    }

    pub fn tasks(&self) -> &[Task] {
        &self.batch.tasks
    }

    /// Same tasks, budget and metric with a different worker set, e.g. after
    /// an arrival ordering has reassigned timestamps.
    pub fn with_workers(&self, workers: Vec<Worker>) -> Instance {
        Instance {
            workers,
            batch: self.batch.clone(),
            metric: self.metric,
            c_max: self.c_max,
        }
    }

    /// Exhaustive maximum pairwise travel cost. Quadratic; meant for checks.
    pub fn max_pair_cost(&self) -> f64 {
        let mut max = 0.0f64;
        for w in &self.workers {
            for t in &self.batch.tasks {
                max = max.max(travel_cost(w, t, self.metric));
            }
        }
        max
    }
}

/// One matched worker-task pair. Its presence in a matching means the pair
/// is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub worker_id: WorkerId,
    pub task_id: TaskId,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<Pair>,
    pub total_cost: f64,
}

impl Matching {
    pub fn from_pairs(pairs: Vec<Pair>) -> Self {
        let total_cost = pairs.iter().map(|p| p.cost).sum();
        Matching { pairs, total_cost }
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_cost(&self) -> Option<f64> {
        self.pairs.iter().map(|p| p.cost).reduce(f64::max)
    }

    /// Pairs sorted by (worker id, task id); handy for comparisons.
    pub fn sorted_pairs(&self) -> Vec<(WorkerId, TaskId)> {
        let mut v: Vec<_> = self.pairs.iter().map(|p| (p.worker_id, p.task_id)).collect();
        v.sort_unstable();
        v
    }
}

pub fn travel_cost(w: &Worker, t: &Task, metric: CostMetric) -> f64 {
    metric.distance(w.loc, t.loc)
}

/// Deadline constraint: the worker, leaving on arrival, reaches the task no
/// later than its deadline.
pub fn is_feasible(w: &Worker, t: &Task, metric: CostMetric) -> bool {
    feasible_with_cost(w, t, travel_cost(w, t, metric))
}

pub(crate) fn feasible_with_cost(w: &Worker, t: &Task, cost: f64) -> bool {
    w.arrival + cost / w.velocity <= t.deadline + EPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateWorker { worker: WorkerId },
    DuplicateTask { task: TaskId },
    OverBudget { total_cost: f64, budget: f64 },
    DeadlineMissed { worker: WorkerId, task: TaskId },
    CostMismatch { worker: WorkerId, task: TaskId, recorded: f64, actual: f64 },
    TotalMismatch { recorded: f64, actual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateWorker { worker } => write!(f, "worker {worker} matched twice"),
            Violation::DuplicateTask { task } => write!(f, "task {task} matched twice"),
            Violation::OverBudget { total_cost, budget } => {
                write!(f, "total cost {total_cost} exceeds budget {budget}")
            }
            Violation::DeadlineMissed { worker, task } => {
                write!(f, "{worker} cannot reach {task} before its deadline")
            }
            Violation::CostMismatch {
                worker,
                task,
                recorded,
                actual,
            } => write!(f, "pair ({worker}, {task}) records cost {recorded}, metric gives {actual}"),
            Violation::TotalMismatch { recorded, actual } => {
                write!(f, "total cost {recorded} differs from pair sum {actual}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Turns a non-empty report into an error.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let msg = self
            .violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Validation(msg))
    }
}

/// Checks the one-to-one, budget and deadline constraints of `m` against
/// `inst`, plus the bookkeeping of recorded costs.
pub fn validate_matching(m: &Matching, inst: &Instance) -> Result<ValidationReport> {
    let workers: HashMap<WorkerId, &Worker> = inst.workers.iter().map(|w| (w.id, w)).collect();
    let tasks: HashMap<TaskId, &Task> = inst.batch.tasks.iter().map(|t| (t.id, t)).collect();

    let mut report = ValidationReport::default();
    let mut seen_w = HashSet::new();
    let mut seen_t = HashSet::new();
    let mut sum = 0.0;
    for p in &m.pairs {
        let w = workers.get(&p.worker_id).ok_or(Error::InvalidReference {
            kind: "worker",
            id: p.worker_id.0,
        })?;
        let t = tasks.get(&p.task_id).ok_or(Error::InvalidReference {
            kind: "task",
            id: p.task_id.0,
        })?;
        if !seen_w.insert(p.worker_id) {
            report.violations.push(Violation::DuplicateWorker { worker: p.worker_id });
        }
        if !seen_t.insert(p.task_id) {
            report.violations.push(Violation::DuplicateTask { task: p.task_id });
        }
        let actual = travel_cost(w, t, inst.metric);
        if (actual - p.cost).abs() > EPS * actual.max(1.0) {
            report.violations.push(Violation::CostMismatch {
                worker: p.worker_id,
                task: p.task_id,
                recorded: p.cost,
                actual,
            });
        }
        if !feasible_with_cost(w, t, actual) {
            report.violations.push(Violation::DeadlineMissed {
                worker: p.worker_id,
                task: p.task_id,
            });
        }
        sum += p.cost;
    }
    if (sum - m.total_cost).abs() > EPS * sum.max(1.0) {
        report.violations.push(Violation::TotalMismatch {
            recorded: m.total_cost,
            actual: sum,
        });
    }
    if m.total_cost > inst.batch.budget + EPS {
        report.violations.push(Violation::OverBudget {
            total_cost: m.total_cost,
            budget: inst.batch.budget,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(x: f64, y: f64) -> Location {
        Location::new(x, y).unwrap()
    }

    fn two_by_one() -> Instance {
        let workers = vec![
            Worker::new(0, loc(0.0, 0.0), 0.0, 1.0).unwrap(),
            Worker::new(1, loc(1.0, 0.0), 0.0, 1.0).unwrap(),
        ];
        let tasks = vec![
            Task::new(0, loc(3.0, 4.0), 0.0, 10.0).unwrap(),
            Task::new(1, loc(0.0, 1.0), 0.0, 10.0).unwrap(),
        ];
        Instance::new(workers, TaskBatch::new(tasks, 10.0).unwrap(), CostMetric::Manhattan, 16.0).unwrap()
    }

    #[test]
    fn travel_cost_examples() {
        let w = Worker::new(0, loc(0.0, 0.0), 0.0, 1.0).unwrap();
        let t = Task::new(0, loc(3.0, 4.0), 0.0, 10.0).unwrap();
        assert_eq!(travel_cost(&w, &t, CostMetric::Manhattan), 7.0);
        assert_eq!(travel_cost(&w, &t, CostMetric::Euclidean), 5.0);
        let same = Task::new(1, loc(0.0, 0.0), 0.0, 1.0).unwrap();
        assert_eq!(travel_cost(&w, &same, CostMetric::Manhattan), 0.0);
        assert_eq!(travel_cost(&w, &same, CostMetric::Euclidean), 0.0);
    }

    #[test]
    fn feasibility_examples() {
        let t = Task::new(0, loc(3.0, 4.0), 0.0, 10.0).unwrap();
        let early = Worker::new(0, loc(0.0, 0.0), 0.0, 1.0).unwrap();
        let late = Worker::new(1, loc(0.0, 0.0), 5.0, 1.0).unwrap();
        assert!(is_feasible(&early, &t, CostMetric::Manhattan));
        assert!(!is_feasible(&late, &t, CostMetric::Manhattan));

        let fast = Worker::new(2, loc(0.0, 0.0), 0.0, 2.0).unwrap();
        let tight = Task::new(1, loc(3.0, 4.0), 0.0, 3.5).unwrap();
        assert!(is_feasible(&fast, &tight, CostMetric::Manhattan));
    }

    #[test]
    fn constructors_reject_bad_values() {
        assert!(Location::new(f64::NAN, 0.0).is_err());
        assert!(Location::new(0.0, f64::INFINITY).is_err());
        assert!(Worker::new(0, loc(0.0, 0.0), 0.0, 0.0).is_err());
        assert!(Worker::new(0, loc(0.0, 0.0), -1.0, 1.0).is_err());
        assert!(Task::new(0, loc(0.0, 0.0), 2.0, 2.0).is_err());
        assert!(TaskBatch::new(vec![], -1.0).is_err());

        let t = Task::new(0, loc(0.0, 0.0), 0.0, 1.0).unwrap();
        assert!(matches!(
            TaskBatch::new(vec![t.clone(), t], 1.0),
            Err(Error::DuplicateId { kind: "task", .. })
        ));

        let w = Worker::new(3, loc(0.0, 0.0), 0.0, 1.0).unwrap();
        let batch = TaskBatch::new(vec![], 1.0).unwrap();
        assert!(matches!(
            Instance::new(vec![w.clone(), w.clone()], batch.clone(), CostMetric::Manhattan, 1.0),
            Err(Error::DuplicateId { kind: "worker", id: 3 })
        ));
        assert!(matches!(
            Instance::new(vec![w], batch, CostMetric::Manhattan, 0.0),
            Err(Error::NonPositiveCMax(_))
        ));
    }

    #[test]
    fn empty_matching_is_valid() {
        let inst = two_by_one();
        let report = validate_matching(&Matching::default(), &inst).unwrap();
        assert!(report.is_valid());
    }

    #[test]
    fn shared_task_is_reported() {
        let inst = two_by_one();
        let m = Matching::from_pairs(vec![
            Pair {
                worker_id: WorkerId(0),
                task_id: TaskId(1),
                cost: 1.0,
            },
            Pair {
                worker_id: WorkerId(1),
                task_id: TaskId(1),
                cost: 2.0,
            },
        ]);
        let report = validate_matching(&m, &inst).unwrap();
        assert_eq!(report.violations, vec![Violation::DuplicateTask { task: TaskId(1) }]);
        assert!(report.into_result().is_err());
    }

    #[test]
    fn over_budget_is_reported() {
        let mut inst = two_by_one();
        let mut m = Matching::from_pairs(vec![
            Pair {
                worker_id: WorkerId(0),
                task_id: TaskId(0),
                cost: 7.0,
            },
            Pair {
                worker_id: WorkerId(1),
                task_id: TaskId(1),
                cost: 2.0,
            },
        ]);
        inst.batch.budget = m.total_cost - 1.0;
        let report = validate_matching(&m, &inst).unwrap();
        assert!(matches!(report.violations[..], [Violation::OverBudget { .. }]));

        m.total_cost = 1.0;
        let report = validate_matching(&m, &inst).unwrap();
        assert!(matches!(report.violations[..], [Violation::TotalMismatch { .. }]));
    }

    #[test]
    fn deadline_and_reference_checks() {
        let mut inst = two_by_one();
        inst.batch.tasks[0].deadline = 6.0;
        let m = Matching::from_pairs(vec![Pair {
            worker_id: WorkerId(0),
            task_id: TaskId(0),
            cost: 7.0,
        }]);
        let report = validate_matching(&m, &inst).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation::DeadlineMissed {
                worker: WorkerId(0),
                task: TaskId(0)
            }]
        );

        let bad = Matching::from_pairs(vec![Pair {
            worker_id: WorkerId(9),
            task_id: TaskId(0),
            cost: 1.0,
        }]);
        assert!(matches!(
            validate_matching(&bad, &inst),
            Err(Error::InvalidReference { kind: "worker", id: 9 })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pt() -> impl Strategy<Value = Location> {
            (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(x, y)| Location { x, y })
        }

        proptest! {
            #[test]
            fn metrics_are_symmetric_and_triangular(a in pt(), b in pt(), c in pt()) {
                for m in [CostMetric::Manhattan, CostMetric::Euclidean] {
                    let ab = m.distance(a, b);
                    prop_assert!(ab >= 0.0);
                    prop_assert!((ab - m.distance(b, a)).abs() <= 1e-12);
                    prop_assert!(m.distance(a, c) <= ab + m.distance(b, c) + 1e-9);
                }
            }

            #[test]
            fn feasibility_is_monotone_in_deadline(
                a in pt(), b in pt(), arrival in 0.0..50.0f64, v in 0.1..5.0f64,
                d in 0.1..500.0f64, extra in 0.0..100.0f64,
            ) {
                let w = Worker { id: WorkerId(0), loc: a, arrival, velocity: v };
                let t = Task { id: TaskId(0), loc: b, release: 0.0, deadline: d };
                let later = Task { deadline: d + extra, ..t.clone() };
                for m in [CostMetric::Manhattan, CostMetric::Euclidean] {
                    if is_feasible(&w, &t, m) {
                        prop_assert!(is_feasible(&w, &later, m));
                    }
                }
            }
        }
    }
}
