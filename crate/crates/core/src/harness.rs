//! Experiment driver: runs algorithms over generated instances, sweeps one
//! parameter across seeds, cross-checks the solvers against brute force,
//! and runs the real-data pipeline.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{region_c_max, GeoBoundingBox, Region};
use crate::error::{Error, Result};
use crate::fixtures::{toy_instance, TOY_C_MAX};
use crate::genbench::{
    gen_real_tasks, gen_synthetic, ingest_pickups_csv, order_adversary, order_random, HourWindow, IngestOptions,
    SyntheticConfig,
};
use crate::model::{validate_matching, CostMetric, Instance, Matching, EPS};
use crate::offline::{
    algorithm1_optimal, brute_force_optima, brute_force_optimal, budget_ssp_optimal, budgeted_flow,
    build_flow_network, min_cost_max_flow, BRUTE_FORCE_LIMIT, ENUMERATION_LIMIT,
};
use crate::online::{
    extract_ot_threshold, greedy_rt_grades, mean_grade_size, run_online, ArrivalStream, Decision, GradeRun,
    ThresholdPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    OptAlg1,
    OptExact,
    Greedy,
    GreedyRt,
    GreedyRtExp,
    GreedyOt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::OptAlg1,
        Algorithm::OptExact,
        Algorithm::Greedy,
        Algorithm::GreedyRt,
        Algorithm::GreedyRtExp,
        Algorithm::GreedyOt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OptAlg1 => "opt-alg1",
            Algorithm::OptExact => "opt-exact",
            Algorithm::Greedy => "greedy",
            Algorithm::GreedyRt => "greedy-rt",
            Algorithm::GreedyRtExp => "greedy-rt-exp",
            Algorithm::GreedyOt => "greedy-ot",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalModel {
    Adversary,
    Random,
}

impl ArrivalModel {
    pub fn name(self) -> &'static str {
        match self {
            ArrivalModel::Adversary => "adversary",
            ArrivalModel::Random => "random",
        }
    }

    /// The arrival stream plus the instance with the stream's timestamps,
    /// which is what offline solvers and validation must see.
    pub fn arrange(self, inst: &Instance) -> (Instance, ArrivalStream) {
        let stream = match self {
            ArrivalModel::Adversary => order_adversary(inst),
            ArrivalModel::Random => order_random(inst, None),
        };
        (inst.with_workers(stream.workers().to_vec()), stream)
    }
}

impl FromStr for ArrivalModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adversary" => Ok(ArrivalModel::Adversary),
            "random" => Ok(ArrivalModel::Random),
            _ => Err(Error::InvalidInput(format!("unknown arrival model {s:?}"))),
        }
    }
}

/// Seed of the "historical" companion instance Greedy-OT learns from.
pub fn sibling_seed(seed: u64) -> u64 {
    seed.wrapping_add(1 << 32)
}

/// Seed of Greedy-RT's own draw, kept apart from the instance seed.
pub fn rt_seed(seed: u64) -> u64 {
    seed ^ 0x6b61_7070_6100_0000
}

/// Threshold from an instance's own exact optimum.
pub fn self_guided_threshold(inst: &Instance) -> Result<f64> {
    extract_ot_threshold(&budget_ssp_optimal(inst))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub algorithm: Algorithm,
    /// Matching size; the exact mean over grades for `greedy-rt-exp`.
    pub size: f64,
    pub used_budget: f64,
    pub threshold: Option<f64>,
    pub kappa: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching: Option<Matching>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decisions: Option<Vec<Decision>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grades: Option<Vec<GradeRun>>,
    #[serde(skip)]
    pub seconds: f64,
}

fn check(m: &Matching, inst: &Instance, algo: Algorithm) -> Result<()> {
    validate_matching(m, inst)?
        .into_result()
        .map_err(|e| Error::Validation(format!("{algo}: {e}")))
}

/// Runs one algorithm on an arranged instance and validates every matching
/// it produces. `inst` must carry the stream's timestamps. Greedy-OT needs
/// `ot_threshold`.
pub fn evaluate(
    algo: Algorithm,
    inst: &Instance,
    stream: &ArrivalStream,
    rt_seed: u64,
    ot_threshold: Option<f64>,
) -> Result<Evaluation> {
    let start = Instant::now();
    let mut ev = Evaluation {
        algorithm: algo,
        size: 0.0,
        used_budget: 0.0,
        threshold: None,
        kappa: None,
        matching: None,
        decisions: None,
        grades: None,
        seconds: 0.0,
    };
    let online = |policy| run_online(stream, &inst.batch, inst.metric, policy);
    match algo {
        Algorithm::OptAlg1 | Algorithm::OptExact => {
            let m = if algo == Algorithm::OptAlg1 {
                algorithm1_optimal(inst)
            } else {
                budget_ssp_optimal(inst)
            };
            check(&m, inst, algo)?;
            ev.matching = Some(m);
        }
        Algorithm::Greedy | Algorithm::GreedyRt | Algorithm::GreedyOt => {
            let policy = match algo {
                Algorithm::Greedy => ThresholdPolicy::Unbounded,
                Algorithm::GreedyRt => ThresholdPolicy::RandomExp {
                    c_max: inst.c_max,
                    seed: rt_seed,
                },
                _ => ThresholdPolicy::Fixed {
                    tau: ot_threshold.ok_or_else(|| Error::InvalidInput("greedy-ot needs a threshold".into()))?,
                },
            };
            let trace = online(policy)?;
            check(&trace.matching, inst, algo)?;
            ev.threshold = trace.tau;
            ev.kappa = trace.kappa;
            ev.matching = Some(trace.matching);
            ev.decisions = Some(trace.decisions);
        }
        Algorithm::GreedyRtExp => {
            let grades = greedy_rt_grades(stream, &inst.batch, inst.metric, inst.c_max)?;
            for g in &grades {
                check(&g.matching, inst, algo)?;
            }
            ev.size = mean_grade_size(&grades);
            ev.used_budget = grades.iter().map(|g| g.matching.total_cost).sum::<f64>() / grades.len() as f64;
            ev.grades = Some(grades);
        }
    }
    if let Some(m) = &ev.matching {
        ev.size = m.size() as f64;
        ev.used_budget = m.total_cost;
    }
    ev.seconds = start.elapsed().as_secs_f64();
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NWorkers,
    NTasks,
    Budget,
    DeadlineWindow,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NWorkers => "n_workers",
            SweepParam::NTasks => "n_tasks",
            SweepParam::Budget => "budget",
            SweepParam::DeadlineWindow => "deadline_window",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SyntheticConfig, value: f64) -> Result<SyntheticConfig> {
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidInput(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        let mut cfg = base.clone();
        match self {
            SweepParam::NWorkers => cfg.n_workers = count()?,
            SweepParam::NTasks => cfg.n_tasks = count()?,
            SweepParam::Budget => cfg.budget = value,
            SweepParam::DeadlineWindow => cfg.deadline_window = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: SyntheticConfig,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub arrival: ArrivalModel,
    /// Seeds `base.seed .. base.seed + seeds` are run at every value.
    pub seeds: u32,
    pub algorithms: Vec<Algorithm>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one value".into()));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidInput("sweep needs at least one seed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one algorithm".into()));
        }
        Ok(())
    }

    fn algorithms(&self) -> Vec<Algorithm> {
        let mut algos = self.algorithms.clone();
        algos.sort();
        algos.dedup();
        algos
    }
}

/// One algorithm on one (value, seed) point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub value_index: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub outcome: std::result::Result<(f64, f64, f64), String>,
}

/// Means over the seeds of one (value, algorithm) cell. Failed seeds are
/// counted, not averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: SweepParam,
    pub value: f64,
    pub algorithm: Algorithm,
    pub mean_size: Option<f64>,
    pub mean_used_budget: Option<f64>,
    pub mean_seconds: Option<f64>,
    pub seeds: usize,
    pub failed: usize,
    pub error: Option<String>,
}

fn run_point(spec: &SweepSpec, algos: &[Algorithm], value_index: usize, seed: u64) -> Vec<PointResult> {
    let result = |algorithm, outcome| PointResult {
        value_index,
        seed,
        algorithm,
        outcome,
    };
    let prepared = spec
        .param
        .apply(&spec.base, spec.values[value_index])
        .map(|cfg| SyntheticConfig { seed, ..cfg })
        .and_then(|cfg| {
            let inst = gen_synthetic(&cfg)?;
            let ot = if algos.contains(&Algorithm::GreedyOt) {
                let history = gen_synthetic(&SyntheticConfig {
                    seed: sibling_seed(seed),
                    ..cfg
                })?;
                Some(self_guided_threshold(&spec.arrival.arrange(&history).0))
            } else {
                None
            };
            Ok((spec.arrival.arrange(&inst), ot))
        });
    let ((inst, stream), mut ot) = match prepared {
        Ok(p) => p,
        Err(e) => return algos.iter().map(|&a| result(a, Err(e.to_string()))).collect(),
    };
    algos
        .iter()
        .map(|&a| {
            let outcome = match (a, ot.take_if(|_| a == Algorithm::GreedyOt)) {
                (Algorithm::GreedyOt, Some(Err(e))) => Err(e),
                (_, tau) => evaluate(a, &inst, &stream, rt_seed(seed), tau.and_then(|t| t.ok())),
            };
            result(a, outcome.map(|ev| (ev.size, ev.used_budget, ev.seconds)).map_err(|e| e.to_string()))
        })
        .collect()
}

/// Every selected algorithm at every value and seed, in parallel, then
/// means per (value, algorithm). Output order is value order, then
/// algorithm order, independent of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let algos = spec.algorithms();
    let points: Vec<(usize, u64)> = (0..spec.values.len())
        .flat_map(|v| (0..u64::from(spec.seeds)).map(move |k| (v, spec.base.seed.wrapping_add(k))))
        .collect();
    let mut results: Vec<PointResult> = points
        .into_par_iter()
        .flat_map_iter(|(v, seed)| run_point(spec, &algos, v, seed))
        .collect();
    results.sort_by(|a, b| {
        (a.value_index, a.algorithm, a.seed).cmp(&(b.value_index, b.algorithm, b.seed))
    });

    let mut rows = Vec::new();
    for group in results.chunk_by(|a, b| (a.value_index, a.algorithm) == (b.value_index, b.algorithm)) {
        let ok: Vec<_> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let mean = |f: fn(&(f64, f64, f64)) -> f64| {
            (!ok.is_empty()).then(|| ok.iter().map(|o| f(o)).sum::<f64>() / ok.len() as f64)
        };
        rows.push(ResultRow {
            param: spec.param,
            value: spec.values[group[0].value_index],
            algorithm: group[0].algorithm,
            mean_size: mean(|o| o.0),
            mean_used_budget: mean(|o| o.1),
            mean_seconds: mean(|o| o.2),
            seeds: ok.len(),
            failed: group.len() - ok.len(),
            error: group.iter().find_map(|r| r.outcome.as_ref().err().cloned()),
        });
    }
    Ok(rows)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sweep rows as CSV. Wall-clock means are only written with `timing`, so
/// the default output is byte-identical across reruns.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[ResultRow], timing: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["param", "value", "algorithm", "mean_size", "mean_used_budget"];
    if timing {
        header.push("mean_seconds");
    }
    header.extend(["seeds", "failed", "error"]);
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.param.name().to_string(),
            r.value.to_string(),
            r.algorithm.to_string(),
            opt_cell(r.mean_size),
            opt_cell(r.mean_used_budget),
        ];
        if timing {
            rec.push(opt_cell(r.mean_seconds));
        }
        rec.extend([r.seeds.to_string(), r.failed.to_string(), r.error.clone().unwrap_or_default()]);
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Numbers of the six-worker example, recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyReplay {
    pub opt_size: usize,
    pub opt_cost: f64,
    pub alg1_size: usize,
    pub alg1_cost: f64,
    pub greedy_size: usize,
    pub greedy_cost: f64,
    pub grade_sizes: Vec<usize>,
    pub grade_costs: Vec<f64>,
    pub rt_expectation: f64,
    pub ot_threshold: f64,
    pub ot_size: usize,
    pub ot_cost: f64,
}

pub fn replay_toy() -> Result<ToyReplay> {
    let (inst, stream) = ArrivalModel::Random.arrange(&toy_instance());
    let opt = budget_ssp_optimal(&inst);
    let alg1 = algorithm1_optimal(&inst);
    let run = |p| run_online(&stream, &inst.batch, inst.metric, p);
    let greedy = run(ThresholdPolicy::Unbounded)?.matching;
    let grades = greedy_rt_grades(&stream, &inst.batch, inst.metric, TOY_C_MAX)?;
    let tau = extract_ot_threshold(&opt)?;
    let ot = run(ThresholdPolicy::Fixed { tau })?.matching;
    for m in [&opt, &alg1, &greedy, &ot].into_iter().chain(grades.iter().map(|g| &g.matching)) {
        validate_matching(m, &inst)?.into_result()?;
    }
    Ok(ToyReplay {
        opt_size: opt.size(),
        opt_cost: opt.total_cost,
        alg1_size: alg1.size(),
        alg1_cost: alg1.total_cost,
        greedy_size: greedy.size(),
        greedy_cost: greedy.total_cost,
        grade_sizes: grades.iter().map(|g| g.matching.size()).collect(),
        grade_costs: grades.iter().map(|g| g.matching.total_cost).collect(),
        rt_expectation: mean_grade_size(&grades),
        ot_threshold: tau,
        ot_size: ot.size(),
        ot_cost: ot.total_cost,
    })
}

/// A small random instance for exhaustive cross-checks, arranged in the
/// random arrival model. Sizes are uniform in `1..=max_size`; region side,
/// deadline window, budget and metric vary too.
pub fn random_small_instance(seed: u64, max_size: usize) -> Result<Instance> {
    if max_size == 0 {
        return Err(Error::InvalidInput("max size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side: f64 = rng.gen_range(5.0..=100.0);
    let n_workers = rng.gen_range(1..=max_size);
    let n_tasks = rng.gen_range(1..=max_size);
    let cfg = SyntheticConfig {
        n_workers,
        n_tasks,
        budget: rng.gen_range(0.0..=1.0) * side * n_workers.min(n_tasks) as f64,
        deadline_window: rng.gen_range(0.2..=1.0) * side,
        square_side: side,
        time_horizon: side,
        velocity: 1.0,
        metric: if rng.gen_bool(0.5) {
            CostMetric::Manhattan
        } else {
            CostMetric::Euclidean
        },
        seed: rng.gen(),
    };
    Ok(ArrivalModel::Random.arrange(&gen_synthetic(&cfg)?).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCheck {
    /// Budget-truncated SSP size equals the brute-force optimum.
    Exactness,
    /// SSP augmentation costs never decrease.
    Convexity,
    /// Greedy-RT expectation is at least `|O| / grades`.
    RtExpectationBound,
    /// Self-guided Greedy-OT size is at least `floor(cost(O) / max pair cost of O)`.
    OtSizeBound,
    /// Cheap Greedy-OT pairs touch a worker or task of the unique optimum.
    OtOverlap,
    InvalidMatching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleViolation {
    pub trial: usize,
    pub check: OracleCheck,
    pub detail: String,
    /// Enough to replay the failure.
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub optimum_size: usize,
    pub unique_optimum: Option<bool>,
    pub alg1_gap: usize,
    pub violations: Vec<OracleViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub trials: usize,
    pub max_size: usize,
    pub seed: u64,
    /// Trials where the overlap check ran (enumeration possible and the
    /// optimum unique).
    pub overlap_checked: usize,
    pub max_alg1_gap: usize,
    pub alg1_gap_trials: usize,
    pub violations: Vec<OracleViolation>,
    pub toy: ToyReplay,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every cross-check on one instance.
pub fn check_instance(trial: usize, inst: &Instance) -> Result<TrialOutcome> {
    let mut violations = Vec::new();
    let mut flag = |check, detail: String| {
        violations.push(OracleViolation {
            trial,
            check,
            detail,
            instance: inst.clone(),
        })
    };

    let exact = brute_force_optimal(inst)?;
    let opt = budget_ssp_optimal(inst);
    let alg1 = algorithm1_optimal(inst);
    for (name, m) in [("brute force", &exact), ("budget ssp", &opt), ("algorithm 1", &alg1)] {
        let report = validate_matching(m, inst)?;
        if !report.is_valid() {
            flag(OracleCheck::InvalidMatching, format!("{name}: {:?}", report.violations));
        }
    }
    if opt.size() != exact.size() {
        flag(
            OracleCheck::Exactness,
            format!("budget ssp size {} != brute force size {}", opt.size(), exact.size()),
        );
    }

    let budgeted = budgeted_flow(inst);
    let mut net = build_flow_network(inst);
    let full = min_cost_max_flow(&mut net);
    for (name, f) in [("budgeted", &budgeted), ("full", &full)] {
        if !f.is_convex() {
            flag(OracleCheck::Convexity, format!("{name} augmentation costs {:?}", f.augmentation_costs));
        }
    }

    let stream = ArrivalStream::new(inst.workers.clone())?;
    let grades = greedy_rt_grades(&stream, &inst.batch, inst.metric, inst.c_max)?;
    let expectation = mean_grade_size(&grades);
    let bound = opt.size() as f64 / grades.len() as f64;
    if expectation < bound - EPS {
        flag(
            OracleCheck::RtExpectationBound,
            format!("expectation {expectation} < {} / {}", opt.size(), grades.len()),
        );
    }

    let mut unique_optimum = None;
    if !opt.is_empty() {
        let tau = extract_ot_threshold(&opt)?;
        let ot = run_online(&stream, &inst.batch, inst.metric, ThresholdPolicy::Fixed { tau })?.matching;
        let bound = (opt.total_cost / tau + EPS).floor() as usize;
        if ot.size() < bound {
            flag(
                OracleCheck::OtSizeBound,
                format!("greedy-ot size {} < floor({} / {tau}) = {bound}", ot.size(), opt.total_cost),
            );
        }

        if inst.workers.len().max(inst.tasks().len()) <= ENUMERATION_LIMIT {
            let optima = brute_force_optima(inst)?;
            unique_optimum = Some(optima.len() == 1);
            if let [only] = &optima[..] {
                for p in ot.pairs.iter().filter(|p| p.cost < tau - EPS) {
                    let touches = only.pairs.iter().any(|q| q.worker_id == p.worker_id || q.task_id == p.task_id);
                    if !touches {
                        flag(
                            OracleCheck::OtOverlap,
                            format!("pair ({}, {}) cost {} shares nothing with the optimum", p.worker_id, p.task_id, p.cost),
                        );
                    }
                }
            }
        }
    }

    Ok(TrialOutcome {
        optimum_size: exact.size(),
        unique_optimum,
        alg1_gap: exact.size().saturating_sub(alg1.size()),
        violations,
    })
}

/// Cross-checks `trials` random instances with at most `max_size` workers
/// and tasks, plus a replay of the six-worker example.
pub fn oracle_check(trials: usize, max_size: usize, seed: u64) -> Result<OracleReport> {
    if max_size > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            workers: max_size,
            tasks: max_size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| check_instance(i, &random_small_instance(seed.wrapping_add(i as u64), max_size)?))
        .collect::<Result<Vec<_>>>()?;

    Ok(OracleReport {
        trials,
        max_size,
        seed,
        overlap_checked: outcomes.iter().filter(|o| o.unique_optimum == Some(true)).count(),
        max_alg1_gap: outcomes.iter().map(|o| o.alg1_gap).max().unwrap_or(0),
        alg1_gap_trials: outcomes.iter().filter(|o| o.alg1_gap > 0).count(),
        violations: outcomes.into_iter().flat_map(|o| o.violations).collect(),
        toy: replay_toy()?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealOptions {
    pub bbox: GeoBoundingBox,
    pub window: HourWindow,
    pub budget: f64,
    pub n_tasks: usize,
    pub task_seed: u64,
    /// Minutes.
    pub release_window: (f64, f64),
    /// Minutes from release to deadline.
    pub lifetime: f64,
    pub metric: CostMetric,
    pub lenient: bool,
}

impl RealOptions {
    pub fn new(budget: f64, n_tasks: usize, task_seed: u64) -> Self {
        RealOptions {
            bbox: GeoBoundingBox::NYC,
            window: HourWindow { start: 0, end: 12 },
            budget,
            n_tasks,
            task_seed,
            release_window: (0.0, 720.0),
            lifetime: 180.0,
            metric: CostMetric::Euclidean,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRow {
    pub algorithm: Algorithm,
    pub size: f64,
    pub used_budget: f64,
    pub threshold: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealTable {
    pub target_workers: usize,
    pub history_workers: usize,
    pub tasks: usize,
    pub rows: Vec<RealRow>,
}

/// Real-data day: pickups become workers, tasks are seeded uniform draws.
/// Greedy-OT's threshold comes from the history day's exact optimum against
/// the same task draw.
pub fn run_real(pickups: &Path, history: &Path, opts: &RealOptions) -> Result<RealTable> {
    let ingest = IngestOptions {
        lenient: opts.lenient,
        ..IngestOptions::new(opts.bbox, opts.window)
    };
    let target_workers = ingest_pickups_csv(pickups, &ingest)?.workers;
    let history_workers = ingest_pickups_csv(history, &ingest)?.workers;
    let batch = gen_real_tasks(
        &opts.bbox,
        opts.n_tasks,
        opts.release_window,
        opts.lifetime,
        opts.budget,
        opts.task_seed,
    )?;
    let c_max = region_c_max(&Region::Geo { bbox: opts.bbox }, opts.metric)?;

    let history = Instance::new(history_workers, batch.clone(), opts.metric, c_max)?;
    let tau = self_guided_threshold(&ArrivalModel::Random.arrange(&history).0)?;
    let target = Instance::new(target_workers, batch, opts.metric, c_max)?;
    let (inst, stream) = ArrivalModel::Random.arrange(&target);

    let rows = Algorithm::ALL
        .iter()
        .map(|&a| {
            let ev = evaluate(a, &inst, &stream, rt_seed(opts.task_seed), Some(tau))?;
            Ok(RealRow {
                algorithm: a,
                size: ev.size,
                used_budget: ev.used_budget,
                threshold: ev.threshold,
                seconds: ev.seconds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealTable {
        target_workers: inst.workers.len(),
        history_workers: history.workers.len(),
        tasks: inst.tasks().len(),
        rows,
    })
}

pub fn write_real_csv<W: Write>(out: W, table: &RealTable, timing: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["algorithm", "size", "used_budget", "threshold"];
    if timing {
        header.push("seconds");
    }
    wtr.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![
            r.algorithm.to_string(),
            r.size.to_string(),
            r.used_budget.to_string(),
            opt_cell(r.threshold),
        ];
        if timing {
            rec.push(r.seconds.to_string());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
