//! Workload generation: uniform synthetic instances, the two arrival
//! orderings, and ingestion of pickup-trace CSVs as workers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{project_geo, region_c_max, unproject_geo, GeoBoundingBox, Region};
use crate::error::{Error, Result};
use crate::model::{is_feasible, travel_cost, CostMetric, Instance, Location, Task, TaskBatch, Worker};
use crate::online::ArrivalStream;

/// 40 km/h in km per minute; real-data times are minutes.
pub const REAL_VELOCITY_KM_PER_MIN: f64 = 40.0 / 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_workers: usize,
    pub n_tasks: usize,
    pub budget: f64,
    /// Deadline minus release for every task.
    pub deadline_window: f64,
    pub square_side: f64,
    /// Arrival and release times are drawn from `[0, time_horizon - 1]`.
    pub time_horizon: f64,
    pub velocity: f64,
    pub metric: CostMetric,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_workers: 6000,
            n_tasks: 6000,
            budget: 3000.0,
            deadline_window: 60.0,
            square_side: 500.0,
            time_horizon: 100.0,
            velocity: 1.0,
            metric: CostMetric::Manhattan,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("synthetic config: {what}")));
        if self.n_workers == 0 || self.n_tasks == 0 {
            return bad("worker and task counts must be positive");
        }
        if !(self.square_side.is_finite() && self.square_side > 0.0) {
            return bad("square_side must be positive");
        }
        if !(self.deadline_window.is_finite() && self.deadline_window > 0.0) {
            return bad("deadline_window must be positive");
        }
        if !(self.time_horizon.is_finite() && self.time_horizon >= 1.0) {
            return bad("time_horizon must be at least 1");
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return bad("velocity must be positive");
        }
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return bad("budget must be non-negative");
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region::Square { side: self.square_side }
    }
}

/// Uniform positions in the square and uniform times over the horizon.
/// Worker and task ids are `0..n`.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let side = cfg.square_side;
    let last = cfg.time_horizon - 1.0;

    let mut workers = Vec::with_capacity(cfg.n_workers);
    for id in 0..cfg.n_workers {
        let loc = Location {
            x: rng.gen_range(0.0..=side),
            y: rng.gen_range(0.0..=side),
        };
        workers.push(Worker::new(id as u32, loc, rng.gen_range(0.0..=last), cfg.velocity)?);
    }
    let mut tasks = Vec::with_capacity(cfg.n_tasks);
    for id in 0..cfg.n_tasks {
        let loc = Location {
            x: rng.gen_range(0.0..=side),
            y: rng.gen_range(0.0..=side),
        };
        let release = rng.gen_range(0.0..=last);
        tasks.push(Task::new(id as u32, loc, release, release + cfg.deadline_window)?);
    }
    let c_max = region_c_max(&cfg.region(), cfg.metric)?;
    Instance::new(workers, TaskBatch::new(tasks, cfg.budget)?, cfg.metric, c_max)
}

fn arrival_span(workers: &[Worker]) -> (f64, f64) {
    workers
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w.arrival), hi.max(w.arrival)))
}

/// Random model: workers in order of their arrival times. With
/// `redraw_seed`, arrival times are first redrawn uniformly over the
/// instance's own arrival span.
pub fn order_random(inst: &Instance, redraw_seed: Option<u64>) -> ArrivalStream {
    let mut workers = inst.workers.clone();
    if let (Some(seed), false) = (redraw_seed, workers.is_empty()) {
        let (lo, hi) = arrival_span(&workers);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut workers {
            w.arrival = rng.gen_range(lo..=hi);
        }
    }
    ArrivalStream::sorted(workers)
}

/// Adversary model: the worker farthest from its nearest reachable task
/// comes first. Workers that cannot reach any task lead. Ties go to the
/// smaller id. Arrival times are replaced by evenly spaced times over the
/// original arrival span, so run the offline solvers on
/// `inst.with_workers(stream.into_workers())`.
pub fn order_adversary(inst: &Instance) -> ArrivalStream {
    let mut scored: Vec<(f64, Worker)> = inst
        .workers
        .iter()
        .map(|w| {
            let nearest = inst
                .tasks()
                .iter()
                .filter(|t| is_feasible(w, t, inst.metric))
                .map(|t| travel_cost(w, t, inst.metric))
                .fold(f64::INFINITY, f64::min);
            (nearest, w.clone())
        })
        .collect();
    scored.sort_by(|(a, wa), (b, wb)| b.total_cmp(a).then(wa.id.cmp(&wb.id)));

    let n = scored.len();
    let (lo, hi) = arrival_span(&inst.workers);
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let workers = scored
        .into_iter()
        .enumerate()
        .map(|(k, (_, mut w))| {
            w.arrival = if k + 1 == n && n > 1 { hi } else { lo + k as f64 * step };
            w
        })
        .collect();
    ArrivalStream::sorted(workers)
}

/// Hours of the day, inclusive at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourWindow {
    pub start: u32,
    pub end: u32,
}

impl HourWindow {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start >= end || end > 24 {
            return Err(Error::InvalidInput(format!("bad hour window {start}-{end}")));
        }
        Ok(HourWindow { start, end })
    }

    /// Parses `h0-h1`, e.g. `0-12`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("hour window must look like 0-12, got {s:?}"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        HourWindow::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }

    fn minutes(&self) -> (f64, f64) {
        (f64::from(self.start) * 60.0, f64::from(self.end) * 60.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub bbox: GeoBoundingBox,
    pub window: HourWindow,
    /// Keep only pickups on this date.
    pub date: Option<NaiveDate>,
    /// km per minute.
    pub velocity: f64,
    /// Skip malformed rows instead of failing on the first one.
    pub lenient: bool,
}

impl IngestOptions {
    pub fn new(bbox: GeoBoundingBox, window: HourWindow) -> Self {
        IngestOptions {
            bbox,
            window,
            date: None,
            velocity: REAL_VELOCITY_KM_PER_MIN,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub workers: Vec<Worker>,
    /// Malformed rows skipped in lenient mode.
    pub malformed: usize,
    /// Well-formed rows outside the box, window or date.
    pub filtered: usize,
}

const UBER_TIME_FORMAT: &str = "%m/%d/%Y %H:%M:%S";

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    [UBER_TIME_FORMAT, "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

#[derive(Debug, Deserialize)]
struct PickupRow {
    #[serde(rename = "Date/Time")]
    time: String,
    #[serde(rename = "Lat")]
    lat: f64,
    #[serde(rename = "Lon")]
    lon: f64,
}

/// Reads `Date/Time,Lat,Lon[,...]` pickups as workers. Times become minutes
/// since the window's start hour, positions are projected to km, ids run
/// from 0 in file order over the surviving rows.
pub fn ingest_pickups_csv(path: &Path, opts: &IngestOptions) -> Result<Ingested> {
    let file = File::open(path)?;
    ingest_pickups(file, path, opts)
}

/// [`ingest_pickups_csv`] over any reader; `path` is only used in errors.
pub fn ingest_pickups<R: Read>(reader: R, path: &Path, opts: &IngestOptions) -> Result<Ingested> {
    opts.bbox.validate()?;
    if !(opts.velocity.is_finite() && opts.velocity > 0.0) {
        return Err(Error::InvalidInput(format!("velocity must be positive, got {}", opts.velocity)));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let (lo, hi) = opts.window.minutes();
    let mut out = Ingested {
        workers: Vec::new(),
        malformed: 0,
        filtered: 0,
    };

    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed = rec
            .deserialize::<PickupRow>(None)
            .map_err(|e| e.to_string())
            .and_then(|row| {
                let ts = parse_timestamp(&row.time).ok_or_else(|| format!("unparseable timestamp {:?}", row.time))?;
                if !(-90.0..=90.0).contains(&row.lat) || !(-180.0..=180.0).contains(&row.lon) {
                    return Err(format!("coordinates ({}, {}) out of range", row.lat, row.lon));
                }
                Ok((ts, row.lat, row.lon))
            });
        let (ts, lat, lon) = match parsed {
            Ok(v) => v,
            Err(message) if opts.lenient => {
                log::debug!("{}:{line}: skipped: {message}", path.display());
                out.malformed += 1;
                continue;
            }
            Err(message) => {
                return Err(Error::Row {
                    path: path.to_path_buf(),
                    line,
                    message,
                })
            }
        };

        let minute = f64::from(ts.hour()) * 60.0 + f64::from(ts.minute()) + f64::from(ts.second()) / 60.0;
        let on_date = opts.date.is_none_or(|d| ts.date() == d);
        if !on_date || minute < lo || minute > hi || !opts.bbox.contains(lat, lon) {
            out.filtered += 1;
            continue;
        }
        let loc = project_geo(lat, lon, &opts.bbox)?;
        out.workers.push(Worker::new(out.workers.len() as u32, loc, minute - lo, opts.velocity)?);
    }

    if out.workers.is_empty() {
        log::warn!("{}: no pickups survived the filters", path.display());
    }
    Ok(out)
}

/// Writes workers back as pickups on `date`, inverting the projection and
/// the window offset. Arrivals are rounded to whole seconds.
pub fn write_pickups_csv<W: Write>(
    out: W,
    workers: &[Worker],
    bbox: &GeoBoundingBox,
    window: HourWindow,
    date: NaiveDate,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["Date/Time", "Lat", "Lon"])?;
    let start = date
        .and_hms_opt(window.start, 0, 0)
        .ok_or_else(|| Error::InvalidInput(format!("bad window start {}", window.start)))?;
    for w in workers {
        let ts = start + chrono::Duration::seconds((w.arrival * 60.0).round() as i64);
        let (lat, lon) = unproject_geo(w.loc, bbox);
        wtr.write_record([ts.format(UBER_TIME_FORMAT).to_string(), lat.to_string(), lon.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Tasks for a real-data day: uniform over the projected box, releases
/// uniform over `release_window` (minutes), fixed lifetime.
pub fn gen_real_tasks(
    bbox: &GeoBoundingBox,
    n_tasks: usize,
    release_window: (f64, f64),
    lifetime: f64,
    budget: f64,
    seed: u64,
) -> Result<TaskBatch> {
    bbox.validate()?;
    let (r0, r1) = release_window;
    if n_tasks == 0 {
        return Err(Error::InvalidInput("task count must be positive".into()));
    }
    if !(r0.is_finite() && r1.is_finite() && r0 <= r1) {
        return Err(Error::InvalidInput(format!("bad release window {r0}..{r1}")));
    }
    let (w, h) = (bbox.width_km(), bbox.height_km());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks = (0..n_tasks)
        .map(|id| {
            let loc = Location {
                x: rng.gen_range(0.0..=w),
                y: rng.gen_range(0.0..=h),
            };
            let release = rng.gen_range(r0..=r1);
            Task::new(id as u32, loc, release, release + lifetime)
        })
        .collect::<Result<Vec<_>>>()?;
    TaskBatch::new(tasks, budget)
}

/// Where an instance came from, stored alongside it so runs can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { config: SyntheticConfig },
    Real { pickups: String, task_seed: u64 },
    Fixture { name: String },
}

pub const INSTANCE_FORMAT: &str = "boa-instance/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub format: String,
    pub provenance: Provenance,
    pub instance: Instance,
}

impl InstanceDoc {
    pub fn new(instance: Instance, provenance: Provenance) -> Self {
        InstanceDoc {
            format: INSTANCE_FORMAT.to_string(),
            provenance,
            instance,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        if doc.format != INSTANCE_FORMAT {
            return Err(Error::InvalidInput(format!("unsupported instance format {:?}", doc.format)));
        }
        doc.instance.validate()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        InstanceDoc::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
