//! The running six-worker, six-task example.
//!
//! Worker `w_i` (id `i`) appears at time `i` with velocity 1; every task is
//! released at 0 and expires at 10; the budget is 10; points lie in the 8x8
//! square under the Manhattan metric, so `c_max = 16`. The coordinates were
//! chosen so that the instance reproduces, exactly:
//!
//! * simple greedy: `{(w1,t1),(w2,t2)}`, size 2, cost 10;
//! * threshold greedy at `e^0, e^1, e^2, e^3`: sizes 2, 3, 2, 2 (mean 2.25);
//! * threshold greedy at 5: `{(w2,t2),(w3,t6),(w5,t1),(w6,t4)}`, cost 10;
//! * offline optimum: `{(w3,t2),(w4,t5),(w5,t1),(w6,t4)}`, cost 9.

use crate::model::{CostMetric, Instance, Location, Task, TaskBatch, Worker};

pub const TOY_BUDGET: f64 = 10.0;
pub const TOY_C_MAX: f64 = 16.0;

const WORKERS: [(f64, f64); 6] = [(8.0, 0.0), (0.0, 8.0), (0.5, 4.5), (8.0, 4.5), (5.0, 1.0), (3.5, 5.5)];
const TASKS: [(f64, f64); 6] = [(3.0, 1.0), (0.0, 4.0), (5.5, 8.0), (4.0, 6.0), (6.5, 8.0), (0.0, 2.0)];

pub fn toy_instance() -> Instance {
    let workers = WORKERS
        .iter()
        .zip(1u32..)
        .map(|(&(x, y), id)| Worker::new(id, Location { x, y }, f64::from(id), 1.0).expect("valid worker"))
        .collect();
    let tasks = TASKS
        .iter()
        .zip(1u32..)
        .map(|(&(x, y), id)| Task::new(id, Location { x, y }, 0.0, 10.0).expect("valid task"))
        .collect();
    let batch = TaskBatch::new(tasks, TOY_BUDGET).expect("valid batch");
    Instance::new(workers, batch, CostMetric::Manhattan, TOY_C_MAX).expect("valid instance")
}
