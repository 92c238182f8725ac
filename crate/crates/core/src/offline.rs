//! Offline optimum.
//!
//! The assignment problem reduces to min-cost max-flow on the network
//! `source -> worker -> task -> sink` where every edge has capacity one and
//! only worker -> task edges carry a cost (the travel cost of a
//! deadline-feasible pair). Two budget selections sit on top of the flow:
//!
//! * [`algorithm1_optimal`] runs the full min-cost max-flow, sorts the
//!   matched pairs by cost and admits them while the budget allows.
//! * [`budget_ssp_optimal`] stops the successive-shortest-path iteration at
//!   the first augmentation the budget cannot pay for. SSP augmentation
//!   costs never decrease, so the truncated flow is the exact
//!   maximum-cardinality matching within budget.
//!
//! [`brute_force_optimal`] is an exhaustive oracle for small instances.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{feasible_with_cost, travel_cost, Instance, Matching, Pair, TaskId, WorkerId, EPS};

/// Float costs are scaled by this factor and rounded inside the solver.
pub const COST_SCALE: f64 = 1e6;

/// Largest side (workers or tasks) [`brute_force_optimal`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 10;

/// Largest side [`brute_force_optima`] accepts; it enumerates every matching.
pub const ENUMERATION_LIMIT: usize = 7;

const INF: i64 = i64::MAX / 4;

pub fn scale_cost(c: f64) -> i64 {
    (c * COST_SCALE).round() as i64
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: i32,
    cost: i64,
    real_cost: f64,
}

/// Residual network. Edges are stored in pairs: edge `e` and its reverse
/// twin `e ^ 1`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    head: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
    worker_ids: Vec<WorkerId>,
    task_ids: Vec<TaskId>,
    /// Edge index of every worker -> task edge.
    assign_edges: Vec<usize>,
}

impl FlowNetwork {
    fn with_sides(workers: usize, tasks: usize) -> Self {
        let n = workers + tasks + 2;
        FlowNetwork {
            edges: Vec::new(),
            head: vec![Vec::new(); n],
            source: 0,
            sink: n - 1,
            worker_ids: Vec::with_capacity(workers),
            task_ids: Vec::with_capacity(tasks),
            assign_edges: Vec::new(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, real_cost: f64) -> usize {
        let cost = scale_cost(real_cost);
        let id = self.edges.len();
        self.edges.push(Edge {
            to,
            cap: 1,
            cost,
            real_cost,
        });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
            real_cost: -real_cost,
        });
        self.head[from].push(id);
        self.head[to].push(id + 1);
        id
    }

    fn worker_node(&self, i: usize) -> usize {
        1 + i
    }

    fn task_node(&self, j: usize) -> usize {
        1 + self.worker_ids.len() + j
    }

    pub fn vertex_count(&self) -> usize {
        self.head.len()
    }

    pub fn forward_edge_count(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn assignment_edge_count(&self) -> usize {
        self.assign_edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// `(from, to, capacity, scaled cost)` of every forward edge.
    pub fn forward_edges(&self) -> impl Iterator<Item = (usize, usize, i32, i64)> + '_ {
        self.edges.chunks_exact(2).map(|pair| (pair[1].to, pair[0].to, pair[0].cap, pair[0].cost))
    }

    /// Capacity of each forward edge plus that of its reverse twin. Stays at
    /// one for every edge under augmentation.
    pub fn twin_capacity_sums(&self) -> impl Iterator<Item = i32> + '_ {
        self.edges.chunks_exact(2).map(|pair| pair[0].cap + pair[1].cap)
    }

    /// Pairs whose worker -> task edge is saturated, in worker order.
    pub fn matched_pairs(&self) -> Vec<Pair> {
        let w = self.worker_ids.len();
        self.assign_edges
            .iter()
            .filter(|&&e| self.edges[e].cap == 0)
            .map(|&e| {
                let from = self.edges[e ^ 1].to;
                let to = self.edges[e].to;
                Pair {
                    worker_id: self.worker_ids[from - 1],
                    task_id: self.task_ids[to - 1 - w],
                    cost: self.edges[e].real_cost,
                }
            })
            .collect()
    }
}

pub fn build_flow_network(inst: &Instance) -> FlowNetwork {
    let tasks = inst.tasks();
    let mut net = FlowNetwork::with_sides(inst.workers.len(), tasks.len());
    net.worker_ids.extend(inst.workers.iter().map(|w| w.id));
    net.task_ids.extend(tasks.iter().map(|t| t.id));

    for i in 0..inst.workers.len() {
        let (s, wn) = (net.source, net.worker_node(i));
        net.add_edge(s, wn, 0.0);
    }
    for j in 0..tasks.len() {
        let (tn, e) = (net.task_node(j), net.sink);
        net.add_edge(tn, e, 0.0);
    }
    for (i, w) in inst.workers.iter().enumerate() {
        for (j, t) in tasks.iter().enumerate() {
            let c = travel_cost(w, t, inst.metric);
            if feasible_with_cost(w, t, c) {
                let (wn, tn) = (net.worker_node(i), net.task_node(j));
                let e = net.add_edge(wn, tn, c);
                net.assign_edges.push(e);
            }
        }
    }
    net
}

/// One shortest augmenting path found by [`Ssp`].
#[derive(Debug, Clone)]
pub struct Augmentation {
    edges: Vec<usize>,
    /// True (unreduced) path cost in scaled units.
    pub scaled_cost: i64,
    /// True path cost in original units.
    pub cost: f64,
}

/// Successive shortest paths with vertex potentials: every search runs
/// Dijkstra on non-negative reduced costs.
#[derive(Debug)]
pub struct Ssp {
    potential: Vec<i64>,
    dist: Vec<i64>,
    prev: Vec<usize>,
}

impl Ssp {
    pub fn new(net: &FlowNetwork) -> Self {
        let n = net.vertex_count();
        // All original costs are non-negative, so zero potentials are valid.
        Ssp {
            potential: vec![0; n],
            dist: vec![INF; n],
            prev: vec![usize::MAX; n],
        }
    }

    /// Finds the next shortest augmenting path and updates the potentials.
    /// Returns `None` once the flow is maximum.
    pub fn next_path(&mut self, net: &FlowNetwork) -> Option<Augmentation> {
        self.dist.fill(INF);
        self.prev.fill(usize::MAX);
        self.dist[net.source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, net.source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > self.dist[u] {
                continue;
            }
            for &e in &net.head[u] {
                let edge = &net.edges[e];
                if edge.cap <= 0 {
                    continue;
                }
                let reduced = edge.cost + self.potential[u] - self.potential[edge.to];
                debug_assert!(reduced >= 0, "negative reduced cost {reduced}");
                let nd = d + reduced;
                if nd < self.dist[edge.to] {
                    self.dist[edge.to] = nd;
                    self.prev[edge.to] = e;
                    heap.push(Reverse((nd, edge.to)));
                }
            }
        }
        if self.dist[net.sink] >= INF {
            return None;
        }
        for (p, &d) in self.potential.iter_mut().zip(&self.dist) {
            if d < INF {
                *p += d;
            }
        }

        let mut edges = Vec::new();
        let mut v = net.sink;
        let (mut scaled_cost, mut cost) = (0i64, 0.0f64);
        while v != net.source {
            let e = self.prev[v];
            scaled_cost += net.edges[e].cost;
            cost += net.edges[e].real_cost;
            edges.push(e);
            v = net.edges[e ^ 1].to;
        }
        edges.reverse();
        Some(Augmentation {
            edges,
            scaled_cost,
            cost,
        })
    }

    /// Pushes one unit of flow along `path`.
    pub fn apply(&self, net: &mut FlowNetwork, path: &Augmentation) {
        for &e in &path.edges {
            net.edges[e].cap -= 1;
            net.edges[e ^ 1].cap += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub flow: usize,
    /// True path cost of every augmentation, scaled, in discovery order.
    pub augmentation_costs: Vec<i64>,
    pub pairs: Vec<Pair>,
}

impl FlowResult {
    /// Whether the augmentation costs never decrease.
    pub fn is_convex(&self) -> bool {
        self.augmentation_costs.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn total_scaled_cost(&self) -> i64 {
        self.augmentation_costs.iter().sum()
    }

    pub fn into_matching(self) -> Matching {
        Matching::from_pairs(self.pairs)
    }
}

pub fn min_cost_max_flow(net: &mut FlowNetwork) -> FlowResult {
    let mut ssp = Ssp::new(net);
    let mut costs = Vec::new();
    while let Some(path) = ssp.next_path(net) {
        ssp.apply(net, &path);
        costs.push(path.scaled_cost);
    }
    debug_assert!(costs.windows(2).all(|w| w[0] <= w[1]));
    FlowResult {
        flow: costs.len(),
        augmentation_costs: costs,
        pairs: net.matched_pairs(),
    }
}

/// SSP truncated at the budget: augments one unit at a time and stops before
/// the first augmentation whose cost would overrun the budget.
pub fn budgeted_flow(inst: &Instance) -> FlowResult {
    let mut net = build_flow_network(inst);
    let mut ssp = Ssp::new(&net);
    let mut costs = Vec::new();
    let mut used = 0.0;
    while let Some(path) = ssp.next_path(&net) {
        if used + path.cost > inst.budget() + EPS {
            break;
        }
        used += path.cost;
        ssp.apply(&mut net, &path);
        costs.push(path.scaled_cost);
    }
    FlowResult {
        flow: costs.len(),
        augmentation_costs: costs,
        pairs: net.matched_pairs(),
    }
}

/// Orders pairs by cost, then worker id, then task id.
pub fn sort_by_cost(pairs: &mut [Pair]) {
    pairs.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.worker_id.cmp(&b.worker_id))
            .then(a.task_id.cmp(&b.task_id))
    });
}

/// Full min-cost max-flow, then the cheapest-first budget pass. A pair the
/// remaining budget cannot cover is skipped and the pass continues.
pub fn algorithm1_optimal(inst: &Instance) -> Matching {
    let mut net = build_flow_network(inst);
    let mut pairs = min_cost_max_flow(&mut net).pairs;
    sort_by_cost(&mut pairs);
    let mut used = 0.0;
    let mut admitted = Vec::with_capacity(pairs.len());
    for p in pairs {
        if used + p.cost <= inst.budget() + EPS {
            used += p.cost;
            admitted.push(p);
        }
    }
    Matching::from_pairs(admitted)
}

/// Exact maximum-cardinality matching with total cost within budget.
pub fn budget_ssp_optimal(inst: &Instance) -> Matching {
    budgeted_flow(inst).into_matching()
}

struct CostTable {
    /// `cost[i][j]`, `None` when the pair misses the deadline.
    cost: Vec<Vec<Option<f64>>>,
}

impl CostTable {
    fn new(inst: &Instance) -> Self {
        let cost = inst
            .workers
            .iter()
            .map(|w| {
                inst.tasks()
                    .iter()
                    .map(|t| {
                        let c = travel_cost(w, t, inst.metric);
                        feasible_with_cost(w, t, c).then_some(c)
                    })
                    .collect()
            })
            .collect();
        CostTable { cost }
    }
}

fn check_size(inst: &Instance, limit: usize) -> Result<()> {
    let (w, t) = (inst.workers.len(), inst.tasks().len());
    if w > limit || t > limit {
        return Err(Error::TooLarge {
            workers: w,
            tasks: t,
            limit,
        });
    }
    Ok(())
}

/// Exhaustive optimum by dynamic programming over subsets of tasks:
/// maximum cardinality within budget, ties broken by minimum total cost.
pub fn brute_force_optimal(inst: &Instance) -> Result<Matching> {
    check_size(inst, BRUTE_FORCE_LIMIT)?;
    let table = CostTable::new(inst);
    let (nw, nt) = (inst.workers.len(), inst.tasks().len());
    let masks = 1usize << nt;

    // best[i][mask]: cheapest way for workers 0..i to cover exactly `mask`.
    let mut best = vec![vec![f64::INFINITY; masks]; nw + 1];
    // choice[i][mask]: task worker i - 1 took to reach `mask` (None = idle).
    let mut choice = vec![vec![None::<usize>; masks]; nw + 1];
    best[0][0] = 0.0;
    for i in 0..nw {
        for mask in 0..masks {
            let base = best[i][mask];
            if base.is_infinite() {
                continue;
            }
            if base < best[i + 1][mask] {
                best[i + 1][mask] = base;
                choice[i + 1][mask] = None;
            }
            for j in (0..nt).filter(|j| mask & (1 << j) == 0) {
                if let Some(c) = table.cost[i][j] {
                    let next = mask | (1 << j);
                    if base + c < best[i + 1][next] {
                        best[i + 1][next] = base + c;
                        choice[i + 1][next] = Some(j);
                    }
                }
            }
        }
    }

    let budget = inst.budget();
    let mut target = 0usize;
    for mask in 1..masks {
        let c = best[nw][mask];
        if c > budget + EPS {
            continue;
        }
        let (ones, best_ones) = (mask.count_ones(), target.count_ones());
        if ones > best_ones || (ones == best_ones && c < best[nw][target]) {
            target = mask;
        }
    }

    let mut pairs = Vec::new();
    let mut mask = target;
    for i in (1..=nw).rev() {
        if let Some(j) = choice[i][mask] {
            pairs.push(Pair {
                worker_id: inst.workers[i - 1].id,
                task_id: inst.tasks()[j].id,
                cost: table.cost[i - 1][j].unwrap_or_default(),
            });
            mask &= !(1 << j);
        }
    }
    pairs.reverse();
    Ok(Matching::from_pairs(pairs))
}

/// Every optimal matching (maximum cardinality within budget, then minimum
/// cost within tolerance), by plain enumeration. Used to detect instances
/// whose optimum is not unique.
pub fn brute_force_optima(inst: &Instance) -> Result<Vec<Matching>> {
    check_size(inst, ENUMERATION_LIMIT)?;
    let table = CostTable::new(inst);
    let budget = inst.budget();
    let mut all: Vec<(Vec<(usize, usize)>, f64)> = Vec::new();

    fn rec(
        i: usize,
        used: u32,
        cur: &mut Vec<(usize, usize)>,
        cost: f64,
        table: &CostTable,
        budget: f64,
        all: &mut Vec<(Vec<(usize, usize)>, f64)>,
    ) {
        if i == table.cost.len() {
            all.push((cur.clone(), cost));
            return;
        }
        rec(i + 1, used, cur, cost, table, budget, all);
        for (j, c) in table.cost[i].iter().enumerate() {
            let Some(c) = *c else { continue };
            if used & (1 << j) != 0 || cost + c > budget + EPS {
                continue;
            }
            cur.push((i, j));
            rec(i + 1, used | (1 << j), cur, cost + c, table, budget, all);
            cur.pop();
        }
    }
    rec(0, 0, &mut Vec::new(), 0.0, &table, budget, &mut all);

    let size = all.iter().map(|(m, _)| m.len()).max().unwrap_or(0);
    let min_cost = all
        .iter()
        .filter(|(m, _)| m.len() == size)
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);
    Ok(all
        .into_iter()
        .filter(|(m, c)| m.len() == size && *c <= min_cost + EPS)
        .map(|(m, _)| {
            Matching::from_pairs(
                m.into_iter()
                    .map(|(i, j)| Pair {
                        worker_id: inst.workers[i].id,
                        task_id: inst.tasks()[j].id,
                        cost: table.cost[i][j].unwrap_or_default(),
                    })
                    .collect(),
            )
        })
        .collect())
}
