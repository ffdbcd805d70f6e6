use crate::euclid::{AlgorithmKind, CostFunction, Digit, Sign};
use num_complex::Complex64;
use rayon::prelude::*;

/// What a [`sweep`] accumulates along each digit word: total costs for each
/// cost function and `exp(i tau C)` for each `(cost index, tau)` pair.
#[derive(Debug, Clone, Default)]
pub struct SweepPlan {
    pub costs: Vec<CostFunction>,
    pub phases: Vec<(usize, f64)>,
}

impl SweepPlan {
    pub fn new(costs: Vec<CostFunction>) -> Self {
        SweepPlan { costs, phases: Vec::new() }
    }

    pub fn with_phase(mut self, cost_index: usize, tau: f64) -> Self {
        self.phases.push((cost_index, tau));
        self
    }
}

/// One visited pair and its accumulated data.
#[derive(Debug, Clone, Copy)]
pub struct PathPair<'a> {
    pub u: u64,
    pub v: u64,
    /// Number of digits `P(u, v)`.
    pub depth: u32,
    /// `C(u, v)` for each cost of the plan.
    pub costs: &'a [f64],
    /// `exp(i tau C(u, v))` for each phase of the plan.
    pub phases: &'a [Complex64],
}

/// A mergeable accumulator fed by [`sweep`] or [`super::monte_carlo`].
pub trait PairVisitor: Send {
    fn visit(&mut self, p: &PathPair<'_>);
    /// Absorbs `other`, which covers pairs disjoint from `self`.
    fn merge(&mut self, other: Self)
    where
        Self: Sized;
}

/// Partitioning of a sweep. Floating-point results depend on `shards` only
/// through summation order and never on `threads`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub shards: usize,
    pub threads: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { shards: 64, threads: default_threads() }
    }
}

pub fn default_threads() -> usize {
    std::env::var("EUCLID_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

struct Tables {
    costs: Vec<Vec<f64>>,
    phases: Vec<Vec<Complex64>>,
}

#[inline]
fn slot(m: u64, eps: Sign) -> usize {
    2 * m as usize + (eps == Sign::Minus) as usize
}

impl Tables {
    fn new(plan: &SweepPlan, kind: AlgorithmKind, n: u64) -> Self {
        // negative digits reach m = n + 1 below the root (1,1)
        let len = 2 * (n as usize + 2);
        let mut costs = vec![vec![0.0; len]; plan.costs.len()];
        for (j, c) in plan.costs.iter().enumerate() {
            for m in 1..=n + 1 {
                for &eps in kind.signs() {
                    costs[j][slot(m, eps)] = c.value(Digit { m, eps });
                }
            }
        }
        let phases = plan
            .phases
            .iter()
            .map(|&(j, tau)| {
                costs[j].iter().map(|&c| Complex64::from_polar(1.0, tau * c)).collect()
            })
            .collect();
        Tables { costs, phases }
    }
}

#[derive(Clone)]
struct Task {
    u: u64,
    v: u64,
    depth: u32,
    restricted: bool,
    costs: Vec<f64>,
    phases: Vec<Complex64>,
}

struct Walker<'a, V> {
    kind: AlgorithmKind,
    n: u64,
    tables: &'a Tables,
    visitor: &'a mut V,
    nc: usize,
    np: usize,
    cost_stack: Vec<f64>,
    phase_stack: Vec<Complex64>,
}

impl<V: PairVisitor> Walker<'_, V> {
    fn ensure(&mut self, level: usize) {
        let need_c = (level + 2) * self.nc;
        if self.cost_stack.len() < need_c {
            self.cost_stack.resize(need_c.max(2 * self.cost_stack.len()), 0.0);
        }
        let need_p = (level + 2) * self.np;
        if self.phase_stack.len() < need_p {
            self.phase_stack.resize(need_p.max(2 * self.phase_stack.len()), Complex64::new(0.0, 0.0));
        }
    }

    fn run(&mut self, t: &Task) {
        self.ensure(0);
        self.cost_stack[..self.nc].copy_from_slice(&t.costs);
        self.phase_stack[..self.np].copy_from_slice(&t.phases);
        self.walk(t.u, t.v, 0, t.depth, t.restricted);
    }

    fn walk(&mut self, u: u64, v: u64, level: usize, depth: u32, restricted: bool) {
        let (nc, np) = (self.nc, self.np);
        self.visitor.visit(&PathPair {
            u,
            v,
            depth,
            costs: &self.cost_stack[level * nc..(level + 1) * nc],
            phases: &self.phase_stack[level * np..(level + 1) * np],
        });
        if is_leaf(self.kind, u, v) {
            return;
        }
        self.ensure(level + 1);
        for &eps in self.kind.signs() {
            if restricted && eps == Sign::Plus {
                continue;
            }
            let mut m = self.kind.min_quotient(eps);
            loop {
                let nv = match eps {
                    Sign::Plus => m * v + u,
                    Sign::Minus => m * v - u,
                };
                if nv > self.n {
                    break;
                }
                let s = slot(m, eps);
                for j in 0..nc {
                    self.cost_stack[(level + 1) * nc + j] =
                        self.cost_stack[level * nc + j] + self.tables.costs[j][s];
                }
                for j in 0..np {
                    self.phase_stack[(level + 1) * np + j] =
                        self.phase_stack[level * np + j] * self.tables.phases[j][s];
                }
                self.walk(v, nv, level + 1, depth + 1, false);
                m += self.kind.quotient_step();
            }
        }
    }
}

/// `(1,1)` in the standard algorithm has the one-digit word `(1,+1)`, which
/// cannot be extended canonically.
#[inline]
fn is_leaf(kind: AlgorithmKind, u: u64, v: u64) -> bool {
    kind == AlgorithmKind::Standard && u == 1 && v == 1
}

/// Pairs whose one-digit word only extends by negative digits.
#[inline]
fn is_restricted(kind: AlgorithmKind, u: u64, v: u64) -> bool {
    match kind {
        AlgorithmKind::Centred => u == 1 && v == 2,
        AlgorithmKind::Odd => u == 1 && v == 1,
        AlgorithmKind::Standard => false,
    }
}

fn roots(kind: AlgorithmKind, n: u64) -> Vec<Digit> {
    let mut out = Vec::new();
    let mut m = kind.min_quotient(Sign::Plus);
    while m <= n {
        out.push(Digit::plus(m));
        m += kind.quotient_step();
    }
    out
}

/// Visits every pair of `Omega_N` once, walking digit words from their last
/// digit. Visitors are created per shard and merged in shard order.
pub fn sweep<V, F>(
    kind: AlgorithmKind,
    n: u64,
    plan: &SweepPlan,
    opts: &SweepOptions,
    make: F,
) -> V
where
    V: PairVisitor,
    F: Fn() -> V + Sync,
{
    let tables = Tables::new(plan, kind, n);
    let nc = plan.costs.len();
    let np = plan.phases.len();
    let shards = opts.shards.max(1);
    let split_below = ((8 * shards) as f64).sqrt().ceil() as u64;

    let mut upper = make();
    let mut tasks: Vec<Task> = Vec::new();
    let mut pending: Vec<Task> = roots(kind, n)
        .into_iter()
        .map(|q| {
            let s = slot(q.m, q.eps);
            Task {
                u: 1,
                v: q.m,
                depth: 1,
                restricted: is_restricted(kind, 1, q.m),
                costs: (0..nc).map(|j| tables.costs[j][s]).collect(),
                phases: (0..np).map(|j| tables.phases[j][s]).collect(),
            }
        })
        .collect();
    pending.reverse();
    while let Some(t) = pending.pop() {
        if t.v >= split_below || is_leaf(kind, t.u, t.v) {
            tasks.push(t);
            continue;
        }
        upper.visit(&PathPair { u: t.u, v: t.v, depth: t.depth, costs: &t.costs, phases: &t.phases });
        let mut children = Vec::new();
        for &eps in kind.signs() {
            if t.restricted && eps == Sign::Plus {
                continue;
            }
            let mut m = kind.min_quotient(eps);
            loop {
                let nv = match eps {
                    Sign::Plus => m * t.v + t.u,
                    Sign::Minus => m * t.v - t.u,
                };
                if nv > n {
                    break;
                }
                let s = slot(m, eps);
                children.push(Task {
                    u: t.v,
                    v: nv,
                    depth: t.depth + 1,
                    restricted: false,
                    costs: (0..nc).map(|j| t.costs[j] + tables.costs[j][s]).collect(),
                    phases: (0..np).map(|j| t.phases[j] * tables.phases[j][s]).collect(),
                });
                m += kind.quotient_step();
            }
        }
        children.reverse();
        pending.extend(children);
    }

    let run_shard = |k: usize| -> V {
        let mut vis = make();
        {
            let mut w = Walker {
                kind,
                n,
                tables: &tables,
                visitor: &mut vis,
                nc,
                np,
                cost_stack: Vec::new(),
                phase_stack: Vec::new(),
            };
            for t in tasks.iter().skip(k).step_by(shards) {
                w.run(t);
            }
        }
        vis
    };

    let threads = opts.threads.max(1);
    if threads == 1 {
        for k in 0..shards {
            upper.merge(run_shard(k));
        }
        return upper;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let ids: Vec<usize> = (0..shards).collect();
    for batch in ids.chunks(threads) {
        let done: Vec<V> = pool.install(|| batch.par_iter().map(|&k| run_shard(k)).collect());
        for v in done {
            upper.merge(v);
        }
    }
    upper
}
