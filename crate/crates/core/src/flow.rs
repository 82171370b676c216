//! Integral max-flow on assignment networks.
//!
//! The network `N(F, R', alpha, gamma)` has a source arc of capacity
//! `alpha(C)` into every configuration `C` of the family `F`, unit arcs from
//! `C` to each of its resources in `R'`, and an arc of capacity `gamma` from
//! every resource into the sink. An integral flow is an assignment in which
//! `C` receives its flow value and no resource is used more than `gamma`
//! times.

use std::collections::VecDeque;

use crate::error::{contract, Error, Result};
use crate::sampling::ResourceHierarchy;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
}

/// Dinic's algorithm on an adjacency list with paired residual arcs.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    original: Vec<i64>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph { arcs: Vec::new(), adj: vec![Vec::new(); nodes], original: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Returns the arc id; its reverse is `id ^ 1`.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0 });
        self.original.push(cap);
        self.original.push(0);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, arc: usize) -> i64 {
        self.original[arc] - self.arcs[arc].cap
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.arcs[a].to;
                    if self.arcs[a].cap > 0 && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, limit: i64, level: &[usize], next: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let a = self.adj[u][next[u]];
            let v = self.arcs[a].to;
            if self.arcs[a].cap > 0 && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.arcs[a].cap), level, next);
                if pushed > 0 {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Nodes reachable from `s` in the residual graph: the source side of a
    /// minimum cut after [`FlowGraph::max_flow`].
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.arcs[a].to;
                if self.arcs[a].cap > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Sum of original capacities of arcs leaving the marked side.
    pub fn cut_capacity(&self, side: &[bool]) -> i64 {
        (0..self.arcs.len())
            .step_by(2)
            .filter(|&a| side[self.arcs[a ^ 1].to] && !side[self.arcs[a].to])
            .map(|a| self.original[a])
            .sum()
    }
}

/// Resources received by each family member; a resource may repeat across
/// members up to `gamma` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodAssignment {
    pub assigned: Vec<Vec<usize>>,
    pub gamma: u64,
}

impl GoodAssignment {
    pub fn counts(&self) -> Vec<u64> {
        self.assigned.iter().map(|a| a.len() as u64).collect()
    }

    /// Checks that member `i` holds at least `demand[i]` distinct resources
    /// of `family[i]` inside `allowed`, and that multiplicities respect gamma.
    pub fn is_good_for(&self, family: &[Vec<usize>], allowed: &[bool], demand: &[u64]) -> bool {
        if self.assigned.len() != family.len() {
            return false;
        }
        let mut used = std::collections::HashMap::new();
        for ((a, c), &d) in self.assigned.iter().zip(family).zip(demand) {
            let mut sorted = a.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) || (sorted.len() as u64) < d {
                return false;
            }
            for &r in &sorted {
                if !allowed[r] || c.binary_search(&r).is_err() {
                    return false;
                }
                *used.entry(r).or_insert(0u64) += 1;
            }
        }
        used.values().all(|&m| m <= self.gamma)
    }
}

/// The assignment network with its arc ids, ready for max-flow.
pub struct AssignmentNetwork {
    pub graph: FlowGraph,
    pub source: usize,
    pub sink: usize,
    member_arcs: Vec<Vec<(usize, usize)>>,
}

impl AssignmentNetwork {
    /// Resources outside `allowed` are left out.
    pub fn build(family: &[Vec<usize>], allowed: &[bool], caps: &[u64], gamma: u64) -> Self {
        let mut graph = FlowGraph::new(2);
        let (source, sink) = (0, 1);
        let mut node_of = std::collections::HashMap::new();
        let mut member_arcs = Vec::with_capacity(family.len());
        for (c, members) in family.iter().enumerate() {
            let cn = graph.add_node();
            graph.add_arc(source, cn, caps[c] as i64);
            let mut arcs = Vec::new();
            for &r in members.iter().filter(|&&r| allowed[r]) {
                let rn = *node_of.entry(r).or_insert_with(|| {
                    let rn = graph.add_node();
                    graph.add_arc(rn, sink, gamma as i64);
                    rn
                });
                arcs.push((graph.add_arc(cn, rn, 1), r));
            }
            member_arcs.push(arcs);
        }
        AssignmentNetwork { graph, source, sink, member_arcs }
    }

    pub fn solve(&mut self) -> i64 {
        self.graph.max_flow(self.source, self.sink)
    }

    pub fn assignment(&self, gamma: u64) -> GoodAssignment {
        let assigned = self
            .member_arcs
            .iter()
            .map(|arcs| arcs.iter().filter(|(a, _)| self.graph.flow_on(*a) > 0).map(|&(_, r)| r).collect())
            .collect();
        GoodAssignment { assigned, gamma }
    }
}

/// Max-flow value of `N(F, R', caps, gamma)`.
pub fn network_flow(family: &[Vec<usize>], allowed: &[bool], caps: &[u64], gamma: u64) -> i64 {
    AssignmentNetwork::build(family, allowed, caps, gamma).solve()
}

/// `floor((1 - eps) a)`.
pub fn shrink(a: u64, epsilon: f64) -> u64 {
    if epsilon <= 0.0 {
        a
    } else {
        ((1.0 - epsilon) * a as f64 + 1e-9).floor().max(0.0) as u64
    }
}

/// An assignment giving every `C` at least `floor((1-eps) alpha(C))` of its
/// resources in `R'`, each resource used at most `gamma` times, or `None`
/// when the full network cannot route that much.
pub fn good_assignment(
    family: &[Vec<usize>],
    allowed: &[bool],
    alpha: &[u64],
    gamma: u64,
    epsilon: f64,
) -> Option<GoodAssignment> {
    let demand: Vec<u64> = alpha.iter().map(|&a| shrink(a, epsilon)).collect();
    let mut net = AssignmentNetwork::build(family, allowed, &demand, gamma);
    let need: u64 = demand.iter().sum();
    (net.solve() as u64 == need).then(|| net.assignment(gamma))
}

/// Same question answered with lower bounds: arcs `s -> C` carry flow in
/// `[lower(C), |C|]`, and a circulation through `t -> s` exists exactly when
/// every member can receive its lower bound. Used as an independent route to
/// the answer of [`good_assignment`].
pub fn feasible_with_lower_bounds(
    family: &[Vec<usize>],
    allowed: &[bool],
    lower: &[u64],
    gamma: u64,
) -> Option<GoodAssignment> {
    let mut g = FlowGraph::new(4);
    let (s, t, ss, tt) = (0, 1, 2, 3);
    let mut node_of = std::collections::HashMap::new();
    let mut member_arcs = Vec::new();
    let mut need = 0i64;
    for (c, members) in family.iter().enumerate() {
        let cn = g.add_node();
        let upper = members.iter().filter(|&&r| allowed[r]).count() as i64;
        let lo = lower[c] as i64;
        if lo > upper {
            return None;
        }
        g.add_arc(s, cn, upper - lo);
        g.add_arc(ss, cn, lo);
        g.add_arc(s, tt, lo);
        need += lo;
        let mut arcs = Vec::new();
        for &r in members.iter().filter(|&&r| allowed[r]) {
            let rn = *node_of.entry(r).or_insert_with(|| {
                let rn = g.add_node();
                g.add_arc(rn, t, gamma as i64);
                rn
            });
            arcs.push((g.add_arc(cn, rn, 1), r));
        }
        member_arcs.push(arcs);
    }
    g.add_arc(t, s, i64::MAX / 4);
    if g.max_flow(ss, tt) != need {
        return None;
    }
    let assigned = member_arcs
        .iter()
        .map(|arcs| arcs.iter().filter(|(a, _)| g.flow_on(*a) > 0).map(|&(_, r)| r).collect())
        .collect();
    Some(GoodAssignment { assigned, gamma })
}

/// Result of lifting an assignment from `R_{k+1}` down to `R_k`.
#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub assignment: GoodAssignment,
    /// Demands actually met, per family member.
    pub demands: Vec<u64>,
    /// Fraction of `ell * alpha` that was routed uniformly.
    pub sigma: f64,
    /// True when the `(1 - eps)` target failed and `sigma` was searched.
    pub fallback: bool,
}

/// Lifts an `(alpha, gamma)`-good assignment over `R_{k+1}` to one over
/// `R_k` with demands `floor((1 - eps) ell alpha(C))`, `eps = 1/log2 n`.
/// When the flow falls short, the largest uniform scale `sigma` with
/// demands `floor(sigma ell alpha(C))` is found by bisection; a scale below
/// `sigma_floor` asks the caller to redraw the hierarchy.
pub fn lift_level(
    family: &[Vec<usize>],
    hier: &ResourceHierarchy,
    k: usize,
    alpha: &[u64],
    gamma: u64,
    prev: &GoodAssignment,
    sigma_floor: f64,
) -> Result<LiftOutcome> {
    if k >= hier.depth {
        return contract(format!("cannot lift onto level {k} of a hierarchy with depth {}", hier.depth));
    }
    let upper = hier.mask(k + 1);
    if !prev.is_good_for(family, &upper, alpha) || prev.gamma > gamma {
        return contract("previous assignment is not good on the level above");
    }
    let lower = hier.mask(k);
    let ell = hier.ell as u64;
    let target: Vec<u64> = alpha.iter().map(|&a| a * ell).collect();
    let eps = lift_epsilon(hier.level_of.len());
    if let Some(assignment) = good_assignment(family, &lower, &target, gamma, eps) {
        let demands = target.iter().map(|&a| shrink(a, eps)).collect();
        return Ok(LiftOutcome { assignment, demands, sigma: 1.0 - eps, fallback: false });
    }
    let scaled = |sigma: f64| -> Vec<u64> {
        target.iter().map(|&a| (sigma * a as f64 + 1e-9).floor() as u64).collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0 - eps);
    let mut best = good_assignment(family, &lower, &scaled(0.0), gamma, 0.0)
        .expect("zero demands are always routable");
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match good_assignment(family, &lower, &scaled(mid), gamma, 0.0) {
            Some(a) => {
                lo = mid;
                best = a;
            }
            None => hi = mid,
        }
    }
    if lo < sigma_floor {
        return Err(Error::ResampleNeeded(format!(
            "lift onto level {k} routed only sigma = {lo:.4} of the target"
        )));
    }
    Ok(LiftOutcome { assignment: best, demands: scaled(lo), sigma: lo, fallback: true })
}

/// `1 / log2 n`, capped at 1/2.
pub fn lift_epsilon(n: usize) -> f64 {
    let l = (n.max(2) as f64).log2();
    (1.0 / l).min(0.5)
}

/// `maxflow N(F, R_k, ell alpha, gamma) / maxflow N(F, R_{k+1}, alpha, gamma)`.
pub fn lift_ratio(family: &[Vec<usize>], hier: &ResourceHierarchy, k: usize, alpha: &[u64], gamma: u64) -> f64 {
    let ell = hier.ell as u64;
    let big: Vec<u64> = alpha.iter().map(|&a| a * ell).collect();
    let top = network_flow(family, &hier.mask(k), &big, gamma) as f64;
    let bottom = network_flow(family, &hier.mask(k + 1), alpha, gamma) as f64;
    if bottom == 0.0 {
        f64::INFINITY
    } else {
        top / bottom
    }
}
