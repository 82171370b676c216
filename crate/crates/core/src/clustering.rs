//! Fat/thin split, cluster forest and per-cluster configuration sampling.
//!
//! A resource is fat when `f({j}) >= T*/(100 alpha)`. Configurations that
//! contain a fat resource collapse to an edge between the player and its
//! smallest fat resource. Canceling cycles in the resulting bipartite graph
//! and pruning it leaves a forest whose trees have `|P| - 1` fat resources,
//! each of degree two. Such a tree can hand its fat resources to all of its
//! players but any single one, the representative, and carries thin LP mass
//! of at least one half.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::Rng;

use crate::configlp::FractionalSolution;
use crate::error::{contract, structural, Error, Result};
use crate::model::{Configuration, SantaInstance};
use crate::rng::RngSeed;
use crate::scalar::{approx_ge, ceil_log2, Scalar};
use crate::submodular::ValuationOracle;

#[derive(Debug, Clone, PartialEq)]
pub struct FatThinSplit<S> {
    pub threshold: S,
    pub fat: Vec<bool>,
}

impl<S: Scalar> FatThinSplit<S> {
    pub fn fat_ids(&self) -> Vec<usize> {
        (0..self.fat.len()).filter(|&j| self.fat[j]).collect()
    }

    pub fn thin_ids(&self) -> Vec<usize> {
        (0..self.fat.len()).filter(|&j| !self.fat[j]).collect()
    }
}

/// `j` is fat iff `f({j}) >= t_star / (100 alpha)`, compared in `S`.
pub fn split_fat_thin<S: Scalar>(inst: &SantaInstance<S>, t_star: &S, alpha: &S) -> Result<FatThinSplit<S>> {
    if *alpha < S::one() {
        return contract("fat threshold needs alpha >= 1");
    }
    let threshold = t_star.clone() / (S::from_usize(100) * alpha.clone());
    let fat = (0..inst.resources).map(|j| inst.valuation.singleton(j) >= threshold).collect();
    Ok(FatThinSplit { threshold, fat })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<S> {
    pub players: Vec<usize>,
    pub fat_resources: Vec<usize>,
    /// Tree edges `(player, fat resource)`.
    pub tree: Vec<(usize, usize)>,
    /// Thin columns of the cluster's players with their LP weight.
    pub thin_columns: Vec<(Configuration, S)>,
    pub thin_mass: S,
}

impl<S: Scalar> Cluster<S> {
    /// Roots the tree at `rep` and gives each fat resource to its child.
    pub fn fat_assignment(&self, rep: usize) -> Result<Vec<(usize, usize)>> {
        if !self.players.contains(&rep) {
            return contract(format!("player {rep} does not belong to this cluster"));
        }
        let mut player_adj: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut resource_adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(p, r) in &self.tree {
            player_adj.entry(p).or_default().push(r);
            resource_adj.entry(r).or_default().push(p);
        }
        let mut out = Vec::new();
        let mut seen_p = BTreeSet::from([rep]);
        let mut seen_r = BTreeSet::new();
        let mut queue = VecDeque::from([rep]);
        while let Some(p) = queue.pop_front() {
            for &r in player_adj.get(&p).map(Vec::as_slice).unwrap_or(&[]) {
                if !seen_r.insert(r) {
                    continue;
                }
                let children: Vec<usize> =
                    resource_adj[&r].iter().copied().filter(|c| !seen_p.contains(c)).collect();
                if children.len() != 1 {
                    return structural(format!("fat resource {r} does not have exactly one child"));
                }
                seen_p.insert(children[0]);
                out.push((children[0], r));
                queue.push_back(children[0]);
            }
        }
        if seen_p.len() != self.players.len() {
            return structural("cluster tree does not reach every player");
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDecomposition<S> {
    pub t_star: S,
    pub split: FatThinSplit<S>,
    pub clusters: Vec<Cluster<S>>,
    /// Players settled with a fat resource of their own, `(player, resource)`.
    pub fixed: Vec<(usize, usize)>,
    /// `ell` sampled thin configurations per cluster; `player` is the
    /// original player the configuration came from.
    pub samples: Vec<Vec<Configuration>>,
    /// Factor that brought the quartered mass of each cluster to exactly 2.
    pub sample_scale: Vec<S>,
    pub sample_attempts: usize,
}

struct Forest<S> {
    edges: BTreeMap<(usize, usize), S>,
    fixed: Vec<(usize, usize)>,
    settled: BTreeSet<usize>,
}

impl<S: Scalar> Forest<S> {
    fn player_edges(&self, p: usize) -> Vec<(usize, usize)> {
        self.edges.range((p, 0)..=(p, usize::MAX)).map(|(&k, _)| k).collect()
    }

    fn resource_edges(&self, r: usize) -> Vec<(usize, usize)> {
        self.edges.keys().copied().filter(|&(_, q)| q == r).collect()
    }

    fn settle_player(&mut self, p: usize, r: usize) {
        self.fixed.push((p, r));
        self.settled.insert(p);
        for e in self.player_edges(p) {
            self.edges.remove(&e);
        }
        for e in self.resource_edges(r) {
            self.edges.remove(&e);
        }
    }

    /// Drops vanished edges and settles saturated ones.
    fn normalize(&mut self) {
        let tol = S::tolerance();
        self.edges.retain(|_, x| *x > tol);
        while let Some((&(p, r), _)) = self.edges.iter().find(|(_, x)| approx_ge(*x, &S::one())) {
            self.settle_player(p, r);
        }
    }

    fn adjacency(&self) -> (HashMap<usize, Vec<usize>>, HashMap<usize, Vec<usize>>) {
        let mut pa: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut ra: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(p, r) in self.edges.keys() {
            pa.entry(p).or_default().push(r);
            ra.entry(r).or_default().push(p);
        }
        (pa, ra)
    }

    /// Edges of some cycle, in order, or `None` when the graph is a forest.
    fn find_cycle(&self) -> Option<Vec<(usize, usize)>> {
        let (pa, ra) = self.adjacency();
        // Nodes: players as (0, p), resources as (1, r).
        let mut parent: HashMap<(u8, usize), (u8, usize)> = HashMap::new();
        let mut depth: HashMap<(u8, usize), usize> = HashMap::new();
        let mut starts: Vec<usize> = pa.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            if depth.contains_key(&(0, s)) {
                continue;
            }
            depth.insert((0, s), 0);
            let mut stack = vec![(0u8, s)];
            while let Some(u) = stack.pop() {
                let nbrs: Vec<(u8, usize)> = if u.0 == 0 {
                    pa[&u.1].iter().map(|&r| (1, r)).collect()
                } else {
                    ra[&u.1].iter().map(|&p| (0, p)).collect()
                };
                for v in nbrs {
                    if parent.get(&u) == Some(&v) {
                        continue;
                    }
                    if depth.contains_key(&v) {
                        return Some(cycle_path(u, v, &parent, &depth));
                    }
                    depth.insert(v, depth[&u] + 1);
                    parent.insert(v, u);
                    stack.push(v);
                }
            }
        }
        None
    }
}

fn cycle_path(
    u: (u8, usize),
    v: (u8, usize),
    parent: &HashMap<(u8, usize), (u8, usize)>,
    depth: &HashMap<(u8, usize), usize>,
) -> Vec<(usize, usize)> {
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while a != b {
        if depth[&a] >= depth[&b] {
            a = parent[&a];
            left.push(a);
        } else {
            b = parent[&b];
            right.push(b);
        }
    }
    right.pop();
    right.reverse();
    let nodes: Vec<(u8, usize)> = left.into_iter().chain(right).collect();
    let edge = |x: (u8, usize), y: (u8, usize)| if x.0 == 0 { (x.1, y.1) } else { (y.1, x.1) };
    let mut out: Vec<(usize, usize)> = nodes.windows(2).map(|w| edge(w[0], w[1])).collect();
    out.push(edge(*nodes.last().unwrap(), nodes[0]));
    out
}

pub fn build_clusters<S: Scalar>(
    inst: &SantaInstance<S>,
    sol: &FractionalSolution<S>,
    split: &FatThinSplit<S>,
) -> Result<ClusterDecomposition<S>> {
    let v = sol.violation(inst.players, inst.resources);
    if v > 1e-6 {
        return contract(format!("fractional solution is infeasible by {v:e}"));
    }
    let mut forest = Forest { edges: BTreeMap::new(), fixed: Vec::new(), settled: BTreeSet::new() };
    let mut thin: Vec<Vec<(Configuration, S)>> = vec![Vec::new(); inst.players];
    for (c, x) in sol.columns.iter().zip(&sol.x) {
        if !x.strictly_positive() {
            continue;
        }
        match c.resources.iter().copied().find(|&r| split.fat[r]) {
            Some(r) => {
                let e = forest.edges.entry((c.player, r)).or_insert_with(S::zero);
                *e = e.clone() + x.clone();
            }
            None => thin[c.player].push((c.clone(), x.clone())),
        }
    }
    forest.normalize();

    while let Some(cycle) = forest.find_cycle() {
        let mut delta: Option<S> = None;
        for (k, e) in cycle.iter().enumerate() {
            let x = forest.edges[e].clone();
            let slack = if k % 2 == 0 { S::one() - x } else { x };
            if delta.as_ref().is_none_or(|d| slack < *d) {
                delta = Some(slack);
            }
        }
        let delta = delta.expect("cycles have edges");
        for (k, e) in cycle.iter().enumerate() {
            let x = forest.edges.get_mut(e).unwrap();
            *x = if k % 2 == 0 { x.clone() + delta.clone() } else { x.clone() - delta.clone() };
        }
        forest.normalize();
    }

    loop {
        let (_, ra) = forest.adjacency();
        let Some((&r, ps)) = ra.iter().filter(|(_, ps)| ps.len() == 1).min_by_key(|(&r, _)| r) else { break };
        forest.settle_player(ps[0], r);
    }

    prune_high_degree(&mut forest);

    let mut clusters = Vec::new();
    let (pa, ra) = forest.adjacency();
    let mut done = BTreeSet::new();
    for p in 0..inst.players {
        if forest.settled.contains(&p) || done.contains(&p) {
            continue;
        }
        let mut players = vec![p];
        let mut fat = BTreeSet::new();
        let mut queue = VecDeque::from([p]);
        done.insert(p);
        while let Some(u) = queue.pop_front() {
            for &r in pa.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if fat.insert(r) {
                    for &w in &ra[&r] {
                        if done.insert(w) {
                            players.push(w);
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        players.sort_unstable();
        let tree: Vec<(usize, usize)> =
            forest.edges.keys().copied().filter(|(q, _)| players.binary_search(q).is_ok()).collect();
        let thin_columns: Vec<(Configuration, S)> = players.iter().flat_map(|&q| thin[q].clone()).collect();
        let thin_mass = thin_columns.iter().fold(S::zero(), |a, (_, x)| a + x.clone());
        let cluster = Cluster { players, fat_resources: fat.into_iter().collect(), tree, thin_columns, thin_mass };
        if cluster.fat_resources.len() + 1 != cluster.players.len() {
            return structural("cluster tree does not have one fewer fat resource than players");
        }
        let half = S::one() / S::from_usize(2);
        if cluster.thin_mass.clone() + S::from_f64(1e-6) < half {
            return structural(format!("cluster thin mass {} is below one half", cluster.thin_mass));
        }
        clusters.push(cluster);
    }
    forest.fixed.sort_unstable();
    Ok(ClusterDecomposition {
        t_star: sol.threshold.clone(),
        split: split.clone(),
        clusters,
        fixed: forest.fixed,
        samples: Vec::new(),
        sample_scale: Vec::new(),
        sample_attempts: 0,
    })
}

/// While some fat resource has degree at least three, cuts the lightest
/// child edge below the deepest such resource. The detached subtree only
/// has degree-two resources, so every player loses at most one edge and
/// that edge carries at most one half.
fn prune_high_degree<S: Scalar>(forest: &mut Forest<S>) {
    loop {
        let (pa, ra) = forest.adjacency();
        if !ra.values().any(|ps| ps.len() >= 3) {
            return;
        }
        let mut roots: Vec<usize> = pa.keys().copied().collect();
        roots.sort_unstable();
        let mut seen_p = BTreeSet::new();
        let mut cut: Option<(usize, usize)> = None;
        for root in roots {
            if !seen_p.insert(root) {
                continue;
            }
            // BFS from the root: record each resource's parent player and depth.
            let mut order: Vec<(usize, usize, usize)> = Vec::new();
            let mut seen_r = BTreeSet::new();
            let mut queue = VecDeque::from([(root, 0usize)]);
            while let Some((p, d)) = queue.pop_front() {
                for &r in &pa[&p] {
                    if seen_r.insert(r) {
                        order.push((r, p, d + 1));
                        for &c in &ra[&r] {
                            if seen_p.insert(c) {
                                queue.push_back((c, d + 2));
                            }
                        }
                    }
                }
            }
            let deepest = order
                .iter()
                .filter(|(r, _, _)| ra[r].len() >= 3)
                .max_by_key(|&&(r, _, d)| (d, std::cmp::Reverse(r)));
            if let Some(&(r, parent, _)) = deepest {
                let mut kids: Vec<usize> = ra[&r].iter().copied().filter(|&c| c != parent).collect();
                kids.sort_unstable();
                let lightest = kids
                    .into_iter()
                    .min_by(|a, b| {
                        forest.edges[&(*a, r)].partial_cmp(&forest.edges[&(*b, r)]).expect("comparable")
                    })
                    .expect("a degree-3 resource has children");
                cut = Some((lightest, r));
                break;
            }
        }
        let e = cut.expect("some component holds the high-degree resource");
        forest.edges.remove(&e);
    }
}

/// Splits a thin configuration into four disjoint parts, each minimal with
/// value at least `t_star / 5`. Parts are grown greedily by marginal value
/// (ties to the smallest id) and then pruned.
pub fn split_into_quarters<S: Scalar>(
    oracle: &ValuationOracle<S>,
    cfg: &Configuration,
    t_star: &S,
) -> Result<[Configuration; 4]> {
    let need = t_star.clone() / S::from_usize(5);
    let mut remaining: Vec<usize> = cfg.resources.clone();
    let mut parts: Vec<Configuration> = Vec::with_capacity(4);
    for q in 0..4 {
        let mut ev = oracle.evaluator();
        let mut part = Vec::new();
        while *ev.value() < need {
            let best = remaining
                .iter()
                .enumerate()
                .map(|(k, &r)| (k, ev.gain(r)))
                .reduce(|a, b| if b.1 > a.1 { b } else { a });
            let Some((k, gain)) = best else {
                return structural(format!(
                    "part {q} of configuration {:?} cannot reach T*/5; a fat resource leaked in",
                    cfg.resources
                ));
            };
            if !gain.strictly_positive() {
                return structural(format!("part {q} stalls below T*/5"));
            }
            let r = remaining.remove(k);
            ev.add(r);
            part.push(r);
        }
        part.sort_unstable();
        let mut k = 0;
        while k < part.len() {
            let without: Vec<usize> = part.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &r)| r).collect();
            if oracle.eval(&without) >= need {
                remaining.push(part[k]);
                part = without;
            } else {
                k += 1;
            }
        }
        remaining.sort_unstable();
        parts.push(Configuration::new(cfg.player, part));
    }
    Ok(parts.try_into().expect("four parts"))
}

/// Largest allowed resource load and the draw bound, `12 ceil(log2 n)`.
pub fn min_sample_count(resources: usize) -> usize {
    12 * ceil_log2(resources.max(2)) as usize
}

/// Quarters every thin column, normalizes each cluster's mass to 2 and draws
/// `ell` configurations per cluster from the normalized distribution.
/// Redraws, up to 100 times, while some resource lies in more than `ell`
/// sampled configurations.
pub fn sample_cluster_configs<S: Scalar>(
    inst: &SantaInstance<S>,
    dec: &ClusterDecomposition<S>,
    ell: usize,
    seed: RngSeed,
) -> Result<ClusterDecomposition<S>> {
    if ell < min_sample_count(inst.resources) {
        return contract(format!(
            "sampling needs ell >= 12 ceil(log2 n) = {}",
            min_sample_count(inst.resources)
        ));
    }
    let mut dists: Vec<(Vec<Configuration>, Vec<f64>)> = Vec::new();
    let mut scales = Vec::new();
    let mut cache: HashMap<Configuration, [Configuration; 4]> = HashMap::new();
    for cl in &dec.clusters {
        let mut parts = Vec::new();
        let mut weights = Vec::new();
        for (c, x) in &cl.thin_columns {
            if !cache.contains_key(c) {
                cache.insert(c.clone(), split_into_quarters(&inst.valuation, c, &dec.t_star)?);
            }
            for q in &cache[c] {
                parts.push(q.clone());
                weights.push(x.clone());
            }
        }
        let mass = weights.iter().fold(S::zero(), |a, w| a + w.clone());
        if !mass.strictly_positive() {
            return structural("cluster has no thin mass to sample from");
        }
        scales.push(S::from_usize(2) / mass.clone());
        let probs = weights.iter().map(|w| (w.clone() / mass.clone()).to_f64()).collect();
        dists.push((parts, probs));
    }
    const MAX_TRIES: usize = 100;
    let mut last = String::new();
    for attempt in 0..MAX_TRIES {
        let mut rng = seed.derive(attempt as u64).rng();
        let mut load = vec![0usize; inst.resources];
        let mut samples = Vec::with_capacity(dists.len());
        for (parts, probs) in &dists {
            let mut drawn = Vec::with_capacity(ell);
            for _ in 0..ell {
                let k = draw(probs, rng.gen::<f64>());
                for &r in &parts[k].resources {
                    load[r] += 1;
                }
                drawn.push(parts[k].clone());
            }
            samples.push(drawn);
        }
        match load.iter().enumerate().max_by_key(|&(r, &l)| (l, std::cmp::Reverse(r))) {
            Some((r, &l)) if l > ell => {
                last = format!("resource {r} lies in {l} > {ell} sampled configurations");
                log::debug!("sampling attempt {attempt} rejected: {last}");
            }
            _ => {
                let mut out = dec.clone();
                out.samples = samples;
                out.sample_scale = scales;
                out.sample_attempts = attempt + 1;
                return Ok(out);
            }
        }
    }
    Err(Error::RetryExceeded { tries: MAX_TRIES, detail: last })
}

fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn fat_threshold_is_inclusive() {
        let inst = SantaInstance::new(
            1,
            2,
            vec![vec![0, 1]],
            ValuationOracle::Linear { values: vec![q(10, 1), q(1, 100)] },
        )
        .unwrap();
        let split = split_fat_thin(&inst, &q(10, 1), &q(10, 1)).unwrap();
        assert_eq!(split.fat_ids(), vec![0, 1]);
        let split = split_fat_thin(&inst, &q(10, 1), &q(1, 1)).unwrap();
        assert_eq!(split.fat_ids(), vec![0]);
    }

    /// Three players share two fat resources half-and-half in a path. The
    /// outer players each hold a thin column of 120 unit resources at 1/2,
    /// with `T* = 150` so units stay thin and every column quarters.
    fn path_instance() -> (SantaInstance<Rational>, FractionalSolution<Rational>, FatThinSplit<Rational>) {
        let mut values = vec![q(200, 1), q(200, 1)];
        values.extend((0..240).map(|_| q(1, 1)));
        let left: Vec<usize> = (2..122).collect();
        let right: Vec<usize> = (122..242).collect();
        let gamma = vec![
            [vec![0], left.clone()].concat(),
            vec![0, 1],
            [vec![1], right.clone()].concat(),
        ];
        let inst = SantaInstance::new(3, 242, gamma, ValuationOracle::Linear { values }).unwrap();
        let half = q(1, 2);
        let sol = FractionalSolution {
            target: q(150, 1),
            threshold: q(150, 1),
            columns: vec![
                Configuration::new(0, vec![0]),
                Configuration::new(0, left),
                Configuration::new(1, vec![0]),
                Configuration::new(1, vec![1]),
                Configuration::new(2, vec![1]),
                Configuration::new(2, right),
            ],
            x: vec![half.clone(), half.clone(), half.clone(), half.clone(), half.clone(), half],
        };
        let split = split_fat_thin(&inst, &q(150, 1), &q(1, 1)).unwrap();
        (inst, sol, split)
    }

    #[test]
    fn path_forms_one_cluster_with_any_representative() {
        let (inst, sol, split) = path_instance();
        assert_eq!(split.fat_ids(), vec![0, 1]);
        let dec = build_clusters(&inst, &sol, &split).unwrap();
        assert_eq!(dec.clusters.len(), 1);
        let cl = &dec.clusters[0];
        assert_eq!(cl.players, vec![0, 1, 2]);
        assert_eq!(cl.thin_mass, q(1, 1));
        for rep in 0..3 {
            let a = cl.fat_assignment(rep).unwrap();
            assert_eq!(a.len(), 2);
            assert!(a.iter().all(|&(p, _)| p != rep));
        }
    }

    #[test]
    fn cycle_is_canceled() {
        // Two players both split across two fat resources: a 4-cycle.
        let inst = SantaInstance::new(
            2,
            2,
            vec![vec![0, 1], vec![0, 1]],
            ValuationOracle::Linear { values: vec![q(5, 1), q(5, 1)] },
        )
        .unwrap();
        let h = q(1, 2);
        let sol = FractionalSolution {
            target: q(5, 1),
            threshold: q(5, 1),
            columns: vec![
                Configuration::new(0, vec![0]),
                Configuration::new(0, vec![1]),
                Configuration::new(1, vec![0]),
                Configuration::new(1, vec![1]),
            ],
            x: vec![h.clone(), h.clone(), h.clone(), h],
        };
        let split = split_fat_thin(&inst, &q(5, 1), &q(1, 1)).unwrap();
        let dec = build_clusters(&inst, &sol, &split).unwrap();
        assert!(dec.clusters.is_empty());
        assert_eq!(dec.fixed.len(), 2);
        let rs: BTreeSet<usize> = dec.fixed.iter().map(|&(_, r)| r).collect();
        assert_eq!(rs.len(), 2);
    }

    #[test]
    fn quarters_are_minimal_and_disjoint() {
        let f: ValuationOracle<Rational> = ValuationOracle::Linear { values: vec![q(1, 1); 20] };
        let cfg = Configuration::new(0, (0..20).collect());
        let parts = split_into_quarters(&f, &cfg, &q(20, 1)).unwrap();
        let mut all = BTreeSet::new();
        for p in &parts {
            assert_eq!(p.len(), 4);
            assert!(p.resources.iter().all(|&r| all.insert(r)));
        }
    }

    #[test]
    fn quarters_fail_when_value_is_concentrated() {
        let mut values = vec![q(0, 1); 5];
        values[0] = q(10, 1);
        let f: ValuationOracle<Rational> = ValuationOracle::Linear { values };
        let cfg = Configuration::new(0, (0..5).collect());
        assert!(split_into_quarters(&f, &cfg, &q(10, 1)).is_err());
    }

    #[test]
    fn sampling_respects_load_bound_and_seed() {
        let (inst, sol, split) = path_instance();
        let dec = build_clusters(&inst, &sol, &split).unwrap();
        // Thin columns are worth 2 but T* = 2 lets each part be a single resource.
        let ell = min_sample_count(inst.resources);
        let a = sample_cluster_configs(&inst, &dec, ell, RngSeed(3));
        let b = sample_cluster_configs(&inst, &dec, ell, RngSeed(3));
        assert_eq!(a, b);
        let a = a.unwrap();
        assert_eq!(a.samples.len(), 1);
        assert_eq!(a.samples[0].len(), ell);
        assert_eq!(a.sample_scale[0], q(1, 2));
        let mut load = vec![0usize; inst.resources];
        for c in &a.samples[0] {
            assert!(inst.valuation.eval(&c.resources) >= q(30, 1));
            assert!(c.resources.iter().all(|&r| inst.gamma[c.player].contains(&r)));
            for &r in &c.resources {
                load[r] += 1;
            }
        }
        assert!(load.iter().all(|&l| l <= ell));
        assert!(sample_cluster_configs(&inst, &dec, 2, RngSeed(3)).is_err());
    }
}
