//! From a selection of configurations to a relaxed matching, and from a
//! matching on the cluster hypergraph to an allocation.
//!
//! The induction runs from the top level `d` down to `0`. It keeps a
//! `(alpha_j, gamma)`-good assignment of `R_j` to the selected
//! configurations of class at least `j`. Each step first lifts the
//! assignment from `R_{j+1}` to `R_j` and then admits the selected
//! configurations of class exactly `j`. At level 0 the multiplicity `gamma`
//! is removed by one more flow, which can always keep `floor(c/gamma)` of
//! the `c` resources of each member.

use crate::clustering::ClusterDecomposition;
use crate::error::{contract, structural, Result};
use crate::flow::{good_assignment, lift_level, AssignmentNetwork, GoodAssignment};
use crate::lll::Selection;
use crate::model::{achieved_alpha, alpha_candidates, Configuration, GroupedHypergraph, RelaxedMatching, SantaInstance};
use crate::sampling::{ResourceHierarchy, SizeClasses};
use crate::scalar::{ceil_log2, floor_div, Scalar};
use crate::Rational;

/// `ceil(log2 ell)`, at least 1.
pub fn default_gamma(ell: usize) -> u64 {
    u64::from(ceil_log2(ell)).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructOptions {
    pub gamma: u64,
    /// Lifts routing less than this fraction of the target ask for a new
    /// hierarchy.
    pub sigma_floor: f64,
    /// Replace the induction's matching by the best one for the same
    /// selection.
    pub polish: bool,
}

impl ReconstructOptions {
    pub fn new(gamma: u64) -> Self {
        ReconstructOptions { gamma, sigma_floor: 0.0, polish: true }
    }
}

/// Bookkeeping of one induction step. `saturated` is the set `O` of
/// resources of `R_j` used `gamma` times; `mu_max` is the largest
/// `(2/gamma) sum_{K admitted} |K ∩ C ∩ R_j ∩ O|` over earlier members `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub family: usize,
    pub admitted: usize,
    pub sigma: f64,
    pub lift_fallback: bool,
    pub admission_halvings: usize,
    pub admission_fallback: bool,
    pub saturated: usize,
    pub mu_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub matching: RelaxedMatching,
    pub alpha_induction: Rational,
    pub levels: Vec<LevelRecord>,
}

fn resources_of(gh: &GroupedHypergraph, family: &[usize]) -> Vec<Vec<usize>> {
    family.iter().map(|&c| gh.configurations[c].resources.clone()).collect()
}

/// Runs the induction for the selection `sel` and returns a matching that
/// verifies on `gh` at the reported alpha.
pub fn reconstruct_matching(
    gh: &GroupedHypergraph,
    classes: &SizeClasses,
    hier: &ResourceHierarchy,
    sel: &Selection,
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    gh.validate()?;
    if sel.choice.len() != gh.groups.len() {
        return contract("selection does not match the groups");
    }
    if opts.gamma == 0 {
        return contract("gamma must be at least 1");
    }
    let gamma = opts.gamma;
    let k_of = sel.player_configs(gh);
    let mut family: Vec<usize> = Vec::new();
    let mut demands: Vec<u64> = Vec::new();
    let mut assignment = GoodAssignment { assigned: Vec::new(), gamma };
    let mut levels = Vec::new();
    let depth = hier.depth.min(classes.depth);
    for j in (0..=depth).rev() {
        let mut record = LevelRecord {
            level: j,
            family: family.len(),
            admitted: 0,
            sigma: 1.0,
            lift_fallback: false,
            admission_halvings: 0,
            admission_fallback: false,
            saturated: 0,
            mu_max: 0.0,
        };
        if j < depth && !family.is_empty() {
            let lifted = lift_level(&resources_of(gh, &family), hier, j, &demands, gamma, &assignment, opts.sigma_floor)?;
            record.sigma = lifted.sigma;
            record.lift_fallback = lifted.fallback;
            // The lifted demands are routable; admission below re-solves
            // them jointly with the new members.
            demands = lifted.demands;
        }
        let mask = hier.mask(j);
        let new: Vec<usize> = k_of.iter().copied().filter(|&c| classes.class_of[c].min(depth) == j).collect();
        record.admitted = new.len();
        let mut new_demand: Vec<u64> = new
            .iter()
            .map(|&c| {
                let x = hier.count_in(j, &gh.configurations[c].resources) as u64;
                if x == 0 { 0 } else { (x / 2).max(1) }
            })
            .collect();
        let joint: Vec<usize> = family.iter().chain(&new).copied().collect();
        let members = resources_of(gh, &joint);
        loop {
            let all: Vec<u64> = demands.iter().chain(&new_demand).copied().collect();
            if let Some(a) = good_assignment(&members, &mask, &all, gamma, 0.0) {
                assignment = a;
                demands = all;
                break;
            }
            if new_demand.iter().all(|&d| d <= 1) {
                let mut net = AssignmentNetwork::build(&members, &mask, &all, gamma);
                net.solve();
                assignment = net.assignment(gamma);
                demands = assignment.counts();
                record.admission_fallback = true;
                break;
            }
            record.admission_halvings += 1;
            for d in &mut new_demand {
                if *d > 1 {
                    *d /= 2;
                }
            }
        }
        let mut used = vec![0u64; gh.resources];
        for a in &assignment.assigned {
            for &r in a {
                used[r] += 1;
            }
        }
        let saturated: Vec<bool> = used.iter().map(|&u| u >= gamma).collect();
        record.saturated = saturated.iter().filter(|&&s| s).count();
        for &c in &family {
            let cres = &gh.configurations[c].resources;
            let hits: usize = new
                .iter()
                .map(|&k| {
                    gh.configurations[k]
                        .resources
                        .iter()
                        .filter(|&&r| mask[r] && saturated[r] && cres.binary_search(&r).is_ok())
                        .count()
                })
                .sum();
            record.mu_max = record.mu_max.max(2.0 * hits as f64 / gamma as f64);
        }
        family = joint;
        levels.push(record);
    }

    // Drop multiplicities: dividing the gamma-good flow by gamma is a
    // fractional 1-good flow, so the integral one keeps floor(c/gamma).
    let members = resources_of(gh, &family);
    let all = vec![true; gh.resources];
    let reduced: Vec<u64> = assignment.counts().iter().map(|&c| c / gamma).collect();
    let single = good_assignment(&members, &all, &reduced, 1, 0.0)
        .ok_or_else(|| crate::Error::Structural("dividing a good assignment by gamma failed".into()))?;

    let players = gh.player_count();
    let mut assigned = vec![Vec::new(); players];
    let pos: std::collections::HashMap<usize, usize> = family.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    for (p, &c) in k_of.iter().enumerate() {
        assigned[p] = single.assigned[pos[&c]].clone();
        assigned[p].sort_unstable();
    }
    let sizes: Vec<usize> = k_of.iter().map(|&c| gh.configurations[c].len()).collect();
    let counts: Vec<usize> = assigned.iter().map(Vec::len).collect();
    let alpha_induction = achieved_alpha(&sizes, &counts);
    let mut matching = RelaxedMatching { chosen: k_of.clone(), assigned, alpha: alpha_induction.clone() };
    if opts.polish {
        let configs: Vec<&Configuration> = k_of.iter().map(|&c| &gh.configurations[c]).collect();
        let (alpha, polished) = min_alpha_for_configs(&configs, gh.resources);
        if alpha < matching.alpha {
            matching.alpha = alpha;
            matching.assigned = polished;
        }
    }
    Ok(Reconstruction { matching, alpha_induction, levels })
}

/// Smallest alpha, and a witness, such that every configuration receives
/// `floor(|C|/alpha)` of its own resources with no resource shared.
pub fn min_alpha_for_configs(configs: &[&Configuration], resources: usize) -> (Rational, Vec<Vec<usize>>) {
    let members: Vec<Vec<usize>> = configs.iter().map(|c| c.resources.clone()).collect();
    let sizes: Vec<usize> = configs.iter().map(|c| c.len()).collect();
    let all = vec![true; resources];
    let candidates = alpha_candidates(&sizes);
    let try_alpha = |a: &Rational| -> Option<GoodAssignment> {
        let d: Vec<u64> = sizes.iter().map(|&s| floor_div(s, a) as u64).collect();
        good_assignment(&members, &all, &d, 1, 0.0)
    };
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = try_alpha(&candidates[hi]).expect("zero demands are routable");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match try_alpha(&candidates[mid]) {
            Some(a) => {
                hi = mid;
                best = a;
            }
            None => lo = mid + 1,
        }
    }
    if let Some(a) = try_alpha(&candidates[hi]) {
        best = a;
    }
    let mut assigned = best.assigned;
    for a in &mut assigned {
        a.sort_unstable();
    }
    let counts: Vec<usize> = assigned.iter().map(Vec::len).collect();
    (achieved_alpha(&sizes, &counts), assigned)
}

/// Largest configurations claim first and smaller ones steal afterwards, so
/// every resource ends with the smallest chosen configuration containing
/// it (ties to the larger player id).
pub fn greedy_steal_matching(configurations: &[Configuration], chosen: &[usize], resources: usize) -> RelaxedMatching {
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(configurations[chosen[p]].len()), p));
    let mut owner = vec![usize::MAX; resources];
    for &p in &order {
        for &r in &configurations[chosen[p]].resources {
            owner[r] = p;
        }
    }
    let mut assigned = vec![Vec::new(); chosen.len()];
    for (r, &p) in owner.iter().enumerate() {
        if p != usize::MAX {
            assigned[p].push(r);
        }
    }
    let sizes: Vec<usize> = chosen.iter().map(|&c| configurations[c].len()).collect();
    let counts: Vec<usize> = assigned.iter().map(Vec::len).collect();
    RelaxedMatching { chosen: chosen.to_vec(), assigned, alpha: achieved_alpha(&sizes, &counts) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<S> {
    pub sets: Vec<Vec<usize>>,
    /// `min_i f(S_i)` before the final top-up.
    pub core_value: S,
    pub value: S,
}

/// Builds an allocation from a matching on the cluster hypergraph, whose
/// configuration `c` is sample `c - offset(h)` of cluster `h`. The sampled
/// configuration's player represents its cluster and keeps the matched
/// thin resources; the cluster tree hands fat resources to the others; `Q`
/// keeps its fat resources. Leftover resources then go, most valuable
/// first, to whichever eligible player is currently worst off.
pub fn assemble_santa_solution<S: Scalar>(
    inst: &SantaInstance<S>,
    dec: &ClusterDecomposition<S>,
    wm: &RelaxedMatching,
) -> Result<Allocation<S>> {
    if wm.chosen.len() != dec.clusters.len() || dec.samples.len() != dec.clusters.len() {
        return contract("matching does not cover the clusters");
    }
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); inst.players];
    let mut offset = 0;
    for (h, cluster) in dec.clusters.iter().enumerate() {
        let k = wm.chosen[h]
            .checked_sub(offset)
            .filter(|&k| k < dec.samples[h].len())
            .ok_or_else(|| crate::Error::Contract(format!("cluster {h} chose a configuration of another cluster")))?;
        let rep = dec.samples[h][k].player;
        sets[rep].extend(&wm.assigned[h]);
        for (p, r) in cluster.fat_assignment(rep)? {
            sets[p].push(r);
        }
        offset += dec.samples[h].len();
    }
    for &(p, r) in &dec.fixed {
        sets[p].push(r);
    }
    let mut taken = vec![false; inst.resources];
    for (p, s) in sets.iter_mut().enumerate() {
        s.sort_unstable();
        for &r in s.iter() {
            if std::mem::replace(&mut taken[r], true) {
                return structural(format!("resource {r} is allocated twice"));
            }
            if inst.gamma[p].binary_search(&r).is_err() {
                return structural(format!("resource {r} is not available to player {p}"));
            }
        }
    }
    let core_value = inst.min_value(&sets);
    top_up(inst, &mut sets, &mut taken);
    let value = inst.min_value(&sets);
    Ok(Allocation { sets, core_value, value })
}

/// Hands each unallocated resource, in order of decreasing singleton value
/// (ties by id), to the eligible player of least current value.
pub fn top_up<S: Scalar>(inst: &SantaInstance<S>, sets: &mut [Vec<usize>], taken: &mut [bool]) {
    let mut evals: Vec<_> = sets
        .iter()
        .map(|s| {
            let mut ev = inst.valuation.evaluator();
            for &r in s {
                ev.add(r);
            }
            ev
        })
        .collect();
    let owners = inst.owners();
    let singles: Vec<S> = (0..inst.resources).map(|r| inst.valuation.singleton(r)).collect();
    let mut order: Vec<usize> = (0..inst.resources).filter(|&r| !taken[r]).collect();
    order.sort_by(|&a, &b| singles[b].partial_cmp(&singles[a]).expect("comparable").then(a.cmp(&b)));
    for r in order {
        let best = owners[r]
            .iter()
            .copied()
            .min_by(|&a, &b| evals[a].value().partial_cmp(evals[b].value()).expect("comparable").then(a.cmp(&b)));
        if let Some(p) = best {
            evals[p].add(r);
            sets[p].push(r);
            taken[r] = true;
        }
    }
    for s in sets.iter_mut() {
        s.sort_unstable();
    }
}
