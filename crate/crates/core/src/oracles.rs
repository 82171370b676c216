//! Exhaustive ground truth for small inputs.

use crate::error::{contract, Error, Result};
use crate::model::{
    achieved_alpha_weighted, Configuration, GroupedHypergraph, RelaxedMatching, SantaInstance, WeightedHypergraph,
};
use crate::scalar::{floor_div, Scalar};
use crate::submodular::Evaluator;
use crate::Rational;

/// Leaf budget of [`exact_santa_opt`]: the product of owner counts.
pub const SANTA_BUDGET: f64 = 1e7;
/// Selection budget of the min-alpha oracles.
pub const ALPHA_BUDGET: u128 = 100_000;
/// Leaf budget of the weighted min-alpha oracle.
pub const WEIGHTED_BUDGET: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SantaOptimum<S> {
    pub value: S,
    pub sets: Vec<Vec<usize>>,
}

/// Best `min_i f(S_i)` over all allocations. Valuations are monotone, so
/// every resource with an owner may be given to one; the search visits
/// every such allocation.
pub fn exact_santa_opt<S: Scalar>(inst: &SantaInstance<S>) -> Result<SantaOptimum<S>> {
    let owners = inst.owners();
    let leaves: f64 = owners.iter().map(|o| o.len().max(1) as f64).product();
    if leaves > SANTA_BUDGET {
        return Err(Error::Budget(format!(
            "{} players and {} resources give {leaves:.3e} allocations, above {SANTA_BUDGET:.0e}",
            inst.players, inst.resources
        )));
    }
    if inst.players == 0 {
        return contract("instance has no players");
    }
    let active: Vec<usize> = (0..inst.resources).filter(|&r| !owners[r].is_empty()).collect();
    let mut evals: Vec<Evaluator<'_, S>> = (0..inst.players).map(|_| inst.valuation.evaluator()).collect();
    let mut choice = vec![0usize; active.len()];
    let mut best: Option<(S, Vec<usize>)> = None;
    search(&active, &owners, 0, &mut evals, &mut choice, &mut best);
    let (value, choice) = best.expect("at least one allocation exists");
    let mut sets = vec![Vec::new(); inst.players];
    for (k, &r) in active.iter().enumerate() {
        sets[choice[k]].push(r);
    }
    Ok(SantaOptimum { value, sets })
}

fn search<'a, S: Scalar>(
    active: &[usize],
    owners: &[Vec<usize>],
    k: usize,
    evals: &mut Vec<Evaluator<'a, S>>,
    choice: &mut Vec<usize>,
    best: &mut Option<(S, Vec<usize>)>,
) {
    if k == active.len() {
        let value = evals.iter().map(|e| e.value().clone()).reduce(|a, b| if b < a { b } else { a }).expect("players");
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            *best = Some((value, choice.clone()));
        }
        return;
    }
    let r = active[k];
    for &p in &owners[r] {
        let saved = evals[p].clone();
        evals[p].add(r);
        choice[k] = p;
        search(active, owners, k + 1, evals, choice, best);
        evals[p] = saved;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinAlpha {
    pub alpha: Rational,
    pub matching: RelaxedMatching,
    /// Selections examined after merging.
    pub combinations: u128,
}

/// A group of one player whose configurations all have at most one
/// resource. If one is empty the player never needs anything; otherwise
/// it needs one resource from the union exactly when `alpha = 1`.
fn flexible_union(gh: &GroupedHypergraph, g: usize) -> Option<Option<Vec<usize>>> {
    let group = &gh.groups[g];
    if group.players.len() != 1 {
        return None;
    }
    let cfgs: Vec<&Configuration> = group.consistent_sets.iter().map(|s| &gh.configurations[s[0]]).collect();
    if cfgs.iter().any(|c| c.len() > 1) {
        return None;
    }
    if cfgs.iter().any(|c| c.is_empty()) {
        return Some(None);
    }
    let mut union: Vec<usize> = cfgs.iter().map(|c| c.resources[0]).collect();
    union.sort_unstable();
    union.dedup();
    Some(Some(union))
}

/// Smallest alpha over all consistent selections, each solved exactly with
/// max-flow at the breakpoints of `floor(|C|/alpha)`.
pub fn exact_min_alpha_grouped(gh: &GroupedHypergraph) -> Result<MinAlpha> {
    gh.validate()?;
    if let Some(g) = gh.groups.iter().position(|g| g.consistent_sets.is_empty()) {
        return contract(format!("group {g} has no consistent set"));
    }
    let flexible: Vec<Option<Option<Vec<usize>>>> = (0..gh.groups.len()).map(|g| flexible_union(gh, g)).collect();
    let branching: Vec<usize> = (0..gh.groups.len()).filter(|&g| flexible[g].is_none()).collect();
    let combos = branching
        .iter()
        .fold(1u128, |a, &g| a.saturating_mul(gh.groups[g].consistent_sets.len() as u128));
    if combos > ALPHA_BUDGET {
        return Err(Error::Budget(format!("{combos} selections exceed the budget of {ALPHA_BUDGET}")));
    }
    let players = gh.player_count();
    let mut pick = vec![0usize; branching.len()];
    let mut best: Option<(Rational, Vec<usize>, Vec<Vec<usize>>)> = None;
    loop {
        // Members: players of branching groups, then flexible players.
        let mut owners: Vec<usize> = Vec::new();
        let mut configs: Vec<Configuration> = Vec::new();
        let mut chosen = vec![usize::MAX; players];
        for (b, &g) in branching.iter().enumerate() {
            let set = &gh.groups[g].consistent_sets[pick[b]];
            for (k, &p) in gh.groups[g].players.iter().enumerate() {
                chosen[p] = set[k];
                owners.push(p);
                configs.push(gh.configurations[set[k]].clone());
            }
        }
        for (g, f) in flexible.iter().enumerate() {
            let p = gh.groups[g].players[0];
            match f {
                Some(Some(union)) => {
                    owners.push(p);
                    configs.push(Configuration { player: p, resources: union.clone() });
                }
                Some(None) => {
                    let s = gh.groups[g].consistent_sets.iter().find(|s| gh.configurations[s[0]].is_empty()).unwrap();
                    chosen[p] = s[0];
                }
                None => {}
            }
        }
        let flex_from = branching.iter().map(|&g| gh.groups[g].players.len()).sum::<usize>();
        let improves = |alpha: &Rational| best.as_ref().is_none_or(|(b, _, _)| alpha < b);
        let refs: Vec<&Configuration> = configs.iter().collect();
        let sizes: Vec<usize> =
            refs.iter().enumerate().map(|(i, c)| if i >= flex_from { 1 } else { c.len() }).collect();
        let candidates: Vec<Rational> =
            crate::model::alpha_candidates(&sizes).into_iter().filter(|a| improves(a)).collect();
        if let Some(top) = candidates.last() {
            if feasible(&refs, &sizes, gh.resources, top).is_some() {
                let (mut lo, mut hi) = (0, candidates.len() - 1);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if feasible(&refs, &sizes, gh.resources, &candidates[mid]).is_some() {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                let alpha = candidates[hi].clone();
                let witness = feasible(&refs, &sizes, gh.resources, &alpha).expect("feasible at the found alpha");
                let mut assigned = vec![Vec::new(); players];
                for (i, got) in witness.into_iter().enumerate() {
                    let p = owners[i];
                    if i >= flex_from {
                        // Pick the option that holds the received resource.
                        let g = gh.membership()[p].0;
                        let sets = &gh.groups[g].consistent_sets;
                        let s = match got.first() {
                            Some(&r) => sets.iter().find(|s| gh.configurations[s[0]].resources == [r]).unwrap(),
                            None => &sets[0],
                        };
                        chosen[p] = s[0];
                    }
                    assigned[p] = got;
                }
                best = Some((alpha, chosen, assigned));
            }
        }
        let mut b = 0;
        while b < branching.len() {
            pick[b] += 1;
            if pick[b] < gh.groups[branching[b]].consistent_sets.len() {
                break;
            }
            pick[b] = 0;
            b += 1;
        }
        if b == branching.len() {
            break;
        }
    }
    let (alpha, chosen, assigned) = best.expect("some selection is feasible at max + 1");
    Ok(MinAlpha { matching: RelaxedMatching { chosen, assigned, alpha: alpha.clone() }, alpha, combinations: combos })
}

fn feasible(configs: &[&Configuration], sizes: &[usize], resources: usize, alpha: &Rational) -> Option<Vec<Vec<usize>>> {
    let members: Vec<Vec<usize>> = configs.iter().map(|c| c.resources.clone()).collect();
    let demand: Vec<u64> = sizes.iter().map(|&s| floor_div(s, alpha) as u64).collect();
    let all = vec![true; resources];
    crate::flow::feasible_with_lower_bounds(&members, &all, &demand, 1).map(|a| {
        a.assigned
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect()
    })
}

/// Smallest weighted alpha over all selections and all allocations of
/// resources among the selected configurations, or `None` when every
/// choice leaves some player with no weight.
pub fn exact_min_alpha_weighted<S: Scalar>(h: &WeightedHypergraph<S>) -> Result<Option<MinAlpha>> {
    h.validate()?;
    let per_player: Vec<Vec<usize>> = (0..h.players).map(|p| h.configs_of(p)).collect();
    if let Some(p) = per_player.iter().position(Vec::is_empty) {
        return contract(format!("player {p} has no configuration"));
    }
    let combos = per_player.iter().fold(1u128, |a, c| a.saturating_mul(c.len() as u128));
    if combos > ALPHA_BUDGET {
        return Err(Error::Budget(format!("{combos} selections exceed the budget of {ALPHA_BUDGET}")));
    }
    let mut pick = vec![0usize; h.players];
    let mut best: Option<MinAlpha> = None;
    let mut leaves = 0f64;
    loop {
        let chosen: Vec<usize> = (0..h.players).map(|p| per_player[p][pick[p]]).collect();
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); h.resources];
        for (p, &c) in chosen.iter().enumerate() {
            for &r in &h.configurations[c].resources {
                holders[r].push(p);
            }
        }
        let contested: Vec<usize> = (0..h.resources).filter(|&r| !holders[r].is_empty()).collect();
        leaves += contested.iter().map(|&r| holders[r].len() as f64).product::<f64>();
        if leaves > WEIGHTED_BUDGET {
            return Err(Error::Budget(format!("more than {WEIGHTED_BUDGET:.0e} weighted allocations")));
        }
        let mut owner = vec![0usize; contested.len()];
        loop {
            let mut assigned = vec![Vec::new(); h.players];
            for (k, &r) in contested.iter().enumerate() {
                assigned[holders[r][owner[k]]].push(r);
            }
            if let Some(alpha) = achieved_alpha_weighted(h, &chosen, &assigned) {
                if best.as_ref().is_none_or(|b| alpha < b.alpha) {
                    best = Some(MinAlpha {
                        matching: RelaxedMatching { chosen: chosen.clone(), assigned, alpha: alpha.clone() },
                        alpha,
                        combinations: combos,
                    });
                }
            }
            let mut k = 0;
            while k < contested.len() {
                owner[k] += 1;
                if owner[k] < holders[contested[k]].len() {
                    break;
                }
                owner[k] = 0;
                k += 1;
            }
            if k == contested.len() {
                break;
            }
        }
        let mut p = 0;
        while p < h.players {
            pick[p] += 1;
            if pick[p] < per_player[p].len() {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
        if p == h.players {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_relaxed_matching, Group};
    use crate::submodular::ValuationOracle;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn two_private_resources() {
        let inst = SantaInstance::new(
            2,
            2,
            vec![vec![0], vec![1]],
            ValuationOracle::Linear { values: vec![q(3, 1), q(4, 1)] },
        )
        .unwrap();
        let opt = exact_santa_opt(&inst).unwrap();
        assert_eq!(opt.value, q(3, 1));
        assert_eq!(opt.sets, vec![vec![0], vec![1]]);
    }

    #[test]
    fn santa_budget_refuses() {
        let n = 30;
        let inst = SantaInstance::new(
            3,
            n,
            vec![(0..n).collect(); 3],
            ValuationOracle::Linear { values: vec![q(1, 1); n] },
        )
        .unwrap();
        assert!(matches!(exact_santa_opt(&inst), Err(Error::Budget(_))));
    }

    #[test]
    fn forced_single_resource() {
        let gh = GroupedHypergraph::from_plain(
            2,
            1,
            vec![Configuration::new(0, vec![0]), Configuration::new(1, vec![0])],
        );
        let m = exact_min_alpha_grouped(&gh).unwrap();
        assert_eq!(m.alpha, q(2, 1));
        assert!(verify_relaxed_matching(&gh, &m.matching).unwrap().is_valid());
    }

    #[test]
    fn grouped_selection_matters() {
        // Group 0 picks between {0,1}+{2} and {3,4}+{5}; player 2 wants {0,1,2}.
        let gh = GroupedHypergraph {
            resources: 6,
            ell: 2,
            groups: vec![
                Group { players: vec![0, 1], consistent_sets: vec![vec![0, 1], vec![2, 3]] },
                Group { players: vec![2], consistent_sets: vec![vec![4], vec![5]] },
            ],
            configurations: vec![
                Configuration::new(0, vec![0, 1]),
                Configuration::new(1, vec![2]),
                Configuration::new(0, vec![3, 4]),
                Configuration::new(1, vec![5]),
                Configuration::new(2, vec![0, 1, 2]),
                Configuration::new(2, vec![0, 1, 2]),
            ],
        };
        let m = exact_min_alpha_grouped(&gh).unwrap();
        assert_eq!(m.alpha, q(1, 1));
        assert_eq!(m.matching.chosen[..2], [2, 3]);
        assert!(verify_relaxed_matching(&gh, &m.matching).unwrap().is_valid());
    }

    #[test]
    fn flexible_players_are_merged() {
        // Player 1 may take resource 0 or 1; player 0 needs resource 0.
        let gh = GroupedHypergraph::from_plain(
            2,
            2,
            vec![Configuration::new(0, vec![0]), Configuration::new(1, vec![0]), Configuration::new(1, vec![1])],
        );
        let m = exact_min_alpha_grouped(&gh).unwrap();
        assert_eq!(m.alpha, q(1, 1));
        assert_eq!(m.combinations, 1);
        assert_eq!(m.matching.chosen, vec![0, 2]);
        assert!(verify_relaxed_matching(&gh, &m.matching).unwrap().is_valid());
    }

    #[test]
    fn weighted_shared_heavy_resource() {
        // Both players need resource 0 for most of their weight.
        let h = WeightedHypergraph {
            players: 2,
            resources: 3,
            configurations: vec![Configuration::new(0, vec![0, 1]), Configuration::new(1, vec![0, 2])],
            weights: vec![vec![q(3, 4), q(1, 4)], vec![q(1, 2), q(1, 2)]],
        };
        let m = exact_min_alpha_weighted(&h).unwrap().unwrap();
        // Giving 0 to player 0: alphas 1 and 2; to player 1: 4 and 1.
        assert_eq!(m.alpha, q(2, 1));
        assert!(verify_relaxed_matching(&h, &m.matching).unwrap().is_valid());
    }
}
