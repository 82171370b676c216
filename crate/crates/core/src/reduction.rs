//! From sampled cluster configurations to a weighted hypergraph, then to the
//! grouped unweighted form, and back.
//!
//! Weights are normalized marginal gains: inside `C`, listed in the fixed
//! order of descending `f({j})` (ties by id), `w_{j,C} = f(j | earlier) /
//! f(C)`, so each configuration has total weight 1. After dropping weights
//! below `1/(2n)` and flooring to powers of two, resource `j` of weight
//! `2^-s` goes into bucket `s` of the configuration. Each cluster becomes a
//! group of `ceil(log2(2n))` players, one per bucket.

use crate::clustering::ClusterDecomposition;
use crate::error::{contract, structural, Result};
use crate::model::{
    achieved_alpha_weighted, verify_relaxed_matching, Configuration, Group, GroupedHypergraph, RelaxedMatching,
    WeightedHypergraph,
};
use crate::scalar::{ceil_log2, floor_log2, pow2, Scalar};
use crate::submodular::ValuationOracle;
use crate::Rational;

/// Position of every resource in the order of descending singleton value,
/// ties broken by id.
pub fn marginal_order<S: Scalar>(oracle: &ValuationOracle<S>) -> Vec<usize> {
    let n = oracle.ground_size();
    let singles: Vec<S> = (0..n).map(|j| oracle.singleton(j)).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| singles[b].partial_cmp(&singles[a]).expect("comparable").then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (k, &j) in ids.iter().enumerate() {
        rank[j] = k;
    }
    rank
}

/// Marginal gains of `resources` taken in `rank` order, reported in the
/// sorted order of `resources`. They telescope to `f(resources)`.
pub fn marginal_gains<S: Scalar>(oracle: &ValuationOracle<S>, resources: &[usize], rank: &[usize]) -> Vec<S> {
    let mut order: Vec<usize> = (0..resources.len()).collect();
    order.sort_by_key(|&k| rank[resources[k]]);
    let mut out = vec![S::zero(); resources.len()];
    let mut ev = oracle.evaluator();
    for k in order {
        out[k] = ev.gain(resources[k]);
        ev.add(resources[k]);
    }
    out
}

/// Vertices are the clusters and the resources. Configuration
/// `h * ell + k` is the `k`-th sample of cluster `h`, owned by player `h`.
pub fn build_weighted_hypergraph<S: Scalar>(
    dec: &ClusterDecomposition<S>,
    oracle: &ValuationOracle<S>,
    t_star: &S,
) -> Result<WeightedHypergraph<S>> {
    if dec.samples.len() != dec.clusters.len() {
        return contract("cluster decomposition has no sampled configurations");
    }
    let rank = marginal_order(oracle);
    let need = t_star.clone() / S::from_usize(5);
    let mut configurations = Vec::new();
    let mut weights = Vec::new();
    for (h, samples) in dec.samples.iter().enumerate() {
        for cfg in samples {
            let gains = marginal_gains(oracle, &cfg.resources, &rank);
            let total = gains.iter().fold(S::zero(), |a, g| a + g.clone());
            if total < need || !total.strictly_positive() {
                return structural(format!("a sampled configuration of cluster {h} is worth less than T*/5"));
            }
            weights.push(gains.into_iter().map(|g| g / total.clone()).collect());
            configurations.push(Configuration::new(h, cfg.resources.clone()));
        }
    }
    let h = WeightedHypergraph { players: dec.clusters.len(), resources: oracle.ground_size(), configurations, weights };
    h.validate()?;
    Ok(h)
}

/// Number of buckets, `ceil(log2(2n))`, for `n` resources.
pub fn bucket_count(resources: usize) -> usize {
    (ceil_log2(2 * resources.max(1)) as usize).max(1)
}

/// Drops weights below `1/(2n)`, then floors the rest to powers of two.
/// The cutoff runs first, so a configuration of weight 1 keeps at least
/// `1/4` and every exponent lies in `[1, ceil(log2(2n))]` or is 0.
pub fn round_weights<S: Scalar>(h: &WeightedHypergraph<S>) -> Result<WeightedHypergraph<S>> {
    h.validate()?;
    let cutoff = S::one() / S::from_usize(2 * h.resources.max(1));
    let mut configurations = Vec::with_capacity(h.configurations.len());
    let mut weights = Vec::with_capacity(h.configurations.len());
    for (c, (cfg, w)) in h.configurations.iter().zip(&h.weights).enumerate() {
        let mut keep = Vec::new();
        let mut kept_w = Vec::new();
        for (&r, x) in cfg.resources.iter().zip(w) {
            if *x >= cutoff && x.strictly_positive() {
                keep.push(r);
                kept_w.push(pow2::<S>(floor_log2(x)));
            }
        }
        if keep.is_empty() {
            return structural(format!("configuration {c} loses every resource to the 1/(2n) cutoff"));
        }
        configurations.push(Configuration { player: cfg.player, resources: keep });
        weights.push(kept_w);
    }
    Ok(WeightedHypergraph { players: h.players, resources: h.resources, configurations, weights })
}

/// Bucket index `s >= 1` of a dyadic weight `2^-s`; weight 1 shares
/// bucket 1.
fn bucket_of<S: Scalar>(w: &S, buckets: usize) -> Result<usize> {
    if !w.strictly_positive() || *w > S::one() {
        return structural(format!("weight {w} is outside (0, 1]"));
    }
    let e = floor_log2(w);
    if pow2::<S>(e) != *w {
        return structural(format!("weight {w} is not a power of two"));
    }
    let s = (-e).max(1) as usize;
    if s > buckets {
        return structural(format!("weight {w} is below the dyadic grid"));
    }
    Ok(s)
}

/// Player `p` becomes players `p*B .. p*B+B`; configuration `c` becomes
/// configurations `c*B .. c*B+B`, the `s`-th holding the resources of
/// weight `2^-(s+1)` (0-based `s`). Empty buckets stay as empty
/// configurations so every group has one consistent set per original
/// configuration.
pub fn to_grouped<S: Scalar>(h: &WeightedHypergraph<S>) -> Result<GroupedHypergraph> {
    h.validate()?;
    let b = bucket_count(h.resources);
    let mut configurations = Vec::with_capacity(h.configurations.len() * b);
    let mut groups: Vec<Group> = (0..h.players)
        .map(|p| Group { players: (p * b..(p + 1) * b).collect(), consistent_sets: Vec::new() })
        .collect();
    for (c, (cfg, w)) in h.configurations.iter().zip(&h.weights).enumerate() {
        let mut parts = vec![Vec::new(); b];
        for (&r, x) in cfg.resources.iter().zip(w) {
            parts[bucket_of(x, b)? - 1].push(r);
        }
        for (s, part) in parts.into_iter().enumerate() {
            configurations.push(Configuration { player: cfg.player * b + s, resources: part });
        }
        groups[cfg.player].consistent_sets.push((c * b..(c + 1) * b).collect());
    }
    let ell = groups.iter().map(|g| g.consistent_sets.len()).max().unwrap_or(0);
    let g = GroupedHypergraph { resources: h.resources, ell, groups, configurations };
    g.validate()?;
    Ok(g)
}

/// A matching on the weighted hypergraph with its achieved weighted factor;
/// `alpha_weighted` is `None` when some player receives no weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatching {
    pub chosen: Vec<usize>,
    pub assigned: Vec<Vec<usize>>,
    pub alpha_weighted: Option<Rational>,
}

impl LiftedMatching {
    pub fn to_relaxed(&self) -> Option<RelaxedMatching> {
        self.alpha_weighted.as_ref().map(|a| RelaxedMatching {
            chosen: self.chosen.clone(),
            assigned: self.assigned.clone(),
            alpha: a.clone(),
        })
    }
}

/// Unions each group's assignment back onto the original configuration and
/// measures the weighted factor against `h`, which may be the rounded or
/// the unrounded hypergraph over the same configurations.
pub fn lift_matching<S: Scalar>(
    gm: &RelaxedMatching,
    grouped: &GroupedHypergraph,
    h: &WeightedHypergraph<S>,
) -> Result<LiftedMatching> {
    if !verify_relaxed_matching(grouped, gm)?.is_valid() {
        return contract("grouped matching is not a valid consistent relaxed matching");
    }
    let b = bucket_count(h.resources);
    if grouped.configurations.len() != h.configurations.len() * b || grouped.groups.len() != h.players {
        return contract("grouped hypergraph was not built from this weighted hypergraph");
    }
    let mut chosen = Vec::with_capacity(h.players);
    let mut assigned = Vec::with_capacity(h.players);
    for group in &grouped.groups {
        let c = gm.chosen[group.players[0]] / b;
        let mut got: Vec<usize> = group.players.iter().flat_map(|&p| gm.assigned[p].iter().copied()).collect();
        got.sort_unstable();
        chosen.push(c);
        assigned.push(got);
    }
    let alpha_weighted = achieved_alpha_weighted(h, &chosen, &assigned);
    Ok(LiftedMatching { chosen, assigned, alpha_weighted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{achieved_alpha, MatchingHost};
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn one_config(resources: usize, cfg: Vec<usize>, w: Vec<Rational>) -> WeightedHypergraph<Rational> {
        WeightedHypergraph {
            players: 1,
            resources,
            configurations: vec![Configuration::new(0, cfg)],
            weights: vec![w],
        }
    }

    #[test]
    fn linear_weights_follow_values() {
        let f: ValuationOracle<Rational> = ValuationOracle::Linear { values: vec![q(1, 1), q(3, 1), q(4, 1)] };
        let rank = marginal_order(&f);
        assert_eq!(rank, vec![2, 1, 0]);
        assert_eq!(marginal_gains(&f, &[0, 1, 2], &rank), vec![q(1, 1), q(3, 1), q(4, 1)]);
    }

    #[test]
    fn coverage_gains_telescope() {
        // Sets {0,1}, {1,2}, {2,3,4}; unit element weights.
        let f: ValuationOracle<Rational> = ValuationOracle::Coverage {
            sets: vec![vec![0, 1], vec![1, 2], vec![2, 3, 4]],
            weights: vec![q(1, 1); 5],
        };
        let rank = marginal_order(&f);
        // Order: resource 2 (value 3), then 0, then 1 (value 2 each).
        let g = marginal_gains(&f, &[0, 1, 2], &rank);
        assert_eq!(g, vec![q(2, 1), q(0, 1), q(3, 1)]);
        assert_eq!(g.iter().sum::<Rational>(), f.eval(&[0, 1, 2]));
    }

    #[test]
    fn rounding_examples() {
        let h = one_config(4, vec![0, 1, 2], vec![q(3, 10), q(6, 10), q(1, 10)]);
        let r = round_weights(&h).unwrap();
        assert_eq!(r.configurations[0].resources, vec![0, 1]);
        assert_eq!(r.weights[0], vec![q(1, 4), q(1, 2)]);
    }

    #[test]
    fn grouping_example() {
        let h = one_config(8, vec![3, 5, 7], vec![q(1, 4), q(1, 4), q(1, 2)]);
        let g = to_grouped(&h).unwrap();
        assert_eq!(bucket_count(8), 4);
        assert_eq!(g.groups[0].players.len(), 4);
        assert_eq!(g.configurations[0].resources, vec![7]);
        assert_eq!(g.configurations[1].resources, vec![3, 5]);
        assert!(g.configurations[2].is_empty() && g.configurations[3].is_empty());
        assert!(to_grouped(&one_config(8, vec![0], vec![q(3, 8)])).is_err());
    }

    #[test]
    fn two_bucket_lift() {
        // Four resources of weight 1/8 (bucket 3) and eight of 1/16
        // (bucket 4). Alpha 2 asks for 2 and 4, worth 1/4 + 1/4 of 1.
        let res: Vec<usize> = (0..12).collect();
        let mut w = vec![q(1, 8); 4];
        w.extend(vec![q(1, 16); 8]);
        let h = one_config(16, res, w);
        let g = to_grouped(&h).unwrap();
        let b = bucket_count(16);
        let mut assigned = vec![Vec::new(); b];
        assigned[2] = vec![0, 1];
        assigned[3] = vec![4, 5, 6, 7];
        let gm = RelaxedMatching { chosen: (0..b).collect(), assigned, alpha: q(2, 1) };
        assert!(g.verify(&gm).unwrap().is_valid());
        let lifted = lift_matching(&gm, &g, &h).unwrap();
        assert_eq!(lifted.alpha_weighted, Some(q(2, 1)));
        let rm = lifted.to_relaxed().unwrap();
        assert!(verify_relaxed_matching(&h, &rm).unwrap().is_valid());
    }

    fn arb_weights() -> impl Strategy<Value = (usize, Vec<u32>)> {
        (2usize..40, prop::collection::vec(1u32..1000, 1..30))
    }

    proptest! {
        #[test]
        fn rounded_total_stays_in_quarter_one((extra, raw) in arb_weights()) {
            let n = raw.len() + extra;
            let sum: u32 = raw.iter().sum();
            let w: Vec<Rational> = raw.iter().map(|&x| q(x as i64, sum as i64)).collect();
            let h = one_config(n, (0..raw.len()).collect(), w);
            let r = round_weights(&h).unwrap();
            let total = r.total_weight(0);
            prop_assert!(total >= q(1, 4) && total <= q(1, 1));
            let g = to_grouped(&r).unwrap();
            let count: usize = g.configurations.iter().map(Configuration::len).sum();
            prop_assert_eq!(count, r.configurations[0].len());
            let deg_before: Vec<usize> = (0..n).map(|j| usize::from(r.configurations[0].contains(j))).collect();
            let deg_after: Vec<usize> = g.incidence().iter().map(Vec::len).collect();
            prop_assert_eq!(deg_before, deg_after);
        }

        #[test]
        fn full_bucket_lift_is_within_rounding((extra, raw) in arb_weights()) {
            let n = raw.len() + extra;
            let sum: u32 = raw.iter().sum();
            let w: Vec<Rational> = raw.iter().map(|&x| q(x as i64, sum as i64)).collect();
            let h = one_config(n, (0..raw.len()).collect(), w);
            let r = round_weights(&h).unwrap();
            let g = to_grouped(&r).unwrap();
            let b = bucket_count(n);
            let assigned: Vec<Vec<usize>> = (0..b).map(|s| g.configurations[s].resources.clone()).collect();
            let sizes: Vec<usize> = assigned.iter().map(Vec::len).collect();
            let gm = RelaxedMatching { chosen: (0..b).collect(), assigned, alpha: achieved_alpha(&sizes, &sizes) };
            let lifted = lift_matching(&gm, &g, &h).unwrap();
            prop_assert!(lifted.alpha_weighted.unwrap() <= q(4, 1));
            let lifted = lift_matching(&gm, &g, &r).unwrap();
            prop_assert_eq!(lifted.alpha_weighted, Some(q(1, 1)));
        }
    }
}
