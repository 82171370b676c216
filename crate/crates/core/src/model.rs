//! Instances, hypergraphs and relaxed matchings.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{structural, Result};
use crate::scalar::{ceil_log2, floor_div, format_rational, Scalar};
use crate::submodular::ValuationOracle;
use crate::Rational;

/// A set of resources tagged with the player that would receive them.
/// `resources` is sorted and duplicate free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub player: usize,
    pub resources: Vec<usize>,
}

impl Configuration {
    pub fn new(player: usize, mut resources: Vec<usize>) -> Self {
        resources.sort_unstable();
        resources.dedup();
        Configuration { player, resources }
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.resources.binary_search(&r).is_ok()
    }
}

/// Restricted-assignment instance: player `i` only values resources in
/// `gamma[i]`, through the shared valuation `f(S ∩ gamma[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SantaInstance<S> {
    pub players: usize,
    pub resources: usize,
    pub gamma: Vec<Vec<usize>>,
    pub valuation: ValuationOracle<S>,
}

impl<S: Scalar> SantaInstance<S> {
    /// Builds an instance, sorting each `gamma[i]`, and rejects it if
    /// [`validate_instance`] reports any problem.
    pub fn new(
        players: usize,
        resources: usize,
        mut gamma: Vec<Vec<usize>>,
        valuation: ValuationOracle<S>,
    ) -> Result<Self> {
        gamma.iter_mut().for_each(|g| g.sort_unstable());
        let inst = SantaInstance { players, resources, gamma, valuation };
        match validate_instance(&inst).first() {
            Some(msg) => structural(msg.clone()),
            None => Ok(inst),
        }
    }

    /// `f(set ∩ gamma[player])`.
    pub fn player_value(&self, player: usize, set: &[usize]) -> S {
        let g = &self.gamma[player];
        let kept: Vec<usize> = set.iter().copied().filter(|r| g.binary_search(r).is_ok()).collect();
        self.valuation.eval(&kept)
    }

    /// For every resource, the players whose `gamma` contains it.
    pub fn owners(&self) -> Vec<Vec<usize>> {
        let mut owners = vec![Vec::new(); self.resources];
        for (i, g) in self.gamma.iter().enumerate() {
            for &r in g {
                owners[r].push(i);
            }
        }
        owners
    }

    /// Minimum player value of an allocation.
    pub fn min_value(&self, allocation: &[Vec<usize>]) -> S {
        allocation
            .iter()
            .enumerate()
            .map(|(i, s)| self.player_value(i, s))
            .reduce(|a, b| if b < a { b } else { a })
            .unwrap_or_else(S::zero)
    }

    /// Converts values to another scalar type through exact rationals.
    pub fn convert<T: Scalar>(&self) -> SantaInstance<T> {
        SantaInstance {
            players: self.players,
            resources: self.resources,
            gamma: self.gamma.clone(),
            valuation: convert_oracle(&self.valuation),
        }
    }
}

pub(crate) fn convert_scalar<S: Scalar, T: Scalar>(x: &S) -> T {
    match x.to_ratio() {
        Some(r) => T::from_ratio(&r),
        None => T::from_f64(x.to_f64()),
    }
}

pub(crate) fn convert_oracle<S: Scalar, T: Scalar>(f: &ValuationOracle<S>) -> ValuationOracle<T> {
    let v = |xs: &Vec<S>| xs.iter().map(convert_scalar::<S, T>).collect::<Vec<T>>();
    match f {
        ValuationOracle::Linear { values } => ValuationOracle::Linear { values: v(values) },
        ValuationOracle::Coverage { sets, weights } => {
            ValuationOracle::Coverage { sets: sets.clone(), weights: v(weights) }
        }
        ValuationOracle::BudgetedAdditive { values, budget } => ValuationOracle::BudgetedAdditive {
            values: v(values),
            budget: convert_scalar(budget),
        },
        ValuationOracle::MatroidRank { blocks, capacities } => ValuationOracle::MatroidRank {
            blocks: blocks.clone(),
            capacities: capacities.clone(),
        },
        ValuationOracle::Table { ground, values } => {
            ValuationOracle::Table { ground: *ground, values: v(values) }
        }
    }
}

/// Lists every structural problem with an instance; empty means valid.
pub fn validate_instance<S: Scalar>(inst: &SantaInstance<S>) -> Vec<String> {
    let mut problems = Vec::new();
    if inst.players == 0 {
        problems.push("instance has no players".to_string());
    }
    if inst.gamma.len() != inst.players {
        problems.push(format!(
            "gamma lists {} players but the instance declares {}",
            inst.gamma.len(),
            inst.players
        ));
    }
    for (i, g) in inst.gamma.iter().enumerate() {
        if let Some(&r) = g.iter().find(|&&r| r >= inst.resources) {
            problems.push(format!("resource id {r} out of range in gamma of player {i}"));
        }
        if g.windows(2).any(|w| w[0] == w[1]) {
            problems.push(format!("gamma of player {i} repeats a resource"));
        }
    }
    if inst.valuation.ground_size() != inst.resources {
        problems.push(format!(
            "valuation covers {} resources but the instance declares {}",
            inst.valuation.ground_size(),
            inst.resources
        ));
    }
    if let Err(e) = inst.valuation.check_shape() {
        problems.push(e.to_string());
    } else if !inst.valuation.eval(&[]).is_zero() {
        problems.push("valuation is nonzero on the empty set".to_string());
    }
    problems
}

/// Hypergraph whose configurations carry per-resource weights. Player `p`
/// owns the configurations with `player == p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedHypergraph<S> {
    pub players: usize,
    pub resources: usize,
    pub configurations: Vec<Configuration>,
    /// `weights[c][k]` belongs to `configurations[c].resources[k]`.
    pub weights: Vec<Vec<S>>,
}

impl<S: Scalar> WeightedHypergraph<S> {
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.configurations.len() {
            return structural("weights and configurations differ in length");
        }
        for (c, (cfg, w)) in self.configurations.iter().zip(&self.weights).enumerate() {
            if cfg.player >= self.players {
                return structural(format!("configuration {c} names player {}", cfg.player));
            }
            if cfg.resources.iter().any(|&r| r >= self.resources) {
                return structural(format!("configuration {c} has an out-of-range resource"));
            }
            if w.len() != cfg.len() {
                return structural(format!("configuration {c} weight keys differ from its members"));
            }
            if w.iter().any(|x| x.strictly_negative()) {
                return structural(format!("configuration {c} has a negative weight"));
            }
        }
        Ok(())
    }

    pub fn configs_of(&self, player: usize) -> Vec<usize> {
        (0..self.configurations.len()).filter(|&c| self.configurations[c].player == player).collect()
    }

    pub fn total_weight(&self, c: usize) -> S {
        self.weights[c].iter().fold(S::zero(), |a, w| a + w.clone())
    }

    /// Weight of `assigned` inside configuration `c`; resources outside `c`
    /// contribute nothing.
    pub fn weight_of(&self, c: usize, assigned: &[usize]) -> S {
        let cfg = &self.configurations[c];
        assigned.iter().fold(S::zero(), |acc, r| match cfg.resources.binary_search(r) {
            Ok(k) => acc + self.weights[c][k].clone(),
            Err(_) => acc,
        })
    }
}

/// A group of players that choose their configurations jointly: picking
/// consistent set `s` gives `players[k]` the configuration
/// `consistent_sets[s][k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub players: Vec<usize>,
    pub consistent_sets: Vec<Vec<usize>>,
}

/// Unweighted hypergraph with player groups. It is `ell`-regular when every
/// group has exactly `ell` consistent sets and every resource lies in at most
/// `ell` configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedHypergraph {
    pub resources: usize,
    pub ell: usize,
    pub groups: Vec<Group>,
    pub configurations: Vec<Configuration>,
}

impl GroupedHypergraph {
    /// Every player forms its own group and every configuration its own
    /// consistent set; `ell` is the largest configuration count of a player.
    pub fn from_plain(players: usize, resources: usize, configurations: Vec<Configuration>) -> Self {
        let mut sets = vec![Vec::new(); players];
        for (c, cfg) in configurations.iter().enumerate() {
            if cfg.player < players {
                sets[cfg.player].push(vec![c]);
            }
        }
        let ell = sets.iter().map(Vec::len).max().unwrap_or(0);
        let groups = sets
            .into_iter()
            .enumerate()
            .map(|(p, consistent_sets)| Group { players: vec![p], consistent_sets })
            .collect();
        GroupedHypergraph { resources, ell, groups, configurations }
    }

    pub fn player_count(&self) -> usize {
        self.groups.iter().map(|g| g.players.len()).sum()
    }

    /// `(group, member index)` of every player.
    pub fn membership(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(usize::MAX, usize::MAX); self.player_count()];
        for (g, group) in self.groups.iter().enumerate() {
            for (k, &p) in group.players.iter().enumerate() {
                if p < out.len() {
                    out[p] = (g, k);
                }
            }
        }
        out
    }

    /// Owning group of every configuration.
    pub fn config_group(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.configurations.len()];
        for (g, group) in self.groups.iter().enumerate() {
            for &c in group.consistent_sets.iter().flatten() {
                out[c] = g;
            }
        }
        out
    }

    /// For every resource, the configurations containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.resources];
        for (c, cfg) in self.configurations.iter().enumerate() {
            for &r in &cfg.resources {
                inc[r].push(c);
            }
        }
        inc
    }

    pub fn validate(&self) -> Result<()> {
        let players = self.player_count();
        let mut seen_player = vec![false; players];
        let mut seen_config = vec![false; self.configurations.len()];
        for (g, group) in self.groups.iter().enumerate() {
            if group.players.is_empty() {
                return structural(format!("group {g} is empty"));
            }
            for &p in &group.players {
                if p >= players || std::mem::replace(&mut seen_player[p], true) {
                    return structural(format!("player {p} is out of range or in two groups"));
                }
            }
            for (s, set) in group.consistent_sets.iter().enumerate() {
                if set.len() != group.players.len() {
                    return structural(format!("consistent set {s} of group {g} has the wrong size"));
                }
                for (k, &c) in set.iter().enumerate() {
                    let cfg = self.configurations.get(c).ok_or_else(|| {
                        crate::Error::Structural(format!("configuration index {c} out of range"))
                    })?;
                    if cfg.player != group.players[k] {
                        return structural(format!(
                            "configuration {c} belongs to player {} but sits in the slot of player {}",
                            cfg.player, group.players[k]
                        ));
                    }
                    if std::mem::replace(&mut seen_config[c], true) {
                        return structural(format!("configuration {c} appears in two consistent sets"));
                    }
                }
            }
        }
        if let Some(c) = seen_config.iter().position(|s| !s) {
            return structural(format!("configuration {c} is in no consistent set"));
        }
        for (c, cfg) in self.configurations.iter().enumerate() {
            if cfg.resources.iter().any(|&r| r >= self.resources) {
                return structural(format!("configuration {c} has an out-of-range resource"));
            }
        }
        Ok(())
    }

    pub fn check_regular(&self) -> Result<()> {
        self.validate()?;
        if let Some(g) = self.groups.iter().position(|g| g.consistent_sets.len() != self.ell) {
            return structural(format!("group {g} does not have exactly {} consistent sets", self.ell));
        }
        if let Some((r, d)) = self.incidence().iter().map(Vec::len).enumerate().find(|&(_, d)| d > self.ell) {
            return structural(format!("resource {r} lies in {d} > {} configurations", self.ell));
        }
        Ok(())
    }

    /// Number of ways to pick one consistent set per group, saturating.
    pub fn combinations(&self) -> u128 {
        self.groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.consistent_sets.len().max(1) as u128))
    }

    /// Largest group size allowed by the regular form, `ceil(log2 n)`.
    pub fn nominal_group_bound(&self) -> usize {
        ceil_log2(self.resources.max(2)) as usize
    }
}

/// One configuration per player together with the resources it receives.
/// `alpha` is exact; a matching is valid at `alpha` when every player
/// receives at least `floor(|C|/alpha)` resources of its configuration, or
/// in the weighted case at least a `1/alpha` fraction of its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedMatching {
    pub chosen: Vec<usize>,
    pub assigned: Vec<Vec<usize>>,
    pub alpha: Rational,
}

/// Outcome of a verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Violated(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// A hypergraph against which relaxed matchings can be verified.
pub trait MatchingHost {
    fn verify(&self, m: &RelaxedMatching) -> Result<Verdict>;
}

pub fn verify_relaxed_matching<H: MatchingHost + ?Sized>(h: &H, m: &RelaxedMatching) -> Result<Verdict> {
    h.verify(m)
}

fn common_checks(
    players: usize,
    resources: usize,
    configurations: &[Configuration],
    m: &RelaxedMatching,
) -> Result<Option<Verdict>> {
    if m.chosen.len() != players || m.assigned.len() != players {
        return structural(format!(
            "matching lists {} choices and {} assignments for {players} players",
            m.chosen.len(),
            m.assigned.len()
        ));
    }
    if m.alpha < BigRational::one() {
        return Ok(Some(Verdict::Violated(format!("alpha {} is below 1", format_rational(&m.alpha)))));
    }
    let mut used = HashSet::new();
    for (p, (&c, assigned)) in m.chosen.iter().zip(&m.assigned).enumerate() {
        let cfg = configurations
            .get(c)
            .ok_or_else(|| crate::Error::Structural(format!("player {p} chose unknown configuration {c}")))?;
        if let Some(&r) = assigned.iter().find(|&&r| r >= resources) {
            return structural(format!("player {p} was assigned unknown resource {r}"));
        }
        if cfg.player != p {
            return Ok(Some(Verdict::Violated(format!(
                "player {p} chose configuration {c} of player {}",
                cfg.player
            ))));
        }
        for &r in assigned {
            if !cfg.contains(r) {
                return Ok(Some(Verdict::Violated(format!(
                    "resource {r} assigned to player {p} is not in its configuration"
                ))));
            }
            if !used.insert(r) {
                return Ok(Some(Verdict::Violated(format!("resource {r} is assigned twice"))));
            }
        }
    }
    Ok(None)
}

impl MatchingHost for GroupedHypergraph {
    fn verify(&self, m: &RelaxedMatching) -> Result<Verdict> {
        self.validate()?;
        if let Some(v) = common_checks(self.player_count(), self.resources, &self.configurations, m)? {
            return Ok(v);
        }
        for (g, group) in self.groups.iter().enumerate() {
            let picked: Vec<usize> = group.players.iter().map(|&p| m.chosen[p]).collect();
            if !group.consistent_sets.contains(&picked) {
                return Ok(Verdict::Violated(format!("group {g} selection is not a consistent set")));
            }
        }
        for (p, (&c, assigned)) in m.chosen.iter().zip(&m.assigned).enumerate() {
            let need = floor_div(self.configurations[c].len(), &m.alpha);
            if assigned.len() < need {
                return Ok(Verdict::Violated(format!(
                    "player {p} received {} of the {need} resources required",
                    assigned.len()
                )));
            }
        }
        Ok(Verdict::Valid)
    }
}

impl<S: Scalar> MatchingHost for WeightedHypergraph<S> {
    fn verify(&self, m: &RelaxedMatching) -> Result<Verdict> {
        self.validate()?;
        if let Some(v) = common_checks(self.players, self.resources, &self.configurations, m)? {
            return Ok(v);
        }
        for (p, (&c, assigned)) in m.chosen.iter().zip(&m.assigned).enumerate() {
            let total = to_rational(&self.total_weight(c));
            let got = to_rational(&self.weight_of(c, assigned));
            if got * &m.alpha < total {
                return Ok(Verdict::Violated(format!(
                    "player {p} received less than a 1/{} fraction of its weight",
                    format_rational(&m.alpha)
                )));
            }
        }
        Ok(Verdict::Valid)
    }
}

pub(crate) fn to_rational<S: Scalar>(x: &S) -> Rational {
    x.to_ratio().unwrap_or_else(Rational::zero)
}

/// Breakpoints `s/t` of `floor(s/alpha)` over the given sizes, plus
/// `max + 1`, sorted and deduplicated. The smallest feasible candidate is the
/// smallest feasible alpha overall because demands are constant on each
/// interval `(b, b']` between consecutive breakpoints.
pub fn alpha_candidates(sizes: &[usize]) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for &s in sizes {
        for t in 1..=s {
            out.push(Rational::new(s.into(), t.into()));
        }
    }
    let top = sizes.iter().copied().max().unwrap_or(0);
    out.push(Rational::from_integer((top + 1).into()));
    out.push(Rational::one());
    out.sort();
    out.dedup();
    out
}

/// Smallest candidate alpha at which `counts[i] >= floor(sizes[i]/alpha)`.
pub fn achieved_alpha(sizes: &[usize], counts: &[usize]) -> Rational {
    let mut bound = Rational::zero();
    for (&s, &a) in sizes.iter().zip(counts) {
        if a < s {
            let b = Rational::new(s.into(), (a + 1).into());
            if b > bound {
                bound = b;
            }
        }
    }
    if bound.is_zero() {
        return Rational::one();
    }
    alpha_candidates(sizes)
        .into_iter()
        .find(|c| *c > bound)
        .expect("max + 1 exceeds every bound")
}

/// Largest ratio of total to received weight, or `None` when some player
/// with positive weight receives nothing.
pub fn achieved_alpha_weighted<S: Scalar>(h: &WeightedHypergraph<S>, chosen: &[usize], assigned: &[Vec<usize>]) -> Option<Rational> {
    let mut alpha = Rational::one();
    for (&c, a) in chosen.iter().zip(assigned) {
        let total = to_rational(&h.total_weight(c));
        let got = to_rational(&h.weight_of(c, a));
        if total.is_zero() {
            continue;
        }
        if got.is_zero() {
            return None;
        }
        let ratio = total / got;
        if ratio > alpha {
            alpha = ratio;
        }
    }
    Some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn tiny() -> GroupedHypergraph {
        GroupedHypergraph::from_plain(
            2,
            3,
            vec![
                Configuration::new(0, vec![0, 1]),
                Configuration::new(0, vec![2]),
                Configuration::new(1, vec![1, 2]),
            ],
        )
    }

    #[test]
    fn validation_flags_out_of_range_ids() {
        let inst = SantaInstance {
            players: 1,
            resources: 2,
            gamma: vec![vec![0, 5]],
            valuation: ValuationOracle::Linear { values: vec![1.0, 1.0] },
        };
        let problems = validate_instance(&inst);
        assert!(problems.iter().any(|p| p.contains("resource id 5")));
    }

    #[test]
    fn validation_flags_nonzero_empty_value() {
        let inst = SantaInstance {
            players: 1,
            resources: 1,
            gamma: vec![vec![0]],
            valuation: ValuationOracle::Table { ground: 1, values: vec![1.0, 2.0] },
        };
        assert!(validate_instance(&inst).iter().any(|p| p.contains("empty set")));
    }

    #[test]
    fn verify_detects_duplicate_resource() {
        let h = tiny();
        let m = RelaxedMatching { chosen: vec![0, 2], assigned: vec![vec![1], vec![1]], alpha: q(2, 1) };
        assert_eq!(h.verify(&m).unwrap(), Verdict::Violated("resource 1 is assigned twice".into()));
    }

    #[test]
    fn verify_accepts_half_coverage_at_alpha_two() {
        let h = tiny();
        let m = RelaxedMatching { chosen: vec![0, 2], assigned: vec![vec![0], vec![2]], alpha: q(2, 1) };
        assert!(h.verify(&m).unwrap().is_valid());
        let strict = RelaxedMatching { alpha: q(1, 1), ..m };
        assert!(!h.verify(&strict).unwrap().is_valid());
    }

    #[test]
    fn verify_rejects_unknown_configuration() {
        let h = tiny();
        let m = RelaxedMatching { chosen: vec![7, 2], assigned: vec![vec![], vec![]], alpha: q(1, 1) };
        assert!(h.verify(&m).is_err());
    }

    #[test]
    fn verify_rejects_wrong_player() {
        let h = tiny();
        let m = RelaxedMatching { chosen: vec![2, 2], assigned: vec![vec![], vec![]], alpha: q(3, 1) };
        assert!(!h.verify(&m).unwrap().is_valid());
    }

    #[test]
    fn weighted_verification_uses_weight_fraction() {
        let h = WeightedHypergraph {
            players: 1,
            resources: 3,
            configurations: vec![Configuration::new(0, vec![0, 1, 2])],
            weights: vec![vec![q(1, 2), q(1, 4), q(1, 4)]],
        };
        let m = RelaxedMatching { chosen: vec![0], assigned: vec![vec![0]], alpha: q(2, 1) };
        assert!(h.verify(&m).unwrap().is_valid());
        let m = RelaxedMatching { chosen: vec![0], assigned: vec![vec![1]], alpha: q(2, 1) };
        assert!(!h.verify(&m).unwrap().is_valid());
    }

    #[test]
    fn achieved_alpha_examples() {
        // A player keeping half of a 4-set needs alpha 2.
        assert_eq!(achieved_alpha(&[4], &[2]), q(2, 1));
        // Losing the only resource of a singleton needs alpha above 1.
        assert_eq!(achieved_alpha(&[1, 1], &[1, 0]), q(2, 1));
        assert_eq!(achieved_alpha(&[3, 5], &[3, 5]), q(1, 1));
        // 7 resources, 2 kept: need alpha > 7/3, next breakpoint is 7/2.
        assert_eq!(achieved_alpha(&[7], &[2]), q(7, 2));
    }

    #[test]
    fn regularity_check() {
        let mut h = tiny();
        assert!(h.check_regular().is_err());
        h.ell = 2;
        assert!(h.check_regular().is_err());
        h.groups[1].consistent_sets.push(vec![3]);
        h.configurations.push(Configuration::new(1, vec![0]));
        assert!(h.check_regular().is_ok());
    }
}
