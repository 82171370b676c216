//! Reductions between linear Santa Claus and unweighted hypergraph
//! matching.
//!
//! Matching to Santa: the `t` hyperedges of a vertex `v` become `t` players
//! sharing `t - 1` private resources of value 1, so exactly one of them must
//! live off the resources of its hyperedge, each worth `1/|C ∩ R|`.
//!
//! Santa to matching runs four stages on an instance scaled by a guess `G`
//! of the optimum:
//! 1. values `v/G` are capped at 1, floored to powers of two and dropped
//!    when at most `1/(2n)`;
//! 2. each player gets one helper per value range
//!    `(1/L_k, 1/D_k]`, `L_0 = 2n`, `L_{k+1} = log2 L_k`,
//!    `D_k = max(1, L_{k+1})`, sharing a value-1 resource with it;
//! 3. each helper trades its resources of value `s` for bundle players
//!    holding `b = ceil(0.5 / (s K D_k))` of them, where `K = log*(2n)`;
//!    values are then scaled by `K^2` and capped at 1, so every player sees
//!    only the values 0, 1 and one value `v < 1`;
//! 4. a player with value `v` gets `c = ceil(1/v)` fresh vertex pairs: one
//!    hyperedge holds all `c` fresh resources and each fresh player may take
//!    its paired resource or any resource the player values at `v`.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{contract, structural, Result};
use crate::model::{achieved_alpha, Configuration, GroupedHypergraph, RelaxedMatching, SantaInstance};
use crate::scalar::{floor_pow2, Scalar};
use crate::submodular::ValuationOracle;
use crate::Rational;

/// Santa Claus with a separate additive valuation per player.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSanta {
    pub players: usize,
    pub resources: usize,
    /// `values[i][j]`, zero when `j` is useless to `i`.
    pub values: Vec<Vec<Rational>>,
}

impl LinearSanta {
    pub fn new(values: Vec<Vec<Rational>>, resources: usize) -> Result<Self> {
        if values.iter().any(|row| row.len() != resources) {
            return structural("every value row needs one entry per resource");
        }
        if values.iter().flatten().any(|v| v < &Rational::zero()) {
            return structural("values must be non-negative");
        }
        Ok(LinearSanta { players: values.len(), resources, values })
    }

    /// A restricted instance with a linear valuation: `v_ij = f({j})` for
    /// `j` in `Gamma_i`, else 0.
    pub fn from_instance<S: Scalar>(inst: &SantaInstance<S>) -> Result<Self> {
        let ValuationOracle::Linear { values } = &inst.valuation else {
            return contract("only linear valuations have an unrelated form");
        };
        let rows = inst
            .gamma
            .iter()
            .map(|g| {
                let mut row = vec![Rational::zero(); inst.resources];
                for &j in g {
                    row[j] = values[j].to_ratio().unwrap_or_else(Rational::zero);
                }
                row
            })
            .collect();
        LinearSanta::new(rows, inst.resources)
    }

    pub fn value(&self, i: usize, set: &[usize]) -> Rational {
        set.iter().fold(Rational::zero(), |a, &j| a + &self.values[i][j])
    }

    pub fn min_value(&self, sets: &[Vec<usize>]) -> Rational {
        (0..self.players).map(|i| self.value(i, &sets[i])).min().unwrap_or_else(Rational::zero)
    }

    /// Problems with an allocation: out-of-range ids and shared resources.
    pub fn check_allocation(&self, sets: &[Vec<usize>]) -> Vec<String> {
        let mut out = Vec::new();
        if sets.len() != self.players {
            out.push(format!("{} sets for {} players", sets.len(), self.players));
            return out;
        }
        let mut seen = vec![false; self.resources];
        for (i, s) in sets.iter().enumerate() {
            for &j in s {
                if j >= self.resources {
                    out.push(format!("player {i} holds unknown resource {j}"));
                } else if std::mem::replace(&mut seen[j], true) {
                    out.push(format!("duplicate resource {j}"));
                }
            }
        }
        out
    }
}

/// `log*(x)` in base 2 with `log*(x) = 1` for `x <= 2`.
pub fn log_star(x: f64) -> usize {
    if x <= 2.0 {
        1
    } else {
        1 + log_star(x.log2())
    }
}

/// Iterated logarithms `L_0 = x, L_{k+1} = log2 L_k`, listed while `> 1`.
pub fn iterated_logs(x: f64) -> Vec<f64> {
    let mut out = vec![x];
    while *out.last().unwrap() > 1.0 {
        let next = out.last().unwrap().log2();
        if next <= 1.0 {
            out.push(next);
            break;
        }
        out.push(next);
    }
    out
}

// ----- Matching to Santa -----

/// The Santa instance built from a hypergraph whose groups are single
/// players. Santa player `c` stands for configuration `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingToSanta {
    pub santa: LinearSanta,
    /// Hypergraph resources keep their ids; then come the private shared
    /// resources of each vertex, then one dummy per empty configuration.
    pub hyper_resources: usize,
    pub configurations: Vec<Configuration>,
    pub private: Vec<Vec<usize>>,
    pub dummy: Vec<Option<usize>>,
}

pub fn matching_to_santa(gh: &GroupedHypergraph) -> Result<MatchingToSanta> {
    gh.validate()?;
    if gh.groups.iter().any(|g| g.players.len() != 1) {
        return contract("matching_to_santa needs one player per group");
    }
    let players = gh.player_count();
    let edges: Vec<Vec<usize>> = (0..players)
        .map(|p| (0..gh.configurations.len()).filter(|&c| gh.configurations[c].player == p).collect())
        .collect();
    let mut next = gh.resources;
    let mut private = Vec::with_capacity(players);
    for e in &edges {
        let t = e.len().saturating_sub(1);
        private.push((next..next + t).collect::<Vec<usize>>());
        next += t;
    }
    let mut dummy = vec![None; gh.configurations.len()];
    for (c, cfg) in gh.configurations.iter().enumerate() {
        if cfg.is_empty() {
            dummy[c] = Some(next);
            next += 1;
        }
    }
    let mut values = vec![vec![Rational::zero(); next]; gh.configurations.len()];
    for (c, cfg) in gh.configurations.iter().enumerate() {
        let row = &mut values[c];
        if let Some(d) = dummy[c] {
            row[d] = Rational::one();
        } else {
            let w = Rational::new(1.into(), cfg.len().into());
            for &u in &cfg.resources {
                row[u] = w.clone();
            }
        }
        for &r in &private[cfg.player] {
            row[r] = Rational::one();
        }
    }
    Ok(MatchingToSanta {
        santa: LinearSanta::new(values, next)?,
        hyper_resources: gh.resources,
        configurations: gh.configurations.clone(),
        private,
        dummy,
    })
}

impl MatchingToSanta {
    /// The chosen configuration's player takes its matched resources; the
    /// vertex's other players share out the private resources.
    pub fn santa_from_matching(&self, m: &RelaxedMatching) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.configurations.len()];
        for (p, &c) in m.chosen.iter().enumerate() {
            sets[c] = m.assigned[p].clone();
            if let Some(d) = self.dummy[c] {
                sets[c].push(d);
            }
            let others = (0..self.configurations.len()).filter(|&o| o != c && self.configurations[o].player == p);
            for (o, &r) in others.zip(&self.private[p]) {
                sets[o].push(r);
            }
        }
        sets
    }

    /// For each vertex, the configuration whose Santa player holds no
    /// private resource and has the best received fraction (ties to the
    /// smallest id) becomes the chosen one.
    pub fn matching_from_santa(&self, sets: &[Vec<usize>]) -> Result<RelaxedMatching> {
        if sets.len() != self.configurations.len() {
            return contract("allocation does not match the Santa players");
        }
        let players = self.private.len();
        let mut chosen = vec![usize::MAX; players];
        let mut assigned = vec![Vec::new(); players];
        let mut best: Vec<Option<Rational>> = vec![None; players];
        for (c, cfg) in self.configurations.iter().enumerate() {
            let p = cfg.player;
            if sets[c].iter().any(|r| self.private[p].contains(r)) {
                continue;
            }
            let got: Vec<usize> = sets[c].iter().copied().filter(|&u| cfg.contains(u)).collect();
            let frac = if cfg.is_empty() {
                Rational::one()
            } else {
                Rational::new(got.len().into(), cfg.len().into())
            };
            if best[p].as_ref().is_none_or(|b| frac > *b) {
                best[p] = Some(frac);
                chosen[p] = c;
                assigned[p] = got;
            }
        }
        if let Some(p) = chosen.iter().position(|&c| c == usize::MAX) {
            return structural(format!("every Santa player of vertex {p} holds a private resource"));
        }
        for a in &mut assigned {
            a.sort_unstable();
        }
        let sizes: Vec<usize> = chosen.iter().map(|&c| self.configurations[c].len()).collect();
        let counts: Vec<usize> = assigned.iter().map(Vec::len).collect();
        Ok(RelaxedMatching { alpha: achieved_alpha(&sizes, &counts), chosen, assigned })
    }
}

// ----- Santa to matching -----

/// A player of stages 2 and 3 with the original player it descends from.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlayer {
    pub origin: usize,
    pub values: BTreeMap<usize, f64>,
}

/// An instance of one of the intermediate stages; resources below
/// `original` are the input's resources.
#[derive(Debug, Clone, PartialEq)]
pub struct StageInstance {
    pub players: Vec<StagePlayer>,
    pub resources: usize,
    pub original: usize,
}

/// Stage 1: scale by `1/guess`, cap at 1, floor to powers of two and drop
/// values of at most `1/(2n)`.
pub fn geometric_grouping(inst: &LinearSanta, guess: &Rational) -> Result<Vec<Vec<Rational>>> {
    if guess <= &Rational::zero() {
        return contract("the optimum guess must be positive");
    }
    let cutoff = Rational::new(1.into(), (2 * inst.resources.max(1)).into());
    Ok(inst
        .values
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    let x = (v / guess).min(Rational::one());
                    if x <= cutoff {
                        Rational::zero()
                    } else {
                        floor_pow2(&x)
                    }
                })
                .collect()
        })
        .collect())
}

/// Stage 2: one helper per nonempty value range of every player.
pub fn range_split(grouped: &[Vec<Rational>], resources: usize) -> StageInstance {
    let logs = iterated_logs(2.0 * resources.max(1) as f64);
    let ranges = logs.len() - 1;
    let mut next = resources;
    let mut players: Vec<StagePlayer> = (0..grouped.len())
        .map(|i| StagePlayer { origin: i, values: BTreeMap::new() })
        .collect();
    for (i, row) in grouped.iter().enumerate() {
        let mut by_range: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); ranges];
        for (j, v) in row.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            if v.is_one() {
                players[i].values.insert(j, 1.0);
                continue;
            }
            let x = ToPrimitive::to_f64(v).unwrap();
            let k = (0..ranges).find(|&k| x * logs[k] > 1.0 && x * logs[k + 1].max(1.0) <= 1.0).unwrap_or(ranges - 1);
            by_range[k].insert(j, x);
        }
        for members in by_range.into_iter().filter(|m| !m.is_empty()) {
            let e = next;
            next += 1;
            players[i].values.insert(e, 1.0);
            let mut values = members;
            values.insert(e, 1.0);
            players.push(StagePlayer { origin: i, values });
        }
    }
    StageInstance { players, resources: next, original: resources }
}

/// Range of a helper from its first non-unit value.
fn range_of(x: f64, logs: &[f64]) -> usize {
    let ranges = logs.len() - 1;
    (0..ranges).find(|&k| x * logs[k] > 1.0 && x * logs[k + 1].max(1.0) <= 1.0).unwrap_or(ranges - 1)
}

/// Stage 3: bundles, then scaling by `K^2` with values capped at 1.
pub fn bundle_values(stage2: &StageInstance, n: usize) -> StageInstance {
    let logs = iterated_logs(2.0 * n.max(1) as f64);
    let k_star = log_star(2.0 * n.max(1) as f64) as f64;
    let scale = k_star * k_star;
    let mut next = stage2.resources;
    let mut players: Vec<StagePlayer> = Vec::new();
    let mut extra: Vec<StagePlayer> = Vec::new();
    for p in &stage2.players {
        let small: Vec<(usize, f64)> = p.values.iter().filter(|(_, &v)| v < 1.0).map(|(&j, &v)| (j, v)).collect();
        if small.is_empty() {
            players.push(p.clone());
            continue;
        }
        let d = logs[range_of(small[0].1, &logs) + 1].max(1.0);
        let mut by_value: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for &(j, v) in &small {
            by_value.entry(v.to_bits()).or_default().push(j);
        }
        let mut me = StagePlayer { origin: p.origin, values: p.values.iter().filter(|(_, &v)| v >= 1.0).map(|(&j, &v)| (j, v)).collect() };
        let aux_value = (scale * 2.0 / (k_star * d)).min(1.0);
        for (bits, rs) in by_value {
            let s = f64::from_bits(bits);
            let b = ((0.5 / (s * k_star * d)) - 1e-9).ceil().max(1.0) as usize;
            for _ in 0..rs.len() / b {
                let e = next;
                next += 1;
                me.values.insert(e, aux_value);
                let mut values: BTreeMap<usize, f64> = rs.iter().map(|&j| (j, (scale / (scale * b as f64)).min(1.0))).collect();
                values.insert(e, 1.0);
                extra.push(StagePlayer { origin: p.origin, values });
            }
        }
        players.push(me);
    }
    players.extend(extra);
    StageInstance { players, resources: next, original: stage2.original }
}

/// Stage 4 output with the bookkeeping needed to map matchings back.
#[derive(Debug, Clone, PartialEq)]
pub struct SantaToMatching {
    pub guess: Rational,
    pub log_star: usize,
    pub hypergraph: GroupedHypergraph,
    /// Original player each hypergraph player descends from.
    pub origin: Vec<usize>,
    /// Input resource behind each hypergraph resource, if any.
    pub original_resource: Vec<Option<usize>>,
    pub stage_sizes: [(usize, usize); 3],
}

/// Stage 4: hyperedges for unit values and the vertex-pair gadget for the
/// single value `v < 1` of each player.
pub fn gadget_hypergraph(stage3: &StageInstance) -> Result<(GroupedHypergraph, Vec<usize>)> {
    let mut configs = Vec::new();
    let mut origin = Vec::new();
    let mut next_res = stage3.resources;
    let mut gadgets: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for (x, p) in stage3.players.iter().enumerate() {
        origin.push(p.origin);
        let small: Vec<(usize, f64)> = p.values.iter().filter(|(_, &v)| v < 1.0 && v > 0.0).map(|(&j, &v)| (j, v)).collect();
        if small.windows(2).any(|w| (w[0].1 - w[1].1).abs() > 1e-12) {
            return structural(format!("stage player {x} has more than one fractional value"));
        }
        for (&j, &v) in &p.values {
            if v >= 1.0 {
                configs.push(Configuration::new(x, vec![j]));
            }
        }
        if let Some(&(_, v)) = small.first() {
            let c = ((1.0 / v) - 1e-9).ceil() as usize;
            let fresh: Vec<usize> = (next_res..next_res + c).collect();
            next_res += c;
            configs.push(Configuration::new(x, fresh.clone()));
            gadgets.push((x, fresh, 0));
        }
    }
    let mut next_player = stage3.players.len();
    for (x, fresh, _) in &gadgets {
        let targets: Vec<usize> = stage3.players[*x].values.iter().filter(|(_, &v)| v < 1.0 && v > 0.0).map(|(&j, _)| j).collect();
        for &u in fresh {
            let q = next_player;
            next_player += 1;
            origin.push(stage3.players[*x].origin);
            configs.push(Configuration::new(q, vec![u]));
            for &j in &targets {
                configs.push(Configuration::new(q, vec![j]));
            }
        }
    }
    let players = next_player;
    for p in 0..players {
        if !configs.iter().any(|c| c.player == p) {
            configs.push(Configuration::new(p, Vec::new()));
        }
    }
    configs.sort_by_key(|c| c.player);
    Ok((GroupedHypergraph::from_plain(players, next_res, configs), origin))
}

pub fn santa_to_matching(inst: &LinearSanta, guess: &Rational) -> Result<SantaToMatching> {
    let grouped = geometric_grouping(inst, guess)?;
    let stage2 = range_split(&grouped, inst.resources);
    let stage3 = bundle_values(&stage2, inst.resources);
    let (hypergraph, origin) = gadget_hypergraph(&stage3)?;
    let original_resource = (0..hypergraph.resources).map(|r| (r < inst.resources).then_some(r)).collect();
    Ok(SantaToMatching {
        guess: guess.clone(),
        log_star: log_star(2.0 * inst.resources.max(1) as f64),
        stage_sizes: [
            (stage2.players.len(), stage2.resources),
            (stage3.players.len(), stage3.resources),
            (hypergraph.player_count(), hypergraph.resources),
        ],
        hypergraph,
        origin,
        original_resource,
    })
}

impl SantaToMatching {
    /// Every input resource matched anywhere in a player's chain goes to
    /// that player; leftovers go to the eligible player of least value.
    pub fn allocation_from_matching(&self, inst: &LinearSanta, m: &RelaxedMatching) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); inst.players];
        let mut taken = vec![false; inst.resources];
        for (p, a) in m.assigned.iter().enumerate() {
            for &r in a {
                if let Some(j) = self.original_resource[r] {
                    if !taken[j] && inst.values[self.origin[p]][j] > Rational::zero() {
                        taken[j] = true;
                        sets[self.origin[p]].push(j);
                    }
                }
            }
        }
        linear_top_up(inst, &mut sets, &mut taken);
        sets
    }
}

/// Gives each free resource, most valuable first, to the player with
/// positive value for it and least current value.
pub fn linear_top_up(inst: &LinearSanta, sets: &mut [Vec<usize>], taken: &mut [bool]) {
    let mut current: Vec<Rational> = (0..inst.players).map(|i| inst.value(i, &sets[i])).collect();
    let best_value = |j: usize| (0..inst.players).map(|i| inst.values[i][j].clone()).max().unwrap_or_else(Rational::zero);
    let mut order: Vec<usize> = (0..inst.resources).filter(|&j| !taken[j]).collect();
    order.sort_by(|&a, &b| best_value(b).cmp(&best_value(a)).then(a.cmp(&b)));
    for j in order {
        let who = (0..inst.players)
            .filter(|&i| inst.values[i][j] > Rational::zero())
            .min_by(|&a, &b| current[a].cmp(&current[b]).then(a.cmp(&b)));
        if let Some(i) = who {
            current[i] = &current[i] + &inst.values[i][j];
            sets[i].push(j);
            taken[j] = true;
        }
    }
    for s in sets.iter_mut() {
        s.sort_unstable();
    }
}

/// Candidate optimum guesses `U 2^-t`, `U = min_i sum_j v_ij`, for
/// `t = 0 ..= ceil(log2(2n)) + 1`.
pub fn guess_grid(inst: &LinearSanta) -> Vec<Rational> {
    let upper = (0..inst.players)
        .map(|i| inst.values[i].iter().fold(Rational::zero(), |a, v| a + v))
        .min()
        .unwrap_or_else(Rational::zero);
    if upper.is_zero() {
        return Vec::new();
    }
    let steps = crate::scalar::ceil_log2(2 * inst.resources.max(1)) as usize + 1;
    let mut g = upper;
    let mut out = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        out.push(g.clone());
        g /= Rational::from_integer(2.into());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioAudit {
    pub opt: Rational,
    pub achieved: Rational,
    /// `opt / achieved`, `None` when nothing was achieved but `opt > 0`.
    pub ratio: Option<f64>,
    pub bound: f64,
    pub guess: Option<Rational>,
    pub allocation: Vec<Vec<usize>>,
}

/// Runs the chain for every guess with `solve` as the matching solver and
/// keeps the best mapped allocation. `opt` is supplied by the caller.
pub fn composed_approx_ratio_audit<F>(inst: &LinearSanta, opt: &Rational, mut solve: F) -> Result<RatioAudit>
where
    F: FnMut(&GroupedHypergraph) -> Result<RelaxedMatching>,
{
    let mut best: Option<(Rational, Rational, Vec<Vec<usize>>)> = None;
    for guess in guess_grid(inst) {
        let red = santa_to_matching(inst, &guess)?;
        let m = solve(&red.hypergraph)?;
        let sets = red.allocation_from_matching(inst, &m);
        let value = inst.min_value(&sets);
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, guess, sets));
        }
    }
    let bound = {
        let k = log_star(2.0 * inst.resources.max(1) as f64) as f64;
        (2.0 * k) * (2.0 * k)
    };
    let (achieved, guess, allocation) = match best {
        Some((v, g, s)) => (v, Some(g), s),
        None => (Rational::zero(), None, vec![Vec::new(); inst.players]),
    };
    let ratio = if opt.is_zero() {
        Some(1.0)
    } else if achieved.is_zero() {
        None
    } else {
        ToPrimitive::to_f64(&(opt / &achieved))
    };
    Ok(RatioAudit { opt: opt.clone(), achieved, ratio, bound, guess, allocation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn log_star_values() {
        assert_eq!(log_star(2.0), 1);
        assert_eq!(log_star(4.0), 2);
        assert_eq!(log_star(16.0), 3);
        assert_eq!(log_star(65536.0), 4);
        // One range per iterated log above 1.
        for x in [2.0, 4.0, 6.0, 16.0, 100.0, 65536.0] {
            assert_eq!(iterated_logs(x).len() - 1, log_star(x));
        }
    }

    #[test]
    fn single_edge_three_resources() {
        let gh = GroupedHypergraph::from_plain(1, 3, vec![Configuration::new(0, vec![0, 1, 2])]);
        let red = matching_to_santa(&gh).unwrap();
        assert_eq!(red.santa.players, 1);
        assert_eq!(red.santa.values[0], vec![q(1, 3); 3]);
    }

    #[test]
    fn vertex_in_three_edges_shares_two_resources() {
        let gh = GroupedHypergraph::from_plain(
            1,
            3,
            vec![Configuration::new(0, vec![0]), Configuration::new(0, vec![1]), Configuration::new(0, vec![2])],
        );
        let red = matching_to_santa(&gh).unwrap();
        assert_eq!(red.santa.players, 3);
        assert_eq!(red.private[0].len(), 2);
        for row in &red.santa.values {
            assert!(red.private[0].iter().all(|&r| row[r] == q(1, 1)));
        }
    }

    #[test]
    fn half_value_gadget_has_two_pairs() {
        let stage3 = StageInstance {
            players: vec![StagePlayer { origin: 0, values: BTreeMap::from([(0, 0.5), (1, 0.5)]) }],
            resources: 2,
            original: 2,
        };
        let (gh, origin) = gadget_hypergraph(&stage3).unwrap();
        // Player 0 plus two fresh players; resources 0, 1 plus two fresh.
        assert_eq!(gh.player_count(), 3);
        assert_eq!(gh.resources, 4);
        assert_eq!(origin, vec![0, 0, 0]);
        let big: Vec<&Configuration> = gh.configurations.iter().filter(|c| c.player == 0).collect();
        assert_eq!(big.len(), 1);
        assert_eq!(big[0].resources, vec![2, 3]);
        // Each fresh player: its pair plus both half-value resources.
        for p in 1..3 {
            assert_eq!(gh.configurations.iter().filter(|c| c.player == p).count(), 3);
        }
    }

    #[test]
    fn uniform_values_use_one_range() {
        let inst = LinearSanta::new(vec![vec![q(1, 4); 4]; 2], 4).unwrap();
        let grouped = geometric_grouping(&inst, &q(1, 1)).unwrap();
        let stage2 = range_split(&grouped, 4);
        // Two originals plus one helper each.
        assert_eq!(stage2.players.len(), 4);
    }

    #[test]
    fn normalized_instances_admit_perfect_matchings() {
        use crate::oracles::exact_min_alpha_grouped;
        let cases = vec![
            vec![vec![q(1, 1), q(0, 1), q(0, 1)], vec![q(0, 1), q(1, 2), q(1, 2)]],
            vec![vec![q(1, 2), q(1, 2), q(0, 1), q(0, 1)], vec![q(0, 1), q(1, 4), q(1, 2), q(1, 4)]],
            vec![vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)]],
        ];
        for values in cases {
            let n = values[0].len();
            let inst = LinearSanta::new(values, n).unwrap();
            let red = santa_to_matching(&inst, &q(1, 1)).unwrap();
            let best = exact_min_alpha_grouped(&red.hypergraph).unwrap();
            assert_eq!(best.alpha, q(1, 1), "stages {:?}", red.stage_sizes);
            let sets = red.allocation_from_matching(&inst, &best.matching);
            assert!(inst.check_allocation(&sets).is_empty());
        }
    }

    #[test]
    fn grouping_drops_small_and_floors() {
        let inst = LinearSanta::new(vec![vec![q(3, 4), q(1, 9), q(5, 2)]], 3).unwrap();
        let g = geometric_grouping(&inst, &q(1, 1)).unwrap();
        assert_eq!(g[0], vec![q(1, 2), q(0, 1), q(1, 1)]);
    }
}
