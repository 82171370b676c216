//! Seeded instance generators. Values are small integers held as exact
//! rationals so every generated file round-trips without loss.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::model::{Configuration, Group, GroupedHypergraph, SantaInstance};
use crate::rng::RngSeed;
use crate::submodular::ValuationOracle;
use crate::{ExactInstance, ExactValuation, Rational};

/// Valuation families offered by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Linear,
    Coverage,
    BudgetedAdditive,
    MatroidRank,
}

impl OracleKind {
    pub const ALL: [OracleKind; 4] =
        [OracleKind::Linear, OracleKind::Coverage, OracleKind::BudgetedAdditive, OracleKind::MatroidRank];
}

fn int(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

/// A random monotone submodular valuation over `n` resources.
pub fn random_valuation(kind: OracleKind, n: usize, rng: &mut ChaCha8Rng) -> ExactValuation {
    match kind {
        OracleKind::Linear => ValuationOracle::Linear { values: (0..n).map(|_| int(rng.gen_range(1..=8))).collect() },
        OracleKind::Coverage => {
            let universe = (n + 2).max(3);
            let sets = (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=3.min(universe));
                    let mut items: Vec<usize> = (0..universe).collect();
                    items.shuffle(rng);
                    let mut s = items[..k].to_vec();
                    s.sort_unstable();
                    s
                })
                .collect();
            let weights = (0..universe).map(|_| int(rng.gen_range(1..=5))).collect();
            ValuationOracle::Coverage { sets, weights }
        }
        OracleKind::BudgetedAdditive => {
            let values: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1..=8))).collect();
            let total: u64 = values.iter().map(|v| v.to_integer().try_into().unwrap_or(0u64)).sum();
            let budget = int(rng.gen_range(total / 3 + 1..=total.max(1)));
            ValuationOracle::BudgetedAdditive { values, budget }
        }
        OracleKind::MatroidRank => {
            let blocks_n = (n / 2).max(1);
            let blocks = (0..n).map(|_| rng.gen_range(0..blocks_n)).collect();
            let capacities = (0..blocks_n).map(|_| rng.gen_range(1..=2)).collect();
            ValuationOracle::MatroidRank { blocks, capacities }
        }
    }
}

/// Restricted instance: each resource is available to one random player
/// plus each other player with probability `density`, and every player
/// sees at least one resource.
pub fn santa_instance(kind: OracleKind, players: usize, resources: usize, density: f64, seed: RngSeed) -> Result<ExactInstance> {
    if players == 0 || resources == 0 {
        return contract("instances need at least one player and one resource");
    }
    if !(0.0..=1.0).contains(&density) {
        return contract("density must lie in [0, 1]");
    }
    let mut rng = seed.rng();
    let valuation = random_valuation(kind, resources, &mut rng);
    let mut gamma = vec![Vec::new(); players];
    for r in 0..resources {
        let home = rng.gen_range(0..players);
        for (i, g) in gamma.iter_mut().enumerate() {
            if i == home || rng.gen_bool(density) {
                g.push(r);
            }
        }
    }
    for g in gamma.iter_mut().filter(|g| g.is_empty()) {
        g.push(rng.gen_range(0..resources));
    }
    SantaInstance::new(players, resources, gamma, valuation)
}

pub fn santa_linear(players: usize, resources: usize, density: f64, seed: RngSeed) -> Result<ExactInstance> {
    santa_instance(OracleKind::Linear, players, resources, density, seed)
}

pub fn santa_coverage(players: usize, resources: usize, density: f64, seed: RngSeed) -> Result<ExactInstance> {
    santa_instance(OracleKind::Coverage, players, resources, density, seed)
}

/// Instance whose LP optimum needs clusters: fat resources `0..players-1`
/// each shared by players `k` and `k + 1`, worth between `pool / 8` and
/// `pool / 4`, and per player a pool of `pool` thin resources of value 1,
/// each also open to the next player with probability `share`. Fat values
/// stay below a pool, so the LP splits them between neighbours.
pub fn santa_clustered(players: usize, pool: usize, share: f64, seed: RngSeed) -> Result<ExactInstance> {
    if players < 2 || pool == 0 {
        return contract("clustered instances need two players and a non-empty pool");
    }
    let mut rng = seed.rng();
    let fat = players - 1;
    let resources = fat + players * pool;
    let mut values = Vec::with_capacity(resources);
    let mut gamma = vec![Vec::new(); players];
    for k in 0..fat {
        values.push(int(pool as u64 / 8 + rng.gen_range(0..=pool as u64 / 8)));
        gamma[k].push(k);
        gamma[k + 1].push(k);
    }
    for p in 0..players {
        for t in 0..pool {
            let r = fat + p * pool + t;
            values.push(int(1));
            gamma[p].push(r);
            if p + 1 < players && rng.gen_bool(share) {
                gamma[p + 1].push(r);
            }
        }
    }
    SantaInstance::new(players, resources, gamma, ValuationOracle::Linear { values })
}

/// Draws `size` distinct resources whose degree is still below `ell`,
/// opening new resources when the pool runs dry.
fn draw_resources(size: usize, ell: usize, degree: &mut Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut open: Vec<usize> = (0..degree.len()).filter(|&r| degree[r] < ell).collect();
    open.shuffle(rng);
    open.truncate(size);
    while open.len() < size {
        open.push(degree.len());
        degree.push(0);
    }
    for &r in &open {
        degree[r] += 1;
    }
    open
}

/// Groups of `group_size` players, each group with `ell` consistent sets of
/// configurations of size `1..=max_size`; every resource lies in at most
/// `ell` configurations. `pool` resources exist up front and more are
/// opened when needed.
pub fn hypergraph_grouped(
    groups: usize,
    group_size: usize,
    ell: usize,
    max_size: usize,
    pool: usize,
    seed: RngSeed,
) -> Result<GroupedHypergraph> {
    if groups == 0 || group_size == 0 || ell == 0 || max_size == 0 {
        return contract("groups, group size, ell and size must be positive");
    }
    let mut rng = seed.rng();
    let mut degree = vec![0usize; pool];
    let mut configurations = Vec::new();
    let mut out = Vec::with_capacity(groups);
    for g in 0..groups {
        let players: Vec<usize> = (g * group_size..(g + 1) * group_size).collect();
        let mut consistent_sets = Vec::with_capacity(ell);
        for _ in 0..ell {
            let mut set = Vec::with_capacity(group_size);
            for &p in &players {
                let size = rng.gen_range(1..=max_size);
                set.push(configurations.len());
                configurations.push(Configuration::new(p, draw_resources(size, ell, &mut degree, &mut rng)));
            }
            consistent_sets.push(set);
        }
        out.push(Group { players, consistent_sets });
    }
    let gh = GroupedHypergraph { resources: degree.len(), ell, groups: out, configurations };
    gh.validate()?;
    Ok(gh)
}

/// Single-player groups with `ell` configurations each.
pub fn hypergraph_regular(players: usize, ell: usize, max_size: usize, seed: RngSeed) -> Result<GroupedHypergraph> {
    hypergraph_grouped(players, 1, ell, max_size, players * max_size / 2, seed)
}

/// Hypergraph with configurations spread over several size classes:
/// every player gets `per_player` configurations whose sizes are drawn from
/// `sizes` (inclusive ranges) in turn. Resource degrees stay at most `ell`.
pub fn hypergraph_multiscale(
    players: usize,
    per_player: usize,
    ell: usize,
    sizes: &[(usize, usize)],
    seed: RngSeed,
) -> Result<GroupedHypergraph> {
    if players == 0 || per_player == 0 || sizes.is_empty() || sizes.iter().any(|&(lo, hi)| lo == 0 || lo > hi) {
        return contract("multiscale generator needs players, configurations and non-empty size ranges");
    }
    let mut rng = seed.rng();
    let mut degree = Vec::new();
    let mut configurations = Vec::new();
    for p in 0..players {
        for t in 0..per_player {
            let (lo, hi) = sizes[(p * per_player + t) % sizes.len()];
            let size = rng.gen_range(lo..=hi);
            configurations.push(Configuration::new(p, draw_resources(size, ell, &mut degree, &mut rng)));
        }
    }
    let mut gh = GroupedHypergraph::from_plain(players, degree.len(), configurations);
    gh.ell = ell;
    gh.validate()?;
    Ok(gh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn generated_instances_validate() {
        for kind in OracleKind::ALL {
            for s in 0..5 {
                let inst = santa_instance(kind, 3, 6, 0.3, RngSeed(s)).unwrap();
                assert!(validate_instance(&inst).is_empty());
                assert!(inst.gamma.iter().all(|g| !g.is_empty()));
            }
        }
    }

    #[test]
    fn regular_generator_honors_degree() {
        let gh = hypergraph_regular(6, 4, 5, RngSeed(1)).unwrap();
        gh.check_regular().unwrap();
        let max_degree = gh.incidence().iter().map(Vec::len).max().unwrap();
        assert!(max_degree <= 4);
        assert_eq!(gh, hypergraph_regular(6, 4, 5, RngSeed(1)).unwrap());
    }

    #[test]
    fn multiscale_sizes_follow_ranges() {
        let gh = hypergraph_multiscale(3, 2, 16, &[(2, 4), (300, 320)], RngSeed(2)).unwrap();
        assert!(gh.configurations.iter().step_by(2).all(|c| (2..=4).contains(&c.len())));
        assert!(gh.configurations.iter().skip(1).step_by(2).all(|c| (300..=320).contains(&c.len())));
        assert!(gh.incidence().iter().all(|i| i.len() <= 16));
    }
}
