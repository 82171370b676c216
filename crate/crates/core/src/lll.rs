//! Choice of one consistent set per group such that no configuration is
//! crossed much more often than expected, found by Moser–Tardos resampling.
//!
//! For a configuration `C` of class `k` and a level `h <= k`,
//! `X_C^(h)` counts, over the selected configurations `K` of class `h`, the
//! resources of `K ∩ C ∩ R_h`. The event `B_C^(h)` fires when `X_C^(h)`
//! reaches `E[X_C^(h)] + 63 |C ∩ R_h| ln ell` (for `k - 5 <= h`) or
//! `E[X_C^(h)] + 135 |C ∩ R_h| ln(ell) / ell` (for `h <= k - 6`). Its variables
//! are the groups owning a class-`h` configuration that meets `C ∩ R_h`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::model::GroupedHypergraph;
use crate::rng::RngSeed;
use crate::sampling::{ResourceHierarchy, SizeClasses};
use crate::Rational;

/// For each level `h`, the class-`h` configurations containing each
/// resource of `R_h`.
#[derive(Debug, Clone)]
pub struct LevelIndex {
    pub inc: Vec<Vec<Vec<usize>>>,
}

impl LevelIndex {
    pub fn new(gh: &GroupedHypergraph, classes: &SizeClasses, hier: &ResourceHierarchy) -> Self {
        let mut inc = vec![vec![Vec::new(); gh.resources]; hier.depth + 1];
        for (c, cfg) in gh.configurations.iter().enumerate() {
            let h = classes.class_of[c];
            if h > hier.depth {
                continue;
            }
            for &r in &cfg.resources {
                if hier.contains(h, r) {
                    inc[h][r].push(c);
                }
            }
        }
        LevelIndex { inc }
    }
}

/// One consistent set index per group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub choice: Vec<usize>,
    pub rounds: usize,
    pub resamples: usize,
}

impl Selection {
    /// Selected configurations, `K_i` for every player `i`.
    pub fn player_configs(&self, gh: &GroupedHypergraph) -> Vec<usize> {
        let mut out = vec![usize::MAX; gh.player_count()];
        for (g, group) in gh.groups.iter().enumerate() {
            for (k, &p) in group.players.iter().enumerate() {
                out[p] = group.consistent_sets[self.choice[g]][k];
            }
        }
        out
    }

    pub fn selected_mask(&self, gh: &GroupedHypergraph) -> Vec<bool> {
        let mut mask = vec![false; gh.configurations.len()];
        for (g, group) in gh.groups.iter().enumerate() {
            for &c in &group.consistent_sets[self.choice[g]] {
                mask[c] = true;
            }
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BadEvent {
    pub config: usize,
    pub level: usize,
    pub class: usize,
    /// `|C ∩ R_h|`.
    pub size: usize,
    pub expectation: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct BadEventLedger {
    pub ell: usize,
    pub slack: f64,
    pub events: Vec<BadEvent>,
}

/// `E[X_C^(h)]` with each group choosing uniformly among its consistent
/// sets, as an exact rational.
pub fn expected_x(gh: &GroupedHypergraph, classes: &SizeClasses, hier: &ResourceHierarchy, c: usize, h: usize) -> Rational {
    let index = LevelIndex::new(gh, classes, hier);
    expected_x_indexed(gh, &gh.config_group(), &index, hier, c, h)
}

fn expected_x_indexed(
    gh: &GroupedHypergraph,
    owner: &[usize],
    index: &LevelIndex,
    hier: &ResourceHierarchy,
    c: usize,
    h: usize,
) -> Rational {
    if h > hier.depth {
        return Rational::from_integer(0.into());
    }
    // Hit counts keyed by the owning group's number of consistent sets.
    let mut by_den: BTreeMap<usize, u64> = BTreeMap::new();
    for &r in &gh.configurations[c].resources {
        if hier.contains(h, r) {
            for &o in &index.inc[h][r] {
                *by_den.entry(gh.groups[owner[o]].consistent_sets.len()).or_default() += 1;
            }
        }
    }
    by_den
        .into_iter()
        .map(|(den, hits)| Rational::new(BigInt::from(hits), BigInt::from(den)))
        .fold(Rational::from_integer(0.into()), |a, b| a + b)
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::INFINITY)
}

/// `slack * 63 |C ∩ R_h| ln ell` near the configuration's own class, and
/// `slack * 135 |C ∩ R_h| ln(ell) / ell` at least six classes below it.
pub fn deviation(size: usize, ell: usize, class: usize, level: usize, slack: f64) -> f64 {
    let ln = (ell as f64).ln();
    if level + 5 >= class {
        slack * 63.0 * size as f64 * ln
    } else {
        slack * 135.0 * size as f64 * ln / ell as f64
    }
}

/// LLL weight `exp(-|C ∩ R_h| / ell^9 - 18 ln ell)`.
pub fn event_weight(size: usize, ell: usize) -> f64 {
    let l = ell as f64;
    (-(size as f64) / l.powi(9) - 18.0 * l.ln()).exp()
}

impl BadEventLedger {
    /// Materializes the events `(C, h)` whose `X` can be nonzero.
    pub fn build(
        gh: &GroupedHypergraph,
        classes: &SizeClasses,
        hier: &ResourceHierarchy,
        index: &LevelIndex,
        slack: f64,
    ) -> Result<Self> {
        if classes.class_of.len() != gh.configurations.len() {
            return contract("size classes were computed for a different hypergraph");
        }
        if slack != 1.0 {
            log::info!("bad-event thresholds use slack factor {slack}");
        }
        let owner = gh.config_group();
        let ell = hier.ell;
        let mut events = Vec::new();
        for (c, cfg) in gh.configurations.iter().enumerate() {
            let k = classes.class_of[c];
            for h in 0..=k.min(hier.depth) {
                let mut size = 0;
                let mut reachable = false;
                for &r in &cfg.resources {
                    if hier.contains(h, r) {
                        size += 1;
                        reachable |= !index.inc[h][r].is_empty();
                    }
                }
                if !reachable {
                    continue;
                }
                let expectation = rational_to_f64(&expected_x_indexed(gh, &owner, index, hier, c, h));
                let threshold = expectation + deviation(size, ell, k, h, slack);
                events.push(BadEvent { config: c, level: h, class: k, size, expectation, threshold });
            }
        }
        Ok(BadEventLedger { ell, slack, events })
    }

    /// Groups whose choice can change `X` of event `e`.
    pub fn variables(&self, gh: &GroupedHypergraph, owner: &[usize], index: &LevelIndex, hier: &ResourceHierarchy, e: usize) -> Vec<usize> {
        let ev = &self.events[e];
        let mut out: Vec<usize> = gh.configurations[ev.config]
            .resources
            .iter()
            .filter(|&&r| hier.contains(ev.level, r))
            .flat_map(|&r| index.inc[ev.level][r].iter().map(|&o| owner[o]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Per level, how many selected class-`h` configurations contain each
/// resource of `R_h`.
struct Cover {
    counts: Vec<Vec<u32>>,
}

impl Cover {
    fn new(gh: &GroupedHypergraph, classes: &SizeClasses, hier: &ResourceHierarchy, sel: &Selection) -> Self {
        let mut cover = Cover { counts: vec![vec![0; gh.resources]; hier.depth + 1] };
        for (g, group) in gh.groups.iter().enumerate() {
            cover.apply(gh, classes, hier, &group.consistent_sets[sel.choice[g]], 1);
        }
        cover
    }

    fn apply(&mut self, gh: &GroupedHypergraph, classes: &SizeClasses, hier: &ResourceHierarchy, set: &[usize], sign: i32) {
        for &c in set {
            let h = classes.class_of[c];
            if h > hier.depth {
                continue;
            }
            for &r in &gh.configurations[c].resources {
                if hier.contains(h, r) {
                    let v = &mut self.counts[h][r];
                    *v = (*v as i32 + sign) as u32;
                }
            }
        }
    }

    fn x(&self, gh: &GroupedHypergraph, hier: &ResourceHierarchy, c: usize, h: usize) -> u64 {
        gh.configurations[c]
            .resources
            .iter()
            .filter(|&&r| hier.contains(h, r))
            .map(|&r| self.counts[h][r] as u64)
            .sum()
    }
}

/// `X_C^(h)` for the given selection.
pub fn x_value(gh: &GroupedHypergraph, classes: &SizeClasses, hier: &ResourceHierarchy, sel: &Selection, c: usize, h: usize) -> u64 {
    Cover::new(gh, classes, hier, sel).x(gh, hier, c, h)
}

/// Indices of the ledger events that fire under `sel`.
pub fn evaluate_bad_events(
    gh: &GroupedHypergraph,
    classes: &SizeClasses,
    hier: &ResourceHierarchy,
    ledger: &BadEventLedger,
    sel: &Selection,
) -> Vec<usize> {
    let cover = Cover::new(gh, classes, hier, sel);
    (0..ledger.events.len())
        .filter(|&e| {
            let ev = &ledger.events[e];
            cover.x(gh, hier, ev.config, ev.level) as f64 >= ev.threshold
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LllOptions {
    pub slack: f64,
    pub max_rounds: usize,
}

impl Default for LllOptions {
    fn default() -> Self {
        LllOptions { slack: 1.0, max_rounds: 10_000 }
    }
}

pub fn uniform_selection(gh: &GroupedHypergraph, seed: RngSeed) -> Selection {
    let mut rng = seed.rng();
    let choice = gh.groups.iter().map(|g| rng.gen_range(0..g.consistent_sets.len().max(1))).collect();
    Selection { choice, rounds: 0, resamples: 0 }
}

/// Starts from a uniform selection and, while some event fires, redraws the
/// choice of every group in the first fired event's variable set.
pub fn select_moser_tardos(
    gh: &GroupedHypergraph,
    classes: &SizeClasses,
    hier: &ResourceHierarchy,
    opts: &LllOptions,
    seed: RngSeed,
) -> Result<Selection> {
    gh.validate()?;
    if let Some(g) = gh.groups.iter().position(|g| g.consistent_sets.is_empty()) {
        return contract(format!("group {g} has no consistent set"));
    }
    let index = LevelIndex::new(gh, classes, hier);
    let ledger = BadEventLedger::build(gh, classes, hier, &index, opts.slack)?;
    let owner = gh.config_group();
    let mut sel = uniform_selection(gh, seed.derive(0));
    let mut rng = seed.derive(1).rng();
    let mut cover = Cover::new(gh, classes, hier, &sel);
    let fired = |cover: &Cover, e: &BadEvent| cover.x(gh, hier, e.config, e.level) as f64 >= e.threshold;
    for round in 0..opts.max_rounds {
        let Some(e) = ledger.events.iter().position(|ev| fired(&cover, ev)) else {
            sel.rounds = round;
            return Ok(sel);
        };
        for g in ledger.variables(gh, &owner, &index, hier, e) {
            let next = rng.gen_range(0..gh.groups[g].consistent_sets.len());
            if next != sel.choice[g] {
                cover.apply(gh, classes, hier, &gh.groups[g].consistent_sets[sel.choice[g]], -1);
                cover.apply(gh, classes, hier, &gh.groups[g].consistent_sets[next], 1);
                sel.choice[g] = next;
            }
            sel.resamples += 1;
        }
    }
    let surviving: Vec<String> = ledger
        .events
        .iter()
        .filter(|ev| fired(&cover, ev))
        .map(|ev| format!("C{}@h{}", ev.config, ev.level))
        .collect();
    if surviving.is_empty() {
        sel.rounds = opts.max_rounds;
        return Ok(sel);
    }
    Err(Error::RoundLimit { rounds: opts.max_rounds, surviving })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub config: usize,
    pub from_level: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of checking, for every `C` of class `k` and `0 <= j <= k`,
/// `sum_{j<=h<=k} ell^h X_C^(h) <= sum_{j<=h<=k} ell^h E[X_C^(h)] + 1000 ((d+ell)/ell) ln(ell) |C|`
/// with `d` the number of levels, and the same sum over selected `C`
/// against `2000 ((d+ell)/ell) ln(ell) |C|`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionAudit {
    pub checks: usize,
    pub violations: Vec<AuditViolation>,
    pub selected_violations: Vec<AuditViolation>,
    /// Largest `lhs / (additive term)` over selected configurations.
    pub worst_selected_ratio: f64,
}

pub fn selection_intersection_bound(
    gh: &GroupedHypergraph,
    classes: &SizeClasses,
    hier: &ResourceHierarchy,
    sel: &Selection,
    slack: f64,
) -> IntersectionAudit {
    let index = LevelIndex::new(gh, classes, hier);
    let owner = gh.config_group();
    let cover = Cover::new(gh, classes, hier, sel);
    let selected = sel.selected_mask(gh);
    let ell = hier.ell as f64;
    let levels = (hier.depth + 1) as f64;
    let unit = slack * ((levels + ell) / ell) * ell.ln();
    let mut audit = IntersectionAudit { checks: 0, violations: Vec::new(), selected_violations: Vec::new(), worst_selected_ratio: 0.0 };
    for (c, cfg) in gh.configurations.iter().enumerate() {
        let k = classes.class_of[c].min(hier.depth);
        let size = cfg.len() as f64;
        let mut lhs = 0.0;
        let mut expect = 0.0;
        for j in (0..=k).rev() {
            let scale = ell.powi(j as i32);
            lhs += scale * cover.x(gh, hier, c, j) as f64;
            expect += scale * rational_to_f64(&expected_x_indexed(gh, &owner, &index, hier, c, j));
            audit.checks += 1;
            let rhs = expect + 1000.0 * unit * size;
            if lhs > rhs * (1.0 + 1e-12) {
                audit.violations.push(AuditViolation { config: c, from_level: j, lhs, rhs });
            }
            if selected[c] {
                let rhs = 2000.0 * unit * size;
                if size > 0.0 {
                    audit.worst_selected_ratio = audit.worst_selected_ratio.max(lhs / (unit * size));
                }
                if lhs > rhs * (1.0 + 1e-12) {
                    audit.selected_violations.push(AuditViolation { config: c, from_level: j, lhs, rhs });
                }
            }
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Configuration, Group};
    use crate::sampling::sample_hierarchy;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    /// Two groups of one player with two configurations each; group 1's
    /// configurations both meet configuration 0.
    fn two_groups() -> GroupedHypergraph {
        GroupedHypergraph {
            resources: 6,
            ell: 2,
            groups: vec![
                Group { players: vec![0], consistent_sets: vec![vec![0], vec![1]] },
                Group { players: vec![1], consistent_sets: vec![vec![2], vec![3]] },
            ],
            configurations: vec![
                Configuration::new(0, vec![0, 1, 2]),
                Configuration::new(0, vec![3]),
                Configuration::new(1, vec![0, 1]),
                Configuration::new(1, vec![2, 4, 5]),
            ],
        }
    }

    fn flat(gh: &GroupedHypergraph) -> (SizeClasses, ResourceHierarchy) {
        let classes = SizeClasses::new(gh, 2, 3).unwrap();
        let hier = sample_hierarchy(gh.resources, 2, classes.depth, RngSeed(0));
        (classes, hier)
    }

    #[test]
    fn expectation_by_enumeration() {
        let gh = two_groups();
        let (classes, hier) = flat(&gh);
        // Config 0 meets itself (3, prob 1/2), config 2 (2, prob 1/2) and
        // config 3 (1, prob 1/2).
        assert_eq!(expected_x(&gh, &classes, &hier, 0, 0), q(3, 1));
        let mut total = 0u64;
        for a in 0..2 {
            for b in 0..2 {
                let sel = Selection { choice: vec![a, b], rounds: 0, resamples: 0 };
                total += x_value(&gh, &classes, &hier, &sel, 0, 0);
            }
        }
        assert_eq!(q(total as i64, 4), q(3, 1));
    }

    #[test]
    fn vacuous_thresholds_never_fire() {
        let gh = two_groups();
        let (classes, hier) = flat(&gh);
        let index = LevelIndex::new(&gh, &classes, &hier);
        let ledger = BadEventLedger::build(&gh, &classes, &hier, &index, 1.0).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let sel = Selection { choice: vec![a, b], rounds: 0, resamples: 0 };
                assert!(evaluate_bad_events(&gh, &classes, &hier, &ledger, &sel).is_empty());
            }
        }
    }

    #[test]
    fn zero_slack_fires_above_expectation() {
        let gh = two_groups();
        let (classes, hier) = flat(&gh);
        let index = LevelIndex::new(&gh, &classes, &hier);
        let ledger = BadEventLedger::build(&gh, &classes, &hier, &index, 0.0).unwrap();
        // Selecting configs 0 and 2 gives X_0 = 3 + 2 = 5 >= 3.
        let sel = Selection { choice: vec![0, 0], rounds: 0, resamples: 0 };
        let fired = evaluate_bad_events(&gh, &classes, &hier, &ledger, &sel);
        assert!(fired.iter().any(|&e| ledger.events[e].config == 0));
        let owner = gh.config_group();
        let e0 = ledger.events.iter().position(|e| e.config == 0).unwrap();
        assert_eq!(ledger.variables(&gh, &owner, &index, &hier, e0), vec![0, 1]);
    }

    #[test]
    fn disjoint_instance_needs_no_resampling() {
        let gh = GroupedHypergraph::from_plain(
            2,
            4,
            vec![
                Configuration::new(0, vec![0]),
                Configuration::new(0, vec![1]),
                Configuration::new(1, vec![2]),
                Configuration::new(1, vec![3]),
            ],
        );
        let (classes, hier) = flat(&gh);
        let sel = select_moser_tardos(&gh, &classes, &hier, &LllOptions::default(), RngSeed(5)).unwrap();
        assert_eq!(sel.resamples, 0);
        let audit = selection_intersection_bound(&gh, &classes, &hier, &sel, 1.0);
        assert!(audit.violations.is_empty() && audit.selected_violations.is_empty());
    }

    #[test]
    fn round_limit_reports_survivors() {
        let gh = two_groups();
        let (classes, hier) = flat(&gh);
        let opts = LllOptions { slack: -1.0, max_rounds: 3 };
        match select_moser_tardos(&gh, &classes, &hier, &opts, RngSeed(1)) {
            Err(Error::RoundLimit { rounds, surviving }) => {
                assert_eq!(rounds, 3);
                assert!(!surviving.is_empty());
            }
            other => panic!("expected a round limit, got {other:?}"),
        }
    }

    #[test]
    fn weights_are_tiny() {
        for ell in [2usize, 16, 1000] {
            for size in [1usize, 100, 100_000] {
                assert!(event_weight(size, ell) <= (ell as f64).powi(-18) * (1.0 + 1e-12));
            }
        }
    }
}
