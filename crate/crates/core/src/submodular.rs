//! Monotone submodular value oracles and budgeted maximization.
//!
//! [`knapsack_max`] is partial enumeration followed by density greedy: every
//! feasible set smaller than `depth` is a candidate, and every feasible seed
//! of exactly `depth` elements is completed greedily. With `depth = 3` the
//! result is within `1 - 1/e` of optimal. [`strict_knapsack_max`] solves the
//! variant with a strict budget by running the non-strict routine on elements
//! cheaper than the budget and halving a tight answer.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{contract, structural, Result};
use crate::scalar::Scalar;

/// Value oracle over resource ids `0..ground_size()`. All kinds are monotone,
/// submodular and normalized except possibly [`ValuationOracle::Table`],
/// which stores arbitrary values and exists so that validation can be
/// exercised.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationOracle<S> {
    /// `f(S) = sum of values`.
    Linear { values: Vec<S> },
    /// Weighted coverage: resource `j` covers universe items `sets[j]`, and
    /// `f(S)` is the total weight of covered items.
    Coverage { sets: Vec<Vec<usize>>, weights: Vec<S> },
    /// `f(S) = min(budget, sum of values)`.
    BudgetedAdditive { values: Vec<S>, budget: S },
    /// Rank of a partition matroid: `blocks[j]` is the block of resource
    /// `j`, and block `b` contributes at most `capacities[b]`.
    MatroidRank { blocks: Vec<usize>, capacities: Vec<usize> },
    /// Explicit table indexed by subset bitmask.
    Table { ground: usize, values: Vec<S> },
}

impl<S: Scalar> ValuationOracle<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            ValuationOracle::Linear { .. } => "linear",
            ValuationOracle::Coverage { .. } => "coverage",
            ValuationOracle::BudgetedAdditive { .. } => "budgeted-additive",
            ValuationOracle::MatroidRank { .. } => "matroid-rank",
            ValuationOracle::Table { .. } => "table",
        }
    }

    pub fn ground_size(&self) -> usize {
        match self {
            ValuationOracle::Linear { values } => values.len(),
            ValuationOracle::Coverage { sets, .. } => sets.len(),
            ValuationOracle::BudgetedAdditive { values, .. } => values.len(),
            ValuationOracle::MatroidRank { blocks, .. } => blocks.len(),
            ValuationOracle::Table { ground, .. } => *ground,
        }
    }

    /// Checks the internal shape of the oracle.
    pub fn check_shape(&self) -> Result<()> {
        match self {
            ValuationOracle::Linear { values } => {
                if values.iter().any(|v| v.strictly_negative()) {
                    return structural("linear valuation has a negative value");
                }
            }
            ValuationOracle::Coverage { sets, weights } => {
                if let Some(u) = sets.iter().flatten().find(|&&u| u >= weights.len()) {
                    return structural(format!("coverage item {u} out of range"));
                }
                if weights.iter().any(|w| w.strictly_negative()) {
                    return structural("coverage weight is negative");
                }
            }
            ValuationOracle::BudgetedAdditive { values, budget } => {
                if values.iter().any(|v| v.strictly_negative()) || budget.strictly_negative() {
                    return structural("budgeted-additive valuation has a negative entry");
                }
            }
            ValuationOracle::MatroidRank { blocks, capacities } => {
                if let Some(b) = blocks.iter().find(|&&b| b >= capacities.len()) {
                    return structural(format!("matroid block {b} out of range"));
                }
            }
            ValuationOracle::Table { ground, values } => {
                if *ground > 20 || values.len() != 1usize << ground {
                    return structural("table valuation must list 2^ground values, ground <= 20");
                }
            }
        }
        Ok(())
    }

    /// `f(set)`; duplicates in `set` are ignored.
    pub fn eval(&self, set: &[usize]) -> S {
        let mut ev = self.evaluator();
        for &j in set {
            ev.add(j);
        }
        ev.value().clone()
    }

    pub fn singleton(&self, j: usize) -> S {
        match self {
            ValuationOracle::Linear { values } => values[j].clone(),
            _ => self.eval(&[j]),
        }
    }

    /// `f(set + j) - f(set)`.
    pub fn marginal(&self, j: usize, set: &[usize]) -> S {
        let mut ev = self.evaluator();
        for &k in set {
            ev.add(k);
        }
        ev.gain(j)
    }

    /// Incremental evaluator starting from the empty set.
    pub fn evaluator(&self) -> Evaluator<'_, S> {
        let n = self.ground_size();
        let counts = match self {
            ValuationOracle::Coverage { weights, .. } => vec![0; weights.len()],
            ValuationOracle::MatroidRank { capacities, .. } => vec![0; capacities.len()],
            _ => Vec::new(),
        };
        let value = match self {
            ValuationOracle::Table { values, .. } => values[0].clone(),
            _ => S::zero(),
        };
        Evaluator { oracle: self, member: vec![false; n], counts, sum: S::zero(), mask: 0, value }
    }
}

/// Tracks `f(S)` for a growing set `S` so that marginal gains are cheap.
#[derive(Debug, Clone)]
pub struct Evaluator<'a, S> {
    oracle: &'a ValuationOracle<S>,
    member: Vec<bool>,
    counts: Vec<u32>,
    sum: S,
    mask: usize,
    value: S,
}

impl<S: Scalar> Evaluator<'_, S> {
    pub fn value(&self) -> &S {
        &self.value
    }

    pub fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    pub fn gain(&self, j: usize) -> S {
        if self.member[j] {
            return S::zero();
        }
        match self.oracle {
            ValuationOracle::Linear { values } => values[j].clone(),
            ValuationOracle::Coverage { sets, weights } => sets[j]
                .iter()
                .filter(|&&u| self.counts[u] == 0)
                .fold(S::zero(), |acc, &u| acc + weights[u].clone()),
            ValuationOracle::BudgetedAdditive { values, budget } => {
                let before = min_s(&self.sum, budget);
                let after = min_s(&(self.sum.clone() + values[j].clone()), budget);
                after - before
            }
            ValuationOracle::MatroidRank { blocks, capacities } => {
                let b = blocks[j];
                if (self.counts[b] as usize) < capacities[b] {
                    S::one()
                } else {
                    S::zero()
                }
            }
            ValuationOracle::Table { values, .. } => {
                values[self.mask | (1 << j)].clone() - self.value.clone()
            }
        }
    }

    pub fn add(&mut self, j: usize) {
        if self.member[j] {
            return;
        }
        let g = self.gain(j);
        self.member[j] = true;
        match self.oracle {
            ValuationOracle::Coverage { sets, .. } => {
                for &u in &sets[j] {
                    self.counts[u] += 1;
                }
            }
            ValuationOracle::BudgetedAdditive { values, .. } => {
                self.sum = self.sum.clone() + values[j].clone();
            }
            ValuationOracle::MatroidRank { blocks, .. } => self.counts[blocks[j]] += 1,
            ValuationOracle::Table { .. } => self.mask |= 1 << j,
            ValuationOracle::Linear { .. } => {}
        }
        self.value = self.value.clone() + g;
    }
}

fn min_s<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `(1 - 1/e) / 2`, the guarantee of [`strict_knapsack_max`].
pub fn strict_factor() -> f64 {
    (1.0 - (-1.0f64).exp()) / 2.0
}

/// Approximately maximizes `f(S)` over `S ⊆ ground` with `sum costs <= budget`.
/// Costs are indexed by resource id and must be non-negative. Ties between
/// equally good sets go to the one found first in lexicographic seed order;
/// greedy ties go to the smallest id.
pub fn knapsack_max<S: Scalar>(
    oracle: &ValuationOracle<S>,
    ground: &[usize],
    costs: &[S],
    budget: &S,
    depth: usize,
) -> Result<Vec<usize>> {
    knapsack_with_base(oracle, &[], ground, costs, budget, depth)
}

/// Approximately maximizes `f(S)` over `S ⊆ ground` with `sum costs < budget`.
/// Zero-cost elements are always included; they never affect feasibility and
/// the remaining problem is solved on the contracted function.
pub fn strict_knapsack_max<S: Scalar>(
    oracle: &ValuationOracle<S>,
    ground: &[usize],
    costs: &[S],
    budget: &S,
    depth: usize,
) -> Result<Vec<usize>> {
    check_costs(oracle, ground, costs)?;
    if !budget.strictly_positive() {
        return Ok(Vec::new());
    }
    let mut free: Vec<usize> = ground.iter().copied().filter(|&j| costs[j].is_zero()).collect();
    let cand: Vec<usize> = ground
        .iter()
        .copied()
        .filter(|&j| costs[j].strictly_positive() && costs[j] < *budget)
        .collect();
    let mut picked = knapsack_with_base(oracle, &free, &cand, costs, budget, depth)?;
    let spent = picked.iter().fold(S::zero(), |acc, &j| acc + costs[j].clone());
    if picked.len() > 1 && spent >= *budget {
        let half = picked.len().div_ceil(2);
        let (a, b) = picked.split_at(half);
        let value_with = |part: &[usize]| {
            let mut ev = oracle.evaluator();
            free.iter().chain(part).for_each(|&j| ev.add(j));
            ev.value().clone()
        };
        picked = if value_with(a) >= value_with(b) { a.to_vec() } else { b.to_vec() };
    }
    free.extend(picked);
    free.sort_unstable();
    free.dedup();
    Ok(free)
}

fn check_costs<S: Scalar>(oracle: &ValuationOracle<S>, ground: &[usize], costs: &[S]) -> Result<()> {
    let n = oracle.ground_size();
    if let Some(&j) = ground.iter().find(|&&j| j >= n || j >= costs.len()) {
        return structural(format!("resource {j} outside the oracle ground set or cost vector"));
    }
    if ground.iter().any(|&j| costs[j].strictly_negative()) {
        return contract("knapsack costs must be non-negative");
    }
    Ok(())
}

fn knapsack_with_base<S: Scalar>(
    oracle: &ValuationOracle<S>,
    base: &[usize],
    ground: &[usize],
    costs: &[S],
    budget: &S,
    depth: usize,
) -> Result<Vec<usize>> {
    check_costs(oracle, ground, costs)?;
    if depth == 0 {
        return contract("enumeration depth must be at least 1");
    }
    let mut items: Vec<usize> = ground.iter().copied().filter(|&j| costs[j] <= *budget).collect();
    items.sort_unstable();
    items.dedup();

    let mut start = oracle.evaluator();
    base.iter().for_each(|&j| start.add(j));

    let mut best: Vec<usize> = Vec::new();
    let mut best_value = start.value().clone();
    let mut seed = Vec::with_capacity(depth);
    enumerate_seeds(&items, depth, 0, &mut seed, &mut |seed: &[usize]| {
        let cost = seed.iter().fold(S::zero(), |acc, &j| acc + costs[j].clone());
        if cost > *budget {
            return;
        }
        let mut ev = start.clone();
        seed.iter().for_each(|&j| ev.add(j));
        let mut set = seed.to_vec();
        if seed.len() == depth {
            greedy_complete(&mut ev, &mut set, &items, costs, budget, cost);
        }
        if *ev.value() > best_value {
            best_value = ev.value().clone();
            set.sort_unstable();
            best = set;
        }
    });
    Ok(best)
}

/// Visits every subset of `items` with at most `depth` elements in
/// lexicographic order.
fn enumerate_seeds(
    items: &[usize],
    depth: usize,
    from: usize,
    seed: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    visit(seed);
    if seed.len() == depth {
        return;
    }
    for k in from..items.len() {
        seed.push(items[k]);
        enumerate_seeds(items, depth, k + 1, seed, visit);
        seed.pop();
    }
}

/// Greedy by gain per unit cost, lazily: gains only shrink as the set
/// grows, so a stale heap entry bounds the true density and the top entry
/// is taken once its refreshed key still beats the runner-up. Ties go to
/// the smallest id, exactly as a full scan would. A non-submodular table
/// breaks the bound and may get a different, still feasible, set.
fn greedy_complete<S: Scalar>(
    ev: &mut Evaluator<'_, S>,
    set: &mut Vec<usize>,
    items: &[usize],
    costs: &[S],
    budget: &S,
    mut spent: S,
) {
    let mut heap: BinaryHeap<Density<S>> = items
        .iter()
        .copied()
        .filter(|&j| !ev.contains(j))
        .map(|j| Density { gain: ev.gain(j), cost: costs[j].clone(), id: j })
        .collect();
    while let Some(top) = heap.pop() {
        let fresh = Density { gain: ev.gain(top.id), cost: top.cost, id: top.id };
        if heap.peek().is_some_and(|next| *next > fresh) {
            heap.push(fresh);
            continue;
        }
        if !fresh.gain.strictly_positive() {
            break;
        }
        let next = spent.clone() + fresh.cost.clone();
        if next <= *budget {
            spent = next;
            ev.add(fresh.id);
            set.push(fresh.id);
        }
    }
}

/// Heap key: higher density first, then the smaller id.
struct Density<S> {
    gain: S,
    cost: S,
    id: usize,
}

impl<S: Scalar> Ord for Density<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        if density_gt(&self.gain, &self.cost, &other.gain, &other.cost) {
            Ordering::Greater
        } else if density_gt(&other.gain, &other.cost, &self.gain, &self.cost) {
            Ordering::Less
        } else {
            other.id.cmp(&self.id)
        }
    }
}

impl<S: Scalar> PartialOrd for Density<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> PartialEq for Density<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for Density<S> {}

/// `ga / ca > gb / cb` with `x / 0 = +inf` for positive `x`.
fn density_gt<S: Scalar>(ga: &S, ca: &S, gb: &S, cb: &S) -> bool {
    match (ca.is_zero(), cb.is_zero()) {
        (true, true) => ga > gb,
        (true, false) => ga.strictly_positive(),
        (false, true) => !gb.strictly_positive() && ga > gb,
        (false, false) => ga.clone() * cb.clone() > gb.clone() * ca.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coverage() -> ValuationOracle<f64> {
        ValuationOracle::Coverage {
            sets: vec![vec![0, 1], vec![1, 2], vec![3]],
            weights: vec![1.0; 4],
        }
    }

    #[test]
    fn coverage_eval_and_marginal() {
        let f = coverage();
        assert_eq!(f.eval(&[0, 1]), 3.0);
        assert_eq!(f.marginal(1, &[0]), 1.0);
        assert_eq!(f.eval(&[]), 0.0);
    }

    #[test]
    fn other_kinds_evaluate() {
        let b = ValuationOracle::BudgetedAdditive { values: vec![3.0, 4.0], budget: 5.0 };
        assert_eq!(b.eval(&[0, 1]), 5.0);
        assert_eq!(b.marginal(1, &[0]), 2.0);
        let m: ValuationOracle<f64> =
            ValuationOracle::MatroidRank { blocks: vec![0, 0, 1], capacities: vec![1, 1] };
        assert_eq!(m.eval(&[0, 1, 2]), 2.0);
        let t = ValuationOracle::Table { ground: 2, values: vec![0.0, 1.0, 2.0, 2.5] };
        assert_eq!(t.eval(&[0, 1]), 2.5);
        assert_eq!(t.marginal(0, &[1]), 0.5);
    }

    #[test]
    fn knapsack_prefers_pair_over_single() {
        let f = ValuationOracle::Linear { values: vec![3.0, 2.0, 2.0] };
        let got = knapsack_max(&f, &[0, 1, 2], &[3.0, 2.0, 2.0], &4.0, 3).unwrap();
        assert_eq!(got, vec![1, 2]);
    }

    #[test]
    fn strict_budget_equality_splits() {
        let f = ValuationOracle::Linear { values: vec![1.0, 1.0] };
        let got = strict_knapsack_max(&f, &[0, 1], &[1.0, 1.0], &2.0, 3).unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn strict_with_zero_budget_is_empty() {
        let f = ValuationOracle::Linear { values: vec![1.0, 1.0] };
        assert!(strict_knapsack_max(&f, &[0, 1], &[0.0, 0.0], &0.0, 3).unwrap().is_empty());
    }

    #[test]
    fn zero_cost_items_are_free() {
        let f = ValuationOracle::Linear { values: vec![1.0, 5.0, 2.0] };
        let got = strict_knapsack_max(&f, &[0, 1, 2], &[0.0, 1.0, 0.6], &1.0, 3).unwrap();
        assert_eq!(got, vec![0, 2]);
    }

    #[test]
    fn rejects_negative_costs() {
        let f = ValuationOracle::Linear { values: vec![1.0] };
        assert!(knapsack_max(&f, &[0], &[-1.0], &1.0, 3).is_err());
    }

    fn brute_force(f: &ValuationOracle<f64>, costs: &[f64], budget: f64, strict: bool) -> f64 {
        let n = costs.len();
        (0u32..1 << n)
            .filter_map(|mask| {
                let set: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
                let c: f64 = set.iter().map(|&j| costs[j]).sum();
                let ok = if strict { c < budget } else { c <= budget };
                ok.then(|| f.eval(&set))
            })
            .fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn evaluator_matches_fresh_evaluation(
            sets in proptest::collection::vec(proptest::collection::vec(0usize..6, 0..4), 1..7),
            order in proptest::collection::vec(0usize..7, 0..10),
        ) {
            let n = sets.len();
            let f: ValuationOracle<f64> = ValuationOracle::Coverage { sets, weights: vec![1.5; 6] };
            let mut ev = f.evaluator();
            let mut set = Vec::new();
            for j in order.into_iter().map(|j| j % n) {
                let g = ev.gain(j);
                let before = f.eval(&set);
                set.push(j);
                prop_assert!((f.eval(&set) - before - g).abs() < 1e-9f64);
                ev.add(j);
                prop_assert!((*ev.value() - f.eval(&set)).abs() < 1e-9f64);
            }
        }

        #[test]
        fn knapsack_guarantees_hold(
            values in proptest::collection::vec(0u32..20, 1..8),
            costs in proptest::collection::vec(1u32..10, 8),
            budget in 1u32..25,
        ) {
            let n = values.len();
            let f = ValuationOracle::Linear { values: values.iter().map(|&v| v as f64).collect() };
            let c: Vec<f64> = costs[..n].iter().map(|&v| v as f64).collect();
            let ground: Vec<usize> = (0..n).collect();
            let b = budget as f64;
            let s = knapsack_max(&f, &ground, &c, &b, 3).unwrap();
            prop_assert!(s.iter().map(|&j| c[j]).sum::<f64>() <= b);
            prop_assert!(f.eval(&s) >= (1.0 - (-1.0f64).exp()) * brute_force(&f, &c, b, false) - 1e-9);
            let t = strict_knapsack_max(&f, &ground, &c, &b, 3).unwrap();
            prop_assert!(t.iter().map(|&j| c[j]).sum::<f64>() < b);
            prop_assert!(f.eval(&t) >= strict_factor() * brute_force(&f, &c, b, true) - 1e-9);
        }
    }
}
