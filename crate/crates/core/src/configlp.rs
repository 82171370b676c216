//! Configuration LP by column generation.
//!
//! For a target `T` the LP asks for `x >= 0` over configurations
//! `C ⊆ gamma[i]` with `f(C) >= T` such that every player is covered at
//! least once and every resource at most once. The restricted master
//! minimizes the total player shortfall. Its duals `(y, z)` are priced by a
//! strict knapsack per player: any `S` with `z(S) < y_i` and
//! `f(S) >= c T`, `c = (1 - 1/e)/2`, enters as a column. When pricing finds
//! nothing while the shortfall is positive, the duals certify that no
//! solution exists at `T`; when the shortfall reaches zero, the columns form
//! a solution in which every configuration is worth at least `c T`.
//!
//! A bisection over `log2 T` finds the largest target for which such a
//! solution was built. The certified value `T* = c T` is what downstream
//! stages treat as the LP value.

use crate::error::{contract, Error, Result};
use crate::model::{Configuration, SantaInstance};
use crate::scalar::Scalar;
use crate::simplex::{solve, solve_warm, StandardLp};
use crate::submodular::{strict_factor, strict_knapsack_max};

/// Fractional assignment of configurations to players.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<S> {
    /// The target `T` this solution was built for.
    pub target: S,
    /// Every column is worth at least this much.
    pub threshold: S,
    pub columns: Vec<Configuration>,
    pub x: Vec<S>,
}

impl<S: Scalar> FractionalSolution<S> {
    pub fn coverage(&self, players: usize) -> Vec<S> {
        let mut cov = vec![S::zero(); players];
        for (c, x) in self.columns.iter().zip(&self.x) {
            cov[c.player] = cov[c.player].clone() + x.clone();
        }
        cov
    }

    pub fn loads(&self, resources: usize) -> Vec<S> {
        let mut load = vec![S::zero(); resources];
        for (c, x) in self.columns.iter().zip(&self.x) {
            for &r in &c.resources {
                load[r] = load[r].clone() + x.clone();
            }
        }
        load
    }

    /// Largest violation of a covering, packing or sign constraint.
    pub fn violation(&self, players: usize, resources: usize) -> f64 {
        let under = self.coverage(players).iter().map(|c| 1.0 - c.to_f64()).fold(0.0, f64::max);
        let over = self.loads(resources).iter().map(|l| l.to_f64() - 1.0).fold(0.0, f64::max);
        let neg = self.x.iter().map(|x| -x.to_f64()).fold(0.0, f64::max);
        under.max(over).max(neg)
    }

    /// Checks shape, the column threshold and feasibility within `tol`.
    pub fn check(&self, inst: &SantaInstance<S>, tol: f64) -> Result<()> {
        if self.columns.len() != self.x.len() {
            return Err(Error::Structural("columns and x differ in length".into()));
        }
        for c in &self.columns {
            if c.player >= inst.players || c.resources.iter().any(|r| inst.gamma[c.player].binary_search(r).is_err()) {
                return Err(Error::Structural(format!("column {c:?} leaves the player's resource set")));
            }
            if inst.valuation.eval(&c.resources) < self.threshold {
                return Err(Error::Structural(format!("column {c:?} is worth less than the threshold")));
            }
        }
        let v = self.violation(inst.players, inst.resources);
        if v > tol {
            return contract(format!("fractional solution violates a constraint by {v:e}"));
        }
        Ok(())
    }
}

/// Partial-enumeration depth for pricing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    /// 3 for at most 12 candidate resources, 2 up to 20, else 1.
    Auto,
    Fixed(usize),
}

impl Depth {
    pub fn for_ground(self, size: usize) -> usize {
        match self {
            Depth::Fixed(d) => d.max(1),
            Depth::Auto if size <= 12 => 3,
            Depth::Auto if size <= 20 => 2,
            Depth::Auto => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConfigLpOptions {
    pub depth: Depth,
    /// Feasibility tolerance of the returned solution.
    pub tol: f64,
    /// Pricing rounds per target before giving up on it.
    pub max_rounds: usize,
    /// Bisection steps over `log2 T`; also the width of the initial range.
    pub steps: usize,
    /// Bisection stops once the `log2 T` bracket is narrower than this.
    pub precision: f64,
    pub max_pivots: usize,
}

impl Default for ConfigLpOptions {
    fn default() -> Self {
        ConfigLpOptions { depth: Depth::Auto, tol: 1e-9, max_rounds: 500, steps: 40, precision: 1e-6, max_pivots: 200_000 }
    }
}

#[derive(Debug, Clone)]
pub struct ConfigLpResult<S> {
    /// Certified LP value `c T`.
    pub t_star: S,
    pub solution: FractionalSolution<S>,
    /// True when some target ran out of pricing rounds; `t_star` is then
    /// still certified but may be lower than necessary.
    pub capped: bool,
    pub master_solves: usize,
    pub columns_generated: usize,
}

/// Duals of the restricted master: `y` per player, `z` per resource.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint<S> {
    pub y: Vec<S>,
    pub z: Vec<S>,
}

/// Smallest reduced cost `y_i - z(S)` accepted by pricing.
pub const PRICING_MARGIN: f64 = 1e-7;

/// Pricing for one player: a set `S ⊆ gamma[i]` with
/// `z(S) < y_i - PRICING_MARGIN` and `f(S) >= c t`, if one is found.
fn price_player<S: Scalar>(
    inst: &SantaInstance<S>,
    dual: &DualPoint<S>,
    need: &S,
    i: usize,
    g: &[usize],
    depth: Depth,
) -> Result<Option<Configuration>> {
    if !dual.y[i].strictly_positive() {
        return Ok(None);
    }
    // Pricing against `y_i - margin` keeps columns whose reduced cost is
    // only rounding noise out of the master.
    let budget = dual.y[i].clone() - S::from_f64(PRICING_MARGIN);
    Ok(price_within(inst, &dual.z, &budget, need, g, depth)?.map(|set| Configuration::new(i, prune(inst, set, &dual.z, need))))
}

/// A set `S ⊆ g` with `z(S) <= budget` and `f(S) >= need`, if the knapsack
/// oracle finds one.
fn price_within<S: Scalar>(inst: &SantaInstance<S>, z: &[S], budget: &S, need: &S, g: &[usize], depth: Depth) -> Result<Option<Vec<usize>>> {
    if !budget.strictly_positive() {
        return Ok(None);
    }
    let set = strict_knapsack_max(&inst.valuation, g, z, budget, depth.for_ground(g.len()))?;
    Ok((inst.valuation.eval(&set) >= *need).then_some(set))
}

/// Lower bound on the shortfall of the full master at target `t`. Lowering
/// each `y_i` to the largest budget at which pricing still fails (found by
/// bisection) gives a dual point that no column seen by pricing violates;
/// its objective `sum y - sum z` bounds the shortfall from below.
pub fn shortfall_bound<S: Scalar>(inst: &SantaInstance<S>, dual: &DualPoint<S>, t: &S, depth: Depth) -> Result<f64> {
    check_dual(inst, dual)?;
    let need = S::from_f64(strict_factor()) * t.clone();
    let mut bound: f64 = dual.y.iter().map(S::to_f64).sum::<f64>() - dual.z.iter().map(S::to_f64).sum::<f64>();
    for i in 0..inst.players {
        let g = &inst.gamma[i];
        let y = dual.y[i].to_f64();
        if price_within(inst, &dual.z, &dual.y[i], &need, g, depth)?.is_none() {
            continue;
        }
        let (mut lo, mut hi) = (0.0, y);
        for _ in 0..BOUND_STEPS {
            let mid = 0.5 * (lo + hi);
            if price_within(inst, &dual.z, &S::from_f64(mid), &need, g, depth)?.is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        bound -= y - lo;
    }
    Ok(bound)
}

/// Bisection steps per player in [`shortfall_bound`].
const BOUND_STEPS: usize = 12;

/// Pricing rounds between two shortfall bounds.
const BOUND_EVERY: usize = 5;

fn check_dual<S: Scalar>(inst: &SantaInstance<S>, dual: &DualPoint<S>) -> Result<()> {
    if dual.y.len() != inst.players || dual.z.len() != inst.resources {
        return Err(Error::Structural("dual vector sizes do not match the instance".into()));
    }
    Ok(())
}

/// Pricing: the column of the first player (by id) that prices out.
pub fn separate<S: Scalar>(
    inst: &SantaInstance<S>,
    dual: &DualPoint<S>,
    t: &S,
    depth: Depth,
) -> Result<Option<Configuration>> {
    check_dual(inst, dual)?;
    let need = S::from_f64(strict_factor()) * t.clone();
    for i in 0..inst.players {
        if let Some(c) = price_player(inst, dual, &need, i, &inst.gamma[i], depth)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Columns priced per player and round by [`separate_all`].
pub const COLUMNS_PER_PLAYER: usize = 3;

/// Pricing for every player at once. After a player's column is found, its
/// resources are withheld and the player is priced again, so the master
/// gains up to [`COLUMNS_PER_PLAYER`] pairwise disjoint columns per player
/// per round. The first column of each player is the one [`separate`]
/// would consider.
pub fn separate_all<S: Scalar>(inst: &SantaInstance<S>, dual: &DualPoint<S>, t: &S, depth: Depth) -> Result<Vec<Configuration>> {
    check_dual(inst, dual)?;
    let need = S::from_f64(strict_factor()) * t.clone();
    let mut out = Vec::new();
    for i in 0..inst.players {
        let mut ground = inst.gamma[i].clone();
        for _ in 0..COLUMNS_PER_PLAYER {
            let Some(c) = price_player(inst, dual, &need, i, &ground, depth)? else { break };
            ground.retain(|r| c.resources.binary_search(r).is_err());
            out.push(c);
        }
    }
    Ok(out)
}

/// Drops members, costliest first (ties to the larger id), while the value
/// stays at least `need`; a cheaper column has a more negative reduced cost.
fn prune<S: Scalar>(inst: &SantaInstance<S>, mut set: Vec<usize>, z: &[S], need: &S) -> Vec<usize> {
    let mut order = set.clone();
    order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).expect("comparable").then(b.cmp(&a)));
    for r in order {
        let rest: Vec<usize> = set.iter().copied().filter(|&x| x != r).collect();
        if inst.valuation.eval(&rest) >= *need {
            set = rest;
        }
    }
    set
}

enum Attempt<S> {
    Feasible(FractionalSolution<S>),
    Infeasible,
    Capped,
}

struct ColumnPool<S> {
    columns: Vec<Configuration>,
    values: Vec<S>,
    /// Final basis of the latest master, the next target's starting point.
    last: Option<Warm>,
}

pub fn solve_config_lp<S: Scalar>(inst: &SantaInstance<S>, opts: &ConfigLpOptions) -> Result<ConfigLpResult<S>> {
    let problems = crate::model::validate_instance(inst);
    if let Some(p) = problems.first() {
        return Err(Error::Structural(p.clone()));
    }
    let upper = inst
        .gamma
        .iter()
        .map(|g| inst.valuation.eval(g))
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap_or_else(S::zero);
    let mut pool = ColumnPool { columns: Vec::new(), values: Vec::new(), last: None };
    let mut stats = (0usize, false);
    let trivial = |inst: &SantaInstance<S>| ConfigLpResult {
        t_star: S::zero(),
        solution: FractionalSolution {
            target: S::zero(),
            threshold: S::zero(),
            columns: (0..inst.players).map(|i| Configuration::new(i, Vec::new())).collect(),
            x: vec![S::one(); inst.players],
        },
        capped: false,
        master_solves: 0,
        columns_generated: 0,
    };
    if !upper.strictly_positive() {
        return Ok(trivial(inst));
    }

    let fast: Option<SantaInstance<f64>> = S::EXACT.then(|| inst.convert());
    let hi_exp = (upper.to_f64() / strict_factor()).log2();
    let lo_exp = hi_exp - opts.steps as f64;
    let target = |e: f64| S::from_f64(e.exp2());

    if let Attempt::Feasible(sol) = attempt(inst, fast.as_ref(), &target(hi_exp), opts, &mut pool, &mut stats)? {
        return Ok(finish(sol, &pool, stats));
    }
    let mut best = match attempt(inst, fast.as_ref(), &target(lo_exp), opts, &mut pool, &mut stats)? {
        Attempt::Feasible(sol) => sol,
        _ => {
            let mut r = trivial(inst);
            r.capped = stats.1;
            return Ok(r);
        }
    };
    let (mut lo, mut hi) = (lo_exp, hi_exp);
    for _ in 0..opts.steps {
        if hi - lo < opts.precision {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match attempt(inst, fast.as_ref(), &target(mid), opts, &mut pool, &mut stats)? {
            Attempt::Feasible(sol) => {
                lo = mid;
                best = sol;
            }
            Attempt::Infeasible | Attempt::Capped => hi = mid,
        }
    }
    Ok(finish(best, &pool, stats))
}

fn finish<S: Scalar>(sol: FractionalSolution<S>, pool: &ColumnPool<S>, stats: (usize, bool)) -> ConfigLpResult<S> {
    ConfigLpResult {
        t_star: sol.threshold.clone(),
        solution: sol,
        capped: stats.1,
        master_solves: stats.0,
        columns_generated: pool.columns.len(),
    }
}

/// `pricing` is a float copy of an exact instance: duals are floats
/// anyway, and columns are kept only if their exact value clears the
/// threshold.
fn attempt<S: Scalar>(
    inst: &SantaInstance<S>,
    pricing: Option<&SantaInstance<f64>>,
    t: &S,
    opts: &ConfigLpOptions,
    pool: &mut ColumnPool<S>,
    stats: &mut (usize, bool),
) -> Result<Attempt<S>> {
    let threshold = S::from_f64(strict_factor()) * t.clone();
    let mut active: Vec<usize> = (0..pool.columns.len()).filter(|&k| pool.values[k] >= threshold).collect();
    let mut warm: Option<Warm> = pool.last.take();
    for round in 0..opts.max_rounds {
        let cols: Vec<&Configuration> = active.iter().map(|&k| &pool.columns[k]).collect();
        let master = solve_master(inst, &active, &cols, warm.as_ref(), opts.max_pivots)?;
        warm = Some(master.warm.clone());
        pool.last = warm.clone();
        stats.0 += 1;
        if master.shortfall <= 1e-9 {
            let sol = repair(inst, t, &threshold, &cols, &master.x);
            let v = sol.violation(inst.players, inst.resources);
            if v > opts.tol {
                log::debug!("master solution at target {t} is off by {v:e}; treating the target as unreached");
                stats.1 = true;
                return Ok(Attempt::Capped);
            }
            return Ok(Attempt::Feasible(sol));
        }
        if round >= BOUND_EVERY && round % BOUND_EVERY == 0 {
            // Long tails near the LP optimum end early once the shortfall
            // is bounded away from zero.
            let bound = match pricing {
                Some(fast) => shortfall_bound(fast, &float_dual(&master), &t.to_f64(), opts.depth)?,
                None => shortfall_bound(inst, &exact_dual(&master), t, opts.depth)?,
            };
            if bound > 1e-9 {
                return Ok(Attempt::Infeasible);
            }
        }
        let found = match pricing {
            Some(fast) => {
                let priced = separate_all(fast, &float_dual(&master), &t.to_f64(), opts.depth)?;
                let priced_any = !priced.is_empty();
                let kept: Vec<Configuration> =
                    priced.into_iter().filter(|c| inst.valuation.eval(&c.resources) >= threshold).collect();
                if priced_any && kept.is_empty() {
                    // Every float column missed the exact threshold by rounding.
                    stats.1 = true;
                    return Ok(Attempt::Capped);
                }
                kept
            }
            None => separate_all(inst, &exact_dual(&master), t, opts.depth)?,
        };
        if found.is_empty() {
            return Ok(Attempt::Infeasible);
        }
        let before = active.len();
        for col in found {
            match pool.columns.iter().position(|c| *c == col) {
                Some(k) if active.contains(&k) => {}
                Some(k) => active.push(k),
                None => {
                    pool.values.push(inst.valuation.eval(&col.resources));
                    pool.columns.push(col);
                    active.push(pool.columns.len() - 1);
                }
            }
        }
        if active.len() == before {
            // Pricing only returned columns already in the master: numerical stall.
            log::debug!("column generation stalled at target {t}");
            stats.1 = true;
            return Ok(Attempt::Capped);
        }
    }
    stats.1 = true;
    Ok(Attempt::Capped)
}

/// Master variables named independently of their column position, so a
/// basis survives the addition of columns and rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MasterVar {
    /// Pool id and player of a configuration column.
    Column(usize, usize),
    Shortfall(usize),
    Surplus(usize),
    Slack(usize),
}

/// A master basis together with the resources that had a row.
#[derive(Debug, Clone)]
struct Warm {
    basis: Vec<MasterVar>,
    rows: Vec<usize>,
}

/// Master duals clipped at zero.
fn float_dual(master: &Master) -> DualPoint<f64> {
    DualPoint { y: master.y.iter().map(|&v| v.max(0.0)).collect(), z: master.z.iter().map(|&v| v.max(0.0)).collect() }
}

fn exact_dual<S: Scalar>(master: &Master) -> DualPoint<S> {
    let d = float_dual(master);
    DualPoint { y: d.y.into_iter().map(S::from_f64).collect(), z: d.z.into_iter().map(S::from_f64).collect() }
}

struct Master {
    warm: Warm,
    shortfall: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

/// Restricted master in `f64`: rows are players then resources; columns are
/// the configurations, then per player a shortfall and a surplus variable,
/// then a slack per resource. `ids` names the columns in the pool; `warm`
/// is the basis of the previous round.
fn solve_master<S: Scalar>(
    inst: &SantaInstance<S>,
    ids: &[usize],
    cols: &[&Configuration],
    warm: Option<&Warm>,
    max_pivots: usize,
) -> Result<Master> {
    // Only resources used by some column get a packing row; the others have
    // dual zero.
    let mut row_of = vec![usize::MAX; inst.resources];
    let mut used = Vec::new();
    for c in cols {
        for &r in &c.resources {
            if row_of[r] == usize::MAX {
                row_of[r] = used.len();
                used.push(r);
            }
        }
    }
    let (m, n, k) = (inst.players, used.len(), cols.len());
    let width = k + 2 * m + n;
    let mut a = vec![vec![0.0f64; width]; m + n];
    for (j, c) in cols.iter().enumerate() {
        a[c.player][j] = 1.0;
        for &r in &c.resources {
            a[m + row_of[r]][j] = 1.0;
        }
    }
    let mut cost = vec![0.0; width];
    let mut basis = Vec::with_capacity(m + n);
    for i in 0..m {
        a[i][k + i] = 1.0;
        a[i][k + m + i] = -1.0;
        cost[k + i] = 1.0;
        basis.push(k + i);
    }
    for r in 0..n {
        a[m + r][k + 2 * m + r] = 1.0;
        basis.push(k + 2 * m + r);
    }
    let lp = StandardLp { a, b: vec![1.0; m + n], c: cost, basis };
    let name = |j: usize| match j {
        j if j < k => MasterVar::Column(ids[j], cols[j].player),
        j if j < k + m => MasterVar::Shortfall(j - k),
        j if j < k + 2 * m => MasterVar::Surplus(j - k - m),
        j => MasterVar::Slack(used[j - k - 2 * m]),
    };
    let start = warm.map(|w| {
        let mut basis: Vec<usize> = Vec::with_capacity(m + n);
        let mut dropped = Vec::new();
        for v in &w.basis {
            match *v {
                MasterVar::Column(id, player) => match ids.iter().position(|&x| x == id) {
                    Some(j) => basis.push(j),
                    None => dropped.push(player),
                },
                MasterVar::Shortfall(i) => basis.push(k + i),
                MasterVar::Surplus(i) => basis.push(k + m + i),
                // The row of a resource no column uses any more is gone.
                MasterVar::Slack(r) => basis.extend((row_of[r] != usize::MAX).then(|| k + 2 * m + row_of[r])),
            }
        }
        // A column that left the master hands its place to its player's
        // shortfall, or surplus, variable. The result may be singular or
        // infeasible, in which case the solver starts cold.
        for i in dropped {
            if let Some(j) = [k + i, k + m + i].into_iter().find(|j| !basis.contains(j)) {
                basis.push(j);
            }
        }
        // Rows opened since the basis was taken start with their slack basic.
        let mut old = vec![false; inst.resources];
        for &r in &w.rows {
            old[r] = true;
        }
        basis.extend((0..n).filter(|&row| !old[used[row]]).map(|row| k + 2 * m + row));
        basis
    });
    let sol = solve_warm(&lp, start.as_deref(), max_pivots)?;
    Ok(Master {
        warm: Warm { basis: sol.basis.iter().map(|&j| name(j)).collect(), rows: used.clone() },
        shortfall: sol.objective,
        x: sol.x[..k].to_vec(),
        y: sol.duals[..m].to_vec(),
        z: {
            let mut z = vec![0.0; inst.resources];
            for (row, &r) in used.iter().enumerate() {
                z[r] = -sol.duals[m + row];
            }
            z
        },
    })
}

/// Moves the float solution into `S`: scales every player to coverage
/// exactly one, then shrinks everything uniformly if a resource is
/// overloaded.
fn repair<S: Scalar>(
    inst: &SantaInstance<S>,
    t: &S,
    threshold: &S,
    cols: &[&Configuration],
    x: &[f64],
) -> FractionalSolution<S> {
    let mut columns = Vec::new();
    let mut xs: Vec<S> = Vec::new();
    for (c, &v) in cols.iter().zip(x) {
        if v > 1e-15 {
            columns.push((*c).clone());
            xs.push(S::from_f64(v));
        }
    }
    let mut sol = FractionalSolution { target: t.clone(), threshold: threshold.clone(), columns, x: xs };
    let cov = sol.coverage(inst.players);
    for (c, x) in sol.columns.iter().zip(sol.x.iter_mut()) {
        if cov[c.player].strictly_positive() {
            *x = x.clone() / cov[c.player].clone();
        }
    }
    let max_load = sol
        .loads(inst.resources)
        .into_iter()
        .fold(S::one(), |a, b| if b > a { b } else { a });
    if max_load > S::one() {
        sol.x.iter_mut().for_each(|x| *x = x.clone() / max_load.clone());
    }
    sol
}

/// Exhaustive LP at a fixed target for `n <= 12` resources: every minimal
/// configuration with `f(C) >= t` becomes a column and the master is solved
/// in `S`. Exact scalar types give an exact answer.
pub fn exact_config_lp_small<S: Scalar>(inst: &SantaInstance<S>, t: &S) -> Result<Option<FractionalSolution<S>>> {
    if inst.resources > 12 {
        return Err(Error::Budget(format!("exhaustive LP refuses {} > 12 resources", inst.resources)));
    }
    let mut columns = Vec::new();
    for (i, g) in inst.gamma.iter().enumerate() {
        for mask in 0u32..1 << g.len() {
            let set: Vec<usize> = (0..g.len()).filter(|&b| mask >> b & 1 == 1).map(|b| g[b]).collect();
            if inst.valuation.eval(&set) < *t {
                continue;
            }
            let minimal = (0..set.len()).all(|skip| {
                let sub: Vec<usize> = set.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &r)| r).collect();
                inst.valuation.eval(&sub) < *t
            });
            if minimal {
                columns.push(Configuration::new(i, set));
            }
        }
    }
    let (m, n, k) = (inst.players, inst.resources, columns.len());
    let width = k + 2 * m + n;
    let mut a = vec![vec![S::zero(); width]; m + n];
    for (j, c) in columns.iter().enumerate() {
        a[c.player][j] = S::one();
        for &r in &c.resources {
            a[m + r][j] = S::one();
        }
    }
    let mut cost = vec![S::zero(); width];
    let mut basis = Vec::new();
    for i in 0..m {
        a[i][k + i] = S::one();
        a[i][k + m + i] = -S::one();
        cost[k + i] = S::one();
        basis.push(k + i);
    }
    for r in 0..n {
        a[m + r][k + 2 * m + r] = S::one();
        basis.push(k + 2 * m + r);
    }
    let lp = StandardLp { a, b: vec![S::one(); m + n], c: cost, basis };
    let sol = solve(&lp, 1_000_000)?;
    if sol.objective > S::tolerance() {
        return Ok(None);
    }
    let (cols, xs): (Vec<_>, Vec<_>) = columns
        .into_iter()
        .zip(sol.x.into_iter().take(k))
        .filter(|(_, x)| x.strictly_positive())
        .unzip();
    Ok(Some(FractionalSolution { target: t.clone(), threshold: t.clone(), columns: cols, x: xs }))
}

/// Largest `t` at which [`exact_config_lp_small`] is feasible. Feasibility
/// only changes at values `f(S)`, so those are the candidates.
pub fn exact_config_lp_value<S: Scalar>(inst: &SantaInstance<S>) -> Result<S> {
    let mut values: Vec<S> = Vec::new();
    for g in &inst.gamma {
        for mask in 0u32..1 << g.len().min(31) {
            let set: Vec<usize> = (0..g.len()).filter(|&b| mask >> b & 1 == 1).map(|b| g[b]).collect();
            values.push(inst.valuation.eval(&set));
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("values are comparable"));
    values.dedup();
    let (mut lo, mut hi) = (0usize, values.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if exact_config_lp_small(inst, &values[mid])?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(values[lo].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::ValuationOracle;
    use crate::Rational;

    fn linear(players: usize, gamma: Vec<Vec<usize>>, values: Vec<f64>) -> SantaInstance<f64> {
        SantaInstance::new(players, values.len(), gamma, ValuationOracle::Linear { values }).unwrap()
    }

    #[test]
    fn single_player_single_resource() {
        let inst = linear(1, vec![vec![0]], vec![5.0]);
        let res = solve_config_lp(&inst, &ConfigLpOptions::default()).unwrap();
        // The search starts at f(gamma) / c, which only the full value can certify.
        assert!((res.t_star - 5.0).abs() < 1e-6, "{}", res.t_star);
        res.solution.check(&inst, 1e-9).unwrap();
    }

    #[test]
    fn pricing_prunes_to_a_minimal_column() {
        let inst = linear(1, vec![vec![0, 1, 2]], vec![1.0, 1.0, 1.0]);
        // Need is c * 3 < 1, so one resource suffices; larger ids go first.
        let dual = DualPoint { y: vec![1.0], z: vec![0.0; 3] };
        let col = separate(&inst, &dual, &3.0, Depth::Fixed(3)).unwrap().unwrap();
        assert_eq!(col.resources, vec![0]);
        let dual = DualPoint { y: vec![1.0], z: vec![0.3, 0.1, 0.2] };
        let col = separate(&inst, &dual, &3.0, Depth::Fixed(3)).unwrap().unwrap();
        assert_eq!(col.resources, vec![1]);
        // Need 2c * 3 > 1 keeps two resources.
        let col = separate(&inst, &dual, &6.0, Depth::Fixed(3)).unwrap().unwrap();
        assert_eq!(col.resources, vec![1, 2]);
    }

    #[test]
    fn pricing_finds_nothing_when_duals_are_prohibitive() {
        let inst = linear(1, vec![vec![0, 1]], vec![1.0, 1.0]);
        let dual = DualPoint { y: vec![1.0], z: vec![1.0, 1.0] };
        assert!(separate(&inst, &dual, &1.0, Depth::Fixed(3)).unwrap().is_none());
    }

    #[test]
    fn exact_lp_two_players_three_resources() {
        // Player 0 wants {0,1}, player 1 wants {1,2}; values 2,1,2.
        let inst: SantaInstance<Rational> =
            linear(2, vec![vec![0, 1], vec![1, 2]], vec![2.0, 1.0, 2.0]).convert();
        let q = |p: i64| Rational::from_integer(p.into());
        assert!(exact_config_lp_small(&inst, &q(2)).unwrap().is_some());
        assert!(exact_config_lp_small(&inst, &q(3)).unwrap().is_none());
        assert_eq!(exact_config_lp_value(&inst).unwrap(), q(2));
    }

    #[test]
    fn solver_meets_fraction_of_exact_value() {
        let inst = linear(2, vec![vec![0, 1, 2], vec![1, 2, 3]], vec![3.0, 1.0, 2.0, 1.0]);
        let exact: f64 = exact_config_lp_value(&inst.convert::<Rational>()).unwrap().to_f64();
        let res = solve_config_lp(&inst, &ConfigLpOptions::default()).unwrap();
        assert!(res.t_star >= (strict_factor() - 1e-6) * exact);
        res.solution.check(&inst, 1e-9).unwrap();
    }

    #[test]
    fn rational_pipeline_gives_exact_feasibility() {
        let inst: SantaInstance<Rational> =
            linear(2, vec![vec![0, 1, 2], vec![0, 1, 2]], vec![1.0, 1.0, 1.0]).convert();
        let res = solve_config_lp(&inst, &ConfigLpOptions::default()).unwrap();
        res.solution.check(&inst, 1e-9).unwrap();
        assert!(res.solution.loads(3).iter().all(|l| *l <= Rational::from_integer(1.into())));
    }
}
