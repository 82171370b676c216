//! End-to-end drivers: the matching pipeline for grouped hypergraphs and
//! the allocation pipeline for Santa Claus instances, plus verification of
//! solution files and the machine-readable report.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clustering::{build_clusters, min_sample_count, sample_cluster_configs, split_fat_thin, ClusterDecomposition};
use crate::configlp::{solve_config_lp, ConfigLpOptions};
use crate::error::{Error, Result};
use crate::io::{FileKind, Instance, SolutionFile, SCHEMA_VERSION};
use crate::lll::{select_moser_tardos, selection_intersection_bound, IntersectionAudit, LllOptions};
use crate::model::{achieved_alpha, verify_relaxed_matching, GroupedHypergraph, RelaxedMatching, SantaInstance, Verdict};
use crate::oracles::{exact_min_alpha_grouped, exact_santa_opt};
use crate::reconstruct::{assemble_santa_solution, default_gamma, reconstruct_matching, top_up, Allocation, LevelRecord, ReconstructOptions};
use crate::reduction::{build_weighted_hypergraph, lift_matching, round_weights, to_grouped};
use crate::rng::RngSeed;
use crate::sampling::{resample_until_good, SizeClasses, THEORY_CLASS_OFFSET};
use crate::scalar::{ceil_log2, format_rational, Scalar};
use crate::Rational;

/// Class shift of the practical profile: class 1 starts at `ell^2`.
pub const PRACTICAL_CLASS_OFFSET: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `ell >= 300000 ceil(log2 n)^3` and class shift 3.
    Theory,
    /// `ell` as given and class shift 1.
    Practical,
}

impl Profile {
    pub fn class_offset(self) -> u32 {
        match self {
            Profile::Theory => THEORY_CLASS_OFFSET,
            Profile::Practical => PRACTICAL_CLASS_OFFSET,
        }
    }

    /// Survival parameter of the resource hierarchy.
    pub fn hierarchy_ell(self, given: usize, resources: usize) -> usize {
        match self {
            Profile::Theory => {
                let l = ceil_log2(resources.max(2)) as usize;
                given.max(300_000usize.saturating_mul(l * l * l))
            }
            Profile::Practical => given.max(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub profile: Profile,
    pub seed: RngSeed,
    pub gamma: Option<u64>,
    /// Hierarchy parameter for hypergraph inputs (default: the input's
    /// `ell`) and sample count for Santa inputs (raised to `12 ceil(log2 n)`).
    pub ell: Option<usize>,
    pub slack: f64,
    pub tol: f64,
    pub max_rounds: usize,
    /// Independent hierarchy and selection draws; the best matching wins.
    pub restarts: usize,
    pub hierarchy_tries: usize,
    /// Record wall-clock stage timings in the report. Off by default so
    /// reports are reproducible byte for byte.
    pub timings: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            profile: Profile::Practical,
            seed: RngSeed(0),
            gamma: None,
            ell: None,
            slack: 1.0,
            tol: 1e-9,
            max_rounds: 10_000,
            restarts: 16,
            hierarchy_tries: 50,
            timings: false,
        }
    }
}

/// A failure tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

pub type StageResult<T> = std::result::Result<T, StageError>;

fn at<T>(stage: &'static str, r: Result<T>) -> StageResult<T> {
    r.map_err(|error| StageError { stage, error })
}

#[derive(Default)]
struct Clock {
    on: bool,
    ms: BTreeMap<String, f64>,
}

impl Clock {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.on {
            *self.ms.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
        out
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.on.then_some(self.ms)
    }
}

/// Result of the matching pipeline on a grouped hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingRun {
    pub matching: RelaxedMatching,
    pub alpha_induction: Rational,
    pub ell: usize,
    pub depth: usize,
    pub gamma: u64,
    pub restarts_run: usize,
    pub best_restart: usize,
    pub failed_restarts: usize,
    pub hierarchy_attempts: usize,
    pub lll_rounds: usize,
    pub lll_resamples: usize,
    pub levels: Vec<LevelRecord>,
    pub audit: IntersectionAudit,
}

fn solve_grouped_timed(gh: &GroupedHypergraph, opts: &SolveOptions, clock: &mut Clock) -> StageResult<MatchingRun> {
    at("validate", gh.validate())?;
    let ell = opts.profile.hierarchy_ell(opts.ell.unwrap_or(gh.ell), gh.resources);
    let gamma = opts.gamma.unwrap_or_else(|| default_gamma(ell));
    let classes = at("classes", SizeClasses::new(gh, ell, opts.profile.class_offset()))?;
    let lll = LllOptions { slack: opts.slack, max_rounds: opts.max_rounds };
    let recon = ReconstructOptions::new(gamma);
    let mut best: Option<MatchingRun> = None;
    let mut last_err: Option<StageError> = None;
    let mut failed = 0;
    let mut ran = 0;
    for restart in 0..opts.restarts.max(1) {
        ran += 1;
        let seed = opts.seed.derive(restart as u64);
        let attempt = (|| -> StageResult<MatchingRun> {
            let hier = clock.time("hierarchy", || {
                at("hierarchy", resample_until_good(gh, &classes, opts.hierarchy_tries, seed.derive_str("hierarchy")))
            })?;
            let sel = clock.time("selection", || {
                at("selection", select_moser_tardos(gh, &classes, &hier, &lll, seed.derive_str("selection")))
            })?;
            let audit = clock.time("audit", || selection_intersection_bound(gh, &classes, &hier, &sel, opts.slack));
            let rec = clock.time("reconstruct", || at("reconstruct", reconstruct_matching(gh, &classes, &hier, &sel, &recon)))?;
            Ok(MatchingRun {
                matching: rec.matching,
                alpha_induction: rec.alpha_induction,
                ell,
                depth: hier.depth,
                gamma,
                restarts_run: 0,
                best_restart: restart,
                failed_restarts: 0,
                hierarchy_attempts: hier.attempts,
                lll_rounds: sel.rounds,
                lll_resamples: sel.resamples,
                levels: rec.levels,
                audit,
            })
        })();
        match attempt {
            Ok(run) => {
                if best.as_ref().is_none_or(|b| run.matching.alpha < b.matching.alpha) {
                    best = Some(run);
                }
            }
            Err(e) => {
                log::warn!("restart {restart}: {e}");
                failed += 1;
                last_err = Some(e);
            }
        }
        if best.as_ref().is_some_and(|b| b.matching.alpha == Rational::from_integer(1.into())) {
            break;
        }
    }
    let mut run = match best {
        Some(run) => run,
        None => return Err(last_err.expect("at least one restart ran")),
    };
    run.restarts_run = ran;
    run.failed_restarts = failed;
    match at("verify", verify_relaxed_matching(gh, &run.matching))? {
        Verdict::Valid => Ok(run),
        Verdict::Violated(msg) => Err(StageError { stage: "verify", error: Error::Structural(msg) }),
    }
}

pub fn solve_grouped(gh: &GroupedHypergraph, opts: &SolveOptions) -> StageResult<MatchingRun> {
    solve_grouped_timed(gh, opts, &mut Clock::default())
}

/// Result of the allocation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SantaRun<S> {
    pub t_star: S,
    pub allocation: Allocation<S>,
    pub decomposition: Option<ClusterDecomposition<S>>,
    pub sample_ell: usize,
    /// Weighted factor of the lifted matching on the unrounded hypergraph.
    pub weighted_alpha: Option<Rational>,
    pub matching: Option<MatchingRun>,
    pub lp_columns: usize,
    pub lp_capped: bool,
}

fn solve_santa_timed<S: Scalar>(inst: &SantaInstance<S>, opts: &SolveOptions, clock: &mut Clock) -> StageResult<SantaRun<S>> {
    let lp_opts = ConfigLpOptions { tol: opts.tol, ..ConfigLpOptions::default() };
    let lp = clock.time("config-lp", || at("config-lp", solve_config_lp(inst, &lp_opts)))?;
    let sample_ell = opts.ell.unwrap_or(0).max(min_sample_count(inst.resources));
    if !lp.t_star.strictly_positive() {
        // Some player values nothing: every allocation is worth 0.
        let mut sets = vec![Vec::new(); inst.players];
        top_up(inst, &mut sets, &mut vec![false; inst.resources]);
        let value = inst.min_value(&sets);
        return Ok(SantaRun {
            t_star: lp.t_star,
            allocation: Allocation { sets, core_value: S::zero(), value },
            decomposition: None,
            sample_ell,
            weighted_alpha: None,
            matching: None,
            lp_columns: lp.columns_generated,
            lp_capped: lp.capped,
        });
    }
    let t_star = lp.t_star.clone();
    let dec = clock.time("clusters", || -> StageResult<ClusterDecomposition<S>> {
        let split = at("fat-thin", split_fat_thin(inst, &t_star, &S::one()))?;
        let dec = at("clusters", build_clusters(inst, &lp.solution, &split))?;
        at("cluster-sampling", sample_cluster_configs(inst, &dec, sample_ell, opts.seed.derive_str("clusters")))
    })?;
    let (wm, weighted_alpha, matching) = if dec.clusters.is_empty() {
        (RelaxedMatching { chosen: Vec::new(), assigned: Vec::new(), alpha: Rational::from_integer(1.into()) }, None, None)
    } else {
        let (weighted, grouped) = clock.time("reduction", || -> StageResult<_> {
            let weighted = at("weighted-hypergraph", build_weighted_hypergraph(&dec, &inst.valuation, &t_star))?;
            let rounded = at("rounding", round_weights(&weighted))?;
            let grouped = at("grouping", to_grouped(&rounded))?;
            Ok((weighted, grouped))
        })?;
        let sub = SolveOptions { ell: None, seed: opts.seed.derive_str("matching"), ..opts.clone() };
        let run = solve_grouped_timed(&grouped, &sub, clock)?;
        let lifted = at("lift", lift_matching(&run.matching, &grouped, &weighted))?;
        let alpha = lifted.alpha_weighted.clone().unwrap_or_else(|| run.matching.alpha.clone());
        let wm = RelaxedMatching { chosen: lifted.chosen, assigned: lifted.assigned, alpha };
        (wm, lifted.alpha_weighted, Some(run))
    };
    let allocation = clock.time("assemble", || at("assemble", assemble_santa_solution(inst, &dec, &wm)))?;
    Ok(SantaRun {
        t_star,
        allocation,
        decomposition: Some(dec),
        sample_ell,
        weighted_alpha,
        matching,
        lp_columns: lp.columns_generated,
        lp_capped: lp.capped,
    })
}

pub fn solve_santa<S: Scalar>(inst: &SantaInstance<S>, opts: &SolveOptions) -> StageResult<SantaRun<S>> {
    solve_santa_timed(inst, opts, &mut Clock::default())
}

fn scalar_text<S: Scalar>(x: &S) -> String {
    match x.to_ratio() {
        Some(r) => format_rational(&r),
        None => format!("{}", x.to_f64()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingStats {
    pub ell: usize,
    pub depth: usize,
    pub class_offset: u32,
    pub gamma: u64,
    pub slack: f64,
    pub alpha: String,
    pub alpha_induction: String,
    pub restarts_run: usize,
    pub best_restart: usize,
    pub failed_restarts: usize,
    pub hierarchy_attempts: usize,
    pub lll_rounds: usize,
    pub lll_resamples: usize,
    pub audit_checks: usize,
    pub audit_violations: usize,
    pub audit_selected_violations: usize,
    pub worst_selected_ratio: f64,
    pub lift_fallbacks: usize,
    pub admission_fallbacks: usize,
}

impl MatchingStats {
    fn new(run: &MatchingRun, profile: Profile, slack: f64) -> Self {
        MatchingStats {
            ell: run.ell,
            depth: run.depth,
            class_offset: profile.class_offset(),
            gamma: run.gamma,
            slack,
            alpha: format_rational(&run.matching.alpha),
            alpha_induction: format_rational(&run.alpha_induction),
            restarts_run: run.restarts_run,
            best_restart: run.best_restart,
            failed_restarts: run.failed_restarts,
            hierarchy_attempts: run.hierarchy_attempts,
            lll_rounds: run.lll_rounds,
            lll_resamples: run.lll_resamples,
            audit_checks: run.audit.checks,
            audit_violations: run.audit.violations.len(),
            audit_selected_violations: run.audit.selected_violations.len(),
            worst_selected_ratio: run.audit.worst_selected_ratio,
            lift_fallbacks: run.levels.iter().filter(|l| l.lift_fallback).count(),
            admission_fallbacks: run.levels.iter().filter(|l| l.admission_fallback).count(),
        }
    }
}

/// Machine-readable summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(rename = "type")]
    pub kind: FileKind,
    pub profile: Profile,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<String>,
    /// Matching factor: the grouped factor for hypergraphs, the weighted
    /// factor of the lifted matching for Santa inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_players: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_columns: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchingStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

/// Runs the pipeline matching the instance type and returns the solution
/// file together with its report.
pub fn solve_instance(inst: &Instance, opts: &SolveOptions) -> StageResult<(SolutionFile, Report)> {
    let mut clock = Clock { on: opts.timings, ms: BTreeMap::new() };
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        kind: FileKind::Hypergraph,
        profile: opts.profile,
        seed: opts.seed.0,
        t_star: None,
        alpha: None,
        value: None,
        core_value: None,
        clusters: None,
        fixed_players: None,
        sample_ell: None,
        sample_attempts: None,
        lp_columns: None,
        matching: None,
        timings_ms: None,
    };
    let solution = match inst {
        Instance::Hypergraph(gh) => {
            let run = solve_grouped_timed(gh, opts, &mut clock)?;
            report.alpha = Some(format_rational(&run.matching.alpha));
            report.matching = Some(MatchingStats::new(&run, opts.profile, opts.slack));
            SolutionFile::from_matching(&run.matching)
        }
        Instance::Santa(exact) => {
            let run = solve_santa_timed(exact, opts, &mut clock)?;
            report.kind = FileKind::Santa;
            report.t_star = Some(scalar_text(&run.t_star));
            report.alpha = run.weighted_alpha.as_ref().map(format_rational);
            report.value = Some(scalar_text(&run.allocation.value));
            report.core_value = Some(scalar_text(&run.allocation.core_value));
            report.clusters = run.decomposition.as_ref().map(|d| d.clusters.len());
            report.fixed_players = run.decomposition.as_ref().map(|d| d.fixed.len());
            report.sample_ell = Some(run.sample_ell);
            report.sample_attempts = run.decomposition.as_ref().map(|d| d.sample_attempts);
            report.lp_columns = Some(run.lp_columns);
            report.matching = run.matching.as_ref().map(|m| MatchingStats::new(m, opts.profile, opts.slack));
            SolutionFile::from_allocation(&run.allocation.sets, &run.allocation.value, run.weighted_alpha.as_ref())
        }
    };
    report.timings_ms = clock.finish();
    Ok((solution, report))
}

/// Every problem with a solution file for the given instance; empty means
/// the file verifies.
pub fn verify_solution(inst: &Instance, sol: &SolutionFile) -> Result<Vec<String>> {
    let mut out = Vec::new();
    match inst {
        Instance::Hypergraph(gh) => {
            if sol.kind != FileKind::Hypergraph {
                out.push("solution type does not match a hypergraph instance".into());
                return Ok(out);
            }
            let m = sol.matching()?;
            let verdict = match verify_relaxed_matching(gh, &m) {
                Ok(v) => v,
                Err(e) => Verdict::Violated(e.to_string()),
            };
            if let Verdict::Violated(msg) = verdict {
                let shaped = m.chosen.len() == gh.player_count()
                    && m.assigned.len() == m.chosen.len()
                    && m.chosen.iter().all(|&c| c < gh.configurations.len());
                if shaped {
                    let sizes: Vec<usize> = m.chosen.iter().map(|&c| gh.configurations[c].len()).collect();
                    let counts: Vec<usize> = m.assigned.iter().map(Vec::len).collect();
                    out.push(format!("{msg} (claimed alpha {}, recomputed alpha {})", format_rational(&m.alpha), format_rational(&achieved_alpha(&sizes, &counts))));
                } else {
                    out.push(msg);
                }
            }
        }
        Instance::Santa(exact) => {
            if sol.kind != FileKind::Santa {
                out.push("solution type does not match a santa instance".into());
                return Ok(out);
            }
            if sol.assigned.len() != exact.players {
                out.push(format!("{} sets for {} players", sol.assigned.len(), exact.players));
                return Ok(out);
            }
            let mut seen = vec![false; exact.resources];
            for (p, set) in sol.assigned.iter().enumerate() {
                for &r in set {
                    if r >= exact.resources {
                        out.push(format!("player {p} holds unknown resource {r}"));
                    } else if std::mem::replace(&mut seen[r], true) {
                        out.push(format!("duplicate resource {r}"));
                    } else if exact.gamma[p].binary_search(&r).is_err() {
                        out.push(format!("resource {r} is not available to player {p}"));
                    }
                }
            }
            if out.is_empty() {
                if let Some(claimed) = sol.claimed_value()? {
                    let actual = exact.min_value(&sol.assigned);
                    if claimed > actual {
                        out.push(format!(
                            "claimed value {} but the allocation is worth {}",
                            format_rational(&claimed),
                            format_rational(&actual)
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Which exact oracle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleChoice {
    SantaOpt,
    MinAlpha,
}

/// Ground truth as a solution file.
pub fn oracle_solution(inst: &Instance, which: OracleChoice) -> Result<SolutionFile> {
    match (inst, which) {
        (Instance::Santa(exact), OracleChoice::SantaOpt) => {
            let opt = exact_santa_opt(exact)?;
            Ok(SolutionFile::from_allocation(&opt.sets, &opt.value, None))
        }
        (Instance::Hypergraph(gh), OracleChoice::MinAlpha) => Ok(SolutionFile::from_matching(&exact_min_alpha_grouped(gh)?.matching)),
        _ => Err(Error::Contract("oracle does not apply to this instance type".into())),
    }
}
