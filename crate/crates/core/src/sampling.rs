//! Size classes of configurations and the nested random resource hierarchy
//! `R_0 ⊇ R_1 ⊇ … ⊇ R_d`, where each resource of `R_k` survives into
//! `R_{k+1}` independently with probability `1/ell`.
//!
//! Classes use a shift `offset`: class 0 holds sizes below `ell^(offset+1)`
//! and class `k >= 1` holds sizes in `[ell^(k+offset), ell^(k+offset+1))`.
//! The analysis uses `offset = 3`; smaller shifts make the levels visible on
//! small inputs. Here `depth` is the largest non-empty class, so the
//! hierarchy has `depth + 1` levels.

use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::model::GroupedHypergraph;
use crate::rng::RngSeed;

/// Class shift used by the analysis.
pub const THEORY_CLASS_OFFSET: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeClasses {
    pub ell: usize,
    pub offset: u32,
    pub class_of: Vec<usize>,
    pub depth: usize,
}

impl SizeClasses {
    pub fn new(h: &GroupedHypergraph, ell: usize, offset: u32) -> Result<Self> {
        if ell < 2 {
            return contract("size classes need ell >= 2");
        }
        let class_of: Vec<usize> =
            h.configurations.iter().map(|c| class_index(c.len(), ell, offset)).collect();
        let depth = class_of.iter().copied().max().unwrap_or(0);
        Ok(SizeClasses { ell, offset, class_of, depth })
    }

    /// Configurations of class exactly `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.class_of.len()).filter(|&c| self.class_of[c] == k).collect()
    }

    /// Lower end of the size range of class `k`.
    pub fn lower_bound(&self, k: usize) -> u128 {
        if k == 0 {
            0
        } else {
            pow_sat(self.ell, k as u32 + self.offset)
        }
    }
}

pub(crate) fn pow_sat(base: usize, exp: u32) -> u128 {
    (base as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

pub fn class_index(size: usize, ell: usize, offset: u32) -> usize {
    let size = size as u128;
    let mut k = 0usize;
    while pow_sat(ell, k as u32 + offset + 1) <= size {
        k += 1;
    }
    k
}

/// `level_of[r]` is the largest `k` with `r ∈ R_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceHierarchy {
    pub ell: usize,
    pub depth: usize,
    pub level_of: Vec<usize>,
    pub seed: RngSeed,
    /// Number of draws it took to satisfy both checks.
    pub attempts: usize,
}

impl ResourceHierarchy {
    pub fn contains(&self, k: usize, r: usize) -> bool {
        self.level_of[r] >= k
    }

    pub fn mask(&self, k: usize) -> Vec<bool> {
        self.level_of.iter().map(|&l| l >= k).collect()
    }

    pub fn level(&self, k: usize) -> Vec<usize> {
        (0..self.level_of.len()).filter(|&r| self.level_of[r] >= k).collect()
    }

    /// `|R_k ∩ set|`.
    pub fn count_in(&self, k: usize, set: &[usize]) -> usize {
        set.iter().filter(|&&r| self.level_of[r] >= k).count()
    }
}

pub fn sample_hierarchy(resources: usize, ell: usize, depth: usize, seed: RngSeed) -> ResourceHierarchy {
    let mut rng = seed.rng();
    let mut level_of = vec![0usize; resources];
    for k in 1..=depth {
        for l in level_of.iter_mut().filter(|l| **l == k - 1) {
            if rng.gen_range(0..ell) == 0 {
                *l = k;
            }
        }
    }
    ResourceHierarchy { ell, depth, level_of, seed, attempts: 1 }
}

/// A configuration and level at which a check failed, with both sides of the
/// inequality in integer form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub level: usize,
    pub config: usize,
    pub lhs: u128,
    pub rhs: u128,
}

/// Every `C` of class at least `k >= 1` must satisfy
/// `|C|/(2 ell^k) <= |R_k ∩ C| <= 3|C|/(2 ell^k)`.
pub fn check_size_property(hier: &ResourceHierarchy, classes: &SizeClasses, h: &GroupedHypergraph) -> Vec<Witness> {
    let mut out = Vec::new();
    for (c, cfg) in h.configurations.iter().enumerate() {
        for k in 1..=classes.class_of[c].min(hier.depth) {
            let got = hier.count_in(k, &cfg.resources) as u128;
            let scaled = got.saturating_mul(2).saturating_mul(pow_sat(hier.ell, k as u32));
            let size = cfg.len() as u128;
            if scaled < size {
                out.push(Witness { level: k, config: c, lhs: size, rhs: scaled });
            } else if scaled > 3 * size {
                out.push(Witness { level: k, config: c, lhs: scaled, rhs: 3 * size });
            }
        }
    }
    out
}

/// Every `C` of class at least `k` must satisfy
/// `sum over C' of class k of |C' ∩ C ∩ R_k| <= (10/ell^k)(|C| + sum |C' ∩ C|)`.
pub fn check_overlap_property(hier: &ResourceHierarchy, classes: &SizeClasses, h: &GroupedHypergraph) -> Vec<Witness> {
    let inc = h.incidence();
    let mut out = Vec::new();
    for (c, cfg) in h.configurations.iter().enumerate() {
        for k in 0..=classes.class_of[c].min(hier.depth) {
            let (mut lhs, mut base) = (0u128, 0u128);
            for &r in &cfg.resources {
                let hits = inc[r].iter().filter(|&&o| classes.class_of[o] == k).count() as u128;
                base += hits;
                if hier.contains(k, r) {
                    lhs += hits;
                }
            }
            let left = lhs.saturating_mul(pow_sat(hier.ell, k as u32));
            let right = 10 * (cfg.len() as u128 + base);
            if left > right {
                out.push(Witness { level: k, config: c, lhs: left, rhs: right });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Upper,
    Lower,
}

/// Tail bound for a sum of independent variables in `[0, a]` with mean
/// `mu`: `P(X >= (1+d)mu) <= exp(-min(d, d^2) mu / (3a))` and
/// `P(X <= (1-d)mu) <= exp(-d^2 mu / (2a))`, the latter for `d` in `(0, 1)`.
pub fn chernoff_tail(mu: f64, delta: f64, a: f64, side: Tail) -> Result<f64> {
    // Written so that NaN inputs are rejected too.
    if mu.is_nan() || a.is_nan() || delta.is_nan() || mu < 0.0 || a <= 0.0 || delta < 0.0 {
        return contract(format!("chernoff_tail needs mu >= 0, a > 0, delta >= 0; got {mu}, {a}, {delta}"));
    }
    match side {
        Tail::Upper => Ok((-delta.min(delta * delta) * mu / (3.0 * a)).exp()),
        Tail::Lower if delta < 1.0 => Ok((-delta * delta * mu / (2.0 * a)).exp()),
        Tail::Lower => contract(format!("lower tail needs delta < 1, got {delta}")),
    }
}

/// Draws hierarchies from derived seeds until both checks pass.
pub fn resample_until_good(
    h: &GroupedHypergraph,
    classes: &SizeClasses,
    max_tries: usize,
    seed: RngSeed,
) -> Result<ResourceHierarchy> {
    let mut last = String::new();
    for attempt in 0..max_tries {
        let mut hier = sample_hierarchy(h.resources, classes.ell, classes.depth, seed.derive(attempt as u64));
        let size = check_size_property(&hier, classes, h);
        let overlap = check_overlap_property(&hier, classes, h);
        if size.is_empty() && overlap.is_empty() {
            hier.attempts = attempt + 1;
            return Ok(hier);
        }
        last = format!("{} size and {} overlap failures", size.len(), overlap.len());
        log::debug!("hierarchy attempt {attempt} rejected: {last}");
    }
    Err(Error::RetryExceeded { tries: max_tries, detail: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Configuration;
    use proptest::prelude::*;

    #[test]
    fn class_boundaries_with_theory_offset() {
        assert_eq!(class_index(15, 2, 3), 0);
        assert_eq!(class_index(16, 2, 3), 1);
        assert_eq!(class_index(31, 2, 3), 1);
        assert_eq!(class_index(32, 2, 3), 2);
        assert_eq!(class_index(0, 5, 3), 0);
    }

    #[test]
    fn single_level_hierarchy_when_all_small() {
        let h = GroupedHypergraph::from_plain(1, 4, vec![Configuration::new(0, vec![0, 1])]);
        let classes = SizeClasses::new(&h, 4, THEORY_CLASS_OFFSET).unwrap();
        assert_eq!(classes.depth, 0);
        let hier = resample_until_good(&h, &classes, 5, RngSeed(1)).unwrap();
        assert_eq!(hier.attempts, 1);
        assert!(hier.level_of.iter().all(|&l| l == 0));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_hierarchy(500, 3, 4, RngSeed(9)), sample_hierarchy(500, 3, 4, RngSeed(9)));
    }

    #[test]
    fn size_check_catches_empty_sample() {
        // A class-1 configuration whose resources all fell out of R_1.
        let h = GroupedHypergraph::from_plain(1, 8, vec![Configuration::new(0, (0..8).collect())]);
        let classes = SizeClasses::new(&h, 2, 2).unwrap();
        assert_eq!(classes.class_of, vec![1]);
        let hier = ResourceHierarchy { ell: 2, depth: 1, level_of: vec![0; 8], seed: RngSeed(0), attempts: 1 };
        assert_eq!(check_size_property(&hier, &classes, &h).len(), 1);
    }

    #[test]
    fn chernoff_values() {
        let b = chernoff_tail(100.0, 1.0, 1.0, Tail::Upper).unwrap();
        assert!((b - (-100.0f64 / 3.0).exp()).abs() < 1e-20);
        assert_eq!(chernoff_tail(50.0, 0.0, 1.0, Tail::Upper).unwrap(), 1.0);
        assert!(chernoff_tail(50.0, 1.5, 1.0, Tail::Lower).is_err());
        assert!(chernoff_tail(50.0, 0.5, 0.0, Tail::Upper).is_err());
    }

    #[test]
    fn chernoff_dominates_binomial_tail() {
        // Binomial(1000, 1/2): exact upper tail at 550 and lower tail at 450.
        let n = 1000u64;
        let log_pmf = |k: u64| -> f64 {
            let mut l = -(n as f64) * std::f64::consts::LN_2;
            for i in 0..k {
                l += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            }
            l
        };
        let upper: f64 = (550..=n).map(|k| log_pmf(k).exp()).sum();
        let lower: f64 = (0..=450).map(|k| log_pmf(k).exp()).sum();
        assert!(upper <= chernoff_tail(500.0, 0.1, 1.0, Tail::Upper).unwrap());
        assert!(lower <= chernoff_tail(500.0, 0.1, 1.0, Tail::Lower).unwrap());
    }

    proptest! {
        #[test]
        fn levels_are_nested(n in 1usize..300, ell in 2usize..6, depth in 0usize..4, seed: u64) {
            let hier = sample_hierarchy(n, ell, depth, RngSeed(seed));
            for k in 0..depth {
                let upper = hier.mask(k + 1);
                let lower = hier.mask(k);
                prop_assert!(upper.iter().zip(&lower).all(|(u, l)| !u || *l));
            }
            prop_assert!(hier.level_of.iter().all(|&l| l <= depth));
        }

        #[test]
        fn classes_respect_boundaries(size in 0usize..100_000, ell in 2usize..9, offset in 0u32..4) {
            let k = class_index(size, ell, offset);
            let s = size as u128;
            if k == 0 {
                prop_assert!(s < pow_sat(ell, offset + 1));
            } else {
                prop_assert!(pow_sat(ell, k as u32 + offset) <= s);
                prop_assert!(s < pow_sat(ell, k as u32 + offset + 1));
            }
        }
    }
}
