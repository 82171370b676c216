//! JSON file formats. Every number that may be fractional is written as a
//! `"p/q"` string (decimals are accepted on input) so that files are exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, Group, GroupedHypergraph, RelaxedMatching, SantaInstance};
use crate::scalar::{format_rational, parse_rational};
use crate::submodular::ValuationOracle;
use crate::{ExactInstance, ExactValuation, Rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileKind {
    Santa,
    Hypergraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValuationFile {
    Linear { values: Vec<String> },
    Coverage { sets: Vec<Vec<usize>>, weights: Vec<String> },
    BudgetedAdditive { values: Vec<String>, budget: String },
    MatroidRank { blocks: Vec<usize>, capacities: Vec<usize> },
    Table { ground: usize, values: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationFile {
    pub player: usize,
    pub resources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub players: Vec<usize>,
    pub consistent_sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(rename = "type")]
    pub kind: FileKind,
    pub players: usize,
    pub resources: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<ValuationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configurations: Option<Vec<ConfigurationFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<GroupFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
}

/// A parsed instance of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Santa(ExactInstance),
    Hypergraph(GroupedHypergraph),
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn parse_one(s: &str) -> Result<Rational> {
    parse_rational(s).ok_or_else(|| Error::Parse(format!("not a number: {s:?}")))
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_one(s)).collect()
}

impl ValuationFile {
    pub fn from_oracle(f: &ExactValuation) -> Self {
        match f {
            ValuationOracle::Linear { values } => ValuationFile::Linear { values: strings(values) },
            ValuationOracle::Coverage { sets, weights } => {
                ValuationFile::Coverage { sets: sets.clone(), weights: strings(weights) }
            }
            ValuationOracle::BudgetedAdditive { values, budget } => {
                ValuationFile::BudgetedAdditive { values: strings(values), budget: format_rational(budget) }
            }
            ValuationOracle::MatroidRank { blocks, capacities } => {
                ValuationFile::MatroidRank { blocks: blocks.clone(), capacities: capacities.clone() }
            }
            ValuationOracle::Table { ground, values } => ValuationFile::Table { ground: *ground, values: strings(values) },
        }
    }

    pub fn to_oracle(&self) -> Result<ExactValuation> {
        let f = match self {
            ValuationFile::Linear { values } => ValuationOracle::Linear { values: parse_all(values)? },
            ValuationFile::Coverage { sets, weights } => {
                ValuationOracle::Coverage { sets: sets.clone(), weights: parse_all(weights)? }
            }
            ValuationFile::BudgetedAdditive { values, budget } => {
                ValuationOracle::BudgetedAdditive { values: parse_all(values)?, budget: parse_one(budget)? }
            }
            ValuationFile::MatroidRank { blocks, capacities } => {
                ValuationOracle::MatroidRank { blocks: blocks.clone(), capacities: capacities.clone() }
            }
            ValuationFile::Table { ground, values } => ValuationOracle::Table { ground: *ground, values: parse_all(values)? },
        };
        f.check_shape().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(f)
    }
}

impl InstanceFile {
    pub fn from_santa(inst: &ExactInstance) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            kind: FileKind::Santa,
            players: inst.players,
            resources: inst.resources,
            gamma: Some(inst.gamma.clone()),
            valuation: Some(ValuationFile::from_oracle(&inst.valuation)),
            configurations: None,
            groups: None,
            ell: None,
        }
    }

    pub fn from_hypergraph(gh: &GroupedHypergraph) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            kind: FileKind::Hypergraph,
            players: gh.player_count(),
            resources: gh.resources,
            gamma: None,
            valuation: None,
            configurations: Some(
                gh.configurations.iter().map(|c| ConfigurationFile { player: c.player, resources: c.resources.clone() }).collect(),
            ),
            groups: Some(
                gh.groups
                    .iter()
                    .map(|g| GroupFile { players: g.players.clone(), consistent_sets: g.consistent_sets.clone() })
                    .collect(),
            ),
            ell: Some(gh.ell),
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema version {}", self.schema_version)));
        }
        let missing = |what: &str| Error::Parse(format!("{what} is required for this instance type"));
        match self.kind {
            FileKind::Santa => {
                let gamma = self.gamma.ok_or_else(|| missing("gamma"))?;
                let valuation = self.valuation.ok_or_else(|| missing("valuation"))?.to_oracle()?;
                Ok(Instance::Santa(SantaInstance::new(self.players, self.resources, gamma, valuation)?))
            }
            FileKind::Hypergraph => {
                let configurations: Vec<Configuration> = self
                    .configurations
                    .ok_or_else(|| missing("configurations"))?
                    .into_iter()
                    .map(|c| Configuration::new(c.player, c.resources))
                    .collect();
                let gh = match self.groups {
                    Some(groups) => {
                        let groups = groups
                            .into_iter()
                            .map(|g| Group { players: g.players, consistent_sets: g.consistent_sets })
                            .collect();
                        let ell = self.ell.ok_or_else(|| missing("ell"))?;
                        GroupedHypergraph { resources: self.resources, ell, groups, configurations }
                    }
                    None => {
                        let mut gh = GroupedHypergraph::from_plain(self.players, self.resources, configurations);
                        if let Some(ell) = self.ell {
                            gh.ell = ell;
                        }
                        gh
                    }
                };
                gh.validate()?;
                if gh.player_count() != self.players {
                    return Err(Error::Structural(format!(
                        "file declares {} players but the groups hold {}",
                        self.players,
                        gh.player_count()
                    )));
                }
                Ok(Instance::Hypergraph(gh))
            }
        }
    }
}

impl Instance {
    pub fn to_file(&self) -> InstanceFile {
        match self {
            Instance::Santa(inst) => InstanceFile::from_santa(inst),
            Instance::Hypergraph(gh) => InstanceFile::from_hypergraph(gh),
        }
    }
}

/// Solution of either family. Santa solutions leave `chosen` empty and
/// report the allocation in `assigned`; `alpha` is the matching factor and
/// `value` the minimum player value, each when meaningful.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub schema_version: u32,
    #[serde(rename = "type")]
    pub kind: FileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Vec<usize>>,
    pub assigned: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl SolutionFile {
    pub fn from_matching(m: &RelaxedMatching) -> Self {
        SolutionFile {
            schema_version: SCHEMA_VERSION,
            kind: FileKind::Hypergraph,
            chosen: Some(m.chosen.clone()),
            assigned: m.assigned.clone(),
            alpha: Some(format_rational(&m.alpha)),
            value: None,
        }
    }

    pub fn from_allocation(sets: &[Vec<usize>], value: &Rational, alpha: Option<&Rational>) -> Self {
        SolutionFile {
            schema_version: SCHEMA_VERSION,
            kind: FileKind::Santa,
            chosen: None,
            assigned: sets.to_vec(),
            alpha: alpha.map(format_rational),
            value: Some(format_rational(value)),
        }
    }

    pub fn matching(&self) -> Result<RelaxedMatching> {
        let chosen = self.chosen.clone().ok_or_else(|| Error::Parse("matching solution needs chosen".into()))?;
        let alpha = parse_one(self.alpha.as_deref().ok_or_else(|| Error::Parse("matching solution needs alpha".into()))?)?;
        Ok(RelaxedMatching { chosen, assigned: self.assigned.clone(), alpha })
    }

    pub fn claimed_value(&self) -> Result<Option<Rational>> {
        self.value.as_deref().map(parse_one).transpose()
    }
}

/// Pretty JSON with a trailing newline; key order follows the structs, so
/// equal values give equal bytes.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_bytes(value)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    read_json::<InstanceFile>(path)?.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{hypergraph_grouped, santa_instance, OracleKind};
    use crate::RngSeed;

    #[test]
    fn santa_round_trip() {
        for kind in OracleKind::ALL {
            let inst = santa_instance(kind, 3, 5, 0.5, RngSeed(4)).unwrap();
            let file = InstanceFile::from_santa(&inst);
            let bytes = to_json_bytes(&file).unwrap();
            let back: InstanceFile = serde_json::from_slice(&bytes).unwrap();
            assert_eq!(back.into_instance().unwrap(), Instance::Santa(inst));
        }
    }

    #[test]
    fn grouped_round_trip() {
        let gh = hypergraph_grouped(3, 2, 3, 4, 10, RngSeed(8)).unwrap();
        let bytes = to_json_bytes(&InstanceFile::from_hypergraph(&gh)).unwrap();
        let back: InstanceFile = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back.into_instance().unwrap(), Instance::Hypergraph(gh));
    }

    #[test]
    fn rejects_unknown_version_and_bad_numbers() {
        let text = r#"{"schema_version": 9, "type": "santa", "players": 1, "resources": 1,
            "gamma": [[0]], "valuation": {"kind": "linear", "values": ["1"]}}"#;
        let file: InstanceFile = serde_json::from_str(text).unwrap();
        assert!(matches!(file.into_instance(), Err(Error::Parse(_))));
        let text = r#"{"schema_version": 1, "type": "santa", "players": 1, "resources": 1,
            "gamma": [[0]], "valuation": {"kind": "linear", "values": ["x"]}}"#;
        let file: InstanceFile = serde_json::from_str(text).unwrap();
        assert!(matches!(file.into_instance(), Err(Error::Parse(_))));
    }

    #[test]
    fn decimals_are_exact() {
        let file = ValuationFile::Linear { values: vec!["0.1".into(), "3/4".into()] };
        let ValuationOracle::Linear { values } = file.to_oracle().unwrap() else { unreachable!() };
        assert_eq!(values[0], Rational::new(1.into(), 10.into()));
    }
}
