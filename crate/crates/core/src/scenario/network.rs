use serde::{Deserialize, Serialize};

use super::structure::{classify, CausalStructure, StructureClass};
use super::transform::{EndogenousGroupSpec, TransformReport};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingNode {
    pub id: String,
    pub cardinality: usize,
    /// Observed variable of the original structure this setting copies.
    pub original: String,
}

/// One incoming subsystem of a party. Ordinary slots carry one source;
/// endogenous slots carry every latent root ancestor of the removed node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub sources: Vec<usize>,
    pub group: Option<usize>,
}

impl Slot {
    pub fn arity(&self) -> usize {
        self.sources.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub id: String,
    pub outcomes: usize,
    pub slots: Vec<Slot>,
    /// Indices into `NetworkScenario::settings`, in edge order.
    pub settings: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMember {
    pub party: usize,
    pub slot: usize,
    /// Positions in the party's setting list that control commutation.
    pub controlling: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndogenousGroup {
    pub members: Vec<GroupMember>,
    pub sources: Vec<usize>,
}

/// Two-layer scenario: latent sources and setting roots feeding observed parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub sources: Vec<String>,
    pub settings: Vec<SettingNode>,
    pub parties: Vec<Party>,
    pub groups: Vec<EndogenousGroup>,
}

impl NetworkScenario {
    /// Builds a network scenario from a structure classified as network or
    /// correlation; `groups` and `report` come from earlier rewriting.
    pub fn from_structure(
        s: &CausalStructure,
        groups: &[EndogenousGroupSpec],
        report: &TransformReport,
    ) -> Result<Self> {
        match classify(s) {
            StructureClass::Correlation | StructureClass::Network => {}
            other => {
                return Err(Error::Unsupported(format!(
                    "structure is {other:?}, not a network scenario"
                )))
            }
        }
        let n = s.nodes.len();
        let source_nodes: Vec<usize> = (0..n).filter(|&i| s.nodes[i].is_latent()).collect();
        let setting_nodes: Vec<usize> = s.observed_roots();
        let sources: Vec<String> = source_nodes.iter().map(|&i| s.nodes[i].id.clone()).collect();
        let settings: Vec<SettingNode> = setting_nodes
            .iter()
            .map(|&i| SettingNode {
                id: s.nodes[i].id.clone(),
                cardinality: s.nodes[i].cardinality.unwrap_or(1),
                original: report.original_of(&s.nodes[i].id).to_string(),
            })
            .collect();
        let source_pos = |id: &str| sources.iter().position(|x| x == id);
        let mut parties = Vec::new();
        for i in 0..n {
            let node = &s.nodes[i];
            if node.is_latent() || s.is_root(i) {
                continue;
            }
            let outcomes = node.cardinality.unwrap_or(1);
            if outcomes < 2 {
                return Err(Error::InvalidStructure(format!(
                    "party `{}` needs at least 2 outcomes",
                    node.id
                )));
            }
            let group = groups.iter().position(|g| g.members.contains(&node.id));
            let compound: Vec<usize> = group
                .map(|g| {
                    groups[g]
                        .sources
                        .iter()
                        .filter_map(|x| source_pos(x))
                        .collect()
                })
                .unwrap_or_default();
            let mut slots: Vec<Slot> = Vec::new();
            let mut party_settings = Vec::new();
            let mut compound_done = false;
            for p in s.parents(i) {
                let pid = &s.nodes[p].id;
                if let Some(src) = source_pos(pid) {
                    if compound.contains(&src) {
                        if !compound_done {
                            compound_done = true;
                            slots.push(Slot {
                                sources: compound.clone(),
                                group,
                            });
                        }
                    } else {
                        slots.push(Slot {
                            sources: vec![src],
                            group: None,
                        });
                    }
                } else if let Some(x) = settings.iter().position(|x| x.id == *pid) {
                    party_settings.push(x);
                }
            }
            if group.is_some() && !compound_done && !compound.is_empty() {
                slots.push(Slot {
                    sources: compound.clone(),
                    group,
                });
            }
            if slots.is_empty() {
                return Err(Error::InvalidStructure(format!(
                    "party `{}` has no latent source",
                    node.id
                )));
            }
            parties.push(Party {
                id: node.id.clone(),
                outcomes,
                slots,
                settings: party_settings,
            });
        }
        let mut out_groups = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            let mut members = Vec::new();
            for m in &g.members {
                let party = parties
                    .iter()
                    .position(|p| p.id == *m)
                    .ok_or_else(|| Error::UnknownNode(m.clone()))?;
                let slot = parties[party]
                    .slots
                    .iter()
                    .position(|sl| sl.group == Some(gi))
                    .ok_or_else(|| {
                        Error::InvalidStructure(format!("group member `{m}` lacks its slot"))
                    })?;
                let controlling = parties[party]
                    .settings
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| g.settings.contains(&settings[x].original))
                    .map(|(pos, _)| pos)
                    .collect();
                members.push(GroupMember {
                    party,
                    slot,
                    controlling,
                });
            }
            out_groups.push(EndogenousGroup {
                members,
                sources: g.sources.iter().filter_map(|x| source_pos(x)).collect(),
            });
        }
        Ok(NetworkScenario {
            sources,
            settings,
            parties,
            groups: out_groups,
        })
    }

    pub fn party_index(&self, id: &str) -> Option<usize> {
        self.parties.iter().position(|p| p.id == id)
    }

    /// Number of joint setting values of a party (1 without settings).
    pub fn setting_count(&self, party: usize) -> usize {
        self.parties[party]
            .settings
            .iter()
            .map(|&x| self.settings[x].cardinality)
            .product()
    }

    /// Decodes a party's flattened setting index into per-setting values
    /// (row-major, first setting slowest).
    pub fn decode_setting(&self, party: usize, mut flat: usize) -> Vec<usize> {
        let cards: Vec<usize> = self.parties[party]
            .settings
            .iter()
            .map(|&x| self.settings[x].cardinality)
            .collect();
        let mut out = vec![0; cards.len()];
        for (slot, &c) in cards.iter().enumerate().rev() {
            out[slot] = flat % c;
            flat /= c;
        }
        out
    }

    /// Flattens per-setting values of a party into one index.
    pub fn encode_setting(&self, party: usize, values: &[usize]) -> usize {
        self.parties[party]
            .settings
            .iter()
            .zip(values)
            .fold(0, |acc, (&x, &v)| acc * self.settings[x].cardinality + v)
    }

    /// Group membership of a party slot.
    pub fn member_of(&self, party: usize, slot: usize) -> Option<(usize, usize)> {
        self.groups.iter().enumerate().find_map(|(g, grp)| {
            grp.members
                .iter()
                .position(|m| m.party == party && m.slot == slot)
                .map(|k| (g, k))
        })
    }
}
