use serde::{Deserialize, Serialize};

use super::structure::{classify, CausalStructure, Node, NodeKind, StructureClass};
use crate::error::{Error, Result};

/// A split copy must equal the observed value of `original`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostSelection {
    pub copy: String,
    pub original: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransformReport {
    pub post_selection: Vec<PostSelection>,
    /// Groups of setting-associated variables whose joint law must factorize.
    pub setting_factorization: Vec<Vec<String>>,
}

impl TransformReport {
    pub fn is_empty(&self) -> bool {
        self.post_selection.is_empty() && self.setting_factorization.is_empty()
    }

    pub fn merge(&mut self, other: TransformReport) {
        self.post_selection.extend(other.post_selection);
        for g in other.setting_factorization {
            if !self.setting_factorization.contains(&g) {
                self.setting_factorization.push(g);
            }
        }
    }

    /// Original observed node a copy stands for (identity for non-copies).
    pub fn original_of<'a>(&'a self, id: &'a str) -> &'a str {
        self.post_selection
            .iter()
            .find(|p| p.copy == id)
            .map(|p| p.original.as_str())
            .unwrap_or(id)
    }
}

/// Observed children merged after removing a non-exogenous latent node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndogenousGroupSpec {
    pub members: Vec<String>,
    /// Observed parents of the removed node; they index the members' letters.
    pub settings: Vec<String>,
    /// Latent root ancestors of the removed node, in node order.
    pub sources: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exogenized {
    pub structure: CausalStructure,
    pub groups: Vec<EndogenousGroupSpec>,
}

/// Maximal interruption: every observed non-leaf node with more than one
/// neighbour is split into one root copy per outgoing edge.
pub fn interrupt(s: &CausalStructure) -> Result<(CausalStructure, TransformReport)> {
    if classify(s) == StructureClass::NonExogenous {
        return Err(Error::Unsupported(
            "interruption requires a latent-exogenous structure".into(),
        ));
    }
    s.check_latent_leaves()?;
    let order = s.topological_order()?;
    let mut out = s.clone();
    let mut report = TransformReport::default();
    let mut removed = Vec::new();
    for &i in order.iter().rev() {
        let node = &s.nodes[i];
        if node.is_latent() || s.is_leaf(i) {
            continue;
        }
        let parents = s.parents(i);
        let children = s.children(i);
        let mut neighbours: Vec<usize> = parents.iter().chain(&children).copied().collect();
        neighbours.sort_unstable();
        neighbours.dedup();
        if neighbours.len() < 2 {
            continue;
        }
        let mut child_index = 0;
        for edge in out.edges.iter_mut() {
            if edge.0 == node.id {
                child_index += 1;
                let copy = format!("{}_{}#", node.id, child_index);
                edge.0 = copy.clone();
                out.nodes.push(Node {
                    id: copy.clone(),
                    kind: NodeKind::Observed,
                    cardinality: node.cardinality,
                });
                report.post_selection.push(PostSelection {
                    copy,
                    original: node.id.clone(),
                });
            }
        }
        if parents.is_empty() {
            removed.push(node.id.clone());
        }
    }
    out.nodes.retain(|n| !removed.contains(&n.id));
    if !report.post_selection.is_empty() {
        let roots: Vec<String> = s
            .observed_roots()
            .into_iter()
            .map(|i| s.nodes[i].id.clone())
            .collect();
        if !roots.is_empty() {
            report.setting_factorization.push(roots);
        }
    }
    out.validate()?;
    Ok((out, report))
}

/// Removes non-exogenous latent nodes innermost first, merging their observed
/// children into endogenous groups.
pub fn exogenize(s: &CausalStructure) -> Result<(Exogenized, TransformReport)> {
    s.check_latent_leaves()?;
    let mut cur = s.clone();
    let mut groups: Vec<EndogenousGroupSpec> = Vec::new();
    loop {
        let n = cur.nodes.len();
        let pending: Vec<usize> = (0..n)
            .filter(|&i| cur.nodes[i].is_latent() && !cur.is_root(i))
            .collect();
        let Some(&target) = pending.iter().find(|&&i| {
            !cur
                .descendants(i)
                .iter()
                .any(|d| pending.contains(d))
        }) else {
            break;
        };
        let id = cur.nodes[target].id.clone();
        let (sources, settings) = ancestry(&cur, target)?;
        let mut members = Vec::new();
        for c in cur.children(target) {
            let cn = &cur.nodes[c];
            if cn.is_latent() {
                return Err(Error::Unsupported(format!(
                    "latent node `{id}` feeds latent node `{}`",
                    cn.id
                )));
            }
            members.push(cn.id.clone());
        }
        cur.edges.retain(|(p, c)| *p != id && *c != id);
        cur.nodes.retain(|nd| nd.id != id);
        for m in &members {
            for r in sources.iter().chain(&settings) {
                let e = (r.clone(), m.clone());
                if !cur.edges.contains(&e) {
                    cur.edges.push(e);
                }
            }
        }
        if members.is_empty() {
            continue;
        }
        // A member of an earlier group may be absorbed again; keep groups disjoint.
        let mut merged = EndogenousGroupSpec {
            members,
            settings,
            sources,
        };
        let mut k = 0;
        while k < groups.len() {
            if groups[k].members.iter().any(|m| merged.members.contains(m)) {
                let old = groups.remove(k);
                for m in old.members {
                    if !merged.members.contains(&m) {
                        merged.members.push(m);
                    }
                }
                for x in old.settings {
                    if !merged.settings.contains(&x) {
                        merged.settings.push(x);
                    }
                }
                for x in old.sources {
                    if !merged.sources.contains(&x) {
                        merged.sources.push(x);
                    }
                }
            } else {
                k += 1;
            }
        }
        groups.push(merged);
    }
    cur.validate()?;
    Ok((
        Exogenized {
            structure: cur,
            groups,
        },
        TransformReport::default(),
    ))
}

/// Latent root ancestors of `i` and the observed roots feeding `i` or any of
/// its non-root latent ancestors.
fn ancestry(s: &CausalStructure, i: usize) -> Result<(Vec<String>, Vec<String>)> {
    let mut seen = vec![false; s.nodes.len()];
    let mut stack = vec![i];
    let mut roots = Vec::new();
    let mut settings = Vec::new();
    while let Some(v) = stack.pop() {
        for p in s.parents(v) {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            let pn = &s.nodes[p];
            if !pn.is_latent() {
                if !s.is_root(p) {
                    return Err(Error::Unsupported(format!(
                        "latent node `{}` has non-root observed parent `{}`",
                        s.nodes[v].id, pn.id
                    )));
                }
                settings.push(p);
            } else if s.is_root(p) {
                roots.push(p);
            } else {
                stack.push(p);
            }
        }
    }
    roots.sort_unstable();
    settings.sort_unstable();
    let name = |v: Vec<usize>| v.into_iter().map(|r| s.nodes[r].id.clone()).collect();
    Ok((name(roots), name(settings)))
}
