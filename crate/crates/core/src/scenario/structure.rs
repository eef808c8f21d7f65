use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Latent,
    Observed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<usize>,
}

impl Node {
    pub fn latent(id: &str) -> Self {
        Node {
            id: id.to_string(),
            kind: NodeKind::Latent,
            cardinality: None,
        }
    }

    pub fn observed(id: &str, cardinality: usize) -> Self {
        Node {
            id: id.to_string(),
            kind: NodeKind::Observed,
            cardinality: Some(cardinality),
        }
    }

    pub fn is_latent(&self) -> bool {
        self.kind == NodeKind::Latent
    }
}

/// A DAG over latent and observed nodes. Edge order is significant: it fixes
/// slot order for parties and copy numbering during interruption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalStructure {
    pub nodes: Vec<Node>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StructureClass {
    Correlation,
    Network,
    LatentExogenous,
    NonExogenous,
}

/// Parses and validates a scenario document.
pub fn parse_structure(text: &str) -> Result<CausalStructure> {
    let s: CausalStructure = serde_json::from_str(text).map_err(Error::from_json)?;
    s.validate()?;
    Ok(s)
}

impl CausalStructure {
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str)]) -> Result<Self> {
        let s = CausalStructure {
            nodes,
            edges: edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::NoNodes);
        }
        let mut seen = HashSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(Error::DuplicateId(node.id.clone()));
            }
            if node.kind == NodeKind::Observed {
                match node.cardinality {
                    Some(c) if c >= 1 => {}
                    Some(_) => {
                        return Err(Error::InvalidStructure(format!(
                            "observed node `{}` has cardinality 0",
                            node.id
                        )))
                    }
                    None => {
                        return Err(Error::InvalidStructure(format!(
                            "observed node `{}` lacks a cardinality",
                            node.id
                        )))
                    }
                }
            }
        }
        let mut edge_set = HashSet::new();
        for (p, c) in &self.edges {
            for id in [p, c] {
                if !seen.contains(id.as_str()) {
                    return Err(Error::UnknownNode(id.clone()));
                }
            }
            if p == c {
                return Err(Error::Cycle(p.clone()));
            }
            if !edge_set.insert((p, c)) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate edge {p} -> {c}"
                )));
            }
        }
        self.topological_order().map(|_| ())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    fn index_map(&self) -> HashMap<&str, usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect()
    }

    /// Parent indices of node `i`, in edge order.
    pub fn parents(&self, i: usize) -> Vec<usize> {
        let id = &self.nodes[i].id;
        self.edges
            .iter()
            .filter(|(_, c)| c == id)
            .filter_map(|(p, _)| self.index_of(p))
            .collect()
    }

    /// Child indices of node `i`, in edge order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        let id = &self.nodes[i].id;
        self.edges
            .iter()
            .filter(|(p, _)| p == id)
            .filter_map(|(_, c)| self.index_of(c))
            .collect()
    }

    pub fn is_root(&self, i: usize) -> bool {
        !self.edges.iter().any(|(_, c)| *c == self.nodes[i].id)
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        !self.edges.iter().any(|(p, _)| *p == self.nodes[i].id)
    }

    /// Kahn's algorithm, lowest index first among ready nodes.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let idx = self.index_map();
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, c) in &self.edges {
            let (pi, ci) = match (idx.get(p.as_str()), idx.get(c.as_str())) {
                (Some(&a), Some(&b)) => (a, b),
                (None, _) => return Err(Error::UnknownNode(p.clone())),
                (_, None) => return Err(Error::UnknownNode(c.clone())),
            };
            out[pi].push(ci);
            indeg[ci] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &c in &out[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(Error::Cycle(self.nodes[stuck].id.clone()));
        }
        Ok(order)
    }

    /// All (transitive) descendants of node `i`.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = self.children(i);
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                out.push(v);
                stack.extend(self.children(v));
            }
        }
        out.sort_unstable();
        out
    }

    /// Rejects latent nodes from which no observed node can be reached.
    pub fn check_latent_leaves(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.is_latent()
                && !self
                    .descendants(i)
                    .iter()
                    .any(|&d| !self.nodes[d].is_latent())
            {
                return Err(Error::Unsupported(format!(
                    "latent node `{}` has no observed descendant",
                    node.id
                )));
            }
        }
        Ok(())
    }

    pub fn observed_roots(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].is_latent() && self.is_root(i))
            .collect()
    }
}

/// Most specific class of a structure; `Correlation ⊂ Network ⊂ LatentExogenous`.
pub fn classify(s: &CausalStructure) -> StructureClass {
    let n = s.nodes.len();
    if (0..n).any(|i| s.nodes[i].is_latent() && !s.is_root(i)) {
        return StructureClass::NonExogenous;
    }
    let two_layer = s.edges.iter().all(|(p, c)| {
        let (pi, ci) = (s.index_of(p).unwrap(), s.index_of(c).unwrap());
        s.is_root(pi) && s.is_leaf(ci) && !s.nodes[ci].is_latent()
    });
    let settings_ok = (0..n)
        .filter(|&i| !s.nodes[i].is_latent() && s.is_root(i))
        .all(|i| s.children(i).len() == 1);
    if !(two_layer && settings_ok) {
        return StructureClass::LatentExogenous;
    }
    if s.observed_roots().is_empty() {
        StructureClass::Correlation
    } else {
        StructureClass::Network
    }
}
