use serde::{Deserialize, Serialize};

use super::network::NetworkScenario;
use super::structure::CausalStructure;
use super::transform::TransformReport;
use crate::error::{Error, Result};

pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Joint probability table, flat row-major over `variables` (last fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub variables: Vec<String>,
    #[serde(skip)]
    pub cardinalities: Vec<usize>,
    pub table: Vec<f64>,
}

impl Distribution {
    pub fn new(variables: Vec<String>, cardinalities: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let d = Distribution {
            variables,
            cardinalities,
            table,
        };
        d.validate()?;
        Ok(d)
    }

    /// Parses a distribution document, taking cardinalities from `s`.
    pub fn parse(text: &str, s: &CausalStructure) -> Result<Self> {
        let mut d: Distribution = serde_json::from_str(text).map_err(Error::from_json)?;
        d.cardinalities = d
            .variables
            .iter()
            .map(|v| {
                let i = s.index_of(v).ok_or_else(|| Error::UnknownNode(v.clone()))?;
                s.nodes[i].cardinality.ok_or_else(|| {
                    Error::Distribution(format!("variable `{v}` is latent"))
                })
            })
            .collect::<Result<_>>()?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.cardinalities.len() != self.variables.len() {
            return Err(Error::Distribution(
                "cardinalities do not match variables".into(),
            ));
        }
        let size: usize = self.cardinalities.iter().product();
        if size != self.table.len() {
            return Err(Error::Distribution(format!(
                "table has {} entries, expected {size}",
                self.table.len()
            )));
        }
        if let Some(p) = self.table.iter().find(|p| !p.is_finite() || **p < -NORMALIZATION_TOL) {
            return Err(Error::Distribution(format!("invalid probability {p}")));
        }
        let total: f64 = self.table.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Distribution(format!(
                "table sums to {total}, not 1"
            )));
        }
        Ok(())
    }

    pub fn flat_index(&self, values: &[usize]) -> usize {
        self.cardinalities
            .iter()
            .zip(values)
            .fold(0, |acc, (&c, &v)| acc * c + v)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.cardinalities.len()];
        for (k, &c) in self.cardinalities.iter().enumerate().rev() {
            out[k] = flat % c;
            flat /= c;
        }
        out
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    /// Marginal over `vars` (row-major in the given order).
    pub fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let cards: Vec<usize> = vars.iter().map(|&v| self.cardinalities[v]).collect();
        let mut out = vec![0.0; cards.iter().product()];
        for (flat, &p) in self.table.iter().enumerate() {
            let vals = self.unflatten(flat);
            let idx = vars
                .iter()
                .zip(&cards)
                .fold(0, |acc, (&v, &c)| acc * c + vals[v]);
            out[idx] += p;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactorizationCheck {
    pub passes: bool,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub conditions: Vec<usize>,
    /// `None` when the condition has probability zero.
    pub probabilities: Option<Vec<f64>>,
}

/// P(outputs | conditions) of the original structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionalTarget {
    pub outputs: Vec<String>,
    pub output_cardinalities: Vec<usize>,
    pub conditions: Vec<String>,
    pub condition_cardinalities: Vec<usize>,
    pub rows: Vec<ConditionalRow>,
    pub factorization: FactorizationCheck,
    pub warnings: Vec<String>,
}

/// Constraint on one network cell: ρ(Π_v E_{a_v | x_v}) = probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetCell {
    /// 0-based outcome per network party.
    pub outcomes: Vec<usize>,
    /// Value per network setting node.
    pub settings: Vec<usize>,
    pub probability: f64,
}

const FACTORIZATION_TOL: f64 = 1e-9;

fn mixed_radix(cards: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (k, &c) in cards.iter().enumerate().rev() {
        out[k] = flat % c;
        flat /= c;
    }
    out
}

/// Conditions `p` on the observed roots of `s` and tests whether their joint
/// law is a product of marginals.
pub fn conditional_target(
    p: &Distribution,
    s: &CausalStructure,
    report: &TransformReport,
) -> Result<ConditionalTarget> {
    p.validate()?;
    let observed: Vec<usize> = (0..s.nodes.len())
        .filter(|&i| !s.nodes[i].is_latent())
        .collect();
    if observed.len() != p.variables.len() {
        return Err(Error::Distribution(format!(
            "distribution has {} variables, structure has {} observed nodes",
            p.variables.len(),
            observed.len()
        )));
    }
    let pos = |i: usize| {
        p.position(&s.nodes[i].id)
            .ok_or_else(|| Error::Distribution(format!("variable `{}` missing", s.nodes[i].id)))
    };
    let roots = s.observed_roots();
    let outs: Vec<usize> = observed.iter().copied().filter(|i| !roots.contains(i)).collect();
    let root_pos: Vec<usize> = roots.iter().map(|&i| pos(i)).collect::<Result<_>>()?;
    let out_pos: Vec<usize> = outs.iter().map(|&i| pos(i)).collect::<Result<_>>()?;
    for &i in &observed {
        let pi = pos(i)?;
        if p.cardinalities[pi] != s.nodes[i].cardinality.unwrap_or(0) {
            return Err(Error::Distribution(format!(
                "cardinality of `{}` disagrees with the structure",
                s.nodes[i].id
            )));
        }
    }

    let joint = p.marginal(&root_pos);
    let cond_cards: Vec<usize> = root_pos.iter().map(|&v| p.cardinalities[v]).collect();
    let singles: Vec<Vec<f64>> = root_pos.iter().map(|&v| p.marginal(&[v])).collect();
    let mut max_dev: f64 = 0.0;
    for (flat, &pj) in joint.iter().enumerate() {
        let vals = mixed_radix(&cond_cards, flat);
        let prod: f64 = vals.iter().enumerate().map(|(k, &v)| singles[k][v]).product();
        max_dev = max_dev.max((pj - prod).abs());
    }
    let mut groups_ok = true;
    for group in &report.setting_factorization {
        if group.iter().any(|g| !roots.iter().any(|&r| s.nodes[r].id == *g)) {
            groups_ok = false;
        }
    }
    let factorization = FactorizationCheck {
        passes: groups_ok && max_dev <= FACTORIZATION_TOL,
        max_deviation: max_dev,
    };

    let mut order = out_pos.clone();
    order.extend(&root_pos);
    let full = p.marginal(&order);
    let out_cards: Vec<usize> = out_pos.iter().map(|&v| p.cardinalities[v]).collect();
    let n_out: usize = out_cards.iter().product();
    let n_cond = joint.len();
    let mut rows = Vec::with_capacity(n_cond);
    let mut warnings = Vec::new();
    for c in 0..n_cond {
        let conditions = mixed_radix(&cond_cards, c);
        let pc = joint[c];
        let probabilities = if pc > 0.0 {
            Some((0..n_out).map(|o| full[o * n_cond + c] / pc).collect())
        } else {
            warnings.push(format!(
                "setting combination {conditions:?} has probability zero; its constraints are skipped"
            ));
            None
        };
        rows.push(ConditionalRow {
            conditions,
            probabilities,
        });
    }
    Ok(ConditionalTarget {
        outputs: outs.iter().map(|&i| s.nodes[i].id.clone()).collect(),
        output_cardinalities: out_cards,
        conditions: roots.iter().map(|&i| s.nodes[i].id.clone()).collect(),
        condition_cardinalities: cond_cards,
        rows,
        factorization,
        warnings,
    })
}

/// Translates a conditional target into constraints on network cells, using
/// post-selection to set every split copy to its original's value.
pub fn network_cells(t: &ConditionalTarget, net: &NetworkScenario) -> Result<Vec<TargetCell>> {
    let party_out: Vec<usize> = net
        .parties
        .iter()
        .map(|p| {
            t.outputs
                .iter()
                .position(|o| *o == p.id)
                .ok_or_else(|| Error::Distribution(format!("party `{}` has no target column", p.id)))
        })
        .collect::<Result<_>>()?;
    enum Src {
        Output(usize),
        Condition(usize),
    }
    let setting_src: Vec<Src> = net
        .settings
        .iter()
        .map(|x| {
            if let Some(k) = t.conditions.iter().position(|c| *c == x.original) {
                Ok(Src::Condition(k))
            } else if let Some(k) = t.outputs.iter().position(|c| *c == x.original) {
                Ok(Src::Output(k))
            } else {
                Err(Error::Distribution(format!(
                    "setting `{}` has no source variable",
                    x.id
                )))
            }
        })
        .collect::<Result<_>>()?;
    let n_out: usize = t.output_cardinalities.iter().product();
    let mut cells = Vec::new();
    for row in &t.rows {
        let Some(probs) = &row.probabilities else {
            continue;
        };
        for o in 0..n_out {
            let outs = mixed_radix(&t.output_cardinalities, o);
            cells.push(TargetCell {
                outcomes: party_out.iter().map(|&k| outs[k]).collect(),
                settings: setting_src
                    .iter()
                    .map(|s| match s {
                        Src::Output(k) => outs[*k],
                        Src::Condition(k) => row.conditions[*k],
                    })
                    .collect(),
                probability: probs[o],
            });
        }
    }
    Ok(cells)
}
