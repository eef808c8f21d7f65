//! Causal structures, their rewriting into network scenarios, and the
//! observed targets those scenarios must reproduce.

mod distribution;
mod network;
pub mod presets;
mod structure;
mod transform;

pub use distribution::{
    conditional_target, network_cells, ConditionalRow, ConditionalTarget, Distribution,
    FactorizationCheck, TargetCell, NORMALIZATION_TOL,
};
pub use network::{EndogenousGroup, GroupMember, NetworkScenario, Party, SettingNode, Slot};
pub use structure::{classify, parse_structure, CausalStructure, Node, NodeKind, StructureClass};
pub use transform::{
    exogenize, interrupt, EndogenousGroupSpec, Exogenized, PostSelection, TransformReport,
};

use crate::error::Result;

/// Outcome of rewriting an arbitrary supported structure into a network.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub original: CausalStructure,
    pub class: StructureClass,
    pub network_structure: CausalStructure,
    pub groups: Vec<EndogenousGroupSpec>,
    pub report: TransformReport,
    pub network: NetworkScenario,
}

/// Exogenizes (when needed), interrupts, and converts to a network scenario.
pub fn prepare(s: &CausalStructure) -> Result<Prepared> {
    s.validate()?;
    let class = classify(s);
    let mut report = TransformReport::default();
    let (exo, groups) = if class == StructureClass::NonExogenous {
        let (e, r) = exogenize(s)?;
        report.merge(r);
        (e.structure, e.groups)
    } else {
        (s.clone(), Vec::new())
    };
    let (net_s, r) = interrupt(&exo)?;
    report.merge(r);
    let network = NetworkScenario::from_structure(&net_s, &groups, &report)?;
    Ok(Prepared {
        original: s.clone(),
        class,
        network_structure: net_s,
        groups,
        report,
        network,
    })
}

impl NetworkScenario {
    pub fn triangle(outcomes: usize) -> Self {
        prepare(&presets::triangle(outcomes))
            .expect("triangle prepares")
            .network
    }

    pub fn bell(outcomes: usize, settings: usize) -> Self {
        prepare(&presets::bell(outcomes, settings))
            .expect("bell prepares")
            .network
    }
}
