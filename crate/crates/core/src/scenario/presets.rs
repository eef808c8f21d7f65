//! Reference structures used by tests, benches and the bundled scenario files.

use super::structure::{CausalStructure, Node};

/// Three bipartite sources shared pairwise by A, B and C. Edge order gives
/// A slots (CA, AB), B slots (AB, BC), C slots (BC, CA).
pub fn triangle(outcomes: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::latent("AB"),
            Node::latent("BC"),
            Node::latent("CA"),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
            Node::observed("C", outcomes),
        ],
        &[
            ("CA", "A"),
            ("AB", "A"),
            ("AB", "B"),
            ("BC", "B"),
            ("BC", "C"),
            ("CA", "C"),
        ],
    )
    .expect("triangle is valid")
}

/// One source, two parties with `settings` inputs each.
pub fn bell(outcomes: usize, settings: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::latent("rho"),
            Node::observed("X", settings),
            Node::observed("Y", settings),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
        ],
        &[("rho", "A"), ("X", "A"), ("rho", "B"), ("Y", "B")],
    )
    .expect("bell is valid")
}

/// X → A → B with a latent source shared by A and B.
pub fn instrumental(outcomes: usize, settings: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::observed("X", settings),
            Node::latent("rho"),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
        ],
        &[("X", "A"), ("rho", "A"), ("rho", "B"), ("A", "B")],
    )
    .expect("instrumental is valid")
}

/// Triangle whose three parties all read one setting X.
pub fn shared_setting_triangle(outcomes: usize, settings: usize) -> CausalStructure {
    let mut nodes = triangle(outcomes).nodes;
    nodes.insert(3, Node::observed("X", settings));
    CausalStructure::new(
        nodes,
        &[
            ("CA", "A"),
            ("AB", "A"),
            ("AB", "B"),
            ("BC", "B"),
            ("BC", "C"),
            ("CA", "C"),
            ("X", "A"),
            ("X", "B"),
            ("X", "C"),
        ],
    )
    .expect("shared-setting triangle is valid")
}

/// A latent system rho_BC, fed by source rho_AS and controlled by S, is
/// distributed between B and C.
pub fn switched_source(outcomes: usize, settings: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::latent("rho_AS"),
            Node::observed("S", settings),
            Node::latent("rho_BC"),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
            Node::observed("C", outcomes),
        ],
        &[
            ("rho_AS", "A"),
            ("rho_AS", "rho_BC"),
            ("S", "rho_BC"),
            ("rho_BC", "B"),
            ("rho_BC", "C"),
        ],
    )
    .expect("switched source is valid")
}

/// rho_BC has two latent parents L and M and feeds B and C; R is shared by
/// C and D, M also feeds D.
pub fn two_parent_relay(outcomes: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::latent("L"),
            Node::latent("M"),
            Node::latent("R"),
            Node::latent("rho_BC"),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
            Node::observed("C", outcomes),
            Node::observed("D", outcomes),
        ],
        &[
            ("L", "A"),
            ("L", "rho_BC"),
            ("M", "rho_BC"),
            ("rho_BC", "B"),
            ("rho_BC", "C"),
            ("R", "C"),
            ("M", "D"),
            ("R", "D"),
        ],
    )
    .expect("two-parent relay is valid")
}

/// Chain A - B - C with sources L (A, B) and R (B, C); B has two slots.
pub fn bilocal(outcomes: usize) -> CausalStructure {
    CausalStructure::new(
        vec![
            Node::latent("L"),
            Node::latent("R"),
            Node::observed("A", outcomes),
            Node::observed("B", outcomes),
            Node::observed("C", outcomes),
        ],
        &[("L", "A"), ("L", "B"), ("R", "B"), ("R", "C")],
    )
    .expect("bilocal is valid")
}
